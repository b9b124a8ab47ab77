"""Hensel lifting of low-degree roots.

The engine has three layers:

  - lift_step: one refinement h -> H_{<=i}[h - P(x,h)/delta], as a circuit.
  - build_A_recurrence: the small circuits A_1..A_d over generator
    variables with H_{<=i}[f] = H_{<=i}[A_i(g_0..g_d)]; the recurrence adds
    at most 10*d^2 wires per step (hard law, checked on every build).
  - lift_root: the end-to-end pipeline; finds a translation making some
    base-field value a simple root of P(0, y), reduces multiplicity, runs
    the recurrence, composes with the generators, truncates to degree d,
    translates back, and certifies the residual P(x, f) = 0 against the
    dense oracle (Schwartz-Zippel above budget).
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

from .circuit import Circuit, CircuitBuilder, drop_unused_vars, substitute
from .dense import (
    DEFAULT_BUDGET,
    ExpansionBudget,
    expand,
    hasse_derivative_dense,
    univariate_roots,
)
from .errors import (
    AllDerivativesVanish,
    BudgetExceeded,
    NoRationalRoot,
    NotASimpleRoot,
    ResidualNonzero,
    ZeroDelta,
)
from .fields import sample_grid
from .seeding import stream
from .transforms import (
    GeneratorSet,
    generator_set,
    hasse_derivative_circuit,
    homogenize_upto,
    translate,
    truncate_deg,
)

A_STEP_WIRE_LAW = 10  # size(A_i) - size(A_{i-1}) <= 10 * d^2, so size(A_d) <= 10 * d^3
TRANSLATE_TRIALS = 32


@dataclass
class LiftState:
    """State of the A_i recurrence for one (P, alpha, d)."""

    alpha: object
    delta: object
    gens: GeneratorSet
    A: list  # A[i-1] computes A_i over the generator variables
    i: int
    wire_deltas: list = dc_field(default_factory=list)

    @property
    def d(self) -> int:
        return self.gens.d


@dataclass
class RootCertificate:
    root: Circuit
    alpha: object
    delta: object
    multiplicity: int
    shift: tuple
    residual_mode: str  # "oracle" | "sz"
    metrics_chain: list
    state: LiftState


def lift_step(P: Circuit, h: Circuit, i: int, delta, y: int) -> Circuit:
    """One Hensel step: circuit for H_{<=i}[h - P(x, h)/delta].

    h must be a circuit over P's variable space that does not read y. The
    construction is exact circuit composition; nothing is expanded.
    """
    if delta == P.field.zero:
        raise ZeroDelta("lifting needs a nonzero delta")
    fld = P.field
    comp = substitute(P, {y: h}, num_vars=P.num_vars)
    b = CircuitBuilder(fld, P.num_vars)
    h_id = b.import_circuit(h)[0]
    c_id = b.import_circuit(comp)[0]
    out = b.add(h_id, b.mul(b.const(fld.neg(fld.inv(delta))), c_id))
    raw = b.finish(out)
    return truncate_deg(raw, i)


def reduce_multiplicity(P: Circuit, alpha, y: int):
    """Smallest m >= 1 with the order-m y-derivative nonzero at (0, alpha);
    returns (order-(m-1) Hasse derivative of P, m). m = 1 returns P itself.
    """
    fld = P.field
    nv = P.num_vars
    zeros = [fld.zero] * nv
    b = CircuitBuilder(fld, nv)
    bindings = {i: b.const(fld.zero) for i in range(nv) if i != y}
    at_origin = b.finish(b.import_circuit(P, var_bindings=bindings))
    p_univ = expand(at_origin)
    if p_univ.is_zero():
        raise AllDerivativesVanish("P(0, y) is identically zero; translate the origin first")
    if p_univ.evaluate(_point_at(fld, nv, y, alpha)) != fld.zero:
        raise ValueError("alpha is not a root of P(0, y)")
    for m in range(1, p_univ.degree_in(y) + 1):
        dm = hasse_derivative_dense(p_univ, y, m)
        if dm.evaluate(_point_at(fld, nv, y, alpha)) != fld.zero:
            if m == 1:
                return P, 1
            return hasse_derivative_circuit(P, y, m - 1), m
    raise AllDerivativesVanish("all y-derivatives vanish at (0, alpha)")


def _point_at(fld, nv, y, alpha):
    point = [fld.zero] * nv
    point[y] = alpha
    return point


def build_A_recurrence(
    P: Circuit,
    alpha,
    d: int,
    y: int,
    deg_y_bound: int | None = None,
    deg_bound: int | None = None,
    budget: ExpansionBudget = DEFAULT_BUDGET,
) -> LiftState:
    """Construct A_1..A_d over the generator variables.

    Requires P(0, alpha) = 0 and dP/dy(0, alpha) != 0. Each step adds the
    shared power ladder (A_{i-1} - f0)^j once and reuses it across the
    affine forms, which is what keeps the additions within 10*d^2 wires.
    """
    fld = P.field
    if P.evaluate1(_point_at(fld, P.num_vars, y, alpha)) != fld.zero:
        raise NotASimpleRoot(f"alpha={alpha!r} is not a root of P(0, y)")
    gens = generator_set(
        P, y, alpha, d, deg_y_bound=deg_y_bound, deg_bound=deg_bound, budget=budget
    )
    consts = gens.deriv_constants  # c_j = (d^j P / dy^j)(0, alpha)
    delta = consts[1]
    if delta == fld.zero:
        raise NotASimpleRoot(
            f"alpha={alpha!r} is a multiple root of P(0, y); reduce multiplicity first"
        )

    t = len(gens.members)
    b = CircuitBuilder(fld, max(t, 1))
    ell = []
    for j in range(d + 1):
        zi = gens.z_index(j)
        if zi is None:
            ell.append(b.const(consts[j]))
        else:
            ell.append(b.add(b.inp(zi), b.const(consts[j])))
    neg_inv_delta = b.const(fld.neg(fld.inv(delta)))

    a_cur = b.add(b.const(alpha), b.mul(neg_inv_delta, ell[0]))
    A_circs = [b.finish(a_cur)]
    deltas = [A_circs[0].size()]
    for i in range(2, d + 1):
        w = b.add(a_cur, b.const(fld.neg(alpha)))
        pows = [None, w]
        for _ in range(2, i + 1):
            pows.append(b.mul(pows[-1], w))
        terms = [ell[0]] + [b.mul(ell[j], pows[j]) for j in range(1, i + 1)]
        a_cur = b.add(a_cur, b.mul(neg_inv_delta, b.add(*terms)))
        A_circs.append(b.finish(a_cur))
        deltas.append(A_circs[-1].size() - A_circs[-2].size())

    law = A_STEP_WIRE_LAW * d * d
    for i, added in enumerate(deltas, start=1):
        if added > law:
            raise AssertionError(
                f"A recurrence wire law violated at step {i}: {added} > {law}"
            )
    return LiftState(alpha=alpha, delta=delta, gens=gens, A=A_circs, i=d, wire_deltas=deltas)


def compose_root(state: LiftState, k: int | None = None) -> Circuit:
    """H_{<=k}[A_k(g_0..g_d)] as a circuit over P's variable space (the y
    slot comes back unused). k defaults to the full lift order d."""
    d = state.d
    if k is None:
        k = d
    if not 1 <= k <= d:
        raise ValueError(f"truncation order {k} outside 1..{d}")
    a_k = state.A[k - 1]
    pruned = homogenize_upto(a_k, k)
    bindings = {pos: circ for pos, (_, circ) in enumerate(state.gens.members)}
    if not bindings:
        # constant root: A_k is a constant circuit
        b = CircuitBuilder(a_k.field, state.gens.num_vars)
        val = a_k.evaluate1([a_k.field.zero] * a_k.num_vars)
        return b.finish(b.const(val))
    composed = substitute(pruned, bindings, num_vars=state.gens.num_vars)
    bound = max(1, k * state.gens.d)
    return truncate_deg(composed, k, deg_bound=bound)


def _stage(name: str, circ: Circuit) -> tuple:
    m = circ.metrics()
    return (name, {"size": m["size"], "depth": m["depth"], "formal_degree": m["formal_degree"]})


def lift_root(
    P: Circuit,
    y: int,
    d: int,
    seed: int,
    alpha=None,
    budget: ExpansionBudget = DEFAULT_BUDGET,
) -> RootCertificate:
    """Find a circuit f of degree <= d with P(x, f) = 0.

    Searches translations of the origin until P(0, y) acquires a base-field
    root (alpha pins the root and skips the search), reduces multiplicity,
    runs the A recurrence, composes and truncates, translates back, and
    certifies the residual. The certificate records per-stage metrics and
    whether the residual check ran on the dense oracle or fell back to
    Schwartz-Zippel points.
    """
    fld = P.field
    nv = P.num_vars
    x_vars = [i for i in range(nv) if i != y]
    if d < 1:
        raise ValueError("lift degree must be >= 1")

    grid = 2 * max(1, P.formal_degree()) * max(1, d) + 1
    rng = stream(seed, "lift-root", "translate")
    shifts = [tuple(fld.zero for _ in x_vars)]
    if alpha is None:
        for _ in range(TRANSLATE_TRIALS):
            shifts.append(tuple(fld.embed(rng.randrange(grid)) for _ in x_vars))

    saw_candidate = False
    for c in shifts:
        full_shift = [fld.zero] * nv
        for xi, ci in zip(x_vars, c):
            full_shift[xi] = ci
        Pc = P if all(ci == fld.zero for ci in c) else translate(P, full_shift)
        chain = [_stage("input", P), _stage("translated", Pc)]

        b = CircuitBuilder(fld, nv)
        bindings = {i: b.const(fld.zero) for i in x_vars}
        p_univ = expand(b.finish(b.import_circuit(Pc, var_bindings=bindings)), budget)
        if p_univ.is_zero():
            continue
        roots = univariate_roots(p_univ)
        if alpha is not None:
            roots = [rm for rm in roots if rm[0] == alpha]
        for root_val, _mult in roots:
            saw_candidate = True
            try:
                P_try, m = reduce_multiplicity(Pc, root_val, y)
            except AllDerivativesVanish:
                continue
            try:
                state = build_A_recurrence(P_try, root_val, d, y, budget=budget)
            except NotASimpleRoot:
                continue
            h = compose_root(state)
            f_cand = h if all(ci == fld.zero for ci in c) else translate(
                h, [fld.neg(v) for v in full_shift]
            )
            mode = _residual_check(P, y, f_cand, seed, budget)
            if mode is None:
                continue
            chain.append(_stage("multiplicity-reduced", P_try))
            chain.append(_stage("A_d", state.A[-1]))
            chain.append(_stage("composed-truncated", h))
            root_circ = drop_unused_vars(f_cand, x_vars)
            chain.append(_stage("root", root_circ))
            return RootCertificate(
                root=root_circ,
                alpha=root_val,
                delta=state.delta,
                multiplicity=m,
                shift=c,
                residual_mode=mode,
                metrics_chain=chain,
                state=state,
            )
    if not saw_candidate:
        raise NoRationalRoot(
            "no translation produced a base-field root of P(0, y)"
        )
    raise ResidualNonzero(
        f"no candidate root of degree <= {d} satisfies P(x, f) = 0; "
        "the declared degree may be wrong or the root is not over the base field"
    )


def _residual_check(P: Circuit, y: int, f_cand: Circuit, seed: int, budget) -> str | None:
    """Certify P(x, f) = 0; returns 'oracle', 'sz', or None on failure."""
    fld = P.field
    residual = substitute(P, {y: f_cand}, num_vars=P.num_vars)
    try:
        return "oracle" if expand(residual, budget).is_zero() else None
    except BudgetExceeded:
        pass
    grid = 2 * max(1, residual.formal_degree())
    pts = sample_grid(fld, grid, 64 * residual.num_vars, seed, "lift-root", "residual-sz")
    nv = residual.num_vars
    for t in range(64):
        point = pts[t * nv : (t + 1) * nv]
        if residual.evaluate1(point) != fld.zero:
            return None
    return "sz"
