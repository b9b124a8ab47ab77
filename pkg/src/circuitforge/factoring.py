"""Factor extraction for factors that need not be linear in y.

Pipeline: make P monic in y, walk multiplicity levels through Hasse
y-derivatives, find a separating shift giving distinct simple base-field
roots of the univariate slice, lift every root, and combine a subset as
H_{<=|S|}[prod (y - q_i)]. Candidate subsets are screened densely and the
accepted one is rebuilt as a circuit, un-shifted back to the original
coordinates, and certified by exact divisibility against P - never by
sampling, so a non-factor can never be mislabeled.

Only factors genuinely involving y are reported: a candidate whose
un-shifted form loses all y-dependence is rejected, and a polynomial free
of the declared main variable yields NoFactorFound.

Roots of P(0, y) that are honest power series rather than polynomials are
out of reach of base-field lifting; plant factors that split into distinct
in-field roots.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field as dc_field

from .circuit import Circuit, CircuitBuilder
from .dense import (
    DEFAULT_BUDGET,
    DensePoly,
    ExpansionBudget,
    divides,
    expand,
    substitute_var_dense,
    translate_dense,
    truncate_dense,
    univariate_roots,
)
from .errors import (
    BudgetExceeded,
    NoFactorFound,
    NoSimpleRoots,
    NotASimpleRoot,
    ZeroPolynomial,
)
from .lifting import _stage, build_A_recurrence, compose_root
from .seeding import stream
from .transforms import (
    MonicForm,
    hasse_derivative_circuit,
    make_monic,
    translate,
    truncate_deg,
    undo_monic_shift,
)

SHIFT_TRIALS = 32


@dataclass
class RootBundle:
    """Approximate roots q_i of a (shifted, monic) polynomial.

    Each q_i is the unique degree-<=d polynomial with q_i(0) = alpha_i and
    H_{<=d}[source(x, q_i)] = 0; circuits live in source's variable space
    with the y slot unused.
    """

    shift: tuple
    alphas: list
    d: int
    y_var: int
    source: Circuit
    approx: list = dc_field(default_factory=list)
    states: list = dc_field(default_factory=list)
    approx_dense: list = dc_field(default_factory=list)


@dataclass
class FactorResult:
    factor: Circuit              # original coordinates
    subset: tuple                # 0-based indices into bundle.alphas
    multiplicity: int
    monic: MonicForm
    deriv_level: int
    bundle: RootBundle
    metrics_chain: list


def separating_shift(P: Circuit, y: int, seed: int, r: int | None = None, trials: int = SHIFT_TRIALS):
    """Search shifts c of the x-variables maximizing the count of distinct
    simple base-field roots of P(c, y); returns (c, roots). P should be
    monic in y (up to a unit) so no roots escape to infinity."""
    fld = P.field
    nv = P.num_vars
    x_vars = [i for i in range(nv) if i != y]
    bound = 2 * max(1, r if r is not None else P.formal_degree()) ** 2 + 1
    rng = stream(seed, "separating-shift")
    candidates = [tuple(fld.zero for _ in x_vars)]
    for _ in range(trials):
        candidates.append(tuple(fld.embed(rng.randrange(bound)) for _ in x_vars))

    best = None
    for c in candidates:
        point_bindings = dict(zip(x_vars, c))
        b = CircuitBuilder(fld, nv)
        bindings = {i: b.const(point_bindings[i]) for i in x_vars}
        univ = expand(b.finish(b.import_circuit(P, var_bindings=bindings)))
        if univ.is_zero():
            continue
        simple = [root for root, mult in univariate_roots(univ) if mult == 1]
        if best is None or len(simple) > len(best[1]):
            best = (c, simple)
    if best is None or not best[1]:
        raise NoSimpleRoots("no shift produced a simple base-field root")
    return best


def approx_roots(
    P: Circuit,
    alphas: list,
    d: int,
    y: int,
    shift: tuple = (),
    budget: ExpansionBudget = DEFAULT_BUDGET,
    verify: bool = True,
) -> RootBundle:
    """Lift every alpha_i (a simple root of P(0, y)) to its unique
    approximate root of degree <= d. d = 0 degenerates to constants."""
    fld = P.field
    bundle = RootBundle(shift=tuple(shift), alphas=list(alphas), d=d, y_var=y, source=P)
    source_dense = None
    if verify:
        try:
            source_dense = expand(P, budget)
        except BudgetExceeded:
            source_dense = None
    for alpha in alphas:
        if d == 0:
            b = CircuitBuilder(fld, P.num_vars)
            q = b.finish(b.const(alpha))
            state = None
        else:
            state = build_A_recurrence(P, alpha, d, y, budget=budget)
            q = compose_root(state)
        bundle.approx.append(q)
        bundle.states.append(state)
        q_dense = expand(q, budget)
        bundle.approx_dense.append(q_dense)
        zeros = [fld.zero] * P.num_vars
        if q_dense.evaluate(zeros) != alpha:
            raise NotASimpleRoot(f"lift from alpha={alpha!r} lost its constant term")
        if verify and source_dense is not None:
            residual = truncate_dense(substitute_var_dense(source_dense, y, q_dense), d)
            if not residual.is_zero():
                raise NotASimpleRoot(
                    f"H_<={d}[P(x, q)] != 0 for alpha={alpha!r}; root not liftable"
                )
    return bundle


def combine_roots(bundle: RootBundle, subset, d: int) -> Circuit:
    """Circuit for H_{<=d}[prod_{i in subset} (y - q_i)], truncation over
    total (x, y)-degree."""
    subset = tuple(subset)
    if not subset:
        raise ValueError("subset must be nonempty")
    fld = bundle.source.field
    nv = bundle.source.num_vars
    b = CircuitBuilder(fld, nv)
    parts = []
    bound = 0
    for i in subset:
        q_id = b.import_circuit(bundle.approx[i])[0]
        parts.append(b.sub(b.inp(bundle.y_var), q_id))
        if i < len(bundle.approx_dense) and bundle.approx_dense[i] is not None:
            bound += max(1, bundle.approx_dense[i].total_degree())
        else:
            bound += max(1, bundle.d)
    prod = b.mul(*parts) if len(parts) > 1 else parts[0]
    raw = b.finish(prod)
    return truncate_deg(raw, d, deg_bound=max(1, bound))


def _combine_dense(bundle: RootBundle, subset, d: int) -> DensePoly:
    fld = bundle.source.field
    nv = bundle.source.num_vars
    y = bundle.y_var
    acc = DensePoly.const(fld, nv, fld.one)
    y_poly = DensePoly.variable(fld, nv, y)
    for i in subset:
        acc = acc * (y_poly - bundle.approx_dense[i])
    return truncate_dense(acc, d)


def _unshift_dense(p: DensePoly, shift_x, x_vars, monic: MonicForm) -> DensePoly:
    """Undo the separating shift, then the monic change of variables."""
    fld = p.field
    full = [fld.zero] * p.n
    for xi, ci in zip(x_vars, shift_x):
        full[xi] = fld.neg(ci)
    out = translate_dense(p, full)
    y = monic.y_var
    for xi, ai in zip(x_vars, monic.shift):
        if ai != fld.zero:
            sub = DensePoly(fld, p.n, {
                _unit_exp(p.n, xi): fld.one,
                _unit_exp(p.n, y): fld.neg(ai),
            })
            out = substitute_var_dense(out, xi, sub)
    return out


def _unit_exp(n, i):
    e = [0] * n
    e[i] = 1
    return tuple(e)


def _leading_y_unit(p: DensePoly, y: int):
    """Leading y-coefficient if it is a nonzero field constant, else None."""
    dy = p.degree_in(y)
    if dy <= 0:
        return None
    lead = {e: c for e, c in p.terms.items() if e[y] == dy}
    if len(lead) != 1:
        return None
    (e, c), = lead.items()
    if any(x for i, x in enumerate(e) if i != y):
        return None
    return c


def _subset_iter(count: int, max_size: int, given=None):
    if given is not None:
        yield tuple(given)
        return
    for size in range(1, min(count, max_size) + 1):
        yield from itertools.combinations(range(count), size)


def extract_factor(
    P: Circuit,
    y: int,
    d: int,
    subset=None,
    seed: int = 0,
    budget: ExpansionBudget = DEFAULT_BUDGET,
) -> FactorResult:
    """Extract a factor of P of degree <= d involving y.

    subset=None enumerates candidate root subsets by increasing size and
    accepts the first one whose combination exactly divides P; an explicit
    subset (0-based indices into the simple-root list, which is sorted)
    combines exactly those roots. The returned factor is expressed in the
    original coordinates and, when its leading y-coefficient is a constant,
    normalized monic.
    """
    P.output()
    fld = P.field
    nv = P.num_vars
    x_vars = [i for i in range(nv) if i != y]
    if d < 1:
        raise ValueError("factor degree bound must be >= 1")

    P_dense = expand(P, budget)
    if P_dense.is_zero():
        raise ZeroPolynomial("cannot factor the zero polynomial")
    r = P_dense.total_degree()
    if r == 0:
        raise NoFactorFound("P is a nonzero constant")

    monic = make_monic(P, r, seed, y_var=y)
    Pm = monic.circuit
    chain = [_stage("input", P), _stage("monic", Pm)]

    # multiplicity levels: a factor of multiplicity m in P carries simple
    # roots at derivative level k = m - 1 and at no earlier level
    max_level = r if subset is None else 1
    for level in range(max_level):
        if r - level < 1:
            break
        if level == 0:
            Pk = Pm
        else:
            Pk = hasse_derivative_circuit(Pm, y, level)
            unit = fld.embed(math.comb(r, level))
            b = CircuitBuilder(fld, Pk.num_vars)
            out = b.mul(b.const(fld.inv(unit)), b.import_circuit(Pk)[0])
            Pk = b.finish(out)
        try:
            c, alphas = separating_shift(Pk, y, seed, r=r - level)
        except NoSimpleRoots:
            continue
        full_shift = [fld.zero] * Pk.num_vars
        for xi, ci in zip(x_vars, c):
            full_shift[xi] = ci
        Pk_s = Pk if all(v == fld.zero for v in c) else translate(Pk, full_shift)
        try:
            # the subset screening and the final exact-divisibility check
            # certify candidates; the per-root residual re-check is skipped
            bundle = approx_roots(Pk_s, alphas, d, y, shift=c, budget=budget, verify=False)
        except NotASimpleRoot:
            continue

        for S in _subset_iter(len(alphas), d, given=subset):
            if any(not 0 <= i < len(alphas) for i in S):
                raise ValueError(f"subset {S} out of range for {len(alphas)} roots")
            dS = len(S)
            cand = _combine_dense(bundle, S, dS)
            cand_orig = _unshift_dense(cand, c, x_vars, monic)
            if cand_orig.degree_in(y) < 1:
                continue
            mult = divides(cand_orig, P_dense, main_var=y)
            if mult < 1:
                continue
            factor_circ = combine_roots(bundle, S, dS)
            if any(v != fld.zero for v in c):
                factor_circ = translate(factor_circ, [fld.neg(v) for v in full_shift])
            factor_circ = undo_monic_shift(factor_circ, monic)
            unit = _leading_y_unit(cand_orig, y)
            if unit is not None and unit != fld.one:
                b = CircuitBuilder(fld, nv)
                out = b.mul(b.const(fld.inv(unit)), b.import_circuit(factor_circ)[0])
                factor_circ = b.finish(out)
            check = divides(expand(factor_circ, budget), P_dense, main_var=y)
            if check != mult:
                raise AssertionError("circuit factor disagrees with its dense screen")
            chain.append(_stage("factor", factor_circ))
            return FactorResult(
                factor=factor_circ,
                subset=tuple(S),
                multiplicity=mult,
                monic=monic,
                deriv_level=level,
                bundle=bundle,
                metrics_chain=chain,
            )
        if subset is not None:
            break
    raise NoFactorFound(
        f"no combination of lifted roots up to size {d} divides P "
        f"(degree-<= {d} factors in y may not exist over this field)"
    )
