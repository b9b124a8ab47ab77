"""Circuit-to-circuit constructions.

Everything here is exact and structural: homogeneous components by gate
splitting (Strassen), coefficient extraction by interpolation on a spare
variable, Hasse-derivative circuits, translations, monic normal form, and
generator sets. Each construction has a tracked size envelope; the test
suite asserts the envelopes and cross-checks every output against the
dense oracle.

Two conventions keep the stated depth bounds true:
  - linear combinations ride on the sum layer that absorbs them (constant
    multiplication is depth-transparent, see circuit.py), and
  - genuine products created on top of an extracted coefficient are pushed
    through its top addition layer (`_mul_into_adds`), the way interpolation
    proofs absorb a power of y in the product layer below the top sum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

from .circuit import ADD, Circuit, CircuitBuilder, drop_unused_vars, formal_degree_in
from .dense import DEFAULT_BUDGET, ExpansionBudget, expand_outputs
from .errors import ArityMismatch, BudgetExceeded, FieldTooSmall, SearchExhausted
from .fields import PrimeField, sample_grid
from .seeding import stream

# documented constants for the size envelopes asserted by the suite
HOMOGENIZE_SIZE_FACTOR = 12      # size(H_k[C]) <= 12 * k^2 * size(C) + 12 * (k + 1)
GENSET_SIZE_FACTOR = 64          # member size <= 64 * size(P) * r^5 (safe envelope)
MAKE_MONIC_TRIALS_PER_DEGREE = 16


# -- interpolation weights ----------------------------------------------------

_VINV_CACHE: dict = {}


def _vandermonde_inverse(fld, dmax: int):
    """Rows W[j] with coeff_j = sum_a W[j][a] * P(node_a), nodes = 0..dmax."""
    key = (fld, dmax)
    hit = _VINV_CACHE.get(key)
    if hit is not None:
        return hit
    if isinstance(fld, PrimeField) and fld.p <= dmax:
        raise FieldTooSmall(f"need {dmax + 1} distinct elements, field has {fld.p}")
    n = dmax + 1
    nodes = [fld.embed(a) for a in range(n)]
    # Gauss-Jordan on [V | I] with V[a][j] = node_a^j; the result's row j
    # gives the weights for coefficient j.
    mat = []
    for a in range(n):
        row = [fld.pow(nodes[a], j) for j in range(n)]
        row += [fld.one if t == a else fld.zero for t in range(n)]
        mat.append(row)
    for col in range(n):
        piv = next(r for r in range(col, n) if mat[r][col] != fld.zero)
        mat[col], mat[piv] = mat[piv], mat[col]
        inv = fld.inv(mat[col][col])
        mat[col] = [fld.mul(v, inv) for v in mat[col]]
        for r in range(n):
            if r != col and mat[r][col] != fld.zero:
                f = mat[r][col]
                mat[r] = [fld.sub(v, fld.mul(f, w)) for v, w in zip(mat[r], mat[col])]
    # inverse columns correspond to evaluations; transpose into weight rows
    winv = [[mat[j][n + a] for a in range(n)] for j in range(n)]
    _VINV_CACHE[key] = winv
    return winv


def _interp_engine(circ: Circuit, var: int, dmax: int):
    """Shared-copy interpolation: one builder holding dmax+1 substituted
    copies of `circ` plus, per output k and exponent j, the weighted
    combination computing the y^j coefficient. Returns (builder, rows)
    with rows[k][j] a gate id."""
    fld = circ.field
    weights = _vandermonde_inverse(fld, dmax)
    b = CircuitBuilder(fld, circ.num_vars)
    tops = []
    for a in range(dmax + 1):
        outs = b.import_circuit(circ, var_bindings={var: b.const(fld.embed(a))})
        tops.append(outs)
    rows = []
    for k in range(len(circ.outputs)):
        row = []
        for j in range(dmax + 1):
            parts = [
                b.mul(b.const(weights[j][a]), tops[a][k])
                for a in range(dmax + 1)
                if weights[j][a] != fld.zero
            ]
            row.append(b.add(*parts) if parts else b.const(fld.zero))
        rows.append(row)
    return b, rows


def _split_outputs(multi: Circuit) -> list:
    """One single-output view per output, sharing the same gate array."""
    return [Circuit(multi.field, multi.num_vars, multi.gates, [o]) for o in multi.outputs]


def _mul_into_adds(b: CircuitBuilder, gid: int, factors: tuple, memo: dict) -> int:
    """Multiply the value at `gid` by the factor gates, distributing the
    product through addition gates (and the scalar wrappers riding on them)
    so no product layer appears above a top sum."""
    key = (gid, factors)
    hit = memo.get(key)
    if hit is not None:
        return hit
    gate = b._gate(gid)
    if gate[0] == ADD:
        out = b.add(*(_mul_into_adds(b, c, factors, memo) for c in gate[1]))
    elif gate[0] == "mul" and len(gate[1]) == 2:
        ga, gb = b._gate(gate[1][0]), b._gate(gate[1][1])
        if ga[0] == "const" and gb[0] == ADD:
            out = _mul_into_adds(b, gate[1][1], factors + (gate[1][0],), memo)
        elif gb[0] == "const" and ga[0] == ADD:
            out = _mul_into_adds(b, gate[1][0], factors + (gate[1][1],), memo)
        else:
            out = b.mul(gid, *factors)
    else:
        out = b.mul(gid, *factors)
    memo[key] = out
    return out


# -- homogeneous components ---------------------------------------------------

def _strassen_components(b: CircuitBuilder, circ: Circuit, k: int) -> list:
    """Gate ids of the degree-0..k homogeneous components of circ's output."""
    fld = circ.field
    zero = b.const(fld.zero)
    comp: dict = {}
    for i in circ.reachable():
        gate = circ.gates[i]
        op = gate[0]
        if op == "in":
            comp[i] = [zero, b.inp(gate[1])] + [zero] * (k - 1) if k >= 1 else [zero]
        elif op == "const":
            comp[i] = [b.const(gate[1])] + [zero] * k
        elif op == "add":
            comp[i] = [
                b.add(*(comp[c][j] for c in gate[1])) for j in range(k + 1)
            ]
        else:
            cur = comp[gate[1][0]]
            for c in gate[1][1:]:
                nxt = comp[c]
                cur = [
                    b.add(*(b.mul(cur[a], nxt[j - a]) for a in range(j + 1)))
                    for j in range(k + 1)
                ]
            comp[i] = cur
    return comp[circ.output()]


def homogenize(circ: Circuit, k: int) -> Circuit:
    """Circuit computing H_k[circ] by degree-indexed gate splitting.

    Size is at most HOMOGENIZE_SIZE_FACTOR * k^2 * size + same * (k+1); the
    output has formal degree at most k.
    """
    if k < 0:
        raise ValueError("component index must be >= 0")
    b = CircuitBuilder(circ.field, circ.num_vars)
    comps = _strassen_components(b, circ, k)
    return b.finish(comps[k])


def homogenize_upto(circ: Circuit, d: int) -> Circuit:
    """Circuit computing H_{<=d}[circ] (sum of split components)."""
    if d < 0:
        raise ValueError("degree must be >= 0")
    b = CircuitBuilder(circ.field, circ.num_vars)
    comps = _strassen_components(b, circ, d)
    return b.finish(b.add(*comps))


# -- coefficient extraction ----------------------------------------------------

def extract_y_coeffs(circ: Circuit, y: int, dmax: int) -> list:
    """Circuits C_0..C_dmax with circ = sum_j C_j * y^j, deg_y(circ) <= dmax.

    Built as the inverse-Vandermonde combination of circ(x, 0..dmax) with
    the weights absorbed into the top sum layer: depth does not grow, size
    is at most (dmax+1) * size + O(dmax^2).
    """
    circ.output()
    if not 0 <= y < circ.num_vars:
        raise ArityMismatch(f"variable x{y + 1} out of range")
    b, rows = _interp_engine(circ, y, dmax)
    multi = b.finish(rows[0])
    return _split_outputs(multi)


def _scaled_copy(circ: Circuit, scale_vars) -> Circuit:
    """circ with x_i -> t * x_i for i in scale_vars; t is appended last."""
    nv = circ.num_vars
    b = CircuitBuilder(circ.field, nv + 1)
    t = b.inp(nv)
    bindings = {i: b.mul(t, b.inp(i)) for i in scale_vars}
    return b.finish(b.import_circuit(circ, var_bindings=bindings))


def truncate_deg(
    circ: Circuit,
    d: int,
    deg_bound: int | None = None,
    scale_vars=None,
) -> Circuit:
    """Circuit computing H_{<=d}[circ] via scaling-variable interpolation.

    deg_bound must be >= the true degree of circ in the scaled variables
    (defaults to the formal degree, which is always sound). When the degree
    cannot exceed d the circuit is returned unchanged. scale_vars restricts
    which variables count toward the degree (used by the exponential-sum
    module to keep auxiliary variables untouched).
    """
    if d < 0:
        raise ValueError("degree must be >= 0")
    circ.output()
    bound = circ.formal_degree() if deg_bound is None else deg_bound
    if bound <= d:
        return circ
    vars_to_scale = list(range(circ.num_vars)) if scale_vars is None else list(scale_vars)
    scaled = _scaled_copy(circ, vars_to_scale)
    t = circ.num_vars
    b, rows = _interp_engine(scaled, t, bound)
    total = b.add(*rows[0][: d + 1])
    multi = b.finish(total)
    return drop_unused_vars(multi, list(range(circ.num_vars)))


def homog_component_interp(
    circ: Circuit,
    k: int,
    deg_bound: int | None = None,
    scale_vars=None,
) -> Circuit:
    """H_k[circ] via scaling interpolation (depth-preserving Strassen twin)."""
    if k < 0:
        raise ValueError("component index must be >= 0")
    circ.output()
    bound = circ.formal_degree() if deg_bound is None else deg_bound
    fld = circ.field
    if k > bound:
        b = CircuitBuilder(fld, circ.num_vars)
        return b.finish(b.const(fld.zero))
    vars_to_scale = list(range(circ.num_vars)) if scale_vars is None else list(scale_vars)
    scaled = _scaled_copy(circ, vars_to_scale)
    b, rows = _interp_engine(scaled, circ.num_vars, bound)
    multi = b.finish(rows[0][k])
    return drop_unused_vars(multi, list(range(circ.num_vars)))


# -- Hasse derivative ----------------------------------------------------------

def hasse_derivative_circuit(
    circ: Circuit, y: int, j: int, deg_y_bound: int | None = None
) -> Circuit:
    """Circuit for the order-j Hasse derivative with respect to y.

    Assembles sum_{i>=j} C(i,j) * C_i(x) * y^(i-j) from the interpolated
    coefficients; the power of y is pushed into the product layer below
    each top sum so depth does not grow.
    """
    if j < 0:
        raise ValueError("derivative order must be >= 0")
    if j == 0:
        return circ
    circ.output()
    fld = circ.field
    dmax = formal_degree_in(circ, y) if deg_y_bound is None else deg_y_bound
    if j > dmax:
        b = CircuitBuilder(fld, circ.num_vars)
        return b.finish(b.const(fld.zero))
    b, rows = _interp_engine(circ, y, dmax)
    row = rows[0]
    memo: dict = {}
    terms = []
    for i in range(j, dmax + 1):
        w = fld.embed(math.comb(i, j))
        if w == fld.zero:
            continue
        if i == j:
            terms.append(b.mul(b.const(w), row[i]))
        else:
            ypow = b.power(b.inp(y), i - j)
            terms.append(b.mul(b.const(w), _mul_into_adds(b, row[i], (ypow,), memo)))
    out = b.add(*terms) if terms else b.const(fld.zero)
    return b.finish(out)


# -- translation ----------------------------------------------------------------

def translate(circ: Circuit, shift) -> Circuit:
    """Circuit computing circ(x + shift)."""
    if len(shift) != circ.num_vars:
        raise ArityMismatch(
            f"shift has {len(shift)} coordinates, circuit has {circ.num_vars} variables"
        )
    fld = circ.field
    b = CircuitBuilder(fld, circ.num_vars)
    bindings = {}
    for i, c in enumerate(shift):
        if c != fld.zero:
            bindings[i] = b.add(b.inp(i), b.const(c))
    outs = b.import_circuit(circ, var_bindings=bindings)
    return b.finish(outs)


# -- monic normal form ------------------------------------------------------------

@dataclass
class MonicForm:
    """Result of the x_i -> x_i + a_i * y change of variables.

    `circuit` computes circ(x + a*y, y) / leading_unit, which is monic of
    degree r in y. `y_var` is the distinguished variable index (appended
    when the input did not already carry one).
    """

    circuit: Circuit
    shift: tuple
    leading_unit: object
    y_var: int
    degree: int


def _top_component_value(circ: Circuit, point, r: int):
    """H_r[circ] evaluated at `point`, by interpolation on a scaling of the
    evaluation point (field values only, no circuit growth)."""
    fld = circ.field
    weights = _vandermonde_inverse(fld, r)
    acc = fld.zero
    for t in range(r + 1):
        tt = fld.embed(t)
        scaled_point = [fld.mul(tt, v) for v in point]
        if weights[r][t] != fld.zero:
            acc = fld.add(acc, fld.mul(weights[r][t], circ.evaluate1(scaled_point)))
    return acc


def make_monic(circ: Circuit, r: int, seed: int, y_var: int | None = None) -> MonicForm:
    """Find a shift a with H_r[circ](a, 1) != 0 and apply x_i -> x_i + a_i*y.

    r must be the exact total degree. The all-zero shift is tried first, so
    an input already monic in y passes through untouched (up to the leading
    unit). Seeded random search over the grid {0..r}^n afterwards; failure
    after 16*(r+1) trials signals a misdeclared degree.
    """
    circ.output()
    fld = circ.field
    if y_var is None:
        nv = circ.num_vars + 1
        y_var = circ.num_vars
        work = Circuit(fld, nv, circ.gates, circ.outputs)
    else:
        nv = circ.num_vars
        work = circ
    x_vars = [i for i in range(nv) if i != y_var]

    rng = stream(seed, "make-monic")
    trials = MAKE_MONIC_TRIALS_PER_DEGREE * (r + 1)
    tried_zero = False
    for _ in range(trials):
        if not tried_zero:
            a = [fld.zero] * len(x_vars)
            tried_zero = True
        else:
            a = [fld.embed(rng.randrange(r + 1)) for _ in x_vars]
        point = [fld.zero] * nv
        point[y_var] = fld.one
        for xi, ai in zip(x_vars, a):
            point[xi] = ai
        lead = _top_component_value(work, point, r)
        if lead == fld.zero:
            continue
        b = CircuitBuilder(fld, nv)
        ygate = b.inp(y_var)
        bindings = {}
        for xi, ai in zip(x_vars, a):
            if ai != fld.zero:
                bindings[xi] = b.add(b.inp(xi), b.mul(b.const(ai), ygate))
        out = b.import_circuit(work, var_bindings=bindings)[0]
        out = b.mul(b.const(fld.inv(lead)), out)
        return MonicForm(
            circuit=b.finish(out),
            shift=tuple(a),
            leading_unit=lead,
            y_var=y_var,
            degree=r,
        )
    raise SearchExhausted(
        f"no monic shift found in {trials} trials; is the declared degree {r} exact?"
    )


def undo_monic_shift(circ: Circuit, form: MonicForm) -> Circuit:
    """Apply the inverse change of variables x_i -> x_i - a_i * y."""
    fld = circ.field
    b = CircuitBuilder(fld, circ.num_vars)
    ygate = b.inp(form.y_var)
    bindings = {}
    x_vars = [i for i in range(form.circuit.num_vars) if i != form.y_var]
    for xi, ai in zip(x_vars, form.shift):
        if ai != fld.zero:
            bindings[xi] = b.add(b.inp(xi), b.mul(b.const(fld.neg(ai)), ygate))
    outs = b.import_circuit(circ, var_bindings=bindings)
    return b.finish(outs)


# -- generator sets -----------------------------------------------------------------

@dataclass
class GeneratorSet:
    """The nonzero polynomials of G_y(P, alpha, d).

    members holds (derivative order j, circuit) pairs; every member is
    H_{<=d} of the order-j Hasse derivative of P at y = alpha, minus its
    constant term. Member circuits live in P's variable space with the
    y slot unused.
    """

    alpha: object
    d: int
    y_var: int
    num_vars: int
    members: list = dc_field(default_factory=list)
    deriv_constants: list = dc_field(default_factory=list)  # H_0 per order j

    def member_for_order(self, j: int):
        for jj, circ in self.members:
            if jj == j:
                return circ
        return None

    def z_index(self, j: int) -> int | None:
        for pos, (jj, _) in enumerate(self.members):
            if jj == j:
                return pos
        return None


def generator_set(
    P: Circuit,
    y: int,
    alpha,
    d: int,
    deg_y_bound: int | None = None,
    deg_bound: int | None = None,
    budget: ExpansionBudget = DEFAULT_BUDGET,
    zero_test: str = "auto",
    sz_seed: int = 0,
) -> GeneratorSet:
    """Build G_y(P, alpha, d): for each order j in 0..d, truncate the Hasse
    derivative at y = alpha to degree d, subtract its constant term, and
    keep the members that are not identically zero.

    Zero testing goes through the dense oracle within budget; above budget
    it falls back to Schwartz-Zippel on 64 seeded points over a grid of
    size 2*max(d,1) (zero_test='oracle' propagates BudgetExceeded instead,
    'sz' skips the oracle entirely). A false keep is harmless downstream; a
    false drop is what the point count makes improbable.
    """
    if d < 1:
        raise ValueError("generator sets need d >= 1")
    P.output()
    fld = P.field
    dmax_y = formal_degree_in(P, y) if deg_y_bound is None else deg_y_bound
    dbound = P.formal_degree() if deg_bound is None else deg_bound

    # shared interpolation of P's y-coefficients, then each derivative at
    # y = alpha is just a linear combination (the y powers fold into alpha)
    b, rows = _interp_engine(P, y, dmax_y)
    row = rows[0]
    deriv_ids = []
    for j in range(d + 1):
        parts = []
        for i in range(j, dmax_y + 1):
            w = fld.mul(fld.embed(math.comb(i, j)), fld.pow(alpha, i - j))
            if w != fld.zero:
                parts.append(b.mul(b.const(w), row[i]))
        deriv_ids.append(b.add(*parts) if parts else b.const(fld.zero))
    derivs = b.finish(deriv_ids)
    h0 = derivs.evaluate([fld.zero] * derivs.num_vars)

    # one scaled extraction truncates every derivative to degree <= d
    nv = derivs.num_vars
    scaled = _scaled_copy(derivs, list(range(nv)))
    b2, rows2 = _interp_engine(scaled, nv, dbound)
    member_ids = []
    for k in range(d + 1):
        trunc = b2.add(*rows2[k][: min(d, dbound) + 1])
        member_ids.append(b2.add(trunc, b2.const(fld.neg(h0[k]))))
    multi = b2.finish(member_ids)

    denses = None
    if zero_test in ("auto", "oracle"):
        try:
            denses = expand_outputs(multi, budget)  # one pass over shared gates
        except BudgetExceeded:
            if zero_test == "oracle":
                raise
    members = []
    for j, cand_full in enumerate(_split_outputs(multi)):
        cand = drop_unused_vars(cand_full, list(range(nv)))
        if denses is not None:
            if denses[j].is_zero():
                continue
        elif _is_zero_candidate_sz(cand, d, sz_seed, j):
            continue
        members.append((j, cand))
    return GeneratorSet(
        alpha=alpha,
        d=d,
        y_var=y,
        num_vars=nv,
        members=members,
        deriv_constants=list(h0),
    )


def _is_zero_candidate_sz(cand, d, sz_seed, j) -> bool:
    grid = 2 * max(d, 1)
    points = sample_grid(cand.field, grid, 64 * cand.num_vars, sz_seed, "genset-sz", str(j))
    for t in range(64):
        point = points[t * cand.num_vars : (t + 1) * cand.num_vars]
        if cand.evaluate1(point) != cand.field.zero:
            return False
    return True
