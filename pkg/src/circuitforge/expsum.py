"""Exponential-sum (VNP-style) representations and their calculus.

An ExpSumPoly is a verifier circuit Q over x-variables plus Boolean
auxiliary variables; it represents sum over all 0/1 assignments to the
auxiliaries of Q. Every operation here preserves that contract and is
brute-force checkable while the auxiliary count stays small.

Composition uses one fresh copy of the auxiliary block per use site; that
is the whole point of requiring tree-shaped combinators (leaf_substitute
rejects non-formulas), since substituting a shared sub-circuit twice would
sum squares instead of squaring the sum.

Sum composition normalizes: summing S1(x,y) + S2(x,z) over the joint cube
overcounts each side by the other's cube size, so the verifiers are scaled
by 2^-|z| and 2^-|y| respectively. The scalars exist in characteristic 0
and odd characteristic, the only fields this package supports.
"""

from __future__ import annotations

from dataclasses import dataclass

import math

from .circuit import (
    Circuit,
    CircuitBuilder,
    input_circuit,
    is_formula,
    remap_vars,
    substitute,
)
from .dense import (
    DEFAULT_BUDGET,
    DensePoly,
    ExpansionBudget,
    expand,
)
from .errors import (
    BudgetExceeded,
    CharacteristicDividesPower,
    NotAFormula,
    ShapeError,
    ZeroPolynomial,
)
from .factoring import _leading_y_unit, extract_factor
from .fields import Field, Rationals, same_field
from .transforms import (
    hasse_derivative_circuit,
    homog_component_interp,
    homogenize_upto,
    translate,
    truncate_deg,
)

BRUTE_FORCE_AUX_LIMIT = 20
SELECTOR_SIZE_FACTOR = 30       # selector formula size <= 30 * s'^2
FORMULA_EXPANSION_NODE_CAP = 100_000


@dataclass
class ExpSumPoly:
    """verifier circuit plus the indices of its auxiliary variables."""

    verifier: Circuit
    aux: tuple

    def __post_init__(self):
        self.verifier.output()
        aux = tuple(self.aux)
        if len(set(aux)) != len(aux):
            raise ValueError("duplicate auxiliary variables")
        for a in aux:
            if not 0 <= a < self.verifier.num_vars:
                raise ValueError(f"auxiliary variable {a} out of range")
        self.aux = aux

    @property
    def m(self) -> int:
        return len(self.aux)

    @property
    def nx(self) -> int:
        return self.verifier.num_vars - self.m

    @property
    def field(self) -> Field:
        return self.verifier.field

    def x_vars(self) -> list:
        aux = set(self.aux)
        return [i for i in range(self.verifier.num_vars) if i not in aux]

    def is_canonical(self) -> bool:
        return self.aux == tuple(range(self.nx, self.verifier.num_vars))

    def canonical(self, nx_target: int | None = None) -> "ExpSumPoly":
        """x-variables first (order kept), auxiliaries trailing; optionally
        pad the x-block to nx_target."""
        nx = self.nx
        target = nx if nx_target is None else nx_target
        if target < nx:
            raise ValueError("cannot shrink the x-block")
        if self.is_canonical() and target == nx:
            return self
        mapping = {}
        for new, old in enumerate(self.x_vars()):
            mapping[old] = new
        for k, a in enumerate(sorted(self.aux)):
            mapping[a] = target + k
        ver = remap_vars(self.verifier, mapping, target + self.m)
        return ExpSumPoly(ver, tuple(range(target, target + self.m)))

    def __repr__(self):
        return f"<ExpSumPoly nx={self.nx} m={self.m} verifier={self.verifier!r}>"


def plain_expsum(circ: Circuit) -> ExpSumPoly:
    return ExpSumPoly(circ, ())


def exp_sum_expand(E: ExpSumPoly, budget: ExpansionBudget = DEFAULT_BUDGET) -> DensePoly:
    """The represented polynomial, over the x-variables only.

    Equals the defining sum over all 2^m Boolean assignments; computed
    term-wise (a verifier monomial contributes its coefficient once per
    compatible assignment, i.e. scaled by 2^{#auxiliaries it omits}).
    """
    if E.m > BRUTE_FORCE_AUX_LIMIT:
        raise BudgetExceeded("terms", f"2^{E.m} auxiliary assignments")
    E = E.canonical()
    field = E.field
    nx = E.nx
    v = expand(E.verifier, budget)
    acc: dict = {}
    for e, c in v.terms.items():
        zeros = sum(1 for a in e[nx:] if a == 0)
        w = field.mul(c, field.embed(1 << zeros))
        xe = e[:nx]
        s = field.add(acc.get(xe, field.zero), w)
        if s == field.zero:
            acc.pop(xe, None)
        else:
            acc[xe] = s
    return DensePoly(field, nx, acc)


def exp_sum_eval(E: ExpSumPoly, point) -> object:
    """Value of the represented polynomial at an x-point (sums the verifier
    over the Boolean cube; the literal definition)."""
    if E.m > BRUTE_FORCE_AUX_LIMIT:
        raise BudgetExceeded("terms", f"2^{E.m} auxiliary assignments")
    E = E.canonical()
    field = E.field
    acc = field.zero
    for mask in range(1 << E.m):
        full = list(point) + [
            field.one if mask >> j & 1 else field.zero for j in range(E.m)
        ]
        acc = field.add(acc, E.verifier.evaluate1(full))
    return acc


def _inv_pow2(field: Field, k: int):
    v = field.embed(1 << k)
    if v == field.zero:
        raise CharacteristicDividesPower(f"2^{k} vanishes in this field")
    return field.inv(v)


def _combine(parts: list, op: str) -> ExpSumPoly:
    field = parts[0].field
    for p in parts[1:]:
        same_field(field, p.field)
    canon = [p.canonical() for p in parts]
    nx = max(p.nx for p in canon)
    total_aux = sum(p.m for p in canon)
    b = CircuitBuilder(field, nx + total_aux)
    ids = []
    offset = nx
    for p in canon:
        bindings = {a: b.inp(offset + k) for k, a in enumerate(p.aux)}
        ids.append((b.import_circuit(p.verifier, var_bindings=bindings)[0], p.m))
        offset += p.m
    if op == "mul":
        out = b.mul(*(v for v, _ in ids))
    else:
        terms = []
        for vid, mt in ids:
            terms.append(b.mul(b.const(_inv_pow2(field, total_aux - mt)), vid))
        out = b.add(*terms)
    return ExpSumPoly(b.finish(out), tuple(range(nx, nx + total_aux)))


def sum_compose(e1: ExpSumPoly, e2: ExpSumPoly) -> ExpSumPoly:
    """Representation of R1 + R2 over the joint cube (scaled verifiers)."""
    return _combine([e1, e2], "add")


def prod_compose(e1: ExpSumPoly, e2: ExpSumPoly) -> ExpSumPoly:
    """Representation of R1 * R2 over the joint cube."""
    return _combine([e1, e2], "mul")


def scale_expsum(E: ExpSumPoly, value) -> ExpSumPoly:
    b = CircuitBuilder(E.field, E.verifier.num_vars)
    out = b.mul(b.const(value), b.import_circuit(E.verifier)[0])
    return ExpSumPoly(b.finish(out), E.aux)


# -- the selector gadget and one Valiant level ---------------------------------

def selector_R(s_prime: int, field: Field | None = None) -> Circuit:
    """Block-selector formula over 5*s' variables: value 1 on Boolean points
    where exactly one block is all-ones and the rest are all-zeros, else 0.
    Tree-shaped by construction; size <= SELECTOR_SIZE_FACTOR * s'^2."""
    if s_prime < 1:
        raise ValueError("need s' >= 1")
    if field is None:
        field = Rationals()
    b = CircuitBuilder(field, 5 * s_prime, share=False)
    blocks = []
    for i in range(s_prime):
        factors = [b.inp(5 * i + j) for j in range(5)]
        for other in range(s_prime):
            if other == i:
                continue
            for j in range(5):
                factors.append(
                    b.add(b.const(field.one), b.mul(b.const(field.neg(field.one)), b.inp(5 * other + j)))
                )
        blocks.append(b.mul(*factors))
    out = b.add(*blocks) if len(blocks) > 1 else blocks[0]
    circ = b.finish(out)
    if not is_formula(circ):
        raise AssertionError("selector construction lost its tree shape")
    return circ


def valiant_step(blocks: list) -> ExpSumPoly:
    """One level of the selector construction: represents
    sum_i prod_{j=1..5} A_{i,j} for caller-supplied quintuples of exp-sums.

    Auxiliaries are the 5*s' selector variables plus one fresh copy of every
    block entry's auxiliary block; entries with differing auxiliary counts
    are rebalanced by scalar correction so the represented polynomial is
    exactly the sum of products.
    """
    if not blocks:
        raise ShapeError("need at least one block")
    for blk in blocks:
        if len(blk) != 5:
            raise ShapeError(f"blocks must be quintuples, got {len(blk)} entries")
    s_prime = len(blocks)
    entries = [[e.canonical() for e in blk] for blk in blocks]
    field = entries[0][0].field
    nx = max(e.nx for blk in entries for e in blk)
    entries = [[e.canonical(nx) for e in blk] for blk in entries]
    block_aux = [sum(e.m for e in blk) for blk in entries]
    total_block_aux = sum(block_aux)

    sel_base = nx
    aux_base = nx + 5 * s_prime
    b = CircuitBuilder(field, aux_base + total_block_aux)

    sel = selector_R(s_prime, field)
    sel_id = b.import_circuit(
        sel, var_bindings={v: b.inp(sel_base + v) for v in range(5 * s_prime)}
    )[0]

    offset = aux_base
    imported = [[None] * 5 for _ in range(s_prime)]
    for i in range(s_prime):
        for j in range(5):
            e = entries[i][j]
            bindings = {a: b.inp(offset + k) for k, a in enumerate(e.aux)}
            imported[i][j] = b.import_circuit(e.verifier, var_bindings=bindings)[0]
            offset += e.m

    factors = [sel_id]
    for j in range(5):
        terms = []
        for i in range(s_prime):
            v = imported[i][j]
            if j == 0:
                gamma = _inv_pow2(field, total_block_aux - block_aux[i])
                v = b.mul(b.const(gamma), v)
            terms.append(b.mul(b.inp(sel_base + 5 * i + j), v))
        factors.append(b.add(*terms))
    out = b.mul(*factors)
    return ExpSumPoly(b.finish(out), tuple(range(nx, aux_base + total_block_aux)))


# -- formula composition ------------------------------------------------------------

def circuit_to_formula(circ: Circuit, max_nodes: int = FORMULA_EXPANSION_NODE_CAP) -> Circuit:
    """Brute-force duplication of shared gates into a tree (desk scale)."""
    circ.output()
    b = CircuitBuilder(circ.field, circ.num_vars, share=False)
    count = 0

    def rec(i: int) -> int:
        nonlocal count
        count += 1
        if count > max_nodes:
            raise BudgetExceeded("terms", f"formula expansion above {max_nodes} nodes")
        gate = circ.gates[i]
        op = gate[0]
        if op == "in":
            return b.inp(gate[1])
        if op == "const":
            return b.const(gate[1])
        kids = [rec(c) for c in gate[1]]
        return b.add(*kids) if op == "add" else b.mul(*kids)

    return b.finish(rec(circ.output()))


def leaf_substitute(B: Circuit, bindings: dict) -> ExpSumPoly:
    """Replace each variable leaf of the formula B by a *fresh copy* of its
    binding's verifier and auxiliary block; sums and products along the tree
    follow the sum/prod composition rules. Every variable leaf must be bound.
    """
    if not is_formula(B):
        raise NotAFormula("leaf substitution requires a tree-shaped circuit")
    B.output()
    field = B.field
    canon = {v: e.canonical() for v, e in bindings.items()}
    nx = max((e.nx for e in canon.values()), default=0)
    canon = {v: e.canonical(nx) for v, e in canon.items()}

    def rec(i: int) -> ExpSumPoly:
        gate = B.gates[i]
        op = gate[0]
        if op == "in":
            if gate[1] not in canon:
                raise ValueError(f"leaf x{gate[1] + 1} has no binding")
            return canon[gate[1]]
        if op == "const":
            bb = CircuitBuilder(field, nx)
            return plain_expsum(bb.finish(bb.const(gate[1])))
        parts = [rec(c) for c in gate[1]]
        return _combine(parts, "add" if op == "add" else "mul")

    return rec(B.output())


# -- coefficient / homogeneous-part calculus ------------------------------------------

def coeff_exp_sums(E: ExpSumPoly, z: int, dmax: int) -> list:
    """Exp-sums for the z^0..z^dmax coefficients of the represented
    polynomial (z must be an x-variable; the auxiliaries ride along)."""
    E = E.canonical()
    if not 0 <= z < E.nx:
        raise ValueError("z must be one of the x-variables")
    from .transforms import extract_y_coeffs

    rows = extract_y_coeffs(E.verifier, z, dmax)
    return [ExpSumPoly(r, E.aux) for r in rows]


def hasse_exp_sum(E: ExpSumPoly, z: int, j: int, deg_bound: int | None = None) -> ExpSumPoly:
    """Exp-sum of the order-j Hasse z-derivative of the represented poly."""
    E = E.canonical()
    if not 0 <= z < E.nx:
        raise ValueError("z must be one of the x-variables")
    ver = hasse_derivative_circuit(E.verifier, z, j, deg_y_bound=deg_bound)
    return ExpSumPoly(ver, E.aux)


def homog_x_exp_sum(E: ExpSumPoly, k: int) -> ExpSumPoly:
    """Degree-k-in-x homogeneous part; auxiliary variables untouched."""
    E = E.canonical()
    ver = homog_component_interp(E.verifier, k, scale_vars=list(range(E.nx)))
    return ExpSumPoly(ver, E.aux)


def homog_x_upto(E: ExpSumPoly, d: int) -> ExpSumPoly:
    E = E.canonical()
    ver = truncate_deg(E.verifier, d, scale_vars=list(range(E.nx)))
    return ExpSumPoly(ver, E.aux)


# -- the factor pipeline ---------------------------------------------------------------

def _sub_x_shift(E: ExpSumPoly, coeffs: dict, z: int) -> ExpSumPoly:
    """verifier with x_i -> x_i + coeffs[i] * z for the given x-variables."""
    E = E.canonical()
    field = E.field
    b = CircuitBuilder(field, E.verifier.num_vars)
    zgate = b.inp(z)
    bindings = {}
    for xi, ai in coeffs.items():
        if ai != field.zero:
            bindings[xi] = b.add(b.inp(xi), b.mul(b.const(ai), zgate))
    out = b.import_circuit(E.verifier, var_bindings=bindings)
    return ExpSumPoly(b.finish(out), E.aux)


def _translate_x(E: ExpSumPoly, shift: dict) -> ExpSumPoly:
    E = E.canonical()
    field = E.field
    full = [field.zero] * E.verifier.num_vars
    for xi, ci in shift.items():
        full[xi] = ci
    return ExpSumPoly(translate(E.verifier, full), E.aux)


def factor_vnp(
    E: ExpSumPoly,
    d: int,
    subset=None,
    seed: int = 0,
    budget: ExpansionBudget = DEFAULT_BUDGET,
    z_var: int | None = None,
):
    """Factor of degree <= d of the represented polynomial, as an exp-sum.

    Runs the circuit factorizer on a desk-scale expansion to obtain the
    structure (monic shift, separating shift, root subset, A-circuits and
    generator orders), then rebuilds every step at the verifier level:
    generator exp-sums from coefficient extraction, the combining circuit B
    converted to a formula and leaf-substituted with fresh auxiliary
    blocks, a final degree-d truncation in x, and the inverse shifts. The
    result is certified by exp_sum_expand equality with the factor's dense
    form. Returns (exp_sum, factor_result).
    """
    E = E.canonical()
    field = E.field
    nx = E.nx
    p_dense = exp_sum_expand(E, budget)
    if p_dense.is_zero():
        raise ZeroPolynomial("cannot factor the zero polynomial")
    z = nx - 1 if z_var is None else z_var
    if not 0 <= z < nx:
        raise ValueError("z must be one of the x-variables")

    from .dense import circuit_from_dense

    p_circ = circuit_from_dense(p_dense)
    fr = extract_factor(p_circ, z, d, subset=subset, seed=seed, budget=budget)
    r = p_dense.total_degree()
    x_others = [i for i in range(nx) if i != z]

    # monic change of variables, leading-unit normalization
    shift_coeffs = dict(zip(x_others, fr.monic.shift))
    e1 = _sub_x_shift(E, shift_coeffs, z)
    e1 = scale_expsum(e1, field.inv(fr.monic.leading_unit))
    # multiplicity level
    if fr.deriv_level > 0:
        e1 = hasse_exp_sum(e1, z, fr.deriv_level)
        e1 = scale_expsum(e1, field.inv(field.embed(math.comb(r, fr.deriv_level))))
    # separating shift
    e3 = _translate_x(e1, dict(zip(x_others, fr.bundle.shift)))

    # generator exp-sums, sharing one coefficient extraction
    dmax_z = e3.verifier.formal_degree()
    rows = coeff_exp_sums(e3, z, dmax_z)
    zero_e = field.zero

    def member_expsum(alpha, order):
        b = CircuitBuilder(field, e3.verifier.num_vars)
        parts = []
        for i in range(order, dmax_z + 1):
            w = field.mul(field.embed(math.comb(i, order)), field.pow(alpha, i - order))
            if w != zero_e:
                parts.append(b.mul(b.const(w), b.import_circuit(rows[i].verifier)[0]))
        dj = b.finish(b.add(*parts) if parts else b.const(zero_e))
        dj_at = substitute(dj, {z: _const_circ(field, zero_e, dj.num_vars, alpha)})
        x_all = list(range(nx))
        upto = truncate_deg(dj_at, d, scale_vars=x_all)
        h0 = homog_component_interp(dj_at, 0, scale_vars=x_all)
        b2 = CircuitBuilder(field, dj_at.num_vars)
        out = b2.sub(b2.import_circuit(upto)[0], b2.import_circuit(h0)[0])
        return ExpSumPoly(b2.finish(out), e3.aux)

    # combining circuit over (y, generator variables), truncated to |S|
    states = [fr.bundle.states[i] for i in fr.subset]
    alphas = [fr.bundle.alphas[i] for i in fr.subset]
    dS = len(fr.subset)
    widths = [len(st.gens.members) for st in states]
    b = CircuitBuilder(field, 1 + sum(widths))
    parts = []
    offset = 1
    for st, w in zip(states, widths):
        pruned = homogenize_upto(st.A[-1], d)
        bindings = {j: b.inp(offset + j) for j in range(w)}
        a_id = b.import_circuit(pruned, var_bindings=bindings)[0]
        parts.append(b.sub(b.inp(0), a_id))
        offset += w
    prod = b.mul(*parts) if len(parts) > 1 else parts[0]
    b_circ = truncate_deg(b.finish(prod), dS, deg_bound=max(1, dS * max(1, d)))
    b_formula = circuit_to_formula(b_circ)

    bindings = {0: plain_expsum(input_circuit(field, z, nx))}
    offset = 1
    for st, alpha, w in zip(states, alphas, widths):
        for j, (order, _) in enumerate(st.gens.members):
            bindings[offset + j] = member_expsum(alpha, order)
        offset += w
    composed = leaf_substitute(b_formula, bindings)
    composed = homog_x_upto(composed, dS)

    # undo the separating shift, then the monic change of variables
    undo_shift = {xi: field.neg(ci) for xi, ci in zip(x_others, fr.bundle.shift)}
    out = _translate_x(composed, undo_shift)
    undo_monic = {xi: field.neg(ai) for xi, ai in zip(x_others, fr.monic.shift)}
    out = _sub_x_shift(out, undo_monic, z)

    out_dense = exp_sum_expand(out, budget)
    unit = _leading_y_unit(out_dense, z)
    if unit is not None and unit != field.one:
        out = scale_expsum(out, field.inv(unit))
        out_dense = out_dense.scale(field.inv(unit))

    target = expand(fr.factor, budget)
    if out_dense != target:
        raise AssertionError("exp-sum factor disagrees with the circuit factor")
    return out, fr


def _const_circ(field, zero, num_vars, value):
    b = CircuitBuilder(field, num_vars)
    return b.finish(b.const(value))
