from fractions import Fraction

import pytest

from circuitforge import (
    CircuitBuilder,
    DensePoly,
    PrimeField,
    expand,
    factor_vnp,
    leaf_substitute,
    prod_compose,
    selector_R,
    sum_compose,
    valiant_step,
)
from circuitforge.circuit import input_circuit, is_formula
from circuitforge.errors import NotAFormula, ShapeError
from circuitforge.expsum import (
    ExpSumPoly,
    SELECTOR_SIZE_FACTOR,
    coeff_exp_sums,
    exp_sum_expand,
    homog_x_exp_sum,
    homog_x_upto,
    plain_expsum,
)

from conftest import random_circuit, rng_for


def brute_force_sum(e: ExpSumPoly) -> DensePoly:
    """Direct nested summation over the Boolean cube (the other order)."""
    e = e.canonical()
    field = e.field
    acc = DensePoly.zero(field, e.nx)
    for mask in range(1 << e.m):
        b = CircuitBuilder(field, e.verifier.num_vars)
        bindings = {
            a: b.const(field.one if mask >> j & 1 else field.zero)
            for j, a in enumerate(e.aux)
        }
        fixed = b.finish(b.import_circuit(e.verifier, var_bindings=bindings))
        acc = acc + expand(fixed).with_vars(e.nx)
    return acc


def _expsum(field, nvars, aux, build):
    b = CircuitBuilder(field, nvars)
    return ExpSumPoly(b.finish(build(b)), aux)


def test_expand_example_xy(QQ):
    e = _expsum(QQ, 2, (1,), lambda b: b.mul(b.inp(0), b.inp(1)))
    assert exp_sum_expand(e) == DensePoly.variable(QQ, 1, 0)


def test_expand_aux_independent_doubles(QQ):
    # verifier independent of three aux variables: sum is 8 * Q
    e = _expsum(QQ, 4, (1, 2, 3), lambda b: b.add(b.inp(0), b.const(Fraction(2))))
    assert exp_sum_expand(e) == DensePoly(QQ, 1, {(1,): Fraction(8), (0,): Fraction(16)})


def test_expand_matches_nested_summation(QQ, Fp):
    for field, name in ((QQ, "qq"), (Fp, "fp")):
        rng = rng_for("expsum-orders-" + name)
        for t in range(20):
            m = rng.randint(1, 3)
            nv = 2 + m
            circ = random_circuit(field, rng, nv, size_limit=18, degree_limit=5)
            e = ExpSumPoly(circ, tuple(range(2, 2 + m)))
            assert exp_sum_expand(e) == brute_force_sum(e)


def test_prod_compose_squares(QQ):
    e1 = _expsum(QQ, 2, (1,), lambda b: b.mul(b.inp(0), b.inp(1)))
    e2 = _expsum(QQ, 2, (1,), lambda b: b.mul(b.inp(0), b.inp(1)))
    prod = prod_compose(e1, e2)
    assert prod.m == 2
    assert exp_sum_expand(prod) == DensePoly(QQ, 1, {(2,): Fraction(1)})


def test_sum_compose_with_zero_is_identity(QQ):
    e = _expsum(QQ, 2, (1,), lambda b: b.mul(b.inp(0), b.inp(1)))
    zero = plain_expsum(_expsum(QQ, 1, (), lambda b: b.const(Fraction(0))).verifier)
    s = sum_compose(e, zero)
    assert exp_sum_expand(s) == exp_sum_expand(e)


def test_compose_random_pairs(QQ):
    rng = rng_for("compose-random")
    for t in range(15):
        m1, m2 = rng.randint(0, 2), rng.randint(0, 2)
        c1 = random_circuit(QQ, rng, 2 + m1, size_limit=14, degree_limit=4)
        c2 = random_circuit(QQ, rng, 2 + m2, size_limit=14, degree_limit=4)
        e1 = ExpSumPoly(c1, tuple(range(2, 2 + m1)))
        e2 = ExpSumPoly(c2, tuple(range(2, 2 + m2)))
        r1, r2 = exp_sum_expand(e1), exp_sum_expand(e2)
        assert exp_sum_expand(sum_compose(e1, e2)) == r1 + r2
        assert exp_sum_expand(prod_compose(e1, e2)) == r1 * r2


def test_selector_single_block(QQ):
    sel = selector_R(1)
    assert is_formula(sel)
    ones = [QQ.one] * 5
    zeros = [QQ.zero] * 5
    assert sel.evaluate1(ones) == QQ.one
    assert sel.evaluate1(zeros) == QQ.zero


def test_selector_two_blocks_exactly_two_ones():
    F = PrimeField(101)
    sel = selector_R(2, F)
    hits = 0
    for mask in range(1 << 10):
        point = [F.one if mask >> j & 1 else F.zero for j in range(10)]
        v = sel.evaluate1(point)
        assert v in (F.zero, F.one)
        hits += v == F.one
    assert hits == 2


def test_selector_boolean_valued_and_size():
    F = PrimeField(101)
    for s_prime in (1, 2, 3):
        sel = selector_R(s_prime, F)
        assert is_formula(sel)
        assert sel.size() <= SELECTOR_SIZE_FACTOR * s_prime * s_prime
        n = 5 * s_prime
        ones_count = 0
        for mask in range(1 << n):
            point = [F.one if mask >> j & 1 else F.zero for j in range(n)]
            v = sel.evaluate1(point)
            assert v in (F.zero, F.one)
            ones_count += v == F.one
        assert ones_count == s_prime


def test_valiant_step_single_block_product(QQ):
    blocks = [[plain_expsum(input_circuit(QQ, j, 5)) for j in range(5)]]
    e = valiant_step(blocks)
    assert exp_sum_expand(e) == DensePoly(QQ, 5, {(1, 1, 1, 1, 1): Fraction(1)})


def test_valiant_step_zero_block_drops_out(QQ):
    zb = CircuitBuilder(QQ, 5)
    zero = plain_expsum(zb.finish(zb.const(Fraction(0))))
    blocks = [
        [plain_expsum(input_circuit(QQ, j, 5)) for j in range(5)],
        [zero] * 5,
    ]
    e = valiant_step(blocks)
    assert exp_sum_expand(e) == DensePoly(QQ, 5, {(1, 1, 1, 1, 1): Fraction(1)})


def test_valiant_step_random_blocks(QQ):
    rng = rng_for("valiant-random")
    for t in range(6):
        s_prime = rng.randint(1, 2)
        blocks = []
        want = DensePoly.zero(QQ, 2)
        for i in range(s_prime):
            entries = []
            prod = DensePoly.const(QQ, 2, Fraction(1))
            for j in range(5):
                m = rng.randint(0, 1)
                circ = random_circuit(QQ, rng, 2 + m, size_limit=8, degree_limit=2)
                e = ExpSumPoly(circ, tuple(range(2, 2 + m)))
                entries.append(e)
                prod = prod * exp_sum_expand(e)
            blocks.append(entries)
            want = want + prod
        got = exp_sum_expand(valiant_step(blocks))
        assert got == want


def test_valiant_step_shape_error(QQ):
    with pytest.raises(ShapeError):
        valiant_step([[plain_expsum(input_circuit(QQ, 0, 1))] * 4])


def test_leaf_substitute_fresh_copies_square(QQ):
    # B = z1 * z1 as a tree: fresh aux per leaf gives the square of the sum
    b = CircuitBuilder(QQ, 1, share=False)
    B = b.finish(b.mul(b.inp(0), b.inp(0)))
    e = _expsum(QQ, 2, (1,), lambda bb: bb.mul(bb.inp(0), bb.inp(1)))  # represents x1
    out = leaf_substitute(B, {0: e})
    assert out.m == 2  # one fresh block per occurrence
    assert exp_sum_expand(out) == DensePoly(QQ, 1, {(2,): Fraction(1)})
    # the square of the polynomial, not the sum of squares
    assert exp_sum_expand(out) != exp_sum_expand(e)


def test_leaf_substitute_single_leaf_identity(QQ):
    b = CircuitBuilder(QQ, 1, share=False)
    B = b.finish(b.inp(0))
    e = _expsum(QQ, 2, (1,), lambda bb: bb.mul(bb.inp(0), bb.inp(1)))
    out = leaf_substitute(B, {0: e})
    assert exp_sum_expand(out) == exp_sum_expand(e)


def test_leaf_substitute_disjoint_sum(QQ):
    b = CircuitBuilder(QQ, 2, share=False)
    B = b.finish(b.add(b.inp(0), b.inp(1)))
    e1 = _expsum(QQ, 2, (1,), lambda bb: bb.mul(bb.inp(0), bb.inp(1)))       # x1
    e2 = _expsum(QQ, 2, (1,), lambda bb: bb.mul(bb.inp(0), bb.inp(0)))       # 2 x1^2
    out = leaf_substitute(B, {0: e1, 1: e2})
    assert exp_sum_expand(out) == exp_sum_expand(e1) + exp_sum_expand(e2)
    assert out.m == e1.m + e2.m


def test_leaf_substitute_aux_bookkeeping(QQ):
    rng = rng_for("leaf-aux")
    b = CircuitBuilder(QQ, 2, share=False)
    B = b.finish(b.add(b.mul(b.inp(0), b.inp(1)), b.mul(b.inp(0), b.inp(0))))
    ms = {0: 2, 1: 1}
    bindings = {}
    for v, m in ms.items():
        circ = random_circuit(QQ, rng, 1 + m, size_limit=8, degree_limit=2)
        bindings[v] = ExpSumPoly(circ, tuple(range(1, 1 + m)))
    out = leaf_substitute(B, bindings)
    # occurrences: z1 three times, z2 once
    assert out.m == 3 * ms[0] + 1 * ms[1]


def test_leaf_substitute_rejects_shared_gates(QQ):
    b = CircuitBuilder(QQ, 1)  # sharing on: x*x reuses one leaf
    x = b.inp(0)
    B = b.finish(b.mul(x, x))
    e = plain_expsum(input_circuit(QQ, 0, 1))
    with pytest.raises(NotAFormula):
        leaf_substitute(B, {0: e})


def test_coeff_exp_sums_example(QQ):
    # verifier 3 z^2 + x z y1, aux y1: coefficients of the sum are [0, x, 6]
    b = CircuitBuilder(QQ, 3)  # x=0, z=1, y1=2
    x, z, y1 = b.inp(0), b.inp(1), b.inp(2)
    ver = b.finish(b.add(
        b.mul(b.const(Fraction(3)), b.mul(z, z)), b.mul(x, b.mul(z, y1)),
    ))
    e = ExpSumPoly(ver, (2,))
    coeffs = coeff_exp_sums(e, 1, 2)
    sums = [exp_sum_expand(c) for c in coeffs]
    assert sums[0].is_zero()
    assert sums[1] == DensePoly.variable(QQ, 2, 0)
    assert sums[2] == DensePoly.const(QQ, 2, Fraction(6))


def test_coeff_exp_sums_reconstruction(QQ):
    rng = rng_for("coeff-recon")
    for t in range(8):
        circ = random_circuit(QQ, rng, 3, size_limit=14, degree_limit=4)
        e = ExpSumPoly(circ, (2,))
        dmax = e.verifier.formal_degree()
        coeffs = coeff_exp_sums(e, 1, dmax)
        z = DensePoly.variable(QQ, 2, 1)
        total = DensePoly.zero(QQ, 2)
        zp = DensePoly.const(QQ, 2, Fraction(1))
        for c in coeffs:
            total = total + exp_sum_expand(c) * zp
            zp = zp * z
        assert total == exp_sum_expand(e)


def test_homog_x_examples(QQ):
    # verifier x1*y1 + x1^2*y1 with aux y1
    b = CircuitBuilder(QQ, 2)
    x, y1 = b.inp(0), b.inp(1)
    ver = b.finish(b.add(b.mul(x, y1), b.mul(x, b.mul(x, y1))))
    e = ExpSumPoly(ver, (1,))
    assert exp_sum_expand(homog_x_exp_sum(e, 1)) == DensePoly.variable(QQ, 1, 0)
    assert exp_sum_expand(homog_x_exp_sum(e, 0)).is_zero()
    total = DensePoly.zero(QQ, 1)
    for k in range(3):
        total = total + exp_sum_expand(homog_x_exp_sum(e, k))
    assert total == exp_sum_expand(e)
    assert exp_sum_expand(homog_x_upto(e, 1)) == DensePoly.variable(QQ, 1, 0)


def test_factor_vnp_linear_with_dummy_aux(QQ):
    # E represents (y - x1)(y - 2) with one dummy aux; factor y - x1
    b = CircuitBuilder(QQ, 3)  # x1=0, y=1, aux=2
    x1, y, a = b.inp(0), b.inp(1), b.inp(2)
    ver = b.finish(b.mul(b.sub(y, x1), b.sub(y, b.const(Fraction(2))), a))
    e = ExpSumPoly(ver, (2,))
    out, fr = factor_vnp(e, 1, seed=0)
    assert exp_sum_expand(out) == DensePoly(QQ, 2, {
        (0, 1): Fraction(1), (1, 0): Fraction(-1),
    })
    assert out.m >= 1


def test_factor_vnp_plain_circuit_degenerate_aux(QQ):
    b = CircuitBuilder(QQ, 2)
    x1, y = b.inp(0), b.inp(1)
    ver = b.finish(b.mul(b.sub(y, x1), b.sub(y, b.const(Fraction(3)))))
    e = plain_expsum(ver)
    out, fr = factor_vnp(e, 1, seed=0)
    assert exp_sum_expand(out) == expand(fr.factor)
    assert out.m >= 0


def test_factor_vnp_planted_quadratic(QQ):
    # (y - x1)(y - 1 - x1)(y - 5): quadratic factor from roots {0, 1}
    b = CircuitBuilder(QQ, 2)
    x1, y = b.inp(0), b.inp(1)
    ver = b.finish(b.mul(
        b.sub(y, x1),
        b.sub(y, b.add(b.const(Fraction(1)), x1)),
        b.sub(y, b.const(Fraction(5))),
    ))
    e = plain_expsum(ver)
    out, fr = factor_vnp(e, 2, subset=(0, 1), seed=0)
    want = expand(fr.factor)
    assert exp_sum_expand(out) == want
    assert want.degree_in(1) == 2
