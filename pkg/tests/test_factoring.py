from fractions import Fraction

import pytest

from circuitforge import (
    CircuitBuilder,
    DensePoly,
    approx_roots,
    combine_roots,
    divides,
    expand,
    extract_factor,
    separating_shift,
    truncate_dense,
)
from circuitforge.dense import substitute_var_dense
from circuitforge.errors import NoFactorFound, NoSimpleRoots

from conftest import plant_linear_product, rng_for


def test_separating_shift_zero_already_works(QQ):
    # (y - x1)(y - x1 - 1): shift 0 gives distinct roots {0, 1}
    b = CircuitBuilder(QQ, 2)
    x, y = b.inp(0), b.inp(1)
    P = b.finish(b.mul(b.sub(y, x), b.sub(y, b.add(x, b.const(Fraction(1))))))
    c, roots = separating_shift(P, y=1, seed=0)
    assert all(v == QQ.zero for v in c)
    assert roots == [Fraction(0), Fraction(1)]


def test_separating_shift_no_simple_roots(QQ):
    # (y - x1)^2 never has a simple root, any shift
    b = CircuitBuilder(QQ, 2)
    d = b.sub(b.inp(1), b.inp(0))
    P = b.finish(b.mul(d, d))
    with pytest.raises(NoSimpleRoots):
        separating_shift(P, y=1, seed=0)


def test_separating_shift_planted_full_split(QQ):
    rng = rng_for("sep-shift")
    for t in range(5):
        consts = []
        while len(consts) < 3:
            c = Fraction(rng.randint(-5, 5))
            if c not in consts:
                consts.append(c)
        P, _ = plant_linear_product(QQ, rng, 2, 2, consts)
        c, roots = separating_shift(P, y=2, seed=t)
        assert len(roots) == 3


def test_approx_roots_example(QQ):
    # P = (y - x1)(y - 2), alphas [0, 2], d = 1 -> q = [x1, 2]
    b = CircuitBuilder(QQ, 2)
    x, y = b.inp(0), b.inp(1)
    P = b.finish(b.mul(b.sub(y, x), b.sub(y, b.const(Fraction(2)))))
    bundle = approx_roots(P, [Fraction(0), Fraction(2)], 1, y=1)
    assert expand(bundle.approx[0]) == DensePoly.variable(QQ, 2, 0)
    assert expand(bundle.approx[1]) == DensePoly.const(QQ, 2, Fraction(2))


def test_approx_roots_degree_zero(QQ):
    b = CircuitBuilder(QQ, 2)
    x, y = b.inp(0), b.inp(1)
    P = b.finish(b.mul(b.sub(y, x), b.sub(y, b.const(Fraction(2)))))
    bundle = approx_roots(P, [Fraction(0), Fraction(2)], 0, y=1)
    assert expand(bundle.approx[0]).is_zero()
    assert expand(bundle.approx[1]) == DensePoly.const(QQ, 2, Fraction(2))


def test_approx_roots_three_roots_truncated_residual(QQ):
    rng = rng_for("approx-three")
    consts = [Fraction(0), Fraction(1), Fraction(7)]
    P, _ = plant_linear_product(QQ, rng, 2, 2, consts)
    bundle = approx_roots(P, consts, 3, y=2)
    dense = expand(P)
    for q in bundle.approx:
        res = substitute_var_dense(dense, 2, expand(q))
        assert truncate_dense(res, 3).is_zero()


def test_combine_roots_singleton(QQ):
    b = CircuitBuilder(QQ, 2)
    x, y = b.inp(0), b.inp(1)
    P = b.finish(b.mul(b.sub(y, x), b.sub(y, b.const(Fraction(2)))))
    bundle = approx_roots(P, [Fraction(0)], 1, y=1)
    out = combine_roots(bundle, [0], 1)
    assert expand(out) == DensePoly(QQ, 2, {(0, 1): Fraction(1), (1, 0): Fraction(-1)})


def test_combine_roots_pair_example(QQ):
    # q = [x1, 1 + x2], d = 2 -> y^2 - (1 + x1 + x2) y + x1 + x1 x2
    rng = rng_for("combine-pair")
    b = CircuitBuilder(QQ, 3)
    x1, x2, y = b.inp(0), b.inp(1), b.inp(2)
    P = b.finish(b.mul(
        b.sub(y, x1),
        b.sub(y, b.add(b.const(Fraction(1)), x2)),
        b.sub(y, b.const(Fraction(7))),
    ))
    bundle = approx_roots(P, [Fraction(0), Fraction(1), Fraction(7)], 2, y=2)
    out = expand(combine_roots(bundle, [0, 1], 2))
    assert out == DensePoly(QQ, 3, {
        (0, 0, 2): Fraction(1),
        (0, 0, 1): Fraction(-1), (1, 0, 1): Fraction(-1), (0, 1, 1): Fraction(-1),
        (1, 0, 0): Fraction(1), (1, 1, 0): Fraction(1),
    })


def test_combine_full_subset_reconstructs_P(QQ):
    rng = rng_for("combine-full")
    consts = [Fraction(-1), Fraction(2), Fraction(5)]
    P, forms = plant_linear_product(QQ, rng, 2, 2, consts)
    bundle = approx_roots(P, consts, 3, y=2)
    out = expand(combine_roots(bundle, [0, 1, 2], 3))
    assert out == expand(P)


def test_extract_factor_given_subset(QQ):
    rng = rng_for("extract-given")
    b = CircuitBuilder(QQ, 3)
    x1, x2, y = b.inp(0), b.inp(1), b.inp(2)
    P = b.finish(b.mul(
        b.sub(y, x1),
        b.sub(y, b.add(b.const(Fraction(1)), x2)),
        b.sub(y, b.const(Fraction(7))),
    ))
    res = extract_factor(P, y=2, d=2, subset=(0, 1), seed=0)
    want = DensePoly(QQ, 3, {
        (0, 0, 2): Fraction(1),
        (0, 0, 1): Fraction(-1), (1, 0, 1): Fraction(-1), (0, 1, 1): Fraction(-1),
        (1, 0, 0): Fraction(1), (1, 1, 0): Fraction(1),
    })
    assert expand(res.factor) == want
    assert res.multiplicity == 1


def test_extract_factor_linear_identity(QQ):
    b = CircuitBuilder(QQ, 2)
    P = b.finish(b.sub(b.inp(1), b.inp(0)))  # y - x1, irreducible
    res = extract_factor(P, y=1, d=1, seed=0)
    assert expand(res.factor) == expand(P)


def test_extract_factor_rejects_y_free_polynomial(QQ):
    b = CircuitBuilder(QQ, 2)
    P = b.finish(b.mul(b.inp(0), b.inp(1)))  # x1 * x2, y declared as var 3
    b2 = CircuitBuilder(QQ, 3)
    P3 = b2.finish(b2.import_circuit(P)[0])
    with pytest.raises(NoFactorFound):
        extract_factor(P3, y=2, d=1, seed=0)


def test_extract_factor_multiplicity_two(QQ):
    # P = (y - x1)^2 (y - 3): the squared factor appears at derivative level 1
    b = CircuitBuilder(QQ, 2)
    x, y = b.inp(0), b.inp(1)
    dyx = b.sub(y, x)
    P = b.finish(b.mul(dyx, dyx, b.sub(y, b.const(Fraction(3)))))
    res = extract_factor(P, y=1, d=1, seed=0)
    f = expand(res.factor)
    if f == DensePoly(QQ, 2, {(0, 1): Fraction(1), (1, 0): Fraction(-1)}):
        assert res.multiplicity == 2
    else:
        assert f == DensePoly(QQ, 2, {(0, 1): Fraction(1), (0, 0): Fraction(-3)})
        assert res.multiplicity == 1


def test_extract_factor_non_monic_input(QQ):
    # P needs the monic transform first: P = x1 * y + x2 (irreducible, linear in y)
    b = CircuitBuilder(QQ, 3)
    x1, x2, y = b.inp(0), b.inp(1), b.inp(2)
    P = b.finish(b.add(b.mul(x1, y), x2))
    res = extract_factor(P, y=2, d=2, seed=0)
    assert divides(expand(res.factor), expand(P), main_var=2) >= 1
    assert expand(res.factor).degree_in(2) >= 1


def test_extract_factor_monic_and_shift_roundtrip(QQ):
    rng = rng_for("extract-roundtrip")
    for t in range(6):
        consts = []
        while len(consts) < 3:
            c = Fraction(rng.randint(-4, 4))
            if c not in consts:
                consts.append(c)
        P, forms = plant_linear_product(QQ, rng, 2, 2, consts)
        dense = expand(P)
        res = extract_factor(P, y=2, d=2, subset=(0, 1), seed=t)
        fdense = expand(res.factor)
        # divisibility against the original circuit and monic leading coeff
        assert divides(fdense, dense, main_var=2) == res.multiplicity
        dy = fdense.degree_in(2)
        lead = {e: c for e, c in fdense.terms.items() if e[2] == dy}
        assert list(lead.values()) == [QQ.one]


def test_extract_factor_search_finds_certified_factor(QQ):
    rng = rng_for("extract-search")
    consts = [Fraction(0), Fraction(2), Fraction(6)]
    P, forms = plant_linear_product(QQ, rng, 2, 2, consts)
    res = extract_factor(P, y=2, d=3, seed=0)
    assert res.multiplicity >= 1
    assert divides(expand(res.factor), expand(P), main_var=2) == res.multiplicity
