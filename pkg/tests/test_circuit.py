from fractions import Fraction

import pytest

from circuitforge import (
    CircuitBuilder,
    DensePoly,
    emit_circuit,
    expand,
    parse_circuit,
    substitute,
)
from circuitforge.circuit import drop_unused_vars, is_formula, remap_vars
from circuitforge.errors import (
    ArityMismatch,
    CircuitSyntaxError,
    CyclicReference,
    DanglingReference,
)

from conftest import oracle_equal, random_circuit, rng_for


def _example_circuit(field):
    # x1*x2 + x1
    b = CircuitBuilder(field, 2)
    x1, x2 = b.inp(0), b.inp(1)
    return b.finish(b.add(b.mul(x1, x2), x1))


def test_evaluate_hand_expansion(QQ):
    c = _example_circuit(QQ)
    assert c.evaluate([Fraction(2), Fraction(3)]) == [Fraction(8)]


def test_evaluate_at_zero_gives_constant_term(QQ):
    rng = rng_for("eval-zero")
    for k in range(20):
        c = random_circuit(QQ, rng, 3, size_limit=24, degree_limit=6)
        zeros = [QQ.zero] * 3
        assert c.evaluate1(zeros) == expand(c).constant_term()


def test_evaluate_matches_dense_oracle(QQ, Fp):
    for field, name in ((QQ, "qq"), (Fp, "fp")):
        rng = rng_for("eval-oracle-" + name)
        for k in range(60):
            c = random_circuit(field, rng, 3, size_limit=30, degree_limit=8)
            dense = expand(c)
            point = [field.embed(rng.randint(-5, 5)) for _ in range(3)]
            assert c.evaluate1(point) == dense.evaluate(point)


def test_evaluate_arity_mismatch(QQ):
    with pytest.raises(ArityMismatch):
        _example_circuit(QQ).evaluate([Fraction(1)])


def test_metrics_single_input(QQ):
    b = CircuitBuilder(QQ, 1)
    c = b.finish(b.inp(0))
    m = c.metrics()
    assert (m["size"], m["depth"], m["formal_degree"]) == (0, 0, 1)


def test_metrics_sigma_pi_sigma_depth_three(QQ):
    # two products of two linear forms of two terms each
    b = CircuitBuilder(QQ, 2)
    x1, x2 = b.inp(0), b.inp(1)
    l1 = b.add(x1, x2)
    l2 = b.add(x1, b.mul(b.const(Fraction(2)), x2))
    l3 = b.add(b.mul(b.const(Fraction(3)), x1), x2)
    c = b.finish(b.add(b.mul(l1, l2), b.mul(l2, l3)))
    assert c.depth() == 3


def test_top_product_gets_virtual_add_layer(QQ):
    b = CircuitBuilder(QQ, 2)
    c = b.finish(b.mul(b.inp(0), b.inp(1)))
    assert c.depth() == 2  # one product layer + inserted top addition


def test_metrics_invariant_under_topological_permutation(QQ):
    # same DAG built in two gate orders
    b1 = CircuitBuilder(QQ, 2)
    x, y = b1.inp(0), b1.inp(1)
    c1 = b1.finish(b1.add(b1.mul(x, y), b1.mul(x, x)))
    b2 = CircuitBuilder(QQ, 2)
    y2, x2 = b2.inp(1), b2.inp(0)
    sq = b2.mul(x2, x2)
    c2 = b2.finish(b2.add(b2.mul(y2, x2), sq))
    assert c1.metrics() == c2.metrics()


def test_substitute_const_kills_variable(QQ):
    b = CircuitBuilder(QQ, 2)
    c = b.finish(b.add(b.inp(0), b.inp(1)))
    zb = CircuitBuilder(QQ, 2)
    zero = zb.finish(zb.const(QQ.zero))
    out = substitute(c, {0: zero})
    assert expand(out) == DensePoly.variable(QQ, 2, 1)


def test_substitute_empty_bindings_is_identity(QQ):
    c = _example_circuit(QQ)
    assert oracle_equal(substitute(c, {}), c)


def test_substitute_expands_binomial(QQ):
    b = CircuitBuilder(QQ, 2)
    c = b.finish(b.mul(b.inp(0), b.inp(0)))  # x1^2
    rb = CircuitBuilder(QQ, 2)
    repl = rb.finish(rb.add(rb.inp(1), rb.const(Fraction(1))))  # x2 + 1
    out = expand(substitute(c, {0: repl}))
    assert out == DensePoly(QQ, 2, {
        (0, 2): Fraction(1), (0, 1): Fraction(2), (0, 0): Fraction(1),
    })


def test_substitute_agrees_with_evaluation(QQ):
    rng = rng_for("subst-eval")
    for k in range(25):
        c = random_circuit(QQ, rng, 3, size_limit=20, degree_limit=5)
        d = random_circuit(QQ, rng, 3, size_limit=12, degree_limit=3)
        comp = substitute(c, {1: d})
        point = [QQ.embed(rng.randint(-4, 4)) for _ in range(3)]
        inner = list(point)
        inner[1] = d.evaluate1(point)
        assert comp.evaluate1(point) == c.evaluate1(inner)


def test_parse_identity_circuit(QQ):
    c = parse_circuit("field rationals\nnvars 1\ng1 = input x1\noutput g1\n")
    assert expand(c) == DensePoly.variable(QQ, 1, 0)


def test_emit_parse_roundtrip_random(QQ, Fp):
    for field, name in ((QQ, "qq"), (Fp, "fp")):
        rng = rng_for("roundtrip-" + name)
        for k in range(100):
            c = random_circuit(field, rng, 3, size_limit=26, degree_limit=7)
            again = parse_circuit(emit_circuit(c))
            assert expand(again) == expand(c)


def test_emit_is_stable_after_roundtrip(QQ):
    rng = rng_for("emit-stable")
    c = random_circuit(QQ, rng, 2, size_limit=20)
    text = emit_circuit(c)
    assert emit_circuit(parse_circuit(text)) == text


def test_parse_dangling_reference():
    with pytest.raises(DanglingReference):
        parse_circuit("field rationals\nnvars 1\ng1 = input x1\ng2 = add g1 g0\noutput g2\n")


def test_parse_cyclic_reference():
    with pytest.raises(CyclicReference):
        parse_circuit("field rationals\nnvars 1\ng1 = input x1\ng2 = add g1 g2\noutput g2\n")


def test_parse_gate_indices_strictly_increasing():
    with pytest.raises(CircuitSyntaxError):
        parse_circuit(
            "field rationals\nnvars 1\ng2 = input x1\ng1 = add g2 g2\noutput g1\n"
        )


def test_parse_rejects_bad_lines():
    for text in (
        "nvars 1\ng1 = input x1\noutput g1\n",          # field missing
        "field rationals\ng1 = input x1\noutput g1\n",  # nvars missing
        "field rationals\nnvars 1\ng1 = input x2\noutput g1\n",  # var range
        "field rationals\nnvars 1\ng1 = frob x1\noutput g1\n",   # bad op
        "field rationals\nnvars 1\ng1 = input x1\n",    # no output
    ):
        with pytest.raises(CircuitSyntaxError):
            parse_circuit(text)


def test_remap_and_drop_vars(QQ):
    b = CircuitBuilder(QQ, 3)
    c = b.finish(b.add(b.inp(0), b.inp(2)))
    moved = remap_vars(c, {0: 1, 2: 0}, 2)
    assert expand(moved) == DensePoly(QQ, 2, {(1, 0): Fraction(1), (0, 1): Fraction(1)})
    dropped = drop_unused_vars(c, [0, 2])
    assert dropped.num_vars == 2
    with pytest.raises(ArityMismatch):
        drop_unused_vars(c, [0, 1])  # x3 still referenced


def test_is_formula(QQ):
    b = CircuitBuilder(QQ, 1, share=False)
    x = b.inp(0)
    y = b.inp(0)
    tree = b.finish(b.mul(x, y))
    assert is_formula(tree)
    b2 = CircuitBuilder(QQ, 1)
    x2 = b2.inp(0)
    shared = b2.finish(b2.mul(x2, x2))
    assert not is_formula(shared)
