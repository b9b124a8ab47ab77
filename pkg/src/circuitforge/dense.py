"""Brute-force dense (sparse-map) polynomial oracle.

DensePoly is the ground-truth representation: an exact map from exponent
vectors to nonzero coefficients. Circuits get expanded into it (under a
budget), and every pipeline identity in this package is checkable against
it at desk scale: equality, divisibility with multiplicity, Hasse
derivatives, homogeneous components, and base-field roots of univariates.

The oracle deliberately does not factor: the pipeline under test is the
factorizer, the oracle only multiplies, divides and compares.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .circuit import ADD, CONST, IN, Circuit, CircuitBuilder
from .errors import BudgetExceeded, ZeroDivisor, ZeroPolynomial
from .fields import Field, PrimeField, Rationals, same_field


@dataclass(frozen=True)
class ExpansionBudget:
    max_terms: int = 200_000
    max_degree: int = 64

    def __post_init__(self):
        if self.max_terms <= 0 or self.max_degree <= 0:
            raise ValueError("budget bounds must be positive")


DEFAULT_BUDGET = ExpansionBudget()


class DensePoly:
    """Multivariate polynomial as {exponent tuple: nonzero coefficient}."""

    __slots__ = ("field", "n", "terms")

    def __init__(self, field: Field, n: int, terms: dict):
        self.field = field
        self.n = n
        self.terms = {e: c for e, c in terms.items() if c != field.zero}

    # -- constructors --------------------------------------------------------

    @classmethod
    def zero(cls, field, n):
        return cls(field, n, {})

    @classmethod
    def const(cls, field, n, value):
        return cls(field, n, {(0,) * n: value})

    @classmethod
    def variable(cls, field, n, var):
        e = [0] * n
        e[var] = 1
        return cls(field, n, {tuple(e): field.one})

    @classmethod
    def monomial(cls, field, n, exps, coeff):
        return cls(field, n, {tuple(exps): coeff})

    # -- basic queries --------------------------------------------------------

    def is_zero(self):
        return not self.terms

    def total_degree(self):
        """Total degree; -1 for the zero polynomial."""
        if not self.terms:
            return -1
        return max(sum(e) for e in self.terms)

    def degree_in(self, var):
        if not self.terms:
            return -1
        return max(e[var] for e in self.terms)

    def constant_term(self):
        return self.terms.get((0,) * self.n, self.field.zero)

    def coeff(self, exps):
        return self.terms.get(tuple(exps), self.field.zero)

    def __eq__(self, other):
        return (
            isinstance(other, DensePoly)
            and self.field == other.field
            and self.n == other.n
            and self.terms == other.terms
        )

    def __hash__(self):
        return hash((self.field, self.n, frozenset(self.terms.items())))

    def __repr__(self):
        if not self.terms:
            return "<DensePoly 0>"
        return f"<DensePoly n={self.n} terms={len(self.terms)} deg={self.total_degree()}>"

    # -- arithmetic ------------------------------------------------------------

    def _like(self, other):
        same_field(self.field, other.field)
        if self.n != other.n:
            raise ValueError(f"variable count mismatch: {self.n} vs {other.n}")

    def __add__(self, other):
        self._like(other)
        field = self.field
        terms = dict(self.terms)
        for e, c in other.terms.items():
            s = field.add(terms.get(e, field.zero), c)
            if s == field.zero:
                terms.pop(e, None)
            else:
                terms[e] = s
        return DensePoly(field, self.n, terms)

    def __neg__(self):
        field = self.field
        return DensePoly(field, self.n, {e: field.neg(c) for e, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        self._like(other)
        return _mul(self, other)

    def scale(self, value):
        field = self.field
        if value == field.zero:
            return DensePoly.zero(field, self.n)
        return DensePoly(field, self.n, {e: field.mul(c, value) for e, c in self.terms.items()})

    def pow(self, k: int):
        result = DensePoly.const(self.field, self.n, self.field.one)
        for _ in range(k):
            result = result * self
        return result

    def evaluate(self, point):
        field = self.field
        if len(point) != self.n:
            raise ValueError("point arity mismatch")
        acc = field.zero
        for e, c in self.terms.items():
            v = c
            for i, exp in enumerate(e):
                if exp:
                    v = field.mul(v, field.pow(point[i], exp))
            acc = field.add(acc, v)
        return acc

    def with_vars(self, new_n: int, var_map: dict | None = None):
        """Re-embed into a different variable space."""
        terms = {}
        for e, c in self.terms.items():
            new_e = [0] * new_n
            for i, exp in enumerate(e):
                if exp:
                    j = var_map[i] if var_map else i
                    new_e[j] = exp
            terms[tuple(new_e)] = c
        return DensePoly(self.field, new_n, terms)


def _mul(a: DensePoly, b: DensePoly, budget: ExpansionBudget | None = None) -> DensePoly:
    field = a.field
    zero = field.zero
    mul = field.mul
    add = field.add
    if len(a.terms) > len(b.terms):
        a, b = b, a
    out = {}
    for ea, ca in a.terms.items():
        for eb, cb in b.terms.items():
            e = tuple(x + y for x, y in zip(ea, eb))
            c = mul(ca, cb)
            s = add(out.get(e, zero), c)
            if s == zero:
                out.pop(e, None)
            else:
                out[e] = s
        if budget is not None and len(out) > budget.max_terms:
            raise BudgetExceeded("terms", f"product exceeded {budget.max_terms} terms")
    return DensePoly(field, a.n, out)


def expand(circ: Circuit, budget: ExpansionBudget = DEFAULT_BUDGET) -> DensePoly:
    """Exact polynomial computed by a single-output circuit."""
    out = expand_outputs(circ, budget)
    if len(out) != 1:
        raise ValueError("expand needs a single-output circuit")
    return out[0]


def expand_outputs(circ: Circuit, budget: ExpansionBudget = DEFAULT_BUDGET) -> list:
    field = circ.field
    n = circ.num_vars
    zero = field.zero
    fadd = field.add
    fmul = field.mul
    zero_e = (0,) * n
    values: dict = {}
    fdeg: dict = {}
    for i in circ.reachable():
        gate = circ.gates[i]
        op = gate[0]
        if op == IN:
            e = [0] * n
            e[gate[1]] = 1
            values[i] = {tuple(e): field.one}
            fdeg[i] = 1
        elif op == CONST:
            values[i] = {zero_e: gate[1]} if gate[1] != zero else {}
            fdeg[i] = 0
        elif op == ADD:
            kids = sorted(gate[1], key=lambda c: len(values[c]), reverse=True)
            out = dict(values[kids[0]])
            for c in kids[1:]:
                for e, v in values[c].items():
                    s = fadd(out.get(e, zero), v)
                    if s == zero:
                        out.pop(e, None)
                    else:
                        out[e] = s
            values[i] = out
            fdeg[i] = max(fdeg[c] for c in gate[1])
        else:
            kids = sorted(gate[1], key=lambda c: len(values[c]))
            out = values[kids[0]]
            for c in kids[1:]:
                nxt = values[c]
                if len(out) > len(nxt):
                    out, nxt = nxt, out
                prod: dict = {}
                for ea, ca in out.items():
                    for eb, cb in nxt.items():
                        e = tuple(x + y for x, y in zip(ea, eb))
                        s = fadd(prod.get(e, zero), fmul(ca, cb))
                        if s == zero:
                            prod.pop(e, None)
                        else:
                            prod[e] = s
                    if len(prod) > budget.max_terms:
                        raise BudgetExceeded("terms", f"over {budget.max_terms} terms")
                out = prod
            values[i] = out
            fdeg[i] = sum(fdeg[c] for c in gate[1])
        if len(values[i]) > budget.max_terms:
            raise BudgetExceeded("terms", f"{len(values[i])} > {budget.max_terms}")
        if fdeg[i] > budget.max_degree:
            # the formal bound over-approximates; check the actual degree
            actual = max((sum(e) for e in values[i]), default=-1)
            if actual > budget.max_degree:
                raise BudgetExceeded("degree", f"{actual} > {budget.max_degree}")
            fdeg[i] = actual
    return [DensePoly(field, n, values[o]) for o in circ.outputs]


def circuit_from_dense(p: DensePoly) -> Circuit:
    """Sum-of-monomials circuit computing p (a depth-2 normal form)."""
    b = CircuitBuilder(p.field, p.n)
    parts = []
    for e in sorted(p.terms):
        c = p.terms[e]
        factors = [b.const(c)]
        for var, exp in enumerate(e):
            factors.extend([b.inp(var)] * exp)
        parts.append(b.mul(*factors) if len(factors) > 1 else factors[0])
    if not parts:
        return b.finish(b.const(p.field.zero))
    return b.finish(b.add(*parts) if len(parts) > 1 else parts[0])


# -- structural operators ------------------------------------------------------

def hasse_derivative_dense(p: DensePoly, var: int, k: int) -> DensePoly:
    """Coefficient of z^k in p with `var` shifted by z (Hasse derivative)."""
    if k < 0:
        raise ValueError("derivative order must be >= 0")
    if k == 0:
        return p
    field = p.field
    terms = {}
    for e, c in p.terms.items():
        if e[var] < k:
            continue
        w = field.mul(c, field.embed(math.comb(e[var], k)))
        if w == field.zero:
            continue
        ne = list(e)
        ne[var] -= k
        ne = tuple(ne)
        s = field.add(terms.get(ne, field.zero), w)
        if s == field.zero:
            terms.pop(ne, None)
        else:
            terms[ne] = s
    return DensePoly(field, p.n, terms)


def homog_component_dense(p: DensePoly, k: int) -> DensePoly:
    if k < 0:
        raise ValueError("component index must be >= 0")
    return DensePoly(p.field, p.n, {e: c for e, c in p.terms.items() if sum(e) == k})


def truncate_dense(p: DensePoly, d: int) -> DensePoly:
    return DensePoly(p.field, p.n, {e: c for e, c in p.terms.items() if sum(e) <= d})


def homog_component_in_vars(p: DensePoly, k: int, vars_subset) -> DensePoly:
    vs = set(vars_subset)
    return DensePoly(
        p.field,
        p.n,
        {e: c for e, c in p.terms.items() if sum(x for i, x in enumerate(e) if i in vs) == k},
    )


def substitute_var_dense(p: DensePoly, var: int, q: DensePoly) -> DensePoly:
    """Compose: replace `var` by the polynomial q (Horner in var)."""
    same_field(p.field, q.field)
    if p.n != q.n:
        raise ValueError("variable space mismatch")
    field = p.field
    d = p.degree_in(var)
    if d <= 0:
        return p
    layers = [DensePoly.zero(field, p.n) for _ in range(d + 1)]
    for e, c in p.terms.items():
        ne = list(e)
        k = ne[var]
        ne[var] = 0
        layers[k] = layers[k] + DensePoly.monomial(field, p.n, ne, c)
    acc = layers[d]
    for k in range(d - 1, -1, -1):
        acc = acc * q + layers[k]
    return acc


def translate_dense(p: DensePoly, shift) -> DensePoly:
    """p(x + shift), exact."""
    field = p.field
    out = p
    for var, cval in enumerate(shift):
        if cval == field.zero:
            continue
        q = DensePoly(field, p.n, {
            tuple(1 if i == var else 0 for i in range(p.n)): field.one,
            (0,) * p.n: cval,
        })
        out = substitute_var_dense(out, var, q)
    return out


# -- exact division -------------------------------------------------------------

def _lex_key(e, main_var):
    if main_var is None:
        return e
    return (e[main_var],) + tuple(x for i, x in enumerate(e) if i != main_var)


def _leading(p: DensePoly, main_var):
    return max(p.terms, key=lambda e: _lex_key(e, main_var))


def _try_divide(p: DensePoly, f: DensePoly, main_var) -> DensePoly | None:
    """Exact quotient p/f under lex order, or None if f does not divide p."""
    field = p.field
    lt_f = _leading(f, main_var)
    lc_f = f.terms[lt_f]
    quo = DensePoly.zero(field, p.n)
    rem = p
    # With a single divisor and a monomial order, exact divisibility means
    # the leading term is always cancellable; the first failure certifies
    # non-divisibility.
    while not rem.is_zero():
        lt = _leading(rem, main_var)
        diff = tuple(a - b for a, b in zip(lt, lt_f))
        if any(d < 0 for d in diff):
            return None
        c = field.div(rem.terms[lt], lc_f)
        t = DensePoly.monomial(field, p.n, diff, c)
        quo = quo + t
        rem = rem - t * f
    return quo


def divides(f: DensePoly, p: DensePoly, main_var: int | None = None) -> int:
    """Largest m with f^m dividing p; 0 when f does not divide p.

    f must be nonzero and nonconstant (units divide everything with
    unbounded multiplicity). When the workload has a distinguished main
    variable, pass it so the lex order puts it greatest.
    """
    if f.is_zero():
        raise ZeroDivisor("zero divisor")
    if f.total_degree() == 0:
        raise ZeroDivisor("constant divisor has unbounded multiplicity")
    f._like(p)
    if p.is_zero():
        raise ZeroDivisor("dividend is the zero polynomial")
    m = 0
    cur = p
    cap = p.total_degree() // max(1, f.total_degree()) + 1
    while m <= cap:
        q = _try_divide(cur, f, main_var)
        if q is None:
            return m
        m += 1
        cur = q
    return m


# -- univariate machinery ---------------------------------------------------------
# Coefficient-list form: u[k] is the coefficient of y^k, no trailing zeros,
# [] is the zero polynomial.

def _unorm(field, u):
    while u and u[-1] == field.zero:
        u.pop()
    return u


def _uadd(field, a, b):
    n = max(len(a), len(b))
    out = [field.zero] * n
    for i, c in enumerate(a):
        out[i] = c
    for i, c in enumerate(b):
        out[i] = field.add(out[i], c)
    return _unorm(field, out)


def _uscale(field, a, v):
    if v == field.zero:
        return []
    return [field.mul(c, v) for c in a]


def _usub(field, a, b):
    return _uadd(field, a, _uscale(field, b, field.neg(field.one)))


def _umul(field, a, b):
    if not a or not b:
        return []
    out = [field.zero] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x == field.zero:
            continue
        for j, y in enumerate(b):
            out[i + j] = field.add(out[i + j], field.mul(x, y))
    return _unorm(field, out)


def _udivmod(field, a, b):
    if not b:
        raise ZeroDivisor("univariate division by zero")
    a = list(a)
    inv_lead = field.inv(b[-1])
    q = [field.zero] * max(0, len(a) - len(b) + 1)
    while len(a) >= len(b):
        c = field.mul(a[-1], inv_lead)
        k = len(a) - len(b)
        q[k] = c
        for i, bc in enumerate(b):
            a[k + i] = field.sub(a[k + i], field.mul(c, bc))
        _unorm(field, a)
        if not a:
            break
    return _unorm(field, q), a


def _umonic(field, a):
    if not a:
        return a
    return _uscale(field, a, field.inv(a[-1]))


def _ugcd(field, a, b):
    a, b = list(a), list(b)
    while b:
        _, r = _udivmod(field, a, b)
        a, b = b, r
    return _umonic(field, a)


def _uderiv(field, a):
    return _unorm(field, [field.mul(field.embed(i), c) for i, c in enumerate(a)][1:] or [])


def _upowmod(field, base, e, mod):
    result = [field.one]
    base = _udivmod(field, base, mod)[1]
    while e:
        if e & 1:
            result = _udivmod(field, _umul(field, result, base), mod)[1]
        base = _udivmod(field, _umul(field, base, base), mod)[1]
        e >>= 1
    return result


def _yun_squarefree(field, a):
    """Squarefree decomposition a = prod f_i^i (char 0 or char > deg a)."""
    a = _umonic(field, a)
    da = _uderiv(field, a)
    g = _ugcd(field, a, da)
    if len(g) <= 1:
        return [(a, 1)]
    c, _ = _udivmod(field, a, g)
    w, _ = _udivmod(field, da, g)
    out = []
    i = 1
    while len(c) > 1:
        y = _usub(field, w, _uderiv(field, c))
        h = _ugcd(field, c, y)
        if len(h) > 1:
            out.append((h, i))
        c, _ = _udivmod(field, c, h)
        w, _ = _udivmod(field, y, h)
        i += 1
    return out


def _linear_roots_prime(field: PrimeField, g):
    """Roots of a monic squarefree product of linear factors over F_p."""
    roots = []
    stack = [g]
    while stack:
        u = stack.pop()
        if len(u) <= 1:
            continue
        if len(u) == 2:
            roots.append(field.neg(field.mul(u[0], field.inv(u[1]))))
            continue
        split = None
        a = 0
        # deterministic sequence of shifts; each splits with probability
        # about 1/2 for a random shift, so small a suffice in practice
        while split is None:
            a += 1
            t = _upowmod(field, [field.embed(a), field.one], (field.p - 1) // 2, u)
            t = _usub(field, t, [field.one])
            h = _ugcd(field, t, u)
            if 0 < len(h) - 1 < len(u) - 1:
                split = h
        v, _ = _udivmod(field, u, split)
        stack.append(split)
        stack.append(v)
    return roots


def _int_divisors(n: int):
    from sympy import factorint  # deferred: import cost only on the char-0 path

    divs = [1]
    for prime, exp in factorint(n).items():
        divs = [d * prime**e for d in divs for e in range(exp + 1)]
    return divs


def _rational_roots(field: Rationals, coeffs):
    """All rational roots of an integer-content-reduced coefficient list."""
    denom_lcm = 1
    for c in coeffs:
        denom_lcm = denom_lcm * c.denominator // math.gcd(denom_lcm, c.denominator)
    ints = [int(c * denom_lcm) for c in coeffs]
    content = 0
    for c in ints:
        content = math.gcd(content, c)
    ints = [c // content for c in ints]
    lead, trail = abs(ints[-1]), abs(ints[0])
    from fractions import Fraction

    roots = []
    for num in _int_divisors(trail):
        for den in _int_divisors(lead):
            for sign in (1, -1):
                cand = Fraction(sign * num, den)
                if cand in roots:
                    continue
                acc = Fraction(0)
                for c in reversed(ints):
                    acc = acc * cand + c
                if acc == 0:
                    roots.append(cand)
    return roots


def univariate_roots(p: DensePoly):
    """All base-field roots of a univariate polynomial, with multiplicities.

    Rationals: rational-root enumeration over divisors of the leading and
    trailing coefficients. Prime fields: squarefree decomposition, then
    gcd with y^p - y by modular exponentiation, then equal-degree splitting
    restricted to linear factors. Roots come back sorted.
    """
    if p.is_zero():
        raise ZeroPolynomial("root finding on the zero polynomial")
    active = sorted({i for e in p.terms for i, x in enumerate(e) if x})
    if len(active) > 1:
        raise ValueError("univariate_roots needs a univariate polynomial")
    var = active[0] if active else 0
    field = p.field
    coeffs = [field.zero] * (p.degree_in(var) + 1)
    for e, c in p.terms.items():
        coeffs[e[var]] = c
    coeffs = _unorm(field, coeffs)

    out = []
    shift = 0
    while coeffs and coeffs[0] == field.zero:
        coeffs = coeffs[1:]
        shift += 1
    if shift:
        out.append((field.zero, shift))
    if len(coeffs) <= 1:
        return sorted(out)

    if isinstance(field, PrimeField):
        for factor, mult in _yun_squarefree(field, coeffs):
            t = _upowmod(field, [field.zero, field.one], field.p, factor)
            t = _usub(field, t, [field.zero, field.one])
            g = _ugcd(field, t, factor)
            for r in _linear_roots_prime(field, g):
                out.append((r, mult))
    else:
        for r in _rational_roots(field, coeffs):
            mult = 0
            cur = coeffs
            while True:
                q, rem = _udivmod(field, cur, [field.neg(r), field.one])
                if rem:
                    break
                mult += 1
                cur = q
            if mult:
                out.append((r, mult))
    return sorted(out)


# -- text form ------------------------------------------------------------------
# Header (field/nvars as in circuit files), then one line per term:
#     <coeff> : <e1> <e2> ... <en>
# sorted lexicographically by exponent vector.

def emit_poly(p: DensePoly) -> str:
    field = p.field
    lines = []
    if field.kind == "rationals":
        lines.append("field rationals")
    else:
        lines.append(f"field prime {field.p}")
    lines.append(f"nvars {p.n}")
    for e in sorted(p.terms):
        exps = " ".join(str(x) for x in e)
        lines.append(f"{field.format(p.terms[e])} : {exps}".rstrip())
    return "\n".join(lines) + "\n"


def parse_poly(text: str) -> DensePoly:
    field = None
    n = None
    terms = {}
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] == "field":
            field = Rationals() if parts[1] == "rationals" else PrimeField(int(parts[2]))
            continue
        if parts[0] == "nvars":
            n = int(parts[1])
            continue
        coeff_text, _, exps_text = line.partition(":")
        e = tuple(int(x) for x in exps_text.split())
        if len(e) != n:
            raise ValueError(f"term with {len(e)} exponents in {n}-variable polynomial")
        terms[e] = field.parse(coeff_text.strip())
    if field is None or n is None:
        raise ValueError("missing field/nvars header")
    return DensePoly(field, n, terms)
