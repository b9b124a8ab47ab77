"""Hitting sets from explicit hard polynomials, and identity-testing tools.

The hitting-set construction is the mechanics of the hardness-to-randomness
argument: evaluate the supplied multilinear table on the design's windows
of an assignment grid T^l with |T| = D*d + 1. Hitting sets are streamed in
lexicographic y-order (the first point is the all-f(0) point); a limit cap
guards against |T|^l enumerations, so a 'zero' verdict is certain only when
the stream was exhausted and the result says which case happened.

pit_sz runs Schwartz-Zippel on the grid {0..d}^n, either with seeded random
points or exhaustively; exhaustive mode is definitive and uses a vectorized
scan when the field allows it. hybrid_locate walks the hybrid chain of the
composition argument and returns the switch index together with a fixing
assignment that keeps the last nonzero hybrid alive.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

from .circuit import ADD, CONST, IN, Circuit, CircuitBuilder, drop_unused_vars
from .dense import DEFAULT_BUDGET, expand
from .designs import Design
from .errors import ArityMismatch, FieldTooSmall, PreconditionFailed
from .fields import Field, PrimeField, Rationals
from .seeding import stream

EXHAUSTIVE_POINT_BUDGET = 2_000_000


class ExplicitPoly:
    """Multilinear polynomial given by its full 2^m coefficient table.

    coeffs[mask] is the coefficient of prod_{j in mask} z_j (bit j of the
    mask marks variable j). Desk-scale explicitness made literal: the table
    is complete and m stays small.
    """

    def __init__(self, field: Field, m: int, coeffs: list):
        if m > 24:
            raise ValueError("explicit tables are desk scale (m <= 24)")
        if len(coeffs) != 1 << m:
            raise ValueError(f"table needs {1 << m} coefficients, got {len(coeffs)}")
        self.field = field
        self.m = m
        self.coeffs = list(coeffs)

    def evaluate(self, point):
        """Fold one variable at a time; O(2^m) field operations."""
        if len(point) != self.m:
            raise ArityMismatch(f"point has {len(point)} coordinates, table has {self.m}")
        field = self.field
        cur = self.coeffs
        for j in range(self.m - 1, -1, -1):
            half = 1 << j
            x = point[j]
            cur = [field.add(cur[k], field.mul(x, cur[half + k])) for k in range(half)]
        return cur[0]

    def degree(self) -> int:
        degs = [bin(mask).count("1") for mask, c in enumerate(self.coeffs) if c != self.field.zero]
        return max(degs, default=-1)

    @classmethod
    def random_full_support(cls, field: Field, m: int, bound: int, seed: int):
        """A stand-in 'hard' polynomial: every coefficient nonzero."""
        rng = stream(seed, "hard-table")
        coeffs = [field.embed(1 + rng.randrange(bound - 1)) for _ in range(1 << m)]
        return cls(field, m, coeffs)

    def emit_table(self) -> str:
        field = self.field
        lines = []
        if field.kind == "rationals":
            lines.append("field rationals")
        else:
            lines.append(f"field prime {field.p}")
        lines.append(f"m {self.m}")
        for mask, c in enumerate(self.coeffs):
            if c != field.zero:
                lines.append(f"{mask} {field.format(c)}")
        return "\n".join(lines) + "\n"

    @classmethod
    def parse_table(cls, text: str):
        field = None
        m = None
        entries = {}
        for raw in text.splitlines():
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if parts[0] == "field":
                field = Rationals() if parts[1] == "rationals" else PrimeField(int(parts[2]))
            elif parts[0] == "m":
                m = int(parts[1])
            else:
                entries[int(parts[0])] = field.parse(parts[1])
        if field is None or m is None:
            raise ValueError("missing field/m header in table")
        coeffs = [entries.get(mask, field.zero) for mask in range(1 << m)]
        return cls(field, m, coeffs)


@dataclass
class HittingSet:
    """Streamed point set {(f(y|_S1), ..., f(y|_Sn)) : y in T^l}."""

    hard: ExplicitPoly
    design: Design
    D: int
    d: int

    def __post_init__(self):
        if self.hard.m != self.design.m:
            raise ArityMismatch(
                f"table has m={self.hard.m}, design wants m={self.design.m}"
            )
        field = self.hard.field
        t_size = self.D * self.d + 1
        if isinstance(field, PrimeField) and field.p < t_size:
            raise FieldTooSmall(f"|T| = {t_size} exceeds field size {field.p}")
        self.t_size = t_size
        self.windows = [sorted(s) for s in self.design.sets]
        self._prefix = []  # cache of already-enumerated points (fixed order)

    @property
    def total_points(self) -> int:
        return self.t_size ** self.design.ell

    def _raw_points(self, skip: int):
        field = self.hard.field
        ell = self.design.ell
        t_vals = [field.embed(v) for v in range(self.t_size)]
        y = [0] * ell  # indices into t_vals, last coordinate fastest
        if skip:
            rem = skip
            for pos in range(ell - 1, -1, -1):
                y[pos] = rem % self.t_size
                rem //= self.t_size
            if rem:
                return
        while True:
            assignment = [t_vals[i] for i in y]
            yield tuple(
                self.hard.evaluate([assignment[e] for e in window])
                for window in self.windows
            )
            pos = ell - 1
            while pos >= 0:
                y[pos] += 1
                if y[pos] < self.t_size:
                    break
                y[pos] = 0
                pos -= 1
            if pos < 0:
                return

    def prefix(self, count: int) -> list:
        """The first `count` points, cached across calls."""
        count = min(count, self.total_points)
        if len(self._prefix) < count:
            gen = self._raw_points(skip=len(self._prefix))
            while len(self._prefix) < count:
                self._prefix.append(next(gen))
        return self._prefix[:count]

    def points(self, limit: int | None = None):
        """Yield hitting points in lexicographic y-order (y = 0 first)."""
        yield from self._prefix[: limit if limit is not None else len(self._prefix)]
        emitted = len(self._prefix) if limit is None else min(limit, len(self._prefix))
        if limit is not None and emitted >= limit:
            return
        for point in self._raw_points(skip=emitted):
            self._prefix.append(point)
            yield point
            emitted += 1
            if limit is not None and emitted >= limit:
                return

    def provenance(self) -> dict:
        return {
            "design": {"n": self.design.n, "m": self.design.m, "ell": self.design.ell},
            "hard_degree": self.hard.degree(),
            "D": self.D,
            "d": self.d,
            "t_size": self.t_size,
        }


@dataclass
class PitResult:
    status: str                 # "zero" | "nonzero" | "probably-zero"
    witness: tuple | None
    points_checked: int
    exhausted: bool             # every point of the declared set was seen
    mode: str                   # "hitset" | "exhaustive" | "random"


def pit_hitset(circ: Circuit, hitset: HittingSet, limit: int | None = None) -> PitResult:
    """Evaluate on streamed hitting points; first witness wins.

    With a limit, a 'zero' verdict only covers the examined prefix; the
    exhausted flag says whether that verdict is unconditional.
    """
    if circ.num_vars != hitset.design.n:
        raise ArityMismatch(
            f"circuit has {circ.num_vars} variables, design provides {hitset.design.n}"
        )
    field = circ.field
    if (
        limit is not None
        and isinstance(field, PrimeField)
        and field.p < (1 << 31)
        and limit <= 1 << 22
    ):
        try:
            return _pit_hitset_vectorized(circ, hitset, limit)
        except ImportError:
            pass
    zero = field.zero
    checked = 0
    for point in hitset.points(limit=limit):
        checked += 1
        if circ.evaluate1(list(point)) != zero:
            return PitResult("nonzero", point, checked, False, "hitset")
    exhausted = limit is None or checked < limit or checked == hitset.total_points
    return PitResult("zero", None, checked, exhausted, "hitset")


def _pit_hitset_vectorized(circ: Circuit, hitset: HittingSet, limit: int) -> PitResult:
    """Same verdict/witness as the streaming scan, batched with numpy."""
    import numpy as np

    p = circ.field.p
    pts = hitset.prefix(limit)
    total = len(pts)
    prog, outputs = _compile_program(circ)
    out = outputs[0]
    batch = 1 << 12
    start = 0
    while start < total:
        stop = min(start + batch, total)
        cols = np.array(pts[start:stop], dtype=np.int64).T % p
        vals = [None] * len(prog)
        for i, gate in enumerate(prog):
            op = gate[0]
            if op == IN:
                vals[i] = cols[gate[1]]
            elif op == CONST:
                vals[i] = np.full(stop - start, gate[1] % p, dtype=np.int64)
            elif op == ADD:
                acc = vals[gate[1][0]]
                for c in gate[1][1:]:
                    acc = (acc + vals[c]) % p
                vals[i] = acc
            else:
                acc = vals[gate[1][0]]
                for c in gate[1][1:]:
                    acc = (acc * vals[c]) % p
                vals[i] = acc
        nz = vals[out] % p != 0
        if nz.any():
            k = int(np.argmax(nz))
            return PitResult("nonzero", pts[start + k], start + k + 1, False, "hitset")
        start = stop
    exhausted = total == hitset.total_points or total < limit
    return PitResult("zero", None, total, exhausted, "hitset")


# -- grid scans -------------------------------------------------------------------

def _compile_program(circ: Circuit):
    """Flatten gates into (op, payload) instructions over a value array."""
    prog = []
    for gate in circ.gates:
        prog.append(gate)
    return prog, list(circ.outputs)


def _grid_scan_prime_numpy(circ: Circuit, grid_size: int, want_count: bool):
    """Vectorized exhaustive scan over {0..grid_size-1}^n for small prime
    fields. Returns (zero_count, first_witness_or_None)."""
    import numpy as np

    p = circ.field.p
    n = circ.num_vars
    total = grid_size**n
    prog, outputs = _compile_program(circ)
    out = outputs[0]
    batch = 1 << 15
    zero_count = 0
    witness = None
    start = 0
    while start < total:
        stop = min(start + batch, total)
        idx = np.arange(start, stop, dtype=np.int64)
        cols = []
        for v in range(n):
            divisor = grid_size ** (n - 1 - v)
            cols.append(((idx // divisor) % grid_size).astype(np.int64))
        vals = [None] * len(prog)
        for i, gate in enumerate(prog):
            op = gate[0]
            if op == IN:
                vals[i] = cols[gate[1]]
            elif op == CONST:
                vals[i] = np.full(stop - start, gate[1] % p, dtype=np.int64)
            elif op == ADD:
                acc = vals[gate[1][0]]
                for c in gate[1][1:]:
                    acc = (acc + vals[c]) % p
                vals[i] = acc
            else:
                acc = vals[gate[1][0]]
                for c in gate[1][1:]:
                    acc = (acc * vals[c]) % p
                vals[i] = acc
        res = vals[out] % p
        zeros = res == 0
        zero_count += int(zeros.sum())
        if witness is None and not zeros.all():
            k = int(np.argmax(~zeros))
            gi = start + k
            point = []
            for v in range(n):
                divisor = grid_size ** (n - 1 - v)
                point.append((gi // divisor) % grid_size)
            witness = tuple(circ.field.embed(x) for x in point)
            if not want_count:
                return zero_count, witness
        start = stop
    return zero_count, witness


def _grid_scan_python(circ: Circuit, grid_size: int, want_count: bool):
    field = circ.field
    n = circ.num_vars
    values = [field.embed(v) for v in range(grid_size)]
    idx = [0] * n
    zero_count = 0
    witness = None
    while True:
        point = [values[i] for i in idx]
        if circ.evaluate1(point) == field.zero:
            zero_count += 1
        elif witness is None:
            witness = tuple(point)
            if not want_count:
                return zero_count, witness
        pos = n - 1
        while pos >= 0:
            idx[pos] += 1
            if idx[pos] < grid_size:
                break
            idx[pos] = 0
            pos -= 1
        if pos < 0:
            return zero_count, witness


def _grid_scan(circ: Circuit, grid_size: int, want_count: bool):
    field = circ.field
    if isinstance(field, PrimeField) and field.p < (1 << 31):
        try:
            return _grid_scan_prime_numpy(circ, grid_size, want_count)
        except ImportError:
            pass
    return _grid_scan_python(circ, grid_size, want_count)


def exhaustive_zero_count(circ: Circuit, grid_size: int) -> int:
    """|{a in S^n : C(a) = 0}| for S = {0..grid_size-1} embedded."""
    count, _ = _grid_scan(circ, grid_size, want_count=True)
    return count


def pit_sz(
    circ: Circuit,
    d: int,
    trials: int = 64,
    seed: int = 0,
    exhaustive: bool | None = None,
) -> PitResult:
    """Schwartz-Zippel test on the grid {0..d}^n, d >= deg(C).

    Exhaustive mode scans all (d+1)^n points and is definitive; it is the
    default whenever the grid fits the point budget. Random mode samples
    seeded points and can only answer probably-zero.
    """
    field = circ.field
    n = circ.num_vars
    grid = d + 1
    if isinstance(field, PrimeField) and field.p < grid:
        raise FieldTooSmall(f"grid {grid} exceeds field size {field.p}")
    total = grid**n
    if exhaustive is None:
        exhaustive = total <= EXHAUSTIVE_POINT_BUDGET
    if exhaustive:
        _, witness = _grid_scan(circ, grid, want_count=False)
        if witness is None:
            return PitResult("zero", None, total, True, "exhaustive")
        return PitResult("nonzero", witness, total, True, "exhaustive")
    rng = stream(seed, "pit-sz")
    for t in range(trials):
        point = [field.embed(rng.randrange(grid)) for _ in range(n)]
        if circ.evaluate1(point) != field.zero:
            return PitResult("nonzero", tuple(point), t + 1, False, "random")
    return PitResult("probably-zero", None, trials, False, "random")


# -- hybrid locator ------------------------------------------------------------------

@dataclass
class HybridWitness:
    index: int                    # Q_index != 0 and Q_{index+1} == 0
    assignment: dict              # fixed variables keeping Q_index nonzero
    active_vars: list = dc_field(default_factory=list)


def _window_circuit(b: CircuitBuilder, hard: ExplicitPoly, window, y_base: int):
    """Gate computing hard(y|_window) inside builder b."""
    field = hard.field
    parts = []
    for mask, c in enumerate(hard.coeffs):
        if c == field.zero:
            continue
        factors = [b.const(c)]
        for j in range(hard.m):
            if mask >> j & 1:
                factors.append(b.inp(y_base + window[j]))
        parts.append(b.mul(*factors) if len(factors) > 1 else factors[0])
    return b.add(*parts) if parts else b.const(field.zero)


def _hybrid_circuit(q: Circuit, hard: ExplicitPoly, design: Design, j: int) -> Circuit:
    """Q_j = q(f(y|_S1)..f(y|_Sj), x_{j+1}.., ) over x-vars then y-vars."""
    n = design.n
    b = CircuitBuilder(q.field, n + design.ell)
    bindings = {}
    for i in range(j):
        window = sorted(design.sets[i])
        bindings[i] = _window_circuit(b, hard, window, y_base=n)
    outs = b.import_circuit(q, var_bindings=bindings)
    return b.finish(outs)


def _active_vars(circ: Circuit) -> list:
    return sorted({circ.gates[i][1] for i in circ.reachable() if circ.gates[i][0] == IN})


def _is_zero_exhaustive(circ: Circuit, deg_bound: int) -> bool:
    """Definitive zero test: exhaustive SZ over the active variables."""
    active = _active_vars(circ)
    if not active:
        return circ.evaluate1([circ.field.zero] * circ.num_vars) == circ.field.zero
    small = drop_unused_vars(circ, active)
    grid = deg_bound + 1
    if grid**len(active) > EXHAUSTIVE_POINT_BUDGET:
        raise PreconditionFailed(
            f"exhaustive zero test needs {grid ** len(active)} points; desk scale exceeded"
        )
    _, witness = _grid_scan(small, grid, want_count=False)
    return witness is None


def hybrid_locate(q: Circuit, hard: ExplicitPoly, design: Design, seed: int = 0) -> HybridWitness:
    """Find i with Q_i != 0 and Q_{i+1} == 0 in the hybrid chain, plus an
    assignment fixing the variables outside (x_{i+1}, y|_{S_{i+1}}) that
    keeps Q_i nonzero.

    Preconditions (certified on the dense oracle at desk scale): q is not
    identically zero, and the fully composed polynomial is.
    """
    if q.num_vars != design.n:
        raise ArityMismatch(f"circuit has {q.num_vars} variables, design has n={design.n}")
    field = q.field
    n = design.n
    if expand(q, DEFAULT_BUDGET).is_zero():
        raise PreconditionFailed("q is identically zero")
    full = _hybrid_circuit(q, hard, design, n)
    if not expand(full, DEFAULT_BUDGET).is_zero():
        raise PreconditionFailed("q(f(y|_S1)..f(y|_Sn)) is not identically zero")

    deg_bound = max(1, q.formal_degree() * max(1, hard.degree()))
    index = None
    prev = _hybrid_circuit(q, hard, design, 0)
    for j in range(1, n + 1):
        cur = _hybrid_circuit(q, hard, design, j)
        if not _is_zero_exhaustive(prev, deg_bound) and _is_zero_exhaustive(cur, deg_bound):
            index = j - 1
            break
        prev = cur
    if index is None:
        raise PreconditionFailed("no switching index found; preconditions violated")

    # fix everything except x_{index+1} and y|_{S_{index+1}}
    hybrid = _hybrid_circuit(q, hard, design, index)
    keep = {index} | {n + e for e in design.sets[index]}
    to_fix = [v for v in _active_vars(hybrid) if v not in keep]
    assignment = {}
    cur = hybrid
    for v in to_fix:
        found = None
        for val in range(deg_bound + 1):
            b = CircuitBuilder(field, cur.num_vars)
            fixed = b.finish(
                b.import_circuit(cur, var_bindings={v: b.const(field.embed(val))})
            )
            if not _is_zero_exhaustive(fixed, deg_bound):
                found = (field.embed(val), fixed)
                break
        if found is None:
            raise PreconditionFailed(f"could not fix variable {v} keeping the hybrid nonzero")
        assignment[v] = found[0]
        cur = found[1]
    return HybridWitness(index=index, assignment=assignment, active_vars=_active_vars(hybrid))
