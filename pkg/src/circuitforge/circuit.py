"""Arithmetic-circuit DAG representation.

A Circuit is an immutable append-only array of gates over a fixed field;
every gate references only lower-indexed gates, so the array order is a
topological order. Gates are plain tuples:

    ("in", var_index)
    ("const", value)
    ("add", (child, child, ...))    fan-in >= 2
    ("mul", (child, child, ...))    fan-in >= 2

Size is the wire count (sum of fan-ins over reachable gates); leaves
contribute no wires, so a lone input gate has size 0. Depth is measured on
the layered alternating sum/product normal form: adjacent same-op layers
merge, multiplication by a constant is transparent (linear combinations
belong to the sum layer that absorbs them), and a virtual top addition
layer is inserted when the output is a product. A sigma-pi-sigma circuit
therefore reports depth 3.

Circuits are built through CircuitBuilder, which canonicalizes as it goes:
constants fold, identities drop, and (by default) structurally identical
gates are shared. All transformations in this package return new circuits.
"""

from __future__ import annotations

from .errors import (
    ArityMismatch,
    CircuitSyntaxError,
    CyclicReference,
    DanglingReference,
)
from .fields import Field, PrimeField, Rationals, same_field

IN = "in"
CONST = "const"
ADD = "add"
MUL = "mul"


class Circuit:
    __slots__ = ("field", "num_vars", "gates", "outputs", "_metrics")

    def __init__(self, field: Field, num_vars: int, gates, outputs):
        self.field = field
        self.num_vars = num_vars
        self.gates = tuple(gates)
        self.outputs = tuple(outputs)
        self._metrics = None
        if not self.outputs:
            raise ValueError("circuit needs at least one output")

    # -- basic structure ---------------------------------------------------

    def output(self) -> int:
        if len(self.outputs) != 1:
            raise ValueError("operation requires a single-output circuit")
        return self.outputs[0]

    def reachable(self):
        """Indices of gates reachable from the outputs, ascending."""
        seen = set(self.outputs)
        stack = list(self.outputs)
        gates = self.gates
        while stack:
            g = gates[stack.pop()]
            if g[0] in (ADD, MUL):
                for c in g[1]:
                    if c not in seen:
                        seen.add(c)
                        stack.append(c)
        return sorted(seen)

    def size(self) -> int:
        return self.metrics()["size"]

    def depth(self) -> int:
        return self.metrics()["depth"]

    def formal_degree(self) -> int:
        return self.metrics()["formal_degree"]

    def metrics(self) -> dict:
        """Wire count, gate count, normalized depth and formal degree."""
        if self._metrics is None:
            self._metrics = _compute_metrics(self)
        return dict(self._metrics)

    # -- evaluation --------------------------------------------------------

    def evaluate(self, point):
        """Evaluate all outputs at a point (one field element per variable)."""
        if len(point) != self.num_vars:
            raise ArityMismatch(
                f"point has {len(point)} coordinates, circuit has {self.num_vars} variables"
            )
        field = self.field
        values = [None] * len(self.gates)
        for i, gate in enumerate(self.gates):
            op = gate[0]
            if op == IN:
                values[i] = point[gate[1]]
            elif op == CONST:
                values[i] = gate[1]
            elif op == ADD:
                acc = field.zero
                for c in gate[1]:
                    acc = field.add(acc, values[c])
                values[i] = acc
            else:
                acc = field.one
                for c in gate[1]:
                    acc = field.mul(acc, values[c])
                values[i] = acc
        return [values[o] for o in self.outputs]

    def evaluate1(self, point):
        return self.evaluate(point)[0]

    def __repr__(self):
        m = self.metrics()
        return (
            f"<Circuit n={self.num_vars} outputs={len(self.outputs)} "
            f"size={m['size']} depth={m['depth']} fdeg={m['formal_degree']}>"
        )


def _compute_metrics(circ: Circuit) -> dict:
    gates = circ.gates
    reach = circ.reachable()
    wires = 0
    # depth info per gate: (effective_op, layers); effective ops are
    # "leaf" (variable), "const", "add", "mul"
    eop = {}
    dep = {}
    fdeg = {}
    for i in reach:
        gate = gates[i]
        op = gate[0]
        if op == IN:
            eop[i], dep[i], fdeg[i] = "leaf", 0, 1
        elif op == CONST:
            eop[i], dep[i], fdeg[i] = "const", 0, 0
        elif op == ADD:
            wires += len(gate[1])
            fdeg[i] = max(fdeg[c] for c in gate[1])
            live = [c for c in gate[1] if eop[c] != "const"]
            if not live:
                eop[i], dep[i] = "const", 0
            else:
                eop[i] = "add"
                dep[i] = max(dep[c] + (0 if eop[c] == "add" else 1) for c in live)
        else:
            wires += len(gate[1])
            fdeg[i] = sum(fdeg[c] for c in gate[1])
            live = [c for c in gate[1] if eop[c] != "const"]
            if not live:
                eop[i], dep[i] = "const", 0
            elif len(live) == 1:
                # multiplication by constants rides along with the child
                eop[i], dep[i] = eop[live[0]], dep[live[0]]
            else:
                eop[i] = "mul"
                dep[i] = max(dep[c] + (0 if eop[c] == "mul" else 1) for c in live)
    depth = 0
    for o in circ.outputs:
        d = dep[o]
        if eop[o] == "mul":
            d += 1  # virtual top addition layer
        elif eop[o] == "leaf" and gates[o][0] != IN:
            d += 1  # scalar multiple of a variable: one weighted sum layer
        depth = max(depth, d)
    return {
        "size": wires,
        "gates": len(reach),
        "depth": depth,
        "formal_degree": max(fdeg[o] for o in circ.outputs),
    }


class CircuitBuilder:
    """Constructs circuits with on-the-fly canonicalization.

    With share=True (default) structurally identical gates are merged, which
    is what keeps repeated sub-circuit imports at DAG size. share=False
    disables merging so that tree-shaped (formula) circuits stay trees.
    """

    def __init__(self, field: Field, num_vars: int, share: bool = True):
        self.field = field
        self.num_vars = num_vars
        self.share = share
        self._gates = []
        self._memo = {}

    def _emit(self, gate):
        if self.share:
            hit = self._memo.get(gate)
            if hit is not None:
                return hit
        self._gates.append(gate)
        idx = len(self._gates) - 1
        if self.share:
            self._memo[gate] = idx
        return idx

    def inp(self, var: int) -> int:
        if not 0 <= var < self.num_vars:
            raise ArityMismatch(f"variable x{var + 1} out of range (nvars={self.num_vars})")
        return self._emit((IN, var))

    def const(self, value) -> int:
        self.field.check(value)
        return self._emit((CONST, value))

    def _gate(self, i: int):
        return self._gates[i]

    def add(self, *children: int) -> int:
        field = self.field
        # collect a linear combination: scalar multiples of the same core
        # gate merge, so weighted sums stay one addition layer
        coeffs = {}
        order = []
        csum = field.zero
        for c in children:
            g = self._gates[c]
            if g[0] == CONST:
                csum = field.add(csum, g[1])
                continue
            coeff, core = field.one, c
            if g[0] == MUL and len(g[1]) == 2:
                ga, gb = self._gates[g[1][0]], self._gates[g[1][1]]
                if ga[0] == CONST and gb[0] != CONST:
                    coeff, core = ga[1], g[1][1]
                elif gb[0] == CONST and ga[0] != CONST:
                    coeff, core = gb[1], g[1][0]
            if core not in coeffs:
                order.append(core)
                coeffs[core] = coeff
            else:
                coeffs[core] = field.add(coeffs[core], coeff)
        live = []
        for core in order:
            w = coeffs[core]
            if w == field.zero:
                continue
            live.append(core if w == field.one else self.mul(self.const(w), core))
        if csum != field.zero or not live:
            live.append(self.const(csum))
        if len(live) == 1:
            return live[0]
        return self._emit((ADD, tuple(sorted(live))))

    def mul(self, *children: int) -> int:
        field = self.field
        live = []
        cprod = field.one
        for c in children:
            g = self._gates[c]
            if g[0] == CONST:
                cprod = field.mul(cprod, g[1])
            else:
                live.append(c)
        if cprod == field.zero:
            return self.const(field.zero)
        if cprod != field.one or not live:
            live.append(self.const(cprod))
        if len(live) == 1:
            return live[0]
        return self._emit((MUL, tuple(sorted(live))))

    def neg(self, c: int) -> int:
        return self.scale(self.field.neg(self.field.one), c)

    def sub(self, a: int, b: int) -> int:
        # subtraction is Add with a Const(-1) Mul child; no dedicated gate
        return self.add(a, self.neg(b))

    def scale(self, value, c: int) -> int:
        return self.mul(self.const(value), c)

    def power(self, c: int, e: int) -> int:
        if e == 0:
            return self.const(self.field.one)
        if e == 1:
            return c
        return self.mul(*([c] * e))

    def import_circuit(self, circ: Circuit, var_bindings=None) -> list:
        """Inline another circuit's reachable gates.

        var_bindings maps the imported circuit's variable indices to gate ids
        in this builder; unbound variables pass through as inputs with the
        same index. Returns the gate ids of the imported outputs.
        """
        same_field(self.field, circ.field)
        var_bindings = var_bindings or {}
        mapping = {}
        for i in circ.reachable():
            gate = circ.gates[i]
            op = gate[0]
            if op == IN:
                if gate[1] in var_bindings:
                    mapping[i] = var_bindings[gate[1]]
                else:
                    mapping[i] = self.inp(gate[1])
            elif op == CONST:
                mapping[i] = self.const(gate[1])
            elif op == ADD:
                mapping[i] = self.add(*(mapping[c] for c in gate[1]))
            else:
                mapping[i] = self.mul(*(mapping[c] for c in gate[1]))
        return [mapping[o] for o in circ.outputs]

    def finish(self, outputs) -> Circuit:
        if isinstance(outputs, int):
            outputs = [outputs]
        # drop gates not reachable from the outputs, preserving order
        keep = set(outputs)
        stack = list(outputs)
        while stack:
            g = self._gates[stack.pop()]
            if g[0] in (ADD, MUL):
                for c in g[1]:
                    if c not in keep:
                        keep.add(c)
                        stack.append(c)
        order = sorted(keep)
        remap = {old: new for new, old in enumerate(order)}
        gates = []
        for old in order:
            g = self._gates[old]
            if g[0] in (ADD, MUL):
                gates.append((g[0], tuple(remap[c] for c in g[1])))
            else:
                gates.append(g)
        return Circuit(self.field, self.num_vars, gates, [remap[o] for o in outputs])


# -- convenience constructors ----------------------------------------------

def input_circuit(field: Field, var: int, num_vars: int) -> Circuit:
    b = CircuitBuilder(field, num_vars)
    return b.finish(b.inp(var))


def const_circuit(field: Field, value, num_vars: int) -> Circuit:
    b = CircuitBuilder(field, num_vars)
    return b.finish(b.const(value))


def substitute(circ: Circuit, bindings: dict, num_vars: int | None = None) -> Circuit:
    """Compose: replace variables by circuits.

    bindings maps variable indices of `circ` to single-output circuits over
    the same field (and a shared variable space). Bound sub-circuits are
    inlined once and shared through the DAG; unbound variables pass through.
    """
    for b_circ in bindings.values():
        same_field(circ.field, b_circ.field)
    if num_vars is None:
        num_vars = circ.num_vars
        for b_circ in bindings.values():
            num_vars = max(num_vars, b_circ.num_vars)
    builder = CircuitBuilder(circ.field, num_vars)
    var_map = {}
    for var, b_circ in bindings.items():
        if not 0 <= var < circ.num_vars:
            raise ArityMismatch(f"binding for x{var + 1} outside circuit arity")
        b_circ.output()  # single-output contract
        var_map[var] = builder.import_circuit(b_circ)[0]
    outs = builder.import_circuit(circ, var_bindings=var_map)
    return builder.finish(outs)


def remap_vars(circ: Circuit, var_map: dict, new_num_vars: int) -> Circuit:
    """Rename variables: var_map maps old indices to new indices."""
    builder = CircuitBuilder(circ.field, new_num_vars)
    bindings = {old: builder.inp(new) for old, new in var_map.items()}
    outs = builder.import_circuit(circ, var_bindings=bindings)
    return builder.finish(outs)


def drop_unused_vars(circ: Circuit, keep_vars: list) -> Circuit:
    """Project onto keep_vars (which must cover every referenced input)."""
    mapping = {old: new for new, old in enumerate(keep_vars)}
    for i in circ.reachable():
        gate = circ.gates[i]
        if gate[0] == IN and gate[1] not in mapping:
            raise ArityMismatch(f"variable x{gate[1] + 1} is still referenced")
    return remap_vars(circ, mapping, len(keep_vars))


def formal_degree_in(circ: Circuit, var: int) -> int:
    """Formal degree with respect to one variable (sound deg_var bound)."""
    deg = {}
    for i in circ.reachable():
        gate = circ.gates[i]
        op = gate[0]
        if op == IN:
            deg[i] = 1 if gate[1] == var else 0
        elif op == CONST:
            deg[i] = 0
        elif op == ADD:
            deg[i] = max(deg[c] for c in gate[1])
        else:
            deg[i] = sum(deg[c] for c in gate[1])
    return max(deg[o] for o in circ.outputs)


def is_formula(circ: Circuit) -> bool:
    """True when every gate feeds at most one wire (tree shape)."""
    fan_out = {}
    for i in circ.reachable():
        gate = circ.gates[i]
        if gate[0] in (ADD, MUL):
            for c in gate[1]:
                fan_out[c] = fan_out.get(c, 0) + 1
    for o in circ.outputs:
        fan_out[o] = fan_out.get(o, 0) + 1
    return all(v <= 1 for v in fan_out.values())


# -- text format -------------------------------------------------------------
#
#   field rationals          | field prime <p>
#   nvars <n>
#   g<k> = input x<i>        (i is 1-based)
#   g<k> = const <num>[/<den>]
#   g<k> = add g<a> g<b> ...
#   g<k> = mul g<a> g<b> ...
#   output g<k>
#
# Gate indices must be strictly increasing. Blank lines and '#' comments are
# ignored. Round-trips are semantically identical (same polynomial); the
# builder canonicalizes structure on parse.


def parse_circuit(text: str) -> Circuit:
    field = None
    num_vars = None
    builder = None
    names = {}  # file gate index -> builder gate id
    last_index = -1
    outputs = []

    def fail(line_no, msg):
        raise CircuitSyntaxError(line_no, msg)

    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] == "field":
            if field is not None:
                fail(line_no, "duplicate field line")
            if parts[1:] == ["rationals"]:
                field = Rationals()
            elif len(parts) == 3 and parts[1] == "prime":
                try:
                    field = PrimeField(int(parts[2]))
                except ValueError as e:
                    fail(line_no, str(e))
            else:
                fail(line_no, f"bad field line {line!r}")
            continue
        if parts[0] == "nvars":
            if field is None:
                fail(line_no, "nvars before field")
            if num_vars is not None:
                fail(line_no, "duplicate nvars line")
            try:
                num_vars = int(parts[1])
            except (IndexError, ValueError):
                fail(line_no, "bad nvars line")
            if num_vars < 0:
                fail(line_no, "nvars must be >= 0")
            builder = CircuitBuilder(field, num_vars)
            continue
        if parts[0] == "output":
            if len(parts) != 2 or not parts[1].startswith("g"):
                fail(line_no, "bad output line")
            idx = _gate_index(parts[1], line_no)
            if idx not in names:
                raise DanglingReference(f"line {line_no}: output references undefined g{idx}")
            outputs.append(names[idx])
            continue
        # gate definition: g<k> = <op> ...
        if builder is None:
            fail(line_no, "gate before field/nvars header")
        if len(parts) < 3 or parts[1] != "=" or not parts[0].startswith("g"):
            fail(line_no, f"bad gate line {line!r}")
        idx = _gate_index(parts[0], line_no)
        if idx <= last_index:
            fail(line_no, f"gate indices must be strictly increasing (g{idx})")
        op, args = parts[2], parts[3:]
        if op == "input":
            if len(args) != 1 or not args[0].startswith("x"):
                fail(line_no, "input needs one variable")
            try:
                var = int(args[0][1:])
            except ValueError:
                fail(line_no, f"bad variable {args[0]!r}")
            if not 1 <= var <= num_vars:
                fail(line_no, f"variable {args[0]} out of range")
            gid = builder.inp(var - 1)
        elif op == "const":
            if len(args) != 1:
                fail(line_no, "const needs one value")
            try:
                value = field.parse(args[0])
            except (ValueError, ZeroDivisionError):
                fail(line_no, f"bad constant {args[0]!r}")
            gid = builder.const(value)
        elif op in ("add", "mul"):
            if len(args) < 2:
                fail(line_no, f"{op} needs fan-in >= 2")
            child_ids = []
            for a in args:
                ref = _gate_index(a, line_no)
                if ref >= idx:
                    raise CyclicReference(
                        f"line {line_no}: g{idx} references g{ref} (not below it)"
                    )
                if ref not in names:
                    raise DanglingReference(f"line {line_no}: undefined gate g{ref}")
                child_ids.append(names[ref])
            gid = builder.add(*child_ids) if op == "add" else builder.mul(*child_ids)
        else:
            fail(line_no, f"unknown op {op!r}")
        names[idx] = gid
        last_index = idx

    if field is None or num_vars is None:
        raise CircuitSyntaxError(0, "missing field/nvars header")
    if not outputs:
        raise CircuitSyntaxError(0, "no output line")
    return builder.finish(outputs)


def _gate_index(token: str, line_no: int) -> int:
    if not token.startswith("g"):
        raise CircuitSyntaxError(line_no, f"expected gate name, got {token!r}")
    try:
        return int(token[1:])
    except ValueError:
        raise CircuitSyntaxError(line_no, f"bad gate name {token!r}") from None


def emit_circuit(circ: Circuit) -> str:
    field = circ.field
    lines = []
    if field.kind == "rationals":
        lines.append("field rationals")
    else:
        lines.append(f"field prime {field.p}")
    lines.append(f"nvars {circ.num_vars}")
    for i, gate in enumerate(circ.gates):
        op = gate[0]
        if op == IN:
            lines.append(f"g{i} = input x{gate[1] + 1}")
        elif op == CONST:
            lines.append(f"g{i} = const {field.format(gate[1])}")
        else:
            kids = " ".join(f"g{c}" for c in gate[1])
            lines.append(f"g{i} = {op} {kids}")
    for o in circ.outputs:
        lines.append(f"output g{o}")
    return "\n".join(lines) + "\n"
