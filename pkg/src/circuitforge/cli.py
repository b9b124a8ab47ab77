"""forge: the command-line surface.

Every command is deterministic given (inputs, seed): randomness flows from
one session seed through named substreams, certificates carry content
hashes of inputs and outputs and never carry timestamps, and `forge verify`
re-executes the recorded command in a scratch directory and compares the
artifact hashes bit for bit (after checking that the files on disk still
match the certificate).

Exit codes: 0 success, 1 verification failure, 2 usage error, 3 budget
exceeded.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys

from . import errors as E
from .circuit import Circuit, emit_circuit, parse_circuit
from .dense import ExpansionBudget, emit_poly, expand
from .designs import Design, nw_design
from .expsum import ExpSumPoly, exp_sum_eval, exp_sum_expand, factor_vnp
from .factoring import extract_factor
from .lifting import lift_root
from .pit import ExplicitPoly, HittingSet, pit_hitset, pit_sz
from .transforms import (
    extract_y_coeffs,
    generator_set,
    hasse_derivative_circuit,
    homogenize,
    make_monic,
)

USAGE_ERRORS = (
    E.CircuitSyntaxError,
    E.DanglingReference,
    E.CyclicReference,
    E.ArityMismatch,
    E.MixedFieldConfig,
    E.ParameterViolation,
    E.BoundExceedsField,
    E.FieldTooSmall,
    ValueError,
)
VERIFY_ERRORS = (
    E.ResidualNonzero,
    E.NoRationalRoot,
    E.NoFactorFound,
    E.NoSimpleRoots,
    E.NotASimpleRoot,
    E.AllDerivativesVanish,
    E.SearchExhausted,
    E.ZeroPolynomial,
    E.ZeroDivisor,
    E.ZeroDelta,
    E.PreconditionFailed,
    E.MissingArtifact,
    E.HashMismatch,
)


def _sha256(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def _read(path: str) -> bytes:
    if not os.path.exists(path):
        raise E.MissingArtifact(f"missing file {path}")
    with open(path, "rb") as fh:
        return fh.read()


def _metrics_json(circ: Circuit) -> dict:
    return circ.metrics()


def _seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("FORGE_SEED")
    return int(env) if env else 0


def _budget(args) -> ExpansionBudget:
    return ExpansionBudget(max_terms=args.budget_terms, max_degree=args.budget_degree)


def _parse_point(field, text):
    return [field.parse(p.strip()) for p in text.split(",")]


def _parse_esum(text: str) -> ExpSumPoly:
    aux_vars = []
    lines = []
    for raw in text.splitlines():
        parts = raw.split()
        if parts and parts[0] == "aux":
            aux_vars = [int(p[1:]) - 1 for p in parts[1:]]
        else:
            lines.append(raw)
    circ = parse_circuit("\n".join(lines))
    return ExpSumPoly(circ, tuple(aux_vars))


def _emit_esum(e: ExpSumPoly) -> str:
    header = ""
    if e.aux:
        header = "aux " + " ".join(f"y{a + 1}" for a in e.aux) + "\n"
    return header + emit_circuit(e.verifier)


# -- command cores -----------------------------------------------------------------
# Each core maps (params, input bytes by role) to (output bytes by role,
# data for the certificate). Commands and `verify` replay share the cores.

def _core_homog(params, inputs):
    circ = parse_circuit(inputs["in"].decode())
    out = homogenize(circ, params["k"])
    return {"out": emit_circuit(out).encode()}, {"metrics": _metrics_json(out)}


def _core_coeffs(params, inputs):
    circ = parse_circuit(inputs["in"].decode())
    coeffs = extract_y_coeffs(circ, params["y"], params["dmax"])
    outs = {f"coeff{j}": emit_circuit(c).encode() for j, c in enumerate(coeffs)}
    return outs, {"metrics": [_metrics_json(c) for c in coeffs]}


def _core_deriv(params, inputs):
    circ = parse_circuit(inputs["in"].decode())
    out = hasse_derivative_circuit(circ, params["y"], params["j"])
    return {"out": emit_circuit(out).encode()}, {"metrics": _metrics_json(out)}


def _core_monic(params, inputs):
    circ = parse_circuit(inputs["in"].decode())
    form = make_monic(circ, params["r"], params["seed"], y_var=params.get("y"))
    fld = circ.field
    data = {
        "shift": [fld.format(a) for a in form.shift],
        "leading_unit": fld.format(form.leading_unit),
        "y_var": form.y_var + 1,
        "metrics": _metrics_json(form.circuit),
    }
    return {"out": emit_circuit(form.circuit).encode()}, data


def _core_genset(params, inputs):
    circ = parse_circuit(inputs["in"].decode())
    fld = circ.field
    gens = generator_set(circ, params["y"], fld.parse(params["alpha"]), params["d"])
    outs = {f"g{j}": emit_circuit(c).encode() for j, c in gens.members}
    data = {
        "orders": [j for j, _ in gens.members],
        "count": len(gens.members),
        "metrics": [_metrics_json(c) for _, c in gens.members],
    }
    return outs, data


def _core_lift_root(params, inputs):
    circ = parse_circuit(inputs["in"].decode())
    fld = circ.field
    alpha = fld.parse(params["alpha"]) if params.get("alpha") is not None else None
    budget = ExpansionBudget(params["budget_terms"], params["budget_degree"])
    cert = lift_root(circ, params["y"], params["d"], params["seed"], alpha=alpha, budget=budget)
    data = {
        "alpha": fld.format(cert.alpha),
        "delta": fld.format(cert.delta),
        "multiplicity": cert.multiplicity,
        "shift": [fld.format(v) for v in cert.shift],
        "residual_mode": cert.residual_mode,
        "stages": cert.metrics_chain,
    }
    return {"out": emit_circuit(cert.root).encode()}, data


def _core_factor(params, inputs):
    circ = parse_circuit(inputs["in"].decode())
    budget = ExpansionBudget(params["budget_terms"], params["budget_degree"])
    subset = params.get("subset")
    res = extract_factor(
        circ, params["y"], params["d"],
        subset=tuple(subset) if subset else None,
        seed=params["seed"], budget=budget,
    )
    data = {
        "subset": [i + 1 for i in res.subset],
        "multiplicity": res.multiplicity,
        "deriv_level": res.deriv_level,
        "stages": res.metrics_chain,
    }
    return {"out": emit_circuit(res.factor).encode()}, data


def _core_design(params, inputs):
    design = nw_design(params["n"], params["m"])
    return {"out": (design.to_json() + "\n").encode()}, {
        "q": design.q, "dprime": design.dprime, "ell": design.ell,
    }


def _core_hitset(params, inputs):
    table = ExplicitPoly.parse_table(inputs["hard"].decode())
    design = Design.from_json(inputs["design"].decode())
    hs = HittingSet(table, design, params["D"], params["d"])
    fld = table.field
    lines = []
    for point in hs.points(limit=params["limit"]):
        lines.append(",".join(fld.format(v) for v in point))
    body = "\n".join(lines) + "\n"
    data = {"t_size": hs.t_size, "emitted": len(lines), "provenance": hs.provenance()}
    return {"out": body.encode()}, data


def _core_pit(params, inputs):
    circ = parse_circuit(inputs["in"].decode())
    mode = params["mode"]
    if mode == "hitset":
        table = ExplicitPoly.parse_table(inputs["hard"].decode())
        design = Design.from_json(inputs["design"].decode())
        hs = HittingSet(table, design, params["D"], params["d"])
        res = pit_hitset(circ, hs, limit=params["limit"])
    else:
        res = pit_sz(
            circ, params["d"], trials=params["trials"], seed=params["seed"],
            exhaustive=(mode == "exhaustive"),
        )
    fld = circ.field
    data = {
        "status": res.status,
        "witness": [fld.format(v) for v in res.witness] if res.witness else None,
        "points_checked": res.points_checked,
        "exhausted": res.exhausted,
        "mode": res.mode,
    }
    return {"out": (json.dumps(data, sort_keys=True) + "\n").encode()}, data


def _core_vnp_sum(params, inputs):
    esum = _parse_esum(inputs["in"].decode())
    budget = ExpansionBudget(params["budget_terms"], params["budget_degree"])
    fld = esum.field
    if params.get("eval_point") is not None:
        value = exp_sum_eval(esum, _parse_point(fld, params["eval_point"]))
        body = fld.format(value) + "\n"
    else:
        body = emit_poly(exp_sum_expand(esum, budget))
    return {"out": body.encode()}, {"aux_count": esum.m}


def _core_vnp_factor(params, inputs):
    esum = _parse_esum(inputs["in"].decode())
    budget = ExpansionBudget(params["budget_terms"], params["budget_degree"])
    subset = params.get("subset")
    out, fr = factor_vnp(
        esum, params["d"],
        subset=tuple(subset) if subset else None,
        seed=params["seed"], budget=budget,
    )
    data = {
        "aux_count": out.m,
        "subset": [i + 1 for i in fr.subset],
        "multiplicity": fr.multiplicity,
    }
    return {"out": _emit_esum(out).encode()}, data


CORES = {
    "homog": _core_homog,
    "coeffs": _core_coeffs,
    "deriv": _core_deriv,
    "monic": _core_monic,
    "genset": _core_genset,
    "lift-root": _core_lift_root,
    "factor": _core_factor,
    "design": _core_design,
    "hitset": _core_hitset,
    "pit": _core_pit,
    "vnp-sum": _core_vnp_sum,
    "vnp-factor": _core_vnp_factor,
}


def _run_with_cert(command, params, input_paths, output_paths, cert_path):
    inputs = {role: _read(path) for role, path in input_paths.items()}
    outs, data = CORES[command](params, inputs)
    for role, body in outs.items():
        path = output_paths.get(role)
        if path:
            with open(path, "wb") as fh:
                fh.write(body)
    cert = {
        "command": command,
        "params": params,
        "inputs": {
            role: {"path": path, "sha256": _sha256(inputs[role])}
            for role, path in input_paths.items()
        },
        "outputs": {
            role: {"path": output_paths.get(role), "sha256": _sha256(body)}
            for role, body in sorted(outs.items())
        },
        "data": data,
    }
    if cert_path:
        with open(cert_path, "w") as fh:
            json.dump(cert, fh, indent=2, sort_keys=True)
            fh.write("\n")
    return cert, outs


def verify_certificate(cert_path: str) -> dict:
    """Re-check hashes and replay the recorded command deterministically."""
    cert = json.loads(_read(cert_path).decode())
    command = cert["command"]
    if command not in CORES:
        raise E.MissingArtifact(f"unknown command {command!r} in certificate")
    inputs = {}
    for role, rec in cert["inputs"].items():
        body = _read(rec["path"])
        if _sha256(body) != rec["sha256"]:
            raise E.HashMismatch(f"input {rec['path']} does not match its recorded hash")
        inputs[role] = body
    for role, rec in cert["outputs"].items():
        if rec["path"]:
            body = _read(rec["path"])
            if _sha256(body) != rec["sha256"]:
                raise E.HashMismatch(f"output {rec['path']} does not match its recorded hash")
    outs, _data = CORES[command](cert["params"], inputs)
    for role, body in outs.items():
        want = cert["outputs"][role]["sha256"]
        if _sha256(body) != want:
            return {"result": "fail", "reason": f"replay of {role} diverged"}
    return {"result": "pass", "command": command, "outputs": sorted(outs)}


# -- argument parsing -----------------------------------------------------------------

def _globals_parser(suppress: bool):
    # the same options are accepted before and after the subcommand; the
    # subcommand copies use SUPPRESS so they never clobber earlier values
    default = argparse.SUPPRESS if suppress else None
    g = argparse.ArgumentParser(add_help=False)
    g.add_argument("--seed", type=int, default=default, help="session seed (or FORGE_SEED)")
    g.add_argument("--budget-terms", type=int, default=default)
    g.add_argument("--budget-degree", type=int, default=default)
    g.add_argument(
        "--field",
        default=default,
        help="session field guard: 'rationals' or 'prime:<p>'; input files must "
        "match, and a prime modulus must exceed 2*(budget degree)^2",
    )
    g.add_argument("--json", action="store_true", default=default)
    return g


def _build_parser():
    shared = _globals_parser(suppress=True)
    p = argparse.ArgumentParser(
        prog="forge", description=__doc__, parents=[_globals_parser(suppress=False)]
    )
    sub_registry = p.add_subparsers(dest="command", required=True)

    class _Sub:
        def add_parser(self, name, **kw):
            return sub_registry.add_parser(name, parents=[shared], **kw)

    sub = _Sub()

    def common_io(sp, cert=True):
        sp.add_argument("input")
        sp.add_argument("-o", "--output", default=None)
        if cert:
            sp.add_argument("--cert", default=None)

    sp = sub.add_parser("eval", help="evaluate a circuit at a point")
    sp.add_argument("input")
    sp.add_argument("--point", required=True)

    sp = sub.add_parser("expand", help="dense-expand a circuit")
    common_io(sp, cert=False)

    sp = sub.add_parser("metrics", help="size/depth/formal-degree JSON")
    sp.add_argument("input")

    sp = sub.add_parser("homog", help="homogeneous component H_k")
    sp.add_argument("-k", type=int, required=True)
    common_io(sp)

    sp = sub.add_parser("coeffs", help="y-coefficient circuits by interpolation")
    sp.add_argument("-y", type=int, required=True, help="1-based y variable index")
    sp.add_argument("-d", "--dmax", type=int, required=True)
    common_io(sp)

    sp = sub.add_parser("deriv", help="Hasse derivative circuit")
    sp.add_argument("-y", type=int, required=True)
    sp.add_argument("-j", type=int, required=True)
    common_io(sp)

    sp = sub.add_parser("monic", help="monic normal form in y")
    sp.add_argument("-r", type=int, required=True, help="exact total degree")
    sp.add_argument("-y", type=int, default=None, help="1-based y (appended when absent)")
    common_io(sp)

    sp = sub.add_parser("genset", help="generator set G_y(P, alpha, d)")
    sp.add_argument("--alpha", required=True)
    sp.add_argument("-d", type=int, required=True)
    sp.add_argument("-y", type=int, required=True)
    common_io(sp)

    sp = sub.add_parser("lift-root", help="Hensel-lift a root circuit")
    sp.add_argument("-y", type=int, required=True)
    sp.add_argument("-d", type=int, required=True)
    sp.add_argument("--alpha", default=None)
    common_io(sp)

    sp = sub.add_parser("factor", help="extract a factor circuit")
    sp.add_argument("-y", type=int, required=True)
    sp.add_argument("-d", type=int, required=True)
    sp.add_argument("--subset", default=None, help="1-based root indices, comma separated")
    common_io(sp)

    sp = sub.add_parser("design", help="Nisan-Wigderson design")
    sp.add_argument("-n", type=int, required=True)
    sp.add_argument("-m", type=int, required=True)
    sp.add_argument("-o", "--output", required=True)
    sp.add_argument("--cert", default=None)

    sp = sub.add_parser("hitset", help="stream hitting-set points")
    sp.add_argument("--hard", required=True)
    sp.add_argument("--design", required=True)
    sp.add_argument("-D", type=int, required=True, help="circuit degree bound")
    sp.add_argument("-d", type=int, required=True, help="hard polynomial degree")
    sp.add_argument("--limit", type=int, default=1024)
    sp.add_argument("-o", "--output", default=None)
    sp.add_argument("--cert", default=None)

    sp = sub.add_parser("pit", help="polynomial identity test")
    sp.add_argument("--mode", choices=["hitset", "sz", "exhaustive"], required=True)
    sp.add_argument("input")
    sp.add_argument("--hard", default=None)
    sp.add_argument("--design", default=None)
    sp.add_argument("-D", type=int, default=None)
    sp.add_argument("-d", type=int, default=None)
    sp.add_argument("--limit", type=int, default=1024)
    sp.add_argument("--trials", type=int, default=64)
    sp.add_argument("-o", "--output", default=None)
    sp.add_argument("--cert", default=None)

    sp = sub.add_parser("vnp-sum", help="expand or evaluate an exponential sum")
    sp.add_argument("input")
    sp.add_argument("--expand", action="store_true")
    sp.add_argument("--eval", dest="eval_point", default=None)
    sp.add_argument("-o", "--output", default=None)
    sp.add_argument("--cert", default=None)

    sp = sub.add_parser("vnp-factor", help="factor an exponential sum")
    sp.add_argument("-d", type=int, required=True)
    sp.add_argument("--subset", default=None)
    common_io(sp)

    sp = sub.add_parser("verify", help="re-check a certificate")
    sp.add_argument("cert")
    return p


def _session_field(args):
    if args.field is None:
        return None
    from .fields import PrimeField, Rationals, assert_degree_capacity

    if args.field == "rationals":
        return Rationals()
    if args.field.startswith("prime:"):
        fld = PrimeField(int(args.field.split(":", 1)[1]))
        assert_degree_capacity(fld, args.budget_degree)
        return fld
    raise ValueError(f"bad --field {args.field!r} (use 'rationals' or 'prime:<p>')")


def _check_session_field(session, circ):
    if session is not None and circ.field != session:
        from .errors import MixedFieldConfig

        raise MixedFieldConfig(
            f"input field {circ.field!r} does not match session field {session!r}"
        )
    return circ


def _dispatch(args) -> int:
    if getattr(args, "json", None) is None:
        args.json = False
    if args.budget_terms is None:
        args.budget_terms = 200_000
    if args.budget_degree is None:
        args.budget_degree = 64
    seed = _seed(args)
    bt, bd = args.budget_terms, args.budget_degree
    session = _session_field(args)

    if args.command == "eval":
        circ = _check_session_field(session, parse_circuit(_read(args.input).decode()))
        values = circ.evaluate(_parse_point(circ.field, args.point))
        if args.json:
            print(json.dumps([circ.field.format(v) for v in values]))
        else:
            print(" ".join(circ.field.format(v) for v in values))
        return 0
    if args.command == "expand":
        circ = _check_session_field(session, parse_circuit(_read(args.input).decode()))
        body = emit_poly(expand(circ, ExpansionBudget(bt, bd)))
        if args.output:
            with open(args.output, "w") as fh:
                fh.write(body)
        else:
            sys.stdout.write(body)
        return 0
    if args.command == "metrics":
        circ = parse_circuit(_read(args.input).decode())
        print(json.dumps(circ.metrics(), sort_keys=True))
        return 0
    if args.command == "verify":
        report = verify_certificate(args.cert)
        print(json.dumps(report, sort_keys=True))
        return 0 if report["result"] == "pass" else 1

    params: dict = {"seed": seed, "budget_terms": bt, "budget_degree": bd}
    input_paths = {"in": args.input} if hasattr(args, "input") else {}
    if session is not None and "in" in input_paths and args.command != "vnp-sum":
        _check_session_field(session, parse_circuit(_read(args.input).decode()))
    output_paths = {}
    if getattr(args, "output", None):
        output_paths["out"] = args.output

    if args.command == "homog":
        params["k"] = args.k
    elif args.command == "coeffs":
        params.update(y=args.y - 1, dmax=args.dmax)
        if args.output:
            output_paths = {
                f"coeff{j}": f"{args.output}.{j}.circ" for j in range(args.dmax + 1)
            }
    elif args.command == "deriv":
        params.update(y=args.y - 1, j=args.j)
    elif args.command == "monic":
        params.update(r=args.r, y=(args.y - 1) if args.y else None)
    elif args.command == "genset":
        params.update(alpha=args.alpha, d=args.d, y=args.y - 1)
        if args.output:
            output_paths = {f"g{j}": f"{args.output}.g{j}.circ" for j in range(args.d + 1)}
    elif args.command == "lift-root":
        params.update(y=args.y - 1, d=args.d, alpha=args.alpha)
    elif args.command == "factor":
        params.update(y=args.y - 1, d=args.d)
        if args.subset:
            params["subset"] = [int(s) - 1 for s in args.subset.split(",")]
    elif args.command == "design":
        params.update(n=args.n, m=args.m)
        input_paths = {}
    elif args.command == "hitset":
        params.update(D=args.D, d=args.d, limit=args.limit)
        input_paths = {"hard": args.hard, "design": args.design}
    elif args.command == "pit":
        params.update(
            mode=args.mode, D=args.D, d=args.d, limit=args.limit, trials=args.trials
        )
        if args.mode == "hitset":
            if not args.hard or not args.design:
                raise ValueError("pit --mode hitset needs --hard and --design")
            input_paths.update(hard=args.hard, design=args.design)
        elif args.d is None:
            raise ValueError("pit --mode sz/exhaustive needs -d (degree bound)")
    elif args.command == "vnp-sum":
        params["eval_point"] = args.eval_point
    elif args.command == "vnp-factor":
        params["d"] = args.d
        if args.subset:
            params["subset"] = [int(s) - 1 for s in args.subset.split(",")]
    else:
        raise ValueError(f"unhandled command {args.command}")

    cert, outs = _run_with_cert(
        args.command, params, input_paths, output_paths, getattr(args, "cert", None)
    )
    if "out" in outs and "out" not in output_paths:
        sys.stdout.write(outs["out"].decode())
    else:
        print(json.dumps(cert["data"], sort_keys=True, default=str))
    if args.command == "pit" and cert["data"].get("status") not in ("nonzero", "zero"):
        return 0
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _dispatch(args)
    except E.BudgetExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except VERIFY_ERRORS as exc:
        print(f"error: {exc.__class__.__name__}: {exc}", file=sys.stderr)
        return 1
    except USAGE_ERRORS as exc:
        print(f"error: {exc.__class__.__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
