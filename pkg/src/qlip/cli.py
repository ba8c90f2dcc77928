"""Command-line front end.

    qlip analyze  FILE [--output json|text]
    qlip project  FILE --point "z1,z2,..." [--output json|text]
    qlip solve    FILE [--output json|text]
    qlip families FILE [--output json|text]
    qlip verify   FILE [--seed N] [--radii r1,r2,...] [--samples K] [--output json|text]

Exit codes: 0 success (a "not Aubin" verdict included), 1 unreadable or
invalid input, 2 analysis preconditions not met (SCQ_FAILS, NOMINAL_*,
NOT_AUBIN) or a numerical failure, 3 a verify check failed.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import families as fam
from . import model, qp, verify
from .errors import AnalysisError, QlipError, ValidationError
from .modulus import ModulusReport, lip_modulus, lip_projection

EXIT_OK, EXIT_INPUT, EXIT_ANALYSIS, EXIT_CHECK = 0, 1, 2, 3
SOUNDNESS_SLACK = 1e-6
SHARPNESS_FRACTION = 0.99


# ---------------------------------------------------------------------------
# serialization


def _plain(obj):
    """Convert numpy values, tuples and non-finite floats to JSON-ready objects."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _Real(float(obj))
    return obj


class _Real(float):
    pass


def _real_text(x: float) -> str:
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    s = format(x + 0.0, ".17g")
    # keep a decimal point so the value reads back as a float
    return s if any(ch in s for ch in ".en") else s + ".0"


def dumps_json(obj) -> str:
    """JSON with reals at 17 significant digits and +inf as the string "inf"."""
    return _encode(_plain(obj), 0)


def _encode(obj, depth: int) -> str:
    pad = "  " * (depth + 1)
    end = "  " * depth
    if isinstance(obj, _Real):
        return _real_text(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(k)}: {_encode(v, depth + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, list):
        if all(not isinstance(v, (dict, list)) for v in obj):
            return "[" + ", ".join(_encode(v, depth + 1) for v in obj) + "]"
        return "[\n" + ",\n".join(pad + _encode(v, depth + 1) for v in obj) + "\n" + end + "]"
    return json.dumps(obj)


def _labels(D) -> list[int]:
    return [i + 1 for i in D]


def _family(sets) -> list[list[int]]:
    return [_labels(D) for D in sets]


def report_dict(report: ModulusReport, status: str = "OK") -> dict:
    direction = report.attaining_direction
    return {
        "status": status,
        "aubin": report.aubin,
        "modulus": report.modulus,
        "x_bar": report.x_bar,
        "unique": report.unique,
        "families": {
            "active": _labels(report.active),
            "minimal": _family(report.minimal),
            "extended": _family(report.extended),
        },
        "per_D": [
            {
                "D": _labels(D),
                "nonsingular": p.nonsingular,
                "lip_SD": p.lip_SD,
                "in_minimal": D in report.minimal,
            }
            for D, p in report.per_D.items()
        ],
        "attaining_D": None if report.attaining_D is None else _labels(report.attaining_D),
        "attaining_direction": None if direction is None else {
            "alpha_star": direction.alpha_star,
            "beta_star": direction.beta_star,
        },
        "nurnberger": report.nurnberger,
        "warnings": list(report.warnings),
    }


def _failure_dict(code: str, message: str) -> dict:
    return {
        "status": code,
        "aubin": None,
        "modulus": None,
        "families": None,
        "per_D": [],
        "attaining_D": None,
        "warnings": [message],
    }


def _fmt(x) -> str:
    if x is None:
        return "-"
    if isinstance(x, (float, np.floating)):
        return "inf" if math.isinf(x) else format(float(x), ".6g")
    if isinstance(x, np.ndarray):
        return "(" + ", ".join(_fmt(v) for v in x) + ")"
    return str(x)


def _set_text(D) -> str:
    return "{" + ",".join(str(i) for i in _labels(D)) + "}"


def _family_text(sets) -> str:
    return "[" + ", ".join(_set_text(D) for D in sets) + "]"


def report_text(report: ModulusReport) -> str:
    lines = [
        f"x_bar      {_fmt(report.x_bar)}  (unique: {report.unique})",
        f"active     {_set_text(report.active)}",
        f"minimal    {_family_text(report.minimal)}",
        f"extended   {_family_text(report.extended)}",
        "per D:",
    ]
    for D, p in report.per_D.items():
        state = "nonsingular" if p.nonsingular else "singular"
        lines.append(f"  {_set_text(D):<12} {state:<12} lip_SD = {_fmt(p.lip_SD)}")
    lines.append(f"aubin      {report.aubin}")
    lines.append(f"modulus    {_fmt(report.modulus)}")
    if report.attaining_D is not None:
        lines.append(f"attained   {_set_text(report.attaining_D)}")
    if report.cross_check is not None:
        lines.append(f"generic    {_fmt(report.cross_check)}")
    lines.extend(f"warning: {w}" for w in report.warnings)
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# commands


def _emit(args, payload: dict, text: str) -> None:
    print(dumps_json(payload) if args.output == "json" else text)


def cmd_analyze(args) -> int:
    inst = model.load(args.file)
    report = lip_modulus(inst)
    _emit(args, report_dict(report), report_text(report))
    return EXIT_OK


def _parse_floats(text: str, what: str) -> list[float]:
    try:
        return [float(t) for t in text.replace(" ", "").split(",") if t]
    except ValueError:
        raise ValidationError(f"cannot parse {what} {text!r}", code="DIMENSION_MISMATCH") from None


def load_polyhedron(path) -> tuple[np.ndarray, np.ndarray]:
    """A, b from a polyhedron file (keys n, m, A, b) or from a full instance file."""
    data = json.loads(Path(path).read_text())
    if not isinstance(data, dict):
        raise ValidationError("polyhedron must be a JSON object", code="DIMENSION_MISMATCH")
    if set(data) - {"n", "m", "A", "b"}:
        inst = model.from_dict(data)
        return np.array(inst.A), np.array(inst.b_bar)
    missing = {"n", "m", "A", "b"} - set(data)
    if missing:
        raise ValidationError(f"missing keys: {sorted(missing)}", code="MISSING_KEY")
    n, m = data["n"], data["m"]
    inst = model.validate(np.zeros((n, n)), data["A"], data["b"], np.zeros(n), n=n, m=m)
    return np.array(inst.A), np.array(inst.b_bar)


def cmd_project(args) -> int:
    A, b = load_polyhedron(args.file)
    z = np.array(_parse_floats(args.point, "--point"))
    if z.size != A.shape[1]:
        raise ValidationError(f"--point has {z.size} entries, expected {A.shape[1]}", code="DIMENSION_MISMATCH")
    report = lip_projection(A, b, z)
    payload = report_dict(report)
    payload["point"] = z
    payload["projection"] = report.x_bar
    payload["generic_modulus"] = report.cross_check
    text = f"projection {_fmt(report.x_bar)}\n" + report_text(report)
    _emit(args, payload, text)
    return EXIT_OK


def cmd_solve(args) -> int:
    inst = model.load(args.file)
    sol = qp.solve(inst)
    payload = {"status": sol.status.value, "x": sol.x, "value": sol.value, "unique": sol.unique,
               "certificate": None}
    if sol.certificate is not None:
        payload["certificate"] = {"D": _labels(sol.certificate.D), "lam": sol.certificate.lam}
    text = f"status {sol.status.value}"
    if sol.x is not None:
        text += f"\nx      {_fmt(sol.x)}\nvalue  {_fmt(sol.value)}\nunique {sol.unique}"
    _emit(args, payload, text)
    return EXIT_OK


def cmd_families(args) -> int:
    inst = model.load(args.file)
    sol = qp.solve(inst)
    if sol.status is not qp.QpStatus.OPTIMAL:
        code = "NOMINAL_INFEASIBLE" if sol.status is qp.QpStatus.INFEASIBLE else "NOMINAL_UNBOUNDED"
        raise AnalysisError(f"nominal problem is {sol.status.value}", code=code)
    f = fam.kkt_families(inst, None, sol.x)
    payload = {"status": "OK", "x": sol.x, "active": _labels(f.active),
               "minimal": _family(f.minimal), "extended": _family(f.extended)}
    text = (f"x          {_fmt(sol.x)}\nactive     {_set_text(f.active)}\n"
            f"minimal    {_family_text(f.minimal)}\nextended   {_family_text(f.extended)}")
    _emit(args, payload, text)
    return EXIT_OK


def cmd_verify(args) -> int:
    inst = model.load(args.file)
    report = lip_modulus(inst)
    radii = tuple(_parse_floats(args.radii, "--radii")) if args.radii else verify.DEFAULT_RADII
    trace = verify.estimate_modulus(inst, radii, args.samples, args.seed, report=report)
    probe = verify.directional_probe(inst, radii=radii, report=report)
    smallest = min(radii)
    probe_ratio = probe.best_at(smallest)
    sound = trace.best_ratio <= report.modulus + SOUNDNESS_SLACK
    sharp = probe_ratio >= SHARPNESS_FRACTION * report.modulus
    payload = {
        "status": "OK" if sound and sharp else "FAIL",
        "modulus": report.modulus,
        "radii": list(radii),
        "samples_per_radius": args.samples,
        "seed": args.seed,
        "best_ratio": trace.best_ratio,
        "best_ratio_per_radius": [trace.best_at(r) for r in radii],
        "probe_ratio_per_radius": [probe.best_at(r) for r in radii],
        "soundness": "PASS" if sound else "FAIL",
        "sharpness": "PASS" if sharp else "FAIL",
    }
    text = "\n".join([
        f"modulus     {_fmt(report.modulus)}",
        *(f"radius {_fmt(r):<8} best ratio {_fmt(trace.best_at(r))}  probe {_fmt(probe.best_at(r))}" for r in radii),
        f"{'PASS' if sound else 'FAIL'} soundness: best ratio {_fmt(trace.best_ratio)} <= modulus + {SOUNDNESS_SLACK:g}",
        f"{'PASS' if sharp else 'FAIL'} sharpness: probe ratio {_fmt(probe_ratio)} >= {SHARPNESS_FRACTION:g} * modulus",
    ])
    _emit(args, payload, text)
    return EXIT_OK if sound and sharp else EXIT_CHECK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qlip", description="Aubin property and Lipschitz modulus of QP argmin mappings.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("file", help="instance file (JSON)")
        p.add_argument("--output", choices=("json", "text"), default="text")
        p.set_defaults(func=func)
        return p

    add("analyze", cmd_analyze, "Aubin verdict and Lipschitz modulus at the nominal parameter")
    p = add("project", cmd_project, "Lipschitz modulus of the projection onto {x : Ax <= b}")
    p.add_argument("--point", required=True, help='point to project, e.g. "0,0"')
    add("solve", cmd_solve, "solve the nominal QP")
    add("families", cmd_families, "active set and KKT index families at the nominal solution")
    p = add("verify", cmd_verify, "perturbation oracle: soundness and sharpness checks")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--radii", default=None, help="comma-separated sampling radii")
    p.add_argument("--samples", type=int, default=verify.DEFAULT_SAMPLES, help="samples per radius")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (OSError, json.JSONDecodeError, ValidationError, ValueError) as exc:
        code = getattr(exc, "code", "INPUT_ERROR")
        print(f"error [{code}]: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except QlipError as exc:
        print(f"error [{exc.code}]: {exc}", file=sys.stderr)
        if args.output == "json" and args.command in ("analyze", "project"):
            print(dumps_json(_failure_dict(exc.code, str(exc))))
        return EXIT_ANALYSIS


if __name__ == "__main__":
    sys.exit(main())
