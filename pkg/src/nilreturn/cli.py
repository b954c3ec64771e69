"""Batch front end: job document in, JSON report out.

    nilreturn --input job.json --output report.json --verify

Exit status is 0 on success, 2 when the input is rejected and 3 when a
numeric stage fails.
"""

from __future__ import annotations

import argparse
import csv
import datetime
import json
import math
import sys
from dataclasses import dataclass, field, fields

import numpy as np

from .errors import NilReturnError, NumericError, ValidationError
from .oracle import DEFAULT_EPSILONS, DEFAULT_TOL, verify
from .retmap import CLASSIFY_TOL, classify, return_map
from .sysnorm import SystemSpec, normalize

SCHEMA_VERSION = "1"
EXIT_OK, EXIT_VALIDATION, EXIT_NUMERIC = 0, 2, 3

TOLERANCE_KEYS = {
    "oracle": DEFAULT_TOL,
    "classify": CLASSIFY_TOL,
    "closed_form": 1e-8,
    "fixed_point": 1e-8,
    "slope_margin": 0.2,
    "abs_bound": 1e-9,
}


class JobError(ValidationError):
    code = "invalid_job"


@dataclass
class JobDocument:
    f: list
    g: list
    k: int
    l: int
    order: int = 12
    epsilons: list = field(default_factory=lambda: list(DEFAULT_EPSILONS))
    verify: bool = False
    tolerances: dict = field(default_factory=dict)
    output_path: str | None = None

    def spec(self) -> SystemSpec:
        return SystemSpec(tuple(self.f), tuple(self.g), self.k, self.l)

    def tol(self, key: str) -> float:
        return self.tolerances.get(key, TOLERANCE_KEYS[key])


def _is_number(x) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool) and math.isfinite(x)


def _is_int(x) -> bool:
    return isinstance(x, int) and not isinstance(x, bool)


def parse_job(obj) -> JobDocument:
    """Strictly validate a decoded job object."""
    if not isinstance(obj, dict):
        raise JobError("job document must be an object")
    known = {f.name for f in fields(JobDocument)}
    unknown = sorted(set(obj) - known)
    if unknown:
        raise JobError(f"unknown field(s): {', '.join(unknown)}")
    missing = [name for name in ("f", "g", "k", "l") if name not in obj]
    if missing:
        raise JobError(f"missing required field(s): {', '.join(missing)}")
    for name in ("f", "g"):
        v = obj[name]
        if not isinstance(v, list) or not v or not all(_is_number(c) for c in v):
            raise JobError(f"'{name}' must be a non-empty list of finite numbers")
    for name in ("k", "l", "order"):
        if name in obj and not _is_int(obj[name]):
            raise JobError(f"'{name}' must be an integer")
    if "epsilons" in obj:
        e = obj["epsilons"]
        if not isinstance(e, list) or not e or not all(_is_number(x) and x > 0 for x in e):
            raise JobError("'epsilons' must be a non-empty list of positive numbers")
    if "verify" in obj and not isinstance(obj["verify"], bool):
        raise JobError("'verify' must be a boolean")
    if "tolerances" in obj:
        t = obj["tolerances"]
        if not isinstance(t, dict):
            raise JobError("'tolerances' must be an object")
        bad = sorted(set(t) - set(TOLERANCE_KEYS))
        if bad:
            raise JobError(f"unknown tolerance(s): {', '.join(bad)}")
        if not all(_is_number(v) and v > 0 for v in t.values()):
            raise JobError("tolerances must be positive numbers")
    if "output_path" in obj and obj["output_path"] is not None and not isinstance(obj["output_path"], str):
        raise JobError("'output_path' must be a string")
    doc = JobDocument(**obj)
    if doc.order < 1:
        raise JobError("'order' must be positive")
    return doc


def _error_entry(stage: str, exc: NilReturnError) -> dict:
    return {"stage": stage, "code": exc.code, "message": str(exc)}


def _plain(obj):
    """Convert numpy scalars and tuples so the report is pure JSON."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    return obj


def _exit_code(errors) -> int:
    if any(e.get("kind") == "validation" for e in errors):
        return EXIT_VALIDATION
    if any(e.get("kind") == "numeric" for e in errors):
        return EXIT_NUMERIC
    return EXIT_OK


def run_job(doc: JobDocument, timestamp: bool = True):
    """Run the job; returns ``(report, exit_code)``."""
    report = {
        "schema_version": SCHEMA_VERSION,
        "job": {"f": doc.f, "g": doc.g, "k": doc.k, "l": doc.l, "order": doc.order, "verify": doc.verify},
    }
    errors = []

    def fail(stage, exc):
        entry = _error_entry(stage, exc)
        entry["kind"] = "validation" if isinstance(exc, ValidationError) else "numeric"
        errors.append(entry)

    spec = doc.spec()
    try:
        ns = normalize(spec, working_order=doc.order)
        report["normalized"] = {
            "p": ns.p,
            "F": list(ns.F.coeffs),
            "B0": ns.B0,
            "B1": ns.B1,
            "theta_p": ns.theta_p,
            "radius_r": ns.radius_r,
        }
        res = return_map(spec, doc.order)
        report["Z"] = {"order": res.Z.order, "coefficients": list(res.Z.coeffs)}
        report["classification"] = classify(res, doc.tol("classify")).as_dict()
        z1, z2 = res.leading_closed_form
        report["closed_form"] = {"Z_p1": z1, "Z_p2": z2}
        report["diagnostics"] = dict(res.diagnostics)
    except NilReturnError as exc:
        fail("retmap", exc)
        res = None

    if doc.verify and res is not None:
        vr = verify(
            spec,
            doc.order,
            doc.epsilons,
            tol=doc.tol("oracle"),
            slope_margin=doc.tol("slope_margin"),
            abs_bound=doc.tol("abs_bound"),
            closed_form_tol=doc.tol("closed_form"),
            fixed_point_tol=doc.tol("fixed_point"),
            result=res,
        )
        report["verification"] = vr.as_dict()
        for e in vr.errors:
            errors.append(dict(e, kind="validation" if e["code"] == "out_of_radius" else "numeric"))

    code = _exit_code(errors)
    report["errors"] = [{k: e[k] for k in ("stage", "code", "message")} for e in errors]
    if timestamp:
        report["timestamp"] = datetime.datetime.now(datetime.timezone.utc).isoformat()
    return _plain(report), code


def dumps(report: dict) -> str:
    # json writes floats with repr, the shortest string that round-trips
    return json.dumps(report, indent=2, allow_nan=False) + "\n"


def write_table(report: dict, stream) -> None:
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(["eps", "z_series", "z_numeric", "residual"])
    for item in report.get("verification", {}).get("items", []):
        if "residual" in item:
            w.writerow([repr(item["eps"]), repr(item["z_series"]), repr(item["z_numeric"]), repr(item["residual"])])


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="nilreturn", description="First-return map of a nilpotent monodromic singularity.")
    ap.add_argument("--input", metavar="PATH", help="job document (JSON); '-' reads stdin")
    ap.add_argument("--output", metavar="PATH", help="report destination (default: job output_path or stdout)")
    ap.add_argument("--order", type=int, help="highest Z coefficient to compute")
    ap.add_argument("--verify", action="store_true", default=None, help="cross-check against direct integration")
    ap.add_argument("--epsilons", metavar="CSV", help="comma-separated eps values for verification")
    ap.add_argument("--tol", type=float, help="integrator tolerance")
    ap.add_argument("--no-timestamp", action="store_true", help="omit the timestamp for reproducible output")
    ap.add_argument("--table", metavar="PATH", help="write eps, z_series, z_numeric, residual rows (implies --verify)")
    return ap


def _load(args) -> JobDocument:
    if args.input is None:
        raise JobError("--input is required")
    try:
        if args.input == "-":
            obj = json.load(sys.stdin)
        else:
            with open(args.input, encoding="utf-8") as fh:
                obj = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise JobError(f"cannot read job document: {exc}") from None
    doc = parse_job(obj)
    if args.order is not None:
        doc.order = args.order
    if args.verify or args.table:
        doc.verify = True
    if args.epsilons:
        try:
            doc.epsilons = [float(x) for x in args.epsilons.split(",")]
        except ValueError:
            raise JobError(f"bad --epsilons value {args.epsilons!r}") from None
    if args.tol is not None:
        doc.tolerances = dict(doc.tolerances, oracle=args.tol)
    if args.output is not None:
        doc.output_path = args.output
    return doc


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        doc = _load(args)
    except ValidationError as exc:
        report = {"schema_version": SCHEMA_VERSION, "errors": [_error_entry("input", exc)]}
        sys.stdout.write(dumps(report))
        return EXIT_VALIDATION
    report, code = run_job(doc, timestamp=not args.no_timestamp)
    text = dumps(report)
    if doc.output_path:
        with open(doc.output_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if args.table:
        with open(args.table, "w", encoding="utf-8", newline="") as fh:
            write_table(report, fh)
    return code


if __name__ == "__main__":
    sys.exit(main())
