"""Manifest loading, probe orchestration and report emission.

Manifest format (YAML)::

    seed: 0                 # optional, default 0
    output: results         # optional output directory, default "results"
    formats: [csv, json]    # optional, default both
    probes:
      - id: knapp-endpoint  # unique label, defaults to the probe name
        probe: knapp        # registered probe name
        surface: paraboloid # optional
        params: {p_prime: 4, q_prime: 4}
        scales: [0.0625, 0.03125]
        trials: 1
        slope_tol: 0.05
        defect_tol: 1.0e-6
        options: {}

Every probe runs with the manifest seed, which ``RESTRICTION_LAB_SEED`` or
``--seed`` override.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

import numpy as np
import yaml

from .probes import PROBES, ProbeConfig, ProbeReport, probe_names, run_probe, with_defaults
from .probes.base import Check
from .spectral import SlopeFit

__all__ = ["RunManifest", "ManifestError", "load_manifest", "parse_manifest", "run", "emit",
           "exit_code", "report_to_dict", "report_from_dict", "load_reports", "main",
           "CSV_COLUMNS"]

CSV_COLUMNS = ("probe_id", "scale", "measured", "target_exponent", "fitted_exponent", "residual",
               "constant", "verdict", "seed", "runtime_ms")
FORMATS = ("csv", "json")
SEED_ENV = "RESTRICTION_LAB_SEED"
_TOP_KEYS = {"seed", "output", "formats", "probes"}
_PROBE_KEYS = {"id", "probe", "surface", "params", "scales", "trials", "slope_tol", "defect_tol",
               "options"}


class ManifestError(ValueError):
    pass


@dataclass
class RunManifest:
    configs: list[ProbeConfig]
    seed: int = 0
    output_dir: Path = Path("results")
    formats: tuple[str, ...] = FORMATS
    source: str = field(default="<memory>", compare=False)


def parse_manifest(text: str, source: str = "<string>", seed_override: int | None = None) -> RunManifest:
    """Validate manifest text and fill defaults."""
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f" at line {mark.line + 1}, column {mark.column + 1}" if mark is not None else ""
        raise ManifestError(f"{source}: parse error{where}: {getattr(exc, 'problem', exc)}") from None
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ManifestError(f"{source}: top level must be a mapping")
    unknown = set(data) - _TOP_KEYS
    if unknown:
        raise ManifestError(f"{source}: unknown top-level keys {sorted(unknown)}")
    seed = data.get("seed", 0)
    env = os.environ.get(SEED_ENV)
    if env is not None and env.strip():
        try:
            seed = int(env)
        except ValueError:
            raise ManifestError(f"{SEED_ENV} must be an integer, got {env!r}") from None
    if seed_override is not None:
        seed = seed_override
    if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
        raise ManifestError(f"{source}: seed must be a non-negative integer")
    formats = data.get("formats", list(FORMATS))
    if isinstance(formats, str):
        formats = [f.strip() for f in formats.split(",")]
    bad = [f for f in formats if f not in FORMATS]
    if bad or not formats:
        raise ManifestError(f"{source}: unsupported formats {bad or formats}")
    entries = data.get("probes") or []
    if not isinstance(entries, list):
        raise ManifestError(f"{source}: 'probes' must be a list")
    configs, seen = [], set()
    for i, entry in enumerate(entries):
        where = f"{source}: probes[{i}]"
        if not isinstance(entry, dict) or "probe" not in entry:
            raise ManifestError(f"{where}: each entry needs a 'probe' name")
        extra = set(entry) - _PROBE_KEYS
        if extra:
            raise ManifestError(f"{where}: unknown keys {sorted(extra)}")
        name = entry["probe"]
        if name not in PROBES:
            raise ManifestError(f"{where}: unknown probe id {name!r}")
        label = str(entry.get("id", name))
        if label in seen:
            raise ManifestError(f"{where}: duplicate probe id {label!r}")
        seen.add(label)
        scales = entry.get("scales", [])
        if not isinstance(scales, list) or not all(
                isinstance(s, (int, float)) and not isinstance(s, bool) for s in scales):
            raise ManifestError(f"{where}: scales must be a list of numbers")
        for key in ("params", "options"):
            if not isinstance(entry.get(key, {}), dict):
                raise ManifestError(f"{where}: {key} must be a mapping")
        try:
            cfg = with_defaults(ProbeConfig(
                name, label=label, surface=str(entry.get("surface", "")),
                params=dict(entry.get("params", {})), scales=tuple(scales),
                trials=entry.get("trials"), seed=seed, slope_tol=entry.get("slope_tol"),
                defect_tol=entry.get("defect_tol"), options=dict(entry.get("options", {}))))
        except (TypeError, ValueError) as exc:
            raise ManifestError(f"{where}: {exc}") from None
        configs.append(cfg)
    out = Path(str(data.get("output", "results")))
    return RunManifest(configs, seed, out, tuple(dict.fromkeys(formats)), source)


def load_manifest(path: str | os.PathLike, seed_override: int | None = None) -> RunManifest:
    p = Path(path)
    if not p.is_file():
        raise ManifestError(f"manifest not found: {p}")
    m = parse_manifest(p.read_text(), str(p), seed_override)
    if not m.output_dir.is_absolute():
        m.output_dir = Path.cwd() / m.output_dir
    return m


def run(manifest: RunManifest, jobs: int = 1) -> list[ProbeReport]:
    """One report per config, in manifest order."""
    configs = manifest.configs
    if not configs:
        return []
    if jobs <= 1 or len(configs) == 1:
        return [run_probe(c) for c in configs]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(run_probe, configs))


def exit_code(reports: Sequence[ProbeReport]) -> int:
    if any(r.error is not None for r in reports):
        return 2
    return 0 if all(r.verdict == "pass" for r in reports) else 1


# ---------------------------------------------------------------------------
# serialisation


def _num(x: Any) -> str:
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.17g}"


def _plain(obj: Any) -> Any:
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
        return float(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": float(obj.real), "im": float(obj.imag)}
    if obj is None or isinstance(obj, str):
        return obj
    return str(obj)


def _dump(obj: Any, indent: int = 0) -> str:
    """JSON text with floats written to 17 significant digits."""
    pad, inner = " " * indent, " " * (indent + 2)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{inner}{json.dumps(k)}: {_dump(v, indent + 2)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, list):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list)) for v in obj):
            return "[" + ", ".join(_dump(v) for v in obj) + "]"
        return "[\n" + ",\n".join(inner + _dump(v, indent + 2) for v in obj) + "\n" + pad + "]"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        if math.isnan(obj):
            return "NaN"
        if math.isinf(obj):
            return "Infinity" if obj > 0 else "-Infinity"
        return f"{obj:.17g}"
    if obj is None:
        return "null"
    return json.dumps(obj)


def report_to_dict(r: ProbeReport, timing: bool = False) -> dict:
    fit = None if r.fit is None else {"exponent": r.fit.exponent, "intercept": r.fit.intercept,
                                      "residual": r.fit.residual, "point_count": r.fit.point_count}
    return _plain({
        "probe_id": r.probe_id, "probe": r.probe, "scales": r.scales, "measured": r.measured,
        "fit": fit, "constant": r.constant, "target_exponent": r.target_exponent,
        "provenance": r.provenance, "verdict": r.verdict,
        "checks": [c.as_dict() for c in r.checks], "seed": r.seed,
        "runtime_ms": r.runtime_ms if timing else None, "rejected": r.rejected,
        "error": r.error, "notes": r.notes, "extras": r.extras, "trials": r.trials,
    })


def report_from_dict(d: dict) -> ProbeReport:
    fit = None if d["fit"] is None else SlopeFit(**d["fit"])
    checks = [Check(c["name"], c["kind"], c["value"], c["target"], c["tol"]) for c in d["checks"]]
    return ProbeReport(d["probe_id"], d["probe"], d["scales"], d["measured"], fit, d["constant"],
                       d["target_exponent"], d["provenance"], checks, d["seed"],
                       runtime_ms=d["runtime_ms"] or 0.0, trials=d["trials"],
                       rejected=d["rejected"], extras=d["extras"], error=d["error"],
                       notes=d["notes"])


def load_reports(path: str | os.PathLike) -> list[ProbeReport]:
    return [report_from_dict(d) for d in json.loads(Path(path).read_text())["reports"]]


def _csv_text(reports: Sequence[ProbeReport], timing: bool) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in reports:
        fitted = residual = None
        if r.fit is not None:
            fitted, residual = r.fit.exponent, r.fit.residual
        runtime = r.runtime_ms if timing else None
        rows = list(zip(r.scales, r.measured)) or [(None, None)]
        if len(r.measured) < len(r.scales):
            rows = [(s, r.measured[i] if i < len(r.measured) else None)
                    for i, s in enumerate(r.scales)]
        for scale, value in rows:
            w.writerow([r.probe_id, _num(scale), _num(value), _num(r.target_exponent),
                        _num(fitted), _num(residual), _num(r.constant), r.verdict, r.seed,
                        _num(runtime)])
    return buf.getvalue()


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def emit(reports: Sequence[ProbeReport], fmt: str, path: str | os.PathLike,
         timing: bool = False) -> None:
    """Write reports as CSV (one row per scale) or JSON, atomically.

    Runtimes are left out unless ``timing`` is set, so identical runs give
    byte-identical files.
    """
    p = Path(path)
    if fmt == "csv":
        text = _csv_text(reports, timing)
    elif fmt == "json":
        text = _dump({"reports": [report_to_dict(r, timing) for r in reports]}) + "\n"
    else:
        raise ValueError(f"unknown format {fmt!r}")
    try:
        _atomic_write(p, text)
    except OSError as exc:
        raise OSError(f"cannot write {p}: {exc.strerror or exc}") from exc


# ---------------------------------------------------------------------------
# command line


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="restriction-lab",
                                 description="Run numerical probes of restriction estimates.")
    sub = ap.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run every probe in a manifest")
    r.add_argument("manifest")
    r.add_argument("--out", help="output directory (overrides the manifest)")
    r.add_argument("--format", help="comma-separated formats: csv,json")
    r.add_argument("--jobs", type=int, default=1, help="worker processes")
    r.add_argument("--seed", type=int, help="override the manifest seed")
    r.add_argument("--timing", action="store_true", help="record runtimes in the outputs")
    sub.add_parser("list-probes", help="list registered probes")
    v = sub.add_parser("validate", help="check a manifest without running it")
    v.add_argument("manifest")
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    if args.command == "list-probes":
        for name in probe_names():
            doc = (PROBES[name].__doc__ or "").strip().splitlines()
            print(f"{name:20s} {doc[0] if doc else ''}")
        return 0
    try:
        manifest = load_manifest(args.manifest, getattr(args, "seed", None))
    except ManifestError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if args.command == "validate":
        print(f"ok: {len(manifest.configs)} probe(s), seed {manifest.seed}")
        return 0
    formats = manifest.formats
    if args.format:
        formats = tuple(f.strip() for f in args.format.split(",") if f.strip())
        if not formats or any(f not in FORMATS for f in formats):
            print(f"error: unsupported format list {args.format!r}", file=sys.stderr)
            return 2
    out = Path(args.out) if args.out else manifest.output_dir
    if args.jobs < 1:
        print("error: --jobs must be at least 1", file=sys.stderr)
        return 2
    reports = run(manifest, jobs=args.jobs)
    stem = Path(args.manifest).stem
    try:
        for fmt in formats:
            emit(reports, fmt, out / f"{stem}.{fmt}", timing=args.timing)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    for r in reports:
        status = r.verdict if r.error is None else f"error ({r.error})"
        print(f"{r.probe_id:28s} {status}")
    return exit_code(reports)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
