"""causal-probe command line: scenario files in, deterministic CSV out.

Subcommands: spin, ho, field (run one system's scenario), sweep (cutoff
scaling fits), compare (scheme side-by-side), validate (parse + dry-run).
Scenario files are strict JSON (unknown keys rejected); flags mirror the
schema fields and override them.  Every table is written with 17
significant digits, '.' decimals and LF line endings so reruns are
byte-identical; a JSON run manifest records the scenario digest and the
numeric policy next to each table.

Exit codes: 0 success, 2 validation error, 3 numeric-policy violation
(truncation tails), 64 usage.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from pathlib import Path

from . import __version__
from .harness import (
    Scenario,
    ScenarioError,
    compare_schemes,
    cutoff_sweep,
    run_scenario,
)
from .policy import DEFAULT_POLICY, TruncationError

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERIC = 3
EXIT_USAGE = 64


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _fmt(x) -> str:
    return format(float(x), ".17g")


def scenario_digest(raw: dict) -> str:
    """Content hash, stable under key reordering of the scenario file."""
    canon = json.dumps(raw, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(row) + "\n")


def _write_manifest(out_dir: Path, stem: str, raw_scenario: dict, outputs,
                    started: float) -> Path:
    manifest = {
        "tool": "causal-probe",
        "version": __version__,
        "scenario_digest": scenario_digest(raw_scenario),
        "numeric_policy": DEFAULT_POLICY.as_dict(),
        "wall_clock_seconds": time.monotonic() - started,
        "outputs": [Path(p).name for p in outputs],
    }
    path = out_dir / f"{stem}.manifest.json"
    with open(path, "w", newline="\n") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def _load_scenario_file(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError as exc:
        raise ScenarioError(f"scenario file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"scenario file {path} is not valid JSON: {exc}") from exc


# ---------------------------------------------------------------------------
# argument plumbing

def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--scenario", help="JSON scenario file (flags override it)")
    sub.add_argument("--out", default=".", help="output directory (default: cwd)")
    sub.add_argument("--obs", help="comma-separated observables")
    sub.add_argument("--lambda", dest="lam", type=float,
                     help="single operation strength; becomes the grid and lambda_ref")
    sub.add_argument("--grid", help="lambda grid as start:stop:count")
    sub.add_argument("--natural-units", action="store_true", help="force hbar = 1")
    sub.add_argument("--hbar", type=float, help="hbar (default 1)")


def _parse_alice(text: str) -> tuple[tuple[float, float, float], float]:
    # rotate-y:1.5707963 or rotate-0,0,1:0.5
    if not text.startswith("rotate-") or ":" not in text:
        raise ScenarioError(f"cannot parse alice operation {text!r}")
    axis_part, angle_part = text[len("rotate-"):].split(":", 1)
    named = {"x": (1.0, 0.0, 0.0), "y": (0.0, 1.0, 0.0), "z": (0.0, 0.0, 1.0)}
    if axis_part in named:
        axis = named[axis_part]
    else:
        comps = [float(c) for c in axis_part.split(",")]
        if len(comps) != 3:
            raise ScenarioError(f"alice axis {axis_part!r} must be x, y, z or 3 components")
        axis = tuple(comps)
    return axis, float(angle_part)


def _grid_from_args(args, default_ref: float = 0.0):
    if args.grid:
        try:
            start, stop, count = args.grid.split(":")
            start, stop, count = float(start), float(stop), int(count)
        except ValueError as exc:
            raise ScenarioError(f"cannot parse grid {args.grid!r}") from exc
        if count < 2:
            raise ScenarioError("grid needs at least 2 points")
        step = (stop - start) / (count - 1)
        return [start + i * step for i in range(count)], stop
    if args.lam is not None:
        return [args.lam], args.lam
    return None, default_ref


def _scenario_from_args(args, system: str) -> dict:
    raw = _load_scenario_file(args.scenario) if args.scenario else None
    if raw is None:
        raw = {
            "version": 1,
            "system": system,
            "system_params": {},
            "alice": {"kind": "rotate" if system == "spin" else "kick"},
            "scheme": {},
            "observables": [],
            "lambda_grid": [],
        }
    sp = raw.setdefault("system_params", {})
    scheme = raw.setdefault("scheme", {})

    if getattr(args, "scheme_id", None):
        # replacing the id drops extras the new prescription does not accept
        keep = {"qndsv": ("target",), "phase-nplus": ("s_cut", "n_max")}.get(
            args.scheme_id, ())
        scheme = {"id": args.scheme_id,
                  **{k: v for k, v in scheme.items() if k in keep}}
        raw["scheme"] = scheme
    if args.obs:
        raw["observables"] = args.obs.split(",")
    grid, ref = _grid_from_args(args, raw.get("lambda_ref", 0.0))
    if grid is not None:
        raw["lambda_grid"] = grid
        raw["lambda_ref"] = ref
    if args.hbar is not None:
        sp["hbar"] = args.hbar
    if args.natural_units:
        sp["hbar"] = 1.0

    if system == "spin":
        if args.target:
            scheme["target"] = args.target.split(",")
        if args.initial:
            sp["initial"] = args.initial.split(",")
        sp.setdefault("initial", ["up", "up"])
        if args.alice:
            axis, angle = _parse_alice(args.alice)
            raw["alice"] = {"kind": "rotate", "axis": list(axis)}
            raw["lambda_grid"] = [angle]
            raw["lambda_ref"] = angle
        raw.setdefault("alice", {"kind": "rotate", "axis": [0.0, 1.0, 0.0]})
        if not raw["lambda_grid"]:
            raw["lambda_grid"] = [0.0]
    elif system == "oscillator":
        for flag, key in (("p_a", "p_a"), ("p_b", "p_b"), ("trunc", "trunc")):
            val = getattr(args, flag)
            if val is not None:
                sp[key] = val
        if args.s_cut is not None:
            scheme["s_cut"] = args.s_cut
        if not raw["lambda_grid"]:
            raw["lambda_grid"] = [0.0]
    else:
        for flag, key in (("d", "dim"), ("N", "n_sites"), ("a", "spacing"),
                          ("mass", "mass"), ("x", "x"), ("y", "y"),
                          ("p_index", "p"), ("dispersion", "dispersion")):
            val = getattr(args, flag)
            if val is not None:
                sp[key] = val
        if not raw["lambda_grid"]:
            raw["lambda_grid"] = [0.0]

    if not raw["observables"]:
        raw["observables"] = {
            "spin": ["sBz"],
            "oscillator": ["QB", "PB", "QB2", "PB2"],
            "field": ["phi_y", "pi_y", "phi2_y", "pi2_y"],
        }[system]
    return raw


_FIELD_SCHEME_ALIASES = {"naive": "naive-np", "qndsv": "qndsv-1p"}


def _run_system(args, system: str) -> int:
    raw = _scenario_from_args(args, system)
    if system == "field" and raw["scheme"].get("id") in _FIELD_SCHEME_ALIASES:
        raw["scheme"]["id"] = _FIELD_SCHEME_ALIASES[raw["scheme"]["id"]]
    started = time.monotonic()
    scenario = Scenario.from_dict(raw)
    report = run_scenario(scenario)

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = Path(args.scenario).stem if args.scenario else \
        f"{args.command}_{scenario.scheme['id']}"
    rows = []
    for obs in scenario.observables:
        for lam, value in report.tables[obs]:
            rows.append((obs, _fmt(lam), _fmt(value)))
    table = out_dir / f"{stem}.csv"
    _write_csv(table, ("observable", "lambda", "value"), rows)
    summary = out_dir / f"{stem}_summary.csv"
    _write_csv(summary,
               ("observable", "baseline", "derivative_at_zero", "max_deviation"),
               [(obs, _fmt(report.baseline[obs]), _fmt(report.derivative_at_zero[obs]),
                 _fmt(report.max_deviation[obs])) for obs in scenario.observables])
    _write_manifest(out_dir, stem, raw, [table, summary], started)
    for obs in scenario.observables:
        lam, value = report.tables[obs][-1]
        print(f"{obs}: value({_fmt(lam)}) = {_fmt(value)}, "
              f"d/dlambda|0 = {_fmt(report.derivative_at_zero[obs])}")
    return EXIT_OK


def _run_sweep(args) -> int:
    if not args.scenario:
        raise ScenarioError("sweep needs --scenario")
    raw = _load_scenario_file(args.scenario)
    started = time.monotonic()
    scenario = Scenario.from_dict(raw)
    values = [float(v) for v in args.values.split(",")]
    report = cutoff_sweep(scenario, args.axis, values, measure=args.measure)

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = f"{Path(args.scenario).stem}_sweep_{args.axis}"
    points = out_dir / f"{stem}.csv"
    _write_csv(points, ("observable", "cutoff", "measure"),
               [(name, _fmt(v), _fmt(m))
                for name in report.rows
                for v, m in zip(report.values, report.rows[name])])
    fits = out_dir / f"{stem}_fits.csv"
    _write_csv(fits, ("observable", "exponent", "r_squared"),
               [(name, _fmt(f.exponent), _fmt(f.r_squared))
                for name, f in report.fits.items()])
    _write_manifest(out_dir, stem, raw, [points, fits], started)
    for name, f in report.fits.items():
        print(f"{name}: exponent = {_fmt(f.exponent)}, R^2 = {_fmt(f.r_squared)}")
    return EXIT_OK


def _run_compare(args) -> int:
    if not args.scenario:
        raise ScenarioError("compare needs --scenario")
    raw = _load_scenario_file(args.scenario)
    started = time.monotonic()
    scenario = Scenario.from_dict(raw)
    ids = args.schemes.split(",")
    rows = compare_schemes(scenario, ids)

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = f"{Path(args.scenario).stem}_compare"
    table = out_dir / f"{stem}.csv"
    _write_csv(table, ("scheme", "observable", "before", "after", "derivative"),
               [(r.scheme_id, r.observable, _fmt(r.before), _fmt(r.after),
                 _fmt(r.derivative)) for r in rows])
    _write_manifest(out_dir, stem, raw, [table], started)
    for r in rows:
        print(f"{r.scheme_id} / {r.observable}: before = {_fmt(r.before)}, "
              f"after = {_fmt(r.after)}, d/dlambda|0 = {_fmt(r.derivative)}")
    return EXIT_OK


def _run_validate(args) -> int:
    for path in args.files:
        raw = _load_scenario_file(path)
        scenario = Scenario.from_dict(raw)
        run_scenario(scenario)  # dry run, nothing written
        print(f"{path}: ok (digest {scenario_digest(raw)[:12]})")
    return EXIT_OK


def build_parser() -> _Parser:
    parser = _Parser(prog="causal-probe", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    subs = parser.add_subparsers(dest="command", required=True)

    spin = subs.add_parser("spin", help="two-spin measurements")
    spin.add_argument("scheme_id", nargs="?",
                      help="qndsv | s2-standard | s2-bell | s2-luders | "
                           "sz-standard | sz-bell | sz-luders | none")
    spin.add_argument("--target", help="qndsv target labels, e.g. up,right")
    spin.add_argument("--initial", help="initial product state labels, e.g. up,up")
    spin.add_argument("--alice", help="local rotation, e.g. rotate-y:1.5707963")
    _add_common(spin)

    ho = subs.add_parser("ho", help="two-oscillator measurements")
    ho.add_argument("scheme_id", nargs="?", help="naive-nplus | phase-nplus | none")
    ho.add_argument("--p-a", dest="p_a", type=float)
    ho.add_argument("--p-b", dest="p_b", type=float)
    ho.add_argument("--trunc", type=int)
    ho.add_argument("--s-cut", dest="s_cut", type=int)
    _add_common(ho)

    fld = subs.add_parser("field", help="lattice scalar field measurements")
    fld.add_argument("scheme_id", nargs="?", help="naive | qndsv | none")
    fld.add_argument("--d", type=int, help="spatial dimension")
    fld.add_argument("--N", type=int, help="sites per axis")
    fld.add_argument("--a", type=float, help="lattice spacing")
    fld.add_argument("--mass", type=float)
    fld.add_argument("--x", type=int, help="kick site")
    fld.add_argument("--y", type=int, help="observation site")
    fld.add_argument("--p-index", dest="p_index", type=int,
                     help="integer wavenumber of the measured mode")
    fld.add_argument("--dispersion", choices=("lattice", "continuum"))
    _add_common(fld)

    sweep = subs.add_parser("sweep", help="cutoff sweep with power-law fits")
    sweep.add_argument("--axis", required=True,
                       choices=("volume", "spacing", "s_cut", "trunc"))
    sweep.add_argument("--values", required=True, help="comma-separated cutoff values")
    sweep.add_argument("--measure", default="deviation",
                       choices=("deviation", "after_value", "amplitude"))
    _add_common(sweep)

    cmp_ = subs.add_parser("compare", help="before/after table across schemes")
    cmp_.add_argument("--schemes", required=True, help="comma-separated scheme ids")
    _add_common(cmp_)

    val = subs.add_parser("validate", help="parse, validate and dry-run scenarios")
    val.add_argument("files", nargs="+", help="scenario JSON files")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"causal-probe: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        if args.command == "spin":
            return _run_system(args, "spin")
        if args.command == "ho":
            return _run_system(args, "oscillator")
        if args.command == "field":
            return _run_system(args, "field")
        if args.command == "sweep":
            return _run_sweep(args)
        if args.command == "compare":
            return _run_compare(args)
        return _run_validate(args)
    except TruncationError as exc:
        print(f"causal-probe: numeric policy violation: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ScenarioError, ValueError) as exc:
        print(f"causal-probe: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
