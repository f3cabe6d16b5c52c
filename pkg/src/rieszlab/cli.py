"""Experiment driver.

Subcommands:

  solve    one N on the configured set; prints energy, G, N1/N2 and
           optionally writes a result JSON.
  sweep    a range of N values with caching and warm starts; writes the
           trace CSV plus a summary JSON.
  report   aggregate one or more trace files: gamma estimates, rate-check
           flags, weak-star oscillation stats, split predictions when a
           union trace is paired with both single-component traces, and
           cache consistency checks.

Exit codes: 0 success, 2 validation, 3 solver infeasibility, 4 I/O.
Errors are also emitted as machine-readable JSON on stderr.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass

from . import __version__
from .asymptotics import (
    AsymptoticTrace,
    SplitPrediction,
    TraceError,
    estimate_gamma,
    trace_summary,
)
from .cache import EnergyCache
from .energy import EnergyError, normalized_energy
from .geometry import GeometryError, UnionSet, dimension, set_from_dict, set_hash
from .optimize import (
    InfeasibleError,
    SearchParams,
    SolverError,
    SweepError,
    check_cached_split_bounds,
    check_part_decomposition,
    minimize_local_search,
    minimize_union,
    sweep,
)
from .presets import PRESETS, preset_dict

SCHEMA_VERSION = 1

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_INFEASIBLE = 3
EXIT_IO = 4

DEFAULT_CACHE = "rieszlab_cache.json"


class CLIError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _emit_error(exc: Exception, code: int) -> None:
    payload = {"error": {"code": code, "type": type(exc).__name__, "message": str(exc)}}
    print(json.dumps(payload), file=sys.stderr)


@dataclass
class ExperimentConfig:
    """Validated inputs shared by the solve and sweep commands."""

    set_dict: dict
    set_spec: object
    s: float
    params: SearchParams
    cache_path: str | None
    out: str | None
    deterministic: bool
    force: bool


def _load_set_dict(config_arg: str) -> dict:
    if config_arg in PRESETS:
        return preset_dict(config_arg)
    if not os.path.exists(config_arg):
        raise CLIError(EXIT_IO, f"config file not found: {config_arg}")
    try:
        with open(config_arg) as fh:
            return json.load(fh)
    except OSError as exc:
        raise CLIError(EXIT_IO, f"cannot read config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise CLIError(EXIT_VALIDATION, f"config is not valid JSON: {exc}") from exc


def _cache_path(args) -> str | None:
    if args.cache is not None:
        return args.cache
    return os.environ.get("RIESZLAB_CACHE", DEFAULT_CACHE)


def _experiment_config(args) -> ExperimentConfig:
    set_dict = _load_set_dict(args.config)
    try:
        set_spec = set_from_dict(set_dict)
    except GeometryError as exc:
        raise CLIError(EXIT_VALIDATION, str(exc)) from exc
    d = dimension(set_spec)
    if not (args.s > d):
        raise CLIError(
            EXIT_VALIDATION,
            f"the exponent must exceed the set dimension: s={args.s} <= d={d!r}",
        )
    if args.depth == "auto":
        depth = "auto"
    else:
        try:
            depth = int(args.depth)
        except ValueError:
            raise CLIError(EXIT_VALIDATION, f"--depth must be an integer or 'auto', got {args.depth!r}")
    try:
        params = SearchParams(depth=depth, restarts=args.restarts, seed=args.seed)
    except SolverError as exc:
        raise CLIError(EXIT_VALIDATION, str(exc)) from exc
    return ExperimentConfig(
        set_dict=set_dict, set_spec=set_spec, s=args.s, params=params,
        cache_path=_cache_path(args), out=args.out,
        deterministic=args.deterministic, force=args.force,
    )


def _write_json(path: str, payload: dict) -> None:
    try:
        with open(path, "w") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")
    except OSError as exc:
        raise CLIError(EXIT_IO, f"cannot write {path}: {exc}") from exc


def cmd_solve(args) -> int:
    cfg = _experiment_config(args)
    if args.n < 0:
        raise CLIError(EXIT_VALIDATION, f"--n must be nonnegative, got {args.n}")
    cache = EnergyCache(cfg.cache_path)
    try:
        if isinstance(cfg.set_spec, UnionSet):
            res = minimize_union(cfg.set_spec, args.n, cfg.s, cfg.params, cache=cache)
        else:
            res = minimize_local_search(cfg.set_spec, args.n, cfg.s, cfg.params)
    except InfeasibleError as exc:
        raise CLIError(EXIT_INFEASIBLE, str(exc)) from exc
    cache.update(cfg.set_dict, cfg.s, args.n, res.energy.total,
                 res.config.to_dict(), res.status, res.N1)
    cache.save()
    d = dimension(cfg.set_spec)
    g = normalized_energy(res.energy.total, args.n, cfg.s, d) if args.n >= 1 else 0.0
    print(f"N={args.n} s={cfg.s} energy={res.energy.total!r} G={g!r} "
          f"N1={res.N1} N2={res.N2} status={res.status}")
    if cfg.out:
        _write_json(cfg.out, {
            "schema_version": SCHEMA_VERSION,
            "kind": "solve",
            "set_hash": set_hash(cfg.set_dict),
            "s": cfg.s, "N": args.n, "d": d,
            "energy": res.energy.total, "G": g,
            "N1": res.N1, "N2": res.N2,
            "min_dist": res.energy.min_dist,
            "status": res.status,
            "evaluations": res.evaluations,
            "deterministic": cfg.deterministic,
            "configuration": res.config.to_dict(),
        })
    return EXIT_OK


def _summary_path(out: str) -> str:
    base = out[:-4] if out.endswith(".csv") else out
    return base + ".summary.json"


def cmd_sweep(args) -> int:
    cfg = _experiment_config(args)
    if args.n_min < 2 or args.n_max < args.n_min:
        raise CLIError(EXIT_VALIDATION,
                       f"need 2 <= n-min <= n-max, got {args.n_min}..{args.n_max}")
    out = cfg.out or "trace.csv"
    n_values = list(range(args.n_min, args.n_max + 1))
    cache = EnergyCache(cfg.cache_path)
    pre_cached = {
        n for n in n_values if cache.get(cfg.set_dict, cfg.s, n) is not None
    }
    summary = {
        "schema_version": SCHEMA_VERSION,
        "kind": "sweep-summary",
        "set_hash": set_hash(cfg.set_dict),
        "set_kind": cfg.set_dict["type"],
        "s": cfg.s,
        "d": dimension(cfg.set_spec),
        "seed": cfg.params.seed,
        "restarts": cfg.params.restarts,
        "deterministic": cfg.deterministic,
        "n_range": [args.n_min, args.n_max],
        "solved": len(n_values) if cfg.force else len(n_values) - len(pre_cached),
        "from_cache": 0 if cfg.force else len(pre_cached),
    }
    comp_ids = None
    if isinstance(cfg.set_spec, UnionSet):
        comp_ids = (set_hash(cfg.set_dict["A1"]), set_hash(cfg.set_dict["A2"]))
    done = []

    def persist(rec):
        # Single writer, once per completed N: survive interruptions.
        done.append(rec)
        partial = AsymptoticTrace(
            records=tuple(done), set_id=set_hash(cfg.set_dict),
            set_kind=cfg.set_dict["type"], s=cfg.s, d=dimension(cfg.set_spec),
            component_ids=comp_ids,
        )
        _write_trace(out, partial, cfg.set_dict)
        cache.save()

    try:
        trace = sweep(cfg.set_spec, cfg.s, n_values, cfg.params, cache=cache,
                      force=cfg.force, on_record=persist)
    except SweepError as exc:
        cache.save()
        summary["failed_N"] = exc.failed_N
        summary["error"] = str(exc)
        _write_json(_summary_path(out), summary)
        code = EXIT_INFEASIBLE if isinstance(exc.cause, SolverError) else EXIT_VALIDATION
        raise CLIError(code, str(exc)) from exc
    cache.save()
    _write_trace(out, trace, cfg.set_dict)
    summary.update(trace_summary(trace))
    _write_json(_summary_path(out), summary)
    print(f"sweep complete: {len(trace)} rows -> {out} "
          f"(solved {summary['solved']}, cached {summary['from_cache']})")
    return EXIT_OK


def _write_trace(path: str, trace: AsymptoticTrace, set_dict: dict) -> None:
    text = trace.to_csv()
    # Embed the full set definition so reports can rebuild the geometry.
    lines = text.splitlines()
    meta = json.loads(lines[0][2:])
    meta["set"] = set_dict
    lines[0] = "# " + json.dumps(meta, sort_keys=True)
    try:
        with open(path, "w") as fh:
            fh.write("\n".join(lines) + "\n")
    except OSError as exc:
        raise CLIError(EXIT_IO, f"cannot write {path}: {exc}") from exc


def _read_trace(path: str) -> tuple[AsymptoticTrace, dict]:
    if not os.path.exists(path):
        raise CLIError(EXIT_IO, f"trace file not found: {path}")
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise CLIError(EXIT_IO, f"cannot read {path}: {exc}") from exc
    try:
        trace = AsymptoticTrace.from_csv(text)
        meta = json.loads(text.splitlines()[0][2:])
    except (TraceError, ValueError) as exc:
        raise CLIError(EXIT_VALIDATION, f"{path}: {exc}") from exc
    return trace, meta


def cmd_report(args) -> int:
    loaded = [_read_trace(p) for p in args.traces]
    traces = [t for t, _ in loaded]
    s_values = {t.s for t in traces}
    if len(s_values) != 1:
        raise CLIError(EXIT_VALIDATION, f"traces disagree on s: {sorted(s_values)}")
    d_values = {t.d for t in traces}
    if len(d_values) != 1:
        raise CLIError(EXIT_VALIDATION, f"traces disagree on d: {sorted(d_values)}")
    s = s_values.pop()
    d = d_values.pop()

    unions = [(t, m) for t, m in loaded if t.set_kind == "union"]
    union_hashes = {t.set_id for t, _ in unions}
    if len(unions) > 1 and len(union_hashes) > 1:
        raise CLIError(EXIT_VALIDATION, "multiple union traces with different set hashes")

    per_trace = []
    for (t, _), path in zip(loaded, args.traces):
        entry = {"path": path, "set_hash": t.set_id, "set_kind": t.set_kind,
                 "records": len(t)}
        entry.update(trace_summary(t))
        per_trace.append(entry)

    report = {
        "schema_version": SCHEMA_VERSION,
        "kind": "report",
        "s": s, "d": d,
        "traces": per_trace,
    }

    if unions:
        union_trace, union_meta = unions[0]
        comp_ids = union_trace.component_ids or ()
        by_hash = {t.set_id: t for t, _ in loaded if t.set_kind != "union"}
        if len(comp_ids) == 2 and comp_ids[0] in by_hash and comp_ids[1] in by_hash:
            t1, t2 = by_hash[comp_ids[0]], by_hash[comp_ids[1]]
            if len(t1) >= 4 and len(t2) >= 4:
                gam1 = estimate_gamma(t1)
                gam2 = estimate_gamma(t2)
                g2 = 0.5 * (gam2.g_low_hat + gam2.g_up_hat)
                pred = SplitPrediction.from_estimates(
                    gam1, g2, s, d,
                    provenance=(
                        f"g1 from tail min/max of {t1.set_id}; "
                        f"g2 = tail midpoint of {t2.set_id}"
                    ),
                )
                report["predictions"] = pred.to_dict()
        if args.cache and "set" in union_meta:
            cache = EnergyCache(args.cache)
            try:
                union = set_from_dict(union_meta["set"])
            except GeometryError as exc:
                raise CLIError(EXIT_VALIDATION, f"trace set definition invalid: {exc}") from exc
            report["consistency"] = {
                "split_bounds": check_cached_split_bounds(cache, union, s),
                "part_decomposition": check_part_decomposition(cache, union, s),
            }

    text = json.dumps(report, indent=2, sort_keys=True)
    print(text)
    if args.out:
        _write_json(args.out, report)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rieszlab",
        description="Minimal Riesz s-energy experiments on fractals, segments, "
                    "and separated unions.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", required=True,
                       help="set definition JSON file or a preset name "
                            f"({', '.join(sorted(PRESETS))})")
        p.add_argument("--s", type=float, required=True, help="Riesz exponent (s > d)")
        p.add_argument("--depth", default="auto", help="fractal address depth or 'auto'")
        p.add_argument("--restarts", type=int, default=8)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--deterministic", action="store_true",
                       help="force sequential, bit-reproducible evaluation")
        p.add_argument("--cache", default=None,
                       help=f"cache file (default: $RIESZLAB_CACHE or ./{DEFAULT_CACHE})")
        p.add_argument("--out", default=None, help="output path")
        p.add_argument("--force", action="store_true",
                       help="re-solve even when the cache already has an entry")

    ps = sub.add_parser("solve", help="solve a single N")
    add_common(ps)
    ps.add_argument("--n", type=int, required=True, help="number of points")
    ps.set_defaults(func=cmd_solve)

    pw = sub.add_parser("sweep", help="solve a range of N and write the trace")
    add_common(pw)
    pw.add_argument("--n-min", type=int, required=True)
    pw.add_argument("--n-max", type=int, required=True)
    pw.set_defaults(func=cmd_sweep)

    pr = sub.add_parser("report", help="aggregate diagnostics from trace files")
    pr.add_argument("traces", nargs="+", help="trace CSV paths")
    pr.add_argument("--cache", default=None, help="cache file for consistency checks")
    pr.add_argument("--out", default=None, help="write the report JSON here")
    pr.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CLIError as exc:
        _emit_error(exc, exc.code)
        return exc.code
    except (GeometryError, TraceError, EnergyError) as exc:
        _emit_error(exc, EXIT_VALIDATION)
        return EXIT_VALIDATION
    except (InfeasibleError, SolverError) as exc:
        _emit_error(exc, EXIT_INFEASIBLE)
        return EXIT_INFEASIBLE
    except OSError as exc:
        _emit_error(exc, EXIT_IO)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
