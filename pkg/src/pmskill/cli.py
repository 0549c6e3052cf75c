"""Command-line front end.

Commands: evaluate (run a configuration end to end), compare (flag
ranking reversals between runs), synth (generate a synthetic CSV),
report (re-render metric artifacts from an existing records.csv).

Exit codes: 0 success, 2 configuration error, 3 data error, 4 model-fit
error, 5 incompatibility error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .config import (
    RunConfig,
    apply_overrides,
    build_run_config,
    load_config_file,
    resolved_dict,
)
from .errors import (
    ConfigError,
    DataError,
    FitError,
    IncompatibilityError,
    PmskillError,
)
from .protocol import ForecastRecordSet, rolling_folds, run_protocol, static_plan
from .reporting import (
    build_comparison,
    build_skill_payload,
    canonical_json,
    render_comparison_md,
    render_report_md,
    render_svg,
    series_hash,
)
from .series import load_csv, quality_filter, summary_stats, write_csv
from .synth import SynthSpec, generate

log = logging.getLogger("pmskill")

EXIT_CODES = (
    (ConfigError, 2),
    (DataError, 3),
    (FitError, 4),
    (IncompatibilityError, 5),
)


def _load_series(rc: RunConfig):
    """Returns (series, filter_report_dict_or_None)."""
    if rc.data.synth is not None:
        return generate(rc.data.synth), None
    series = load_csv(rc.data.csv_path, rc.data.csv_spec)
    if rc.data.quality is not None:
        series, report = quality_filter(series, rc.data.quality)
        return series, {
            "raw_count": report.raw_count,
            "retained_count": report.retained_count,
            "retention_fraction": report.retention_fraction,
            "per_year_coverage": report.per_year_coverage,
        }
    return series, None


def _build_plan(series, rc: RunConfig):
    if rc.protocol.kind == "static":
        return static_plan(series, rc.protocol.boundary, rc.h_max)
    return rolling_folds(series, rc.protocol.initial_train_end,
                         rc.h_max, rc.protocol.min_test)


def cmd_evaluate(args) -> int:
    cfg = load_config_file(args.config)
    overrides = list(args.set or [])
    if args.seed is not None:
        overrides.append(f"seed={args.seed}")
    if args.jobs is not None:
        overrides.append(f"jobs={args.jobs}")
    apply_overrides(cfg, overrides)
    rc = build_run_config(cfg)
    out_dir = args.out or rc.out_dir
    if not out_dir:
        raise ConfigError("an output directory is required "
                          "(--out or 'out' in the config)")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    series, filter_report = _load_series(rc)
    data_hash = series_hash(series)
    plan = _build_plan(series, rc)
    log.info("series %s..%s (%d present), %d folds", series.start_date,
             series.end_date, series.present_count, len(plan.folds))

    parts = []
    failed: dict[str, str] = {}
    for spec in rc.models:
        log.info("running model %s", spec.tag)
        try:
            parts.append(run_protocol(series, spec, plan,
                                      rc.preprocessing, jobs=rc.jobs))
        except (DataError, FitError) as exc:
            failed[spec.tag] = f"{type(exc).__name__}: {exc}"
            log.warning("model %s failed: %s", spec.tag, exc)
    if not parts:
        raise FitError("every model failed: "
                       + "; ".join(f"{t}: {e}" for t, e in failed.items()))

    records = parts[0] if len(parts) == 1 else ForecastRecordSet.merge(parts)
    resolved = resolved_dict(rc)
    payload = build_skill_payload(records, resolved, data_hash, rc.metric)
    if failed:
        payload["failed_models"] = failed

    stats = summary_stats(series)
    stats_dict = {"mean": stats.mean, "median": stats.median,
                  "max": stats.max,
                  "exceedance_fraction": stats.exceedance_fraction,
                  "threshold": stats.threshold, "n_obs": stats.n_obs}

    records.to_csv(out / "records.csv")
    (out / "skill.json").write_text(canonical_json(payload))
    (out / "report.md").write_text(
        render_report_md(payload, stats_dict, filter_report))
    (out / "skill_profile.svg").write_text(render_svg(payload))
    (out / "resolved_config.json").write_text(
        canonical_json({"config": resolved, "data_hash": data_hash}))
    log.info("artifacts written to %s", out)
    return 0


def cmd_synth(args) -> int:
    cfg = load_config_file(args.config)
    apply_overrides(cfg, args.set or [])
    raw = cfg.get("synth", cfg.get("data", {}).get("synth", cfg))
    if not isinstance(raw, dict):
        raise ConfigError("synth config must be a mapping of generator keys")
    spec = SynthSpec.from_dict(raw)
    series = generate(spec)
    out = Path(args.out)
    if out.parent != Path(""):
        out.parent.mkdir(parents=True, exist_ok=True)
    write_csv(series, out)
    reloaded = load_csv(out)
    if len(reloaded) != len(series):
        raise DataError("round-trip length mismatch after writing synth CSV")
    log.info("wrote %d rows (%d present) to %s", len(series),
             series.present_count, out)
    return 0


def cmd_report(args) -> int:
    if args.run:
        run_dir = Path(args.run)
        records_path = run_dir / "records.csv"
        meta_path = run_dir / "resolved_config.json"
    else:
        records_path = Path(args.records)
        meta_path = records_path.parent / "resolved_config.json"
    records = ForecastRecordSet.from_csv(records_path)
    config: dict = {}
    data_hash = "unknown"
    metric = "rmse"
    if meta_path.exists():
        meta = json.loads(meta_path.read_text())
        config = meta.get("config", {})
        data_hash = meta.get("data_hash", data_hash)
        metric = config.get("metric", metric)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    payload = build_skill_payload(records, config, data_hash, metric)
    (out / "skill.json").write_text(canonical_json(payload))
    (out / "report.md").write_text(render_report_md(payload))
    (out / "skill_profile.svg").write_text(render_svg(payload))
    log.info("re-rendered artifacts in %s", out)
    return 0


def cmd_compare(args) -> int:
    runs = []
    for run_dir in args.runs:
        path = Path(run_dir) / "skill.json"
        if not path.exists():
            raise IncompatibilityError(f"{run_dir}: no skill.json found")
        runs.append((str(run_dir), json.loads(path.read_text())))
    comparison = build_comparison(runs)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "comparison.json").write_text(canonical_json(comparison))
    (out / "comparison.md").write_text(
        render_comparison_md(comparison, runs))
    flagged = sorted({h for block in comparison["modes"].values()
                      for h in block["reversed_horizons"]})
    if flagged:
        log.info("ranking differs at horizons %s", flagged)
    else:
        log.info("rankings agree at every horizon")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pmskill",
        description="Leakage-safe rolling-origin forecast backtesting "
                    "with persistence-relative skill.")
    parser.add_argument("-q", "--quiet", action="store_true",
                        help="suppress progress logging")
    sub = parser.add_subparsers(dest="command", required=True)

    ev = sub.add_parser("evaluate", help="run a full evaluation")
    ev.add_argument("--config", required=True, help="YAML run configuration")
    ev.add_argument("--set", action="append", metavar="KEY=VALUE",
                    help="override a config entry (dotted path)")
    ev.add_argument("--out", help="output directory")
    ev.add_argument("--jobs", type=int, help="parallel fold workers")
    ev.add_argument("--seed", type=int, help="override the run seed")
    ev.set_defaults(func=cmd_evaluate)

    sy = sub.add_parser("synth", help="generate a synthetic CSV")
    sy.add_argument("--config", required=True,
                    help="YAML file with generator settings")
    sy.add_argument("--set", action="append", metavar="KEY=VALUE")
    sy.add_argument("--out", required=True, help="output CSV path")
    sy.set_defaults(func=cmd_synth)

    rp = sub.add_parser("report",
                        help="re-render artifacts from records.csv")
    src = rp.add_mutually_exclusive_group(required=True)
    src.add_argument("--records", help="path to a records.csv")
    src.add_argument("--run", help="existing run directory")
    rp.add_argument("--out", required=True, help="output directory")
    rp.set_defaults(func=cmd_report)

    cp = sub.add_parser("compare", help="compare two or more runs")
    cp.add_argument("runs", nargs="+", help="run directories")
    cp.add_argument("--out", required=True, help="output directory")
    cp.set_defaults(func=cmd_compare)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING if args.quiet else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.func(args)
    except PmskillError as exc:
        code = 1
        for klass, klass_code in EXIT_CODES:
            if isinstance(exc, klass):
                code = klass_code
                break
        message = " ".join(str(exc).split())
        print(f"pmskill: error[{code}]: {type(exc).__name__}: {message}",
              file=sys.stderr)
        return code


if __name__ == "__main__":
    sys.exit(main())
