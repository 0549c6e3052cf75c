"""Artifact emission: skill.json, report.md, skill_profile.svg and the
cross-run comparison.

All writers are deterministic functions of their inputs (canonical JSON
key order, fixed float formatting, no timestamps), so rerunning a
configuration reproduces byte-identical artifacts.
"""

from __future__ import annotations

import hashlib
import io
import json

import numpy as np

from .errors import IncompatibilityError
from .metrics import error_table, fold_distribution, skill_profile
from .protocol import ForecastRecordSet
from .series import TimeSeries
from ._kernels import BACKEND

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
           "#17becf", "#7f7f7f")


def series_hash(series: TimeSeries) -> str:
    """Content hash of the input data (canonical CSV serialization)."""
    buf = io.StringIO()
    buf.write(f"start={series.start_date.isoformat()};name={series.name}\n")
    for v in series.values:
        buf.write("" if np.isnan(v) else repr(float(v)))
        buf.write("\n")
    return hashlib.sha256(buf.getvalue().encode()).hexdigest()


def _plain(obj):
    """Recursively convert numpy scalars/arrays for JSON serialization."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def canonical_json(payload: dict) -> str:
    return json.dumps(_plain(payload), sort_keys=True, indent=2) + "\n"


def build_skill_payload(records: ForecastRecordSet, config: dict,
                        data_hash: str, metric: str) -> dict:
    """Profiles in both aggregation modes, per-fold skills and fold
    summaries for every model tag in the records."""
    h_max = records.h_max
    profiles = []
    fold_summaries: dict[str, list] = {}
    for tag in records.tags():
        per_h_summaries = []
        per_fold: dict[int, list] = {}
        for h in range(1, h_max + 1):
            summary = fold_distribution(records, tag, h, error=metric)
            per_h_summaries.append(summary.to_json_dict())
            for fid, value in zip(summary.fold_ids, summary.skills):
                per_fold.setdefault(int(fid), [None] * h_max)[h - 1] = value
        folds_json = [{"fold_id": fid, "skill": per_fold[fid]}
                      for fid in sorted(per_fold)]
        for mode in ("pooled", "mean_of_folds"):
            prof = skill_profile(records, tag, mode=mode, error=metric)
            entry = prof.to_json_dict()
            entry["folds"] = folds_json
            profiles.append(entry)
        fold_summaries[tag] = per_h_summaries
    table = [
        {"model_tag": c.model_tag, "horizon": c.horizon, "rmse": c.rmse,
         "mae": c.mae, "n_pairs": c.n_pairs}
        for c in error_table(records).cells
    ]
    return {
        "config": config,
        "data_hash": data_hash,
        "h_max": h_max,
        "error": metric,
        "kernel_backend": BACKEND,
        "profiles": profiles,
        "fold_summaries": fold_summaries,
        "error_table": table,
        "provenance": records.provenance,
    }


# ---------------------------------------------------------------------------
# markdown report

def _md_table(header: list[str], rows: list[list]) -> str:
    out = ["| " + " | ".join(header) + " |",
           "| " + " | ".join("---" for _ in header) + " |"]
    for row in rows:
        out.append("| " + " | ".join(str(c) for c in row) + " |")
    return "\n".join(out)


def _fmt(x) -> str:
    return f"{x:.4f}" if isinstance(x, float) else str(x)


def render_report_md(payload: dict, stats: dict | None = None,
                     filter_report: dict | None = None) -> str:
    h_max = payload["h_max"]
    lines = ["# Forecast skill report", ""]
    lines += ["## Input", "",
              f"- data hash: `{payload['data_hash']}`",
              f"- error metric: {payload['error']}",
              f"- horizons: 1..{h_max}",
              f"- kernel backend: {payload['kernel_backend']}", ""]
    if stats:
        lines += ["## Series summary", "",
                  _md_table(["mean", "median", "max", "exceedance",
                             "threshold", "n_obs"],
                            [[_fmt(stats[k]) for k in
                              ("mean", "median", "max", "exceedance_fraction",
                               "threshold", "n_obs")]]), ""]
    if filter_report:
        cov = ", ".join(f"{y}: {v:.3f}"
                        for y, v in sorted(filter_report["per_year_coverage"].items()))
        lines += ["## Quality filter", "",
                  f"- raw present values: {filter_report['raw_count']}",
                  f"- retained: {filter_report['retained_count']} "
                  f"({filter_report['retention_fraction']:.3f})",
                  f"- per-year coverage: {cov}", ""]

    lines += ["## Skill profiles", ""]
    for entry in payload["profiles"]:
        lines.append(f"### {entry['model_tag']} ({entry['mode']})")
        lines.append("")
        rows = [[h, _fmt(entry["skill"][h - 1]), _fmt(entry["err_model"][h - 1]),
                 _fmt(entry["err_pers"][h - 1]), entry["n_pairs"][h - 1]]
                for h in range(1, h_max + 1)]
        lines.append(_md_table(
            ["h", "skill", f"{payload['error']}(model)",
             f"{payload['error']}(pers)", "pairs"], rows))
        lines.append("")
        lines.append(f"- H* (max variant): {entry['h_star_max']}; "
                     f"contiguous prefix: {entry['h_star_prefix']}")
        lines.append("")

    lines += ["## Per-fold skill distribution", ""]
    for tag, summaries in payload["fold_summaries"].items():
        rows = [[s["horizon"], _fmt(s["median"]), _fmt(s["mean"]),
                 f"{s['n_nonpositive']}/{s['n_total']}"]
                for s in summaries]
        lines.append(f"### {tag}")
        lines.append("")
        lines.append(_md_table(["h", "median skill", "mean skill",
                                "non-positive folds"], rows))
        lines.append("")

    prov = payload.get("provenance", {})
    lines += ["## Run details", ""]
    for part in prov.get("merged", [prov] if prov else []):
        model = part.get("model", {})
        lines.append(f"- `{model.get('tag', '?')}`: "
                     f"skipped pairs {part.get('skipped_pairs', 0)}, "
                     f"skipped origins {part.get('skipped_origins', 0)}, "
                     f"fold failures {len(part.get('fold_failures', []))}")
        if "sarima" in part:
            sar = part["sarima"]
            lines.append(f"  - SARIMA order {sar['order']}, "
                         f"loglik {_fmt(float(sar['loglik']))}, "
                         f"coefficients ar={sar['ar']}, ma={sar['ma']}, "
                         f"sar={sar['seasonal_ar']}, sma={sar['seasonal_ma']}")
    lines.append("")
    lines += ["## Resolved configuration", "", "```json",
              json.dumps(_plain(payload["config"]), sort_keys=True, indent=2),
              "```", ""]
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# SVG skill profile plot

def render_svg(payload: dict) -> str:
    """Skill vs horizon per model (pooled solid, mean-of-folds dashed)
    with a zero-skill reference line. Dependency-free SVG text."""
    h_max = payload["h_max"]
    width, height = 720, 440
    ml, mr, mt, mb = 60, 170, 30, 50
    plot_w, plot_h = width - ml - mr, height - mt - mb

    profiles = payload["profiles"]
    all_vals = [v for p in profiles for v in p["skill"]]
    lo = min(min(all_vals), 0.0)
    hi = max(max(all_vals), 0.0)
    pad = 0.05 * max(hi - lo, 0.1)
    lo, hi = lo - pad, hi + pad

    def x(h: float) -> float:
        if h_max == 1:
            return ml + plot_w / 2
        return ml + (h - 1) / (h_max - 1) * plot_w

    def y(v: float) -> float:
        return mt + (hi - v) / (hi - lo) * plot_h

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{ml}" y="18" font-family="sans-serif" font-size="14">'
        f'Persistence-relative skill vs horizon ({payload["error"]})</text>',
    ]
    # axes
    parts.append(f'<line x1="{ml}" y1="{mt}" x2="{ml}" y2="{mt + plot_h}" '
                 'stroke="black" stroke-width="1"/>')
    parts.append(f'<line x1="{ml}" y1="{mt + plot_h}" x2="{ml + plot_w}" '
                 f'y2="{mt + plot_h}" stroke="black" stroke-width="1"/>')
    # zero-skill reference
    if lo < 0.0 < hi:
        zy = y(0.0)
        parts.append(f'<line x1="{ml}" y1="{zy:.2f}" x2="{ml + plot_w}" '
                     f'y2="{zy:.2f}" stroke="#888888" stroke-width="1" '
                     'stroke-dasharray="6,3"/>')
        parts.append(f'<text x="{ml - 8}" y="{zy + 4:.2f}" text-anchor="end" '
                     'font-family="sans-serif" font-size="11">0</text>')
    # x ticks
    for h in range(1, h_max + 1):
        xi = x(h)
        parts.append(f'<line x1="{xi:.2f}" y1="{mt + plot_h}" x2="{xi:.2f}" '
                     f'y2="{mt + plot_h + 4}" stroke="black"/>')
        parts.append(f'<text x="{xi:.2f}" y="{mt + plot_h + 18}" '
                     'text-anchor="middle" font-family="sans-serif" '
                     f'font-size="11">{h}</text>')
    parts.append(f'<text x="{ml + plot_w / 2}" y="{height - 12}" '
                 'text-anchor="middle" font-family="sans-serif" '
                 'font-size="12">horizon (days)</text>')
    # y ticks (5 evenly spaced)
    for i in range(5):
        val = lo + i * (hi - lo) / 4
        yi = y(val)
        parts.append(f'<line x1="{ml - 4}" y1="{yi:.2f}" x2="{ml}" '
                     f'y2="{yi:.2f}" stroke="black"/>')
        parts.append(f'<text x="{ml - 8}" y="{yi + 4:.2f}" text-anchor="end" '
                     f'font-family="sans-serif" font-size="11">{val:.2f}</text>')

    tags = []
    for p in profiles:
        if p["model_tag"] not in tags:
            tags.append(p["model_tag"])
    legend_y = mt + 10
    for p in profiles:
        color = PALETTE[tags.index(p["model_tag"]) % len(PALETTE)]
        dash = "" if p["mode"] == "pooled" else ' stroke-dasharray="4,3"'
        pts = " ".join(f"{x(h):.2f},{y(p['skill'][h - 1]):.2f}"
                       for h in range(1, h_max + 1))
        parts.append(f'<polyline points="{pts}" fill="none" stroke="{color}" '
                     f'stroke-width="1.8"{dash}/>')
        parts.append(f'<line x1="{ml + plot_w + 10}" y1="{legend_y}" '
                     f'x2="{ml + plot_w + 34}" y2="{legend_y}" '
                     f'stroke="{color}" stroke-width="1.8"{dash}/>')
        parts.append(f'<text x="{ml + plot_w + 40}" y="{legend_y + 4}" '
                     'font-family="sans-serif" font-size="11">'
                     f'{p["model_tag"]} ({p["mode"]})</text>')
        legend_y += 18
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


# ---------------------------------------------------------------------------
# cross-run comparison

def build_comparison(runs: list[tuple[str, dict]]) -> dict:
    """Rank models per horizon per run and flag ranking disagreements.

    ``runs`` holds (label, skill.json payload) pairs over the same data
    and horizons.
    """
    if len(runs) < 2:
        raise IncompatibilityError("compare needs at least two runs")
    base_hash = runs[0][1]["data_hash"]
    base_h = runs[0][1]["h_max"]
    base_tags = {p["model_tag"] for p in runs[0][1]["profiles"]}
    for label, payload in runs[1:]:
        if payload["data_hash"] != base_hash:
            raise IncompatibilityError(
                f"run {label!r} has a different data hash")
        if payload["h_max"] != base_h:
            raise IncompatibilityError(
                f"run {label!r} has different horizons")
        tags = {p["model_tag"] for p in payload["profiles"]}
        if tags != base_tags:
            raise IncompatibilityError(
                f"run {label!r} has different model tags "
                f"({sorted(tags)} vs {sorted(base_tags)})")

    result: dict = {"data_hash": base_hash, "h_max": base_h, "modes": {}}
    for mode in ("pooled", "mean_of_folds"):
        rankings = {}
        for label, payload in runs:
            skills = {p["model_tag"]: p["skill"] for p in payload["profiles"]
                      if p["mode"] == mode}
            per_h = []
            for h in range(1, base_h + 1):
                order = sorted(skills,
                               key=lambda t: (-skills[t][h - 1], t))
                per_h.append(order)
            rankings[label] = per_h
        labels = [label for label, _ in runs]
        flagged = []
        for h in range(1, base_h + 1):
            orders = {label: tuple(rankings[label][h - 1]) for label in labels}
            if len(set(orders.values())) > 1:
                flagged.append(h)
        result["modes"][mode] = {"rankings": rankings,
                                 "reversed_horizons": flagged}
    return result


def render_comparison_md(comparison: dict, runs: list[tuple[str, dict]]) -> str:
    lines = ["# Protocol comparison", "",
             f"- data hash: `{comparison['data_hash']}`",
             f"- horizons: 1..{comparison['h_max']}", ""]
    for mode, block in comparison["modes"].items():
        lines.append(f"## Mode: {mode}")
        lines.append("")
        flagged = block["reversed_horizons"]
        if flagged:
            lines.append(f"Ranking differs between runs at horizons: "
                         f"{', '.join(str(h) for h in flagged)}")
        else:
            lines.append("Model ranking is identical across runs at every "
                         "horizon.")
        lines.append("")
        for label, per_h in block["rankings"].items():
            rows = [[h, " > ".join(per_h[h - 1])]
                    for h in range(1, comparison["h_max"] + 1)]
            lines.append(f"### {label}")
            lines.append("")
            lines.append(_md_table(["h", "ranking (best first)"], rows))
            lines.append("")
    return "\n".join(lines)
