"""Command-line front end: assess real single-column datasets, run simulations."""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .assessment import (
    METHOD_QS,
    METHOD_SCV1,
    METHOD_SCV2,
    conventional_assess,
    derive_cv_params,
    matched_alphas,
    scv1,
    scv2,
)
from .benchmark import (
    SimulationConfig,
    run_simulation,
    write_rmse_table,
    write_selection_freq,
)
from .distributions import parse_model
from .predictors import _predict_sorted, predictor_set

_METHODS = (METHOD_QS, METHOD_SCV1, METHOD_SCV2)
_MISSING_TOKENS = {"", "na", "n/a", "nan", "null", "none"}

_DEFAULTS = {
    "p0": "auto",
    "alphas": "1,2,4,8",
    "methods": "qs,scv1,scv2",
    "set": "zero-ab",
    "replicates": 200,
    "n": 7500,
    "seed": 1,
    "out": "out",
    "zero_filter": False,
    "model": None,
    "input": None,
}


@dataclass
class IngestResult:
    values: np.ndarray
    dropped: int
    zeros_dropped: int


def ingest_csv(path, zero_filter: bool = False) -> IngestResult:
    """Read one numeric column: a headered ``value`` column or a bare single column.

    Empty fields, non-numeric tokens and NaN markers are dropped (counted);
    zeros are dropped too iff ``zero_filter``.
    """
    with open(path, newline="", encoding="utf-8-sig") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValueError(f"{path}: no rows")

    first = rows[0]
    col = 0
    start = 0
    if len(first) > 1:
        header = [c.strip().lower() for c in first]
        if "value" not in header:
            raise ValueError(f"{path}: multi-column files need a 'value' column")
        col = header.index("value")
        start = 1
    elif len(first) == 1 and first[0].strip().lower() == "value":
        start = 1
    # otherwise: a bare single column; the first row is data

    values = []
    dropped = 0
    zeros_dropped = 0
    for row in rows[start:]:
        if col >= len(row):
            dropped += 1
            continue
        token = row[col].strip()
        if token.lower() in _MISSING_TOKENS:
            dropped += 1
            continue
        try:
            v = float(token)
        except ValueError:
            dropped += 1
            continue
        if not np.isfinite(v):
            dropped += 1
            continue
        if zero_filter and v == 0.0:
            zeros_dropped += 1
            continue
        values.append(v)

    if not values:
        raise ValueError(f"{path}: no usable rows ({dropped} dropped)")
    return IngestResult(np.array(values), dropped, zeros_dropped)


def _parse_alphas(text) -> tuple:
    if isinstance(text, (list, tuple)):
        alphas = tuple(float(a) for a in text)
    else:
        alphas = tuple(float(a) for a in str(text).split(",") if a.strip())
    if not alphas:
        raise ValueError("need at least one alpha")
    return alphas


def _parse_methods(text) -> tuple:
    if isinstance(text, (list, tuple)):
        methods = tuple(str(m).strip() for m in text)
    else:
        methods = tuple(m.strip() for m in str(text).split(",") if m.strip())
    for m in methods:
        if m not in _METHODS:
            raise ValueError(f"unknown method {m!r}; expected any of {', '.join(_METHODS)}")
    if not methods:
        raise ValueError("need at least one method")
    return methods


def _resolve_p0(text, n: int) -> float:
    if str(text).lower() == "auto":
        return 1.0 - 1.0 / (2.0 * n)
    p0 = float(text)
    if not 0.0 < p0 < 1.0:
        raise ValueError(f"p0 must lie in (0, 1), got {p0}")
    return p0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tailscore",
        description="Score and select extreme-quantile predictors.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", help="JSON file mirroring the flags; flags override it")
        p.add_argument("--p0", help="target level, or 'auto' for 1 - 1/(2n)")
        p.add_argument("--alphas", help="comma-separated tuning values, e.g. 1,2,4,8")
        p.add_argument("--methods", help="comma-separated subset of qs,scv1,scv2")
        p.add_argument("--set", dest="set", help="predictor set: zero-ab|a|b|ab")
        p.add_argument("--seed", type=int, help="random seed")
        p.add_argument("--out", help="output directory")

    sim = sub.add_parser("simulate", help="Monte Carlo benchmark of the assessment methods")
    sim.add_argument("--model", help="data model grammar, e.g. mix(0.5*unif(0,10)+0.5*gpd(10,1,0.5))")
    sim.add_argument("--n", type=int, help="sample size per replicate")
    sim.add_argument("--replicates", type=int, help="number of Monte Carlo replicates")
    add_common(sim)

    ass = sub.add_parser("assess", help="assess predictors on a single-column CSV dataset")
    ass.add_argument("--input", help="CSV file with a 'value' column or a bare column")
    ass.add_argument("--zero-filter", dest="zero_filter", action="store_true", default=None,
                     help="drop zero values during ingestion")
    add_common(ass)
    return parser


def _merge_config(args: argparse.Namespace) -> dict:
    cfg = dict(_DEFAULTS)
    if getattr(args, "config", None):
        with open(args.config, encoding="utf-8") as fh:
            loaded = json.load(fh)
        unknown = set(loaded) - set(_DEFAULTS)
        if unknown:
            raise ValueError(f"unknown config keys: {', '.join(sorted(unknown))}")
        cfg.update(loaded)
    for key in _DEFAULTS:
        flag = getattr(args, key, None)
        if flag is not None:
            cfg[key] = flag
    return cfg


class _Emitter:
    """Tracks written files so a failed run leaves no partial outputs."""

    def __init__(self, out_dir: Path):
        self.out_dir = out_dir
        self.written = []

    def path(self, name: str) -> Path:
        self.out_dir.mkdir(parents=True, exist_ok=True)
        p = self.out_dir / name
        self.written.append(p)
        return p

    def cleanup(self) -> None:
        for p in self.written:
            try:
                p.unlink(missing_ok=True)
            except OSError:
                pass


def _write_json(path: Path, payload: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _assess_reports(sample, p0, alphas, methods, set_name, seed):
    specs = predictor_set(set_name)
    ys = np.sort(np.asarray(sample, dtype=float))
    predictions = tuple(_predict_sorted(spec, ys, p0) for spec in specs)
    n = ys.size
    reports = {}
    for method in methods:
        if method == METHOD_QS:
            reports[method] = conventional_assess(predictions, p0, sample)
        elif method == METHOD_SCV1:
            a1 = matched_alphas(n, p0, alphas, METHOD_SCV1)
            reports[method] = scv1(specs, p0, a1, sample, seed, predictions=predictions)
        else:
            a2 = matched_alphas(n, p0, alphas, METHOD_SCV2)
            reports[method] = scv2(specs, p0, a2, sample, seed, predictions=predictions)
    return reports


def _run_assess(cfg: dict) -> None:
    if not cfg.get("input"):
        raise ValueError("assess needs --input (or 'input' in the config file)")
    if cfg.get("model"):
        raise ValueError("assess takes --input, not --model")
    ingest = ingest_csv(cfg["input"], zero_filter=bool(cfg["zero_filter"]))
    sample = ingest.values
    p0 = _resolve_p0(cfg["p0"], sample.size)
    alphas = _parse_alphas(cfg["alphas"])
    methods = _parse_methods(cfg["methods"])
    seed = int(cfg["seed"])

    reports = _assess_reports(sample, p0, alphas, methods, cfg["set"], seed)

    emitter = _Emitter(Path(cfg["out"]))
    try:
        config_echo = {
            "command": "assess",
            "input": str(cfg["input"]),
            "n": int(sample.size),
            "rows_dropped": ingest.dropped,
            "zeros_dropped": ingest.zeros_dropped,
            "p0": p0,
            "alphas": list(alphas),
            "methods": list(methods),
            "predictor_set": cfg["set"],
            "seed": seed,
            "zero_filter": bool(cfg["zero_filter"]),
        }
        for method, report in reports.items():
            payload = {"config": config_echo, **report.to_dict()}
            _write_json(emitter.path(f"report_{method}.json"), payload)

        lines = [
            "tailscore assessment",
            f"input: {cfg['input']} (n={sample.size}, dropped={ingest.dropped}, "
            f"zeros_dropped={ingest.zeros_dropped})",
            f"p0: {p0!r}",
            f"alphas: {', '.join(repr(a) for a in alphas)}",
            f"predictor set: {cfg['set']}   seed: {seed}",
            "",
        ]
        for method, report in reports.items():
            lines.append(
                f"{method:5s} selected {report.selected_label} "
                f"(index {report.selected_index}), "
                f"prediction at p0 = {report.selected_prediction!r}"
            )
            for plan in report.plans:
                lines.append(
                    f"      alpha={plan.alpha:g}: k={plan.k}, n_c={plan.n_c}, p_c={plan.p_c!r}"
                )
        summary = emitter.path("summary.txt")
        summary.write_text("\n".join(lines) + "\n", encoding="utf-8")
    except Exception:
        emitter.cleanup()
        raise

    print(f"wrote {len(emitter.written)} files to {emitter.out_dir}")


def _run_simulate(cfg: dict) -> None:
    if not cfg.get("model"):
        raise ValueError("simulate needs --model (or 'model' in the config file)")
    if cfg.get("input"):
        raise ValueError("simulate takes --model, not --input")
    model = parse_model(cfg["model"])
    n = int(cfg["n"])
    p0 = None if str(cfg["p0"]).lower() == "auto" else _resolve_p0(cfg["p0"], n)
    sim_config = SimulationConfig(
        model=model,
        n=n,
        replicates=int(cfg["replicates"]),
        p0=p0,
        alphas=_parse_alphas(cfg["alphas"]),
        predictor_set=str(cfg["set"]),
        master_seed=int(cfg["seed"]),
        methods=_parse_methods(cfg["methods"]),
    )
    result = run_simulation(sim_config)

    emitter = _Emitter(Path(cfg["out"]))
    try:
        write_rmse_table(result, emitter.path("rmse_table.csv"), cfg["model"], str(cfg["set"]))
        write_selection_freq(result, emitter.path("selection_freq.csv"))

        p0 = result.config.resolved_p0
        lines = [
            "tailscore simulation",
            f"model: {cfg['model']}",
            f"n={n}, replicates={sim_config.replicates}, p0={p0!r}",
            f"alphas: {', '.join(repr(a) for a in sim_config.alphas)}",
            f"predictor set: {cfg['set']}   master seed: {sim_config.master_seed}",
            f"true quantile at p0: {result.true_quantile!r}",
            "",
        ]
        for method in (METHOD_SCV1, METHOD_SCV2):
            if method in sim_config.methods:
                plans = [
                    derive_cv_params(n, p0, a, method)
                    for a in matched_alphas(n, p0, sim_config.alphas, method)
                ]
                lines.append(
                    f"{method} plans: "
                    + "; ".join(f"alpha={pl.alpha:g} k={pl.k} n_c={pl.n_c}" for pl in plans)
                )
        lines.append("")
        labels = {spec.index: spec.label for spec in sim_config.specs()}
        for key, rmse in result.rmse.items():
            extra = ""
            if key in result.selection_counts:
                counts = result.selection_counts[key]
                modal = max(counts, key=lambda i: (counts[i], -i))
                extra = f"   modal selection {labels.get(modal, modal)} ({counts[modal]}/{sim_config.replicates})"
            lines.append(f"rmse[{key}] = {rmse!r}{extra}")
        summary = emitter.path("summary.txt")
        summary.write_text("\n".join(lines) + "\n", encoding="utf-8")
    except Exception:
        emitter.cleanup()
        raise

    print(f"wrote {len(emitter.written)} files to {emitter.out_dir}")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _merge_config(args)
        if args.command == "simulate":
            _run_simulate(cfg)
        else:
            _run_assess(cfg)
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
