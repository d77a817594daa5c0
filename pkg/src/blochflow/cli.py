"""Command-line runner: JSON config plus flag overrides, delimited output,
summary verdicts, and rendered figures.

Exit codes: 0 success, 1 configuration problem, 2 numerical failure
(non-finite trajectories or an everywhere-singular classical reduction).
"""
from __future__ import annotations

import argparse
import os
import sys

from . import report, scenarios
from .scenarios import ConfigError, NumericalFailure


class _Parser(argparse.ArgumentParser):
    """Raise instead of exiting so flag mistakes map to exit code 1."""

    def error(self, message):
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(
        prog="blochflow",
        description="Simulate time-dependent qubit dynamics, reduce them to "
                    "classical stochastic processes, certify P/CP "
                    "divisibility, and track information backflow.")
    p.add_argument("--config", metavar="PATH",
                   help="JSON configuration document")
    p.add_argument("--scenario", choices=scenarios.SCENARIOS,
                   help="scenario name (overrides config)")
    p.add_argument("--param", action="append", default=[],
                   metavar="KEY=VALUE",
                   help="scenario parameter override; repeatable")
    p.add_argument("--t-max", type=float, dest="t_max",
                   help="propagation horizon")
    p.add_argument("--steps", type=int, help="number of grid steps")
    p.add_argument("--chi", type=float, help="basis polar angle")
    p.add_argument("--xi", type=float, help="basis azimuthal angle")
    p.add_argument("--mu", type=float, help="prior weight of the first state")
    p.add_argument("--tol", type=float, help="verdict tolerance")
    p.add_argument("--out-dir", dest="out_dir", help="output directory")
    p.add_argument("--sweep", metavar="KEY:START:STOP:COUNT",
                   help="sweep a parameter instead of a single run")
    p.add_argument("--no-figures", action="store_true",
                   help="skip figure rendering")
    return p


def _coerce(raw: str):
    try:
        return int(raw)
    except ValueError:
        pass
    try:
        return float(raw)
    except ValueError:
        pass
    if "," in raw:
        try:
            return [float(part) for part in raw.split(",")]
        except ValueError:
            pass
    return raw


def _parse_param(text: str):
    key, sep, raw = text.partition("=")
    key, raw = key.strip(), raw.strip()
    if not sep or not key or not raw:
        raise ConfigError(f"--param needs KEY=VALUE, got '{text}'")
    return key, _coerce(raw)


def _parse_sweep(text: str) -> dict:
    parts = text.split(":")
    if len(parts) != 4:
        raise ConfigError(f"--sweep needs KEY:START:STOP:COUNT, got '{text}'")
    key, start, stop, count = parts
    if not key:
        raise ConfigError("--sweep key must be nonempty")
    try:
        return {"key": key, "start": float(start), "stop": float(stop),
                "count": int(count)}
    except ValueError as exc:
        raise ConfigError(f"--sweep has non-numeric bounds: '{text}'") \
            from exc


def merge_flags(doc: dict, args: argparse.Namespace) -> dict:
    doc = dict(doc)
    if args.scenario is not None:
        doc["scenario"] = args.scenario
    params = dict(doc.get("params", {}))
    for item in args.param:
        key, value = _parse_param(item)
        params[key] = value
    if params:
        doc["params"] = params
    grid = dict(doc.get("grid", {}))
    if args.t_max is not None:
        grid["t_max"] = args.t_max
    if args.steps is not None:
        grid["steps"] = args.steps
    if grid:
        doc["grid"] = grid
    for key in ("chi", "xi", "mu", "tol", "out_dir"):
        value = getattr(args, key)
        if value is not None:
            doc[key] = value
    if args.sweep is not None:
        doc["sweep"] = _parse_sweep(args.sweep)
    return doc


def _run_single(config, render: bool) -> None:
    result = scenarios.compute(config)
    out = report.ensure_dir(config.out_dir)
    csv_path = os.path.join(out, "trajectory.csv")
    json_path = os.path.join(out, "summary.json")
    report.write_trajectory_csv(csv_path, result.columns)
    report.write_summary_json(json_path, result.summary)
    written = [csv_path, json_path]
    if render:
        fig_path = os.path.join(out, "trajectory.png")
        title = f"{config.scenario} (chi={config.chi:.4g}, xi={config.xi:.4g})"
        report.render_trajectory_figure(fig_path, result.grid,
                                        result.columns, title)
        written.append(fig_path)
    q = result.summary["quantum"]
    cl = result.summary["classical"][0]
    print(f"quantum: P-divisible={q['p_divisible']} "
          f"(margin {q['worst_p_margin']:.3e}), "
          f"CP-divisible={q['cp_divisible']} "
          f"(margin {q['worst_cp_margin']:.3e})")
    max_f = cl["max_f_t"]
    max_f_text = "n/a" if max_f is None else f"{max_f:.3e}"
    print(f"classical (chi={config.chi:.4g}, xi={config.xi:.4g}): "
          f"max f_t={max_f_text} divisible={cl['p_divisible']} "
          f"invertible={cl['invertible']}")
    print("wrote " + " ".join(written))


def _run_sweep(config, render: bool) -> None:
    key = config.sweep["key"]
    rows = scenarios.run_sweep(config)
    out = report.ensure_dir(config.out_dir)
    csv_path = os.path.join(out, "sweep.csv")
    report.write_sweep_csv(csv_path, key, rows)
    written = [csv_path]
    if render:
        fig_path = os.path.join(out, "sweep.png")
        report.render_sweep_figure(fig_path, key, rows)
        written.append(fig_path)
    flips = sum(1 for a, b in zip(rows, rows[1:])
                if a["quantum_p_div"] != b["quantum_p_div"])
    print(f"swept {key} over {len(rows)} values; "
          f"quantum P verdict changes: {flips}")
    print("wrote " + " ".join(written))


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        doc = scenarios.load_config_file(args.config) if args.config else {}
        if not isinstance(doc, dict):
            raise ConfigError("config document must be a JSON object")
        doc = merge_flags(doc, args)
        if "scenario" not in doc:
            raise ConfigError("a scenario is required "
                              "(--scenario or a config file)")
        config = scenarios.config_from_document(doc)
        if config.sweep is not None:
            _run_sweep(config, not args.no_figures)
        else:
            _run_single(config, not args.no_figures)
        return 0
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NumericalFailure as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
