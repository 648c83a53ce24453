"""Command-line entry points and scenario files.

Subcommands:

* ``solve``   - run both fixed-point solvers, emit a JSON solution report
* ``sweep``   - throughput versus connection threshold, CSV curve
* ``trace``   - one search trace (cumulative time, best reward), CSV
* ``compare`` - fixed-scan strategies versus optimal stopping, CSV
* ``twotier`` - two-tier load-balancing realizations, CSV

A scenario is a single JSON document; omitted sections and keys fall
back to the reference configuration (5 ms sync period, 10 ms broadcast
period, 20 ms random access, 10 s data sessions, 64 beam pairs, 1 GHz
bandwidth, -10 dB average SNR and admission threshold, 7 dB shadowing,
mean load 10).  dB-valued keys carry a _db suffix and are converted to
linear ratios on load.  Every command takes a mandatory ``--seed`` and
writes deterministic bytes: same scenario, flags, and seed give the
same file.  ``--plot`` additionally renders a figure next to the data
file. Errors name the offending scenario key and exit nonzero.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import ChannelModel, LoadModel, RngStream, SystemParams
from .sim import sample_trace, threshold_sweep
from .solver import (
    MetricDistribution,
    sample_reward_distribution,
    solve_bisection,
    solve_iterative,
)
from .twotier import (
    ASSOCIATION_SCHEMES,
    DEFAULT_STRATEGIES,
    TwoTierConfig,
    associate,
    compare_schemes,
)

__all__ = ["Scenario", "ScenarioError", "load_scenario", "main"]


class ScenarioError(ValueError):
    """Scenario file problem; the message names the offending key."""


_SYSTEM_DEFAULTS = {
    "t_syn_s": 0.005,
    "t_sib_s": 0.01,
    "t_ra_s": 0.02,
    "t_data_s": 10.0,
    "beam_pairs": 64,
    "bandwidth_hz": 1e9,
    "snr_threshold_db": -10.0,
}
_CHANNEL_DEFAULTS = {"snr_avg_db": -10.0, "shadow_sigma_db": 7.0}
_LOAD_DEFAULTS = {"mean_active_ues": 10.0, "count_distribution": "poisson"}
_METRIC_DEFAULTS = {"kind": "sampled", "n_samples": 1_000_000, "q": None, "r_max": None}
_SOLVER_DEFAULTS = {
    "bisection_rel_tol": 1e-10,
    "iteration_rel_tol": 1e-8,
    "max_iterations": 500,
}
_SIMULATION_DEFAULTS = {"n_periods": 10_000, "max_cells": 1_000_000}
_TWOTIER_KEYS = (
    "macro_position",
    "macro_tx_power_dbm",
    "macro_carrier_ghz",
    "macro_bandwidth_hz",
    "micro_positions",
    "micro_tx_power_dbm",
    "micro_carrier_ghz",
    "micro_bandwidth_hz",
    "micro_beam_gain_db",
    "n_ues",
    "half_width_m",
    "pathloss_exponent",
    "shadow_sigma_db",
    "noise_psd_dbm_hz",
    "noise_figure_db",
)


@dataclass(frozen=True)
class Scenario:
    """Validated scenario: every module's configuration in one object."""

    params: SystemParams
    channel: ChannelModel
    load: LoadModel
    metric_kind: str
    n_samples: int
    binary_q: float | None
    binary_r_max: float | None
    bisection_rel_tol: float
    iteration_rel_tol: float
    max_iterations: int
    n_periods: int
    max_cells: int
    twotier: TwoTierConfig


def _merge(path: str, given: dict, defaults: dict) -> dict:
    if not isinstance(given, dict):
        raise ScenarioError(f"{path} must be an object")
    for key in given:
        if key not in defaults:
            raise ScenarioError(f"{path}.{key} is not a recognized key")
    merged = dict(defaults)
    merged.update(given)
    return merged


def _number(path: str, value) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ScenarioError(f"{path} must be a number, got {value!r}")
    return float(value)


def _db_to_linear(path: str, value) -> float:
    # null or "-inf" means no threshold
    if value is None or value == "-inf":
        return -math.inf
    return 10.0 ** (_number(path, value) / 10.0)


def load_scenario(path: str | None) -> Scenario:
    """Parse and validate a scenario file; None loads the defaults."""
    if path is None:
        doc = {}
    else:
        try:
            doc = json.loads(Path(path).read_text())
        except OSError as exc:
            raise ScenarioError(f"cannot read scenario file: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ScenarioError(f"scenario is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ScenarioError("scenario must be a JSON object")
    known = ("system", "channel", "load", "metric_model", "solver", "simulation", "twotier")
    for key in doc:
        if key not in known:
            raise ScenarioError(f"scenario.{key} is not a recognized section")

    sys_doc = _merge("scenario.system", doc.get("system", {}), _SYSTEM_DEFAULTS)
    try:
        params = SystemParams(
            t_syn=_number("scenario.system.t_syn_s", sys_doc["t_syn_s"]),
            t_sib=_number("scenario.system.t_sib_s", sys_doc["t_sib_s"]),
            t_ra=_number("scenario.system.t_ra_s", sys_doc["t_ra_s"]),
            t_data=_number("scenario.system.t_data_s", sys_doc["t_data_s"]),
            beam_pairs=int(_number("scenario.system.beam_pairs", sys_doc["beam_pairs"])),
            bandwidth_hz=_number("scenario.system.bandwidth_hz", sys_doc["bandwidth_hz"]),
            snr_threshold=_db_to_linear(
                "scenario.system.snr_threshold_db", sys_doc["snr_threshold_db"]
            ),
        )
    except ValueError as exc:
        raise ScenarioError(f"scenario.system: {exc}") from exc

    ch_doc = _merge("scenario.channel", doc.get("channel", {}), _CHANNEL_DEFAULTS)
    try:
        channel = ChannelModel(
            snr_avg=10.0 ** (_number("scenario.channel.snr_avg_db", ch_doc["snr_avg_db"]) / 10.0),
            shadow_sigma_db=_number(
                "scenario.channel.shadow_sigma_db", ch_doc["shadow_sigma_db"]
            ),
        )
    except ValueError as exc:
        raise ScenarioError(f"scenario.channel: {exc}") from exc

    load_doc = _merge("scenario.load", doc.get("load", {}), _LOAD_DEFAULTS)
    try:
        load = LoadModel(
            mean_active_ues=_number(
                "scenario.load.mean_active_ues", load_doc["mean_active_ues"]
            ),
            count_distribution=load_doc["count_distribution"],
        )
    except ValueError as exc:
        raise ScenarioError(f"scenario.load: {exc}") from exc

    met_doc = _merge("scenario.metric_model", doc.get("metric_model", {}), _METRIC_DEFAULTS)
    kind = met_doc["kind"]
    if kind not in ("sampled", "binary"):
        raise ScenarioError("scenario.metric_model.kind must be 'sampled' or 'binary'")
    binary_q = binary_r_max = None
    if kind == "binary":
        if met_doc["q"] is None or met_doc["r_max"] is None:
            raise ScenarioError("scenario.metric_model: binary kind needs q and r_max")
        binary_q = _number("scenario.metric_model.q", met_doc["q"])
        binary_r_max = _number("scenario.metric_model.r_max", met_doc["r_max"])
        if not 0.0 < binary_q <= 1.0:
            raise ScenarioError("scenario.metric_model.q must be in (0, 1]")
        if binary_r_max <= 0:
            raise ScenarioError("scenario.metric_model.r_max must be positive")
    n_samples = int(_number("scenario.metric_model.n_samples", met_doc["n_samples"]))
    if n_samples < 1:
        raise ScenarioError("scenario.metric_model.n_samples must be >= 1")

    sol_doc = _merge("scenario.solver", doc.get("solver", {}), _SOLVER_DEFAULTS)
    sim_doc = _merge("scenario.simulation", doc.get("simulation", {}), _SIMULATION_DEFAULTS)
    n_periods = int(_number("scenario.simulation.n_periods", sim_doc["n_periods"]))
    max_cells = int(_number("scenario.simulation.max_cells", sim_doc["max_cells"]))
    if n_periods < 1:
        raise ScenarioError("scenario.simulation.n_periods must be >= 1")
    if max_cells < 1:
        raise ScenarioError("scenario.simulation.max_cells must be >= 1")

    tt_doc = doc.get("twotier", {})
    if not isinstance(tt_doc, dict):
        raise ScenarioError("scenario.twotier must be an object")
    for key in tt_doc:
        if key not in _TWOTIER_KEYS:
            raise ScenarioError(f"scenario.twotier.{key} is not a recognized key")
    kwargs = dict(tt_doc)
    for tuple_key in ("macro_position", "micro_positions"):
        if tuple_key in kwargs:
            try:
                if tuple_key == "macro_position":
                    kwargs[tuple_key] = tuple(float(v) for v in kwargs[tuple_key])
                else:
                    kwargs[tuple_key] = tuple(
                        tuple(float(v) for v in pos) for pos in kwargs[tuple_key]
                    )
            except (TypeError, ValueError) as exc:
                raise ScenarioError(f"scenario.twotier.{tuple_key}: {exc}") from exc
    try:
        twotier = TwoTierConfig(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ScenarioError(f"scenario.twotier: {exc}") from exc

    return Scenario(
        params=params,
        channel=channel,
        load=load,
        metric_kind=kind,
        n_samples=n_samples,
        binary_q=binary_q,
        binary_r_max=binary_r_max,
        bisection_rel_tol=_number(
            "scenario.solver.bisection_rel_tol", sol_doc["bisection_rel_tol"]
        ),
        iteration_rel_tol=_number(
            "scenario.solver.iteration_rel_tol", sol_doc["iteration_rel_tol"]
        ),
        max_iterations=int(_number("scenario.solver.max_iterations", sol_doc["max_iterations"])),
        n_periods=n_periods,
        max_cells=max_cells,
        twotier=twotier,
    )


def _build_distribution(scenario: Scenario, stream: RngStream) -> MetricDistribution:
    """Reward distribution per the scenario's metric model.

    Binary models are exact two-atom distributions (no sampling); the
    sampled kind draws from substream (1,).
    """
    if scenario.metric_kind == "binary":
        params = scenario.params
        top = params.bandwidth_hz * params.t_data * scenario.binary_r_max
        return MetricDistribution.from_atoms(
            [0.0, top], [1.0 - scenario.binary_q, scenario.binary_q], p_gamma=1.0
        )
    return sample_reward_distribution(
        scenario.params,
        scenario.channel,
        scenario.load,
        stream.generator(1),
        scenario.n_samples,
    )


def _solve_both(scenario: Scenario, stream: RngStream):
    dist = _build_distribution(scenario, stream)
    bis = solve_bisection(dist, scenario.params, rel_tol=scenario.bisection_rel_tol)
    itr = solve_iterative(
        dist,
        scenario.params,
        rel_tol=scenario.iteration_rel_tol,
        max_iter=scenario.max_iterations,
    )
    return dist, bis, itr


def _write_csv(path: str, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _cell(value):
    # floats go through float() so numpy scalars print identically to python floats
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return value


def cmd_solve(args) -> int:
    scenario = load_scenario(args.scenario)
    stream = RngStream(args.seed)
    dist, bis, itr = _solve_both(scenario, stream)
    delta = abs(bis.lambda_star - itr.lambda_star) / bis.lambda_star
    payload = {
        "lambda_star_bps": bis.lambda_star,
        "mu_bps_hz": bis.mu,
        "reward_threshold_bits": bis.reward_threshold,
        "p_gamma": dist.p_gamma,
        "bisection": {
            "lambda_star_bps": bis.lambda_star,
            "residual_bits": bis.residual,
            "trace": [[k, lam] for k, lam in bis.trace],
        },
        "iteration": {
            "lambda_star_bps": itr.lambda_star,
            "residual_bits": itr.residual,
            "trace": [[k, lam] for k, lam in itr.trace],
        },
        "cross_solver_delta_rel": delta,
    }
    Path(args.out).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    if args.plot:
        from . import figures

        figures.plot_solve(args.out, _plot_path(args.out))
    return 0


def _sweep_grid(scenario: Scenario, args, stream: RngStream) -> np.ndarray:
    mu_max = args.mu_max
    if mu_max is None:
        _, bis, _ = _solve_both(scenario, stream)
        mu_max = 3.0 * bis.mu
    if mu_max <= args.mu_min:
        raise ScenarioError("--mu-max must exceed --mu-min")
    if args.mu_points < 1:
        raise ScenarioError("--mu-points must be >= 1")
    return np.linspace(args.mu_min, mu_max, args.mu_points)


def cmd_sweep(args) -> int:
    scenario = load_scenario(args.scenario)
    stream = RngStream(args.seed)
    grid = _sweep_grid(scenario, args, stream)
    n_periods = args.periods or scenario.n_periods
    result = threshold_sweep(
        scenario.params,
        scenario.channel,
        scenario.load,
        grid,
        n_periods,
        stream,
        max_cells=scenario.max_cells,
    )
    rows = [
        (_cell(m), _cell(t), _cell(s), _cell(c))
        for m, t, s, c in zip(result.mu, result.throughput, result.std_err, result.mean_cells)
    ]
    _write_csv(args.out, ["mu", "throughput_bps", "std_err_bps", "mean_cells"], rows)
    if args.plot:
        from . import figures

        figures.plot_sweep(args.out, _plot_path(args.out))
    return 0


def cmd_trace(args) -> int:
    scenario = load_scenario(args.scenario)
    stream = RngStream(args.seed)
    points = sample_trace(
        scenario.params, scenario.channel, scenario.load, args.cells, stream.generator(0, 0)
    )
    rows = [(n, _cell(t), _cell(u)) for n, t, u in points]
    _write_csv(args.out, ["n", "T_n_s", "U_n_bits"], rows)
    if args.plot:
        from . import figures

        figures.plot_trace(args.out, _plot_path(args.out))
    return 0


def cmd_compare(args) -> int:
    scenario = load_scenario(args.scenario)
    stream = RngStream(args.seed)
    strategies = args.strategies.split(",") if args.strategies else list(DEFAULT_STRATEGIES)
    n_periods = args.periods or scenario.n_periods
    rows = compare_schemes(
        scenario.params,
        scenario.channel,
        scenario.load,
        strategies,
        n_periods,
        stream,
        max_cells=scenario.max_cells,
    )
    out_rows = [
        (r.scheme, "" if r.n_scan is None else r.n_scan, _cell(r.throughput), _cell(r.std_err))
        for r in rows
    ]
    _write_csv(args.out, ["scheme", "n_scan", "throughput_bps", "std_err_bps"], out_rows)
    if args.plot:
        from . import figures

        figures.plot_compare(args.out, _plot_path(args.out))
    return 0


def cmd_twotier(args) -> int:
    scenario = load_scenario(args.scenario)
    stream = RngStream(args.seed)
    config = scenario.twotier
    stations = config.build_stations()
    rows = []
    stds = []
    for r in range(args.seeds):
        result = associate(config, args.scheme, stream.generator(2, r))
        stds.append(float(np.std(result.counts)))
        for b, bs in enumerate(stations):
            rows.append(
                (
                    r,
                    b,
                    bs.tier,
                    _cell(bs.position[0]),
                    _cell(bs.position[1]),
                    int(result.counts[b]),
                )
            )
    rows.append(("aggregate", "", "", "", "", _cell(float(np.mean(stds)))))
    _write_csv(args.out, ["realization", "bs_id", "tier", "x_m", "y_m", "ue_count"], rows)
    if args.plot:
        from . import figures

        figures.plot_twotier(args.out, _plot_path(args.out))
    return 0


def _plot_path(out: str) -> str:
    return str(Path(out).with_suffix(".png"))


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cellselect",
        description="Load-aware cell selection: threshold solvers and experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--scenario", help="scenario JSON path (defaults when omitted)")
        p.add_argument("--seed", type=int, required=True, help="base random seed (u64)")
        p.add_argument("--out", required=True, help="output file path")
        p.add_argument(
            "--plot", action="store_true", help="also render a figure next to the output"
        )

    p = sub.add_parser("solve", help="solve for the optimal threshold (JSON)")
    common(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("sweep", help="throughput vs threshold curve (CSV)")
    common(p)
    p.add_argument("--periods", type=int, help="periods per grid point")
    p.add_argument("--mu-min", type=float, default=0.0, help="grid start, bit/s/Hz")
    p.add_argument("--mu-max", type=float, help="grid end; defaults to 3x the solved optimum")
    p.add_argument("--mu-points", type=int, default=41, help="grid size")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("trace", help="one search trace (CSV)")
    common(p)
    p.add_argument("--cells", type=int, default=30, help="number of cells to scan")
    p.set_defaults(func=cmd_trace)

    p = sub.add_parser("compare", help="search strategies vs optimal stopping (CSV)")
    common(p)
    p.add_argument("--periods", type=int, help="periods per strategy")
    p.add_argument(
        "--strategies",
        help="comma list, e.g. max_power:10,max_metric:30,optimal_stopping",
    )
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("twotier", help="two-tier load-balancing realizations (CSV)")
    common(p)
    p.add_argument("--scheme", required=True, choices=ASSOCIATION_SCHEMES)
    p.add_argument("--seeds", type=int, default=100, help="number of realizations")
    p.set_defaults(func=cmd_twotier)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if not 0 <= args.seed < 2**64:
        print("error: --seed must fit in an unsigned 64-bit integer", file=sys.stderr)
        return 1
    try:
        return args.func(args)
    except (ScenarioError, ValueError, RuntimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
