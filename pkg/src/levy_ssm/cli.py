"""Command-line surface: simulate, filter, validate, downsample.

Configuration comes from a flat ``key = value`` text file, overridable by
flags; the seed additionally honours the LEVY_SSM_SEED environment variable
(precedence: flag, then environment, then config file, then default).
Every output file records the generator name and seed in its header.

Exit codes: 0 success, 1 validation-suite failure, 2 usage or parse error.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

import numpy as np

from .dataio import (
    Series,
    SeriesFormatError,
    parse_config,
    read_series,
    svg_state_plot,
    write_series,
    write_table,
)
from .filtering import FilterConfig, run_filter
from .params import GHParams, GIGParams, TruncationBudget
from .ssm import LangevinSSM, simulate_path
from .validate import report_json, run_all

log = logging.getLogger(__name__)

_DEFAULTS = {
    "theta": -0.5,
    "mu_w": 0.0,
    "sigma_w": 1.0,
    "mu": 0.0,
    "lam": -0.8,
    "delta": 1.0,
    "gamma": 0.01,
    "sigma_eps": 0.1,
    "n_iter": 100,
    "burn_in": 0,
    "z1": "auto",
    "gamma_max": 2000.0,
    "seed": 0,
    "n_obs": 200,
    "t_end": 100.0,
    "val_n": 2000,
    "val_resamples": 20000,
}


def _coerce(key: str, value: str):
    default = _DEFAULTS[key]
    if key == "z1":
        return "auto" if value.strip().lower() == "auto" else float(value)
    if isinstance(default, int):
        return int(value)
    if isinstance(default, float):
        return float(value)
    return value


def load_run_config(args) -> dict:
    """Merge defaults, config file, environment, and flag overrides."""
    cfg = dict(_DEFAULTS)
    if getattr(args, "config", None):
        raw = parse_config(args.config)
        unknown = sorted(set(raw) - set(_DEFAULTS))
        if unknown:
            raise SeriesFormatError(
                f"{args.config}: unknown config keys {unknown}; "
                f"known keys are {sorted(_DEFAULTS)}"
            )
        for k, v in raw.items():
            cfg[k] = _coerce(k, v)
    env_seed = os.environ.get("LEVY_SSM_SEED")
    if env_seed is not None:
        cfg["seed"] = int(env_seed)
    if getattr(args, "seed", None) is not None:
        cfg["seed"] = int(args.seed)
    if getattr(args, "iters", None) is not None:
        cfg["n_iter"] = int(args.iters)
    if getattr(args, "budget", None) is not None:
        cfg["gamma_max"] = float(args.budget)
    if getattr(args, "burn_in", None) is not None:
        cfg["burn_in"] = int(args.burn_in)
    if cfg["sigma_eps"] <= 0.0:
        raise ValueError("sigma_eps must be > 0")
    return cfg


def _build_ssm(cfg: dict) -> LangevinSSM:
    gig = GIGParams(lam=cfg["lam"], delta=cfg["delta"], gamma=cfg["gamma"])
    gh = GHParams(gig=gig, mu_w=cfg["mu_w"], sigma_w=cfg["sigma_w"], mu=cfg["mu"])
    return LangevinSSM(theta=cfg["theta"], sigma_eps=cfg["sigma_eps"], gh=gh)


def _meta(cfg: dict) -> dict:
    keys = (
        "seed theta mu_w sigma_w mu lam delta gamma sigma_eps "
        "n_iter burn_in z1 gamma_max"
    ).split()
    meta = {"generator": "philox"}
    meta.update({k: cfg[k] for k in keys})
    return meta


def _sibling(out: Path, tag: str) -> Path:
    return out.with_suffix(f".{tag}.csv")


def cmd_simulate(args) -> int:
    cfg = load_run_config(args)
    ssm = _build_ssm(cfg)
    if args.times:
        times = read_series(args.times).times
    else:
        n, t_end = cfg["n_obs"], cfg["t_end"]
        times = np.linspace(t_end / n, t_end, n)
    budget = TruncationBudget(cfg["gamma_max"])
    rng = np.random.Generator(np.random.Philox(key=cfg["seed"]))
    states, obs, seqs = simulate_path(
        ssm, np.zeros(ssm.dim), times, budget, rng, z1=cfg["z1"]
    )
    out = Path(args.out)
    meta = _meta(cfg)
    write_table(out, ["time", "y"], zip(times, obs), meta)
    write_table(
        _sibling(out, "truth"),
        ["time", "x", "xdot"],
        zip(times, states[:, 0], states[:, 1]),
        meta,
    )
    jump_rows = [(t, z) for seq in seqs for t, z in zip(seq.times, seq.sizes)]
    write_table(_sibling(out, "jumps"), ["time", "size"], jump_rows, meta)
    log.info(
        "wrote %d observations to %s (+ .truth/.jumps siblings)", len(times), out
    )
    return 0


def cmd_filter(args) -> int:
    cfg = load_run_config(args)
    ssm = _build_ssm(cfg)
    series = read_series(args.input)
    fcfg = FilterConfig(
        n_iter=cfg["n_iter"],
        burn_in=cfg["burn_in"],
        budget=TruncationBudget(cfg["gamma_max"]),
        z1=cfg["z1"],
        seed=cfg["seed"],
    )
    results = run_filter(ssm, zip(series.times, series.values), fcfg)
    header = [
        "time",
        "mean_x",
        "mean_xdot",
        "var_x",
        "var_xdot",
        "cov_x_xdot",
        "acceptance_rate",
        "log_marginal",
    ]
    rows = []
    for t, res in zip(series.times, results):
        st = res.collapsed
        rows.append(
            (
                t,
                st.mean[0],
                st.mean[1],
                st.cov[0, 0],
                st.cov[1, 1],
                st.cov[0, 1],
                res.acceptance_rate,
                res.log_marginal,
            )
        )
    meta = _meta(cfg)
    if results:
        meta["log_marginal_total"] = repr(sum(r.log_marginal for r in results))
    write_table(args.out, header, rows, meta)
    if args.svg:
        if not rows:
            raise ValueError("cannot plot an empty filter result")
        arr = np.asarray(rows)
        svg_state_plot(
            args.svg,
            arr[:, 0],
            arr[:, 1],
            np.sqrt(arr[:, 3]),
            truth_times=series.times,
            truth_values=series.values,
            title="position estimate with +-3 sigma band (dashed: observations)",
        )
    log.info("filtered %d observations to %s", len(series), args.out)
    return 0


def cmd_validate(args) -> int:
    cfg = load_run_config(args)
    results = run_all(
        seed=cfg["seed"],
        n_ks=cfg["val_n"],
        gamma_max=cfg["gamma_max"],
        resamples=cfg["val_resamples"],
    )
    doc = report_json(results, cfg["seed"])
    if args.out:
        Path(args.out).write_text(doc + "\n", encoding="utf-8")
    else:
        print(doc)
    failed = [r.name for r in results if not r.passed]
    if failed:
        log.error("failed checks: %s", ", ".join(failed))
        return 1
    return 0


def cmd_downsample(args) -> int:
    if args.every < 1:
        raise ValueError("--every must be >= 1")
    series = read_series(args.input)
    if len(series) == 0:
        write_series(args.out, series)
        return 0
    if args.every >= len(series):
        log.warning(
            "--every %d >= %d rows; output contains a single row",
            args.every,
            len(series),
        )
    times = series.times[:: args.every]
    values = series.values[:: args.every]
    meta = dict(series.meta)
    meta["downsample_every"] = str(args.every)
    meta["time_origin"] = repr(float(times[0]))
    out = Series(times - times[0], values, meta)
    write_series(args.out, out)
    log.info("kept %d of %d rows into %s", len(out), len(series), args.out)
    return 0


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="flat key = value config file")
    common.add_argument("--seed", type=int, help="RNG seed (overrides env and config)")
    common.add_argument("--out", type=Path, help="output file path")
    common.add_argument("--iters", type=int, help="chain length per observation")
    common.add_argument("--budget", type=float, help="Poisson epoch ceiling per unit time")
    common.add_argument("--burn-in", dest="burn_in", type=int, help="chain entries to discard")

    p = argparse.ArgumentParser(
        prog="levy-ssm",
        description="Simulate and filter linear SDEs driven by GH jump processes.",
    )
    sub = p.add_subparsers(dest="command", required=True)

    ps = sub.add_parser("simulate", parents=[common], help="generate a synthetic record")
    ps.add_argument("--times", type=Path, help="series file supplying observation times")
    ps.set_defaults(fn=cmd_simulate, needs_out=True)

    pf = sub.add_parser("filter", parents=[common], help="run the jump-chain filter")
    pf.add_argument("input", type=Path, help="observation series CSV")
    pf.add_argument("--svg", type=Path, help="also write an SVG plot of the estimate")
    pf.set_defaults(fn=cmd_filter, needs_out=True)

    pv = sub.add_parser("validate", parents=[common], help="run the statistical suites")
    pv.set_defaults(fn=cmd_validate, needs_out=False)

    pd = sub.add_parser("downsample", parents=[common], help="keep every k-th row")
    pd.add_argument("input", type=Path, help="series CSV to thin")
    pd.add_argument("--every", type=int, required=True, help="keep one row in this many")
    pd.set_defaults(fn=cmd_downsample, needs_out=True)
    return p


def main(argv=None) -> int:
    logging.basicConfig(
        level=logging.INFO, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr
    )
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.needs_out and args.out is None:
        parser.error(f"{args.command} requires --out")
    try:
        return args.fn(args)
    except (SeriesFormatError, ValueError, OSError) as exc:
        log.error("%s", exc)
        return 2


if __name__ == "__main__":
    sys.exit(main())
