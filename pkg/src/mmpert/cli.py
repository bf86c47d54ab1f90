"""Command-line front end.

    mmpert simulate|compare|sweep|isorisk|verify [--config FILE] [--out DIR]
           [--seed N] [--paths N] [--workers N]

Configs are flat JSON objects; every key is optional and defaults to the
reference parameter set below. Exit codes: 0 success, 1 verification
failure, 2 configuration error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .core import MarketEnv, validate_env
from .multi import MultiEnv, rank_inventory_configs, validate_multi_env
from .oracle import verification_suite, write_report
from .price_models import PriceModel
from .simulation import Policy, SimConfig, run_batch, run_batch_multi
from .stats import PATHS_FIELDS, SUMMARY_FIELDS, summarize, timeseries_records, write_csv

EXIT_OK, EXIT_VERIFY, EXIT_CONFIG, EXIT_IO = 0, 1, 2, 3

DEFAULTS = {
    "A": 1000.0, "k": 1.0, "z": 0.5, "sigma": 0.5,
    "a": 0.1, "mu": 3009.0, "S0": 3000.0,
    "epsilon": 0.001, "eta": 1.0, "nu": 1.0, "alpha": 0.05,
    "T": 1.0, "n_steps": 1000, "n_paths": 10000, "seed": 0,
    "policy": "first_order_full", "model": "ou",
    "record_paths": False, "quad_nodes": 32, "label": "",
    "workers": None, "out": "out",
}
# keys only meaningful to a particular command
EXTRA_KEYS = {"arms", "param", "values", "Omega", "Lambda", "rho", "configs", "t", "n_mc",
              "price_model"}
SHARED_ACROSS_ARMS = ("seed", "n_paths", "n_steps", "T", "S0")


class ConfigError(Exception):
    pass


# ----------------------------------------------------------------- config

def load_config(path: str | None) -> dict:
    cfg = dict(DEFAULTS)
    if path is None:
        return cfg
    try:
        with open(path) as fh:
            user = json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from None
    if not isinstance(user, dict):
        raise ConfigError(f"{path}: top level must be a JSON object")
    unknown = sorted(set(user) - set(DEFAULTS) - EXTRA_KEYS)
    if unknown:
        raise ConfigError(f"unknown config key(s): {', '.join(unknown)}")
    cfg.update(user)
    return cfg


def _num(cfg: dict, key: str) -> float:
    value = cfg[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{key} must be a number, got {value!r}")
    return float(value)


def _int(cfg: dict, key: str) -> int:
    value = cfg[key]
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{key} must be an integer, got {value!r}")
    return value


def _require(cfg: dict, key: str):
    if key not in cfg or cfg[key] is None:
        raise ConfigError(f"missing required key: {key}")
    return cfg[key]


def build_env(cfg: dict) -> MarketEnv:
    env = MarketEnv(**{key: _num(cfg, key)
                       for key in ("A", "k", "z", "sigma", "alpha", "epsilon", "eta", "nu")})
    problems = validate_env(env)
    if problems:
        raise ConfigError("invalid parameters: " + "; ".join(problems))
    return env


def build_model(cfg: dict, key: str = "model") -> PriceModel:
    kind = cfg.get(key)
    sigma = _num(cfg, "sigma")
    if kind == "martingale":
        return PriceModel.martingale(sigma)
    if kind == "ou":
        return PriceModel.ou(sigma, _num(cfg, "a"), _num(cfg, "mu"))
    raise ConfigError(f"{key} must be 'martingale' or 'ou', got {kind!r}")


def build_sim(cfg: dict) -> SimConfig:
    try:
        policy = Policy(cfg["policy"])
    except ValueError:
        names = ", ".join(p.value for p in Policy)
        raise ConfigError(f"policy must be one of {names}, got {cfg['policy']!r}") from None
    s0 = cfg["S0"]
    if isinstance(s0, list):
        s0 = [float(v) for v in s0]
    else:
        s0 = _num(cfg, "S0")
    return SimConfig(n_steps=_int(cfg, "n_steps"), T=_num(cfg, "T"),
                     n_paths=_int(cfg, "n_paths"), seed=_int(cfg, "seed"), policy=policy,
                     record_paths=bool(cfg["record_paths"]), s0=s0,
                     quad_nodes=_int(cfg, "quad_nodes"))


def build_multi(cfg: dict) -> tuple[MultiEnv, list[PriceModel]]:
    lam = np.asarray(cfg["Lambda"], dtype=float)
    if lam.ndim != 2 or lam.shape[0] != lam.shape[1]:
        raise ConfigError("Lambda must be a square matrix")
    M = lam.shape[0]
    omega = cfg.get("Omega")
    omega = np.diag(np.broadcast_to(np.asarray(cfg["z"], dtype=float), (M,))) \
        if omega is None else np.asarray(omega, dtype=float)
    menv = MultiEnv(Lambda=lam, Omega=omega, A=cfg["A"], k=cfg["k"], z=cfg["z"],
                    alpha=cfg["alpha"], epsilon=_num(cfg, "epsilon"), eta=_num(cfg, "eta"),
                    nu=_num(cfg, "nu"))
    problems = validate_multi_env(menv)
    if problems:
        raise ConfigError("invalid parameters: " + "; ".join(problems))
    a = np.broadcast_to(np.asarray(cfg["a"], dtype=float), (M,))
    mu = np.broadcast_to(np.asarray(cfg["mu"], dtype=float), (M,))
    sig = np.sqrt(np.diag(lam))
    if cfg["model"] == "martingale":
        models = [PriceModel.martingale(float(s)) for s in sig]
    elif cfg["model"] == "ou":
        models = [PriceModel.ou(float(s), float(ai), float(mi)) for s, ai, mi in zip(sig, a, mu)]
    else:
        raise ConfigError(f"model must be 'martingale' or 'ou', got {cfg['model']!r}")
    return menv, models


def _run(cfg: dict, workers):
    """Simulate one arm described by ``cfg``."""
    sim = build_sim(cfg)
    label = cfg.get("label") or sim.policy.value
    if cfg.get("Lambda") is not None:
        menv, models = build_multi(cfg)
        return run_batch_multi(menv, models, sim, workers=workers, label=label)
    env = build_env(cfg)
    policy_model = build_model(cfg)
    price_model = build_model(cfg, "price_model") if cfg.get("price_model") else policy_model
    return run_batch(env, price_model, sim, policy_model=policy_model, workers=workers,
                     label=label)


def _out_dir(cfg: dict) -> Path:
    out = Path(cfg["out"])
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc.strerror or exc}") from exc
    return out


def _summary_rows(samples) -> list[dict]:
    return [summarize(sample.terminal_pnl).row(sample.label) for sample in samples]


def _print_rows(rows, stream=sys.stdout):
    for row in rows:
        sharpe = row["sharpe"]
        sharpe = "n/a" if sharpe is None else f"{sharpe:.3f}"
        print(f"{row['label']:>24}  mean {row['mean']:10.3f}  sd {row['sd']:9.3f}  "
              f"q01 {row['q01']:10.3f}  sharpe {sharpe}", file=stream)


# --------------------------------------------------------------- commands

def cmd_simulate(cfg: dict) -> int:
    sample = _run(cfg, cfg["workers"])
    out = _out_dir(cfg)
    paths_fields = None if sample.n_assets > 1 else PATHS_FIELDS
    write_csv(sample.records(), out / "paths.csv", paths_fields)
    rows = _summary_rows([sample]) if len(sample) >= 2 else []
    write_csv(rows, out / "summary.csv", SUMMARY_FIELDS)
    if sample.timeseries is not None:
        ts_rows = timeseries_records(sample.timeseries)
        write_csv(ts_rows, out / "timeseries.csv", list(ts_rows[0].keys()))
    _print_rows(rows)
    return EXIT_OK


def _arm_configs(cfg: dict) -> list[dict]:
    arms = _require(cfg, "arms")
    if not isinstance(arms, list) or len(arms) < 2:
        raise ConfigError("arms must be a list of at least two overrides")
    out = []
    for i, arm in enumerate(arms):
        if not isinstance(arm, dict):
            raise ConfigError(f"arm {i} must be an object")
        shared = [key for key in SHARED_ACROSS_ARMS if key in arm]
        if shared:
            raise ConfigError(f"arm {i} may not override {', '.join(shared)} "
                              "(arms share the random draws)")
        unknown = sorted(set(arm) - set(DEFAULTS) - EXTRA_KEYS)
        if unknown:
            raise ConfigError(f"arm {i}: unknown key(s) {', '.join(unknown)}")
        merged = {**cfg, **arm}
        merged.pop("arms", None)
        if not arm.get("label"):
            merged["label"] = f"{merged['model']}/{merged['policy']}"
            if merged.get("price_model"):
                merged["label"] += f" on {merged['price_model']}"
        out.append(merged)
    return out


def cmd_compare(cfg: dict) -> int:
    arms = _arm_configs(cfg)
    samples = [_run(arm, cfg["workers"]) for arm in arms]
    rows = _summary_rows(samples)
    write_csv(rows, _out_dir(cfg) / "compare.csv", SUMMARY_FIELDS)
    _print_rows(rows)
    return EXIT_OK


def cmd_sweep(cfg: dict) -> int:
    param = _require(cfg, "param")
    values = _require(cfg, "values")
    if param not in ("epsilon", "alpha"):
        raise ConfigError(f"param must be 'epsilon' or 'alpha', got {param!r}")
    if not isinstance(values, list) or not values:
        raise ConfigError("values must be a nonempty list")
    if param == "alpha" and cfg["policy"] != Policy.WITH_COSTS.value:
        raise ConfigError("an alpha sweep needs policy 'with_costs' (costs are ignored otherwise)")
    samples = []
    for value in values:
        arm = {**cfg, param: value, "label": f"{param}={value:g}"}
        samples.append(_run(arm, cfg["workers"]))
    rows = _summary_rows(samples)
    write_csv(rows, _out_dir(cfg) / "sweep.csv", SUMMARY_FIELDS)
    _print_rows(rows)
    return EXIT_OK


def cmd_isorisk(cfg: dict) -> int:
    configs = _require(cfg, "configs")
    if cfg.get("Omega") is not None:
        omega = np.asarray(cfg["Omega"], dtype=float)
    elif cfg.get("rho") is not None:
        rho = _num(cfg, "rho")
        omega = np.array([[1.0, rho], [rho, 1.0]])
    else:
        raise ConfigError("missing required key: Omega (or rho)")
    if omega.ndim != 2:
        raise ConfigError("Omega must be a square matrix")
    M = omega.shape[0]
    lam = cfg.get("Lambda")
    lam = np.eye(M) * _num(cfg, "sigma") ** 2 if lam is None else np.asarray(lam, dtype=float)
    menv = MultiEnv(Lambda=lam, Omega=omega, A=cfg["A"], k=cfg["k"], z=cfg["z"],
                    alpha=cfg["alpha"], epsilon=_num(cfg, "epsilon"), eta=_num(cfg, "eta"),
                    nu=_num(cfg, "nu"))
    if any(len(c) != M for c in configs):
        raise ConfigError(f"every inventory configuration needs {M} entries")
    t = float(cfg.get("t", 0.0))
    ranked = rank_inventory_configs(menv, configs, t, _num(cfg, "T"))
    rows = []
    for rank, (risk, q) in enumerate(ranked, start=1):
        row = {"rank": rank}
        row.update({f"q_{i}": v for i, v in enumerate(q)})
        row["risk"] = risk
        rows.append(row)
        print(f"{rank:3d}  q={list(q)}  risk={risk:.12g}")
    fields = ["rank"] + [f"q_{i}" for i in range(M)] + ["risk"]
    write_csv(rows, _out_dir(cfg) / "isorisk.csv", fields)
    return EXIT_OK


def cmd_verify(cfg: dict, tol_scale: float = 1.0) -> int:
    env = build_env(cfg)
    ou = PriceModel.ou(env.sigma, _num(cfg, "a"), _num(cfg, "mu"))
    results = verification_suite(env, ou, s=_num(cfg, "S0"), T=_num(cfg, "T"),
                                 n_mc=int(cfg.get("n_mc", 20000)), seed=_int(cfg, "seed"),
                                 tol_scale=tol_scale)
    write_report(results, _out_dir(cfg) / "verify.csv")
    failed = [r for r in results if not r.passed]
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        print(f"{status}  {r.check:28s} computed={r.computed:.10g} "
              f"reference={r.reference:.10g} tol={r.tolerance:.3g}")
    if failed:
        print("failed checks: " + ", ".join(r.check for r in failed), file=sys.stderr)
        return EXIT_VERIFY
    return EXIT_OK


COMMANDS = {
    "simulate": cmd_simulate,
    "compare": cmd_compare,
    "sweep": cmd_sweep,
    "isorisk": cmd_isorisk,
    "verify": cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mmpert", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON config file (flat keys)")
        p.add_argument("--out", help="output directory (default: out)")
        p.add_argument("--seed", type=int, help="master seed")
        p.add_argument("--paths", type=int, help="number of simulated paths")
        p.add_argument("--workers", type=int, help="worker threads for the simulation")
        if name == "sweep":
            p.add_argument("--param", choices=["epsilon", "alpha"])
            p.add_argument("--values", help="comma-separated parameter values")
        if name == "verify":
            p.add_argument("--tol-scale", type=float, default=1.0,
                           help="multiply every check tolerance by this factor")
    return parser


def _apply_overrides(cfg: dict, args) -> dict:
    if args.out is not None:
        cfg["out"] = args.out
    if args.seed is not None:
        cfg["seed"] = args.seed
    if args.paths is not None:
        cfg["n_paths"] = args.paths
    if args.workers is not None:
        cfg["workers"] = args.workers
    if getattr(args, "param", None):
        cfg["param"] = args.param
    if getattr(args, "values", None) is not None:
        try:
            cfg["values"] = [float(v) for v in args.values.split(",") if v.strip()]
        except ValueError:
            raise ConfigError(f"--values must be numbers, got {args.values!r}") from None
    return cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _apply_overrides(load_config(args.config), args)
        if args.command == "verify":
            return cmd_verify(cfg, args.tol_scale)
        return COMMANDS[args.command](cfg)
    except (ConfigError, ValueError) as exc:  # DomainError is a ValueError
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
