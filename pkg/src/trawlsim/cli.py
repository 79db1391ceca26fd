"""Command-line front end.

Subcommands: `simulate` (write an ensemble), `verify <scenario.toml>` (run a
limit-theorem experiment and emit CSV + JSON), `acf`, `moment4` and
`constants`.  Exit codes: 0 all checks pass, 1 a metric failed, 2 config
error.  Output bytes depend only on the master seed, never on --threads.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from .levy import (InfiniteMomentError, LevySeedSpec, fixed_jumps,
                   normal_jumps, seed_moments)
from .scenarios import ScenarioConfig, run_scenario
from .sim import simulate_ensemble
from .stats import trawl_fourth_central_moment
from .sums import ALL_REGIMES, RegimeSpec, limit_constants
from .trawl import TrawlFunction, acf, exponential_trawl, kernel_to_trawl, power_law_trawl

CSV_HEADER = "scenario,n,delta,metric,value,se,target,pass"


class ConfigError(ValueError):
    pass


def build_seed(spec: dict) -> LevySeedSpec:
    try:
        family = spec["family"]
        if family == "gaussian":
            return LevySeedSpec.gaussian(spec.get("gamma", 0.0), spec.get("b", 1.0))
        if family == "poisson":
            return LevySeedSpec.poisson(spec["intensity"])
        if family == "stable":
            return LevySeedSpec.stable(spec["beta"], spec["k_plus"],
                                       spec["k_minus"])
        if family == "compound_poisson":
            j = spec.get("jumps", {"kind": "fixed", "value": 1.0})
            if j["kind"] == "fixed":
                jumps = fixed_jumps(j.get("value", 1.0))
            elif j["kind"] == "normal":
                jumps = normal_jumps(j.get("mean", 0.0), j.get("std", 1.0))
            else:
                raise ConfigError(f"seed.jumps.kind: unknown {j['kind']!r}")
            return LevySeedSpec.compound_poisson(spec["rate"], jumps,
                                                spec.get("gamma", 0.0))
    except KeyError as exc:
        raise ConfigError(f"seed: missing field {exc.args[0]}") from exc
    except ValueError as exc:
        raise ConfigError(f"seed: {exc}") from exc
    raise ConfigError(f"seed.family: unknown {spec.get('family')!r}")


def build_trawl(spec: dict) -> TrawlFunction:
    try:
        family = spec["family"]
        if family == "exponential":
            return exponential_trawl(spec.get("lambda", 1.0))
        if family == "power_law":
            return power_law_trawl(spec["kappa"], spec.get("c_a", 1.0))
        if family == "kernel_exponential":
            lam = spec.get("lambda", 1.0)
            return kernel_to_trawl(lambda s: np.exp(-lam * s),
                                   g_prime=lambda s: -lam * np.exp(-lam * s))
    except KeyError as exc:
        raise ConfigError(f"trawl: missing field {exc.args[0]}") from exc
    except ValueError as exc:
        raise ConfigError(f"trawl: {exc}") from exc
    raise ConfigError(f"trawl.family: unknown {spec.get('family')!r}")


def load_scenario(path: str, overrides: dict) -> ScenarioConfig:
    try:
        with open(path, "rb") as fh:
            doc = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read scenario file: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"scenario file is not valid TOML: {exc}") from exc
    try:
        kind = doc["kind"]
    except KeyError:
        raise ConfigError("missing top-level field: kind")
    rule = doc.get("delta_rule", {})
    cfg = ScenarioConfig(
        name=doc.get("name", kind),
        kind=kind,
        seed_spec=build_seed(doc["seed"]) if "seed" in doc else None,
        trawl=build_trawl(doc["trawl"]) if "trawl" in doc else None,
        delta_c=rule.get("c", 1.0),
        delta_p=rule.get("p", 0.5),
        n_list=list(doc.get("n_list", [256, 1024, 4096])),
        num_paths=overrides.get("paths") or doc.get("num_paths", 1000),
        master_seed=overrides.get("seed") if overrides.get("seed") is not None
        else doc.get("master_seed", 20260823),
        regime_params=doc.get("regime", {}),
        tolerances=doc.get("tolerances", {}),
    )
    if cfg.num_paths < 1:
        raise ConfigError("num_paths must be >= 1")
    if list(cfg.n_list) != sorted(set(cfg.n_list)):
        raise ConfigError("n_list must be strictly increasing")
    return cfg


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return format(v, ".12g")
    return str(v)


def emit_plotdata(rows: list, stream) -> None:
    """Tidy CSV with the fixed column set; byte-stable across runs."""
    stream.write(CSV_HEADER + "\n")
    for r in rows:
        stream.write(",".join(_fmt(r[k]) for k in
                              ("scenario", "n", "delta", "metric", "value",
                               "se", "target", "pass")) + "\n")


def _write_outputs(report: dict, out_prefix: str | None) -> None:
    if out_prefix:
        with open(out_prefix + ".csv", "w") as fh:
            emit_plotdata(report["rows"], fh)
        with open(out_prefix + ".json", "w") as fh:
            json.dump(report, fh, indent=2, sort_keys=True)
            fh.write("\n")
    else:
        emit_plotdata(report["rows"], sys.stdout)


def _default_threads() -> int:
    try:
        return max(1, int(os.environ.get("TRAWLSIM_THREADS", "1")))
    except ValueError:
        return 1


def cmd_verify(args) -> int:
    cfg = load_scenario(args.scenario, {"paths": args.paths, "seed": args.seed})
    report = run_scenario(cfg, threads=args.threads)
    _write_outputs(report, args.out)
    return 0 if report["pass"] else 1


def cmd_simulate(args) -> int:
    seed = build_seed({"family": args.family, "intensity": args.intensity,
                       "b": args.b, "gamma": args.gamma,
                       "beta": args.beta, "k_plus": args.k_plus,
                       "k_minus": args.k_minus})
    tr = build_trawl({"family": args.trawl, "lambda": args.decay,
                      "kappa": args.kappa})
    ens = simulate_ensemble(seed, tr, args.n, args.delta, args.paths or 1,
                            args.seed if args.seed is not None else 20260823,
                            threads=args.threads)
    if args.out:
        np.savetxt(args.out, ens.paths, delimiter=",", fmt="%.12g")
        with open(args.out + ".json", "w") as fh:
            json.dump({"schema": 1, "n": ens.n, "delta": ens.delta,
                       "num_paths": int(ens.paths.shape[0]),
                       "master_seed": ens.master_seed,
                       "seed_family": seed.family, "trawl_family": tr.family},
                      fh, indent=2, sort_keys=True)
            fh.write("\n")
    else:
        np.savetxt(sys.stdout, ens.paths, delimiter=",", fmt="%.12g")
    return 0


def cmd_acf(args) -> int:
    tr = build_trawl({"family": args.trawl, "lambda": args.decay,
                      "kappa": args.kappa})
    for h in args.lags:
        print(f"{h:.6g},{acf(tr, args.var_seed, h):.12g}")
    return 0


def cmd_moment4(args) -> int:
    seed = build_seed({"family": args.family, "intensity": args.intensity,
                       "b": args.b, "gamma": args.gamma})
    tr = build_trawl({"family": args.trawl, "lambda": args.decay,
                      "kappa": args.kappa})
    vals = trawl_fourth_central_moment(seed, tr)
    print(f"central4,{vals['value']:.12g}")
    print(f"paper_displayed,{vals['paper_displayed']:.12g}")
    return 0


def cmd_constants(args) -> int:
    seed = build_seed({"family": args.family, "intensity": args.intensity,
                       "b": args.b, "gamma": args.gamma,
                       "beta": args.beta, "k_plus": args.k_plus,
                       "k_minus": args.k_minus})
    tr = build_trawl({"family": args.trawl, "lambda": args.decay,
                      "kappa": args.kappa})
    regime = RegimeSpec(args.regime, mu=args.mu, kappa=args.kappa,
                        beta=args.beta, beta_nu=args.beta_nu)
    consts = limit_constants(regime, tr, seed)
    for k in sorted(consts):
        if k != "regime":
            print(f"{k},{consts[k]:.12g}")
    return 0


def _add_common(p, with_paths=True):
    if with_paths:
        p.add_argument("--paths", type=int, default=None)
    p.add_argument("--seed", type=int, default=None, help="master seed")
    p.add_argument("--out", type=str, default=None)
    p.add_argument("--threads", type=int, default=_default_threads())


def _add_model_args(p):
    p.add_argument("--family", default="poisson")
    p.add_argument("--intensity", type=float, default=1.0)
    p.add_argument("--b", type=float, default=1.0)
    p.add_argument("--gamma", type=float, default=0.0)
    p.add_argument("--beta", type=float, default=1.5)
    p.add_argument("--k-plus", dest="k_plus", type=float, default=1.0)
    p.add_argument("--k-minus", dest="k_minus", type=float, default=1.0)
    p.add_argument("--trawl", default="exponential")
    p.add_argument("--decay", type=float, default=1.0,
                   help="exponential trawl decay rate")
    p.add_argument("--kappa", type=float, default=2.5)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="trawlsim",
                                 description="trawl-process simulation and "
                                             "limit-theorem verification")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", help="run a scenario file")
    p.add_argument("scenario")
    _add_common(p)
    p.set_defaults(fn=cmd_verify)

    p = sub.add_parser("simulate", help="simulate a path ensemble")
    _add_model_args(p)
    p.add_argument("--n", type=int, default=256)
    p.add_argument("--delta", type=float, default=0.1)
    _add_common(p)
    p.set_defaults(fn=cmd_simulate)

    p = sub.add_parser("acf", help="closed-form autocovariance")
    _add_model_args(p)
    p.add_argument("--var-seed", dest="var_seed", type=float, default=1.0)
    p.add_argument("--lags", type=float, nargs="+", default=[0.0, 0.5, 1.0])
    p.set_defaults(fn=cmd_acf)

    p = sub.add_parser("moment4", help="fourth central moment of X_0")
    _add_model_args(p)
    p.set_defaults(fn=cmd_moment4)

    p = sub.add_parser("constants", help="limit constants for a regime")
    _add_model_args(p)
    p.add_argument("--regime", choices=ALL_REGIMES, default="short_memory")
    p.add_argument("--mu", type=float, default=1.0)
    p.add_argument("--beta-nu", dest="beta_nu", type=float, default=1.8)
    p.set_defaults(fn=cmd_constants)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (ConfigError, InfiniteMomentError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
