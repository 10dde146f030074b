"""Config-file front end.

Subcommands: validate (schema-check a config), run (execute the sweep
and write the metrics CSV), analytics (print closed-form predictions
for a parameter set), trace (export one seed's raw request stream).
Configs are JSON; sweep axes are value lists expanded as a cartesian
product in a fixed order, so row order in the CSV is reproducible.
Environment variables are never consulted.

Exit codes: 0 ok, 1 config error, 2 run error.
"""

import argparse
import itertools
import json
import os
import sys
import tempfile
from dataclasses import replace
from importlib import resources
from typing import List, Optional, Tuple

from .baselines import PopConfig
from .coverage import NetworkConfig
from .engine import (
    METRIC_RULES,
    POLICY_NAMES,
    ExperimentConfig,
    run_sweep,
    write_csv,
)
from .traffic import (
    TrafficConfig,
    ccsr,
    discretized_volume_mean,
    generate,
    prob_volume_above_one,
    volume_beta_from_mean,
)

PRESET_NAMES = ("fig_a", "fig_b", "fig_c")

# cartesian-product order; also the config-index order of CSV rows
SWEEP_AXES = ("policy", "k", "nbs_target", "radius", "volume_mean", "shape_mix")

_TOP_KEYS = {"traffic", "network", "sweep", "pop", "seeds", "warmup_fraction", "metric_rule"}
_TRAFFIC_KEYS = {"lambda_c", "horizon", "volume_mean", "volume_beta", "volume_min",
                 "lifespan_mean", "lifespan_bounds", "shape_mix", "epsilon",
                 "max_expected_requests"}
_NETWORK_KEYS = {"grid", "spacing", "wrap"}
_POP_KEYS = {"dt_ev", "dt_pop"}


class ConfigError(Exception):
    """Schema or value problem in a config file; carries a line number."""

    def __init__(self, message: str, line: int = 1):
        super().__init__(message)
        self.line = line


def _key_line(raw: str, key: str) -> int:
    needle = f'"{key}"'
    for i, text in enumerate(raw.splitlines(), start=1):
        if needle in text:
            return i
    return 1


def _reject_unknown(section: dict, allowed: set, where: str, raw: str):
    for key in section:
        if key not in allowed:
            raise ConfigError(f"unknown key {key!r} in {where}", _key_line(raw, key))


def resolve_config_path(path: str) -> str:
    """A real file path, or the name of a shipped preset."""
    if os.path.exists(path):
        return path
    name = path[:-5] if path.endswith(".json") else path
    if name in PRESET_NAMES:
        ref = resources.files("multilru").joinpath(f"presets/{name}.json")
        with resources.as_file(ref) as concrete:
            return str(concrete)
    raise ConfigError(f"config file not found: {path}")


def load_config(path: str) -> Tuple[List[ExperimentConfig], dict]:
    """Parse and fully validate a config file into experiment configs.

    Returns (configs, document). Raises ConfigError with a line number
    on any schema violation.
    """
    with open(path, encoding="utf-8") as fh:
        raw = fh.read()
    try:
        doc = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc.msg}", exc.lineno) from exc
    if not isinstance(doc, dict):
        raise ConfigError("top level must be an object")

    _reject_unknown(doc, _TOP_KEYS, "top level", raw)
    for required in ("traffic", "network", "sweep", "seeds"):
        if required not in doc:
            raise ConfigError(f"missing required key {required!r}")

    traffic_doc = doc["traffic"]
    network_doc = doc["network"]
    sweep_doc = doc["sweep"]
    for name, section, allowed in (("traffic", traffic_doc, _TRAFFIC_KEYS),
                                   ("network", network_doc, _NETWORK_KEYS),
                                   ("sweep", sweep_doc, set(SWEEP_AXES))):
        if not isinstance(section, dict):
            raise ConfigError(f"{name!r} must be an object", _key_line(raw, name))
        _reject_unknown(section, allowed, f"{name!r}", raw)
    if "pop" in doc:
        if not isinstance(doc["pop"], dict):
            raise ConfigError("'pop' must be an object", _key_line(raw, "pop"))
        _reject_unknown(doc["pop"], _POP_KEYS, "'pop'", raw)

    seeds = doc["seeds"]
    if not isinstance(seeds, list) or not seeds or not all(isinstance(s, int) for s in seeds):
        raise ConfigError("'seeds' must be a nonempty list of integers", _key_line(raw, "seeds"))

    axes = {}
    for axis in SWEEP_AXES:
        if axis in sweep_doc:
            values = sweep_doc[axis]
            if not isinstance(values, list) or not values:
                raise ConfigError(f"sweep axis {axis!r} must be a nonempty list",
                                  _key_line(raw, axis))
            axes[axis] = values
    if "policy" not in axes:
        raise ConfigError("sweep must include a 'policy' axis", _key_line(raw, "sweep"))
    if "k" not in axes:
        raise ConfigError("sweep must include a 'k' axis", _key_line(raw, "sweep"))
    if ("nbs_target" in axes) == ("radius" in axes):
        raise ConfigError("sweep must include exactly one of 'nbs_target' or 'radius'",
                          _key_line(raw, "sweep"))

    def fail(exc: Exception, key: str) -> ConfigError:
        return ConfigError(str(exc), _key_line(raw, key))

    traffic_kwargs = dict(traffic_doc)
    for tup_key in ("lifespan_bounds", "shape_mix"):
        if tup_key in traffic_kwargs:
            traffic_kwargs[tup_key] = tuple(traffic_kwargs[tup_key])
    network_kwargs = dict(network_doc)
    if "grid" in network_kwargs:
        network_kwargs["grid"] = tuple(network_kwargs["grid"])

    pop = None
    if "pop" in doc:
        try:
            pop = PopConfig(dt_ev=doc["pop"].get("dt_ev", 1.0),
                            dt_pop=doc["pop"].get("dt_pop", 1.0), k=1)
        except ValueError as exc:
            raise fail(exc, "pop")

    warmup = doc.get("warmup_fraction", 0.2)
    metric_rule = doc.get("metric_rule", "covered-only")
    if metric_rule not in METRIC_RULES:
        raise ConfigError(f"metric_rule must be one of {METRIC_RULES}",
                          _key_line(raw, "metric_rule"))

    configs = []
    names = [a for a in SWEEP_AXES if a in axes]
    for combo in itertools.product(*(axes[a] for a in names)):
        point = dict(zip(names, combo))
        if point["policy"] not in POLICY_NAMES:
            raise ConfigError(f"unknown policy {point['policy']!r}; expected one of {POLICY_NAMES}",
                              _key_line(raw, "policy"))
        t_kwargs = dict(traffic_kwargs)
        if "volume_mean" in point:
            t_kwargs["volume_mean"] = point["volume_mean"]
            t_kwargs.pop("volume_beta", None)
        if "shape_mix" in point:
            t_kwargs["shape_mix"] = tuple(point["shape_mix"])
        n_kwargs = dict(network_kwargs)
        if "nbs_target" in point:
            n_kwargs["target_nbs"] = point["nbs_target"]
        else:
            n_kwargs["radius"] = point["radius"]
        try:
            network = NetworkConfig(**n_kwargs)
        except (TypeError, ValueError) as exc:
            raise fail(exc, "network")
        t_kwargs.setdefault("window", network.window)
        try:
            traffic = TrafficConfig(master_seed=seeds[0], **t_kwargs)
        except (TypeError, ValueError) as exc:
            raise fail(exc, "traffic")
        point_pop = pop
        if point["policy"] == "pop-bound":
            if pop is None:
                raise ConfigError("sweep includes pop-bound but config has no 'pop' section",
                                  _key_line(raw, "policy"))
            point_pop = replace(pop, k=point["k"])
        try:
            configs.append(ExperimentConfig(
                traffic=traffic,
                network=network,
                policy=point["policy"],
                k=point["k"],
                seeds=tuple(seeds),
                pop=point_pop,
                warmup_fraction=warmup,
                metric_rule=metric_rule,
            ))
        except (TypeError, ValueError) as exc:
            raise fail(exc, "sweep")
    return configs, doc


def _apply_overrides(configs: List[ExperimentConfig], args) -> List[ExperimentConfig]:
    out = configs
    if args.seeds is not None:
        seeds = tuple(args.seeds)
        out = [replace(c, seeds=seeds) for c in out]
    if args.metric_rule is not None:
        out = [replace(c, metric_rule=args.metric_rule) for c in out]
    return out


def cmd_validate(args) -> int:
    path = resolve_config_path(args.config)
    configs, _ = load_config(path)
    n_rows = sum(len(c.seeds) for c in configs)
    print(f"{args.config}: ok")
    print(f"  sweep points: {len(configs)}")
    print(f"  rows per run: {n_rows}")
    policies = sorted({c.policy for c in configs})
    print(f"  policies: {', '.join(policies)}")
    return 0


def cmd_run(args) -> int:
    path = resolve_config_path(args.config)
    configs, _ = load_config(path)
    configs = _apply_overrides(configs, args)
    try:
        rows = run_sweep(configs, threads=args.threads)
        write_csv(rows, args.out, timings=args.timings)
    except ConfigError:
        raise
    except Exception as exc:
        print(f"run failed: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {len(rows)} rows to {args.out}")
    return 0


def cmd_analytics(args) -> int:
    beta = volume_beta_from_mean(args.volume_mean, args.volume_min)
    p_multi = prob_volume_above_one(beta, args.volume_min)
    ev_disc = discretized_volume_mean(beta, args.volume_min)
    catalogue = args.lambda_c * p_multi * args.lifespan_mean
    print(f"volume_beta            = {beta:.6g}")
    print(f"P(V > 1)               = {p_multi:.6g}")
    print(f"volume_mean            = {args.volume_mean:.6g}")
    print(f"volume_mean_discretized= {ev_disc:.6g}")
    print(f"catalogue_mean         = {catalogue:.6g}")
    print(f"requests_per_day       = {args.lambda_c * args.volume_mean:.6g}")
    print(f"requests_per_day_disc  = {args.lambda_c * ev_disc:.6g}")
    if args.horizon is not None:
        print(f"requests_total         = {args.horizon * args.lambda_c * args.volume_mean:.6g}")
        print(f"requests_total_disc    = {args.horizon * args.lambda_c * ev_disc:.6g}")
    if args.k is not None:
        print(f"rho(K={args.k})".ljust(23) + f"= {ccsr(args.k, args.lambda_c, args.lifespan_mean):.6g}")
    return 0


def cmd_trace(args) -> int:
    path = resolve_config_path(args.config)
    configs, _ = load_config(path)
    configs = _apply_overrides(configs, args)
    traffic = replace(configs[0].traffic, master_seed=configs[0].seeds[0])
    try:
        lines = ["time,content_id,x,y"]
        for req in generate(traffic):
            lines.append(f"{req.time:.9g},{req.content_id},{req.x:.9g},{req.y:.9g}")
        payload = "\n".join(lines) + "\n"
        directory = os.path.dirname(os.path.abspath(args.out))
        fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
                fh.write(payload)
            os.replace(tmp, args.out)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
    except ConfigError:
        raise
    except Exception as exc:
        print(f"trace failed: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {len(lines) - 1} requests to {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="multilru",
        description="spatial multi-LRU cache simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_val = sub.add_parser("validate", help="schema-check a config file or preset")
    p_val.add_argument("config", help="config path or preset name (fig_a, fig_b, fig_c)")
    p_val.set_defaults(fn=cmd_validate)

    p_run = sub.add_parser("run", help="run a sweep and write the metrics CSV")
    p_run.add_argument("config", help="config path or preset name")
    p_run.add_argument("--out", required=True, help="output CSV path")
    p_run.add_argument("--seeds", type=int, nargs="+", default=None,
                       help="override the config's seed list")
    p_run.add_argument("--threads", type=int, default=1)
    p_run.add_argument("--metric-rule", choices=METRIC_RULES, default=None)
    p_run.add_argument("--timings", action="store_true",
                       help="append a runtime_seconds column (breaks byte-identity)")
    p_run.set_defaults(fn=cmd_run)

    p_an = sub.add_parser("analytics", help="print closed-form predictions")
    p_an.add_argument("--lambda-c", type=float, required=True, dest="lambda_c",
                      help="content arrivals per day")
    p_an.add_argument("--lifespan-mean", type=float, required=True, dest="lifespan_mean")
    p_an.add_argument("--volume-mean", type=float, required=True, dest="volume_mean")
    p_an.add_argument("--volume-min", type=float, default=0.5, dest="volume_min")
    p_an.add_argument("--horizon", type=float, default=None)
    p_an.add_argument("--k", type=int, default=None, help="cache size for the ccsr line")
    p_an.set_defaults(fn=cmd_analytics)

    p_tr = sub.add_parser("trace", help="export one seed's raw request stream")
    p_tr.add_argument("config", help="config path or preset name")
    p_tr.add_argument("--out", required=True, help="output CSV path")
    p_tr.add_argument("--seeds", type=int, nargs="+", default=None,
                      help="override; the first seed is traced")
    p_tr.add_argument("--metric-rule", choices=METRIC_RULES, default=None)
    p_tr.set_defaults(fn=cmd_trace)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"config error (line {exc.line}): {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
