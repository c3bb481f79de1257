"""Command-line harness: sample / presolve / solve / oracle / verify / export.

Every command is a pure function of its configuration and input files; all
randomized commands require an explicit seed. Primary outputs are written
deterministically; wall-clock measurements are segregated into a dedicated
``timings`` field (JSON) or the trailing ``T_INA`` column (CSV) so re-runs
compare byte-identical once those are excluded. Exit codes: 0 ok, 1 a
verification failed, 2 usage or configuration errors.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys
import time
from dataclasses import dataclass
from pathlib import Path

from . import benders, model, oracle, presolve, sampling, theory
from .errors import CapExceeded, EdgeListError, ParameterError, StructureError
from .network import Model, SocialNetwork, density, icm_params, load_edge_list, ltm_params
from .presolve import PresolveLevel

try:
    import tomllib  # Python >= 3.11
except ImportError:  # pragma: no cover
    import tomli as tomllib


@dataclass
class RunConfig:
    network: str = ""
    undirected: bool = False
    model: str = "icm"
    p: float = 0.1
    budget: int = 5
    omega_count: int = 100
    seed: int | None = None
    max_reac_size: int | None = None
    mem_limit_per_scen: int | None = None  # stored reachability ids per scenario
    level: str = "ina"
    master_cap: int = 10**6
    exhaustive: bool = False
    exhaustive_cap: int = 2**20

    @classmethod
    def from_file(cls, path: str) -> "RunConfig":
        raw = Path(path).read_bytes()
        if path.endswith(".toml"):
            data = tomllib.loads(raw.decode())
        else:
            data = json.loads(raw.decode())
        fields = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - fields
        if unknown:
            raise ParameterError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)


_OVERRIDE_FLAGS = (
    ("network", str),
    ("model", str),
    ("p", float),
    ("budget", int),
    ("omega_count", int),
    ("seed", int),
    ("max_reac_size", int),
    ("mem_limit_per_scen", int),
    ("level", str),
    ("master_cap", int),
)


def _resolve_config(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig.from_file(args.config) if args.config else RunConfig()
    for name, _ in _OVERRIDE_FLAGS:
        value = getattr(args, name, None)
        if value is not None:
            setattr(cfg, name, value)
    if getattr(args, "undirected", False):
        cfg.undirected = True
    if getattr(args, "exhaustive", False):
        cfg.exhaustive = True
    if not cfg.network:
        raise ParameterError("a network path is required (config key 'network' or --network)")
    return cfg


def _load_network(cfg: RunConfig) -> SocialNetwork:
    with open(cfg.network, "r", encoding="utf-8") as fh:
        return load_edge_list(fh, undirected=cfg.undirected)


def _diffusion(cfg: RunConfig, network: SocialNetwork):
    if cfg.model == Model.ICM.value:
        return icm_params(network, cfg.p)
    if cfg.model == Model.LTM.value:
        return ltm_params(network)
    raise ParameterError(f"unknown model {cfg.model!r}")


def _scenarios(cfg: RunConfig, network: SocialNetwork) -> sampling.ScenarioSet:
    params = _diffusion(cfg, network)
    if cfg.exhaustive:
        return sampling.enumerate_scenarios(network, params, cap=cfg.exhaustive_cap)
    if cfg.seed is None:
        raise ParameterError("sampling requires an explicit seed")
    if cfg.model == Model.ICM.value:
        return sampling.sample_icm(network, params, cfg.omega_count, cfg.seed)
    return sampling.sample_ltm(network, params, cfg.omega_count, cfg.seed)


def _presolve_level(cfg: RunConfig) -> PresolveLevel:
    try:
        return PresolveLevel(cfg.level)
    except ValueError:
        raise ParameterError(
            f"unknown presolve level {cfg.level!r} (use default|scna|ina)"
        ) from None


def _write_json(path: str, payload: dict) -> None:
    text = json.dumps(payload, sort_keys=True, indent=2) + "\n"
    Path(path).write_text(text, encoding="utf-8")


def shifted_geometric_mean(values: list[float], shift: float = 1.0) -> float:
    """Aggregator for summary rows: prod(x_k + s)^(1/n) - s."""
    if not values:
        return 0.0
    log_sum = math.fsum(math.log(v + shift) for v in values)
    return math.exp(log_sum / len(values)) - shift


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def cmd_sample(args: argparse.Namespace) -> int:
    cfg = _resolve_config(args)
    t0 = time.perf_counter()
    network = _load_network(cfg)
    scen = _scenarios(cfg, network)
    container = sampling.to_container(scen, network, _diffusion(cfg, network))
    container["manifest"] = {
        "config": cfg.as_dict(),
        "node_count": network.node_count,
        "arc_count": network.arc_count,
        "density": density(network),
        "rho": round(density(network), 1),
    }
    _write_json(args.out, container)
    if args.timings_out:
        _write_json(args.timings_out, {"total_seconds": time.perf_counter() - t0})
    return 0


def cmd_presolve(args: argparse.Namespace) -> int:
    cfg = _resolve_config(args)
    network = _load_network(cfg)
    level = _presolve_level(cfg)
    seeds = (
        [int(s) for s in args.seeds.split(",")] if args.seeds else
        [cfg.seed] if (cfg.seed is not None or cfg.exhaustive) else []
    )
    if not seeds:
        raise ParameterError("presolve needs a seed (or --seeds, or exhaustive mode)")
    rows = []
    stats_list = []
    for seed in seeds:
        cfg.seed = seed
        scen = _scenarios(cfg, network)
        _, stats = presolve.presolve_pipeline(
            scen, level, budget=cfg.budget, max_reac_size=cfg.max_reac_size
        )
        stats_list.append(stats)
        rows.append(f"{seed if seed is not None else ''},{stats.csv_row()}")
    lines = ["seed," + presolve.PresolveStats.CSV_HEADER]
    lines.extend(rows)
    if len(stats_list) > 1:
        sgm = [
            shifted_geometric_mean([getattr(s, f) for s in stats_list])
            for f in (
                "sna_dz", "sna_dnnz", "scna_dv", "scna_dnnz",
                "scna_da", "ina_dz", "ina_dnnz",
            )
        ]
        sgm_t = shifted_geometric_mean([s.t_ina_seconds for s in stats_list])
        lines.append(
            "sgm," + level.value + ","
            + ",".join(f"{v:.4f}" for v in sgm)
            + f",{sgm_t:.3f}"
        )
    Path(args.out).write_text("\n".join(lines) + "\n", encoding="utf-8")
    if args.json:
        payload = {
            "config": cfg.as_dict(),
            "stats": [s.structural_dict() for s in stats_list],
            "timings": {
                "t_ina_seconds": [s.t_ina_seconds for s in stats_list],
                "t_total_seconds": [s.t_total_seconds for s in stats_list],
            },
        }
        _write_json(args.json, payload)
    return 0


def cmd_solve(args: argparse.Namespace) -> int:
    cfg = _resolve_config(args)
    t0 = time.perf_counter()
    network = _load_network(cfg)
    scen = _scenarios(cfg, network)
    t_sample = time.perf_counter() - t0
    reduced, stats = presolve.presolve_pipeline(
        scen, _presolve_level(cfg), budget=cfg.budget, max_reac_size=cfg.max_reac_size
    )
    t1 = time.perf_counter()
    try:
        result = benders.solve(
            reduced,
            master=lambda state: benders.master_enumerate(state, cap=cfg.master_cap),
            mem_limit_ids=cfg.mem_limit_per_scen,
        )
    except CapExceeded as exc:
        out_dir = Path(args.out).parent
        inst = model.relabel(model.build_reduced(reduced), network.original_ids)
        lp_path = out_dir / "instance.lp"
        mps_path = out_dir / "instance.mps"
        lp_path.write_text(model.export_lp(inst), encoding="utf-8")
        mps_path.write_text(model.export_mps(inst), encoding="utf-8")
        print(
            f"master cap exceeded ({exc}); wrote {lp_path} and {mps_path} "
            "for an external solver",
            file=sys.stderr,
        )
        return 0
    report = {
        "config": cfg.as_dict(),
        "result": result.to_dict(network.original_ids),
        "presolve": stats.structural_dict(),
        "timings": {
            "sampling_seconds": t_sample,
            "presolve_seconds": stats.t_total_seconds,
            "solve_seconds": time.perf_counter() - t1,
        },
    }
    _write_json(args.out, report)
    return 0


def cmd_oracle(args: argparse.Namespace) -> int:
    cfg = _resolve_config(args)
    t0 = time.perf_counter()
    network = _load_network(cfg)
    scen = _scenarios(cfg, network)
    seeds, value = oracle.brute_force_opt(scen, cfg.budget, cap=cfg.master_cap)
    report = {
        "config": cfg.as_dict(),
        "result": {
            "seed_set": [network.original_ids[j] for j in seeds],
            "objective": value,
        },
        "timings": {"total_seconds": time.perf_counter() - t0},
    }
    _write_json(args.out, report)
    return 0


def cmd_verify(args: argparse.Namespace) -> int:
    if args.check == "theorem1":
        report = theory.verify_theorem1(args.instances, args.seed)
    elif args.check == "prop1":
        report = theory.verify_prop1(args.instances, args.seed)
    else:
        try:
            report = theory.verify_theorem2(
                args.n, args.p, args.omega, args.trials, args.seed
            )
        except ParameterError as exc:
            print(f"skipped: {exc}", file=sys.stderr)
            _write_json(args.out, {"skipped": True, "reason": str(exc)})
            return 0
    _write_json(args.out, report)
    if not report["passed"]:
        print(f"verification {args.check} FAILED", file=sys.stderr)
        return 1
    return 0


def cmd_export(args: argparse.Namespace) -> int:
    cfg = _resolve_config(args)
    network = _load_network(cfg)
    scen = _scenarios(cfg, network)
    if args.level == "full":
        inst = model.build_full(scen, cfg.budget)
    else:
        cfg.level = args.level
        reduced, _ = presolve.presolve_pipeline(
            scen, _presolve_level(cfg), budget=cfg.budget,
            max_reac_size=cfg.max_reac_size,
        )
        inst = model.build_reduced(reduced)
    model.relabel(inst, network.original_ids)
    Path(args.out).write_text(model.export(inst, args.format), encoding="utf-8")
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def _add_common(sub: argparse.ArgumentParser, include_level: bool = True) -> None:
    sub.add_argument("--config", help="TOML or JSON run configuration")
    sub.add_argument("--network", help="edge-list path (overrides config)")
    sub.add_argument("--undirected", action="store_true", default=False)
    sub.add_argument("--model", choices=["icm", "ltm"])
    sub.add_argument("--p", type=float, help="ICM base arc probability")
    sub.add_argument("--budget", type=int, help="seed-set cardinality bound")
    sub.add_argument("--omega-count", dest="omega_count", type=int)
    sub.add_argument("--seed", type=int)
    sub.add_argument("--max-reac-size", dest="max_reac_size", type=int)
    sub.add_argument("--mem-limit-per-scen", dest="mem_limit_per_scen", type=int)
    if include_level:
        sub.add_argument("--level", choices=["default", "scna", "ina"])
    sub.add_argument("--master-cap", dest="master_cap", type=int)
    sub.add_argument("--exhaustive", action="store_true", default=False)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="imsolve",
        description="Exact influence-maximization toolkit: sampling, presolve, Benders",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    p_sample = subs.add_parser("sample", help="write a scenario container")
    _add_common(p_sample)
    p_sample.add_argument("--out", required=True)
    p_sample.add_argument("--timings-out")
    p_sample.set_defaults(func=cmd_sample)

    p_pre = subs.add_parser("presolve", help="reduction statistics table")
    _add_common(p_pre)
    p_pre.add_argument("--seeds", help="comma-separated seeds; adds an sgm summary row")
    p_pre.add_argument("--out", required=True, help="CSV output path")
    p_pre.add_argument("--json", help="optional JSON stats path")
    p_pre.set_defaults(func=cmd_presolve)

    p_solve = subs.add_parser("solve", help="sample, presolve, and solve exactly")
    _add_common(p_solve)
    p_solve.add_argument("--out", required=True, help="JSON report path")
    p_solve.set_defaults(func=cmd_solve)

    p_oracle = subs.add_parser("oracle", help="brute-force optimum")
    _add_common(p_oracle)
    p_oracle.add_argument("--out", required=True, help="JSON report path")
    p_oracle.set_defaults(func=cmd_oracle)

    p_verify = subs.add_parser("verify", help="run an analytical verification")
    p_verify.add_argument("check", choices=["theorem1", "prop1", "theorem2"])
    p_verify.add_argument("--instances", type=int, default=20)
    p_verify.add_argument("--seed", type=int, required=True)
    p_verify.add_argument("--n", type=int, default=15)
    p_verify.add_argument("--p", type=float, default=0.5)
    p_verify.add_argument("--omega", type=int, default=5)
    p_verify.add_argument("--trials", type=int, default=400)
    p_verify.add_argument("--out", required=True)
    p_verify.set_defaults(func=cmd_verify)

    p_export = subs.add_parser("export", help="write the model as LP or MPS text")
    _add_common(p_export, include_level=False)
    p_export.add_argument("--format", choices=["lp", "mps"], required=True)
    p_export.add_argument(
        "--level", choices=["full", "default", "scna", "ina"], default="full",
    )
    p_export.add_argument("--out", required=True)
    p_export.set_defaults(func=cmd_export)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (EdgeListError, ParameterError, StructureError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except CapExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
