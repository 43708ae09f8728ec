"""Batch command line: fit -> generate -> reduce -> dispatch -> evaluate -> report.

Every stage is separately scriptable and reads one config file (JSON or TOML)
plus flag overrides. Artifacts land in a deterministic tree under
``output_dir`` (model/, scenarios/, solution/, report/); each artifact embeds
the config hash and seed so outputs are reproducible from (inputs, config,
seed) alone. Exit codes: 0 success, 2 config error, 3 data error, 4 solver
failure.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .copula_model import CopulaModel, fit_copula, line_flow_variable, sum_variable
from .data_ingest import load_historical, with_persistence_forecast
from .demo import make_demo_dataset
from .dispatch import (
    CostBreakdown,
    DispatchCase,
    DispatchSolution,
    solve_distribution_ed,
    solve_scenario_ed,
)
from .errors import (
    ConfigurationError,
    DataFormatError,
    DataValueError,
    NumericalError,
    ResourceError,
    SchemaError,
    StochDispatchError,
)
from .evaluation import confidence_table, eval_seed, monte_carlo_evaluate
from .lp_solver import LpStatus
from .network import NetworkModel
from .resources import fixture_path
from .scenario_gen import (
    GibbsConfig,
    ScenarioSet,
    TemporalModel,
    dynamic_generate,
    reduce_scenarios,
    tune_range_parameter,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_SOLVER = 4


@dataclass
class RunConfig:
    """Pipeline configuration; every stage consumes a subset of it."""

    data_dir: str
    network: str
    case: str
    forecast: str
    output_dir: str
    mode: str = "distribution"  # or "scenario"
    n_scenarios: int = 1000
    burn_in: int = 200
    reduced_target: int = 10
    epsilon: float | None = 3.0
    epsilon_grid: list[float] = field(default_factory=list)
    seed: int = 0
    eval_scenarios: int = 500
    persistence_lag: int | None = None
    threads: int = 1
    base_dir: Path = field(default_factory=Path)

    def __post_init__(self):
        if self.mode not in ("distribution", "scenario"):
            raise ConfigurationError(f"unknown mode {self.mode!r}")
        if self.reduced_target < 1:
            raise ConfigurationError("reduced_target must be >= 1")

    @classmethod
    def load(cls, path, overrides: dict | None = None) -> "RunConfig":
        path = Path(path)
        if not path.exists():
            raise ConfigurationError(f"config file {path} does not exist")
        if path.suffix == ".toml":
            try:
                import tomllib  # py311+
            except ModuleNotFoundError:
                import tomli as tomllib
            raw = tomllib.loads(path.read_text())
        else:
            raw = json.loads(path.read_text())
        raw.update({k: v for k, v in (overrides or {}).items() if v is not None})
        known = {f for f in cls.__dataclass_fields__ if f != "base_dir"}
        unknown = set(raw) - known
        if unknown:
            raise ConfigurationError(f"unknown config keys: {sorted(unknown)}")
        try:
            return cls(base_dir=path.parent, **raw)
        except TypeError as exc:
            raise ConfigurationError(f"bad config: {exc}") from None

    def resolve(self, ref: str) -> Path:
        """Resolve a path reference; ``fixture:`` names map to bundled files."""
        if ref.startswith("fixture:"):
            return fixture_path(ref.split(":", 1)[1])
        p = Path(ref)
        return p if p.is_absolute() else self.base_dir / p

    def hash(self) -> str:
        payload = {
            k: v
            for k, v in self.__dict__.items()
            if k != "base_dir" and not k.startswith("_")
        }
        return hashlib.sha256(
            json.dumps(payload, sort_keys=True, default=str).encode()
        ).hexdigest()[:16]

    def out(self, *parts) -> Path:
        p = self.resolve(self.output_dir).joinpath(*parts)
        p.parent.mkdir(parents=True, exist_ok=True)
        return p


class Logger:
    def __init__(self, as_json: bool):
        self.as_json = as_json

    def info(self, stage: str, message: str, **extra):
        if self.as_json:
            print(json.dumps({"stage": stage, "message": message, **extra}, sort_keys=True))
        else:
            print(f"[{stage}] {message}" + (f" {extra}" if extra else ""))


def _stamp(cfg: RunConfig) -> dict:
    return {"config_hash": cfg.hash(), "seed": cfg.seed, "version": __version__}


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True))


# ---------------------------------------------------------------------------
# Stages.
# ---------------------------------------------------------------------------


def _load_inputs(cfg: RunConfig):
    net = NetworkModel.from_json_file(cfg.resolve(cfg.network))
    case = DispatchCase.from_json_file(cfg.resolve(cfg.case))
    return net, case


def _read_forecast(cfg: RunConfig, n_plants: int) -> np.ndarray:
    ref = cfg.forecast
    if ref.startswith("constant:"):
        val = float(ref.split(":", 1)[1])
        net, case = _load_inputs(cfg)
        return np.full((case.horizon, n_plants), val)
    path = cfg.resolve(ref)
    if not path.exists():
        raise ConfigurationError(f"forecast file {path} does not exist")
    rows = []
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row or row[0].startswith("#") or not _is_float(row[0]):
                continue
            rows.append([float(v) for v in row])
    traj = np.array(rows)
    if traj.ndim != 2 or traj.shape[1] != n_plants:
        raise DataFormatError(
            f"forecast file {path}: expected {n_plants} columns, got {traj.shape}"
        )
    return traj


def _is_float(s: str) -> bool:
    try:
        float(s)
        return True
    except ValueError:
        return False


def stage_fit(cfg: RunConfig, log: Logger) -> CopulaModel:
    data = load_historical(cfg.resolve(cfg.data_dir))
    if cfg.persistence_lag:
        data = with_persistence_forecast(data, cfg.persistence_lag)
    net, _ = _load_inputs(cfg)
    derived = [sum_variable(data.plants)]
    for ln in net.monitored_lines():
        k = net.plant_shift_factors(ln, data.plants)
        derived.append(line_flow_variable(ln.index, k, data.plants))
    model = fit_copula(data, derived=tuple(derived))
    payload = model.to_dict()
    payload["meta"] = _stamp(cfg)
    _write_json(cfg.out("model", "model.json"), payload)
    log.info("fit", f"fitted {len(model.labels)} variables on {model.n_samples} samples")
    return model


def _load_model(cfg: RunConfig) -> CopulaModel:
    path = cfg.out("model", "model.json")
    if not path.exists():
        raise ConfigurationError(f"model artifact missing at {path}; run fit first")
    return CopulaModel.from_json(path.read_text())


def stage_generate(cfg: RunConfig, log: Logger) -> ScenarioSet:
    model = _load_model(cfg)
    traj = _read_forecast(cfg, model.n_plants)
    if cfg.epsilon_grid:
        data = load_historical(cfg.resolve(cfg.data_dir))
        if cfg.persistence_lag:
            data = with_persistence_forecast(data, cfg.persistence_lag)
        eps = np.array(
            [
                tune_range_parameter(model, data, j, cfg.epsilon_grid, seed=cfg.seed)
                for j in range(model.n_plants)
            ]
        )
        log.info("generate", f"tuned range parameters {eps.tolist()}")
        temporal = TemporalModel(eps, len(traj))
    else:
        if cfg.epsilon is None:
            raise ConfigurationError("epsilon or epsilon_grid required")
        temporal = TemporalModel.uniform(cfg.epsilon, model.n_plants, len(traj))
    scen = dynamic_generate(
        model,
        traj,
        temporal,
        GibbsConfig(
            n_scenarios=cfg.n_scenarios, n_burn_in=cfg.burn_in, seed=cfg.seed
        ),
    )
    scen.meta.update(_stamp(cfg))
    scen.write_csv(cfg.out("scenarios", "scenarios.csv"))
    log.info("generate", f"{scen.n_scenarios} scenarios x {scen.horizon} intervals")
    return scen


def stage_reduce(cfg: RunConfig, log: Logger) -> ScenarioSet:
    model = _load_model(cfg)
    scen = ScenarioSet.read_csv(
        cfg.out("scenarios", "scenarios.csv"), plants=model.plants
    )
    reduced = reduce_scenarios(scen, cfg.reduced_target)
    reduced.meta.update(_stamp(cfg))
    reduced.write_csv(cfg.out("scenarios", "reduced.csv"))
    log.info("reduce", f"{scen.n_scenarios} -> {reduced.n_scenarios} scenarios")
    return reduced


def stage_dispatch(cfg: RunConfig, log: Logger) -> DispatchSolution:
    net, case = _load_inputs(cfg)
    model = _load_model(cfg)
    traj = _read_forecast(cfg, model.n_plants)
    if len(traj) != case.horizon:
        raise ConfigurationError(
            f"forecast horizon {len(traj)} != case horizon {case.horizon}"
        )
    if cfg.mode == "distribution":
        sol = solve_distribution_ed(case, model, net, traj)
    else:
        reduced = ScenarioSet.read_csv(
            cfg.out("scenarios", "reduced.csv"), plants=model.plants
        )
        sol = solve_scenario_ed(case, reduced, net)
    if not sol.is_optimal:
        payload = sol.to_dict()
        payload["meta"] = _stamp(cfg)
        _write_json(cfg.out("solution", "solution.json"), payload)
        raise NumericalError(
            f"dispatch LP {sol.status.value}; binding rows: {sol.infeasible_rows}"
        )
    payload = sol.to_dict()
    payload["meta"] = _stamp(cfg)
    _write_json(cfg.out("solution", "solution.json"), payload)
    log.info(
        "dispatch",
        f"{cfg.mode} ED optimal, total ${sol.costs.total:.2f}",
        fuel=round(sol.costs.fuel, 2),
    )
    return sol


def _load_solution(cfg: RunConfig) -> DispatchSolution:
    path = cfg.out("solution", "solution.json")
    if not path.exists():
        raise ConfigurationError(f"solution artifact missing at {path}; run dispatch")
    d = json.loads(path.read_text())
    if d.get("status") != "optimal":
        raise NumericalError(f"stored solution is {d.get('status')}")
    costs = d["costs"]
    sol = DispatchSolution(
        mode=d["mode"],
        status=LpStatus.OPTIMAL,
        p=np.array(d["p_mw"]),
        r_up=np.array(d["r_up_mw"]),
        r_down=np.array(d["r_down_mw"]),
        costs=CostBreakdown(
            fuel=costs["fuel"],
            reserve=costs["reserve"],
            expected_ls=costs["ls"],
            expected_rec=costs["rec"],
        ),
        objective_value=d.get("objective_value"),
    )
    if "r_hi_mw" in d:
        sol.r_sum = np.array(d["r_sum_mw"])
        sol.r_lo = np.array(d["r_lo_mw"])
        sol.r_hi = np.array(d["r_hi_mw"])
        sol.confidence = np.array(d["confidence"])
    return sol


def stage_evaluate(cfg: RunConfig, log: Logger):
    net, case = _load_inputs(cfg)
    model = _load_model(cfg)
    sol = _load_solution(cfg)
    sol.plants = model.plants
    traj = _read_forecast(cfg, model.n_plants)
    eps = cfg.epsilon if cfg.epsilon is not None else 3.0
    temporal = TemporalModel.uniform(eps, model.n_plants, len(traj))
    test = dynamic_generate(
        model,
        traj,
        temporal,
        GibbsConfig(
            n_scenarios=cfg.eval_scenarios, n_burn_in=0, seed=eval_seed(cfg.seed)
        ),
    )
    report = monte_carlo_evaluate(sol, test, case, net, max_workers=cfg.threads)
    payload = report.as_dict()
    payload["meta"] = _stamp(cfg)
    _write_json(cfg.out("report", "evaluation.json"), payload)
    report.write_csv(cfg.out("report", "cost_table.csv"))
    log.info("evaluate", f"total ${report.total:.2f} on {test.n_scenarios} scenarios")
    return report


def stage_report(cfg: RunConfig, log: Logger):
    net, case = _load_inputs(cfg)
    model = _load_model(cfg)
    sol = _load_solution(cfg)
    traj = _read_forecast(cfg, model.n_plants)
    eval_path = cfg.out("report", "evaluation.json")
    if not eval_path.exists():
        raise ConfigurationError("evaluation artifact missing; run evaluate first")
    ev = json.loads(eval_path.read_text())
    # Cost table: one row per component.
    with open(cfg.out("report", "table_costs.csv"), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["component", "dollars"])
        for key in ("fuel", "reserve", "ls", "rec", "total"):
            w.writerow([key, repr(ev[key])])
    # Per-interval downward-reserve confidence levels.
    if sol.mode == "distribution":
        conf = confidence_table(sol, model, traj)
        with open(cfg.out("report", "table_confidence.csv"), "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["time_min", "confidence_downward_reserve"])
            for t, c in enumerate(conf):
                w.writerow([int((t + 1) * case.step_minutes), repr(float(c))])
    # Plot-ready per-interval series.
    r_cap = model.total_capacity_mw
    with open(cfg.out("report", "series.csv"), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(
            [
                "time_min",
                "load_mw",
                "forecast_sum_mw",
                "q05_mw",
                "q95_mw",
                "scheduled_renewable_mw",
                "band_lo_mw",
                "band_hi_mw",
                "expected_ls_mw",
                "expected_rec_mw",
            ]
        )
        caps = np.array([p.capacity_mw for p in model.plants])
        for t in range(case.horizon):
            cond = model.conditional_sum(traj[t])
            q05 = float(cond.quantile(0.05)) * r_cap
            q95 = float(cond.quantile(0.95)) * r_cap
            w.writerow(
                [
                    int((t + 1) * case.step_minutes),
                    repr(float(case.load_mw[t])),
                    repr(float(traj[t] @ caps)),
                    repr(q05),
                    repr(q95),
                    repr(float(sol.r_sum[t])) if sol.r_sum is not None else "",
                    repr(float(sol.r_lo[t])) if sol.r_lo is not None else "",
                    repr(float(sol.r_hi[t])) if sol.r_hi is not None else "",
                    repr(float(ev["per_interval_ls_mw"][t])),
                    repr(float(ev["per_interval_rec_mw"][t])),
                ]
            )
    log.info("report", "tables written")


STAGES = {
    "fit": stage_fit,
    "generate": stage_generate,
    "reduce": stage_reduce,
    "dispatch": stage_dispatch,
    "evaluate": stage_evaluate,
    "report": stage_report,
}


def run_pipeline(cfg: RunConfig, log: Logger) -> None:
    for name in ("fit", "generate", "reduce", "dispatch", "evaluate", "report"):
        STAGES[name](cfg, log)


def cmd_make_demo_data(args, log: Logger) -> int:
    out = Path(args.output_dir)
    ds = make_demo_dataset(n_samples=args.samples, seed=args.seed)
    ds.write_csv(out)
    horizon = args.horizon
    with open(out / "forecast.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        for _ in range(horizon):
            w.writerow([0.5] * ds.n_plants)
    log.info(
        "make-demo-data",
        f"{ds.n_samples} samples x {ds.n_plants} plants in {out}",
    )
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="stochdispatch",
        description="Copula-based scenario generation and stochastic dispatch",
    )
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    demo = sub.add_parser("make-demo-data", help="write the synthetic demo corpus")
    demo.add_argument("--output-dir", required=True)
    demo.add_argument("--samples", type=int, default=20000)
    demo.add_argument("--seed", type=int, default=20210114)
    demo.add_argument("--horizon", type=int, default=4)
    demo.add_argument("--json", action="store_true", help="JSON log lines")

    for name in list(STAGES) + ["pipeline"]:
        sp = sub.add_parser(name, help=f"run the {name} stage")
        sp.add_argument("--config", required=True)
        sp.add_argument("--data-dir", dest="data_dir")
        sp.add_argument("--network")
        sp.add_argument("--case")
        sp.add_argument("--mode", choices=["distribution", "scenario"])
        sp.add_argument("--n-scenarios", dest="n_scenarios", type=int)
        sp.add_argument("--burn-in", dest="burn_in", type=int)
        sp.add_argument("--reduced-target", dest="reduced_target", type=int)
        sp.add_argument("--epsilon", type=float)
        sp.add_argument("--seed", type=int)
        sp.add_argument("--eval-scenarios", dest="eval_scenarios", type=int)
        sp.add_argument("--output-dir", dest="output_dir")
        sp.add_argument("--threads", type=int)
        sp.add_argument("--json", action="store_true", help="JSON log lines")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    log = Logger(getattr(args, "json", False))
    try:
        if args.command == "make-demo-data":
            return cmd_make_demo_data(args, log)
        overrides = {
            k: getattr(args, k, None)
            for k in (
                "data_dir",
                "network",
                "case",
                "mode",
                "n_scenarios",
                "burn_in",
                "reduced_target",
                "epsilon",
                "seed",
                "eval_scenarios",
                "output_dir",
                "threads",
            )
        }
        cfg = RunConfig.load(args.config, overrides)
        if args.command == "pipeline":
            run_pipeline(cfg, log)
        else:
            STAGES[args.command](cfg, log)
        return EXIT_OK
    except (ConfigurationError, SchemaError) as exc:
        log.info(args.command, f"config error: {exc}")
        return EXIT_CONFIG
    except (DataFormatError, DataValueError) as exc:
        log.info(args.command, f"data error: {exc}")
        return EXIT_DATA
    except (NumericalError, ResourceError) as exc:
        log.info(args.command, f"solver failure: {exc}")
        return EXIT_SOLVER
    except StochDispatchError as exc:
        log.info(args.command, f"error: {exc}")
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
