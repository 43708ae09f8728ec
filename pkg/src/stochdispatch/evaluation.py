"""Out-of-sample Monte Carlo evaluation of dispatch schedules.

A schedule (power + reserves) is tested against a held-out scenario set by
solving the per-scenario recourse problem and probability-weighting the
penalty costs; fuel and reserve costs are the schedule's deterministic
components. Evaluation scenario seeds live in a reserved namespace (the
"eval:" prefix hashed into the seed) so optimization and evaluation sets can
never collide silently.
"""

from __future__ import annotations

import csv
import hashlib
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .copula_model import CopulaModel
from .dispatch import DispatchCase, DispatchSolution, solve_recourse
from .errors import ConfigurationError, UnsupportedModeError
from .network import NetworkModel
from .scenario_gen import ScenarioSet

EVAL_SEED_NAMESPACE = "eval:"


def eval_seed(seed: int) -> int:
    """Map an optimization seed into the reserved evaluation namespace."""
    digest = hashlib.sha256(f"{EVAL_SEED_NAMESPACE}{seed}".encode()).digest()
    return int.from_bytes(digest[:8], "big") >> 1


@dataclass(frozen=True)
class CostReport:
    """Cost decomposition of one evaluation run ($ over the horizon)."""

    fuel: float
    reserve: float
    expected_ls: float
    expected_rec: float
    per_interval_ls_mw: np.ndarray  # (T,) probability-weighted MW shed
    per_interval_rec_mw: np.ndarray
    confidence_levels: np.ndarray  # (T,) empirical P(no shedding) or F(R_hi)
    scenario_penalties: np.ndarray = field(repr=False, default=None)
    n_scenarios: int = 0

    def __post_init__(self):
        for name in ("fuel", "reserve", "expected_ls", "expected_rec"):
            if getattr(self, name) < -1e-9:
                raise ConfigurationError(f"negative cost component {name}")

    @property
    def total(self) -> float:
        return self.fuel + self.reserve + self.expected_ls + self.expected_rec

    @property
    def total_standard_error(self) -> float:
        """Standard error of the evaluated total (penalty part only)."""
        if self.scenario_penalties is None or self.n_scenarios < 2:
            return 0.0
        return float(
            np.std(self.scenario_penalties, ddof=1) / np.sqrt(self.n_scenarios)
        )

    def as_dict(self) -> dict:
        return {
            "fuel": self.fuel,
            "reserve": self.reserve,
            "ls": self.expected_ls,
            "rec": self.expected_rec,
            "total": self.total,
            "total_se": self.total_standard_error,
            "per_interval_ls_mw": self.per_interval_ls_mw.tolist(),
            "per_interval_rec_mw": self.per_interval_rec_mw.tolist(),
            "confidence_levels": self.confidence_levels.tolist(),
            "n_scenarios": self.n_scenarios,
        }

    def write_json(self, path) -> None:
        Path(path).write_text(json.dumps(self.as_dict(), indent=2))

    def write_csv(self, path) -> None:
        """One-row table with fuel/reserve/LS/REC/total columns."""
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["fuel", "reserve", "ls", "rec", "total", "total_se"])
            w.writerow(
                [
                    repr(self.fuel),
                    repr(self.reserve),
                    repr(self.expected_ls),
                    repr(self.expected_rec),
                    repr(self.total),
                    repr(self.total_standard_error),
                ]
            )


def monte_carlo_evaluate(
    schedule: DispatchSolution,
    test: ScenarioSet,
    case: DispatchCase,
    net: NetworkModel,
    max_workers: int = 1,
) -> CostReport:
    """Evaluate a schedule on held-out scenarios via per-scenario recourse.

    Reduction order is fixed (scenario index) so reports are deterministic
    regardless of worker count.
    """
    n_sc = test.n_scenarios
    probs = test.probabilities
    h = case.interval_hours

    def run_one(s: int):
        return solve_recourse(schedule, test.values[s], case, net, plants=test.plants)

    if max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            results = list(pool.map(run_one, range(n_sc)))
    else:
        results = [run_one(s) for s in range(n_sc)]

    per_t = test.horizon
    ls_mw = np.zeros(per_t)
    rec_mw = np.zeros(per_t)
    covered = np.zeros(per_t)
    penalties = np.empty(n_sc)
    for s, res in enumerate(results):
        ls_mw += probs[s] * res.shed_mw
        rec_mw += probs[s] * res.curtail_mw
        covered += probs[s] * (res.shed_mw <= 1e-6)
        penalties[s] = res.penalty_cost
    fuel = schedule.costs.fuel
    reserve = schedule.costs.reserve
    return CostReport(
        fuel=fuel,
        reserve=reserve,
        expected_ls=float(case.shed_cost * h * ls_mw.sum()),
        expected_rec=float(case.curtail_cost * h * rec_mw.sum()),
        per_interval_ls_mw=ls_mw,
        per_interval_rec_mw=rec_mw,
        confidence_levels=covered,
        scenario_penalties=penalties,
        n_scenarios=n_sc,
    )


def confidence_table(
    schedule: DispatchSolution, model: CopulaModel, forecasts: np.ndarray
) -> np.ndarray:
    """Per-interval confidence that scheduled downward reserve suffices.

    Returns F_t(R_hi_t): the conditional-sum CDF at the upper coverable bound,
    one value per interval. Only distribution-mode schedules carry R_hi.
    """
    if schedule.mode != "distribution" or schedule.r_hi is None:
        raise UnsupportedModeError(
            "confidence_table needs a distribution-mode schedule with R_hi"
        )
    traj = np.asarray(forecasts, dtype=float)
    if traj.ndim == 1:
        traj = traj[:, None]
    r_cap = model.total_capacity_mw
    out = np.empty(len(schedule.r_hi))
    for t in range(len(out)):
        cond = model.conditional_sum(traj[t])
        out[t] = float(cond.cdf(schedule.r_hi[t] / r_cap))
    return out
