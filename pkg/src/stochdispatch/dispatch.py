"""Real-time economic dispatch: distribution-based and scenario-based LPs.

Both formulations schedule conventional-plant power and up/down reserves over
a short horizon against penalties for expected load shedding (LS) and
renewable curtailment (REC).

Distribution mode prices the risk through the conditional distribution of the
renewable sum: decision bounds (R_lo, R_hi) mark the band reserves can cover,
and the expected energy outside the band enters the objective through convex
piecewise-linear epigraph cuts of the exact shortfall integrals. Transmission
limits use conservative quantiles of each monitored line's conditional
renewable flow. Scenario mode replaces the distribution by an embedded
weighted scenario set with per-scenario recourse (reserve deployment,
curtailment, shedding) and per-scenario line constraints.

Unit convention: every $/MWh coefficient (fuel slope, reserve prices, LS/REC
penalties) is multiplied by the interval length h = step_minutes/60 at build
time, so reported costs are $ over the horizon; fixed costs are $ per
interval. Reserves are treated as fully deployable against renewable
deviations; no per-line deliverability check is applied to deployment.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .copula_model import CopulaModel, UnivariateConditional
from .data_ingest import Plant
from .errors import ConfigurationError, DomainError, NumericalError
from .lp_solver import LinearProgram, LpBuilder, LpSolution, LpStatus, solve
from .network import NetworkModel
from .scenario_gen import ScenarioSet


@dataclass(frozen=True)
class CppParams:
    """One conventional plant: costs, limits, ramps, placement."""

    name: str
    bus: int
    p_min: float
    p_max: float
    ramp_up: float  # MW per interval
    ramp_down: float
    r_up_max: float
    r_down_max: float
    fuel_rate: float  # $/MWh
    fixed_cost: float = 0.0  # $ per interval
    res_up_cost: float = 10.0  # $/MWh
    res_down_cost: float = 10.0
    p_init: float = 0.0

    def __post_init__(self):
        if self.p_min > self.p_max:
            raise DomainError(f"{self.name}: p_min > p_max")
        if self.ramp_up <= 0 or self.ramp_down <= 0:
            raise DomainError(f"{self.name}: ramps must be positive")
        for attr in ("fuel_rate", "fixed_cost", "res_up_cost", "res_down_cost"):
            if getattr(self, attr) < 0:
                raise DomainError(f"{self.name}: {attr} must be >= 0")


@dataclass(frozen=True)
class DispatchCase:
    """Horizon, loads, fleet and penalty prices for one dispatch run."""

    cpps: tuple[CppParams, ...]
    load_mw: np.ndarray  # (T,) system load per interval
    step_minutes: float = 5.0
    shed_cost: float = 1000.0  # c_ls, $/MWh
    curtail_cost: float = 80.0  # c_rec, $/MWh
    beta_line: float = 0.999
    name: str = "case"

    def __post_init__(self):
        object.__setattr__(self, "load_mw", np.atleast_1d(np.asarray(self.load_mw, dtype=float)))
        if len(self.load_mw) < 1:
            raise DomainError("need at least one interval of load")
        if not self.shed_cost > self.curtail_cost > 0:
            raise DomainError("penalties must satisfy c_ls > c_rec > 0")
        if not 0.5 < self.beta_line < 1.0:
            raise DomainError("beta_line must lie in (0.5, 1)")
        if not self.cpps:
            raise DomainError("need at least one conventional plant")

    @property
    def horizon(self) -> int:
        return len(self.load_mw)

    @property
    def n_cpps(self) -> int:
        return len(self.cpps)

    @property
    def interval_hours(self) -> float:
        return self.step_minutes / 60.0

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "step_minutes": self.step_minutes,
            "shed_cost": self.shed_cost,
            "curtail_cost": self.curtail_cost,
            "beta_line": self.beta_line,
            "load_mw": [float(v) for v in self.load_mw],
            "cpps": [
                {
                    "name": c.name,
                    "bus": c.bus,
                    "p_min": c.p_min,
                    "p_max": c.p_max,
                    "ramp_up": c.ramp_up,
                    "ramp_down": c.ramp_down,
                    "r_up_max": c.r_up_max,
                    "r_down_max": c.r_down_max,
                    "fuel_rate": c.fuel_rate,
                    "fixed_cost": c.fixed_cost,
                    "res_up_cost": c.res_up_cost,
                    "res_down_cost": c.res_down_cost,
                    "p_init": c.p_init,
                }
                for c in self.cpps
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DispatchCase":
        return cls(
            cpps=tuple(CppParams(**c) for c in d["cpps"]),
            load_mw=np.array(d["load_mw"], dtype=float),
            step_minutes=float(d.get("step_minutes", 5.0)),
            shed_cost=float(d.get("shed_cost", 1000.0)),
            curtail_cost=float(d.get("curtail_cost", 80.0)),
            beta_line=float(d.get("beta_line", 0.999)),
            name=d.get("name", "case"),
        )

    @classmethod
    def from_json_file(cls, path) -> "DispatchCase":
        return cls.from_file(path)

    @classmethod
    def from_file(cls, path) -> "DispatchCase":
        """Load a case from JSON or TOML (by file suffix)."""
        path = Path(path)
        if path.suffix == ".toml":
            try:
                import tomllib
            except ModuleNotFoundError:
                import tomli as tomllib
            return cls.from_dict(tomllib.loads(path.read_text()))
        return cls.from_dict(json.loads(path.read_text()))


# ---------------------------------------------------------------------------
# Expected shortfall of the renewable-sum conditional.
# ---------------------------------------------------------------------------


class Side(enum.Enum):
    BELOW = "below"  # g(R) = E[(R - X)+]: deficit covered by load shedding
    ABOVE = "above"  # h(R) = E[(X - R)+]: surplus covered by curtailment


@dataclass(frozen=True)
class ShortfallFunction:
    """Convex piecewise-linear over-approximation of a shortfall integral.

    Exact values are computed at the breakpoints from the binned conditional
    (probability mass uniform within a histogram bin gives the closed
    piecewise-quadratic form); chords between breakpoints over-approximate
    the convex integral, which biases reserves conservatively.
    """

    side: Side
    breakpoints: np.ndarray
    values: np.ndarray
    _edges: np.ndarray = field(repr=False)
    _cdf_edges: np.ndarray = field(repr=False)
    _int_edges: np.ndarray = field(repr=False)

    def __call__(self, x):
        """Chord interpolation between breakpoints (the LP's view)."""
        return np.interp(x, self.breakpoints, self.values)

    def exact(self, x):
        """Exact piecewise-quadratic shortfall at arbitrary points."""
        x = np.asarray(x, dtype=float)
        scalar = x.ndim == 0
        xv = np.atleast_1d(np.clip(x, self._edges[0], self._edges[-1]))
        width = self._edges[1] - self._edges[0]
        idx = np.clip(
            np.floor((xv - self._edges[0]) / width).astype(int),
            0,
            len(self._edges) - 2,
        )
        e = self._edges[idx]
        f = self._cdf_edges[idx]
        rho = (self._cdf_edges[idx + 1] - f) / width
        if self.side is Side.BELOW:
            out = self._int_edges[idx] + f * (xv - e) + 0.5 * rho * (xv - e) ** 2
        else:
            e_hi = self._edges[idx + 1]
            f_hi = self._cdf_edges[idx + 1]
            out = (
                self._int_edges[idx + 1]
                + (1.0 - f_hi) * (e_hi - xv)
                + 0.5 * rho * (e_hi - xv) ** 2
            )
        return float(out[0]) if scalar else out.reshape(x.shape)

    def chords(self) -> list[tuple[float, float]]:
        """(slope, intercept) per consecutive breakpoint pair."""
        dx = np.diff(self.breakpoints)
        slopes = np.diff(self.values) / dx
        intercepts = self.values[:-1] - slopes * self.breakpoints[:-1]
        return list(zip(slopes.tolist(), intercepts.tolist()))


def expected_shortfall_pwl(
    cond: UnivariateConditional,
    side: Side,
    breakpoints,
    scale: float = 1.0,
) -> ShortfallFunction:
    """Shortfall integrals of a conditional, exact at the breakpoints.

    Below side: g(R) = integral_lower^R (R - r) f(r) dr (energy short of R).
    Above side: h(R) = integral_R^upper (r - R) f(r) dr (energy beyond R).
    ``scale`` converts the conditional's p.u. support to MW; breakpoints are
    given on the scaled axis and must be strictly increasing within support.
    """
    bp = np.asarray(breakpoints, dtype=float)
    if bp.ndim != 1 or len(bp) < 2:
        raise DomainError("need at least two breakpoints")
    if np.any(np.diff(bp) <= 0):
        raise DomainError("breakpoints must be strictly increasing")
    lo = cond.base.lower * scale
    hi = cond.base.upper * scale
    if bp[0] < lo - 1e-9 or bp[-1] > hi + 1e-9:
        raise DomainError(
            f"breakpoints [{bp[0]}, {bp[-1]}] outside support [{lo}, {hi}]"
        )
    edges = cond.base.edges * scale
    masses = cond.bin_masses()
    cdf_edges = np.concatenate(([0.0], np.cumsum(masses)))
    cdf_edges[-1] = 1.0
    width = edges[1] - edges[0]
    # int_edges[k] (below) = integral of F from lower to edge k;
    # reused (above) as integral of (1 - F) from edge k to upper.
    trap = 0.5 * (cdf_edges[:-1] + cdf_edges[1:]) * width
    if side is Side.BELOW:
        int_edges = np.concatenate(([0.0], np.cumsum(trap)))
    else:
        surv = 0.5 * ((1 - cdf_edges[:-1]) + (1 - cdf_edges[1:])) * width
        int_edges = np.concatenate((np.cumsum(surv[::-1])[::-1], [0.0]))
    fn = ShortfallFunction(
        side=side,
        breakpoints=bp,
        values=np.zeros(len(bp)),
        _edges=edges,
        _cdf_edges=cdf_edges,
        _int_edges=int_edges,
    )
    object.__setattr__(fn, "values", fn.exact(bp))
    return fn


# ---------------------------------------------------------------------------
# Solutions.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CostBreakdown:
    fuel: float
    reserve: float
    expected_ls: float
    expected_rec: float

    @property
    def total(self) -> float:
        return self.fuel + self.reserve + self.expected_ls + self.expected_rec

    def as_dict(self) -> dict:
        return {
            "fuel": self.fuel,
            "reserve": self.reserve,
            "ls": self.expected_ls,
            "rec": self.expected_rec,
            "total": self.total,
        }


@dataclass
class DispatchSolution:
    """Decoded dispatch schedule plus cost decomposition."""

    mode: str  # "distribution" | "scenario"
    status: LpStatus
    p: np.ndarray | None = None  # (I, T) MW
    r_up: np.ndarray | None = None
    r_down: np.ndarray | None = None
    r_sum: np.ndarray | None = None  # (T,) scheduled renewable, distribution mode
    r_lo: np.ndarray | None = None
    r_hi: np.ndarray | None = None
    confidence: np.ndarray | None = None  # (T,) F(R_hi_t)
    costs: CostBreakdown | None = None
    curtail: np.ndarray | None = None  # (SC, T, P) MW, scenario mode
    shed: np.ndarray | None = None  # (SC, T, B) MW
    deploy: np.ndarray | None = None  # (SC, T, I) MW
    scenario_probabilities: np.ndarray | None = None
    plants: tuple[Plant, ...] = ()
    infeasible_rows: list[str] = field(default_factory=list)
    objective_value: float | None = None

    @property
    def is_optimal(self) -> bool:
        return self.status is LpStatus.OPTIMAL

    def to_dict(self) -> dict:
        if not self.is_optimal:
            return {
                "mode": self.mode,
                "status": self.status.value,
                "infeasible_rows": self.infeasible_rows,
            }
        out = {
            "mode": self.mode,
            "status": self.status.value,
            "objective_value": self.objective_value,
            "costs": self.costs.as_dict(),
            "p_mw": self.p.tolist(),
            "r_up_mw": self.r_up.tolist(),
            "r_down_mw": self.r_down.tolist(),
        }
        if self.r_sum is not None:
            out.update(
                r_sum_mw=self.r_sum.tolist(),
                r_lo_mw=self.r_lo.tolist(),
                r_hi_mw=self.r_hi.tolist(),
                confidence=self.confidence.tolist(),
            )
        return out


# ---------------------------------------------------------------------------
# Distribution-based ED.
# ---------------------------------------------------------------------------


def _line_data(net: NetworkModel, case: DispatchCase):
    """Per-monitored-line shift factors for CPPs and the load-flow constant."""
    mon = net.monitored_lines()
    if not mon:
        return []
    ptdf = net.compute_ptdf()
    shares = net.load_shares
    out = []
    for ln in mon:
        k_cpp = np.array([ptdf[ln.index, c.bus] for c in case.cpps])
        k_load_share = float(ptdf[ln.index] @ shares)
        out.append((ln, k_cpp, k_load_share))
    return out


class DistributionDecoder:
    """Maps an LpSolution of the distribution ED back to a DispatchSolution."""

    def __init__(self, case, lp, conds, r_cap, h, plants=()):
        self.case = case
        self.lp = lp
        self.conds = conds
        self.r_cap = r_cap
        self.h = h
        self.plants = tuple(plants)

    def decode(self, sol: LpSolution) -> DispatchSolution:
        case = self.case
        if sol.status is not LpStatus.OPTIMAL:
            return DispatchSolution(
                mode="distribution",
                status=sol.status,
                infeasible_rows=sol.infeasible_rows,
            )
        idx = {lab: i for i, lab in enumerate(self.lp.labels)}
        n_i, n_t = case.n_cpps, case.horizon
        x = sol.x
        p = np.array([[x[idx[f"p_{i}_{t}"]] for t in range(n_t)] for i in range(n_i)])
        ru = np.array([[x[idx[f"ru_{i}_{t}"]] for t in range(n_t)] for i in range(n_i)])
        rd = np.array([[x[idx[f"rd_{i}_{t}"]] for t in range(n_t)] for i in range(n_i)])
        r_sum = np.array([x[idx[f"Rsum_{t}"]] for t in range(n_t)])
        r_lo = np.array([x[idx[f"Rlo_{t}"]] for t in range(n_t)])
        r_hi = np.array([x[idx[f"Rhi_{t}"]] for t in range(n_t)])
        e_ls = np.array([x[idx[f"Els_{t}"]] for t in range(n_t)])
        e_rec = np.array([x[idx[f"Erec_{t}"]] for t in range(n_t)])
        h = self.h
        fuel = float(
            sum(
                case.cpps[i].fuel_rate * h * p[i, t] + case.cpps[i].fixed_cost
                for i in range(n_i)
                for t in range(n_t)
            )
        )
        reserve = float(
            sum(
                case.cpps[i].res_up_cost * h * ru[i, t]
                + case.cpps[i].res_down_cost * h * rd[i, t]
                for i in range(n_i)
                for t in range(n_t)
            )
        )
        confidence = np.array(
            [float(self.conds[t].cdf(r_hi[t] / self.r_cap)) for t in range(n_t)]
        )
        return DispatchSolution(
            mode="distribution",
            status=sol.status,
            p=p,
            r_up=ru,
            r_down=rd,
            r_sum=r_sum,
            r_lo=r_lo,
            r_hi=r_hi,
            confidence=confidence,
            costs=CostBreakdown(
                fuel=fuel,
                reserve=reserve,
                expected_ls=float(case.shed_cost * h * e_ls.sum()),
                expected_rec=float(case.curtail_cost * h * e_rec.sum()),
            ),
            plants=self.plants,
            objective_value=sol.objective_value,
        )


def build_distribution_ed(
    case: DispatchCase,
    model: CopulaModel,
    net: NetworkModel,
    forecasts: np.ndarray,
    breakpoint_stride: int = 2,
    line_bound_mode: str = "quantile",
):
    """Assemble the distribution-based ED as (LinearProgram, decoder).

    ``forecasts`` is the (T, n_plants) p.u. forecast trajectory. The expected
    LS/REC energy enters via epigraph variables over chord cuts of the exact
    shortfall functions (breakpoints every ``breakpoint_stride`` histogram
    bins). Line constraints use precomputed conditional quantiles at
    ``case.beta_line`` (mode "quantile") or the forecast renewable flow
    (mode "forecast", the classical comparison case).
    """
    traj = np.asarray(forecasts, dtype=float)
    if traj.ndim == 1:
        traj = traj[:, None]
    n_t, n_i = case.horizon, case.n_cpps
    if traj.shape != (n_t, model.n_plants):
        raise ConfigurationError(
            f"forecast trajectory shape {traj.shape} != "
            f"({n_t}, {model.n_plants})"
        )
    if line_bound_mode not in ("quantile", "forecast"):
        raise ConfigurationError(f"unknown line_bound_mode {line_bound_mode!r}")
    r_cap = model.total_capacity_mw
    caps = np.array([p.capacity_mw for p in model.plants])
    h = case.interval_hours

    b = LpBuilder(f"{case.name}-distribution")
    for t in range(n_t):
        for i, cpp in enumerate(case.cpps):
            b.add_var(f"p_{i}_{t}", cpp.p_min, cpp.p_max, cpp.fuel_rate * h)
            b.add_var(f"ru_{i}_{t}", 0.0, cpp.r_up_max, cpp.res_up_cost * h)
            b.add_var(f"rd_{i}_{t}", 0.0, cpp.r_down_max, cpp.res_down_cost * h)
        b.add_var(f"Rsum_{t}", 0.0, r_cap)
        b.add_var(f"Rlo_{t}", 0.0, r_cap)
        b.add_var(f"Rhi_{t}", 0.0, r_cap)
        b.add_var(f"Els_{t}", 0.0, np.inf, case.shed_cost * h)
        b.add_var(f"Erec_{t}", 0.0, np.inf, case.curtail_cost * h)
    b.objective_constant = float(sum(c.fixed_cost for c in case.cpps)) * n_t

    conds = []
    lines = _line_data(net, case)
    for t in range(n_t):
        cond = model.conditional_sum(traj[t])
        conds.append(cond)
        # Supply-demand balance.
        coeffs = {b[f"p_{i}_{t}"]: 1.0 for i in range(n_i)}
        coeffs[b[f"Rsum_{t}"]] = 1.0
        b.add_eq(coeffs, float(case.load_mw[t]), f"balance_{t}")
        # Reserve band linkage.
        lo_c = {b[f"Rsum_{t}"]: 1.0, b[f"Rlo_{t}"]: -1.0}
        hi_c = {b[f"Rsum_{t}"]: 1.0, b[f"Rhi_{t}"]: -1.0}
        for i in range(n_i):
            lo_c[b[f"ru_{i}_{t}"]] = -1.0
            hi_c[b[f"rd_{i}_{t}"]] = 1.0
        b.add_eq(lo_c, 0.0, f"band_lo_{t}")
        b.add_eq(hi_c, 0.0, f"band_hi_{t}")
        # Power-plus-reserve box.
        for i in range(n_i):
            b.add_ub(
                {b[f"p_{i}_{t}"]: 1.0, b[f"ru_{i}_{t}"]: 1.0},
                case.cpps[i].p_max,
                f"cap_up_{i}_{t}",
            )
            b.add_ub(
                {b[f"p_{i}_{t}"]: -1.0, b[f"rd_{i}_{t}"]: 1.0},
                -case.cpps[i].p_min,
                f"cap_dn_{i}_{t}",
            )
        # Ramp rates (first interval anchored at p_init).
        for i, cpp in enumerate(case.cpps):
            if t == 0:
                b.add_ub({b[f"p_{i}_{t}"]: 1.0}, cpp.p_init + cpp.ramp_up, f"ramp_up_{i}_{t}")
                b.add_ub({b[f"p_{i}_{t}"]: -1.0}, cpp.ramp_down - cpp.p_init, f"ramp_dn_{i}_{t}")
            else:
                b.add_ub(
                    {b[f"p_{i}_{t}"]: 1.0, b[f"p_{i}_{t-1}"]: -1.0},
                    cpp.ramp_up,
                    f"ramp_up_{i}_{t}",
                )
                b.add_ub(
                    {b[f"p_{i}_{t}"]: -1.0, b[f"p_{i}_{t-1}"]: 1.0},
                    cpp.ramp_down,
                    f"ramp_dn_{i}_{t}",
                )
        # Transmission corridor with conservative renewable-flow bounds.
        for ln, k_cpp, k_load_share in lines:
            if line_bound_mode == "quantile":
                cond_line = model.conditional_line(ln.index, traj[t])
                flow_hi = r_cap * float(cond_line.quantile(case.beta_line))
                flow_lo = r_cap * float(cond_line.quantile(1.0 - case.beta_line))
            else:
                k_plants = net.plant_shift_factors(ln, model.plants)
                flow_hi = flow_lo = float(k_plants @ (traj[t] * caps))
            load_term = k_load_share * float(case.load_mw[t])
            coeffs_hi = {b[f"p_{i}_{t}"]: float(k_cpp[i]) for i in range(n_i)}
            b.add_ub(coeffs_hi, ln.limit_mw + load_term - flow_hi, f"line_hi_{ln.index}_{t}")
            coeffs_lo = {b[f"p_{i}_{t}"]: -float(k_cpp[i]) for i in range(n_i)}
            b.add_ub(coeffs_lo, ln.limit_mw - load_term + flow_lo, f"line_lo_{ln.index}_{t}")
        # Epigraph cuts of the shortfall integrals.
        edges_mw = cond.base.edges * r_cap
        bp = np.unique(np.append(edges_mw[::breakpoint_stride], edges_mw[-1]))
        g = expected_shortfall_pwl(cond, Side.BELOW, bp, scale=r_cap)
        hfn = expected_shortfall_pwl(cond, Side.ABOVE, bp, scale=r_cap)
        for k, (slope, intercept) in enumerate(g.chords()):
            b.add_ub(
                {b[f"Els_{t}"]: -1.0, b[f"Rlo_{t}"]: slope},
                -intercept,
                f"cut_ls_{t}_{k}",
            )
        for k, (slope, intercept) in enumerate(hfn.chords()):
            b.add_ub(
                {b[f"Erec_{t}"]: -1.0, b[f"Rhi_{t}"]: slope},
                -intercept,
                f"cut_rec_{t}_{k}",
            )

    lp = b.build()
    decoder = DistributionDecoder(case, lp, conds, r_cap, h, plants=model.plants)
    return lp, decoder


def solve_distribution_ed(
    case, model, net, forecasts, method: str = "auto", **build_kwargs
) -> DispatchSolution:
    lp, decoder = build_distribution_ed(case, model, net, forecasts, **build_kwargs)
    sol = solve(lp, method=method)
    return decoder.decode(sol)


# ---------------------------------------------------------------------------
# Scenario-based ED.
# ---------------------------------------------------------------------------


class ScenarioDecoder:
    def __init__(self, case, lp, scenarios, load_buses, h):
        self.case = case
        self.lp = lp
        self.scenarios = scenarios
        self.load_buses = load_buses
        self.h = h

    def decode(self, sol: LpSolution) -> DispatchSolution:
        case = self.case
        if sol.status is not LpStatus.OPTIMAL:
            return DispatchSolution(
                mode="scenario",
                status=sol.status,
                infeasible_rows=sol.infeasible_rows,
            )
        idx = {lab: i for i, lab in enumerate(self.lp.labels)}
        sc_set = self.scenarios
        n_i, n_t = case.n_cpps, case.horizon
        n_sc, n_p = sc_set.n_scenarios, sc_set.n_plants
        x = sol.x
        p = np.array([[x[idx[f"p_{i}_{t}"]] for t in range(n_t)] for i in range(n_i)])
        ru = np.array([[x[idx[f"ru_{i}_{t}"]] for t in range(n_t)] for i in range(n_i)])
        rd = np.array([[x[idx[f"rd_{i}_{t}"]] for t in range(n_t)] for i in range(n_i)])
        curtail = np.zeros((n_sc, n_t, n_p))
        deploy = np.zeros((n_sc, n_t, n_i))
        shed = np.zeros((n_sc, n_t, len(self.load_buses)))
        for s in range(n_sc):
            for t in range(n_t):
                for j in range(n_p):
                    curtail[s, t, j] = x[idx[f"wc_{j}_{s}_{t}"]]
                for i in range(n_i):
                    deploy[s, t, i] = x[idx[f"ra_{i}_{s}_{t}"]]
                for bi, _ in enumerate(self.load_buses):
                    shed[s, t, bi] = x[idx[f"ls_{bi}_{s}_{t}"]]
        h = self.h
        fuel = float(
            sum(
                case.cpps[i].fuel_rate * h * p[i, t] + case.cpps[i].fixed_cost
                for i in range(n_i)
                for t in range(n_t)
            )
        )
        reserve = float(
            sum(
                case.cpps[i].res_up_cost * h * ru[i, t]
                + case.cpps[i].res_down_cost * h * rd[i, t]
                for i in range(n_i)
                for t in range(n_t)
            )
        )
        probs = sc_set.probabilities
        e_rec = float(case.curtail_cost * h * (probs @ curtail.sum(axis=(1, 2))))
        e_ls = float(case.shed_cost * h * (probs @ shed.sum(axis=(1, 2))))
        return DispatchSolution(
            mode="scenario",
            status=sol.status,
            p=p,
            r_up=ru,
            r_down=rd,
            costs=CostBreakdown(fuel, reserve, e_ls, e_rec),
            curtail=curtail,
            shed=shed,
            deploy=deploy,
            scenario_probabilities=probs.copy(),
            plants=sc_set.plants,
            objective_value=sol.objective_value,
        )


def build_scenario_ed(case: DispatchCase, scenarios: ScenarioSet, net: NetworkModel):
    """Assemble the scenario-based ED as (LinearProgram, decoder).

    First stage: power and reserves with the same box/ramp limits as the
    distribution model. Per scenario and interval: reserve deployment within
    the scheduled band, curtailment up to scenario availability, shedding up
    to bus load, supply-demand balance, and two-sided line limits.
    """
    if not scenarios.plants:
        raise ConfigurationError("scenario set carries no plant records")
    n_t, n_i = case.horizon, case.n_cpps
    if scenarios.horizon != n_t:
        raise ConfigurationError(
            f"scenario horizon {scenarios.horizon} != case horizon {n_t}"
        )
    if abs(scenarios.probabilities.sum() - 1.0) > 1e-9:
        raise ConfigurationError("scenario probabilities must sum to 1")
    caps = np.array([p.capacity_mw for p in scenarios.plants])
    n_sc, n_p = scenarios.n_scenarios, scenarios.n_plants
    h = case.interval_hours
    shares = net.load_shares
    load_buses = [bus.index for bus in net.buses if bus.load_share > 0]
    avail_mw = scenarios.values * caps[None, None, :]

    b = LpBuilder(f"{case.name}-scenario")
    for t in range(n_t):
        for i, cpp in enumerate(case.cpps):
            b.add_var(f"p_{i}_{t}", cpp.p_min, cpp.p_max, cpp.fuel_rate * h)
            b.add_var(f"ru_{i}_{t}", 0.0, cpp.r_up_max, cpp.res_up_cost * h)
            b.add_var(f"rd_{i}_{t}", 0.0, cpp.r_down_max, cpp.res_down_cost * h)
    b.objective_constant = float(sum(c.fixed_cost for c in case.cpps)) * n_t

    for t in range(n_t):
        for i, cpp in enumerate(case.cpps):
            b.add_ub(
                {b[f"p_{i}_{t}"]: 1.0, b[f"ru_{i}_{t}"]: 1.0},
                cpp.p_max,
                f"cap_up_{i}_{t}",
            )
            b.add_ub(
                {b[f"p_{i}_{t}"]: -1.0, b[f"rd_{i}_{t}"]: 1.0},
                -cpp.p_min,
                f"cap_dn_{i}_{t}",
            )
            if t == 0:
                b.add_ub({b[f"p_{i}_{t}"]: 1.0}, cpp.p_init + cpp.ramp_up, f"ramp_up_{i}_{t}")
                b.add_ub({b[f"p_{i}_{t}"]: -1.0}, cpp.ramp_down - cpp.p_init, f"ramp_dn_{i}_{t}")
            else:
                b.add_ub(
                    {b[f"p_{i}_{t}"]: 1.0, b[f"p_{i}_{t-1}"]: -1.0},
                    cpp.ramp_up,
                    f"ramp_up_{i}_{t}",
                )
                b.add_ub(
                    {b[f"p_{i}_{t}"]: -1.0, b[f"p_{i}_{t-1}"]: 1.0},
                    cpp.ramp_down,
                    f"ramp_dn_{i}_{t}",
                )

    lines = _line_data(net, case)
    ptdf = net.compute_ptdf() if lines else None
    probs = scenarios.probabilities
    for s in range(n_sc):
        w = probs[s]
        for t in range(n_t):
            for i, cpp in enumerate(case.cpps):
                b.add_var(f"ra_{i}_{s}_{t}", -cpp.r_down_max, cpp.r_up_max)
            for j in range(n_p):
                b.add_var(
                    f"wc_{j}_{s}_{t}",
                    0.0,
                    float(avail_mw[s, t, j]),
                    w * case.curtail_cost * h,
                )
            for bi, _ in enumerate(load_buses):
                share = shares[load_buses[bi]]
                b.add_var(
                    f"ls_{bi}_{s}_{t}",
                    0.0,
                    float(share * case.load_mw[t]),
                    w * case.shed_cost * h,
                )
            for i in range(n_i):
                b.add_ub(
                    {b[f"ra_{i}_{s}_{t}"]: 1.0, b[f"ru_{i}_{t}"]: -1.0},
                    0.0,
                    f"ra_up_{i}_{s}_{t}",
                )
                b.add_ub(
                    {b[f"ra_{i}_{s}_{t}"]: -1.0, b[f"rd_{i}_{t}"]: -1.0},
                    0.0,
                    f"ra_dn_{i}_{s}_{t}",
                )
            coeffs = {b[f"p_{i}_{t}"]: 1.0 for i in range(n_i)}
            for i in range(n_i):
                coeffs[b[f"ra_{i}_{s}_{t}"]] = 1.0
            for j in range(n_p):
                coeffs[b[f"wc_{j}_{s}_{t}"]] = -1.0
            for bi in range(len(load_buses)):
                coeffs[b[f"ls_{bi}_{s}_{t}"]] = 1.0
            b.add_eq(
                coeffs,
                float(case.load_mw[t] - avail_mw[s, t].sum()),
                f"balance_{s}_{t}",
            )
            for ln, k_cpp, _ in lines:
                k_plants = np.array(
                    [ptdf[ln.index, p.bus] for p in scenarios.plants]
                )
                k_loads = np.array([ptdf[ln.index, bus] for bus in load_buses])
                const = float(
                    k_plants @ avail_mw[s, t]
                    - sum(
                        ptdf[ln.index, bus.index] * bus.load_share * case.load_mw[t]
                        for bus in net.buses
                    )
                )
                coeffs_hi: dict[int, float] = {}
                for i in range(n_i):
                    coeffs_hi[b[f"p_{i}_{t}"]] = float(k_cpp[i])
                    coeffs_hi[b[f"ra_{i}_{s}_{t}"]] = float(k_cpp[i])
                for j in range(n_p):
                    coeffs_hi[b[f"wc_{j}_{s}_{t}"]] = -float(k_plants[j])
                for bi in range(len(load_buses)):
                    coeffs_hi[b[f"ls_{bi}_{s}_{t}"]] = float(k_loads[bi])
                b.add_ub(coeffs_hi, ln.limit_mw - const, f"line_hi_{ln.index}_{s}_{t}")
                coeffs_lo = {k: -v for k, v in coeffs_hi.items()}
                b.add_ub(coeffs_lo, ln.limit_mw + const, f"line_lo_{ln.index}_{s}_{t}")

    lp = b.build()
    decoder = ScenarioDecoder(case, lp, scenarios, load_buses, h)
    return lp, decoder


def solve_scenario_ed(
    case, scenarios, net, method: str = "auto"
) -> DispatchSolution:
    lp, decoder = build_scenario_ed(case, scenarios, net)
    sol = solve(lp, method=method)
    return decoder.decode(sol)


# ---------------------------------------------------------------------------
# Recourse for one realized scenario.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RecourseResult:
    """Post-realization corrective actions for one scenario."""

    shed_mw: np.ndarray  # (T,) total MW shed per interval
    curtail_mw: np.ndarray  # (T,) total MW curtailed per interval
    deploy_mw: np.ndarray  # (I, T) reserve deployment
    penalty_cost: float  # $ over the horizon

    @property
    def any_shedding(self) -> np.ndarray:
        return self.shed_mw > 1e-6


def solve_recourse(
    schedule: DispatchSolution,
    realized: np.ndarray,
    case: DispatchCase,
    net: NetworkModel,
    plants: tuple[Plant, ...] | None = None,
    method: str = "bland",
) -> RecourseResult:
    """Minimize LS/REC penalties for one realized trajectory.

    The schedule fixes power and reserves; the recourse chooses reserve
    deployment within the scheduled band, curtailment up to availability and
    shedding up to bus load, subject to balance and line limits. The problem
    decouples across intervals and is structurally feasible for any schedule
    with total power not exceeding load.
    """
    if not schedule.is_optimal:
        raise ConfigurationError("cannot run recourse on a non-optimal schedule")
    plants = plants or schedule.plants
    if not plants:
        raise ConfigurationError("plant records required (schedule.plants empty)")
    realized = np.asarray(realized, dtype=float)
    if realized.ndim == 1:
        realized = realized[:, None]
    n_t, n_p = realized.shape
    if n_t != case.horizon:
        raise ConfigurationError("realized trajectory length != case horizon")
    caps = np.array([p.capacity_mw for p in plants])
    avail = realized * caps[None, :]
    n_i = case.n_cpps
    h = case.interval_hours
    shares = net.load_shares
    load_buses = [bus.index for bus in net.buses if bus.load_share > 0]
    lines = _line_data(net, case)
    ptdf = net.compute_ptdf() if lines else None

    shed = np.zeros(n_t)
    curtail = np.zeros(n_t)
    deploy = np.zeros((n_i, n_t))
    penalty = 0.0
    for t in range(n_t):
        b = LpBuilder(f"recourse_{t}")
        for i, cpp in enumerate(case.cpps):
            b.add_var(
                f"ra_{i}",
                -float(schedule.r_down[i, t]),
                float(schedule.r_up[i, t]),
            )
        for j in range(n_p):
            b.add_var(f"wc_{j}", 0.0, float(avail[t, j]), case.curtail_cost * h)
        for bi, bus in enumerate(load_buses):
            b.add_var(
                f"ls_{bi}",
                0.0,
                float(shares[bus] * case.load_mw[t]),
                case.shed_cost * h,
            )
        p_tot = float(schedule.p[:, t].sum())
        coeffs = {b[f"ra_{i}"]: 1.0 for i in range(n_i)}
        for j in range(n_p):
            coeffs[b[f"wc_{j}"]] = -1.0
        for bi in range(len(load_buses)):
            coeffs[b[f"ls_{bi}"]] = 1.0
        b.add_eq(
            coeffs,
            float(case.load_mw[t] - avail[t].sum() - p_tot),
            f"balance_{t}",
        )
        for ln, k_cpp, _ in lines:
            k_plants = np.array([ptdf[ln.index, p.bus] for p in plants])
            k_loads = np.array([ptdf[ln.index, bus] for bus in load_buses])
            const = float(
                k_cpp @ schedule.p[:, t]
                + k_plants @ avail[t]
                - sum(
                    ptdf[ln.index, bus.index] * bus.load_share * case.load_mw[t]
                    for bus in net.buses
                )
            )
            coeffs_hi: dict[int, float] = {}
            for i in range(n_i):
                coeffs_hi[b[f"ra_{i}"]] = float(k_cpp[i])
            for j in range(n_p):
                coeffs_hi[b[f"wc_{j}"]] = -float(k_plants[j])
            for bi in range(len(load_buses)):
                coeffs_hi[b[f"ls_{bi}"]] = float(k_loads[bi])
            b.add_ub(coeffs_hi, ln.limit_mw - const, f"line_hi_{ln.index}")
            coeffs_lo = {k: -v for k, v in coeffs_hi.items()}
            b.add_ub(coeffs_lo, ln.limit_mw + const, f"line_lo_{ln.index}")
        lp = b.build()
        sol = solve(lp, method=method)
        if sol.status is not LpStatus.OPTIMAL:
            raise NumericalError(
                f"recourse LP not optimal at interval {t}: {sol.status.value} "
                f"(rows {sol.infeasible_rows})"
            )
        lp_labels = {lab: i for i, lab in enumerate(lp.labels)}
        for i in range(n_i):
            deploy[i, t] = sol.x[lp_labels[f"ra_{i}"]]
        curtail[t] = sum(sol.x[lp_labels[f"wc_{j}"]] for j in range(n_p))
        shed[t] = sum(sol.x[lp_labels[f"ls_{bi}"]] for bi in range(len(load_buses)))
        penalty += sol.objective_value
    return RecourseResult(
        shed_mw=shed, curtail_mw=curtail, deploy_mw=deploy, penalty_cost=float(penalty)
    )
