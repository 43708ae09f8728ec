"""Gaussian-copula joint model over forecast, actual and derived variables.

The joint law couples one histogram marginal per variable through a Gaussian
copula. Conditioning (each plant given the rest, the renewable sum given all
forecasts, per-line renewable flow given all forecasts) is performed in latent
z-space by partitioned Gaussian conditioning, which is mathematically
identical to evaluating copula-density ratios for the Gaussian family but
needs no quadrature. Storage stays O(n_variables * n_bins): there is no joint
probability table anywhere.

Derived variables (renewable sum, per-line renewable flows) are fitted as
additional copula dimensions from historical weighted sums of plant outputs,
not derived analytically from the plant conditionals.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr, ndtri

from .data_ingest import HistoricalDataset, Plant, PlantKind
from .errors import (
    ConfigurationError,
    DegenerateVariableError,
    DomainError,
    FitError,
    NearDeterministicWarning,
    SingularFitWarning,
)
from .marginals import DEFAULT_BIN_WIDTH, EmpiricalMarginal, fit_pdh

MIN_EIGENVALUE = 1e-10
MIN_COND_STD = 1e-8
SUM_LABEL = "sum"


def line_label(line_index: int) -> str:
    return f"line_{line_index}"


@dataclass(frozen=True)
class DerivedVariableSpec:
    """Extra copula dimension built as a weighted sum of plant p.u. actuals."""

    name: str
    weights: np.ndarray  # one coefficient per plant

    def evaluate(self, actual_pu: np.ndarray) -> np.ndarray:
        return np.asarray(actual_pu, dtype=float) @ np.asarray(
            self.weights, dtype=float
        )


def sum_variable(plants) -> DerivedVariableSpec:
    """Renewable-sum dimension, in p.u. of total renewable capacity."""
    caps = np.array([p.capacity_mw for p in plants], dtype=float)
    return DerivedVariableSpec(SUM_LABEL, caps / caps.sum())


def line_flow_variable(line_index: int, shift_factors, plants) -> DerivedVariableSpec:
    """Per-line renewable-flow dimension.

    ``shift_factors`` holds one PTDF entry per plant (the factor of the
    plant's bus on the given line). Values are normalized by total renewable
    capacity so the variable shares the p.u. convention of the sum dimension.
    """
    caps = np.array([p.capacity_mw for p in plants], dtype=float)
    k = np.asarray(shift_factors, dtype=float)
    if k.shape != caps.shape:
        raise DomainError("one shift factor per plant required")
    return DerivedVariableSpec(line_label(line_index), k * caps / caps.sum())


def repair_correlation(corr: np.ndarray, min_eig: float = MIN_EIGENVALUE):
    """Clip eigenvalues at ``min_eig`` and renormalize to unit diagonal.

    Unit-diagonal renormalization can push the smallest eigenvalue back
    under the floor, so clip-and-renormalize iterates (with a slightly
    raised clip level) until the floor genuinely holds.
    """
    corr = 0.5 * (corr + corr.T)
    # Clip above the floor: renormalization and eigensolver jitter can move
    # eigenvalues by O(machine epsilon), which matters at the 1e-10 scale.
    clip = 4.0 * min_eig
    for _ in range(60):
        vals, vecs = np.linalg.eigh(corr)
        if vals.min() >= min_eig:
            return corr
        vals = np.clip(vals, clip, None)
        repaired = (vecs * vals) @ vecs.T
        d = np.sqrt(np.diag(repaired))
        repaired = repaired / np.outer(d, d)
        np.fill_diagonal(repaired, 1.0)
        corr = 0.5 * (repaired + repaired.T)
        clip *= 2.0
    raise FitError("correlation repair did not converge")  # pragma: no cover


@dataclass(frozen=True)
class UnivariateConditional:
    """One-dimensional conditional: marginal pushed through a latent Gaussian.

    The conditional CDF at x is Phi((z(x) - cond_mean)/cond_std) with
    z(x) = Phi^-1(F(x)); its quantile inverts the same chain exactly. Bin
    masses under the conditional follow from the edge CDF values and treat
    mass as uniform within a bin (the histogram convention), which gives the
    piecewise-quadratic closed forms used by the dispatch shortfall integrals.
    """

    base: EmpiricalMarginal
    cond_mean: float
    cond_std: float

    def __post_init__(self):
        if self.cond_std <= 0:
            raise DomainError("cond_std must be positive")

    def _latent_edges(self) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return ndtri(np.clip(self.base.cdf_at_edges, 0.0, 1.0))

    def cdf(self, x):
        u = self.base.cdf(x)
        with np.errstate(divide="ignore"):
            z = ndtri(u)
        return ndtr((z - self.cond_mean) / self.cond_std)

    def pdf(self, x):
        """Conditional density via the copula-ratio form.

        f_cond(x) = f(x) * phi((z-m)/s) / (s * phi(z)), zero on zero-mass bins.
        """
        x = np.asarray(x, dtype=float)
        scalar = x.ndim == 0
        xv = np.atleast_1d(x)
        u = np.atleast_1d(self.base.cdf(xv))
        idx = np.clip(
            np.floor((xv - self.base.lower) / self.base.bin_width).astype(int),
            0,
            self.base.n_bins - 1,
        )
        base_density = self.base.masses[idx] / self.base.bin_width
        out = np.zeros_like(xv)
        ok = (base_density > 0) & (u > 0) & (u < 1)
        if np.any(ok):
            z = ndtri(u[ok])
            ratio = np.exp(
                -0.5 * ((z - self.cond_mean) / self.cond_std) ** 2 + 0.5 * z**2
            ) / self.cond_std
            out[ok] = base_density[ok] * ratio
        return float(out[0]) if scalar else out.reshape(x.shape)

    def quantile(self, beta):
        """x with conditional-CDF(x) = beta, via latent-space inversion."""
        beta = np.asarray(beta, dtype=float)
        if np.any(beta <= 0.0) or np.any(beta >= 1.0):
            raise DomainError("beta must lie strictly inside (0, 1)")
        u = ndtr(self.cond_mean + self.cond_std * ndtri(beta))
        return self.base.inverse_cdf(np.clip(u, 0.0, 1.0))

    def sample(self, uniforms):
        """Inverse-transform samples from the conditional."""
        u = np.asarray(uniforms, dtype=float)
        return self.base.inverse_cdf(
            np.clip(ndtr(self.cond_mean + self.cond_std * ndtri(u)), 0.0, 1.0)
        )

    def bin_masses(self) -> np.ndarray:
        """Per-bin probability mass under the conditional (sums to 1)."""
        zc = (self._latent_edges() - self.cond_mean) / self.cond_std
        cdf_edges = ndtr(zc)
        cdf_edges[0] = 0.0
        cdf_edges[-1] = 1.0
        return np.diff(cdf_edges)

    def mean(self) -> float:
        mids = 0.5 * (self.base.edges[:-1] + self.base.edges[1:])
        return float(self.bin_masses() @ mids)


class CopulaModel:
    """Fitted Gaussian copula over actual, forecast and derived variables."""

    def __init__(
        self,
        labels: list[str],
        corr: np.ndarray,
        marginals: list[EmpiricalMarginal],
        plants: tuple[Plant, ...],
        n_samples: int,
        derived_names: tuple[str, ...] = (),
        frozen_values: dict[str, float] | None = None,
    ):
        if len(labels) != len(marginals) or corr.shape != (len(labels),) * 2:
            raise ConfigurationError("labels/corr/marginals sizes disagree")
        self.labels = list(labels)
        self.corr = np.asarray(corr, dtype=float)
        self.marginals = list(marginals)
        self.plants = tuple(plants)
        self.n_samples = int(n_samples)
        self.derived_names = tuple(derived_names)
        # Derived variables that were constant in the data (e.g. a line with
        # all-zero shift factors): represented as frozen point masses outside
        # the correlation structure.
        self.frozen_values = dict(frozen_values or {})
        self.index = {lab: i for i, lab in enumerate(self.labels)}
        self._cond_cov_cache: dict = {}

    # -- label helpers -----------------------------------------------------

    @property
    def n_plants(self) -> int:
        return len(self.plants)

    @property
    def actual_labels(self) -> list[str]:
        return [f"actual_{j}" for j in range(self.n_plants)]

    @property
    def forecast_labels(self) -> list[str]:
        return [f"forecast_{j}" for j in range(self.n_plants)]

    @property
    def total_capacity_mw(self) -> float:
        return float(sum(p.capacity_mw for p in self.plants))

    def marginal(self, label: str) -> EmpiricalMarginal:
        return self.marginals[self.index[label]]

    # -- latent transforms ---------------------------------------------------

    def to_latent(self, label: str, x):
        """Map data-space values to latent z with the fit-time correction.

        The half-sample/(N+1) shrink keeps externally supplied values (which
        may sit on the support boundary) strictly inside (0, 1).
        """
        u = self.marginal(label).cdf(x)
        n = self.n_samples
        return ndtri((n * np.asarray(u, dtype=float) + 0.5) / (n + 1.0))

    def _forecast_latents(self, forecasts) -> np.ndarray:
        f = _as_forecast_array(forecasts, self.n_plants)
        return np.array(
            [self.to_latent(f"forecast_{j}", f[j]) for j in range(self.n_plants)]
        )

    # -- conditioning --------------------------------------------------------

    def conditional_of(
        self, target: str, given: dict[str, float]
    ) -> UnivariateConditional:
        """Full conditional of ``target`` given data-space values.

        ``given`` maps variable labels to values inside their marginal
        supports. The latent (cond_mean, cond_std) come from partitioned
        Gaussian conditioning of the copula correlation.
        """
        if target in given:
            raise DomainError(f"target {target!r} also appears in given")
        if target not in self.index:
            raise ConfigurationError(f"unknown variable {target!r}")
        for lab, val in given.items():
            if lab not in self.index:
                raise ConfigurationError(f"unknown conditioning variable {lab!r}")
            marg = self.marginal(lab)
            if not (marg.lower - 1e-9 <= val <= marg.upper + 1e-9):
                raise DomainError(
                    f"conditioning value {val} for {lab!r} outside marginal "
                    f"support [{marg.lower}, {marg.upper}]"
                )
        g_labels = list(given)
        z_g = np.array([self.to_latent(lab, given[lab]) for lab in g_labels])
        mean, std = self._condition_latent(target, g_labels, z_g)
        return UnivariateConditional(self.marginal(target), mean, std)

    def _condition_latent(self, target: str, given_labels, z_given):
        """Latent Gaussian conditional (mean, std) of target given z values."""
        t = self.index[target]
        g = [self.index[lab] for lab in given_labels]
        if not g:
            return 0.0, 1.0
        key = (t, tuple(g))
        if key not in self._cond_cov_cache:
            sgg = self.corr[np.ix_(g, g)]
            stg = self.corr[t, g]
            w = np.linalg.solve(sgg, stg)
            var = 1.0 - float(stg @ w)
            self._cond_cov_cache[key] = (w, var)
        w, var = self._cond_cov_cache[key]
        mean = float(w @ z_given)
        if var < MIN_COND_STD**2:
            warnings.warn(
                f"conditional of {target!r} is near-deterministic; "
                f"std floored at {MIN_COND_STD}",
                NearDeterministicWarning,
                stacklevel=3,
            )
            return mean, MIN_COND_STD
        return mean, float(np.sqrt(var))

    def full_conditional(
        self, target: str, given: dict[str, float]
    ) -> UnivariateConditional:
        """Alias of :meth:`conditional_of` (per-plant Gibbs conditional)."""
        return self.conditional_of(target, given)

    def conditional_sum(self, forecasts) -> UnivariateConditional:
        """Conditional of the renewable sum given all plant forecasts.

        The sum variable is in p.u. of total renewable capacity; multiply
        quantiles by ``total_capacity_mw`` at the dispatch boundary.
        """
        if SUM_LABEL not in self.index:
            raise ConfigurationError(
                "model was fitted without the renewable-sum derived variable"
            )
        return self._derived_conditional(SUM_LABEL, forecasts)

    def conditional_line(self, line_index: int, forecasts) -> UnivariateConditional:
        """Conditional of one line's renewable flow given all forecasts."""
        lab = line_label(line_index)
        if lab in self.frozen_values:
            return self._frozen_conditional(lab)
        if lab not in self.index:
            raise ConfigurationError(
                f"line {line_index} was not registered as a derived variable "
                "at fit time"
            )
        return self._derived_conditional(lab, forecasts)

    def _frozen_conditional(self, label: str) -> UnivariateConditional:
        """Point-mass conditional for a constant derived variable."""
        v = self.frozen_values[label]
        w = self.marginals[0].bin_width if self.marginals else DEFAULT_BIN_WIDTH
        base = EmpiricalMarginal(
            lower=v - 0.5 * w, upper=v + 0.5 * w, bin_width=w, masses=np.array([1.0])
        )
        return UnivariateConditional(base, 0.0, 1.0)

    def _derived_conditional(self, label, forecasts) -> UnivariateConditional:
        f = _as_forecast_array(forecasts, self.n_plants)
        given = {f"forecast_{j}": float(f[j]) for j in range(self.n_plants)}
        return self.conditional_of(label, given)

    def actuals_given_forecasts(self, forecasts):
        """Joint latent conditional of all plant actuals given all forecasts.

        Returns (mu, cov): the conditional mean vector and covariance of the
        plant-actual latent block. cov does not depend on the forecast values.
        """
        a = [self.index[lab] for lab in self.actual_labels]
        fidx = [self.index[lab] for lab in self.forecast_labels]
        z_f = self._forecast_latents(forecasts)
        sff = self.corr[np.ix_(fidx, fidx)]
        saf = self.corr[np.ix_(a, fidx)]
        w = np.linalg.solve(sff, saf.T)  # (F, A)
        mu = w.T @ z_f
        cov = self.corr[np.ix_(a, a)] - saf @ w
        cov = repair_correlation_free(cov)
        return mu, cov

    # -- Gibbs support -------------------------------------------------------

    def gibbs_coefficients(self, forecasts):
        """Per-plant full-conditional coefficients for latent Gibbs sweeps.

        For the block (actuals, forecasts) with precision matrix L, the full
        conditional of actual j given everything else is Gaussian with
        mean  -(1/L_jj) * sum_k L_jk z_k  and variance 1/L_jj. Returns
        (offsets, coefs, stds): per-plant forecast offsets, per-plant rows of
        coefficients over the *other* plant actuals, and conditional stds.
        Derived variables are marginalized (simply excluded from the block).
        """
        a = [self.index[lab] for lab in self.actual_labels]
        fidx = [self.index[lab] for lab in self.forecast_labels]
        block = a + fidx
        sub = self.corr[np.ix_(block, block)]
        prec = np.linalg.inv(sub)
        z_f = self._forecast_latents(forecasts)
        n = self.n_plants
        offsets = np.empty(n)
        coefs = np.zeros((n, n))
        stds = np.empty(n)
        for j in range(n):
            pjj = prec[j, j]
            stds[j] = np.sqrt(max(1.0 / pjj, MIN_COND_STD**2))
            offsets[j] = -(prec[j, n:] @ z_f) / pjj
            row = -prec[j, :n] / pjj
            row[j] = 0.0
            coefs[j] = row
        return offsets, coefs, stds

    # -- serialization ---------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "labels": self.labels,
            "n_samples": self.n_samples,
            "derived_names": list(self.derived_names),
            "frozen_values": {k: repr(v) for k, v in self.frozen_values.items()},
            "corr": [[repr(float(v)) for v in row] for row in self.corr],
            "marginals": [m.to_dict() for m in self.marginals],
            "plants": [
                {
                    "index": p.index,
                    "name": p.name,
                    "kind": p.kind.value,
                    "capacity_mw": p.capacity_mw,
                    "bus": p.bus,
                }
                for p in self.plants
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CopulaModel":
        plants = tuple(
            Plant(
                index=int(p["index"]),
                name=p["name"],
                kind=PlantKind(p["kind"]),
                capacity_mw=float(p["capacity_mw"]),
                bus=int(p["bus"]),
            )
            for p in d["plants"]
        )
        corr = np.array([[float(v) for v in row] for row in d["corr"]])
        return cls(
            labels=list(d["labels"]),
            corr=corr,
            marginals=[EmpiricalMarginal.from_dict(m) for m in d["marginals"]],
            plants=plants,
            n_samples=int(d["n_samples"]),
            derived_names=tuple(d["derived_names"]),
            frozen_values={
                k: float(v) for k, v in d.get("frozen_values", {}).items()
            },
        )

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_json(cls, text: str) -> "CopulaModel":
        return cls.from_dict(json.loads(text))


def repair_correlation_free(cov: np.ndarray, min_eig: float = MIN_EIGENVALUE):
    """Clip eigenvalues of a covariance (no unit-diagonal renormalization)."""
    cov = 0.5 * (cov + cov.T)
    vals, vecs = np.linalg.eigh(cov)
    if vals.min() >= min_eig:
        return cov
    vals = np.clip(vals, min_eig, None)
    return (vecs * vals) @ vecs.T


def _as_forecast_array(forecasts, n_plants: int) -> np.ndarray:
    if isinstance(forecasts, dict):
        arr = np.empty(n_plants)
        for j in range(n_plants):
            if j not in forecasts:
                raise DomainError(f"forecast missing for plant {j}")
            arr[j] = forecasts[j]
        return arr
    arr = np.asarray(forecasts, dtype=float).ravel()
    if arr.shape != (n_plants,):
        raise DomainError(
            f"expected {n_plants} forecast values, got shape {arr.shape}"
        )
    return arr


def fit_copula(
    data: HistoricalDataset,
    derived: tuple[DerivedVariableSpec, ...] = (),
    bin_width: float = DEFAULT_BIN_WIDTH,
    min_samples: int = 50,
) -> CopulaModel:
    """Fit marginals and the Gaussian-copula correlation from history.

    Variables are ordered actual_0..actual_{P-1}, forecast_0..forecast_{P-1},
    then one dimension per derived spec. Each column is mapped to latent space
    by z = ndtri((N*F(x) + 0.5)/(N + 1)) with F its fitted marginal CDF; the
    correlation is the Pearson correlation of the latent columns, repaired to
    the nearest positive-definite matrix by eigenvalue clipping.
    """
    n = data.n_samples
    if n < min_samples:
        raise FitError(f"need at least {min_samples} samples, got {n}")
    columns: list[np.ndarray] = []
    labels: list[str] = []
    marginal_kwargs: list[dict] = []
    for j in range(data.n_plants):
        labels.append(f"actual_{j}")
        columns.append(data.actual[:, j])
        marginal_kwargs.append({"lower": 0.0, "upper": 1.0})
    for j in range(data.n_plants):
        labels.append(f"forecast_{j}")
        columns.append(data.forecast[:, j])
        marginal_kwargs.append({"lower": 0.0, "upper": 1.0})
    derived_names = []
    frozen: dict[str, float] = {}
    for spec in derived:
        if len(np.asarray(spec.weights)) != data.n_plants:
            raise ConfigurationError(
                f"derived variable {spec.name!r}: needs one weight per plant"
            )
        if not np.all(np.isfinite(spec.weights)):
            raise ConfigurationError(
                f"derived variable {spec.name!r}: non-finite weights"
            )
        vals = spec.evaluate(data.actual)
        derived_names.append(spec.name)
        if np.ptp(vals) == 0.0:
            # Constant derived variable (e.g. all-zero shift factors): a
            # point mass, kept outside the correlation structure.
            frozen[spec.name] = float(vals[0])
            continue
        labels.append(spec.name)
        columns.append(vals)
        if vals.min() >= -1e-12 and vals.max() <= 1.0 + 1e-12:
            marginal_kwargs.append({"lower": 0.0, "upper": 1.0})
        else:
            marginal_kwargs.append({"lower": None, "upper": None})

    marginals = []
    z_cols = []
    for lab, col, kw in zip(labels, columns, marginal_kwargs):
        if np.ptp(col) == 0.0:
            raise DegenerateVariableError(
                f"variable {lab!r} is constant; refusing to fit a copula over it"
            )
        marg = fit_pdh(col, bin_width=bin_width, **kw)
        marginals.append(marg)
        u = marg.cdf(col)
        z_cols.append(ndtri((n * u + 0.5) / (n + 1.0)))

    z = np.column_stack(z_cols)
    if n < len(labels):
        warnings.warn(
            f"only {n} samples for {len(labels)} variables; applying ridge "
            "repair to the correlation estimate",
            SingularFitWarning,
            stacklevel=2,
        )
        corr = np.corrcoef(z, rowvar=False)
        corr = (corr + 1e-4 * np.eye(len(labels))) / (1 + 1e-4)
    else:
        corr = np.corrcoef(z, rowvar=False)
    corr = repair_correlation(corr)
    return CopulaModel(
        labels=labels,
        corr=corr,
        marginals=marginals,
        plants=data.plants,
        n_samples=n,
        derived_names=tuple(derived_names),
        frozen_values=frozen,
    )
