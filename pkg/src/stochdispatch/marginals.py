"""Empirical probability-density-histogram (PDH) marginals.

Each modeled variable (per-plant forecast, per-plant actual, derived sums and
line flows) gets one histogram-based marginal with an exact piecewise-linear
CDF and its generalized inverse. The CDF is linear across each bin (constant
density within a bin), so the inverse transform is exact linear interpolation
rather than midpoint snapping, which keeps downstream samples continuous.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, FitError

DEFAULT_BIN_WIDTH = 0.01

_EDGE_ATOL = 1e-9


@dataclass(frozen=True)
class EmpiricalMarginal:
    """Histogram marginal with per-bin probability mass.

    Attributes
    ----------
    lower, upper : float
        Support bounds (p.u. for plant variables).
    bin_width : float
        Width of every bin; ``(upper - lower) / bin_width`` is an exact
        integer bin count.
    masses : ndarray, shape (n_bins,)
        Non-negative per-bin probability mass summing to 1. Zero-mass bins
        inside the support are retained.
    """

    lower: float
    upper: float
    bin_width: float
    masses: np.ndarray
    edges: np.ndarray = field(init=False, repr=False, compare=False)
    cdf_at_edges: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        n_bins = len(self.masses)
        if n_bins < 1:
            raise FitError("marginal needs at least one bin")
        width = (self.upper - self.lower) / n_bins
        if not np.isclose(width, self.bin_width, rtol=0, atol=_EDGE_ATOL):
            raise DomainError(
                f"support ({self.lower}, {self.upper}) is not an integer "
                f"multiple of bin_width {self.bin_width}"
            )
        masses = np.asarray(self.masses, dtype=float)
        if np.any(masses < 0):
            raise DomainError("negative bin mass")
        total = masses.sum()
        if abs(total - 1.0) > 1e-9:
            raise DomainError(f"bin masses sum to {total}, expected 1")
        # Renormalize only when meaningfully off so reloading serialized
        # masses is bit-stable; the CDF endpoint is clamped to 1 regardless.
        if abs(total - 1.0) > 1e-14:
            masses = masses / total
        edges = self.lower + self.bin_width * np.arange(n_bins + 1)
        edges[-1] = self.upper
        # Clip the running sum: float accumulation may overshoot 1 by ulps,
        # which would poison downstream normal-quantile transforms.
        cdf = np.concatenate(([0.0], np.minimum(np.cumsum(masses), 1.0)))
        cdf[-1] = 1.0
        object.__setattr__(self, "masses", masses)
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "cdf_at_edges", cdf)

    @property
    def n_bins(self) -> int:
        return len(self.masses)

    def cdf(self, x):
        """Piecewise-linear CDF; x is clamped to the support.

        Accepts scalars or arrays and returns the same shape.
        """
        x = np.asarray(x, dtype=float)
        scalar = x.ndim == 0
        xc = np.atleast_1d(np.clip(x, self.lower, self.upper))
        idx = np.clip(
            np.floor((xc - self.lower) / self.bin_width).astype(int),
            0,
            self.n_bins - 1,
        )
        frac = (xc - self.edges[idx]) / self.bin_width
        out = self.cdf_at_edges[idx] + self.masses[idx] * frac
        out = np.clip(out, 0.0, 1.0)
        return float(out[0]) if scalar else out.reshape(x.shape)

    def inverse_cdf(self, u):
        """Generalized inverse of :meth:`cdf`.

        Flat-CDF ties resolve to the leftmost point. ``u`` outside [0, 1]
        raises :class:`DomainError`.
        """
        u_in = np.asarray(u, dtype=float)
        scalar = u_in.ndim == 0
        u = np.atleast_1d(u_in)
        if np.any(u < 0.0) or np.any(u > 1.0):
            raise DomainError("u must lie in [0, 1]")
        # Smallest edge index k with cdf_at_edges[k] >= u.
        k = np.searchsorted(self.cdf_at_edges, u, side="left")
        k = np.minimum(k, self.n_bins)
        exact = self.cdf_at_edges[k] == u
        out = np.empty_like(u)
        out[exact] = self.edges[k[exact]]
        interior = ~exact
        if np.any(interior):
            b = k[interior] - 1  # bin whose interior contains u
            du = u[interior] - self.cdf_at_edges[b]
            out[interior] = self.edges[b] + du / self.masses[b] * self.bin_width
        return float(out[0]) if scalar else out.reshape(u_in.shape)

    def mean(self) -> float:
        """Mean under the uniform-within-bin density."""
        mids = 0.5 * (self.edges[:-1] + self.edges[1:])
        return float(self.masses @ mids)

    # -- serialization ----------------------------------------------------

    def to_dict(self) -> dict:
        """JSON-safe dict; numbers as round-trip-exact decimal strings."""
        return {
            "lower": repr(float(self.lower)),
            "upper": repr(float(self.upper)),
            "bin_width": repr(float(self.bin_width)),
            "masses": [repr(float(m)) for m in self.masses],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "EmpiricalMarginal":
        return cls(
            lower=float(d["lower"]),
            upper=float(d["upper"]),
            bin_width=float(d["bin_width"]),
            masses=np.array([float(m) for m in d["masses"]]),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "EmpiricalMarginal":
        return cls.from_dict(json.loads(text))


def snap_support(lo: float, hi: float, bin_width: float) -> tuple[float, float]:
    """Extend (lo, hi) outward to the bin grid anchored at 0."""
    lo_s = np.floor(lo / bin_width + _EDGE_ATOL) * bin_width
    hi_s = np.ceil(hi / bin_width - _EDGE_ATOL) * bin_width
    if hi_s <= lo_s:
        hi_s = lo_s + bin_width
    return float(lo_s), float(hi_s)


def fit_pdh(
    samples,
    bin_width: float = DEFAULT_BIN_WIDTH,
    lower: float | None = 0.0,
    upper: float | None = 1.0,
) -> EmpiricalMarginal:
    """Fit a probability density histogram to samples.

    Per-bin mass is count/total; zero-mass bins are retained. When
    ``lower``/``upper`` are None the support snaps outward from the sample
    range to the bin grid (used for derived variables that can leave [0, 1]).
    """
    x = np.asarray(samples, dtype=float).ravel()
    if x.size == 0:
        raise FitError("cannot fit a marginal to an empty sample set")
    if bin_width <= 0:
        raise DomainError("bin_width must be positive")
    if np.any(~np.isfinite(x)):
        raise FitError("samples contain non-finite values")
    if lower is None or upper is None:
        lo, hi = snap_support(float(x.min()), float(x.max()), bin_width)
        lower = lo if lower is None else lower
        upper = hi if upper is None else upper
    if x.min() < lower - _EDGE_ATOL or x.max() > upper + _EDGE_ATOL:
        raise DomainError(
            f"samples outside support [{lower}, {upper}]: "
            f"range ({x.min()}, {x.max()})"
        )
    n_bins = int(round((upper - lower) / bin_width))
    if n_bins < 1 or abs(n_bins * bin_width - (upper - lower)) > _EDGE_ATOL:
        raise DomainError(
            f"support [{lower}, {upper}] is not an integer multiple of "
            f"bin_width {bin_width}"
        )
    edges = lower + bin_width * np.arange(n_bins + 1)
    edges[-1] = upper
    counts, _ = np.histogram(np.clip(x, lower, upper), bins=edges)
    return EmpiricalMarginal(
        lower=float(lower),
        upper=float(upper),
        bin_width=float(bin_width),
        masses=counts / counts.sum(),
    )
