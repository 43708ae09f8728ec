"""Synthetic demo corpus: a correlated two-plant fleet with known structure.

The generator draws from a Gaussian copula with a Kronecker correlation
(spatial coupling between plants x forecast/actual coupling within a plant)
and Beta marginals, so every downstream statistic has a known ground truth.
Used by the quickstart pipeline and the test suite.
"""

from __future__ import annotations

import numpy as np
from scipy.special import ndtr
from scipy.stats import beta as beta_dist

from .data_ingest import HistoricalDataset, Plant, PlantKind

DEMO_SPATIAL_RHO = 0.6
DEMO_FORECAST_RHO = 0.8


def demo_plants() -> tuple[Plant, ...]:
    return (
        Plant(index=0, name="wind_a", kind=PlantKind.WIND, capacity_mw=200.0, bus=3),
        Plant(index=1, name="wind_b", kind=PlantKind.WIND, capacity_mw=200.0, bus=4),
    )


def demo_latent_correlation(
    spatial_rho: float = DEMO_SPATIAL_RHO,
    forecast_rho: float = DEMO_FORECAST_RHO,
) -> np.ndarray:
    """Latent correlation over (actual_0, actual_1, forecast_0, forecast_1)."""
    spatial = np.array([[1.0, spatial_rho], [spatial_rho, 1.0]])
    within = np.array([[1.0, forecast_rho], [forecast_rho, 1.0]])
    kron = np.kron(spatial, within)  # order (a0, f0, a1, f1)
    perm = [0, 2, 1, 3]
    return kron[np.ix_(perm, perm)]


def make_demo_dataset(
    n_samples: int = 20000,
    seed: int = 20210114,
    spatial_rho: float = DEMO_SPATIAL_RHO,
    forecast_rho: float = DEMO_FORECAST_RHO,
    step_minutes: float = 5.0,
) -> HistoricalDataset:
    """Synchronized forecast/actual history for the two demo wind plants."""
    rng = np.random.default_rng(seed)
    corr = demo_latent_correlation(spatial_rho, forecast_rho)
    chol = np.linalg.cholesky(corr)
    z = rng.standard_normal((n_samples, 4)) @ chol.T
    u = ndtr(z)
    actual = np.column_stack(
        [beta_dist.ppf(u[:, 0], 2.2, 2.6), beta_dist.ppf(u[:, 1], 2.0, 3.0)]
    )
    forecast = np.column_stack(
        [beta_dist.ppf(u[:, 2], 2.2, 2.6), beta_dist.ppf(u[:, 3], 2.0, 3.0)]
    )
    return HistoricalDataset(
        plants=demo_plants(),
        timestamps=np.arange(n_samples, dtype=np.int64) * int(step_minutes * 60),
        forecast=np.clip(forecast, 0.0, 1.0),
        actual=np.clip(actual, 0.0, 1.0),
        step_minutes=step_minutes,
    )
