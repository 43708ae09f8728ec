"""Historical forecast/actual corpus loading and persistence forecasting.

Canonical corpus layout: one CSV per plant with columns
``timestamp, forecast_pu, actual_pu`` plus a ``manifest.json`` mapping plants
to kinds, buses and capacities:

    {
      "step_minutes": 5,
      "plants": [
        {"name": "wind_a", "kind": "wind", "capacity_mw": 200.0,
         "bus": 4, "file": "wind_a.csv"},
        ...
      ]
    }

All internal power values are per-unit of plant capacity; conversion to MW
happens only at the dispatch-model boundary. A plant file may carry MW columns
instead (manifest ``"units": "mw"``), in which case values are normalized by
capacity on load and rejected if they leave [0, 1].
"""

from __future__ import annotations

import csv
import enum
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DataFormatError, DataValueError, DomainError, SchemaError


class PlantKind(enum.Enum):
    WIND = "wind"
    SOLAR = "solar"


@dataclass(frozen=True)
class Plant:
    """One renewable plant: identity, rating and grid placement."""

    index: int
    name: str
    kind: PlantKind
    capacity_mw: float
    bus: int

    def __post_init__(self):
        if self.capacity_mw <= 0:
            raise DomainError(f"plant {self.name}: capacity must be positive")


@dataclass(frozen=True)
class HistoricalDataset:
    """Synchronized per-plant forecast/actual series, per-unit in [0, 1].

    ``forecast`` and ``actual`` are (n_samples, n_plants) matrices aligned on
    ``timestamps`` (strictly increasing, constant step).
    """

    plants: tuple[Plant, ...]
    timestamps: np.ndarray  # int64 epoch seconds
    forecast: np.ndarray
    actual: np.ndarray
    step_minutes: float

    def __post_init__(self):
        if self.forecast.shape != self.actual.shape:
            raise DataFormatError("forecast and actual shapes differ")
        if self.forecast.shape != (len(self.timestamps), len(self.plants)):
            raise DataFormatError("matrix shape does not match plants/timestamps")
        for name, mat in (("forecast", self.forecast), ("actual", self.actual)):
            if np.any(~np.isfinite(mat)):
                raise DataValueError(f"{name} matrix contains non-finite values")
            if mat.size and (mat.min() < 0.0 or mat.max() > 1.0):
                raise DataValueError(f"{name} values outside [0, 1] p.u.")
        steps = np.diff(self.timestamps)
        if len(steps) and (np.any(steps <= 0) or np.any(steps != steps[0])):
            raise DataFormatError(
                "timestamps must be strictly increasing with one fixed step"
            )

    @property
    def n_samples(self) -> int:
        return self.forecast.shape[0]

    @property
    def n_plants(self) -> int:
        return len(self.plants)

    @property
    def total_capacity_mw(self) -> float:
        return float(sum(p.capacity_mw for p in self.plants))

    def write_csv(self, data_dir) -> None:
        """Write the canonical corpus (manifest + one CSV per plant).

        Float cells use ``repr`` so a reload is bit-identical.
        """
        data_dir = Path(data_dir)
        data_dir.mkdir(parents=True, exist_ok=True)
        manifest = {
            "step_minutes": self.step_minutes,
            "plants": [
                {
                    "name": p.name,
                    "kind": p.kind.value,
                    "capacity_mw": p.capacity_mw,
                    "bus": p.bus,
                    "file": f"{p.name}.csv",
                }
                for p in self.plants
            ],
        }
        (data_dir / "manifest.json").write_text(json.dumps(manifest, indent=2))
        for j, p in enumerate(self.plants):
            with open(data_dir / f"{p.name}.csv", "w", newline="") as fh:
                w = csv.writer(fh)
                w.writerow(["timestamp", "forecast_pu", "actual_pu"])
                for t in range(self.n_samples):
                    w.writerow(
                        [
                            int(self.timestamps[t]),
                            repr(float(self.forecast[t, j])),
                            repr(float(self.actual[t, j])),
                        ]
                    )


DEFAULT_SCHEMA = {
    "timestamp": "timestamp",
    "forecast": "forecast_pu",
    "actual": "actual_pu",
}


def _read_plant_csv(path: Path, schema: dict, capacity: float, in_mw: bool):
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        for role in ("timestamp", "forecast", "actual"):
            if schema[role] not in header:
                raise SchemaError(
                    f"{path.name}: missing column {schema[role]!r} "
                    f"(role {role}); found {header}"
                )
        ts, fc, ac = [], [], []
        for i, row in enumerate(reader, start=2):  # header is line 1
            for role, sink in (("forecast", fc), ("actual", ac)):
                cell = row[schema[role]]
                try:
                    val = float(cell)
                except (TypeError, ValueError):
                    raise DataValueError(
                        f"{path.name} line {i}, column {schema[role]!r}: "
                        f"unparsable value {cell!r}"
                    ) from None
                if np.isnan(val):
                    raise DataValueError(
                        f"{path.name} line {i}, column {schema[role]!r}: NaN"
                    )
                if in_mw:
                    val = val / capacity
                if not 0.0 <= val <= 1.0:
                    raise DataValueError(
                        f"{path.name} line {i}, column {schema[role]!r}: "
                        f"value {val} outside [0, 1] p.u."
                    )
                sink.append(val)
            try:
                ts.append(int(float(row[schema["timestamp"]])))
            except (TypeError, ValueError):
                raise DataFormatError(
                    f"{path.name} line {i}: unparsable timestamp "
                    f"{row[schema['timestamp']]!r}"
                ) from None
    return np.array(ts, dtype=np.int64), np.array(fc), np.array(ac)


def load_historical(data_dir, schema: dict | None = None) -> HistoricalDataset:
    """Load and validate the canonical corpus under ``data_dir``.

    ``schema`` remaps CSV column names per role
    (``{"timestamp": ..., "forecast": ..., "actual": ...}``).
    """
    data_dir = Path(data_dir)
    manifest_path = data_dir / "manifest.json"
    if not manifest_path.exists():
        raise SchemaError(f"no manifest.json in {data_dir}")
    manifest = json.loads(manifest_path.read_text())
    schema = {**DEFAULT_SCHEMA, **(schema or {})}
    entries = manifest.get("plants")
    if not entries:
        raise SchemaError(f"{manifest_path}: empty or missing 'plants' list")

    plants, columns = [], []
    ref_ts = None
    for j, entry in enumerate(entries):
        try:
            plant = Plant(
                index=j,
                name=str(entry["name"]),
                kind=PlantKind(entry["kind"]),
                capacity_mw=float(entry["capacity_mw"]),
                bus=int(entry["bus"]),
            )
        except KeyError as exc:
            raise SchemaError(f"manifest plant {j}: missing field {exc}") from None
        except ValueError as exc:
            raise SchemaError(f"manifest plant {j}: {exc}") from None
        in_mw = entry.get("units", "pu") == "mw"
        ts, fc, ac = _read_plant_csv(
            data_dir / entry.get("file", f"{plant.name}.csv"),
            schema,
            plant.capacity_mw,
            in_mw,
        )
        if ref_ts is None:
            ref_ts = ts
        elif len(ts) != len(ref_ts) or np.any(ts != ref_ts):
            raise DataFormatError(
                f"plant {plant.name}: timestamps differ from first plant"
            )
        plants.append(plant)
        columns.append((fc, ac))

    if len({p.index for p in plants}) != len(plants):
        raise SchemaError("duplicate plant indices")
    forecast = np.column_stack([c[0] for c in columns])
    actual = np.column_stack([c[1] for c in columns])
    return HistoricalDataset(
        plants=tuple(plants),
        timestamps=ref_ts,
        forecast=forecast,
        actual=actual,
        step_minutes=float(manifest.get("step_minutes", 5)),
    )


def persistence_forecast(actual: np.ndarray, horizon_steps: int) -> np.ndarray:
    """Persistence forecast: forecast[t] = actual[t - horizon_steps].

    Returns the (n - horizon_steps, n_plants) forecast matrix aligned with
    ``actual[horizon_steps:]``.
    """
    actual = np.asarray(actual, dtype=float)
    if actual.size == 0:
        raise DomainError("actual matrix is empty")
    if horizon_steps < 1:
        raise DomainError("horizon_steps must be >= 1")
    n = actual.shape[0]
    if horizon_steps >= n:
        raise DataFormatError(
            f"horizon_steps {horizon_steps} leaves no paired rows "
            f"(only {n} samples)"
        )
    return actual[:-horizon_steps].copy()


def with_persistence_forecast(
    data: HistoricalDataset, horizon_steps: int
) -> HistoricalDataset:
    """Replace the forecast columns with persistence forecasts.

    The first ``horizon_steps`` rows are dropped so forecast[t] pairs with
    actual[t].
    """
    fc = persistence_forecast(data.actual, horizon_steps)
    return HistoricalDataset(
        plants=data.plants,
        timestamps=data.timestamps[horizon_steps:],
        forecast=fc,
        actual=data.actual[horizon_steps:].copy(),
        step_minutes=data.step_minutes,
    )
