"""Corpus loading, validation and persistence forecasting."""

import csv
import json

import numpy as np
import pytest

from stochdispatch.data_ingest import (
    HistoricalDataset,
    Plant,
    PlantKind,
    load_historical,
    persistence_forecast,
    with_persistence_forecast,
)
from stochdispatch.errors import (
    DataFormatError,
    DataValueError,
    DomainError,
    SchemaError,
)


def _write_corpus(tmp_path, names=("a", "b"), rows=4, value=0.5, step=300):
    manifest = {
        "step_minutes": step / 60,
        "plants": [
            {"name": n, "kind": "wind", "capacity_mw": 200.0, "bus": i, "file": f"{n}.csv"}
            for i, n in enumerate(names)
        ],
    }
    (tmp_path / "manifest.json").write_text(json.dumps(manifest))
    for n in names:
        with open(tmp_path / f"{n}.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["timestamp", "forecast_pu", "actual_pu"])
            for t in range(rows):
                w.writerow([t * step, value, value])
    return tmp_path


def test_two_plant_constant_corpus(tmp_path):
    load_dir = _write_corpus(tmp_path)
    ds = load_historical(load_dir)
    assert ds.forecast.shape == (4, 2)
    assert ds.actual.shape == (4, 2)
    assert np.all(ds.actual == 0.5)


def test_out_of_range_actual_rejected(tmp_path):
    _write_corpus(tmp_path)
    with open(tmp_path / "a.csv", "a", newline="") as fh:
        csv.writer(fh).writerow([9999, 0.5, 1.2])
    with pytest.raises(DataValueError, match="outside"):
        load_historical(tmp_path)


def test_year_long_14_plant_corpus(tmp_path):
    # Row-count oracle: one year at 5-minute steps = 365 * 24 * 12 samples.
    expected = 365 * 24 * 12
    names = [f"p{k}" for k in range(14)]
    rng = np.random.default_rng(5)
    plants = tuple(
        Plant(index=i, name=n, kind=PlantKind.WIND, capacity_mw=200.0, bus=i)
        for i, n in enumerate(names)
    )
    vals_f = rng.random((expected, 14))
    vals_a = rng.random((expected, 14))
    ds = HistoricalDataset(
        plants=plants,
        timestamps=np.arange(expected, dtype=np.int64) * 300,
        forecast=vals_f,
        actual=vals_a,
        step_minutes=5,
    )
    ds.write_csv(tmp_path)
    back = load_historical(tmp_path)
    assert back.n_samples == expected
    assert back.n_plants == 14


def test_round_trip_bit_identical(tmp_path, rng):
    plants = (
        Plant(0, "w", PlantKind.WIND, 150.0, 1),
        Plant(1, "s", PlantKind.SOLAR, 75.0, 2),
    )
    ds = HistoricalDataset(
        plants=plants,
        timestamps=np.arange(100, dtype=np.int64) * 300,
        forecast=rng.random((100, 2)),
        actual=rng.random((100, 2)),
        step_minutes=5,
    )
    ds.write_csv(tmp_path)
    back = load_historical(tmp_path)
    assert np.array_equal(back.forecast, ds.forecast)
    assert np.array_equal(back.actual, ds.actual)
    assert np.array_equal(back.timestamps, ds.timestamps)


def test_missing_column_schema_error(tmp_path):
    _write_corpus(tmp_path, names=("a",))
    with open(tmp_path / "a.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["timestamp", "forecast_pu"])  # actual column missing
        w.writerow([0, 0.5])
    with pytest.raises(SchemaError, match="actual_pu"):
        load_historical(tmp_path)


def test_schema_remapping(tmp_path):
    _write_corpus(tmp_path, names=("a",))
    with open(tmp_path / "a.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["ts", "fc", "ac"])
        for t in range(4):
            w.writerow([t * 300, 0.4, 0.6])
    ds = load_historical(
        tmp_path, schema={"timestamp": "ts", "forecast": "fc", "actual": "ac"}
    )
    assert ds.forecast[0, 0] == 0.4


def test_non_monotone_timestamps_rejected(tmp_path):
    _write_corpus(tmp_path, names=("a",))
    with open(tmp_path / "a.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["timestamp", "forecast_pu", "actual_pu"])
        for t in (0, 300, 100, 400):
            w.writerow([t, 0.5, 0.5])
    with pytest.raises(DataFormatError):
        load_historical(tmp_path)


def test_nan_cell_names_row_and_column(tmp_path):
    _write_corpus(tmp_path, names=("a",), rows=2)
    with open(tmp_path / "a.csv", "a", newline="") as fh:
        csv.writer(fh).writerow([600, "nan", 0.5])
    with pytest.raises(DataValueError, match=r"line 4.*forecast_pu"):
        load_historical(tmp_path)


def test_mw_units_normalized(tmp_path):
    _write_corpus(tmp_path, names=("a",))
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    manifest["plants"][0]["units"] = "mw"
    (tmp_path / "manifest.json").write_text(json.dumps(manifest))
    with open(tmp_path / "a.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["timestamp", "forecast_pu", "actual_pu"])
        w.writerow([0, 100.0, 150.0])
        w.writerow([300, 0.0, 200.0])
    ds = load_historical(tmp_path)
    assert ds.forecast[0, 0] == 0.5
    assert ds.actual[1, 0] == 1.0


# -- persistence ------------------------------------------------------------


def test_persistence_shift_by_one():
    actual = np.array([[0.1], [0.2], [0.3]])
    fc = persistence_forecast(actual, 1)
    np.testing.assert_array_equal(fc, [[0.1], [0.2]])


def test_persistence_constant_series():
    actual = np.full((10, 2), 0.42)
    for h in (1, 3, 9):
        fc = persistence_forecast(actual, h)
        np.testing.assert_array_equal(fc, actual[h:])


def test_persistence_ramp_error_is_constant():
    actual = (np.arange(10) * 0.1).reshape(-1, 1)
    fc = persistence_forecast(actual, 2)
    err = actual[2:] - fc
    np.testing.assert_allclose(err, 0.2, atol=1e-12)


def test_persistence_shape_property(rng):
    actual = rng.random((50, 3))
    for h in (1, 7, 49):
        assert persistence_forecast(actual, h).shape == (50 - h, 3)


def test_persistence_horizon_errors():
    actual = np.full((3, 1), 0.5)
    with pytest.raises(DataFormatError):
        persistence_forecast(actual, 3)
    with pytest.raises(DomainError):
        persistence_forecast(actual, 0)
    with pytest.raises(DomainError):
        persistence_forecast(np.empty((0, 1)), 1)


def test_with_persistence_forecast_pairs_rows(rng):
    plants = (Plant(0, "w", PlantKind.WIND, 100.0, 0),)
    ds = HistoricalDataset(
        plants=plants,
        timestamps=np.arange(20, dtype=np.int64) * 300,
        forecast=rng.random((20, 1)),
        actual=rng.random((20, 1)),
        step_minutes=5,
    )
    out = with_persistence_forecast(ds, 4)
    assert out.n_samples == 16
    np.testing.assert_array_equal(out.forecast, ds.actual[:-4])
    np.testing.assert_array_equal(out.actual, ds.actual[4:])
