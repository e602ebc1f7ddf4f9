"""Trajectory records: validation, CSV round trips, deterministic formatting."""

import numpy as np
import pytest

from barrierflow.records import TrajectoryRecord, load_csv, vector_columns


def test_append_validation():
    rec = TrajectoryRecord(kind="algorithm", columns=["k", "v"])
    rec.append([0, 1.0])
    with pytest.raises(ValueError):
        rec.append([1.0])  # wrong arity
    with pytest.raises(ValueError):
        rec.append([1, float("nan")])
    with pytest.raises(ValueError):
        rec.append([0, 2.0])  # index must strictly increase
    rec.append([1, 2.0])
    assert len(rec) == 2


def test_column_points_and_vector_columns():
    rec = TrajectoryRecord(kind="algorithm", columns=["k", "x0", "x1"])
    rec.append([0, 1.0, 2.0])
    rec.append([1, 3.0, 4.0])
    np.testing.assert_allclose(rec.column("x1"), [2.0, 4.0])
    np.testing.assert_allclose(rec.points("x"), [[1.0, 2.0], [3.0, 4.0]])
    with pytest.raises(ValueError):
        rec.column("missing")
    assert vector_columns("z", 3) == ["z0", "z1", "z2"]


def test_csv_round_trip(tmp_path):
    rec = TrajectoryRecord(
        kind="algorithm", columns=["k", "x0", "damping_events"], metadata={}
    )
    rec.append([0, 1.0 / 3.0, 0])
    rec.append([1, -0.125, 17])
    path = tmp_path / "t.csv"
    rec.to_csv(path)
    cols, data = load_csv(path)
    assert cols == rec.columns
    np.testing.assert_allclose(data, rec.data(), rtol=0, atol=0)


def test_csv_integer_columns_render_as_integers(tmp_path):
    rec = TrajectoryRecord(
        kind="algorithm", columns=["k", "x0", "damping_events"], metadata={}
    )
    rec.append([0, 0.5, 3])
    path = tmp_path / "t.csv"
    rec.to_csv(path)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "k,x0,damping_events"
    first = lines[1].split(",")
    assert first[0] == "0" and first[2] == "3"  # no trailing ".0"


def test_csv_is_deterministic(tmp_path):
    rec = TrajectoryRecord(kind="dynamics", columns=["t", "x0"], metadata={})
    rec.append([0.1, 1.0 / 3.0])
    rec.append([0.2, 2.0 / 3.0])
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    rec.to_csv(a)
    rec.to_csv(b)
    assert a.read_bytes() == b.read_bytes()
