import math

import numpy as np
import pytest

from fembilliards.analysis import (
    LengthMismatch,
    NonpositiveDenominator,
    UnsupportedRegionForOracle,
    clusters,
    convergence_study,
    epsilon_series,
    exact_levels,
    pair_degenerate,
    polygon_limit_study,
    refinement_error,
    validate_against_oracle,
    write_polygon_limit_csv,
    write_refinement_csv,
    write_validation_csv,
    RefinementRow,
    PolygonLimitRow,
)
from fembilliards.geometry import StarPolygon
from fembilliards.mesh import MeshParams


def test_refinement_error_examples():
    assert refinement_error(2.0, 2.0) == 0.0
    assert refinement_error(2.00002, 2.00000) == pytest.approx(1.0e-5, rel=1e-9)
    with pytest.raises(NonpositiveDenominator):
        refinement_error(1.0, 0.0)


def test_rounding_matters():
    # rounded table digits overstate a tiny error by more than an order of magnitude
    rounded = refinement_error(1.78701, 1.78700)
    assert rounded == pytest.approx(5.6e-6, rel=0.01)
    assert refinement_error(1.787007, 1.78700631) < 1e-6


def test_validation_rows():
    rows = validate_against_oracle([2.4048], [2.40918])
    assert rows[0].delta_pct == pytest.approx(0.182136, abs=1e-6)
    rows = validate_against_oracle([7.2551], [7.2552])
    assert rows[0].delta_pct == pytest.approx(0.001378, abs=5e-5)
    rows = validate_against_oracle([1.0, 2.0, 2.0], [2.0, 1.0, 2.0, 5.0])
    assert [r.n for r in rows] == [1, 2, 3]
    assert all(r.delta_pct == 0 for r in rows)
    with pytest.raises(LengthMismatch):
        validate_against_oracle([1.0, 2.0], [1.0])


def test_exact_levels_dispatch():
    assert exact_levels("circle r=1", 1)[0].k == pytest.approx(2.404825557695773)
    assert exact_levels("square side=1", 1)[0].k == pytest.approx(math.pi * math.sqrt(2))
    assert exact_levels("triangle equilateral side=1", 1)[0].k == pytest.approx(4 * math.pi / math.sqrt(3))
    with pytest.raises(UnsupportedRegionForOracle):
        exact_levels(StarPolygon(5, 1), 3)


def test_pair_degenerate():
    assert pair_degenerate([3.83865, 3.83865], 1e-6) == [(3.83865, 2)]
    assert pair_degenerate([1, 2, 3], 1e-6) == [(1.0, 1), (2.0, 1), (3.0, 1)]
    assert pair_degenerate([], 1e-6) == []
    assert clusters([1.0, 1.0 + 1e-9, 2.0], 1e-6) == [[0, 1], [2]]


def test_convergence_same_mesh_is_zero():
    rows = convergence_study("circle r=1", 0.01, [1, 2, 3], h2=0.01, order=1)
    assert all(r.epsilon == 0 for r in rows)


def test_convergence_dedup_and_shape(caplog):
    rows = convergence_study("stadium r=1 a=1", 0.01, [3, 1, 3], order=1)
    assert [r.n for r in rows] == [1, 3]
    assert any("duplicate" in r.getMessage() for r in caplog.records)
    for r in rows:
        assert r.epsilon == abs(r.k_h - r.k_h2) / r.k_h2
        assert r.k_h >= r.k_h2 * (1 - 1e-12)
    assert epsilon_series(rows) == [(1, rows[0].epsilon), (3, rows[1].epsilon)]


def test_polygon_limit_bracket():
    rows = polygon_limit_study([3, 5, 8], 1.0, MeshParams(2e-3))
    k = [r.k1 for r in rows]
    # equilateral triangle with circumradius 1 has side sqrt(3)
    assert k[0] == pytest.approx(4 * math.pi / 3, rel=1e-5)
    assert all(np.diff(k) < 0)
    for r in rows:
        assert 2.404825557695773 < r.k1 < 2.404825557695773 / math.cos(math.pi / r.sides)
        assert r.circle_gap_pct > 0
    with pytest.raises(ValueError):
        polygon_limit_study([2])


def test_csv_writers(tmp_path):
    write_validation_csv(validate_against_oracle([1.0], [1.5]), tmp_path / "v.csv")
    assert (tmp_path / "v.csv").read_text() == "n,k_exact,k_fem,delta_pct\n1,1.0,1.5,50.0\n"
    write_refinement_csv([RefinementRow(1, 2.0, 2.0, 0.0)], tmp_path / "r.csv")
    assert (tmp_path / "r.csv").read_text() == "n,k_h,k_h2,epsilon\n1,2.0,2.0,0.0\n"
    write_polygon_limit_csv([PolygonLimitRow(5, 2.8, 16.4)], tmp_path / "p.csv")
    assert (tmp_path / "p.csv").read_text().splitlines()[0] == "sides,k1,circle_gap_pct"
