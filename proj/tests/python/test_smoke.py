import math
import os
from pathlib import Path

import pytest

import bregsel

DATA = Path(os.environ.get("BREGSEL_DATA_DIR", Path(__file__).resolve().parents[2] / "data"))


def ball_bearings():
    values = []
    for line in (DATA / "ball_bearings.txt").read_text().splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            values.extend(float(tok) for tok in line.replace(",", " ").split())
    return values


def test_fixture_shape():
    xs = ball_bearings()
    assert len(xs) == 23
    assert min(xs) == 17.88 and max(xs) == 173.40


def test_fits():
    xs = ball_bearings()
    ln = bregsel.fit(xs, "lognormal")
    assert ln["family"] == "lognormal"
    assert abs(ln["mu"] - 4.150614) < 1e-5
    assert abs(ln["sigma"] - 0.521485) < 1e-5
    g = bregsel.fit(xs, "gamma", "multi-step")
    assert abs(g["alpha"] - 4.02804) < 1e-3
    assert abs(g["eta"] - 0.055767) < 1e-4


def test_kde_integrates_to_one():
    xs = ball_bearings()
    h = bregsel.cv_bandwidth(xs)
    assert h > 0
    lo, hi, k = min(xs) - 10 * h, max(xs) + 10 * h, 20001
    step = (hi - lo) / (k - 1)
    grid = [lo + i * step for i in range(k)]
    for variant in (False, True):
        ys = bregsel.kde(xs, grid, h, bias_reduced=variant)
        mass = step * (sum(ys) - 0.5 * (ys[0] + ys[-1]))
        assert abs(mass - 1.0) < 1e-3


def test_bregman_values():
    assert bregsel.bregman(2.0, 2.0) == 0.0
    assert bregsel.bregman(3.0, 1.0, beta=2.0, c1=2.0) == pytest.approx(4.0)
    assert bregsel.bregman(2.0, 1.0, beta=1.0) == pytest.approx(2 * math.log(2) - 1)


def test_select_ball_bearings():
    r = bregsel.select(ball_bearings(), seed=42)
    assert r["decision"] == "indecisive"
    assert r["d_a"] < r["d_b"]
    assert r["u"] == pytest.approx(math.sqrt(23) * (r["d_a"] - r["d_b"]) / r["kappa_hat"], rel=1e-12)
    assert bregsel.select(ball_bearings(), seed=42) == r


def test_gof_ball_bearings():
    r = bregsel.gof(ball_bearings(), "gamma", M=100, seed=3)
    assert 0.0 <= r["p_value"] <= 1.0
    assert r["t_obs"] == pytest.approx(2 * 23 * r["d_hat"])


def test_simulate_single_row():
    rows = bregsel.simulate(0.5, [20], 1, bootstrap=50)
    assert len(rows) == 1
    assert rows[0]["n"] == 20
    assert rows[0]["u"]["sd"] == 0.0
    assert sum(rows[0]["pcs"]) == pytest.approx(100.0)


def test_errors_are_python_exceptions():
    with pytest.raises(bregsel.SizeError):
        bregsel.fit([1.0])
    with pytest.raises(bregsel.DomainError):
        bregsel.fit([1.0, -2.0, 3.0], "lognormal")
    with pytest.raises(bregsel.Error):
        bregsel.select(ball_bearings(), bootstrap=10)
    with pytest.raises(ValueError):
        bregsel.fit([1.0, 2.0], "weibull")
