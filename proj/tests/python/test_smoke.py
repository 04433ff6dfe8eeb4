import math
import os
import random
import subprocess
from pathlib import Path

import pytest

import gridshare as gs

ROOT = Path(__file__).resolve().parents[2]


def test_unit_conversions():
    assert gs.knots_to_ms(10) == pytest.approx(5.144)
    assert gs.correlation_weight(0.0) == 0.0
    assert gs.correlation_weight(1.0) == 1.0
    assert gs.shear_factor(10, 85, 0.03) * 10 == pytest.approx(13.683, abs=1e-3)


def test_weibull_round_trip():
    speeds = gs.sample_wind(9.0, 1.8, 20000, 3)
    c, k, used, excluded = gs.fit_weibull(speeds)
    assert c == pytest.approx(9.0, abs=0.2)
    assert k == pytest.approx(1.8, abs=0.1)
    assert used + excluded == len(speeds)


def test_worked_example_allocations():
    rated = [7, 2, 3]
    out = [[7, 2, 3]] * 2
    assert gs.allocate("lifo", rated, out, [6, 6])[0] == pytest.approx([1, 2, 3])
    assert gs.allocate("pro_rata", rated, out, [6, 6])[0] == pytest.approx([3.5, 1, 1.5])
    rota = gs.allocate("rota", rated, out, [6, 6])
    assert rota[0] == pytest.approx([6, 0, 0])
    assert rota[1] == pytest.approx([1, 2, 3])
    frr = gs.allocate("frr", rated, out, [6, 6])
    assert [sum(col) for col in zip(*frr)] == pytest.approx([7, 2, 3])


def test_allocation_conserves_excess():
    rng = random.Random(5)
    rated = [5.0, 1.5, 3.0]
    outputs = [[rng.uniform(0, r) for r in rated] for _ in range(500)]
    demand = [rng.uniform(0, 10) for _ in outputs]
    for rule in ("lifo", "rota", "pro_rata", "frr"):
        for o, d, a in zip(outputs, demand, gs.allocate(rule, rated, outputs, demand)):
            assert sum(a) == pytest.approx(max(0.0, sum(o) - d), abs=1e-9)
            assert all(0.0 <= x <= y for x, y in zip(a, o))


def test_simulate_pro_rata_equal_reduction():
    x = gs.wind_to_power(gs.sample_wind(9.0, 1.8, 2000, 3), "cubic")
    r = gs.simulate("pro_rata", [7, 2, 3], [x, x, x], [6.0] * len(x))
    red = [1 - a / b for a, b in zip(r["cf"], r["cf_uncurtailed"])]
    assert max(red) - min(red) < 0.01 * red[0]


def test_uniform_curtailment_and_profits():
    assert gs.expected_curtailment_uniform(20, 1.0, 1.0, 1.0) == pytest.approx(1 / 6, abs=1e-4)
    p1, p2 = gs.profits(100, 50, 10, 5, 10, 2, 3, 3, 0)
    assert p1 == pytest.approx(10 * 90 - 3 * 100 + 2 * 45)
    assert p2 == pytest.approx((10 - 2) * 45 - 3 * 50)


def test_equilibrium_small_grid():
    rng = random.Random(9)
    x1 = [rng.random() for _ in range(500)]
    x2 = [min(1.0, 0.5 * a + 0.5 * rng.random()) for a in x1]
    r = gs.solve_equilibrium(x1, x2, [5.0] * 500, 10, 1, 10, 2, 3, 3, 0)
    assert len(r["response_curve"]) == 11
    assert dict(r["response_curve"])[r["p_n1_star"]] == r["p_n2_star"]


def test_run_and_errors(tmp_path):
    code, _, err = gs.run("simulate", overrides=["wind.hours=300"], out=str(tmp_path / "a"))
    assert code == 0, err
    assert (tmp_path / "a" / "metrics.csv").read_text().startswith("# generator: gridshare\n")
    code, _, err = gs.run("simulate", overrides=["grid.step_mw=-1"], out=str(tmp_path / "b"))
    assert code == 2 and "grid.step_mw" in err
    assert not (tmp_path / "b").exists()


@pytest.mark.skipif("GRIDSHARE_CLI" not in os.environ, reason="CLI path not provided")
def test_cli_ingest_matches_golden(tmp_path):
    golden = ROOT / "tests" / "data" / "golden"
    subprocess.run(
        [os.environ["GRIDSHARE_CLI"], "ingest", "--config", str(golden / "ingest.ini"),
         "--out", str(tmp_path)],
        check=True, capture_output=True)
    for f in (golden / "expected").iterdir():
        assert (tmp_path / f.name).read_bytes() == f.read_bytes(), f.name
    bad = subprocess.run([os.environ["GRIDSHARE_CLI"], "frobnicate"], capture_output=True)
    assert bad.returncode == 2
