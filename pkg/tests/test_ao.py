import math

import numpy as np
import pytest

from rasec.ao import AOConfig, SchemeKind, random_pointing, run_ao, run_benchmark
from rasec.channel import realize_channels
from rasec.geometry import E3
from rasec.scenario import Scenario


def test_single_antenna_closed_form():
    sc = Scenario(k_x=1, k_y=1, eve_angles=(), user_angle=math.pi / 2, rician_k=1.0)
    ch = realize_channels(sc, 3, 0)
    res = run_ao(sc, ch)
    assert res.v[0] == pytest.approx(math.sqrt(sc.p_ap))
    np.testing.assert_allclose(res.F, [E3], atol=1e-15)
    L = sc.zeta0 / 50.0**3
    expected = math.log2(1 + sc.p_ap * L * 18 * abs(ch.g[0, 0]) ** 2 / sc.sigma_r2)
    assert res.report.r_sec == pytest.approx(expected, rel=1e-12)


@pytest.fixture(scope="module")
def default_runs():
    sc = Scenario()
    out = []
    for r in range(4):
        ch = realize_channels(sc, 17, r)
        out.append((ch, run_ao(sc, ch)))
    return sc, out


def test_trace_monotone_and_terminal(default_runs):
    sc, runs = default_runs
    cfg = AOConfig()
    for _, res in runs:
        tr = np.array(res.trace.r_sec)
        assert np.all(np.diff(tr) >= -1e-10)
        if res.trace.converged:
            assert abs(tr[-1] - tr[-2]) <= cfg.eps * max(tr[-2], 1.0)
        else:
            assert res.trace.iterations == cfg.max_outer


def test_outputs_feasible(default_runs):
    sc, runs = default_runs
    for _, res in runs:
        assert abs(np.vdot(res.v, res.v).real - sc.p_ap) <= 1e-10 * sc.p_ap
        assert all(a.zenith <= sc.theta_max + 1e-9 for a in res.angles)
        np.testing.assert_allclose(np.linalg.norm(res.F, axis=1), 1.0, atol=1e-12)


def test_dominates_fixed_start(default_runs):
    sc, runs = default_runs
    for ch, res in runs:
        fixed = run_benchmark(SchemeKind.FIXED, sc, ch)[2].r_sec
        assert res.trace.r_sec[0] == fixed
        assert res.report.r_sec >= fixed - 1e-9


def test_deterministic_replay(default_runs):
    sc, runs = default_runs
    ch, res = runs[0]
    again = run_ao(sc, realize_channels(sc, 17, 0))
    assert again.trace.r_sec == res.trace.r_sec
    np.testing.assert_array_equal(again.v, res.v)


def test_outer_cap_respected():
    sc = Scenario()
    res = run_ao(sc, realize_channels(sc, 1, 0), AOConfig(max_outer=2))
    assert res.trace.iterations <= 2


def test_ao_config_validation():
    with pytest.raises(ValueError):
        AOConfig(eps=0)
    with pytest.raises(ValueError):
        AOConfig(max_outer=0)


def test_benchmarks():
    sc = Scenario()
    ch = realize_channels(sc, 5, 2)
    _, F, rep = run_benchmark(SchemeKind.FIXED, sc, ch)
    np.testing.assert_array_equal(F, np.tile(E3, (sc.K, 1)))
    v, F, rep_iso = run_benchmark(SchemeKind.ISOTROPIC, sc, ch)
    assert rep_iso.r_sec >= 0
    iso = ch.with_pattern(type(ch.pattern).isotropic_pattern())
    np.testing.assert_array_equal(iso.h(F), iso.h(random_pointing(sc, 5, 2)))
    _, F, _ = run_benchmark(SchemeKind.RANDOM, sc, ch, seed=5, realization=2)
    np.testing.assert_array_equal(F, random_pointing(sc, 5, 2))
    with pytest.raises(ValueError):
        run_benchmark(SchemeKind.RA, sc, ch)


def test_random_pointing_support():
    sc = Scenario()
    F = np.vstack([random_pointing(sc, 1, r) for r in range(200)])
    zen = np.arccos(F[:, 2])
    assert zen.max() <= sc.theta_max + 1e-12
    assert zen.max() > 0.9 * sc.theta_max
    np.testing.assert_allclose(np.linalg.norm(F, axis=1), 1.0)


def test_scheme_parse():
    assert SchemeKind.parse("RA") is SchemeKind.RA
    with pytest.raises(ValueError):
        SchemeKind.parse("bogus")
