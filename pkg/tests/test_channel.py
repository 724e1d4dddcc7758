import math

import numpy as np
import pytest

from rasec.channel import (GainPattern, PathLossModel, RicianParams, channel_coefficient,
                           directional_gain, draw_small_scale, path_loss, realize_channels,
                           substream)
from rasec.geometry import pointing_vector
from rasec.scenario import Scenario


def sphere_average(fn, n_theta=2000, n_phi=64):
    """Midpoint-rule average of ``fn(cos theta)`` over the unit sphere."""
    th = (np.arange(n_theta) + 0.5) * math.pi / n_theta
    w = np.sin(th) * (math.pi / n_theta) * (2 * math.pi)  # azimuth integral is trivial
    vals = fn(np.cos(th))
    return float(np.sum(vals * w)) / (4 * math.pi)


def test_gain_examples():
    pat = GainPattern.directional(4)
    assert pat.g0 == 18
    assert directional_gain(pat, 1.0) == pytest.approx(18)
    assert directional_gain(pat, 0.0) == 0.0
    assert directional_gain(pat, 0.5) == pytest.approx(0.0703125, rel=1e-15)
    assert directional_gain(pat, -0.3) == 0.0


def test_isotropic_is_one_everywhere():
    pat = GainPattern.isotropic_pattern()
    np.testing.assert_array_equal(pat.gain(np.linspace(-1, 1, 11)), 1.0)


@pytest.mark.parametrize("p", [1, 2, 4])
def test_power_conservation(p):
    avg = sphere_average(GainPattern.directional(p).gain)
    assert abs(avg - 1.0) <= 1e-3


def test_path_loss():
    m = PathLossModel(1e-3, 3.0)
    assert path_loss(m, 1.0) == 1e-3
    assert path_loss(m, 50.0) == pytest.approx(8e-9, rel=1e-14)
    d = np.linspace(1, 100, 50)
    assert np.all(np.diff(path_loss(m, d)) < 0)
    with pytest.raises(ValueError):
        path_loss(m, 0.0)


def test_small_scale_los_limit():
    rng = substream(1, 0)
    lam = 0.125
    g = draw_small_scale(rng, RicianParams(math.inf, lam), 50.3)
    assert g == pytest.approx(np.exp(-2j * np.pi * 50.3 / lam))
    g = draw_small_scale(rng, RicianParams(math.inf, lam), lam)
    assert g.real == pytest.approx(1.0, abs=1e-12)
    assert g.imag == pytest.approx(0.0, abs=1e-12)


def test_small_scale_unit_power():
    rng = np.random.default_rng(5)
    params = RicianParams(1.0, 0.125)
    g = np.array([draw_small_scale(rng, params, 50.0) for _ in range(100_000)])
    assert abs(np.mean(np.abs(g) ** 2) - 1.0) <= 0.01


def test_channel_coefficient_examples():
    q = np.array([0.6, 0.0, 0.8])
    beta = 2.0 - 1.0j
    assert channel_coefficient([0.8, 0.0, -0.6], beta, q, 4) == 0
    assert channel_coefficient(q, beta, q, 4) == pytest.approx(beta)


def test_channel_coefficient_matches_gain_times_loss():
    rng = np.random.default_rng(3)
    pat = GainPattern.directional(4)
    model = PathLossModel(1e-3, 3.0)
    for _ in range(200):
        q = rng.normal(size=3)
        q /= np.linalg.norm(q)
        f = pointing_vector((rng.uniform(0, 1.5), rng.uniform(0, 6.28)))
        d = rng.uniform(10, 100)
        g = complex(*rng.normal(size=2))
        L = path_loss(model, d)
        beta = math.sqrt(L * pat.g0) * g
        h = channel_coefficient(f, beta, q, pat.p)
        expected = L * pat.gain(np.dot(f, q))
        assert abs(h) ** 2 / abs(g) ** 2 == pytest.approx(expected, rel=1e-12, abs=1e-300)


def single_user_scenario(**kw):
    base = dict(k_x=1, k_y=1, eve_angles=(), user_angle=math.pi / 2, r_user=50.0,
                rician_k=math.inf)
    base.update(kw)
    return Scenario(**base)


def test_realize_hand_example():
    sc = single_user_scenario()
    ch = realize_channels(sc, seed=0)
    assert ch.M == 0
    assert ch.h(np.array([[0, 0, 1.0]])).shape == (1, 1)
    h = ch.h(np.array([[0, 0, 1.0]]))[0, 0]
    assert abs(h) == pytest.approx(math.sqrt(8e-9 * 18), rel=1e-12)
    assert math.sqrt(8e-9 * 18) == pytest.approx(3.7947e-4, rel=1e-4)


def test_fading_independent_of_pointing_and_reproducible():
    sc = Scenario()
    a = realize_channels(sc, 9, 4)
    b = realize_channels(sc, 9, 4)
    np.testing.assert_array_equal(a.g, b.g)
    F1 = np.tile([0, 0, 1.0], (sc.K, 1))
    F2 = pointing_vector((np.full(sc.K, 0.3), np.linspace(0, 6, sc.K)))
    # h changes with F only through the pattern, g is untouched
    before = a.g.copy()
    assert not np.allclose(a.h(F1), a.h(F2))
    np.testing.assert_array_equal(a.g, before)
    assert not np.array_equal(a.g, realize_channels(sc, 9, 5).g)
    assert not np.array_equal(a.g, realize_channels(sc, 10, 4).g)


def test_draws_keyed_by_link_not_array_size():
    small = realize_channels(Scenario(k_x=2, k_y=2), 3, 0)
    big = realize_channels(Scenario(k_x=4, k_y=4), 3, 0)
    # link (m, k) draws the same NLoS sample regardless of K; LoS phase differs with geometry
    params = RicianParams(1.0, 0.125)
    los_small = np.exp(-2j * np.pi * small.dist / 0.125)
    los_big = np.exp(-2j * np.pi * big.dist[:, :4] / 0.125)
    nlos_small = (small.g - math.sqrt(0.5) * los_small) / math.sqrt(0.5)
    nlos_big = (big.g[:, :4] - math.sqrt(0.5) * los_big) / math.sqrt(0.5)
    np.testing.assert_allclose(nlos_small, nlos_big, atol=1e-12)
    assert params.k_factor == 1.0


def test_magnitude_factorization():
    sc = Scenario()
    ch = realize_channels(sc, 1, 0)
    rng = np.random.default_rng(0)
    F = pointing_vector((rng.uniform(0, sc.theta_max, sc.K), rng.uniform(0, 6.28, sc.K)))
    H = ch.h(F)
    cos_eps = np.einsum("mkc,kc->mk", ch.dirs, F)
    G = ch.pattern.gain(cos_eps)
    expected = ch.loss * G * np.abs(ch.g) ** 2
    np.testing.assert_allclose(np.abs(H) ** 2, expected, rtol=1e-12)


def test_isotropic_channels_ignore_pointing():
    sc = Scenario()
    ch = realize_channels(sc, 1, 0).with_pattern(GainPattern.isotropic_pattern())
    F1 = np.tile([0, 0, 1.0], (sc.K, 1))
    F2 = pointing_vector((np.full(sc.K, 0.5), np.zeros(sc.K)))
    np.testing.assert_array_equal(ch.h(F1), ch.h(F2))
    np.testing.assert_allclose(np.abs(ch.h(F1)) ** 2, ch.loss * np.abs(ch.g) ** 2)


def test_eavesdropper_free_scenario():
    ch = realize_channels(Scenario(eve_angles=()), 0, 0)
    assert ch.h(np.tile([0, 0, 1.0], (16, 1))).shape == (1, 16)
