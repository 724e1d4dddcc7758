"""Secrecy-rate arithmetic, beamforming quadratic forms and the array-gain probe."""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .channel import GainPattern
from .geometry import link_geometry, node_position
from .scenario import Scenario, dbm_to_watt, watt_to_dbm  # noqa: F401  (re-export)


@dataclass(frozen=True)
class NoiseBudget:
    sigma_r2: float
    sigma_e2: float

    def __post_init__(self):
        if not (self.sigma_r2 > 0 and self.sigma_e2 > 0):
            raise ValueError("noise powers must be positive")

    @classmethod
    def of(cls, scenario: Scenario) -> "NoiseBudget":
        return cls(scenario.sigma_r2, scenario.sigma_e2)


class RateReport(NamedTuple):
    r_u: float
    r_e: float
    r_sec: float


class QuadraticForms(NamedTuple):
    A: np.ndarray
    B: np.ndarray


def legitimate_rate(v, h0, sigma_r2: float) -> float:
    """``log2(1 + |v^H h0|^2 / sigma_r2)``."""
    s = np.vdot(v, h0)
    return float(np.log2(1.0 + abs(s) ** 2 / sigma_r2))


def eavesdropper_rate(v, h_eves, sigma_e2: float) -> float:
    """Rate of colluding eavesdroppers (summed SNR); 0 when there are none."""
    h_eves = np.asarray(h_eves)
    if h_eves.size == 0:
        return 0.0
    s = np.asarray(h_eves).reshape(-1, np.shape(v)[0]) @ np.conj(v)
    return float(np.log2(1.0 + np.sum(np.abs(s) ** 2) / sigma_e2))


def secrecy_rate(r_u: float, r_e: float) -> RateReport:
    return RateReport(float(r_u), float(r_e), max(float(r_u) - float(r_e), 0.0))


def rate_report(v, H, noise: NoiseBudget) -> RateReport:
    """Rates for channel rows ``H`` (user first) under beamformer ``v``."""
    return secrecy_rate(legitimate_rate(v, H[0], noise.sigma_r2),
                        eavesdropper_rate(v, H[1:], noise.sigma_e2))


def build_forms(H, noise: NoiseBudget) -> QuadraticForms:
    """``A = h0 h0^H / sigma_r2`` and ``B = sum_m h_m h_m^H / sigma_e2``."""
    H = np.asarray(H)
    h0 = H[0]
    A = np.outer(h0, h0.conj()) / noise.sigma_r2
    E = H[1:]
    B = (E.T @ E.conj()) / noise.sigma_e2
    return QuadraticForms(A, B)


def array_gain_probe(v, F, scenario: Scenario, phi, pattern: GainPattern | None = None,
                     radius: float | None = None):
    """Array gain in dB towards elevation ``phi`` in the x-z plane.

    Pure line-of-sight response ``sum_k conj(v_k) sqrt(G(eps_k)) exp(-j 2 pi d_k / lambda)``
    at distance ``radius`` (default: the user's), normalized by the
    response of one isotropic antenna fed the full power budget.
    ``phi`` may be a scalar or an array.
    """
    if pattern is None:
        pattern = GainPattern.directional(scenario.p)
    if radius is None:
        radius = scenario.r_user
    phis = np.atleast_1d(np.asarray(phi, dtype=float))
    pts = np.array([node_position(radius, a) for a in phis])
    dirs, dist = link_geometry(pts, scenario.element_positions())
    cos_eps = np.einsum("nkc,kc->nk", dirs, np.asarray(F, dtype=float))
    resp = np.sqrt(pattern.gain(cos_eps)) * np.exp(-2j * np.pi * dist / scenario.wavelength)
    amp = resp @ np.conj(v)
    with np.errstate(divide="ignore"):
        out = 10.0 * np.log10(np.abs(amp) ** 2 / scenario.p_ap)
    return out if np.ndim(phi) else float(out[0])
