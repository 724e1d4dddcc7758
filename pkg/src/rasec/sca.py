"""Successive convex approximation of the antenna pointing matrix.

For a fixed beamformer the secrecy objective ``R_u(F) - R_e(F)`` is
linearized around the current pointing matrix.  The linear surrogate
separates over antennas, and each per-antenna problem (maximize ``c.f``
over the unit ball cut by ``f_z >= cos(theta_max)``) is solved in closed
form.  A step is kept only if the exact objective does not decrease.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .channel import ChannelSet
from .geometry import DeflectionAngles, angles_from_vector
from .rates import NoiseBudget

_LN2 = math.log(2.0)


@dataclass(frozen=True)
class SCAConfig:
    max_iter: int = 100
    tol: float = 1e-9
    max_halvings: int = 10
    # relative objective gain below which the inner loop stops
    gain_tol: float = 1e-10


class LinearizationTerms(NamedTuple):
    """Affine model ``lam_r - omega_m + sum_k coef[k] . (f_k - anchor[k])``."""

    lam_r: float
    omega_m: float
    coef: np.ndarray
    anchor: np.ndarray

    def value(self, F) -> float:
        return float(self.lam_r - self.omega_m + np.sum(self.coef * (np.asarray(F) - self.anchor)))


@dataclass
class SCATrace:
    objective: list = field(default_factory=list)
    step: list = field(default_factory=list)
    halvings: list = field(default_factory=list)
    stalled: bool = False

    @property
    def iterations(self) -> int:
        return len(self.step)


def channel_gradient(f, beta: complex, q, p: float) -> np.ndarray:
    """Derivative of ``beta * (f.q)**p`` with respect to the real vector ``f``.

    Zero on and behind the hemisphere boundary ``f.q <= 0``.
    """
    q = np.asarray(q, dtype=float)
    proj = float(np.dot(f, q))
    if proj <= 0.0:
        return np.zeros(3, dtype=complex)
    return beta * p * proj ** (p - 1.0) * q


def channel_gradients(channels: ChannelSet, F) -> np.ndarray:
    """Batched :func:`channel_gradient`, shape ``(M+1, K, 3)``."""
    p = channels.pattern.p
    proj = channels.projections(F)
    pos = proj > 0.0
    scale = np.where(pos, channels.beta * p * np.where(pos, proj, 1.0) ** (p - 1.0), 0.0)
    return scale[..., None] * channels.dirs


class _FixedBeamObjective:
    """``R_u - R_e`` and its gradient in ``F`` with the beamformer folded in."""

    def __init__(self, v, channels: ChannelSet, noise: NoiseBudget):
        self.w = channels.beta * np.conj(np.asarray(v))[None, :]  # conj(v_k) beta_{m,k}
        self.dirs = channels.dirs
        self.p = channels.pattern.p
        self.sr = noise.sigma_r2
        self.se = noise.sigma_e2

    def _signals(self, F):
        proj = np.einsum("mkc,kc->mk", self.dirs, F)
        pos = np.maximum(proj, 0.0)
        return proj, pos, np.sum(self.w * pos**self.p, axis=1)

    def value(self, F) -> float:
        _, _, s = self._signals(F)
        snr_u = (s[0].real ** 2 + s[0].imag ** 2) / self.sr
        e = s[1:]
        snr_e = np.sum(e.real**2 + e.imag**2) / self.se
        return math.log2(1.0 + snr_u) - math.log2(1.0 + snr_e)

    def linearize(self, F) -> LinearizationTerms:
        proj, pos, s = self._signals(F)
        snr_u = abs(s[0]) ** 2 / self.sr
        snr_e = float(np.sum(np.abs(s[1:]) ** 2)) / self.se
        # d s_m / d f_k = w_{m,k} p proj^(p-1) q_{m,k}
        scale = np.where(proj > 0.0, self.p * np.where(proj > 0.0, pos, 1.0) ** (self.p - 1.0), 0.0)
        dpow = 2.0 * np.real(np.conj(s)[:, None] * self.w) * scale  # (M+1, K)
        weight = np.empty(len(s))
        weight[0] = 1.0 / (self.sr * (1.0 + snr_u) * _LN2)
        weight[1:] = -1.0 / (self.se * (1.0 + snr_e) * _LN2)
        coef = np.einsum("mk,mkc->kc", weight[:, None] * dpow, self.dirs)
        return LinearizationTerms(math.log2(1.0 + snr_u), math.log2(1.0 + snr_e), coef,
                                  np.array(F, dtype=float))


def secrecy_objective(v, channels: ChannelSet, F, noise: NoiseBudget) -> float:
    """Unclamped ``R_u - R_e`` as a function of the pointing matrix."""
    s = channels.h(F) @ np.conj(v)
    snr_u = abs(s[0]) ** 2 / noise.sigma_r2
    snr_e = np.sum(np.abs(s[1:]) ** 2) / noise.sigma_e2
    return float(np.log2(1.0 + snr_u) - np.log2(1.0 + snr_e))


def linearize(v, F_i, channels: ChannelSet, noise: NoiseBudget) -> LinearizationTerms:
    """First-order expansion of ``R_u`` and ``R_e`` around ``F_i``.

    ``coef[k]`` is the exact gradient of ``R_u - R_e`` with respect to
    ``f_k``, using ``d|s|^2 = 2 Re{conj(s) ds}``.
    """
    return _FixedBeamObjective(v, channels, noise).linearize(np.asarray(F_i, dtype=float))


def solve_subproblem(coef, theta_max: float, F_i) -> np.ndarray:
    """Row-wise maximizer of ``c_k . f`` over ``|f| <= 1, f_z >= cos(theta_max)``.

    A zero coefficient keeps the current vector.  When the whole flat face
    of the cap is optimal (``c`` points straight down) the rim point with
    the current azimuth is returned (azimuth 0 if there is none).
    """
    coef = np.atleast_2d(np.asarray(coef, dtype=float))
    F_i = np.atleast_2d(np.asarray(F_i, dtype=float))
    cz = math.cos(theta_max)
    sz = math.sin(theta_max)
    nc = np.sqrt(np.einsum("kc,kc->k", coef, coef))
    moving = nc > 0.0
    u = coef / np.where(moving, nc, 1.0)[:, None]
    inside = moving & (u[:, 2] >= cz)

    xy = coef[:, :2].copy()
    nxy = np.hypot(xy[:, 0], xy[:, 1])
    flat = nxy == 0.0
    xy[flat] = F_i[flat, :2]
    nxy[flat] = np.hypot(xy[flat, 0], xy[flat, 1])
    none = nxy == 0.0
    xy[none] = (1.0, 0.0)
    nxy[none] = 1.0
    rim = np.column_stack([sz * xy / nxy[:, None], np.full(len(coef), cz)])

    out = np.where(inside[:, None], u, rim)
    return np.where(moving[:, None], out, F_i)


def _normalize_rows(F):
    return F / np.linalg.norm(F, axis=1, keepdims=True)


def optimize_pointing(v, F0, channels: ChannelSet, noise: NoiseBudget, theta_max: float,
                      config: SCAConfig = SCAConfig()) -> tuple[np.ndarray, SCATrace]:
    """Safeguarded SCA ascent on the pointing matrix for a fixed beamformer.

    Each iteration solves the linearized subproblem and tries the solution
    as is.  If the exact objective drops, the step towards it is damped
    (rows renormalized, which keeps them inside the cap).  Damping restarts
    from twice the last accepted fraction and halves down to
    ``2**-max_halvings``; if even that fails the loop stops.  It also stops
    once the step or the relative objective gain becomes negligible.

    Returns the final matrix and a trace whose ``objective`` list starts
    with the value at ``F0`` and never decreases.
    """
    F = np.array(F0, dtype=float)
    fn = _FixedBeamObjective(v, channels, noise)
    trace = SCATrace()
    obj = fn.value(F)
    trace.objective.append(obj)
    t_min = 0.5**config.max_halvings
    t_last = 0.5
    for _ in range(config.max_iter):
        lin = fn.linearize(F)
        target = solve_subproblem(lin.coef, theta_max, F)
        direction = target - F
        accepted = None
        t = 1.0
        n_half = 0
        while t >= t_min:
            cand = target if t == 1.0 else _normalize_rows(F + t * direction)
            cand_obj = fn.value(cand)
            if cand_obj >= obj:
                accepted = (cand, cand_obj)
                break
            t = min(0.5 * t, 2.0 * t_last) if n_half == 0 else 0.5 * t
            n_half += 1
        if accepted is None:
            trace.stalled = True
            break
        if t < 1.0:
            t_last = t
        cand, cand_obj = accepted
        step = float(np.linalg.norm(cand - F))
        gain = cand_obj - obj
        F, obj = cand, cand_obj
        trace.objective.append(obj)
        trace.step.append(step)
        trace.halvings.append(n_half)
        if step <= config.tol or gain <= config.gain_tol * max(abs(obj), 1.0):
            break
    return F, trace


def finalize(F, theta_max: float | None = None) -> tuple[np.ndarray, list[DeflectionAngles]]:
    """Project columns onto the unit sphere and convert them to deflection angles."""
    F = np.array(F, dtype=float)
    norms = np.linalg.norm(F, axis=1)
    if np.any(norms == 0.0):
        raise ValueError("cannot normalize a zero pointing vector")
    F = F / norms[:, None]
    angles = [angles_from_vector(f) for f in F]
    if theta_max is not None:
        assert all(a.zenith <= theta_max + 1e-9 for a in angles)
    return F, angles
