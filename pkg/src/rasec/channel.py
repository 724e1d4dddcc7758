"""Directional gain, path loss and Rician fading assembled into channel vectors.

A :class:`ChannelSet` holds everything about one fading realization that
does not depend on the antenna orientations, so the same draws can be
re-evaluated for any pointing matrix ``F`` (shape ``(K, 3)``, row ``k``
is the boresight of antenna ``k``).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .geometry import link_geometry
from .scenario import Scenario

# spawn-key prefixes separating independent random streams
FADING_STREAM = 0
PLACEMENT_STREAM = 1
DEFLECTION_STREAM = 2


def substream(seed: int, *key: int) -> np.random.Generator:
    """Independent generator addressed by ``(seed, *key)``.

    Streams are derived, never shared, so results do not depend on the
    order in which realizations, nodes or antennas are evaluated.
    """
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=tuple(int(k) for k in key)))


@dataclass(frozen=True)
class GainPattern:
    """``g0 * cos(eps)**(2p)`` on the front hemisphere, zero behind.

    With ``isotropic=True`` the gain is 1 everywhere on the sphere.
    """

    p: float
    g0: float
    isotropic: bool = False

    @classmethod
    def directional(cls, p: float) -> "GainPattern":
        return cls(p=float(p), g0=2.0 * (2.0 * p + 1.0))

    @classmethod
    def isotropic_pattern(cls) -> "GainPattern":
        return cls(p=0.0, g0=1.0, isotropic=True)

    def gain(self, cos_eps):
        cos_eps = np.asarray(cos_eps, dtype=float)
        if self.isotropic:
            return np.ones_like(cos_eps)
        c = np.maximum(cos_eps, 0.0)
        return np.where(cos_eps > 0.0, self.g0 * c ** (2.0 * self.p), 0.0)


def directional_gain(pattern: GainPattern, cos_eps):
    return pattern.gain(cos_eps)


@dataclass(frozen=True)
class PathLossModel:
    zeta0: float
    alpha: float
    d0: float = 1.0


def path_loss(model: PathLossModel, d):
    """Large-scale power gain ``zeta0 * (d0 / d)**alpha``."""
    d = np.asarray(d, dtype=float)
    if np.any(d <= 0.0):
        raise ValueError("distance must be positive")
    return model.zeta0 * (model.d0 / d) ** model.alpha


@dataclass(frozen=True)
class RicianParams:
    k_factor: float
    wavelength: float

    @property
    def pure_los(self) -> bool:
        return math.isinf(self.k_factor)


def los_phasor(d, wavelength: float):
    return np.exp(-2j * np.pi * np.asarray(d, dtype=float) / wavelength)


def draw_small_scale(rng: np.random.Generator, params: RicianParams, d: float) -> complex:
    """One Rician coefficient with unit mean power for a link of length ``d``."""
    los = complex(los_phasor(d, params.wavelength))
    if params.pure_los:
        return los
    x, y = rng.standard_normal(2)
    nlos = complex(x, y) / math.sqrt(2.0)
    k = params.k_factor
    return math.sqrt(k / (k + 1.0)) * los + math.sqrt(1.0 / (k + 1.0)) * nlos


def channel_coefficient(f, beta: complex, q, p: float) -> complex:
    """``beta * max(f.q, 0)**p`` for a single antenna/node link."""
    proj = float(np.dot(f, q))
    if proj <= 0.0:
        return 0j
    return beta * proj**p


@dataclass(frozen=True)
class ChannelSet:
    """One fading realization, user in row 0 and eavesdroppers after it.

    Attributes
    ----------
    dirs : (M+1, K, 3) unit link directions from antenna to node
    dist : (M+1, K) link lengths
    loss : (M+1, K) large-scale power gains
    g : (M+1, K) small-scale coefficients
    pattern : antenna gain pattern used to build ``h``
    """

    dirs: np.ndarray
    dist: np.ndarray
    loss: np.ndarray
    g: np.ndarray
    pattern: GainPattern

    @property
    def M(self) -> int:
        return self.g.shape[0] - 1

    @property
    def K(self) -> int:
        return self.g.shape[1]

    @cached_property
    def beta(self) -> np.ndarray:
        """Orientation-free amplitude ``sqrt(L * G0) * g``."""
        return np.sqrt(self.loss * self.pattern.g0) * self.g

    def with_pattern(self, pattern: GainPattern) -> "ChannelSet":
        return ChannelSet(self.dirs, self.dist, self.loss, self.g, pattern)

    def projections(self, F) -> np.ndarray:
        """``f_k . q_{m,k}`` for every link, shape ``(M+1, K)``."""
        return np.einsum("mkc,kc->mk", self.dirs, np.asarray(F, dtype=float))

    def h(self, F) -> np.ndarray:
        """Channel vectors ``h_m(F)`` stacked as rows, shape ``(M+1, K)``."""
        if self.pattern.isotropic:
            return np.sqrt(self.loss) * self.g
        proj = np.maximum(self.projections(F), 0.0)
        return self.beta * proj**self.pattern.p


def realize_channels(scenario: Scenario, seed: int, realization: int = 0,
                     pattern: GainPattern | None = None) -> ChannelSet:
    """Draw the fading for one realization of ``scenario``.

    The draw for link ``(m, k)`` depends only on ``(seed, realization, m, k)``.
    """
    if pattern is None:
        pattern = GainPattern.directional(scenario.p)
    nodes = scenario.node_positions()
    dirs, dist = link_geometry(nodes, scenario.element_positions())
    loss = path_loss(PathLossModel(scenario.zeta0, scenario.alpha), dist)
    params = RicianParams(scenario.rician_k, scenario.wavelength)
    g = np.empty(dist.shape, dtype=complex)
    for m in range(dist.shape[0]):
        for k in range(dist.shape[1]):
            rng = substream(seed, FADING_STREAM, realization, m, k)
            g[m, k] = draw_small_scale(rng, params, dist[m, k])
    return ChannelSet(dirs=dirs, dist=dist, loss=loss, g=g, pattern=pattern)
