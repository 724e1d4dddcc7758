"""Alternating optimization of beamformer and pointing matrix, plus benchmarks."""
from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field

import numpy as np

from .beamforming import optimal_beamformer
from .channel import DEFLECTION_STREAM, ChannelSet, GainPattern, substream
from .geometry import E3, DeflectionAngles, pointing_vector
from .rates import NoiseBudget, RateReport, build_forms, rate_report
from .scenario import Scenario
from .sca import SCAConfig, finalize, optimize_pointing

log = logging.getLogger(__name__)


class SchemeKind(str, enum.Enum):
    RA = "ra"
    FIXED = "fixed"
    ISOTROPIC = "isotropic"
    RANDOM = "random"

    @classmethod
    def parse(cls, name: str) -> "SchemeKind":
        try:
            return cls(name.strip().lower())
        except ValueError:
            raise ValueError(f"unknown scheme {name!r}; choose from "
                             f"{', '.join(s.value for s in cls)}") from None


ALL_SCHEMES = tuple(SchemeKind)


@dataclass(frozen=True)
class AOConfig:
    eps: float = 1e-8
    max_outer: int = 50
    sca: SCAConfig = SCAConfig()

    def __post_init__(self):
        if not self.eps > 0:
            raise ValueError("eps must be positive")
        if self.max_outer < 1 or self.sca.max_iter < 1:
            raise ValueError("iteration caps must be >= 1")


@dataclass
class OptimizationTrace:
    """Per outer iteration records; index 0 is the starting point."""

    r_sec: list = field(default_factory=list)
    r_u: list = field(default_factory=list)
    r_e: list = field(default_factory=list)
    power: list = field(default_factory=list)
    sca_iterations: list = field(default_factory=list)
    sca_stalled: list = field(default_factory=list)
    converged: bool = False

    @property
    def iterations(self) -> int:
        return len(self.r_sec) - 1

    def record(self, rep: RateReport, v, sca_iters: int, stalled: bool):
        self.r_sec.append(rep.r_sec)
        self.r_u.append(rep.r_u)
        self.r_e.append(rep.r_e)
        self.power.append(float(np.vdot(v, v).real))
        self.sca_iterations.append(sca_iters)
        self.sca_stalled.append(stalled)


@dataclass
class AOResult:
    v: np.ndarray
    F: np.ndarray
    angles: list[DeflectionAngles]
    trace: OptimizationTrace

    @property
    def report(self) -> RateReport:
        return RateReport(self.trace.r_u[-1], self.trace.r_e[-1], self.trace.r_sec[-1])


def _relative_change(new: float, old: float) -> float:
    if old < 1e-12:
        return abs(new - old)
    return abs((new - old) / old)


def beamform(channels: ChannelSet, F, scenario: Scenario):
    noise = NoiseBudget.of(scenario)
    H = channels.h(F)
    v = optimal_beamformer(build_forms(H, noise), scenario.p_ap)
    return v, rate_report(v, H, noise)


def run_ao(scenario: Scenario, channels: ChannelSet, config: AOConfig = AOConfig()) -> AOResult:
    """Alternate the closed-form beamformer with SCA on the pointing matrix.

    Starts from all antennas facing ``+z``.  Iteration ``i`` computes the
    beamformer for ``F^(i-1)`` and then improves ``F``; the recorded rate is
    the secrecy rate of the pair.  Trace entry 0 is the value of the
    starting orientation under its optimal beamformer (the fixed-array
    benchmark).  Stops when the relative change drops to ``config.eps``
    (absolute change once the rate is numerically zero) or after
    ``config.max_outer`` iterations.
    """
    noise = NoiseBudget.of(scenario)
    F = np.tile(E3, (channels.K, 1))
    trace = OptimizationTrace()
    v, rep = beamform(channels, F, scenario)
    trace.record(rep, v, 0, False)
    for _ in range(config.max_outer):
        if trace.iterations:
            v, _ = beamform(channels, F, scenario)
        F, sca_trace = optimize_pointing(v, F, channels, noise, scenario.theta_max, config.sca)
        rep = rate_report(v, channels.h(F), noise)
        trace.record(rep, v, sca_trace.iterations, sca_trace.stalled)
        if _relative_change(trace.r_sec[-1], trace.r_sec[-2]) <= config.eps:
            trace.converged = True
            break
    else:
        log.warning("AO hit the outer iteration cap (%d) before converging", config.max_outer)
    F, angles = finalize(F, scenario.theta_max)
    return AOResult(v, F, angles, trace)


def random_pointing(scenario: Scenario, seed: int, realization: int) -> np.ndarray:
    """Uniform azimuth in ``[0, 2pi)`` and zenith in ``[0, theta_max]`` per antenna."""
    rng = substream(seed, DEFLECTION_STREAM, realization)
    azi = rng.uniform(0.0, 2.0 * np.pi, scenario.K)
    zen = rng.uniform(0.0, scenario.theta_max, scenario.K)
    return pointing_vector((zen, azi))


def run_benchmark(scheme: SchemeKind, scenario: Scenario, channels: ChannelSet,
                  seed: int = 0, realization: int = 0):
    """Evaluate a non-optimized orientation scheme with its optimal beamformer.

    Returns ``(v, F, RateReport)``.
    """
    scheme = SchemeKind(scheme)
    F = np.tile(E3, (channels.K, 1))
    if scheme is SchemeKind.FIXED:
        pass
    elif scheme is SchemeKind.ISOTROPIC:
        channels = channels.with_pattern(GainPattern.isotropic_pattern())
    elif scheme is SchemeKind.RANDOM:
        F = random_pointing(scenario, seed, realization)
    else:
        raise ValueError("the optimized scheme is run through run_ao")
    v, rep = beamform(channels, F, scenario)
    return v, F, rep
