"""Immutable scenario description shared by every other module."""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import node_position, upa_positions


def dbm_to_watt(p_dbm):
    return 10.0 ** ((np.asarray(p_dbm, dtype=float) - 30.0) / 10.0)


def watt_to_dbm(p_w):
    return 10.0 * np.log10(np.asarray(p_w, dtype=float)) + 30.0


@dataclass(frozen=True)
class Scenario:
    """Array geometry, node placements, propagation constants and budgets.

    Lengths are meters, angles radians, powers watts.  ``rician_k`` may be
    ``math.inf`` for a pure line-of-sight channel.  ``spacing`` defaults to
    half a wavelength.
    """

    wavelength: float = 0.125
    k_x: int = 4
    k_y: int = 4
    spacing: float | None = None
    p: float = 4.0
    theta_max: float = math.pi / 6
    zeta0: float = 1e-3
    alpha: float = 3.0
    rician_k: float = 1.0
    sigma_r2: float = 1e-9
    sigma_e2: float = 1e-9
    p_ap: float = 0.1
    r_user: float = 50.0
    r_eve: float = 70.0
    user_angle: float = math.pi / 3
    eve_angles: tuple[float, ...] = field(default=(5 * math.pi / 12, 2 * math.pi / 3, math.pi / 6))

    def __post_init__(self):
        object.__setattr__(self, "eve_angles", tuple(float(a) for a in self.eve_angles))
        if self.spacing is None:
            object.__setattr__(self, "spacing", self.wavelength / 2.0)

    @property
    def K(self) -> int:
        return self.k_x * self.k_y

    @property
    def M(self) -> int:
        return len(self.eve_angles)

    @property
    def g0(self) -> float:
        return 2.0 * (2.0 * self.p + 1.0)

    def element_positions(self) -> np.ndarray:
        return upa_positions(self.k_x, self.k_y, self.spacing)

    def node_positions(self) -> np.ndarray:
        """User (row 0) followed by the eavesdroppers, shape ``(M+1, 3)``."""
        rows = [node_position(self.r_user, self.user_angle)]
        rows += [node_position(self.r_eve, a) for a in self.eve_angles]
        return np.array(rows)

    def replace(self, **changes) -> "Scenario":
        if "wavelength" in changes and "spacing" not in changes:
            changes["spacing"] = None
        return dataclasses.replace(self, **changes)

    def validate(self) -> None:
        """Raise ``ValueError`` naming the first offending field."""
        checks = [
            ("wavelength", self.wavelength > 0),
            ("k_x", int(self.k_x) == self.k_x and self.k_x >= 1),
            ("k_y", int(self.k_y) == self.k_y and self.k_y >= 1),
            ("spacing", self.spacing > 0),
            ("p", self.p >= 1),
            ("theta_max", 0 < self.theta_max < math.pi / 2),
            ("zeta0", self.zeta0 > 0),
            ("alpha", self.alpha > 0),
            ("rician_k", self.rician_k >= 0),
            ("sigma_r2", self.sigma_r2 > 0),
            ("sigma_e2", self.sigma_e2 > 0),
            ("p_ap", self.p_ap > 0),
            ("r_user", self.r_user > 0),
            ("r_eve", self.r_eve > 0),
            ("user_angle", 0 <= self.user_angle <= math.pi),
            ("eve_angles", all(0 <= a <= math.pi for a in self.eve_angles)),
        ]
        for name, ok in checks:
            if not ok:
                raise ValueError(f"invalid scenario field {name!r}: {getattr(self, name)!r}")

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["eve_angles"] = list(self.eve_angles)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Scenario":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown scenario keys: {sorted(unknown)}")
        return cls(**d)


def default_scenario() -> Scenario:
    """The reference configuration: 4x4 array at 2.4 GHz, one user, three eavesdroppers."""
    return Scenario()
