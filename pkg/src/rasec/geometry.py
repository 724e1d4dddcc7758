"""Array/node geometry and the deflection-angle <-> pointing-vector map.

All vectors are plain ``numpy`` arrays of shape ``(3,)`` (or ``(..., 3)``
for batches).  Angles are radians.  Antenna index ``k`` runs row-major
over the planar grid with ``x`` varying fastest.
"""
from __future__ import annotations

from typing import NamedTuple

import numpy as np

E3 = np.array([0.0, 0.0, 1.0])

_UNIT_TOL = 1e-9


class DeflectionAngles(NamedTuple):
    """Zenith (from +z) and azimuth (from +x) of an antenna boresight."""

    zenith: float
    azimuth: float


def pointing_vector(angles) -> np.ndarray:
    """Unit boresight vector for ``(zenith, azimuth)``.

    Accepts a :class:`DeflectionAngles` or anything unpackable into two
    floats / broadcastable arrays.
    """
    zen, azi = angles
    zen = np.asarray(zen, dtype=float)
    azi = np.asarray(azi, dtype=float)
    s = np.sin(zen)
    return np.stack([s * np.cos(azi), s * np.sin(azi), np.cos(zen)], axis=-1)


def angles_from_vector(f) -> DeflectionAngles:
    """Invert :func:`pointing_vector` for a unit vector in the upper hemisphere.

    The azimuth is wrapped to ``[0, 2*pi)`` and set to 0 at the pole.

    Raises
    ------
    ValueError
        If ``f`` is not unit norm or does not point above the array plane.
    """
    f = np.asarray(f, dtype=float)
    norm = np.linalg.norm(f)
    if abs(norm - 1.0) > _UNIT_TOL:
        raise ValueError(f"pointing vector must be unit norm, got |f| = {norm!r}")
    if f[2] <= 0.0:
        raise ValueError(f"pointing vector must have f_z > 0, got {f[2]!r}")
    zen = float(np.arccos(np.clip(f[2], -1.0, 1.0)))
    if f[0] == 0.0 and f[1] == 0.0:
        return DeflectionAngles(zen, 0.0)
    azi = float(np.arctan2(f[1], f[0]))
    if azi < 0.0:
        azi += 2.0 * np.pi
        # -tiny + 2pi rounds to exactly 2pi
        if azi >= 2.0 * np.pi:
            azi = 0.0
    return DeflectionAngles(zen, azi)


def upa_positions(k_x: int, k_y: int, d: float) -> np.ndarray:
    """Element positions of a ``k_x`` by ``k_y`` grid centred at the origin.

    Returns an array of shape ``(k_x * k_y, 3)`` with ``z = 0``; element
    ``(i_x, i_y)`` sits at row ``i_y * k_x + i_x``.
    """
    if k_x < 1 or k_y < 1:
        raise ValueError(f"grid dimensions must be >= 1, got ({k_x}, {k_y})")
    xs = (np.arange(k_x) - (k_x - 1) / 2.0) * d
    ys = (np.arange(k_y) - (k_y - 1) / 2.0) * d
    gx, gy = np.meshgrid(xs, ys)  # gy rows, gx columns -> x fastest on ravel
    return np.column_stack([gx.ravel(), gy.ravel(), np.zeros(k_x * k_y)])


def node_position(r: float, phi: float) -> np.ndarray:
    """Point at distance ``r`` and elevation ``phi`` (from +x) in the x-z plane."""
    return np.array([r * np.cos(phi), 0.0, r * np.sin(phi)])


def direction_and_distance(q, w) -> tuple[np.ndarray, float]:
    """Unit vector from ``w`` towards ``q`` and the distance between them."""
    diff = np.asarray(q, dtype=float) - np.asarray(w, dtype=float)
    dist = float(np.linalg.norm(diff))
    if dist == 0.0:
        raise ValueError("direction undefined for coincident points")
    return diff / dist, dist


def link_geometry(nodes: np.ndarray, elements: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Batched :func:`direction_and_distance` for every (node, element) pair.

    Returns ``(dirs, dist)`` of shapes ``(M+1, K, 3)`` and ``(M+1, K)``.
    """
    diff = np.asarray(nodes, dtype=float)[:, None, :] - np.asarray(elements, dtype=float)[None, :, :]
    dist = np.linalg.norm(diff, axis=-1)
    if np.any(dist == 0.0):
        raise ValueError("a node coincides with an array element")
    return diff / dist[..., None], dist
