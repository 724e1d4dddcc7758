"""Optimal secrecy beamformer for fixed antenna orientations.

Maximizes ``(1 + v^H A v) / (1 + v^H B v)`` subject to ``|v|^2 <= P``.  At
full power the ratio is a generalized Rayleigh quotient of the pencil
``(A + I/P, B + I/P)``; the top eigenvector is found by power iteration on
the Cholesky-reduced Hermitian matrix.
"""
from __future__ import annotations

import numpy as np
from scipy.linalg import cholesky, solve_triangular


class EigenSolveError(RuntimeError):
    """Power iteration failed to reach the requested tolerance."""


def top_eigenpair(H: np.ndarray, x0: np.ndarray | None = None, tol: float = 1e-12,
                  max_iter: int = 10_000, shift: float = 0.0) -> tuple[float, np.ndarray, int]:
    """Largest eigenvalue and unit eigenvector of a Hermitian PSD matrix.

    Iterates on ``H - shift*I``; ``shift`` should be a lower bound on the
    spectrum so that the dominant eigenvalue stays the largest one.  Stops
    once the (phase-aligned) iterate changes by at most ``tol``.
    """
    n = H.shape[0]
    x = np.ones(n, dtype=complex) if x0 is None else np.asarray(x0, dtype=complex).copy()
    nx = np.linalg.norm(x)
    if nx == 0.0:
        x = np.ones(n, dtype=complex)
        nx = np.linalg.norm(x)
    x /= nx
    Hs = H - shift * np.eye(n)
    for it in range(1, max_iter + 1):
        y = Hs @ x
        ny = np.linalg.norm(y)
        if ny == 0.0:
            raise EigenSolveError("power iteration collapsed to the zero vector")
        y /= ny
        # remove the arbitrary phase before measuring the change
        ph = np.vdot(y, x)
        if ph != 0:
            y *= ph / abs(ph)
        delta = np.linalg.norm(y - x)
        x = y
        if delta <= tol:
            lam = float(np.real(np.vdot(x, H @ x)))
            return lam, x, it
    raise EigenSolveError(f"power iteration did not converge in {max_iter} iterations")


def canonical_phase(v: np.ndarray) -> np.ndarray:
    """Rotate ``v`` so its largest-magnitude entry is real and positive."""
    i = int(np.argmax(np.abs(v)))
    if v[i] == 0:
        return v
    out = v * (abs(v[i]) / v[i])
    out[i] = abs(v[i])
    return out


def optimal_beamformer(forms, p_ap: float, tol: float = 1e-12,
                       max_iter: int = 10_000) -> np.ndarray:
    """Full-power beamformer maximizing the secrecy quotient.

    Parameters
    ----------
    forms : QuadraticForms
        ``(A, B)`` Hermitian PSD matrices.
    p_ap : float
        Transmit power budget in watts.

    Returns
    -------
    v : ndarray, complex, shape (K,)
        ``sqrt(p_ap)`` times the unit top generalized eigenvector, phase
        canonicalized.

    Raises
    ------
    EigenSolveError
        If the eigensolve does not converge within ``max_iter`` iterations.
    """
    if not p_ap > 0:
        raise ValueError("power budget must be positive")
    A, B = forms
    K = A.shape[0]
    reg = np.eye(K) / p_ap
    Ap = A + reg
    Bp = B + reg
    C = cholesky(Bp, lower=True)
    # H = C^-1 Ap C^-H
    Y = solve_triangular(C, Ap, lower=True)
    Hm = solve_triangular(C, Y.conj().T, lower=True).conj().T
    Hm = 0.5 * (Hm + Hm.conj().T)
    # spectrum of H is bounded below by 1 / (P * lambda_max(Bp))
    shift = 1.0 / (p_ap * np.linalg.norm(Bp, 2))
    # start from the reduced maximum-ratio direction, exact when B = 0
    x0 = None
    if np.any(A):
        j = int(np.argmax(np.real(np.diag(A))))
        x0 = C.conj().T @ A[:, j]
    _, y, _ = top_eigenpair(Hm, x0=x0, tol=tol, max_iter=max_iter, shift=0.5 * shift)
    o = solve_triangular(C.conj().T, y, lower=False)
    o /= np.linalg.norm(o)
    return canonical_phase(np.sqrt(p_ap) * o)


def secrecy_quotient(v, forms) -> float:
    """``(1 + v^H A v) / (1 + v^H B v)``."""
    A, B = forms
    return float(np.real(1.0 + np.vdot(v, A @ v)) / np.real(1.0 + np.vdot(v, B @ v)))
