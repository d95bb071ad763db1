"""Smooth cutoff and the pregluing interpolation of two end sections."""

from __future__ import annotations

import numpy as np

from ..errors import InvalidInputError


def smooth_step(x):
    """C^infinity step: exactly 0 for x <= 0, exactly 1 for x >= 1.

    chi(x) = f(x) / (f(x) + f(1-x)) with f(x) = exp(-1/x) for x > 0; the
    transition is symmetric about x = 1/2.
    """
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 0
    x = np.atleast_1d(x)
    out = np.zeros_like(x)
    out[x >= 1.0] = 1.0
    mid = (x > 0.0) & (x < 1.0)
    xm = x[mid]
    f = np.exp(-1.0 / xm)
    g = np.exp(-1.0 / (1.0 - xm))
    out[mid] = f / (f + g)
    return float(out[0]) if scalar else out


def cutoff(t, T: float):
    """Translated cutoff chi_T(t): 0 for t <= T, 1 for t >= T + 1."""
    return smooth_step(np.asarray(t, dtype=float) - T)


def reflect_samples(u: np.ndarray) -> np.ndarray:
    """Samples of s -> u(L - s) on a grid symmetric about L/2."""
    return np.asarray(u)[::-1].copy()


def preglue(
    u_plus: np.ndarray,
    u_minus: np.ndarray,
    T: float,
    coords: np.ndarray,
) -> np.ndarray:
    """Glue two end sections across the neck: u+ - chi_{T-1} (u+ - u-).

    ``u_plus`` is sampled on ``coords`` (the glued coordinate t in
    [0, 2T+1]); ``u_minus`` is sampled on the same grid in its own end
    coordinate s and is reflected through t -> 2T+1-s internally.  The
    result equals u_plus for t <= T-1 and the reflected u_minus for
    t >= T; it is linear in (u_plus, u_minus).
    """
    u_plus = np.asarray(u_plus, dtype=float)
    u_minus = np.asarray(u_minus, dtype=float)
    coords = np.asarray(coords, dtype=float)
    if u_plus.shape != u_minus.shape or u_plus.shape[0] != coords.shape[0]:
        raise InvalidInputError("end sections must be sampled on the shared grid")
    length = 2.0 * T + 1.0
    if abs(coords[0] + coords[-1] - length) > 1e-9 or np.max(
        np.abs((length - coords)[::-1] - coords)
    ) > 1e-9:
        raise InvalidInputError("grid is not symmetric under t -> 2T+1-t")
    chi = cutoff(coords, T - 1.0)
    chi = chi.reshape((-1,) + (1,) * (u_plus.ndim - 1))
    u_minus_reflected = reflect_samples(u_minus)
    return u_plus - chi * (u_plus - u_minus_reflected)
