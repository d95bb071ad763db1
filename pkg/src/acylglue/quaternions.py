"""Quaternion linear algebra on the rank-4 model fiber.

The fiber R^4 is identified with the quaternions via the basis
(1, i, j, k).  Left and right multiplication operators are the source of
every structure matrix in the package: the complex structure J is left
multiplication by i, the two Clifford generators are left multiplication
by j and k, and the symmetric matrices that anticommute with J (used as
cap potentials) are mixed left/right products.
"""

from __future__ import annotations

import numpy as np

# multiplication table of (1, i, j, k): MULT[a, b] = (index, sign) of e_a * e_b
_MULT_INDEX = np.array(
    [[0, 1, 2, 3], [1, 0, 3, 2], [2, 3, 0, 1], [3, 2, 1, 0]], dtype=int
)
_MULT_SIGN = np.array(
    [[1, 1, 1, 1], [1, -1, 1, -1], [1, -1, -1, 1], [1, 1, -1, -1]], dtype=float
)


def quat_mult(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Quaternion product, broadcasting over leading axes of shape (..., 4)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    out = np.zeros(np.broadcast_shapes(x.shape, y.shape), dtype=float)
    for a in range(4):
        for b in range(4):
            out[..., _MULT_INDEX[a, b]] += _MULT_SIGN[a, b] * x[..., a] * y[..., b]
    return out


def left_mult_matrix(q: np.ndarray) -> np.ndarray:
    """Matrix of x -> q * x."""
    m = np.zeros((4, 4))
    for b in range(4):
        e = np.zeros(4)
        e[b] = 1.0
        m[:, b] = quat_mult(q, e)
    return m


def right_mult_matrix(q: np.ndarray) -> np.ndarray:
    """Matrix of x -> x * q."""
    m = np.zeros((4, 4))
    for b in range(4):
        e = np.zeros(4)
        e[b] = 1.0
        m[:, b] = quat_mult(e, q)
    return m


E0, EI, EJ, EK = np.eye(4)

L_I = left_mult_matrix(EI)
L_J = left_mult_matrix(EJ)
L_K = left_mult_matrix(EK)
R_I = right_mult_matrix(EI)
R_J = right_mult_matrix(EJ)
R_K = right_mult_matrix(EK)


def symmetric_anti_j(coeffs: dict[str, float]) -> np.ndarray:
    """Real symmetric 4x4 matrix anticommuting with J = L_I.

    Basis: the six products L_a R_b with a in {j, k}, b in {i, j, k};
    keys are two-letter strings like "ji" or "kk".
    """
    left = {"j": L_J, "k": L_K}
    right = {"i": R_I, "j": R_J, "k": R_K}
    m = np.zeros((4, 4))
    for key, c in coeffs.items():
        a, b = key
        m += c * left[a] @ right[b]
    return m
