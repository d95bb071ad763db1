"""Cross-section spectra and indicial data of cylinder Dirac operators.

A flat torus cross-section with trivialized rank-4 normal fiber carries the
operator J d/dt + D_Sigma.  On the Fourier mode xi of the dual lattice the
tangential part acts by the 4x4 matrix A(xi) = i (xi_1 g1 + xi_2 g2), and the
indicial roots of the cylinder operator are the eigenvalues of the Hermitian
matrices J A(xi).  For the torus they are +/- 2*pi*|xi_dual| = +/- sqrt(lap)
where lap runs over the Laplace spectrum, with multiplicity twice the Laplace
multiplicity, and the rate-0 space is the whole fiber (dimension 4).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInputError
from .quaternions import L_I, L_J, L_K

_GROUP_TOL = 1e-12  # relative dedup tolerance for eigenvalue grouping
_ROOT_TOL = 1e-9


@dataclass(frozen=True)
class LatticeTorus:
    """Flat 2-torus R^2 / lattice, given by a 2x2 basis matrix (columns)."""

    basis: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.basis, dtype=float)
        if b.shape != (2, 2):
            raise InvalidInputError("lattice basis must be a 2x2 matrix")
        if abs(np.linalg.det(b)) < 1e-12:
            raise InvalidInputError("degenerate lattice: basis determinant is zero")
        object.__setattr__(self, "basis", b)

    @property
    def dual_basis(self) -> np.ndarray:
        """Angular dual basis: columns xi_a with <xi_a, b_c> = 2 pi delta_ac.

        Laplace eigenvalues of the torus are |m xi_1 + n xi_2|^2 over integer
        (m, n); this equals the conventional 4 pi^2 |dual vector|^2.
        """
        return 2.0 * np.pi * np.linalg.inv(self.basis).T

    def dual_gram(self) -> np.ndarray:
        d = self.dual_basis
        return d.T @ d


def lattice_preset(name: str) -> LatticeTorus:
    """Named lattices: "square2pi", "hex-first2", or "square-first:<r1>"."""
    if name == "square2pi":
        return LatticeTorus(2.0 * np.pi * np.eye(2))
    if name == "hex-first2":
        # hexagonal lattice scaled so the first positive Laplace eigenvalue
        # is exactly 2 (six shortest dual vectors of squared norm 2)
        dual = math.sqrt(2.0) * np.array([[1.0, 0.5], [0.0, math.sqrt(3.0) / 2.0]])
        return LatticeTorus(2.0 * np.pi * np.linalg.inv(dual).T)
    if name.startswith("square-first:"):
        r1 = float(name.split(":", 1)[1])
        if r1 <= 0:
            raise InvalidInputError("first root of square-first preset must be > 0")
        return LatticeTorus((2.0 * np.pi / r1) * np.eye(2))
    raise InvalidInputError(f"unknown lattice preset {name!r}")


@dataclass(frozen=True)
class SpectrumTable:
    """Ascending (eigenvalue, multiplicity) pairs, complete up to ``cutoff``."""

    entries: tuple[tuple[float, int], ...]
    cutoff: float

    def __post_init__(self):
        ev = [e for e, _ in self.entries]
        if any(m < 1 for _, m in self.entries):
            raise InvalidInputError("multiplicities must be >= 1")
        if any(b <= a for a, b in zip(ev, ev[1:])):
            raise InvalidInputError("eigenvalues must be strictly ascending")
        if ev and ev[0] < 0:
            raise InvalidInputError("eigenvalues must be nonnegative")

    def to_json_dict(self) -> dict:
        return {
            "entries": [[float(e), int(m)] for e, m in self.entries],
            "cutoff": float(self.cutoff),
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "SpectrumTable":
        return cls(
            entries=tuple((float(e), int(m)) for e, m in d["entries"]),
            cutoff=float(d["cutoff"]),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True)


@dataclass(frozen=True)
class IndicialData:
    """Nonzero indicial roots with multiplicities, plus the rate-0 dimension.

    ``roots`` holds every nonzero root with |root| <= cutoff, symmetric under
    negation; 0 is always an indicial root when d0 > 0 and is kept separate.
    """

    roots: tuple[tuple[float, int], ...]
    d0: int
    cutoff: float

    def __post_init__(self):
        if self.d0 < 0:
            raise InvalidInputError("d0 must be nonnegative")
        vals = sorted(r for r, _ in self.roots)
        if any(abs(r) <= _ROOT_TOL for r in vals):
            raise InvalidInputError("rate 0 belongs in d0, not in roots")
        for r, d in self.roots:
            if d < 1:
                raise InvalidInputError("root multiplicities must be >= 1")
            if abs(r) > self.cutoff + _ROOT_TOL:
                raise InvalidInputError("root beyond the stated cutoff")
            if self.multiplicity(-r) != d:
                raise InvalidInputError("roots must be symmetric under negation")

    def multiplicity(self, rate: float, tol: float = _ROOT_TOL) -> int:
        if abs(rate) <= tol:
            return self.d0
        for r, d in self.roots:
            if abs(r - rate) <= tol:
                return d
        return 0

    def sorted_roots(self) -> list[tuple[float, int]]:
        """All roots including 0 (with d0), ascending."""
        items = sorted(self.roots)
        if self.d0 > 0:
            items = sorted(items + [(0.0, self.d0)])
        return items

    def roots_in_open_interval(self, a: float, b: float) -> list[tuple[float, int]]:
        return [(r, d) for r, d in self.sorted_roots() if a < r < b]

    def to_json_dict(self) -> dict:
        return {
            "roots": [[float(r), int(d)] for r, d in sorted(self.roots)],
            "d0": int(self.d0),
            "cutoff": float(self.cutoff),
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "IndicialData":
        return cls(
            roots=tuple((float(r), int(m)) for r, m in d["roots"]),
            d0=int(d["d0"]),
            cutoff=float(d["cutoff"]),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True)


@dataclass(frozen=True)
class CliffordModel:
    """J and the two Clifford generators on the rank-4 model fiber."""

    J: np.ndarray = field(default_factory=lambda: L_I.copy())
    gamma1: np.ndarray = field(default_factory=lambda: L_J.copy())
    gamma2: np.ndarray = field(default_factory=lambda: L_K.copy())

    def validate(self, tol: float = 1e-12) -> None:
        eye = np.eye(4)
        J, g1, g2 = self.J, self.gamma1, self.gamma2
        checks = [
            (J @ J + eye, "J^2 = -1"),
            (g1 @ g1 + eye, "gamma1^2 = -1"),
            (g2 @ g2 + eye, "gamma2^2 = -1"),
            (g1 @ g2 + g2 @ g1, "gamma1 gamma2 + gamma2 gamma1 = 0"),
            (g1 @ J + J @ g1, "gamma1 J + J gamma1 = 0"),
            (g2 @ J + J @ g2, "gamma2 J + J gamma2 = 0"),
            (g1 @ g2 - J, "gamma1 gamma2 = J"),
        ]
        for m, label in checks:
            if np.max(np.abs(m)) > tol:
                raise InvalidInputError(f"Clifford model violates {label}")


DEFAULT_CLIFFORD = CliffordModel()


def _dual_lattice_points(lattice: LatticeTorus, cutoff: float) -> tuple[np.ndarray, np.ndarray]:
    """Integer pairs (m, n) and squared norms q(m, n) <= cutoff of the dual."""
    gram = lattice.dual_gram()
    gram_inv = np.linalg.inv(gram)
    mmax = int(math.floor(math.sqrt(max(cutoff, 0.0) * gram_inv[0, 0]) + 1e-9))
    nmax = int(math.floor(math.sqrt(max(cutoff, 0.0) * gram_inv[1, 1]) + 1e-9))
    m, n = np.meshgrid(np.arange(-mmax, mmax + 1), np.arange(-nmax, nmax + 1), indexing="ij")
    m = m.ravel()
    n = n.ravel()
    q = gram[0, 0] * m * m + 2.0 * gram[0, 1] * m * n + gram[1, 1] * n * n
    keep = q <= cutoff * (1.0 + 1e-13) + 1e-13
    return np.stack([m[keep], n[keep]], axis=1), q[keep]


def _group(values: np.ndarray) -> list[tuple[float, int]]:
    """Group a sorted array into (value, count) with relative tolerance."""
    out: list[tuple[float, int]] = []
    for v in values:
        if out and abs(v - out[-1][0]) <= _GROUP_TOL * max(1.0, abs(v)):
            out[-1] = (out[-1][0], out[-1][1] + 1)
        else:
            out.append((float(v), 1))
    return out


def laplace_spectrum_torus(lattice: LatticeTorus, cutoff: float) -> SpectrumTable:
    """All Laplace eigenvalues <= cutoff of the torus, with multiplicities.

    Eigenvalues are 4 pi^2 |xi|^2 over the dual lattice, computed here as
    squared norms over the angular dual basis.
    """
    if cutoff < 0:
        raise InvalidInputError("cutoff must be nonnegative")
    _, q = _dual_lattice_points(lattice, cutoff)
    entries = _group(np.sort(q))
    if entries and abs(entries[0][0]) < 1e-12:
        entries[0] = (0.0, entries[0][1])
    return SpectrumTable(entries=tuple(entries), cutoff=float(cutoff))


def torus_indicial_data(spectrum: SpectrumTable) -> IndicialData:
    """Indicial data of the torus cylinder: roots +/- sqrt(lap), d = 2 mult."""
    roots: list[tuple[float, int]] = []
    for ev, mult in spectrum.entries:
        if ev <= 0:
            continue
        r = math.sqrt(ev)
        roots.append((-r, 2 * mult))
        roots.append((r, 2 * mult))
    return IndicialData(roots=tuple(sorted(roots)), d0=4, cutoff=math.sqrt(spectrum.cutoff))


def sl_indicial_zero_data(b0_sigma: int, b1_sigma: int) -> IndicialData:
    """Rate-0 indicial dimension of a special-Lagrangian cross-section.

    d0 = 2 b^0(Sigma) + b^1(Sigma); no nonzero roots are computed, so the
    cutoff is 0.
    """
    if b0_sigma < 1:
        raise InvalidInputError("b0 of a nonempty cross-section is >= 1")
    if b1_sigma < 0:
        raise InvalidInputError("Betti numbers are nonnegative")
    return IndicialData(roots=(), d0=2 * b0_sigma + b1_sigma, cutoff=0.0)


def mode_operator(
    clifford: CliffordModel, xi: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """(A(xi), J A(xi)) for A(xi) = i (xi_1 gamma1 + xi_2 gamma2).

    J A(xi) is Hermitian with spectrum {+|xi|, +|xi|, -|xi|, -|xi|}.
    """
    xi = np.asarray(xi, dtype=float)
    a = 1j * (xi[0] * clifford.gamma1 + xi[1] * clifford.gamma2)
    return a, clifford.J.astype(complex) @ a


def homogeneous_kernel_basis(
    clifford: CliffordModel,
    lattice: LatticeTorus,
    root: float,
    tol: float = 1e-9,
) -> list[tuple[np.ndarray, np.ndarray]]:
    """Basis of the rate-``root`` homogeneous kernel as (mode, eigenvector).

    Returns one pair per eigenvector of J A(xi) with eigenvalue ``root``,
    over all dual modes xi with |xi| = |root|; empty if the rate is not an
    indicial root of this torus.
    """
    dual = lattice.dual_basis
    points, q = _dual_lattice_points(lattice, root * root + 1.0)
    out: list[tuple[np.ndarray, np.ndarray]] = []
    for (mn, qq) in zip(points, q):
        if abs(math.sqrt(qq) - abs(root)) > tol:
            continue
        xi = dual @ mn
        _, ja = mode_operator(clifford, xi)
        w, v = np.linalg.eigh(ja)
        for idx in np.nonzero(np.abs(w - root) <= max(tol, 1e-10))[0]:
            out.append((xi.copy(), v[:, idx].copy()))
    return out
