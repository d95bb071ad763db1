"""Rational-curve normal bundles, rigidity, and gluing hypothesis checks.

A rational curve meeting the anticanonical K3 transversely in m points has
normal bundle O(k) + O(m-k-2); every cohomological quantity used by the
gluing theorems reduces to h^0 of line bundles on P^1.  The transversality
side of the hypothesis is plain linear algebra on evaluation-map images in
the 4m-dimensional sum of tangent spaces.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    InsufficientDataError,
    InvalidInputError,
    ModelInconsistencyError,
)

RANK_TOL = 1e-9  # relative singular-value threshold for rank decisions
ISOTROPY_TOL = 1e-10


def h0_line_bundle(d: int) -> int:
    """h^0(P^1, O(d)) = d+1 for d >= 0, else 0 (monomials 1, z, ..., z^d)."""
    return max(d + 1, 0)


@dataclass(frozen=True)
class CurveData:
    """Rational curve meeting the K3 in m points, N = O(k) + O(m-k-2).

    ``ev_image``: optional real matrix whose columns span the image of the
    evaluation map inside the 4m-dimensional sum of the tangent spaces at
    the intersection points.
    """

    m: int
    k: int
    ev_image: np.ndarray | None = None
    point_labels: tuple[str, ...] = ()

    def __post_init__(self):
        if self.m < 0:
            raise InvalidInputError("intersection count m must be nonnegative")
        labels = self.point_labels or tuple(f"x{j}" for j in range(self.m))
        if len(labels) != self.m:
            raise InvalidInputError("need one point label per intersection point")
        object.__setattr__(self, "point_labels", tuple(labels))
        if self.ev_image is not None:
            ev = np.asarray(self.ev_image, dtype=float)
            if ev.ndim != 2 or ev.shape[0] != 4 * self.m:
                raise InvalidInputError(
                    f"ev_image must have 4m = {4 * self.m} rows, got {ev.shape}"
                )
            object.__setattr__(self, "ev_image", ev)

    @property
    def splitting_degrees(self) -> tuple[int, int]:
        return self.k, self.m - self.k - 2

    def to_json_dict(self) -> dict:
        d: dict = {"m": self.m, "k": self.k, "point_labels": list(self.point_labels)}
        if self.ev_image is not None:
            d["ev_image"] = self.ev_image.tolist()
        return d

    @classmethod
    def from_json_dict(cls, d: dict) -> "CurveData":
        ev = np.asarray(d["ev_image"], dtype=float) if "ev_image" in d else None
        return cls(
            m=int(d["m"]),
            k=int(d["k"]),
            ev_image=ev,
            point_labels=tuple(d.get("point_labels", ())),
        )


@dataclass(frozen=True)
class SLBettiData:
    """Betti numbers of an ACyl special Lagrangian and its cross-section."""

    b0_L: int
    b1_L: int
    b2_L: int
    b0_sigma: int
    b1_sigma: int

    def __post_init__(self):
        if min(self.b0_L, self.b1_L, self.b2_L, self.b0_sigma, self.b1_sigma) < 0:
            raise InvalidInputError("Betti numbers are nonnegative")
        if self.b0_L < 1 or self.b0_sigma < 1:
            raise InvalidInputError("b0 of a nonempty manifold is >= 1")

    def to_json_dict(self) -> dict:
        return {
            "b0_L": self.b0_L,
            "b1_L": self.b1_L,
            "b2_L": self.b2_L,
            "b0_sigma": self.b0_sigma,
            "b1_sigma": self.b1_sigma,
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "SLBettiData":
        return cls(**{k: int(d[k]) for k in ("b0_L", "b1_L", "b2_L", "b0_sigma", "b1_sigma")})


@dataclass(frozen=True)
class HypothesisReport:
    """Outcome of a gluing-hypothesis check; verdict is the conjunction."""

    matched: bool
    injective_plus: bool
    injective_minus: bool
    transverse: bool
    details: dict = field(default_factory=dict)

    @property
    def verdict(self) -> bool:
        return self.matched and self.injective_plus and self.injective_minus and self.transverse

    def to_json_dict(self) -> dict:
        return {
            "matched": self.matched,
            "injective_plus": self.injective_plus,
            "injective_minus": self.injective_minus,
            "transverse": self.transverse,
            "verdict": self.verdict,
            "details": self.details,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True)


def normal_cohomology(c: CurveData) -> tuple[int, int, int]:
    """(h^0(N), h^1(N), h^0(N(-xbar))) of N = O(k) + O(m-k-2).

    h^1 is computed by Serre duality on the summands; twisting down by the
    m intersection points shifts both degrees by -m.  The identity
    h^1(N) = h^0(N(-xbar)) holds for every (m, k).
    """
    k, k2 = c.splitting_degrees
    h0 = h0_line_bundle(k) + h0_line_bundle(k2)
    h1 = h0_line_bundle(-k - 2) + h0_line_bundle(k - c.m)
    h0_minus = h0_line_bundle(k - c.m) + h0_line_bundle(-k - 2)
    return h0, h1, h0_minus


def rigidity_criterion(c: CurveData) -> bool:
    """True iff the curve is rigid relative its intersection points.

    Equivalent forms: -1 <= k <= m-1, h^1(N) = 0, h^0(N(-xbar)) = 0.
    """
    return -1 <= c.k <= c.m - 1


def acyl_kernel_ladder(c: CurveData) -> tuple[int, int]:
    """Real kernel dimensions of the punctured-curve operator at rates
    mu in (-1, 0) and 0: twice the complex h^0 with and without vanishing
    at the intersection points."""
    h0, _, h0_minus = normal_cohomology(c)
    return 2 * h0_minus, 2 * h0


def _rank(a: np.ndarray) -> tuple[int, float]:
    """(rank, smallest retained/rejected gap witness) via SVD threshold."""
    if a.size == 0:
        return 0, 0.0
    s = np.linalg.svd(a, compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0, 0.0
    thresh = RANK_TOL * s[0]
    r = int(np.sum(s > thresh))
    smallest = float(s[r - 1]) if r > 0 else 0.0
    return r, smallest


def transverse_intersection(a: np.ndarray, b: np.ndarray, ambient_dim: int) -> bool:
    """True iff span(a) and span(b) meet only at 0 inside R^ambient_dim."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    for name, m in (("A", a), ("B", b)):
        if m.ndim != 2 or m.shape[0] != ambient_dim:
            raise InvalidInputError(f"{name} must have {ambient_dim} rows")
        r, _ = _rank(m)
        if r != m.shape[1]:
            raise InvalidInputError(f"columns of {name} are not linearly independent")
    joint, _ = _rank(np.hstack([a, b]))
    return joint == a.shape[1] + b.shape[1]


def _block_permutation(matching: dict[str, str], plus_labels, minus_labels) -> np.ndarray | None:
    """4m x 4m matrix reordering 4-blocks from plus order to minus order.

    Returns None unless ``matching`` is a bijection of the label sets.
    """
    m = len(plus_labels)
    if set(matching.keys()) != set(plus_labels) or set(matching.values()) != set(minus_labels):
        return None
    if len(set(matching.values())) != m:
        return None
    perm = np.zeros((4 * m, 4 * m))
    minus_pos = {lab: i for i, lab in enumerate(minus_labels)}
    for i, lab in enumerate(plus_labels):
        j = minus_pos[matching[lab]]
        perm[4 * j : 4 * j + 4, 4 * i : 4 * i + 4] = np.eye(4)
    return perm


def check_holo_gluing_hypothesis(
    plus: CurveData,
    minus: CurveData,
    matching: dict[str, str],
    rotation: np.ndarray,
) -> HypothesisReport:
    """Check the holomorphic-curve gluing hypothesis.

    Conditions: the point matching is a bijection, both curves are rigid
    relative their points (h^0(N(-xbar)) = 0), and the rotated image of the
    plus evaluation map meets the minus one trivially.
    """
    if plus.m != minus.m:
        raise InvalidInputError(f"intersection counts differ: {plus.m} vs {minus.m}")
    if plus.ev_image is None or minus.ev_image is None:
        raise InvalidInputError("both curves need an ev_image matrix")
    rotation = np.asarray(rotation, dtype=float)
    n = 4 * plus.m
    if rotation.shape != (n, n):
        raise InvalidInputError(f"rotation must be {n}x{n}")
    if abs(np.linalg.det(rotation)) < 1e-12:
        raise InvalidInputError("rotation matrix must be invertible")

    perm = _block_permutation(matching, plus.point_labels, minus.point_labels)
    matched = perm is not None

    _, _, h0m_plus = normal_cohomology(plus)
    _, _, h0m_minus = normal_cohomology(minus)
    injective_plus = h0m_plus == 0
    injective_minus = h0m_minus == 0

    details: dict = {
        "h0_N_minus_xbar_plus": h0m_plus,
        "h0_N_minus_xbar_minus": h0m_minus,
    }
    transverse = False
    if matched:
        rotated = perm @ (rotation @ plus.ev_image)
        ra, _ = _rank(rotated)
        rb, _ = _rank(minus.ev_image)
        joint, smallest = _rank(np.hstack([rotated, minus.ev_image]))
        transverse = joint == ra + rb
        details.update(
            {"rank_plus": ra, "rank_minus": rb, "rank_joint": joint, "min_singular_value": smallest}
        )
    return HypothesisReport(
        matched=matched,
        injective_plus=injective_plus,
        injective_minus=injective_minus,
        transverse=transverse,
        details=details,
    )


def check_sl_gluing_hypothesis(
    plus: SLBettiData,
    minus: SLBettiData,
    matched_sections: bool = True,
    k_map_images: tuple[np.ndarray, np.ndarray] | None = None,
) -> HypothesisReport:
    """Check the special-Lagrangian gluing hypothesis.

    Injectivity on each side is the Betti identity b^2(L) - b^0(Sigma) +
    b^0(L) = 0.  The intersection condition holds automatically when both
    sides have b^1(L) = 0, and otherwise needs the two K-map images.
    """
    defect_plus = plus.b2_L - plus.b0_sigma + plus.b0_L
    defect_minus = minus.b2_L - minus.b0_sigma + minus.b0_L
    details: dict = {"defect_plus": defect_plus, "defect_minus": defect_minus}

    if plus.b1_L == 0 and minus.b1_L == 0:
        transverse = True
        details["transverse_automatic"] = True
    else:
        if k_map_images is None:
            raise InsufficientDataError(
                "b1(L) > 0 on some side: supply the pair of K-map image matrices"
            )
        im_plus, im_minus = (np.asarray(m, dtype=float) for m in k_map_images)
        if im_plus.shape[0] != im_minus.shape[0]:
            raise InvalidInputError("K-map images must share their ambient dimension")
        transverse = transverse_intersection(im_plus, im_minus, im_plus.shape[0])
        details["transverse_automatic"] = False
    return HypothesisReport(
        matched=matched_sections,
        injective_plus=defect_plus == 0,
        injective_minus=defect_minus == 0,
        transverse=transverse,
        details=details,
    )


@dataclass(frozen=True)
class SLModuliDimensions:
    dim_fixed: int
    dim_varying: int
    warnings: tuple[str, ...] = ()

    def __iter__(self):
        return iter((self.dim_fixed, self.dim_varying))


def sl_moduli_dimensions(d: SLBettiData) -> SLModuliDimensions:
    """Expected moduli dimensions (fixed cross-section, varying).

    dim_fixed = b^2(L) + b^0(L) - b^0(Sigma); dim_varying = b^1(L) + b^0(L).
    Negative dimensions and failure of b^1(L) = b^1(Sigma)/2 are flagged as
    model inconsistencies, not errors.
    """
    dim_fixed = d.b2_L + d.b0_L - d.b0_sigma
    dim_varying = d.b1_L + d.b0_L
    warnings: list[str] = []
    if dim_fixed < 0:
        warnings.append(
            f"negative fixed moduli dimension {dim_fixed}: Betti data is inconsistent"
        )
    if 2 * d.b1_L != d.b1_sigma:
        warnings.append(
            f"half-b1 relation fails: b1(L) = {d.b1_L} but b1(Sigma)/2 = {d.b1_sigma / 2}"
        )
    return SLModuliDimensions(dim_fixed, dim_varying, tuple(warnings))


def lagrangian_subspace_check(basis: np.ndarray, symplectic_form: np.ndarray) -> bool:
    """True iff the columns span a Lagrangian subspace of the form.

    Checks isotropy (basis^T omega basis = 0 to 1e-10 after normalizing the
    basis) and half dimension.
    """
    basis = np.asarray(basis, dtype=float)
    omega = np.asarray(symplectic_form, dtype=float)
    n = omega.shape[0]
    if omega.shape != (n, n) or np.max(np.abs(omega + omega.T)) > 1e-12:
        raise InvalidInputError("symplectic form must be antisymmetric and square")
    if n % 2 != 0:
        raise InvalidInputError("symplectic vector spaces are even dimensional")
    if abs(np.linalg.det(omega)) < 1e-12:
        raise InvalidInputError("symplectic form is degenerate")
    if basis.ndim != 2 or basis.shape[0] != n:
        raise InvalidInputError(f"basis must have {n} rows")
    q, r = np.linalg.qr(basis)
    rank = int(np.sum(np.abs(np.diag(r)) > RANK_TOL * max(1.0, np.max(np.abs(r)))))
    if rank != n // 2:
        return False
    pairing = q[:, :rank].T @ omega @ q[:, :rank]
    return bool(np.max(np.abs(pairing)) <= ISOTROPY_TOL * max(1.0, np.max(np.abs(omega))))


def isotropic_subspace_check(basis: np.ndarray, symplectic_form: np.ndarray) -> bool:
    """Isotropy alone (no half-dimension requirement)."""
    basis = np.asarray(basis, dtype=float)
    omega = np.asarray(symplectic_form, dtype=float)
    q, _ = np.linalg.qr(basis)
    pairing = q.T @ omega @ q
    return bool(np.max(np.abs(pairing)) <= ISOTROPY_TOL * max(1.0, np.max(np.abs(omega))))


def sample_transverse_line(
    target: np.ndarray,
    ambient_dim: int,
    rng: np.random.Generator,
    complex_structure: np.ndarray | None = None,
    max_draws: int = 64,
) -> np.ndarray:
    """Draw a 2-plane (a line and its J-rotation) transverse to ``target``.

    Realizes the genericity argument for the second gluing curve: candidate
    lines are sampled until one meets the given evaluation image only at 0.
    """
    target = np.asarray(target, dtype=float)
    if complex_structure is None:
        from .quaternions import L_I

        if ambient_dim % 4 != 0:
            raise InvalidInputError("default complex structure needs ambient_dim % 4 == 0")
        complex_structure = np.kron(np.eye(ambient_dim // 4), L_I)
    for _ in range(max_draws):
        v = rng.standard_normal(ambient_dim)
        line = np.stack([v, complex_structure @ v], axis=1)
        if np.linalg.matrix_rank(line) < 2:
            continue
        if target.shape[1] + 2 > ambient_dim:
            raise InvalidInputError("no transverse 2-plane can exist: dimensions too large")
        if transverse_intersection(target, line, ambient_dim):
            return line
    raise ModelInconsistencyError("failed to sample a transverse line")
