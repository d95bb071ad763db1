"""Quantitative Banach contraction solver with certified constants.

Solves F(x) = L(x) + Q(x) + F(x0) = 0 under the explicit smallness
condition |F(x0)| <= 1/(10 c_L^2 c_Q), where c_L bounds the inverse of L
and c_Q is the quadratic difference constant of Q.  The iteration map is
phi(y) = -L^{-1}(F(x0) + Q(x0 + y)) - x0 on the ball of radius
1/(5 c_L c_Q); the a-priori guarantees (contraction factor 1/2, image
inside 0.7 x radius) are monitored at run time and violations invalidate
the supplied constants.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..errors import (
    ConstantsInvalidError,
    ContractionPreconditionError,
    InvalidInputError,
)


@dataclass(frozen=True)
class LinearOperatorHandle:
    """Invertible linear map given by apply/solve callables."""

    apply: Callable[[np.ndarray], np.ndarray]
    solve: Callable[[np.ndarray], np.ndarray]


def _as_handle(L) -> LinearOperatorHandle:
    if isinstance(L, LinearOperatorHandle):
        return L
    mat = np.asarray(L, dtype=float)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise InvalidInputError("matrix L must be square")
    cond = np.linalg.cond(mat)
    if not np.isfinite(cond) or cond > 1e14:
        raise InvalidInputError(f"L is numerically singular (cond = {cond:.3g})")
    inv = np.linalg.inv(mat)
    return LinearOperatorHandle(apply=lambda x: mat @ x, solve=lambda y: inv @ y)


def _default_norm(x: np.ndarray) -> float:
    return float(np.linalg.norm(np.asarray(x).ravel(), ord=np.inf))


@dataclass
class ContractionSpec:
    """Data of the contraction lemma around the base point x0."""

    L: object
    Q: Callable[[np.ndarray], np.ndarray]
    f_x0: np.ndarray
    c_L: float
    c_Q: float
    x0: np.ndarray
    norm_x: Callable[[np.ndarray], float] = _default_norm
    norm_y: Callable[[np.ndarray], float] = _default_norm
    rng_check_samples: int = 8

    def __post_init__(self):
        if self.c_L <= 0 or self.c_Q < 0:
            raise InvalidInputError("need c_L > 0 and c_Q >= 0")
        self.handle = _as_handle(self.L)
        self.x0 = np.asarray(self.x0, dtype=float)
        self.f_x0 = np.asarray(self.f_x0, dtype=float)

    @property
    def radius(self) -> float:
        """Ball radius 1/(5 c_L c_Q); infinite for a linear problem."""
        return math.inf if self.c_Q == 0 else 1.0 / (5.0 * self.c_L * self.c_Q)

    @property
    def smallness_bound(self) -> float:
        return math.inf if self.c_Q == 0 else 1.0 / (10.0 * self.c_L**2 * self.c_Q)

    def spot_check_quadratic(self, rng: np.random.Generator, scale: float = 1.0) -> float:
        """Max observed ratio of the quadratic difference bound on samples."""
        worst = 0.0
        for _ in range(self.rng_check_samples):
            y1 = rng.standard_normal(self.x0.shape) * scale
            y2 = rng.standard_normal(self.x0.shape) * scale
            num = self.norm_y(self.Q(self.x0 + y1) - self.Q(self.x0 + y2))
            den = self.norm_x(y1 - y2) * (self.norm_x(y1) + self.norm_x(y2))
            if den > 0:
                worst = max(worst, num / den)
        return worst

    def phi(self, y: np.ndarray) -> np.ndarray:
        return -self.handle.solve(self.f_x0 + self.Q(self.x0 + y)) - self.x0

    def residual(self, y: np.ndarray) -> np.ndarray:
        """F(x0 + y) = L(x0 + y) + [Q(x0+y) - L(x0)] + F(x0)."""
        return self.handle.apply(y) + self.Q(self.x0 + y) + self.f_x0


@dataclass
class ContractionResult:
    x: np.ndarray
    distance_from_x0: float
    residual_norm: float
    iterations: int
    contraction_factors: list[float] = field(default_factory=list)
    radius: float = math.inf

    @property
    def max_contraction_factor(self) -> float:
        return max(self.contraction_factors, default=0.0)


def contract_solve(
    spec: ContractionSpec,
    tol: float = 1e-12,
    max_iter: int = 200,
) -> ContractionResult:
    """Run the contraction iteration and certify the advertised behaviour.

    Raises ContractionPreconditionError when |F(x0)| exceeds the lemma
    bound, and ConstantsInvalidError when an observed contraction factor
    exceeds 1/2 or an iterate escapes 0.7 x radius (either signals a wrong
    c_L or c_Q).
    """
    norm_f0 = spec.norm_y(spec.f_x0)
    bound = spec.smallness_bound
    if norm_f0 > bound:
        raise ContractionPreconditionError(norm_f0, bound)
    radius = spec.radius

    y = np.zeros_like(spec.x0)
    prev_step = None
    factors: list[float] = []
    for it in range(1, max_iter + 1):
        y_next = spec.phi(y)
        step = spec.norm_x(y_next - y)
        if math.isfinite(radius) and spec.norm_x(y_next) > 0.7 * radius * (1 + 1e-9):
            raise ConstantsInvalidError(
                f"iterate left the 0.7-ball: |y| = {spec.norm_x(y_next):.3g}, "
                f"0.7 eps = {0.7 * radius:.3g}"
            )
        if prev_step is not None and prev_step > 1e-300:
            factor = step / prev_step
            factors.append(factor)
            if factor > 0.5 * (1 + 1e-6) and step > 10 * tol:
                raise ConstantsInvalidError(
                    f"observed contraction factor {factor:.3f} > 1/2"
                )
        converged = step <= tol
        y = y_next
        prev_step = step
        if converged:
            break
    res = spec.residual(y)
    return ContractionResult(
        x=spec.x0 + y,
        distance_from_x0=spec.norm_x(y),
        residual_norm=spec.norm_y(res),
        iterations=it,
        contraction_factors=factors,
        radius=radius,
    )


def verify_contraction_certificate(
    spec: ContractionSpec,
    rng: np.random.Generator,
    pairs: int = 100,
) -> tuple[float, float]:
    """Sampled sup of the phi-contraction factor and of |phi| / radius.

    Draws pairs inside the contraction ball; a correct (c_L, c_Q) pair
    yields factors <= 1/2 and |phi(y)| <= 0.7 radius.
    """
    radius = spec.radius
    if not math.isfinite(radius):
        raise InvalidInputError("certificate needs c_Q > 0")
    worst_factor = 0.0
    worst_image = 0.0
    for _ in range(pairs):
        y1 = rng.standard_normal(spec.x0.shape)
        y2 = rng.standard_normal(spec.x0.shape)
        y1 *= radius * rng.uniform(0.0, 1.0) / max(spec.norm_x(y1), 1e-300)
        y2 *= radius * rng.uniform(0.0, 1.0) / max(spec.norm_x(y2), 1e-300)
        p1, p2 = spec.phi(y1), spec.phi(y2)
        d = spec.norm_x(y1 - y2)
        if d > 1e-300:
            worst_factor = max(worst_factor, spec.norm_x(p1 - p2) / d)
        worst_image = max(worst_image, spec.norm_x(p1) / radius)
    return worst_factor, worst_image
