"""Exactly solvable two-ended model of the neck-stretching linearization.

Geometry: one interval [0, 2T+1] carrying a flat-torus cross-section.  The
plus end occupies small t, the minus end is the reflection t -> 2T+1-s of
its own coordinate s.  Sections of the rank-4 fiber decompose over torus
Fourier modes; the operator

    L = J d/dt + D_Sigma + S(t) + 2 kappa beta_T(t)

is block diagonal over modes because the cap potentials S and the preglued
background beta_T are constant in the cross-section directions (beta_T is a
real scalar quaternion, which also keeps L formally self-adjoint).

Per mode the coefficient matrix is frozen on each grid cell, so the cell
propagator is a genuine matrix exponential with closed-form even/odd parts:
with P Hermitian anticommuting with J and c real, H = J(P + cI) satisfies
H^2 = P^2 - c^2 I, and every needed integral of exp(sH) is a function of
the Hermitian matrix H^2.  The discrete operator maps node values to the
unique cell-constant source reproducing them under the exact flow; solving
it *is* matrix-exponential propagation, and the L^2 pairing of
reconstructed solutions is exactly self-adjoint under the cap conditions.

Caps carry spectral boundary conditions: at t = 0 the deviation from the
background lies in the nonnegative spectral subspace of the cap operator
J (D_Sigma + S_cap) (with a fixed Lagrangian on its zero modes), at
t = 2T+1 in the nonpositive one, the sign flip accounting for the outward
orientation of the reflected end.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np

from ..errors import (
    IllPosedBoundaryError,
    InvalidInputError,
)
from ..spectral import CliffordModel, DEFAULT_CLIFFORD, LatticeTorus
from .cutoff import preglue

_KER_TOL = 1e-9


# ---------------------------------------------------------------------------
# problem data


@dataclass(frozen=True)
class CapCondition:
    """Cap potential (symmetric, anticommuting with J) and the Lagrangian
    complement used on zero modes of the cap operator."""

    potential: np.ndarray
    lagrangian: np.ndarray | None = None

    def __post_init__(self):
        s = np.asarray(self.potential, dtype=float)
        if s.shape != (4, 4) or np.max(np.abs(s - s.T)) > 1e-12:
            raise InvalidInputError("cap potential must be symmetric 4x4")
        object.__setattr__(self, "potential", s)
        if self.lagrangian is not None:
            lag = np.asarray(self.lagrangian, dtype=float)
            if lag.shape != (4, 2):
                raise InvalidInputError("cap Lagrangian must be 4x2")
            object.__setattr__(self, "lagrangian", lag)


@dataclass(frozen=True)
class ModelGluingProblem:
    """Fully specified two-ended model cylinder problem.

    ``mu < 0`` is the decay rate of the prescribed scalar end solutions
    b_pm e^{mu t} and ``delta > 0`` the rate of the neck structure source
    eps0 e^{-delta T}; the effective error rate is min(delta, -mu).
    """

    lattice: LatticeTorus
    mode_cutoff: int
    T: float
    mu: float
    delta: float
    cap_plus: CapCondition
    cap_minus: CapCondition
    kappa: float = 0.0
    eps0: float = 0.0
    b_plus: float = 0.0
    b_minus: float = 0.0
    f_star: np.ndarray = field(default_factory=lambda: np.eye(4))
    clifford: CliffordModel = field(default_factory=lambda: DEFAULT_CLIFFORD)
    points_per_unit: int = 2
    exclude_zero_mode: bool = False
    name: str = ""

    def __post_init__(self):
        if not (self.mu < 0.0 < self.delta):
            raise InvalidInputError("need mu < 0 < delta")
        if self.mode_cutoff < 0:
            raise InvalidInputError("mode cutoff must be >= 0")
        if self.T <= 0:
            raise InvalidInputError("neck half-length T must be positive")
        f = np.asarray(self.f_star, dtype=float)
        if f.shape != (4, 4) or abs(np.linalg.det(f)) < 1e-12:
            raise InvalidInputError("f_star must be an invertible 4x4 matrix")
        object.__setattr__(self, "f_star", f)

    @property
    def delta_e(self) -> float:
        return min(self.delta, -self.mu)

    @property
    def sigma_points(self) -> int:
        return 2 * self.mode_cutoff + 1

    def with_T(self, T: float) -> "ModelGluingProblem":
        return replace(self, T=T)

    def grid(self) -> "NeckGrid":
        return NeckGrid(T=self.T, points_per_unit=self.points_per_unit)

    def mode_indices(self) -> list[tuple[int, int]]:
        xi = self.mode_cutoff
        modes = [
            (m, n)
            for m in range(-xi, xi + 1)
            for n in range(-xi, xi + 1)
            if not (self.exclude_zero_mode and m == 0 and n == 0)
        ]
        return modes

    def mode_vector(self, mn: tuple[int, int]) -> np.ndarray:
        return self.lattice.dual_basis @ np.asarray(mn, dtype=float)


@dataclass(frozen=True)
class NeckGrid:
    T: float
    points_per_unit: int

    @property
    def length(self) -> float:
        return 2.0 * self.T + 1.0

    @property
    def n_cells(self) -> int:
        n = self.points_per_unit * self.length
        if abs(n - round(n)) > 1e-9:
            raise InvalidInputError(
                f"grid with {self.points_per_unit} points per unit does not fit length {self.length}"
            )
        return int(round(n))

    @property
    def h(self) -> float:
        return self.length / self.n_cells

    @cached_property
    def nodes(self) -> np.ndarray:
        return np.linspace(0.0, self.length, self.n_cells + 1)

    @cached_property
    def midpoints(self) -> np.ndarray:
        return 0.5 * (self.nodes[:-1] + self.nodes[1:])

    @cached_property
    def node_weights(self) -> np.ndarray:
        w = np.full(self.n_cells + 1, self.h)
        w[0] *= 0.5
        w[-1] *= 0.5
        return w


# ---------------------------------------------------------------------------
# background, sources, coefficient profiles


def end_profile_scalar(p: ModelGluingProblem, t: np.ndarray, side: str) -> np.ndarray:
    """Scalar amplitude of the prescribed end solution in its own coordinate."""
    b = p.b_plus if side == "plus" else p.b_minus
    return b * np.exp(p.mu * np.asarray(t, dtype=float))


def preglued_scalar(p: ModelGluingProblem, coords: np.ndarray, T: float) -> np.ndarray:
    """Scalar profile of beta_T on the given symmetric coordinate samples."""
    plus = end_profile_scalar(p, coords, "plus")
    minus = end_profile_scalar(p, coords, "minus")
    return preglue(plus, minus, T, coords)


def cap_potential_profile(p: ModelGluingProblem, midpoints: np.ndarray, length: float) -> np.ndarray:
    """Cell index -> which cap potential is active (0 none, 1 plus, 2 minus).

    Potentials are supported on the unit bands adjacent to the caps.
    """
    stype = np.zeros(len(midpoints), dtype=int)
    stype[midpoints < 1.0] = 1
    stype[midpoints > length - 1.0] = 2
    return stype


def neck_source_profile(p: ModelGluingProblem, t: np.ndarray, T: float) -> np.ndarray:
    """Gaussian bump centered mid-neck; multiplies eps0 e^{-delta T}."""
    t = np.asarray(t, dtype=float)
    return np.exp(-4.0 * (t - (T + 0.5)) ** 2)


def neck_source_section(p: ModelGluingProblem, t: np.ndarray, T: float) -> np.ndarray:
    """Neck source on (t, sigma-grid) with fixed cross-section content."""
    n = p.sigma_points
    a = np.arange(n)
    th1 = 2.0 * np.pi * a / n
    y = np.zeros((n, n, 4))
    y[:, :, 0] = 0.6 + 0.8 * np.cos(th1)[:, None]
    y[:, :, 2] = 0.5 * np.sin(th1[:, None] + th1[None, :])
    g = neck_source_profile(p, t, T)
    amp = p.eps0 * math.exp(-p.delta * T)
    return amp * g[:, None, None, None] * y[None, :, :, :]


# ---------------------------------------------------------------------------
# closed-form matrix functions of H = J(P + cI), P Hermitian anticommuting J


def _even_odd_coeffs(x: np.ndarray, h: float) -> tuple[np.ndarray, ...]:
    """(cosh, sinh/sqrt, (cosh-1)/x, (sinh/sqrt - h)/x) of h*sqrt(x), entire in x.

    The (f - const)/x forms cancel catastrophically for small x h^2, so a
    truncated series takes over below a threshold where its own error is
    at machine precision.
    """
    x = np.asarray(x, dtype=float)
    z = np.sqrt(x.astype(complex))
    hz = h * z
    y = x * h * h  # the natural small parameter (h sqrt(x))^2
    small = np.abs(y) < 1e-3
    with np.errstate(invalid="ignore", divide="ignore"):
        fc = np.where(
            small,
            1.0 + y / 2.0 + y * y / 24.0 + y**3 / 720.0,
            np.cosh(hz).real,
        )
        fs = np.where(
            small,
            h * (1.0 + y / 6.0 + y * y / 120.0 + y**3 / 5040.0),
            (np.sinh(hz) / np.where(z == 0, 1.0, z)).real,
        )
        xs = np.where(x == 0, 1.0, x)
        g2 = np.where(
            small,
            h * h * (0.5 + y / 24.0 + y * y / 720.0 + y**3 / 40320.0),
            (fc - 1.0) / xs,
        )
        g3 = np.where(
            small,
            h**3 * (1.0 / 6.0 + y / 120.0 + y * y / 5040.0 + y**3 / 362880.0),
            (fs - h) / xs,
        )
    return fc, fs, g2, g3


@dataclass
class ModeBlocks:
    """Per-cell exact flow data of one Fourier mode."""

    h: float
    H: np.ndarray  # (cells, 4, 4) flow generator J(P + cI)
    Phi: np.ndarray  # exp(h H)
    K: np.ndarray  # int_0^h exp(s H) ds
    K2: np.ndarray  # int_0^h int_0^s exp(r H) dr ds
    G: np.ndarray  # J K^{-1}

    @property
    def n_cells(self) -> int:
        return self.H.shape[0]


def build_mode_blocks(
    J: np.ndarray,
    P_by_type: np.ndarray,
    stype: np.ndarray,
    c: np.ndarray,
    h: float,
) -> ModeBlocks:
    """Assemble Phi, K, K2, G for one mode from cellwise-frozen coefficients.

    ``P_by_type``: (n_types, 4, 4) Hermitian tangential parts; ``stype``
    selects the type per cell; ``c`` is the real scalar shift per cell.
    """
    evals = []
    evecs = []
    for Pt in P_by_type:
        w, v = np.linalg.eigh(Pt)
        evals.append(w)
        evecs.append(v)
    evals = np.asarray(evals)  # (types, 4)
    evecs = np.asarray(evecs)  # (types, 4, 4)

    lam = evals[stype]  # (cells, 4)
    U = evecs[stype]  # (cells, 4, 4)
    x = lam**2 - (c**2)[:, None]  # eigenvalues of H^2
    fc, fs, g2, g3 = _even_odd_coeffs(x, h)

    Jc = J.astype(complex)
    P = P_by_type[stype].astype(complex)
    H = np.einsum("ab,cbd->cad", Jc, P) + c[:, None, None] * Jc

    def func(diag):
        return np.einsum("cab,cb,cdb->cad", U, diag.astype(complex), U.conj())

    Phi = func(fc) + func(fs) @ H
    K = func(fs) + func(g2) @ H
    K2 = func(g2) + func(g3) @ H
    G = np.einsum("ab,cbd->cad", Jc, np.linalg.inv(K))
    return ModeBlocks(h=h, H=H, Phi=Phi, K=K, K2=K2, G=G)


def hermitian_tangential_parts(
    p: ModelGluingProblem, xi: np.ndarray
) -> np.ndarray:
    """(3, 4, 4) array: A(xi), A(xi)+S_plus, A(xi)+S_minus."""
    cl = p.clifford
    a = 1j * (xi[0] * cl.gamma1 + xi[1] * cl.gamma2)
    return np.stack(
        [a, a + p.cap_plus.potential, a + p.cap_minus.potential]
    )


def cap_space(
    p: ModelGluingProblem,
    xi: np.ndarray,
    cap: CapCondition,
    side: str,
    mode_label: str,
) -> np.ndarray:
    """Orthonormal 4x2 basis of the admissible cap boundary space.

    ``side`` = "left" keeps the positive spectral subspace of the cap
    operator J(A(xi) + S), "right" the negative one (outward orientation of
    the reflected end); zero modes contribute the projected Lagrangian.
    """
    cl = p.clifford
    a = 1j * (xi[0] * cl.gamma1 + xi[1] * cl.gamma2) + cap.potential
    hcap = cl.J.astype(complex) @ a
    if np.max(np.abs(hcap - hcap.conj().T)) > 1e-10:
        raise IllPosedBoundaryError(f"cap operator not Hermitian on mode {mode_label}")
    w, v = np.linalg.eigh(hcap)
    keep = w > _KER_TOL if side == "left" else w < -_KER_TOL
    ker = np.abs(w) <= _KER_TOL
    cols = [v[:, keep]]
    n_ker = int(np.sum(ker))
    if n_ker:
        if cap.lagrangian is None:
            raise IllPosedBoundaryError(
                f"cap operator has a {n_ker}-dimensional kernel on mode {mode_label} "
                "and no Lagrangian complement was supplied"
            )
        vk = v[:, ker]
        proj = vk @ (vk.conj().T @ cap.lagrangian.astype(complex))
        q, r = np.linalg.qr(proj)
        rank = int(np.sum(np.abs(np.diag(r)) > 1e-10))
        if rank != n_ker // 2:
            raise IllPosedBoundaryError(
                f"cap Lagrangian spans {rank} of the required {n_ker // 2} "
                f"zero-mode directions on mode {mode_label}"
            )
        lag = q[:, :rank]
        omega = lag.conj().T @ cl.J.astype(complex) @ lag
        if np.max(np.abs(omega)) > 1e-9:
            raise IllPosedBoundaryError(
                f"cap Lagrangian is not isotropic on mode {mode_label}"
            )
        cols.append(lag)
    basis = np.hstack(cols)
    if basis.shape[1] != 2:
        raise IllPosedBoundaryError(
            f"cap space on mode {mode_label} has dimension {basis.shape[1]}, expected 2"
        )
    q, _ = np.linalg.qr(basis)
    return q[:, :2]


# ---------------------------------------------------------------------------
# the per-mode discrete operator


class ModeOperator:
    """One Fourier block of the glued linearization.

    Domain: node values with the two cap conditions; range: cell values.
    ``apply`` evaluates the unique cell-constant source reproducing the
    node values under the exact flow; ``solve`` inverts it.
    """

    def __init__(
        self,
        blocks: ModeBlocks,
        W0: np.ndarray,
        WL: np.ndarray,
        node_weights: np.ndarray,
        J: np.ndarray,
        label: str = "",
    ):
        self.blocks = blocks
        self.W0 = W0
        self.WL = WL
        self.node_weights = node_weights
        self.J = J.astype(complex)
        self.label = label
        self._lu = None
        self._matrix = None

    @property
    def n_cells(self) -> int:
        return self.blocks.n_cells

    def apply(self, u_nodes: np.ndarray) -> np.ndarray:
        """f_j = J K_j^{-1} (u_{j+1} - Phi_j u_j), shape (cells, 4)."""
        diff = u_nodes[1:] - np.einsum("cab,cb->ca", self.blocks.Phi, u_nodes[:-1])
        return np.einsum("cab,cb->ca", self.blocks.G, diff)

    def matrix(self) -> np.ndarray:
        """Dense map from boundary-parametrized node values to cell values."""
        if self._matrix is not None:
            return self._matrix
        n = self.n_cells
        G, Phi = self.blocks.G, self.blocks.Phi
        A = np.zeros((4 * n, 4 * n), dtype=complex)
        left = -np.einsum("cab,cbd->cad", G, Phi)  # block on node j
        right = G  # block on node j+1

        def col_slice(node: int) -> slice:
            # node 0 -> params [0:2]; interior j -> [2+4(j-1) : 2+4j]; node n -> last 2
            if node == 0:
                return slice(0, 2)
            if node == n:
                return slice(4 * n - 2, 4 * n)
            return slice(2 + 4 * (node - 1), 2 + 4 * node)

        for j in range(n):
            rows = slice(4 * j, 4 * j + 4)
            lblock = left[j] @ self.W0 if j == 0 else left[j]
            rblock = right[j] @ self.WL if j == n - 1 else right[j]
            A[rows, col_slice(j)] = lblock
            A[rows, col_slice(j + 1)] = rblock
        self._matrix = A
        return A

    def params_to_nodes(self, params: np.ndarray) -> np.ndarray:
        n = self.n_cells
        u = np.empty((n + 1, 4), dtype=complex)
        u[0] = self.W0 @ params[0:2]
        if n > 1:
            u[1:n] = params[2 : 2 + 4 * (n - 1)].reshape(n - 1, 4)
        u[n] = self.WL @ params[-2:]
        return u

    def nodes_to_params(self, u_nodes: np.ndarray) -> np.ndarray:
        """Least-squares coordinates; exact when the BCs hold."""
        n = self.n_cells
        params = np.empty(4 * n, dtype=complex)
        params[0:2] = self.W0.conj().T @ u_nodes[0]
        if n > 1:
            params[2 : 2 + 4 * (n - 1)] = u_nodes[1:n].reshape(-1)
        params[-2:] = self.WL.conj().T @ u_nodes[n]
        return params

    def solve(self, f_cells: np.ndarray) -> np.ndarray:
        """Node values of the exact solution with homogeneous cap conditions."""
        from scipy.linalg import lu_factor, lu_solve

        if self._lu is None:
            self._lu = lu_factor(self.matrix())
        params = lu_solve(self._lu, np.asarray(f_cells, dtype=complex).reshape(-1))
        return self.params_to_nodes(params)

    def _column_weights(self) -> np.ndarray:
        n = self.n_cells
        w = self.node_weights
        cw = np.empty(4 * n)
        cw[0:2] = w[0]
        if n > 1:
            cw[2 : 2 + 4 * (n - 1)] = np.repeat(w[1:n], 4)
        cw[-2:] = w[n]
        return cw

    def weighted_matrix(self) -> np.ndarray:
        """Matrix between unit-norm coordinates of the weighted L^2 norms."""
        A = self.matrix()
        return math.sqrt(self.blocks.h) * A / np.sqrt(self._column_weights())[None, :]

    def constraint_rows(self, constraints: list[tuple[np.ndarray, np.ndarray]]) -> np.ndarray:
        """Rows <xi, u>_w over masked nodes, in unit-norm coordinates.

        Each constraint is (mask over nodes, xi node values); the row acts
        on the same coordinates as ``weighted_matrix`` columns.
        """
        rows = []
        w = self.node_weights
        sq = np.sqrt(self._column_weights())
        n = self.n_cells
        for mask, xi in constraints:
            coef = (w * mask)[:, None] * xi.conj()
            row = np.empty(4 * n, dtype=complex)
            row[0:2] = coef[0] @ self.W0
            if n > 1:
                row[2 : 2 + 4 * (n - 1)] = coef[1:n].reshape(-1)
            row[-2:] = coef[n] @ self.WL
            rows.append(row / sq)
        return np.asarray(rows)

    def sigma_min(self, constraints: list[tuple[np.ndarray, np.ndarray]] | None = None) -> float:
        """Smallest singular value, optionally on the joint null space of
        the constraint functionals."""
        Aw = self.weighted_matrix()
        if constraints:
            C = self.constraint_rows(constraints)
            u, s, vh = np.linalg.svd(C)
            rank = int(np.sum(s > 1e-12 * max(1.0, s[0] if len(s) else 0.0)))
            Z = vh[rank:].conj().T
            Aw = Aw @ Z
        sv = np.linalg.svd(Aw, compute_uv=False)
        return float(sv[-1])

    def cell_averages(self, u_nodes: np.ndarray) -> np.ndarray:
        """Exact cell averages of the reconstructed flow solution:
        (1/h)(K u_j + K2 J^{-1} f_j) with f = apply(u)."""
        b = self.blocks
        f = self.apply(u_nodes)
        Ku = np.einsum("cab,cb->ca", b.K, u_nodes[:-1])
        K2f = np.einsum("cab,cb->ca", b.K2, -(self.J @ f.T).T)
        return (Ku + K2f) / b.h

    def pairing(self, u_nodes: np.ndarray, v_nodes: np.ndarray) -> complex:
        """Exact L^2 pairing <L u, v> of reconstructed solutions."""
        fu = self.apply(u_nodes)
        return complex(np.sum(np.conj(fu) * self.cell_averages(v_nodes)) * self.blocks.h)


def selfadjointness_defect(op: ModeOperator, u: np.ndarray, v: np.ndarray) -> float:
    """|<L u, v> - <u, L v>| via the exact reconstruction pairing."""
    return abs(op.pairing(u, v) - np.conj(op.pairing(v, u)))


# ---------------------------------------------------------------------------
# per-mode boundary-value spectrum


def _cap_complement(w: np.ndarray) -> np.ndarray:
    u, _, _ = np.linalg.svd(np.hstack([w, np.zeros((4, 2))]))
    return u[:, 2:]


def mode_bvp_eigenvalues(
    p: ModelGluingProblem,
    mn: tuple[int, int],
    lam_range: tuple[float, float],
    T: float | None = None,
    samples: int = 400,
    tol: float = 1e-6,
) -> list[float]:
    """Eigenvalues of one mode's cap boundary-value problem in a window.

    An eigenvalue is a lambda for which the cell-exponential transfer of
    the lambda-shifted generator J(P + (c - lambda)I) maps the left cap
    space into the right one; located as zeros of the smallest singular
    value of the compatibility matrix.
    """
    from scipy.optimize import minimize_scalar

    prob = p if T is None else p.with_T(T)
    lin = GluedLinearization(prob)
    xi = prob.mode_vector(mn)
    parts = hermitian_tangential_parts(prob, xi)
    label = f"{mn}"
    W0 = cap_space(prob, xi, prob.cap_plus, "left", label)
    WLperp = _cap_complement(cap_space(prob, xi, prob.cap_minus, "right", label))

    def compat(lam: float) -> float:
        blocks = build_mode_blocks(
            prob.clifford.J, parts, lin.stype, lin.c - lam, lin.grid.h
        )
        psi = np.eye(4, dtype=complex)
        for j in range(blocks.n_cells):
            psi = blocks.Phi[j] @ psi
        m = WLperp.conj().T @ psi @ W0
        return float(np.linalg.svd(m, compute_uv=False)[-1])

    lams = np.linspace(lam_range[0], lam_range[1], samples)
    vals = np.array([compat(lam) for lam in lams])
    roots: list[float] = []
    for i in range(1, len(lams) - 1):
        if vals[i] <= vals[i - 1] and vals[i] <= vals[i + 1] and vals[i] < 2.0:
            res = minimize_scalar(
                compat, bounds=(lams[i - 1], lams[i + 1]), method="bounded",
                options={"xatol": 1e-12},
            )
            if res.fun < tol and not any(abs(res.x - r) < 1e-9 for r in roots):
                roots.append(float(res.x))
    return sorted(roots)


# ---------------------------------------------------------------------------
# the assembled glued linearization over all modes


class GluedLinearization:
    """Operator handle for the glued, mode-diagonal linearization at beta_T.

    Assembled lazily per mode; conjugate modes share data through complex
    conjugation (all t-dependent coefficients are real).
    """

    def __init__(self, p: ModelGluingProblem, T: float | None = None, dressed: bool = True):
        self.p = p if T is None else p.with_T(T)
        self.grid = self.p.grid()
        self.dressed = dressed
        g = self.grid
        self.stype = cap_potential_profile(self.p, g.midpoints, g.length)
        if dressed:
            beta_nodes = preglued_scalar(self.p, g.nodes, self.p.T)
            self.c = self.p.kappa * (beta_nodes[:-1] + beta_nodes[1:])  # 2 kappa * midpoint avg
        else:
            self.c = np.zeros(g.n_cells)
        self._ops: dict[tuple[int, int], ModeOperator] = {}

    def canonical_modes(self) -> list[tuple[int, int]]:
        """One representative of each conjugate pair {xi, -xi}."""
        out = []
        for mn in self.p.mode_indices():
            if mn > (0, 0) or mn == (0, 0):
                out.append(mn)
        return out

    def mode_operator(self, mn: tuple[int, int]) -> ModeOperator:
        if mn in self._ops:
            return self._ops[mn]
        p = self.p
        xi = p.mode_vector(mn)
        parts = hermitian_tangential_parts(p, xi)
        blocks = build_mode_blocks(p.clifford.J, parts, self.stype, self.c, self.grid.h)
        label = f"{mn}"
        W0 = cap_space(p, xi, p.cap_plus, "left", label)
        WL = cap_space(p, xi, p.cap_minus, "right", label)
        op = ModeOperator(
            blocks, W0, WL, self.grid.node_weights, p.clifford.J, label=label
        )
        self._ops[mn] = op
        return op

    def apply_state(self, u: np.ndarray) -> np.ndarray:
        """Apply the operator to a real (nodes, n, n, 4) state; cells out.

        Conjugate modes reuse the representative: all t-coefficients are
        real, so the -xi block is the complex conjugate of the xi block.
        """
        uhat = to_modes(u)
        fhat = np.zeros((self.grid.n_cells,) + uhat.shape[1:], dtype=complex)
        n = self.p.sigma_points
        for mn in self.canonical_modes():
            op = self.mode_operator(mn)
            im, jn = mn[0] % n, mn[1] % n
            fhat[:, im, jn, :] = op.apply(uhat[:, im, jn, :])
            neg = (-mn[0], -mn[1])
            if neg != mn:
                om, on = neg[0] % n, neg[1] % n
                fhat[:, om, on, :] = np.conj(op.apply(np.conj(uhat[:, om, on, :])))
        return from_modes(fhat)

    def solve_state(self, f: np.ndarray) -> np.ndarray:
        """Solve L u = f for a real cell-state (homogeneous cap conditions)."""
        fhat = to_modes(f)
        uhat = np.zeros((self.grid.n_cells + 1,) + fhat.shape[1:], dtype=complex)
        n = self.p.sigma_points
        for mn in self.canonical_modes():
            op = self.mode_operator(mn)
            im, jn = mn[0] % n, mn[1] % n
            uhat[:, im, jn, :] = op.solve(fhat[:, im, jn, :])
            neg = (-mn[0], -mn[1])
            if neg != mn:
                om, on = neg[0] % n, neg[1] % n
                uhat[:, om, on, :] = np.conj(op.solve(np.conj(fhat[:, om, on, :])))
        return from_modes(uhat)

    def sigma_min(
        self,
        zero_mode_constraints: list[tuple[np.ndarray, np.ndarray]] | None = None,
    ) -> float:
        """Minimum over modes of the per-mode sigma_min (conjugates share)."""
        best = math.inf
        for mn in self.canonical_modes():
            op = self.mode_operator(mn)
            cons = zero_mode_constraints if mn == (0, 0) else None
            best = min(best, op.sigma_min(cons))
        return best

    def mode_sigma_min(self, mn: tuple[int, int]) -> float:
        return self.mode_operator(mn).sigma_min()


def assemble_linearization(
    p: ModelGluingProblem, T: float | None = None, dressed: bool = True
) -> GluedLinearization:
    """Operator handle for the glued linearization at beta_T.

    Per-mode blocks are built lazily on first use; ``dressed=False`` drops
    the background term (the bare operator J d/dt + D_Sigma + S)."""
    return GluedLinearization(p, T=T, dressed=dressed)


# ---------------------------------------------------------------------------
# sigma-grid transforms and norms


def to_modes(u: np.ndarray) -> np.ndarray:
    """Real (t, n, n, 4) samples -> complex mode coefficients, same layout."""
    u = np.asarray(u)
    n = u.shape[1]
    return np.fft.fft2(u, axes=(1, 2)) / (n * n)


def from_modes(uhat: np.ndarray) -> np.ndarray:
    n = uhat.shape[1]
    u = np.fft.ifft2(uhat * (n * n), axes=(1, 2))
    return np.ascontiguousarray(u.real)


def sup_norm(u: np.ndarray) -> float:
    """Sup over grid points of the Euclidean fiber norm."""
    u = np.asarray(u)
    return float(np.sqrt(np.max(np.sum(u * u, axis=-1))))


def l2_norm(u: np.ndarray, weights: np.ndarray) -> float:
    """Weighted-in-t, averaged-in-sigma L^2 norm of a (t, n, n, 4) state."""
    u = np.asarray(u)
    dens = np.sum(u * u, axis=(1, 2, 3)) / (u.shape[1] * u.shape[2])
    return float(np.sqrt(np.sum(weights * dens)))


def c1_norm(u: np.ndarray, h: float) -> float:
    """Discrete C^1-type norm: sup |u| plus sup of forward t-differences."""
    du = np.diff(np.asarray(u), axis=0) / h
    return sup_norm(u) + sup_norm(du)


# ---------------------------------------------------------------------------
# end kernels, matching kernel, approximate kernel


def _end_flow_blocks(p: ModelGluingProblem, side: str, length: float) -> ModeBlocks:
    """Mode-0 flow blocks of one end problem on [0, length] in its own
    coordinate (kappa tail included)."""
    grid = NeckGrid(T=(length - 1.0) / 2.0, points_per_unit=p.points_per_unit)
    mids = grid.midpoints
    stype = np.zeros(len(mids), dtype=int)
    stype[mids < 1.0] = 1
    cap = p.cap_plus if side == "plus" else p.cap_minus
    parts = np.stack([np.zeros((4, 4)), cap.potential.astype(float)]).astype(complex)
    nodes_amp = end_profile_scalar(p, grid.nodes, side)
    c = p.kappa * (nodes_amp[:-1] + nodes_amp[1:])
    return build_mode_blocks(p.clifford.J, parts, stype, c, grid.h)


def end_kernel_sections(
    p: ModelGluingProblem, side: str, length: float | None = None
) -> tuple[np.ndarray, np.ndarray, NeckGrid]:
    """Bounded mode-0 kernel of one end problem, in its own coordinate.

    Returns (sections (nodes, 4, 2), limits (4, 2), grid).  The plus end
    flows forward (u' = H u), the reflected minus end backward
    (u' = -H u); both start from the cap space at the finite end.
    """
    if length is None:
        length = max(45.0 / -p.mu, 2.0 * p.T + 1.0)
    length = _round_length(length, p.points_per_unit)
    grid = NeckGrid(T=(length - 1.0) / 2.0, points_per_unit=p.points_per_unit)
    blocks = _end_flow_blocks(p, side, length)
    xi0 = np.zeros(2)
    cap = p.cap_plus if side == "plus" else p.cap_minus
    W = cap_space(p, xi0, cap, "left" if side == "plus" else "right", f"end-{side}")
    u = np.empty((blocks.n_cells + 1, 4, 2), dtype=complex)
    u[0] = W
    for j in range(blocks.n_cells):
        step = blocks.Phi[j] if side == "plus" else np.linalg.inv(blocks.Phi[j])
        u[j + 1] = step @ u[j]
    if np.max(np.abs(u.imag)) > 1e-10:
        raise InvalidInputError("mode-0 end kernel should be real")
    ureal = u.real.copy()
    return ureal, ureal[-1].copy(), grid


def _round_length(length: float, points_per_unit: int) -> float:
    cells = math.ceil(length * points_per_unit)
    return cells / points_per_unit


def matching_kernel(
    kernel_plus: list[np.ndarray],
    kernel_minus: list[np.ndarray],
    f_star: np.ndarray,
) -> list[tuple[np.ndarray, np.ndarray]]:
    """Basis of the fiber product of the asymptotic-limit spaces.

    Arguments are lists of limit vectors in the shared rate-0 space; the
    result pairs vectors (u_plus, u_minus) with f_star u_plus = u_minus,
    one per null-space direction of the concatenated system.
    """
    f_star = np.asarray(f_star, dtype=float)
    if f_star.ndim != 2 or f_star.shape[0] != f_star.shape[1]:
        raise InvalidInputError("f_star must be square")
    if abs(np.linalg.det(f_star)) < 1e-12:
        raise InvalidInputError("f_star must be invertible")
    d0 = f_star.shape[0]
    kp = np.asarray(kernel_plus, dtype=float).reshape(len(kernel_plus), d0).T
    km = np.asarray(kernel_minus, dtype=float).reshape(len(kernel_minus), d0).T
    if kp.shape[1] == 0 or km.shape[1] == 0:
        return []
    system = np.hstack([f_star @ kp, -km])
    u, s, vh = np.linalg.svd(system)
    tol = max(system.shape) * 1e-12 * (s[0] if len(s) else 1.0)
    null = vh[np.sum(s > tol) :].conj().T  # (p+q, k)
    out = []
    for k in range(null.shape[1]):
        cp = null[: kp.shape[1], k].real
        cm = null[kp.shape[1] :, k].real
        out.append((kp @ cp, km @ cm))
    return out


def model_matching_kernel(p: ModelGluingProblem) -> list[tuple[np.ndarray, np.ndarray]]:
    """Matching kernel of the problem's two ends under f_star."""
    _, lim_p, _ = end_kernel_sections(p, "plus")
    _, lim_m, _ = end_kernel_sections(p, "minus")
    return matching_kernel(list(lim_p.T), list(lim_m.T), p.f_star)


def glued_kernel_sections(p: ModelGluingProblem, T: float | None = None) -> list[np.ndarray]:
    """Approximate kernel elements u+ #_T u- on the glued grid (mode 0).

    Each matched pair of end kernel elements is continued across the glued
    interval with its own end coefficients and interpolated by the cutoff.
    """
    prob = p if T is None else p.with_T(T)
    grid = prob.grid()
    pairs = model_matching_kernel(prob)
    if not pairs:
        return []
    length = grid.length
    sec_p, lim_p, egrid_p = end_kernel_sections(prob, "plus", length=length)
    sec_m, lim_m, _ = end_kernel_sections(prob, "minus", length=length)
    out = []
    for vp, vm in pairs:
        cp = np.linalg.lstsq(lim_p, vp, rcond=None)[0]
        cm = np.linalg.lstsq(lim_m, vm, rcond=None)[0]
        up = sec_p @ cp  # (nodes, 4) in t
        um = sec_m @ cm  # (nodes, 4) in s
        glued = preglue(up, um, prob.T, grid.nodes)
        out.append(glued)
    return out


def approximate_kernel_elements(
    p: ModelGluingProblem, T: float | None = None
) -> list[tuple[np.ndarray, float]]:
    """Glued kernel elements together with their measured residual norms."""
    prob = p if T is None else p.with_T(T)
    lin = GluedLinearization(prob)
    op0 = lin.mode_operator((0, 0))
    out = []
    for glued in glued_kernel_sections(prob):
        f = op0.apply(glued.astype(complex))
        res = float(np.max(np.sqrt(np.sum(np.abs(f) ** 2, axis=-1))))
        scale = float(np.max(np.sqrt(np.sum(glued**2, axis=-1))))
        out.append((glued, res / max(scale, 1e-300)))
    return out


def kernel_constraints(
    p: ModelGluingProblem, T: float | None = None, band_width: float = 1.0
) -> list[tuple[np.ndarray, np.ndarray]]:
    """Mode-0 orthogonality constraints defining the complement X_T.

    For each glued approximate kernel element: orthogonality against it in
    the full weighted product and in the product restricted to the
    cap-adjacent compact bands.
    """
    prob = p if T is None else p.with_T(T)
    grid = prob.grid()
    elements = glued_kernel_sections(prob)
    cons: list[tuple[np.ndarray, np.ndarray]] = []
    nodes = grid.nodes
    band = (nodes <= band_width) | (nodes >= grid.length - band_width)
    full = np.ones_like(nodes, dtype=bool)
    for el in elements:
        cel = el.astype(complex)
        cons.append((full.astype(float), cel))
        cons.append((band.astype(float), cel))
    return cons
