"""Neck-stretching experiments: error decay, linear estimate, nonlinear glue.

The manufactured nonlinear problem on the glued interval is

    F_T(u) = L_T (u - beta_T) + kappa B(M(u - beta_T), M(u - beta_T)) + e_T

where L_T is the dressed linearization (exact per-mode flows), B the
pointwise quaternion product of cell-midpoint averages M, and e_T the error
term assembled from the cutoff mismatch of the two prescribed end solutions
plus the neck structure source.  By construction F_T(beta_T) = e_T and
dF_T at beta_T is exactly L_T, so the contraction lemma applies verbatim
with measured constants.
"""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import HypothesisViolatedError, InvalidInputError, NoContractionStartError
from ..quaternions import quat_mult, symmetric_anti_j
from ..spectral import lattice_preset
from .contraction import ContractionResult, ContractionSpec, LinearOperatorHandle, contract_solve
from .cutoff import preglue
from .fitting import FitResult, fit_log_linear
from .model import (
    CapCondition,
    GluedLinearization,
    ModelGluingProblem,
    build_mode_blocks,
    cap_potential_profile,
    end_profile_scalar,
    kernel_constraints,
    model_matching_kernel,
    neck_source_section,
    preglued_scalar,
    sup_norm,
)

E0 = np.array([1.0, 0.0, 0.0, 0.0])


# ---------------------------------------------------------------------------
# error term assembly


def _bare_mode0_blocks(p: ModelGluingProblem, grid):
    stype = cap_potential_profile(p, grid.midpoints, grid.length)
    parts = np.stack(
        [
            np.zeros((4, 4)),
            p.cap_plus.potential.astype(float),
            p.cap_minus.potential.astype(float),
        ]
    ).astype(complex)
    return build_mode_blocks(p.clifford.J, parts, stype, np.zeros(grid.n_cells), grid.h)


def _mode0_apply(blocks, u_nodes: np.ndarray) -> np.ndarray:
    diff = u_nodes[1:] - np.einsum("cab,cb->ca", blocks.Phi, u_nodes[:-1])
    return np.einsum("cab,cb->ca", blocks.G, diff)


def error_term(p: ModelGluingProblem, T: float | None = None) -> np.ndarray:
    """e_T on cells, shape (cells, n, n, 4): cutoff mismatch + neck source.

    The mismatch part is the bare operator applied to the preglued scalar
    background minus the preglued manufactured sources of the two ends;
    it cancels identically outside the transition band.
    """
    prob = p if T is None else p.with_T(T)
    grid = prob.grid()
    blocks = _bare_mode0_blocks(prob, grid)

    def scalar_state(amp_nodes: np.ndarray) -> np.ndarray:
        return amp_nodes[:, None] * E0[None, :]

    def manufactured_source(side: str) -> np.ndarray:
        # rho = D0(beta) + kappa B(M beta, M beta) on the glued grid, with the
        # end profile continued across the whole interval in t-coordinates
        t = grid.nodes if side == "plus" else grid.length - grid.nodes
        amp = end_profile_scalar(prob, t, side)
        lin = _mode0_apply(blocks, scalar_state(amp).astype(complex)).real
        mid = 0.5 * (amp[:-1] + amp[1:])
        return lin + prob.kappa * (mid**2)[:, None] * E0[None, :]

    rho_plus = manufactured_source("plus")
    rho_minus_own = reflect_cells(manufactured_source("minus"))
    rho_T = preglue(rho_plus, rho_minus_own, prob.T, grid.midpoints)

    beta_nodes = preglued_scalar(prob, grid.nodes, prob.T)
    lin_beta = _mode0_apply(blocks, scalar_state(beta_nodes).astype(complex)).real
    beta_mid = 0.5 * (beta_nodes[:-1] + beta_nodes[1:])
    quad_beta = prob.kappa * (beta_mid**2)[:, None] * E0[None, :]
    mode0 = lin_beta + quad_beta - rho_T

    n = prob.sigma_points
    e = np.zeros((grid.n_cells, n, n, 4))
    e += mode0[:, None, None, :]
    e += neck_source_section(prob, grid.midpoints, prob.T)
    return e


def reflect_cells(u: np.ndarray) -> np.ndarray:
    """Cell samples of the reflected profile (cells reverse exactly)."""
    return np.asarray(u)[::-1].copy()


# ---------------------------------------------------------------------------
# experiments over a T grid


@dataclass
class GluingReport:
    """Per-T measurements of one experiment run plus fitted decay rates."""

    t_grid: list[float]
    error_norms: list[float] = field(default_factory=list)
    sigma_min: list[float] = field(default_factory=list)
    solution_distances: list[float] = field(default_factory=list)
    converged: list[bool] = field(default_factory=list)
    fits: dict[str, FitResult] = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        return {
            "t_grid": self.t_grid,
            "error_norms": self.error_norms,
            "sigma_min": self.sigma_min,
            "solution_distances": self.solution_distances,
            "converged": self.converged,
            "fits": {k: f.to_json_dict() for k, f in self.fits.items()},
            "meta": self.meta,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("T,error_norm,sigma_min,solution_distance,converged\n")
        for i, t in enumerate(self.t_grid):

            def cell(values, fmt=repr):
                return fmt(values[i]) if i < len(values) else ""

            buf.write(
                f"{t!r},{cell(self.error_norms)},{cell(self.sigma_min)},"
                f"{cell(self.solution_distances)},"
                f"{str(self.converged[i]).lower() if i < len(self.converged) else ''}\n"
            )
        return buf.getvalue()


def _check_grid(t_grid) -> list[float]:
    t = [float(x) for x in t_grid]
    if len(t) < 4:
        raise InvalidInputError("need at least 4 grid points for a decay regression")
    if any(b <= a for a, b in zip(t, t[1:])):
        raise InvalidInputError("T grid must be strictly increasing")
    return t


def error_norm_experiment(p: ModelGluingProblem, t_grid) -> GluingReport:
    """Sup norm of e_T over the grid and its fitted decay exponent."""
    t = _check_grid(t_grid)
    norms = [sup_norm(error_term(p, T)) for T in t]
    report = GluingReport(t_grid=t, error_norms=norms)
    report.fits["error_decay"] = fit_log_linear(np.asarray(t), np.asarray(norms))
    report.meta = {"preset": p.name, "delta_e": p.delta_e, "expected_slope": -p.delta_e}
    return report


def linear_estimate_experiment(
    p: ModelGluingProblem,
    t_grid,
    lam: float | None = None,
    restricted: bool = True,
) -> GluingReport:
    """sigma_min of the dressed linearization over the T grid.

    With ``restricted`` (the complement X_T of the approximate kernel plus
    the compact-band orthogonality) the fitted decay exponent is compared
    against -lam, default lam = delta_e / 8; unrestricted scans expose the
    approximate-kernel decay instead.
    """
    t = _check_grid(t_grid)
    if lam is None:
        lam = p.delta_e / 8.0
    sigmas = []
    for T in t:
        lin = GluedLinearization(p, T=T)
        cons = kernel_constraints(p, T) if restricted else None
        sigmas.append(lin.sigma_min(zero_mode_constraints=cons))
    report = GluingReport(t_grid=t, sigma_min=sigmas)
    fit = fit_log_linear(np.asarray(t), np.asarray(sigmas))
    report.fits["sigma_decay"] = fit
    floor = min(s * math.exp(lam * T) for s, T in zip(sigmas, t))
    report.meta = {
        "preset": p.name,
        "lambda": lam,
        "restricted": restricted,
        "matching_kernel_dim": len(model_matching_kernel(p)),
        "estimate_floor_c": floor,
        "estimate_holds": fit.slope >= -lam,
    }
    return report


def quadratic_probe(
    p: ModelGluingProblem,
    samples: int,
    T: float | None = None,
    seed: int = 0,
    scale: float = 0.3,
) -> float:
    """Empirical quadratic constant of Q(u) = kappa B(M(u - beta_T), ...).

    Maximum over sampled pairs of |Q(u)-Q(v)| / (|u-v| (|u-beta|+|v-beta|))
    in the sup norm; bounded by |kappa| since the quaternion norm is
    multiplicative.
    """
    if samples < 1:
        raise InvalidInputError("need at least one sample pair")
    prob = p if T is None else p.with_T(T)
    grid = prob.grid()
    n = prob.sigma_points
    rng = np.random.default_rng(seed)
    q = _quadratic_map(prob, grid)
    worst = 0.0
    shape = (grid.n_cells + 1, n, n, 4)
    for k in range(samples):
        if k % 2 == 0:
            y1 = rng.standard_normal(shape) * scale
            y2 = rng.standard_normal(shape) * scale
        else:
            # t-constant parallel pairs attain the worst pointwise ratio
            # (midpoint averaging is exact on them)
            v = rng.standard_normal((1, n, n, 4)) * scale
            y1 = np.broadcast_to(v, shape).copy()
            y2 = rng.uniform(-1.0, 1.0) * y1
        num = sup_norm(q(y1) - q(y2))
        den = sup_norm(y1 - y2) * (sup_norm(y1) + sup_norm(y2))
        if den > 0:
            worst = max(worst, num / den)
    return worst


def _quadratic_map(p: ModelGluingProblem, grid):
    """y (node deviation) -> kappa B(M y, M y) on cells."""

    def q(y: np.ndarray) -> np.ndarray:
        mid = 0.5 * (y[:-1] + y[1:])
        return p.kappa * quat_mult(mid, mid)

    return q


@dataclass
class GlueStep:
    """Result of one nonlinear solve at fixed T."""

    T: float
    converged: bool
    error_norm: float
    sigma_min: float
    c_L: float
    c_Q: float
    solution_distance: float
    residual_norm: float
    iterations: int
    max_contraction_factor: float
    relinearized_sigma_lower: float
    deviation: np.ndarray | None = None


def glue_model(
    p: ModelGluingProblem,
    T: float | None = None,
    sigma_min: float | None = None,
    c_q: float | None = None,
    seed: int = 0,
    require_precondition: bool = True,
) -> GlueStep:
    """Assemble the contraction data at one T and solve F_T = 0.

    Requires a trivial matching kernel (the gluing hypothesis); c_L is
    measured from sigma_min with a safety factor 2 (augmented by sup-norm
    solve probes), c_Q from the quadratic probe.  Reports the distance
    |beta~_T - beta_T|, the final residual, and a lower bound on the
    relinearized sigma_min at the solution.
    """
    prob = p if T is None else p.with_T(T)
    Tval = prob.T
    km = model_matching_kernel(prob)
    if km:
        raise HypothesisViolatedError(
            f"matching kernel has dimension {len(km)}; the gluing hypothesis fails"
        )
    lin = GluedLinearization(prob)
    if sigma_min is None:
        sigma_min = lin.sigma_min()
    grid = prob.grid()
    n = prob.sigma_points
    e_cells = error_term(prob)
    err_norm = sup_norm(e_cells)

    # c_L: 2 x max of the weighted-L2 bound and sampled sup-norm solve growth
    rng = np.random.default_rng(seed)
    inf_growth = 0.0
    shape_cells = (grid.n_cells, n, n, 4)
    for _ in range(4):
        f = rng.standard_normal(shape_cells)
        f /= max(sup_norm(f), 1e-300)
        inf_growth = max(inf_growth, sup_norm(lin.solve_state(f)))
    c_L = 2.0 * max(1.0 / sigma_min, inf_growth)
    if c_q is None:
        c_q = quadratic_probe(prob, samples=24, seed=seed + 1)
    c_Q = max(c_q, 0.0)

    q = _quadratic_map(prob, grid)
    shape_nodes = (grid.n_cells + 1, n, n, 4)
    spec = ContractionSpec(
        L=LinearOperatorHandle(apply=lin.apply_state, solve=lin.solve_state),
        Q=q,
        f_x0=e_cells,
        c_L=c_L,
        c_Q=c_Q,
        x0=np.zeros(shape_nodes),
        norm_x=sup_norm,
        norm_y=sup_norm,
    )
    bound = spec.smallness_bound
    if err_norm > bound:
        if require_precondition:
            from ..errors import ContractionPreconditionError

            raise ContractionPreconditionError(err_norm, bound)
        return GlueStep(
            T=Tval, converged=False, error_norm=err_norm, sigma_min=sigma_min,
            c_L=c_L, c_Q=c_Q, solution_distance=math.nan, residual_norm=math.nan,
            iterations=0, max_contraction_factor=math.nan,
            relinearized_sigma_lower=math.nan,
        )
    result: ContractionResult = contract_solve(spec, tol=1e-13)
    dev = result.x  # x0 = 0, so x is the deviation from beta_T
    mid = 0.5 * (dev[:-1] + dev[1:])
    relin_lower = sigma_min - 2.0 * abs(prob.kappa) * sup_norm(mid)
    return GlueStep(
        T=Tval,
        converged=True,
        error_norm=err_norm,
        sigma_min=sigma_min,
        c_L=c_L,
        c_Q=c_Q,
        solution_distance=result.distance_from_x0,
        residual_norm=result.residual_norm,
        iterations=result.iterations,
        max_contraction_factor=result.max_contraction_factor,
        relinearized_sigma_lower=relin_lower,
        deviation=dev,
    )


def run_glue_experiment(
    p: ModelGluingProblem,
    t_grid,
    seed: int = 0,
    keep_deviations: bool = False,
) -> GluingReport:
    """Full neck experiment: error norms, sigma_min scan, nonlinear solves.

    T_1 is detected as the first grid value whose contraction preconditions
    hold; every later grid value must then converge.  Raises
    NoContractionStartError when no grid value qualifies.
    """
    t = _check_grid(t_grid)
    report = GluingReport(t_grid=t)
    steps: list[GlueStep] = []
    t1 = None
    for T in t:
        step = glue_model(p, T=T, seed=seed, require_precondition=False)
        steps.append(step)
        if step.converged and t1 is None:
            t1 = T
        if not keep_deviations:
            step.deviation = None
    if t1 is None:
        raise NoContractionStartError(
            "contraction preconditions hold at no grid value of T"
        )
    report.error_norms = [s.error_norm for s in steps]
    report.sigma_min = [s.sigma_min for s in steps]
    report.solution_distances = [
        s.solution_distance if s.converged else math.nan for s in steps
    ]
    report.converged = [s.converged for s in steps]
    report.fits["error_decay"] = fit_log_linear(np.asarray(t), np.asarray(report.error_norms))
    report.fits["sigma_decay"] = fit_log_linear(np.asarray(t), np.asarray(report.sigma_min))
    solved = [(T, s.solution_distance) for T, s in zip(t, steps) if s.converged]
    if len(solved) >= 4:
        ts, ds = zip(*solved)
        report.fits["solution_decay"] = fit_log_linear(np.asarray(ts), np.asarray(ds))
    report.meta = {
        "preset": p.name,
        "delta_e": p.delta_e,
        "T1": t1,
        "residual_norms": [s.residual_norm for s in steps],
        "relinearized_sigma_lower": [s.relinearized_sigma_lower for s in steps],
        "max_contraction_factors": [s.max_contraction_factor for s in steps],
        "c_L": [s.c_L for s in steps],
        "c_Q": [s.c_Q for s in steps],
    }
    return report


# ---------------------------------------------------------------------------
# shipped problem presets


def _lagrangian(*quat_indices: int) -> np.ndarray:
    lag = np.zeros((4, 2))
    for col, idx in enumerate(quat_indices):
        lag[idx, col] = 1.0
    return lag


def problem_preset(name: str, points_per_unit: int = 2, mode_cutoff: int = 8) -> ModelGluingProblem:
    """Named model problems.

    matched-exact      zero end data and source: e_T vanishes identically.
    generic-d2m1       delta = 2,   mu = -1   (mismatch-dominated error)
    generic-d05m1      delta = 0.5, mu = -1   (source-dominated error)
    generic-d1m05      delta = 1,   mu = -0.5 (mismatch-dominated error)
    kernel-obstructed  cap Lagrangians sharing one direction: dim K^m = 1.
    """
    common = dict(
        T=6.0,
        points_per_unit=points_per_unit,
        mode_cutoff=mode_cutoff,
        name=name,
    )
    cap_zero_left = CapCondition(np.zeros((4, 4)), lagrangian=_lagrangian(0, 2))
    if name == "matched-exact":
        return ModelGluingProblem(
            lattice=lattice_preset("square-first:0.1"),
            mu=-1.0,
            delta=2.0,
            cap_plus=cap_zero_left,
            cap_minus=CapCondition(np.zeros((4, 4)), lagrangian=_lagrangian(1, 3)),
            kappa=0.3,
            eps0=0.0,
            b_plus=0.0,
            b_minus=0.0,
            **common,
        )
    # same-family potentials on the two caps keep the transported boundary
    # spaces nearly orthogonal (left keeps V_{>0}, right V_{<0} of J S, and
    # these subspaces do not depend on the overall scale); the scale is kept
    # well below the first indicial root so that no nonzero mode is pushed
    # near resonance
    cap_generic_plus = CapCondition(symmetric_anti_j({"jj": 0.02, "ki": 0.0075}))
    cap_generic_minus = CapCondition(symmetric_anti_j({"jj": 0.015, "ki": 0.005}))
    if name == "generic-d2m1":
        return ModelGluingProblem(
            lattice=lattice_preset("square-first:0.05"),
            mu=-1.0,
            delta=2.0,
            cap_plus=cap_generic_plus,
            cap_minus=cap_generic_minus,
            kappa=0.3,
            eps0=0.05,
            b_plus=0.05,
            b_minus=0.04,
            **common,
        )
    if name == "generic-d05m1":
        return ModelGluingProblem(
            lattice=lattice_preset("square-first:0.35"),
            mu=-1.0,
            delta=0.5,
            cap_plus=cap_generic_plus,
            cap_minus=cap_generic_minus,
            kappa=0.3,
            eps0=0.025,
            b_plus=0.004,
            b_minus=0.0032,
            **common,
        )
    if name == "generic-d1m05":
        return ModelGluingProblem(
            lattice=lattice_preset("square-first:0.35"),
            mu=-0.5,
            delta=1.0,
            cap_plus=cap_generic_plus,
            cap_minus=cap_generic_minus,
            kappa=0.3,
            eps0=0.001,
            b_plus=0.03,
            b_minus=0.024,
            **common,
        )
    if name == "generic-d25m2":
        # fast-decay fixture for the linear-estimate regression: the rate-0
        # neck modes force sigma_min ~ angle/(2T+1), whose log-slope over a
        # fixed window can only stay above -delta_e/8 when delta_e is not
        # too small
        return ModelGluingProblem(
            lattice=lattice_preset("square-first:0.05"),
            mu=-2.0,
            delta=2.5,
            cap_plus=cap_generic_plus,
            cap_minus=cap_generic_minus,
            kappa=0.3,
            eps0=0.02,
            b_plus=0.02,
            b_minus=0.016,
            **common,
        )
    if name == "kernel-obstructed":
        # equal and opposite end rotations keep the two cap Lagrangians
        # meeting along exactly one direction
        return ModelGluingProblem(
            lattice=lattice_preset("square-first:0.1"),
            mu=-1.0,
            delta=2.0,
            cap_plus=cap_zero_left,
            cap_minus=CapCondition(np.zeros((4, 4)), lagrangian=_lagrangian(0, 3)),
            kappa=0.3,
            eps0=0.02,
            b_plus=0.05,
            b_minus=-0.05,
            **common,
        )
    raise InvalidInputError(f"unknown problem preset {name!r}")


PRESET_NAMES = (
    "matched-exact",
    "generic-d2m1",
    "generic-d05m1",
    "generic-d1m05",
    "generic-d25m2",
    "kernel-obstructed",
)
