import math

import numpy as np
import pytest

from acylglue.errors import (
    ConstantsInvalidError,
    ContractionPreconditionError,
    InvalidInputError,
)
from acylglue.gluer import (
    ContractionSpec,
    contract_solve,
    cutoff,
    preglue,
    smooth_step,
    verify_contraction_certificate,
)


def test_cutoff_support_and_midpoint():
    T = 4.0
    assert cutoff(T - 1.0, T) == 0.0
    assert cutoff(T, T) == 0.0
    assert cutoff(T + 1.0, T) == 1.0
    assert cutoff(T + 2.0, T) == 1.0
    assert abs(cutoff(T + 0.5, T) - 0.5) < 1e-15


def test_cutoff_flat_to_all_orders_at_joins():
    # exactly 0/1 outside [0, 1], and within e^{-1/eps} of the plateaus just
    # inside, which forces every derivative to vanish at the joins
    assert smooth_step(0.0) == 0.0 and smooth_step(-1e-12) == 0.0
    assert smooth_step(1.0) == 1.0 and smooth_step(1 + 1e-12) == 1.0
    eps = 1e-2
    assert smooth_step(eps) < np.exp(-1.0 / eps) / (np.exp(-1.0 / eps) + np.exp(-1.0 / (1 - eps))) * (1 + 1e-12)
    assert 1.0 - smooth_step(1.0 - eps) < 2 * np.exp(-1.0 / eps)


def test_cutoff_monotone_between_joins():
    xs = np.linspace(-0.5, 1.5, 401)
    vals = smooth_step(xs)
    assert np.all(np.diff(vals) >= 0)
    assert vals[0] == 0.0 and vals[-1] == 1.0


def _grid(T, n_per=4):
    n = int(round((2 * T + 1) * n_per))
    return np.linspace(0.0, 2 * T + 1, n + 1)


def test_preglue_constant_sections():
    T = 3.0
    t = _grid(T)
    c = np.full((len(t), 4), 2.5)
    out = preglue(c, c, T, t)
    assert np.allclose(out, 2.5)


def test_preglue_decaying_plus_zero_minus():
    T = 3.0
    t = _grid(T)
    v = np.array([1.0, 0.0, -2.0, 0.5])
    u_plus = np.exp(-t)[:, None] * v[None, :]
    out = preglue(u_plus, np.zeros_like(u_plus), T, t)
    chi = cutoff(t, T - 1.0)
    assert np.allclose(out, (1.0 - chi)[:, None] * u_plus)


def test_preglue_is_linear(rng):
    T = 2.0
    t = _grid(T)
    a, b, c, d = (rng.standard_normal((len(t), 4)) for _ in range(4))
    lhs = preglue(a + b, c + d, T, t)
    rhs = preglue(a, c, T, t) + preglue(b, d, T, t)
    assert np.allclose(lhs, rhs, atol=1e-14)


def test_preglue_reflection_convention():
    T = 2.0
    t = _grid(T)
    u_minus = t[:, None] * np.ones((1, 4))  # s in minus coordinates
    out = preglue(np.zeros_like(u_minus), u_minus, T, t)
    # for t >= T the glued section equals u_minus(2T+1-t)
    far = t >= T + 1.0
    assert np.allclose(out[far], (2 * T + 1 - t)[far, None])


def test_preglue_domain_mismatch():
    T = 2.0
    t = _grid(T)
    with pytest.raises(InvalidInputError):
        preglue(np.zeros((len(t), 4)), np.zeros((len(t) - 1, 4)), T, t)
    with pytest.raises(InvalidInputError):
        preglue(np.zeros((len(t), 4)), np.zeros((len(t), 4)), T + 1.0, t)


def _scalar_spec(f0: float, c_l: float = 1.0, c_q: float = 1.0) -> ContractionSpec:
    return ContractionSpec(
        L=np.eye(1),
        Q=lambda x: x * x,
        f_x0=np.array([f0]),
        c_L=c_l,
        c_Q=c_q,
        x0=np.zeros(1),
    )


def test_scalar_quadratic_closed_form():
    result = contract_solve(_scalar_spec(0.01))
    root = (-1.0 + math.sqrt(0.96)) / 2.0
    assert abs(result.x[0] - root) < 1e-10
    assert result.residual_norm < 1e-12
    assert result.distance_from_x0 <= 1.0 / 5.0


def test_zero_error_solves_in_one_step():
    result = contract_solve(_scalar_spec(0.0))
    assert result.x[0] == 0.0
    assert result.iterations == 1


def test_precondition_threshold_exact():
    with pytest.raises(ContractionPreconditionError) as err:
        contract_solve(_scalar_spec(0.2))
    assert err.value.bound == pytest.approx(0.1)
    # exactly at the bound is allowed
    contract_solve(_scalar_spec(0.1))


def test_wrong_constants_detected():
    # understate c_Q by 50x: the iterate escapes the certified ball
    spec = ContractionSpec(
        L=np.eye(1),
        Q=lambda x: 50.0 * x * x,
        f_x0=np.array([0.05]),
        c_L=1.0,
        c_Q=1.0,
        x0=np.zeros(1),
    )
    with pytest.raises(ConstantsInvalidError):
        contract_solve(spec)


def test_contraction_certificate(rng):
    spec = _scalar_spec(0.01)
    factor, image = verify_contraction_certificate(spec, rng, pairs=100)
    assert factor <= 0.5
    assert image <= 0.7


def test_matrix_operator_and_cond_check(rng):
    mat = np.diag([2.0, 4.0])
    spec = ContractionSpec(
        L=mat,
        Q=lambda x: np.array([x[0] ** 2, x[0] * x[1]]),
        f_x0=np.array([0.01, 0.02]),
        c_L=0.5,
        c_Q=1.0,
        x0=np.zeros(2),
    )
    result = contract_solve(spec)
    assert result.residual_norm < 1e-12
    with pytest.raises(InvalidInputError):
        ContractionSpec(
            L=np.zeros((2, 2)),
            Q=lambda x: x,
            f_x0=np.zeros(2),
            c_L=1.0,
            c_Q=1.0,
            x0=np.zeros(2),
        )


def test_quadratic_spot_check(rng):
    spec = _scalar_spec(0.01)
    assert spec.spot_check_quadratic(rng) <= 1.0 + 1e-12
