import dataclasses
import json

import numpy as np
import pytest

from acylglue.errors import (
    HypothesisViolatedError,
    InvalidInputError,
    NoContractionStartError,
)
from acylglue.gluer.experiments import (
    error_norm_experiment,
    error_term,
    glue_model,
    linear_estimate_experiment,
    problem_preset,
    quadratic_probe,
    run_glue_experiment,
)
from acylglue.gluer.model import sup_norm


@pytest.fixture(scope="module")
def d2m1():
    return problem_preset("generic-d2m1", mode_cutoff=2)


def test_matched_exact_error_vanishes():
    p = problem_preset("matched-exact", mode_cutoff=1)
    for T in (3.0, 6.0):
        assert sup_norm(error_term(p, T)) <= 1e-12


def test_error_term_localization(d2m1):
    # away from the band and the source bump the error cancels identically
    T = 6.0
    e = error_term(d2m1, T)
    grid = d2m1.with_T(T).grid()
    mids = grid.midpoints
    quiet = (mids < T - 1.5) | (mids > T + 2.5)
    dens = np.sqrt(np.sum(e * e, axis=(1, 2, 3)))
    assert np.max(dens[quiet]) < 1e-13
    assert np.max(dens[~quiet]) > 1e-6


def test_error_decay_rates_small_modebox():
    for name, expected in (
        ("generic-d2m1", -1.0),
        ("generic-d05m1", -0.5),
        ("generic-d1m05", -0.5),
    ):
        p = problem_preset(name, mode_cutoff=2)
        rep = error_norm_experiment(p, [3, 5, 7, 9, 11])
        fit = rep.fits["error_decay"]
        assert abs(fit.slope - expected) <= 0.1 * abs(expected), name
        assert rep.meta["expected_slope"] == expected


def test_error_grid_validation(d2m1):
    with pytest.raises(InvalidInputError):
        error_norm_experiment(d2m1, [3, 4, 5])
    with pytest.raises(InvalidInputError):
        error_norm_experiment(d2m1, [3, 3, 4, 5])


def test_linear_estimate_trivial_kernel(d2m1):
    rep = linear_estimate_experiment(d2m1, [3, 5, 7, 9])
    assert rep.meta["matching_kernel_dim"] == 0
    assert rep.meta["estimate_floor_c"] > 0
    # the rate-0 neck modes give sigma ~ angle/(2T+1)
    sig = rep.sigma_min
    assert all(b < a for a, b in zip(sig, sig[1:]))
    ratio = sig[0] / sig[-1]
    assert ratio == pytest.approx(19.0 / 7.0, rel=0.25)


def test_linear_estimate_obstructed_kernel_dominates():
    p = problem_preset("kernel-obstructed", mode_cutoff=1)
    rep = linear_estimate_experiment(p, [3, 5, 7, 9], restricted=False)
    fit = rep.fits["sigma_decay"]
    assert rep.meta["matching_kernel_dim"] == 1
    assert fit.slope <= p.mu + 0.1
    # restricting to the complement of the approximate kernel restores the
    # neck-scale floor
    rep2 = linear_estimate_experiment(p, [3, 5, 7, 9], restricted=True)
    assert min(rep2.sigma_min) > 10 * max(rep.sigma_min)


def test_quadratic_probe_bounded_by_kappa(d2m1):
    c_q = quadratic_probe(d2m1, samples=24, T=4.0, seed=3)
    assert c_q <= d2m1.kappa * (1 + 1e-9)
    assert c_q >= 0.8 * d2m1.kappa
    p0 = dataclasses.replace(d2m1, kappa=0.0)
    assert quadratic_probe(p0, samples=4, T=4.0) == 0.0


def test_quadratic_probe_stable_in_T(d2m1):
    values = [quadratic_probe(d2m1, samples=16, T=T, seed=1) for T in (3.0, 6.0, 9.0)]
    assert max(values) <= 1.2 * min(values)


def test_glue_model_matched_exact_returns_background():
    p = problem_preset("matched-exact", mode_cutoff=1)
    step = glue_model(p, T=4.0)
    assert step.converged
    assert step.solution_distance <= 1e-12
    assert step.residual_norm <= 1e-12


def test_glue_model_obstructed_raises():
    p = problem_preset("kernel-obstructed", mode_cutoff=1)
    with pytest.raises(HypothesisViolatedError):
        glue_model(p, T=4.0)


def test_glue_model_generic_step(d2m1):
    step = glue_model(d2m1, T=6.0)
    assert step.converged
    assert step.residual_norm <= 1e-9
    assert step.max_contraction_factor <= 0.5
    assert step.relinearized_sigma_lower > 0
    assert 0 < step.solution_distance < step.error_norm * step.c_L


def test_run_glue_experiment_no_start():
    p = problem_preset("generic-d05m1", mode_cutoff=1)
    # huge source: preconditions fail on every grid value
    bad = dataclasses.replace(p, eps0=50.0)
    with pytest.raises(NoContractionStartError):
        run_glue_experiment(bad, [3, 4, 5, 6])


def test_report_serialization_round_trip(d2m1):
    rep = error_norm_experiment(d2m1, [3, 4, 5, 6])
    as_json = json.loads(rep.to_json())
    assert as_json["t_grid"] == [3.0, 4.0, 5.0, 6.0]
    assert "error_decay" in as_json["fits"]
    csv = rep.to_csv()
    lines = csv.strip().splitlines()
    assert lines[0] == "T,error_norm,sigma_min,solution_distance,converged"
    assert len(lines) == 5


def test_preset_unknown_name():
    with pytest.raises(InvalidInputError):
        problem_preset("nope")


def test_determinism_same_seed(d2m1):
    a = glue_model(d2m1, T=5.0, seed=7)
    b = glue_model(d2m1, T=5.0, seed=7)
    assert a.solution_distance == b.solution_distance
    assert a.residual_norm == b.residual_norm
