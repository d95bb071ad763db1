"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
lines; every tolerance is pinned here.
"""

import math
import time

import numpy as np
import pytest

from acylglue import catalog as cat
from acylglue import curves as cv
from acylglue import fredholm as fr
from acylglue import spectral as sp
from acylglue.errors import ContractionPreconditionError
from acylglue.gluer import (
    ContractionSpec,
    contract_solve,
    error_norm_experiment,
    linear_estimate_experiment,
    problem_preset,
    run_glue_experiment,
)
from oracles import (
    brute_force_normal_cohomology,
    brute_force_torus_spectrum,
    random_lattice,
)

T_GRID = [float(t) for t in range(3, 13)]


def _report(num: int, label: str, passed: bool, detail: str = "") -> None:
    status = "PASS" if passed else "FAIL"
    suffix = f" ({detail})" if detail else ""
    print(f"ACCEPTANCE {num}: {status} - {label}{suffix}")
    assert passed, f"criterion {num}: {label}{suffix}"


def test_criterion_1_spectral_oracle():
    rng = np.random.default_rng(101)
    start = time.perf_counter()
    worst = 0.0
    for _ in range(100):
        basis = random_lattice(rng)
        table = sp.laplace_spectrum_torus(sp.LatticeTorus(basis), 50.0)
        oracle = brute_force_torus_spectrum(basis, 50.0)
        assert len(table.entries) == len(oracle)
        for (e, m), (eo, mo) in zip(table.entries, oracle):
            assert m == mo
            worst = max(worst, abs(e - eo) / max(1.0, eo))
    elapsed = time.perf_counter() - start
    _report(
        1,
        "laplace_spectrum_torus matches brute-force dual-lattice enumeration",
        worst <= 1e-12 and elapsed < 5.0,
        f"worst rel dev {worst:.2e}, {elapsed:.2f}s for 100 lattices",
    )


def test_criterion_2_reference_indicial_multiplicities():
    square = sp.torus_indicial_data(
        sp.laplace_spectrum_torus(sp.lattice_preset("square2pi"), 3.0)
    )
    hexa = sp.torus_indicial_data(
        sp.laplace_spectrum_torus(sp.lattice_preset("hex-first2"), 2.0)
    )
    roots = sorted(r for r, _ in hexa.roots)
    ok = (
        square.d0 == 4
        and hexa.d0 == 4
        and len(roots) == 2
        and abs(roots[0] + math.sqrt(2)) < 1e-12
        and abs(roots[1] - math.sqrt(2)) < 1e-12
        and hexa.multiplicity(math.sqrt(2)) == 12
        and hexa.multiplicity(-math.sqrt(2)) == 12
    )
    _report(2, "square torus d0 = 4 and hex preset d_sqrt2 = 12", ok)


def test_criterion_3_root_symmetry_and_diagonalizability():
    rng = np.random.default_rng(103)
    cl = sp.DEFAULT_CLIFFORD
    lattices = [sp.lattice_preset("square2pi"), sp.lattice_preset("hex-first2")]
    lattices += [sp.LatticeTorus(random_lattice(rng)) for _ in range(100)]
    worst_resid = 0.0
    for lat in lattices:
        ind = sp.torus_indicial_data(sp.laplace_spectrum_torus(lat, 12.0))
        for r, d in ind.roots:
            assert ind.multiplicity(-r) == d
        dual = lat.dual_basis
        for mn in ((0, 0), (1, 0), (0, 1), (1, 1), (2, -1)):
            xi = dual @ np.asarray(mn, dtype=float)
            _, ja = sp.mode_operator(cl, xi)
            w, v = np.linalg.eigh(ja)
            worst_resid = max(
                worst_resid,
                float(np.max(np.abs(v @ np.diag(w) @ v.conj().T - ja))),
                float(np.max(np.abs(ja - ja.conj().T))),
            )
    _report(
        3,
        "root symmetry and per-mode diagonalizability",
        worst_resid < 1e-10,
        f"worst residual {worst_resid:.2e} over 102 lattices",
    )


def _index_fixtures():
    sq = sp.torus_indicial_data(sp.laplace_spectrum_torus(sp.lattice_preset("square2pi"), 9.0))
    hx = sp.torus_indicial_data(sp.laplace_spectrum_torus(sp.lattice_preset("hex-first2"), 6.1))
    return [
        fr.EndSpectrum(ends=(sq,)),
        fr.EndSpectrum(ends=(sq, hx)),
        fr.EndSpectrum(ends=(sq, sq, hx)),
    ]


def test_criterion_4_index_calculus():
    rng = np.random.default_rng(104)
    fixtures = _index_fixtures()
    start = time.perf_counter()
    for ends in fixtures:
        cut = min(e.cutoff for e in ends.ends)
        d0_half = sum(e.d0 for e in ends.ends) // 2
        first_root = min(abs(r) for e in ends.ends for r, _ in e.roots)
        # small-rate value and antisymmetry
        s = 0.5 * first_root
        rv = fr.RateVector((s,) * len(ends))
        assert fr.index_full(ends, rv).index == d0_half
        assert fr.index_full(ends, -rv).index == -d0_half
        # varying = fixed + sum d0 in the first chamber
        assert fr.index_varying_cross_section(ends) == (
            fr.index_fixed_cross_section(ends, -rv).index + 2 * d0_half
        )
        for _ in range(100):
            a = rng.uniform(-cut, cut, size=len(ends))
            b = rng.uniform(-cut, cut, size=len(ends))
            lo = fr.RateVector(tuple(np.minimum(a, b)))
            hi = fr.RateVector(tuple(np.maximum(a, b)))
            if fr.is_critical_rate(ends, lo) or fr.is_critical_rate(ends, hi):
                continue
            assert fr.index_full(ends, lo).index == -fr.index_full(ends, -lo).index
            stepped = fr.wall_crossing(
                fr.index_full(ends, lo).index, fr.crossed_multiplicity(ends, lo, hi)
            )
            assert stepped == fr.index_full(ends, hi).index
            if all(r < 0 for r in lo.rates):
                assert (
                    fr.index_fixed_cross_section(ends, lo).index
                    == fr.index_full(ends, lo).index
                )
    elapsed = time.perf_counter() - start
    _report(4, "index calculus identities over randomized rate paths",
            elapsed < 1.0, f"{elapsed:.3f}s on 3 fixtures")


def test_criterion_5_curve_grid():
    ok = True
    for m in range(0, 7):
        for k in range(-4, 9):
            c = cv.CurveData(m=m, k=k)
            got = cv.normal_cohomology(c)
            ok &= got == brute_force_normal_cohomology(m, k)
            h0, h1, _ = got
            ok &= (h0 - h1) == m
            ok &= cv.rigidity_criterion(c) == (-1 <= k <= m - 1) == (h1 == 0)
    _report(5, "curve cohomology grid matches the monomial oracle", ok)


def test_criterion_6_catalog_counts():
    loaded = cat.load_catalog()
    counts_ok = (
        len(loaded) == 105
        and len(cat.very_ample_families(loaded)) == 97
        and len([r for r in loaded.records if not r.very_ample]) == 8
        and len(cat.line_candidate_families(loaded)) == 8
        and len(cat.enumerate_sphere_pairs(loaded)) == 776
        and not loaded.warnings
    )
    examples = cat.example_records()
    examples_ok = len(examples) == 3 and all(r.check().verdict for r in examples)
    import dataclasses

    mutated = dataclasses.replace(
        examples[0], betti=dataclasses.replace(examples[0].betti, b2_L=1)
    )
    negative_ok = not mutated.check().verdict
    _report(
        6,
        "catalog counts 105/97/8/8/776, examples pass, mutation fails",
        counts_ok and examples_ok and negative_ok,
    )


@pytest.mark.parametrize("name", ["generic-d2m1", "generic-d05m1", "generic-d1m05"])
def test_criterion_7_error_decay(name):
    p = problem_preset(name)  # mode cutoff 8
    start = time.perf_counter()
    rep = error_norm_experiment(p, T_GRID)
    elapsed = time.perf_counter() - start
    slope = rep.fits["error_decay"].slope
    target = -p.delta_e
    ok = abs(slope - target) <= 0.1 * abs(target) and elapsed < 60.0
    _report(
        7,
        f"error decay rate of preset {name}",
        ok,
        f"slope {slope:.4f} vs {target} (+-10%), {elapsed:.1f}s",
    )


def test_criterion_8_linear_estimate():
    trivial = problem_preset("generic-d25m2")
    rep = linear_estimate_experiment(trivial, T_GRID)
    slope = rep.fits["sigma_decay"].slope
    bound = -trivial.delta_e / 8.0
    ok_trivial = rep.meta["matching_kernel_dim"] == 0 and slope >= bound

    obstructed = problem_preset("kernel-obstructed")
    rep2 = linear_estimate_experiment(obstructed, T_GRID, restricted=False)
    slope2 = rep2.fits["sigma_decay"].slope
    ok_obstructed = rep2.meta["matching_kernel_dim"] == 1 and slope2 <= obstructed.mu + 0.1
    _report(
        8,
        "linear-estimate scans (trivial and obstructed matching kernel)",
        ok_trivial and ok_obstructed,
        f"trivial slope {slope:.4f} >= {bound}; obstructed slope {slope2:.4f} <= {obstructed.mu + 0.1}",
    )


@pytest.mark.parametrize("name", ["generic-d2m1", "generic-d05m1", "generic-d1m05"])
def test_criterion_9_nonlinear_gluing(name):
    p = problem_preset(name)
    rep = run_glue_experiment(p, T_GRID, seed=0)
    t1 = rep.meta["T1"]
    after = [i for i, t in enumerate(rep.t_grid) if t >= t1]
    all_converged = all(rep.converged[i] for i in after)
    residuals_ok = all(rep.meta["residual_norms"][i] <= 1e-9 for i in after)
    factors_ok = all(rep.meta["max_contraction_factors"][i] <= 0.5 for i in after)
    relin_ok = all(rep.meta["relinearized_sigma_lower"][i] > 0 for i in after)
    fit = rep.fits.get("solution_decay")
    slope_ok = fit is not None and fit.slope <= -p.delta_e / 4.0 + 0.05
    _report(
        9,
        f"nonlinear gluing on preset {name}",
        all_converged and residuals_ok and factors_ok and relin_ok and slope_ok,
        f"T1 = {t1}, solution slope {fit.slope:.3f} <= {-p.delta_e / 4.0 + 0.05:.3f}"
        if fit
        else f"T1 = {t1}, no converged fit",
    )


def test_criterion_10_contraction_unit_suite():
    spec = ContractionSpec(
        L=np.eye(1), Q=lambda x: x * x, f_x0=np.array([0.01]),
        c_L=1.0, c_Q=1.0, x0=np.zeros(1),
    )
    result = contract_solve(spec)
    root = (-1.0 + math.sqrt(0.96)) / 2.0
    closed_form_ok = abs(result.x[0] - root) < 1e-10

    threshold_ok = True
    try:
        contract_solve(
            ContractionSpec(
                L=np.eye(1), Q=lambda x: x * x, f_x0=np.array([0.1]),
                c_L=1.0, c_Q=1.0, x0=np.zeros(1),
            )
        )
    except ContractionPreconditionError:
        threshold_ok = False  # exactly at the bound must be allowed
    try:
        contract_solve(
            ContractionSpec(
                L=np.eye(1), Q=lambda x: x * x, f_x0=np.array([0.1 + 1e-12]),
                c_L=1.0, c_Q=1.0, x0=np.zeros(1),
            )
        )
        above_raises = False
    except ContractionPreconditionError:
        above_raises = True
    _report(
        10,
        "contraction lemma unit suite",
        closed_form_ok and threshold_ok and above_raises,
        f"|x - closed form| = {abs(result.x[0] - root):.2e}",
    )
