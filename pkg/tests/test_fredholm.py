import numpy as np
import pytest

from acylglue import fredholm as fr
from acylglue import spectral as sp
from acylglue.errors import (
    CriticalRateError,
    InsufficientSpectrumError,
    InvalidInputError,
    ModelInconsistencyError,
)


def torus_end(cutoff=9.0, preset="square2pi"):
    table = sp.laplace_spectrum_torus(sp.lattice_preset(preset), cutoff)
    return sp.torus_indicial_data(table)


@pytest.fixture(scope="module")
def square_end():
    return torus_end()


def test_is_critical_examples(square_end):
    ends = fr.EndSpectrum(ends=(square_end,))
    assert not fr.is_critical_rate(ends, fr.RateVector((0.5,)))
    assert fr.is_critical_rate(ends, fr.RateVector((1.0,)))
    assert fr.is_critical_rate(ends, fr.RateVector((0.0,)))


def test_rate_beyond_cutoff_rejected(square_end):
    ends = fr.EndSpectrum(ends=(square_end,))
    with pytest.raises(InsufficientSpectrumError):
        fr.is_critical_rate(ends, fr.RateVector((square_end.cutoff + 0.5,)))
    with pytest.raises(InsufficientSpectrumError):
        fr.index_full(ends, fr.RateVector((-square_end.cutoff - 0.5,)))


def test_index_small_positive_rate(square_end):
    ends = fr.EndSpectrum(ends=(square_end,))
    assert fr.index_full(ends, fr.RateVector((0.5,))).index == 2


def test_index_minus_one_and_a_half(square_end):
    # roots of the square torus in (-1.5, 0) are -1 and -sqrt(2), d = 8 each,
    # so the index formula gives -(d0/2 + 8 + 8) = -18
    ends = fr.EndSpectrum(ends=(square_end,))
    report = fr.index_full(ends, fr.RateVector((-1.5,)))
    assert report.index == -18
    crossed = sorted(r for r, _ in report.contributions[0].crossed)
    assert len(crossed) == 2


def test_critical_rate_is_an_error(square_end):
    ends = fr.EndSpectrum(ends=(square_end,))
    with pytest.raises(CriticalRateError):
        fr.index_full(ends, fr.RateVector((1.0,)))


def test_index_antisymmetry(square_end, rng):
    ends = fr.EndSpectrum(ends=(square_end, square_end))
    for _ in range(50):
        rates = rng.uniform(-2.4, 2.4, size=2)
        rv = fr.RateVector(tuple(rates))
        if fr.is_critical_rate(ends, rv):
            continue
        assert fr.index_full(ends, rv).index == -fr.index_full(ends, -rv).index


def test_fixed_cross_section(square_end):
    ends = fr.EndSpectrum(ends=(square_end,))
    assert fr.index_fixed_cross_section(ends, fr.RateVector((-0.5,))).index == -2
    two = fr.EndSpectrum(ends=(square_end, square_end))
    assert fr.index_fixed_cross_section(two, fr.RateVector((-0.5, -0.5))).index == -4
    with pytest.raises(InvalidInputError):
        fr.index_fixed_cross_section(ends, fr.RateVector((0.5,)))


def test_fixed_equals_full_for_negative_rates(square_end, rng):
    ends = fr.EndSpectrum(ends=(square_end, square_end))
    for _ in range(30):
        rates = tuple(-float(r) for r in rng.uniform(0.01, 2.4, size=2))
        rv = fr.RateVector(rates)
        if fr.is_critical_rate(ends, rv):
            continue
        assert (
            fr.index_fixed_cross_section(ends, rv).index == fr.index_full(ends, rv).index
        )


def test_varying_examples(square_end):
    assert fr.index_varying_cross_section(fr.EndSpectrum(ends=(square_end,))) == 2
    sl = sp.sl_indicial_zero_data(1, 0)
    assert fr.index_varying_cross_section(fr.EndSpectrum(ends=(sl,))) == 1
    three = fr.EndSpectrum(ends=(square_end,) * 3)
    assert fr.index_varying_cross_section(three) == 6


def test_varying_rejects_odd_d0():
    odd = sp.sl_indicial_zero_data(1, 1)  # d0 = 3
    with pytest.raises(ModelInconsistencyError):
        fr.index_varying_cross_section(fr.EndSpectrum(ends=(odd,)))


def test_varying_fixed_relation_in_first_chamber(square_end):
    # no roots in (mu, 0): varying = fixed + sum d0
    ends = fr.EndSpectrum(ends=(square_end, square_end))
    mu = fr.RateVector((-0.5, -0.25))
    assert fr.index_varying_cross_section(ends) == (
        fr.index_fixed_cross_section(ends, mu).index + 8
    )


def test_wall_crossing_examples():
    assert fr.wall_crossing(-2, 4) == 2
    assert fr.wall_crossing(2, 8) == 10
    assert fr.wall_crossing(7, 0) == 7
    with pytest.raises(InvalidInputError):
        fr.wall_crossing(0, -1)


def _fixtures():
    hex_end = torus_end(cutoff=6.1, preset="hex-first2")
    sq = torus_end()
    return [
        fr.EndSpectrum(ends=(sq,)),
        fr.EndSpectrum(ends=(sq, hex_end)),
        fr.EndSpectrum(ends=(sq, sq, hex_end)),
    ]


def test_wall_crossing_telescopes_over_random_paths(rng):
    for ends in _fixtures():
        lo_cut = min(e.cutoff for e in ends.ends)
        for _ in range(100):
            a = rng.uniform(-lo_cut, lo_cut, size=len(ends))
            b = rng.uniform(-lo_cut, lo_cut, size=len(ends))
            lo = fr.RateVector(tuple(np.minimum(a, b)))
            hi = fr.RateVector(tuple(np.maximum(a, b)))
            if fr.is_critical_rate(ends, lo) or fr.is_critical_rate(ends, hi):
                continue
            idx = fr.index_full(ends, lo).index
            idx = fr.wall_crossing(idx, fr.crossed_multiplicity(ends, lo, hi))
            assert idx == fr.index_full(ends, hi).index


def test_index_report_json_round_trip(square_end):
    ends = fr.EndSpectrum(ends=(square_end, square_end))
    report = fr.index_full(ends, fr.RateVector((1.3, -0.5)))
    again = fr.IndexReport.from_json_dict(report.to_json_dict())
    assert again == report
    assert report.index == sum(c.value for c in report.contributions)
