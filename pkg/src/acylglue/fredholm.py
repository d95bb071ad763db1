"""Weighted Fredholm index calculus over multi-ended cylinders.

The index of the cylinder operator with weight vector lambda is determined
entirely by the indicial data of the ends: each end with nonnegative weight
contributes +d0/2 plus the multiplicities of the roots strictly between 0
and the weight, each end with negative weight contributes the mirror image
with a minus sign, and crossing a root changes the index by its
multiplicity.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .errors import (
    CriticalRateError,
    InsufficientSpectrumError,
    InvalidInputError,
    ModelInconsistencyError,
)
from .spectral import IndicialData

CRITICAL_TOL = 1e-10


@dataclass(frozen=True)
class EndSpectrum:
    """One IndicialData per cylinder end, with optional end labels."""

    ends: tuple[IndicialData, ...]
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        if len(self.ends) < 1:
            raise InvalidInputError("need at least one end")
        if self.labels is not None and len(self.labels) != len(self.ends):
            raise InvalidInputError("labels must match the number of ends")

    def __len__(self) -> int:
        return len(self.ends)


@dataclass(frozen=True)
class RateVector:
    rates: tuple[float, ...]

    def __post_init__(self):
        if len(self.rates) < 1:
            raise InvalidInputError("empty rate vector")

    def __neg__(self) -> "RateVector":
        return RateVector(tuple(-r for r in self.rates))


@dataclass(frozen=True)
class EndContribution:
    """Signed per-end bookkeeping: sign * (d0/2 + sum of crossed d's)."""

    d0: int
    sign: int
    crossed: tuple[tuple[float, int], ...]

    @property
    def value(self) -> int:
        return self.sign * (self.d0 // 2 + sum(d for _, d in self.crossed))


@dataclass(frozen=True)
class IndexReport:
    index: int
    contributions: tuple[EndContribution, ...]

    def __post_init__(self):
        if self.index != sum(c.value for c in self.contributions):
            raise InvalidInputError("index does not match its contributions")

    def to_json_dict(self) -> dict:
        return {
            "index": int(self.index),
            "per_end": [
                {
                    "d0": int(c.d0),
                    "sign": int(c.sign),
                    "crossed": [{"root": float(r), "d": int(d)} for r, d in c.crossed],
                }
                for c in self.contributions
            ],
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "IndexReport":
        contribs = tuple(
            EndContribution(
                d0=int(e["d0"]),
                sign=int(e["sign"]),
                crossed=tuple((float(x["root"]), int(x["d"])) for x in e["crossed"]),
            )
            for e in d["per_end"]
        )
        return cls(index=int(d["index"]), contributions=contribs)

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True)


def _check_lengths(ends: EndSpectrum, rate: RateVector) -> None:
    if len(rate.rates) != len(ends):
        raise InvalidInputError(
            f"rate vector has {len(rate.rates)} components for {len(ends)} ends"
        )


def _check_cutoffs(ends: EndSpectrum, rate: RateVector) -> None:
    for i, (end, r) in enumerate(zip(ends.ends, rate.rates)):
        if abs(r) > end.cutoff + CRITICAL_TOL:
            raise InsufficientSpectrumError(
                f"rate {r} on end {i} exceeds the computed root cutoff {end.cutoff}"
            )


def is_critical_rate(ends: EndSpectrum, rate: RateVector) -> bool:
    """True iff some component sits (within 1e-10) on an indicial root."""
    _check_lengths(ends, rate)
    _check_cutoffs(ends, rate)
    return any(
        end.multiplicity(r, tol=CRITICAL_TOL) > 0
        for end, r in zip(ends.ends, rate.rates)
    )


def index_full(ends: EndSpectrum, rate: RateVector) -> IndexReport:
    """Index of the weighted operator at a non-critical rate vector."""
    _check_lengths(ends, rate)
    _check_cutoffs(ends, rate)
    if is_critical_rate(ends, rate):
        raise CriticalRateError(f"rate {rate.rates} lies on the wall of critical rates")
    contribs = []
    for end, r in zip(ends.ends, rate.rates):
        if end.d0 % 2 != 0:
            raise ModelInconsistencyError("d0 must be even for the index formula")
        if r >= 0:
            crossed = tuple(t for t in end.roots_in_open_interval(0.0, r))
            contribs.append(EndContribution(d0=end.d0, sign=+1, crossed=crossed))
        else:
            crossed = tuple(t for t in end.roots_in_open_interval(r, 0.0))
            contribs.append(EndContribution(d0=end.d0, sign=-1, crossed=crossed))
    total = sum(c.value for c in contribs)
    return IndexReport(index=total, contributions=tuple(contribs))


def index_fixed_cross_section(ends: EndSpectrum, mu: RateVector) -> IndexReport:
    """Index with the cross-section held fixed: requires mu < 0 componentwise.

    Equals -(sum of d0/2) minus the multiplicities of roots in (mu_i, 0);
    coincides with index_full at the same weights.
    """
    _check_lengths(ends, mu)
    if any(r >= 0 for r in mu.rates):
        raise InvalidInputError("fixed cross-section index needs negative rates")
    return index_full(ends, mu)


def index_varying_cross_section(ends: EndSpectrum) -> int:
    """Index when cross-sections vary: sum of d0/2 over the ends."""
    total = 0
    for end in ends.ends:
        if end.d0 % 2 != 0:
            raise ModelInconsistencyError(
                f"d0 = {end.d0} is odd; the varying index d0/2 is not an integer"
            )
        total += end.d0 // 2
    return total


def wall_crossing(index_before: int, d_lambda: int) -> int:
    """Index after the weight crosses a root of multiplicity d_lambda."""
    if d_lambda < 0:
        raise InvalidInputError("root multiplicity cannot be negative")
    return index_before + d_lambda


def crossed_multiplicity(ends: EndSpectrum, lo: RateVector, hi: RateVector) -> int:
    """Total multiplicity of roots strictly between lo < hi, per end."""
    _check_lengths(ends, lo)
    _check_lengths(ends, hi)
    if any(a > b for a, b in zip(lo.rates, hi.rates)):
        raise InvalidInputError("need lo <= hi componentwise")
    total = 0
    for end, a, b in zip(ends.ends, lo.rates, hi.rates):
        total += sum(d for _, d in end.roots_in_open_interval(a, b))
    return total
