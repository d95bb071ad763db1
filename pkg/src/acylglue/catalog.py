"""Fano 3-fold family catalog and the example building-block records.

The dataset enumerates the 105 deformation families by Picard rank and
position.  Only two derived facts feed the pair enumeration: which eight
families fail very-ampleness of the anticanonical bundle, and which eight
very-ample families of index 1 and rank 1 carry an unobstructed line.
Pairing an index-1/rank-1 line carrier with any very-ample family (rank sum
at most 11) yields the 8 x 97 = 776 sphere-gluing candidates.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources

from .curves import HypothesisReport, SLBettiData, check_sl_gluing_hypothesis
from .errors import DatasetError

# flag content the shipped dataset must reproduce
NOT_VERY_AMPLE = frozenset(
    {(1, 1), (1, 2), (1, 12), (2, 1), (2, 2), (2, 3), (7, 1), (8, 1)}
)
LINE_CANDIDATES = frozenset({(1, n) for n in range(3, 11)})
TOTAL_FAMILIES = 105
RANK_SUM_BOUND = 11  # polarized K3 lattices admit an orthogonal pushout


@dataclass(frozen=True)
class FanoRecord:
    picard_rank: int
    number_in_rank: int
    fano_index: int
    very_ample: bool
    line_candidate: bool

    @property
    def key(self) -> tuple[int, int]:
        return (self.picard_rank, self.number_in_rank)

    def to_json_dict(self) -> dict:
        return {
            "picard_rank": self.picard_rank,
            "number_in_rank": self.number_in_rank,
            "fano_index": self.fano_index,
            "very_ample": self.very_ample,
            "line_candidate": self.line_candidate,
        }


@dataclass(frozen=True)
class Catalog:
    records: tuple[FanoRecord, ...]
    warnings: tuple[str, ...] = ()

    def __len__(self) -> int:
        return len(self.records)

    def get(self, rank: int, number: int) -> FanoRecord:
        for r in self.records:
            if r.key == (rank, number):
                return r
        raise KeyError((rank, number))


def _parse_bool(token: str, lineno: int) -> bool:
    if token == "true":
        return True
    if token == "false":
        return False
    raise DatasetError(f"expected lowercase true/false, got {token!r}", line=lineno)


def _parse_line(raw: str, lineno: int) -> FanoRecord | None:
    text = raw.split("#", 1)[0].strip()
    if not text:
        return None
    fields = [f.strip() for f in text.split(",")]
    if len(fields) != 5:
        raise DatasetError(f"expected 5 comma-separated fields, got {len(fields)}", line=lineno)
    try:
        rank, number, index = (int(fields[i]) for i in range(3))
    except ValueError as exc:
        raise DatasetError(f"non-integer field: {exc}", line=lineno) from None
    if not 1 <= rank <= 10:
        raise DatasetError(f"picard rank {rank} outside [1, 10]", line=lineno)
    if number < 1:
        raise DatasetError(f"number in rank must be >= 1, got {number}", line=lineno)
    if index < 1:
        raise DatasetError(f"fano index must be >= 1, got {index}", line=lineno)
    return FanoRecord(
        picard_rank=rank,
        number_in_rank=number,
        fano_index=index,
        very_ample=_parse_bool(fields[3], lineno),
        line_candidate=_parse_bool(fields[4], lineno),
    )


def validate_content(records: tuple[FanoRecord, ...]) -> tuple[str, ...]:
    """Soft checks against the canonical flag lists; returns warnings."""
    warnings: list[str] = []
    for r in records:
        expected_va = r.key not in NOT_VERY_AMPLE
        if r.very_ample != expected_va:
            warnings.append(
                f"family {r.key}: very_ample={r.very_ample} deviates from the canonical list"
            )
        expected_lc = r.key in LINE_CANDIDATES
        if r.line_candidate != expected_lc:
            warnings.append(
                f"family {r.key}: line_candidate={r.line_candidate} deviates from the canonical list"
            )
        if r.line_candidate and not (
            r.picard_rank == 1 and r.fano_index == 1 and r.very_ample
        ):
            warnings.append(
                f"family {r.key}: line_candidate requires rank 1, index 1 and very ample"
            )
    return tuple(warnings)


def load_catalog(source: str | None = None) -> Catalog:
    """Load and strictly validate the family dataset.

    ``source`` is a path; None loads the embedded default.  Structural
    problems (malformed lines, duplicates, wrong total) raise DatasetError
    with a line number; content drift from the canonical flag lists is
    collected as warnings on the returned catalog.
    """
    if source is None:
        text = resources.files("acylglue.data").joinpath("fano_families.txt").read_text("utf-8")
    else:
        with open(source, encoding="utf-8") as fh:
            text = fh.read()
    records: list[FanoRecord] = []
    seen: dict[tuple[int, int], int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        rec = _parse_line(raw, lineno)
        if rec is None:
            continue
        if rec.key in seen:
            raise DatasetError(
                f"duplicate family {rec.key} (first seen on line {seen[rec.key]})", line=lineno
            )
        seen[rec.key] = lineno
        records.append(rec)
    if len(records) != TOTAL_FAMILIES:
        raise DatasetError(f"expected {TOTAL_FAMILIES} records, found {len(records)}")
    return Catalog(records=tuple(records), warnings=validate_content(tuple(records)))


def very_ample_families(catalog: Catalog) -> list[FanoRecord]:
    return [r for r in catalog.records if r.very_ample]


def line_candidate_families(catalog: Catalog) -> list[FanoRecord]:
    return [r for r in catalog.records if r.line_candidate]


def enumerate_sphere_pairs(catalog: Catalog) -> list[tuple[FanoRecord, FanoRecord]]:
    """Ordered pairs (W+, W-): line carrier x very-ample, rank sum <= 11.

    The enumeration is literal: ordered pairs, self-pairs allowed, which is
    what reproduces the count 8 x 97 = 776.
    """
    plus = line_candidate_families(catalog)
    minus = very_ample_families(catalog)
    return [
        (p, q)
        for p in plus
        for q in minus
        if p.picard_rank + q.picard_rank <= RANK_SUM_BOUND
    ]


@dataclass(frozen=True)
class ExampleRecord:
    """One worked special-Lagrangian gluing example from the catalog."""

    name: str
    construction: str
    betti: SLBettiData
    expected_topology: str

    def check(self) -> HypothesisReport:
        return check_sl_gluing_hypothesis(self.betti, self.betti, matched_sections=True)

    def to_json_dict(self) -> dict:
        return {
            "name": self.name,
            "construction": self.construction,
            "betti": self.betti.to_json_dict(),
            "expected_topology": self.expected_topology,
            "verdict": self.check().verdict,
        }


_CONSTRUCTIONS = (
    "quartic-P4-involution",
    "KL-block-quartic-K3",
    "KL-block-weighted-P1113",
)


def example_records() -> list[ExampleRecord]:
    """The three shipped examples; each passes the SL hypothesis checker.

    All three have a 3-ball-like half (real Betti numbers (1, 0, 0)) over a
    2-sphere cross-section, so injectivity is the arithmetic 0 - 1 + 1 = 0
    and the intersection condition holds automatically (b1 = 0).
    """
    ball_over_sphere = SLBettiData(b0_L=1, b1_L=0, b2_L=0, b0_sigma=1, b1_sigma=0)
    return [
        ExampleRecord("nordstrom-rp3", _CONSTRUCTIONS[0], ball_over_sphere, "RP3"),
        ExampleRecord("rp3rp3-quartic-k3", _CONSTRUCTIONS[1], ball_over_sphere, "RP3#RP3"),
        ExampleRecord("rp3rp3-weighted-p1113", _CONSTRUCTIONS[2], ball_over_sphere, "RP3#RP3"),
    ]
