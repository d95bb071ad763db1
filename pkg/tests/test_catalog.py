import dataclasses

import pytest

from acylglue import catalog as cat
from acylglue.errors import DatasetError


@pytest.fixture(scope="module")
def default_catalog():
    return cat.load_catalog()


def test_counts(default_catalog):
    assert len(default_catalog) == 105
    assert len(cat.very_ample_families(default_catalog)) == 97
    assert len([r for r in default_catalog.records if not r.very_ample]) == 8
    assert len(cat.line_candidate_families(default_catalog)) == 8
    assert not default_catalog.warnings


def test_line_candidates_disjoint_from_not_very_ample(default_catalog):
    lc = {r.key for r in cat.line_candidate_families(default_catalog)}
    nva = {r.key for r in default_catalog.records if not r.very_ample}
    assert not lc & nva
    assert lc == {(1, n) for n in range(3, 11)}
    assert nva == set(cat.NOT_VERY_AMPLE)


def test_specific_records(default_catalog):
    r13 = default_catalog.get(1, 3)
    assert r13.very_ample and r13.line_candidate and r13.fano_index == 1
    r11 = default_catalog.get(1, 1)
    assert not r11.very_ample and not r11.line_candidate
    assert default_catalog.get(1, 17).fano_index == 4
    assert default_catalog.get(1, 16).fano_index == 3


def test_pair_enumeration(default_catalog):
    pairs = cat.enumerate_sphere_pairs(default_catalog)
    assert len(pairs) == 776
    keys = {(p.key, q.key) for p, q in pairs}
    assert ((1, 3), (1, 3)) in keys
    assert all(q.very_ample for _, q in pairs)
    assert all(p.line_candidate for p, _ in pairs)


def test_rank_bound_never_binds(default_catalog):
    for p in cat.line_candidate_families(default_catalog):
        for q in cat.very_ample_families(default_catalog):
            assert p.picard_rank + q.picard_rank <= cat.RANK_SUM_BOUND


def test_flipped_flag_gives_warning_and_count_96(default_catalog, tmp_path):
    lines = []
    for r in default_catalog.records:
        va = r.very_ample if r.key != (1, 3) else False
        lines.append(
            f"{r.picard_rank},{r.number_in_rank},{r.fano_index},"
            f"{str(va).lower()},{str(r.line_candidate).lower()}"
        )
    path = tmp_path / "mutated.txt"
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    mutated = cat.load_catalog(str(path))
    assert len(cat.very_ample_families(mutated)) == 96
    assert mutated.warnings


def test_malformed_line_reports_line_number(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("1,1,1,false,false\n1,2,oops,false,false\n", encoding="utf-8")
    with pytest.raises(DatasetError) as err:
        cat.load_catalog(str(path))
    assert "line 2" in str(err.value)


def test_duplicate_and_count_errors(tmp_path, default_catalog):
    rows = [
        f"{r.picard_rank},{r.number_in_rank},{r.fano_index},"
        f"{str(r.very_ample).lower()},{str(r.line_candidate).lower()}"
        for r in default_catalog.records
    ]
    dup = tmp_path / "dup.txt"
    dup.write_text("\n".join(rows + [rows[0]]) + "\n", encoding="utf-8")
    with pytest.raises(DatasetError, match="duplicate"):
        cat.load_catalog(str(dup))
    short = tmp_path / "short.txt"
    short.write_text("\n".join(rows[:-1]) + "\n", encoding="utf-8")
    with pytest.raises(DatasetError, match="expected 105"):
        cat.load_catalog(str(short))


def test_strict_bool_parsing(tmp_path):
    path = tmp_path / "caps.txt"
    path.write_text("1,1,1,False,false\n", encoding="utf-8")
    with pytest.raises(DatasetError, match="true/false"):
        cat.load_catalog(str(path))


def test_example_records_pass_checker():
    records = cat.example_records()
    assert [r.name for r in records] == [
        "nordstrom-rp3",
        "rp3rp3-quartic-k3",
        "rp3rp3-weighted-p1113",
    ]
    topologies = {r.expected_topology for r in records}
    assert topologies == {"RP3", "RP3#RP3"}
    for r in records:
        assert r.check().verdict


def test_mutated_example_fails_checker():
    record = cat.example_records()[0]
    broken = dataclasses.replace(
        record, betti=dataclasses.replace(record.betti, b2_L=1)
    )
    assert not broken.check().verdict
