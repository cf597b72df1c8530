import math

import numpy as np
import pytest

import linkmap


def test_threshold_numbers():
    assert linkmap.threshold_cm(300, 1e-12) == pytest.approx(32.44, abs=0.01)
    assert linkmap.hoeffding_delta(300, 1e-12) == pytest.approx(85.62, abs=0.01)
    assert math.isinf(linkmap.hoeffding_delta(300, 2.0))
    rows = linkmap.threshold_profile([100, 200, 300], [30.0])
    assert [r[0] for r in rows] == [100, 200, 300]
    assert rows[0][2] < rows[1][2] < rows[2][2]
    with pytest.raises(ValueError):
        linkmap.hoeffding_delta(300, 0.0)


def test_map_functions_round_trip():
    for f in ("kosambi", "haldane"):
        assert linkmap.map_inverse(linkmap.map_forward(0.2, f), f) == pytest.approx(0.2)
    assert linkmap.ril_invert(linkmap.ril_expected_mismatch(0.1, 3), "RIL3") == pytest.approx(0.1)


def test_simulate_construct(tmp_path):
    cross, truth = linkmap.simulate(n=200, chromosomes=3, markers=60, seed=4, shuffle=True)
    assert cross.n_genotypes == 200
    assert cross.n_markers == 180
    assert cross.calls.shape == (180, 200)
    built = linkmap.construct(cross, p_value=1e-12, bychr=False)
    assert len(built.groups) == 3
    for g in built.groups:
        chroms = {truth["chromosome"][cross.markers.index(m)] for m in g["markers"]}
        assert len(chroms) == 1
        assert g["positions"] == sorted(g["positions"])

    path = tmp_path / "map.tsv"
    linkmap.save(built, path)
    back = linkmap.load(path)
    assert back.equivalent(built)
    assert set(linkmap.map_lengths(back)) == {g["name"] for g in built.groups}


def test_from_calls_and_errors():
    calls = np.array([[0, 0, 1, 1], [0, 1, 0, 1]], dtype=np.uint8)
    cross = linkmap.Cross.from_calls(calls, ["a", "b", "c", "d"], ["m1", "m2"])
    assert cross.groups[0]["name"] == "ALL"
    het = np.array([[0, 2, 1, 1]], dtype=np.uint8)
    with pytest.raises(linkmap.DataError):
        linkmap.Cross.from_calls(het, ["a", "b", "c", "d"], ["m1"])
    assert linkmap.Cross.from_calls(het, ["a", "b", "c", "d"], ["m1"], pop="RIL2").n_markers == 1
    with pytest.raises(ValueError):
        linkmap.PopulationType("RIL1")
    with pytest.raises(linkmap.ParseError):
        linkmap.load("/nonexistent/linkmap/file.tsv")


def test_diagnostics_and_structure():
    cross, _ = linkmap.simulate(n=120, chromosomes=2, markers=40, missing=0.05, seed=6, grouped=True)
    prof = linkmap.profile_genotypes(cross, xo_lambda=3.0)
    assert len(prof["xo"]) == 120 and len(prof["flagged"]) == 120
    assert linkmap.two_point_lod(20, 100) == pytest.approx(8.37, abs=0.01)

    pulled = linkmap.pull(cross, "co.located")
    pushed = linkmap.push(pulled, "co.located")
    assert pushed.n_mapped == cross.n_mapped

    names = [g["name"] for g in cross.groups]
    merged = linkmap.merge(cross, {"X": names})
    assert [g["name"] for g in merged.groups] == ["X"]
    junction = cross.groups[0]["markers"][-1]
    split = linkmap.break_groups(merged, {"X": [junction]})
    assert len(split.groups) == 2

    keep = cross.genotypes[:60]
    sub = linkmap.subset(cross, genotypes=keep)
    assert sub.n_genotypes == 60
    assert linkmap.quick_est(cross).n_mapped == cross.n_mapped
    rows = linkmap.gen_clones(cross, tol=0.95)
    assert all(r["coef"] >= 0.95 for r in rows)
    fixed = linkmap.fix_clones(cross, tol=0.95)
    assert fixed.n_genotypes <= cross.n_genotypes
