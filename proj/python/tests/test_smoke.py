"""Smoke tests for the Python bindings.

Numerical correctness is covered by the C++ suites; these check that the
bindings wire the main operations through faithfully.
"""

import math
import os

import pytest

import dstf

DATA_DIR = os.environ.get(
    "DSTF_DATA_DIR",
    os.path.join(os.path.dirname(__file__), "..", "..", "data"),
)


@pytest.fixture
def model():
    with open(os.path.join(DATA_DIR, "xyz_example.json")) as f:
        return dstf.parse_model(f.read())


def test_parse_and_classify(model):
    assert len(model) == 10
    assert model.total_mass() == pytest.approx(1.0)
    cls = model.classify()
    assert cls["proper"] and cls["normal"] and not cls["positive_normal"]
    names = [v["name"] for v in model.variables()]
    assert names == ["X", "Y", "Z"]


def test_bel_pl_q(model):
    assert model.q({"X": ["p"], "Y": ["r"], "Z": ["b"]}) == pytest.approx(0.175)
    assert model.pl({"X": ["p"], "Y": ["r", "s", "t"], "Z": ["a", "b", "c"]}) == pytest.approx(0.350)
    assert model.bel({"X": ["p", "q"], "Y": ["r", "s", "t"], "Z": ["a", "b", "c"]}) == pytest.approx(1.0)


def test_marginalize_and_combine(model):
    mz = model.marginalize(["Z"])
    masses = {tuple(sorted(f["set"]["Z"])): f["mass"] for f in mz.focals()}
    assert masses[("a", "b")] == pytest.approx(0.350)
    assert masses[("b", "c")] == pytest.approx(0.44375)
    assert masses[("b",)] == pytest.approx(0.20625)

    same = model.combine(dstf.vacuous(model))
    assert len(same) == 10
    assert same.total_mass() == pytest.approx(1.0)


def test_condition_yields_pseudo(model):
    cond = model.condition(["Z"])
    assert not cond.classify()["proper"]
    assert min(f["mass"] for f in cond.focals()) < 0


def test_verify_decomposition(model):
    rep = dstf.verify_decomposition(model, ["X"], ["Y"], ["Z"])
    assert rep["holds"]
    assert rep["route_disagreement"] <= 1e-9


def test_f_measure_and_checks(model):
    cells = dstf.f_measure(model, ["X"], ["Y"], ["Z"])
    lookup = {}
    for c in cells:
        key = (tuple(c["rs"]["X"]), tuple(c["rs"]["Y"]), tuple(c["v"]["Z"]))
        lookup[key] = c["value"]
    assert lookup[(("p",), ("r",), ("b",))] == pytest.approx(0.175)
    assert lookup[(("p",), ("r",), ("a", "b"))] == pytest.approx(0.160)

    assert not dstf.check_noninfluence(model, ["X"], ["Y"], ["Z"])["holds"]
    assert dstf.check_cond_independence(model, ["X"], ["Y"], ["Z"], variant="normalized")["holds"]
    assert not dstf.check_cond_independence(model, ["X"], ["Y"], ["Z"], variant="verbatim")["holds"]

    violations = dstf.ratio_obstruction(model, ["X"], ["Y"], ["Z"])
    assert any(
        math.isclose(max(v["ratio1"], v["ratio2"]), 0.160 / 0.015)
        and math.isclose(min(v["ratio1"], v["ratio2"]), 0.040 / 0.060)
        for v in violations
    )


def test_stats_helpers():
    assert dstf.degrees_of_freedom(2, 2, 4) == 9
    assert dstf.degrees_of_freedom(2, 2, 4, 2) == 7
    assert dstf.chi_square_pvalue(14.6837, 9) == pytest.approx(0.100, abs=5e-4)
    assert dstf.chi_square_pvalue(3.0, 2) == pytest.approx(math.exp(-1.5))


def test_generate_and_structure_pipeline(model):
    records = dstf.generate_records(model, 500, seed=4)
    assert records.splitlines()[0].startswith("# prng=mt19937_64")
    assert records == dstf.generate_records(model, 500, seed=4)

    emp = dstf.empirical_mass(records)
    assert len(emp) == 10
    assert emp.total_mass() == pytest.approx(1.0)

    res = dstf.test_structure(records, ["X"], ["Y"], ["Z"])
    assert res["df"] == 6
    assert 0.0 <= res["p_value"] <= 1.0
    assert res["accept"] == (res["p_value"] >= 0.1)

    step = dstf.test_stepwise(records, ["X"], ["Y"], ["Z"])
    assert len(step["levels"]) == 3


def test_roundtrip_json(model):
    again = dstf.parse_model(model.to_json())
    assert len(again) == 10
    assert again.q({"X": ["p"], "Y": ["r"], "Z": ["b"]}) == pytest.approx(0.175)


def test_errors(model):
    with pytest.raises(Exception):
        dstf.parse_model("not json")
    with pytest.raises(Exception):
        model.marginalize(["W"])
    with pytest.raises(Exception):
        model.bel({"X": [], "Y": ["r"], "Z": ["a"]})
