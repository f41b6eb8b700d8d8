import json
import random
from pathlib import Path

import pytest
from hypothesis import given
from hypothesis import strategies as st

import lgglue
from lgglue import euler
from lgglue.errors import LgError
from oracles.chern_euler import chi_complete_intersection, quintic_degeneration

DATA = Path(lgglue.__file__).parent / "data" / "euler_quintic.json"
SEEDS = st.integers(0, 2 ** 32)


def diagram(seed):
    return euler.random_smoothing_diagram(random.Random(seed))


def a_side(d):
    return {k: v for k, v in d.strata.items() if k not in euler.B_SIDE}


@given(SEEDS)
def test_random_diagrams_satisfy_smoothing(seed):
    assert all(r["holds"] for r in euler.check_smoothing(diagram(seed)))


@given(SEEDS, st.sampled_from([-2, 2]))
def test_perturbed_total_space_breaks_smoothing(seed, delta):
    d = diagram(seed)
    d.strata["X"] += delta
    row = next(r for r in euler.check_smoothing(d) if r["relation"] == "smoothing")
    assert not row["holds"] and row["residual"] == delta


@given(SEEDS)
def test_solved_diagram_satisfies_every_relation(seed):
    solved = euler.solve_unknowns(diagram(seed))
    assert not solved.unknowns
    assert all(r["holds"] for r in euler.check_all(solved))


@given(SEEDS)
def test_rank_two_relative_relation_is_derived(seed):
    d = diagram(seed)
    d.relations = [n for n in euler.CATALOGUE if n != "rank2_relative"]
    solved = euler.solve_unknowns(d)
    row = euler._evaluate(solved, [euler.CATALOGUE["rank2_relative"]])[0]
    assert row["holds"]


@given(SEEDS)
def test_mirror_round_trip(seed):
    d = diagram(seed)
    mirrored = euler.populate_mirror(d)
    assert all(r["holds"] for r in euler.check_mirror_relations(mirrored))
    # forget the A side values that the mirror determines and solve them back
    known = {k: v for k, v in mirrored.strata.items() if v is not None}
    blank = dict(known, X=None, D=None, D1_D2=None)
    back = euler.solve_unknowns(euler.EulerDiagram(d.dim, blank, list(euler.MIRROR)))
    for k in ("X", "D", "D1_D2"):
        assert back.strata[k] == d.strata[k]


@given(SEEDS)
def test_parity_of_dimension_flips_mirror_sign(seed):
    d = diagram(seed)
    mirrored = euler.populate_mirror(d)
    flipped = mirrored.with_dim(d.dim + 1)
    row = euler._evaluate(flipped, [euler.CATALOGUE["mirror_X"]])[0]
    assert row["holds"] == (d.strata["X"] == 0)


@given(SEEDS)
def test_json_round_trip(seed):
    d = euler.solve_unknowns(diagram(seed))
    assert euler.EulerDiagram.from_json(json.loads(json.dumps(d.to_json()))) == d


@given(SEEDS, st.randoms())
def test_solution_independent_of_relation_order(seed, rnd):
    d = diagram(seed)
    names = [r.name for r in euler.active_relations(d)]
    shuffled = list(names)
    rnd.shuffle(shuffled)
    assert euler.solve_unknowns(d, shuffled).strata == euler.solve_unknowns(d, names).strata


def test_solve_for_total_space():
    d = euler.EulerDiagram(3, {"X": None, "X1": 4, "X2": -156, "D0": 24}, ["smoothing"])
    assert euler.solve_unknowns(d).strata["X"] == -200


def test_overconstrained_consistent():
    d = euler.EulerDiagram(3, {"X": None, "X1": 4, "X2": -156, "D0": 24, "XV_W": 200},
                           ["smoothing", "mirror_X"])
    assert euler.solve_unknowns(d).strata["X"] == -200


def test_inconsistent_names_relations():
    d = euler.EulerDiagram(3, {"X": None, "X1": 4, "X2": -156, "D0": 24, "XV_W": 201},
                           ["smoothing", "mirror_X"])
    with pytest.raises(LgError) as e:
        euler.solve_unknowns(d)
    assert e.value.code == "INCONSISTENT"
    assert "smoothing" in e.value.message and "mirror_X" in e.value.message


def test_underdetermined():
    d = euler.EulerDiagram(3, {"X": None, "X1": None, "X2": -156, "D0": 24}, ["smoothing"])
    with pytest.raises(LgError) as e:
        euler.solve_unknowns(d)
    assert e.value.code == "UNDERDETERMINED"


def test_missing_stratum():
    d = euler.EulerDiagram(3, {"X": -200, "X1": 4}, ["smoothing"])
    with pytest.raises(LgError) as e:
        euler.check_all(d)
    assert e.value.code == "MISSING_STRATUM"


@pytest.mark.parametrize("bad", [{"dim": 0, "strata": {}}, {"dim": 2, "strata": {"X": 1.5}},
                                 {"dim": 2, "strata": {}, "relations": ["nope"]}])
def test_invalid_diagrams(bad):
    with pytest.raises(LgError) as e:
        euler.EulerDiagram.from_json(bad)
    assert e.value.code == "INVALID_DATA"


def test_chern_oracle_known_values():
    assert chi_complete_intersection(4, [5]) == -200
    assert chi_complete_intersection(3, []) == 4
    assert chi_complete_intersection(3, [4]) == 24
    assert chi_complete_intersection(2, [3]) == 0


def test_quintic_data_file_matches_oracle():
    data = json.loads(DATA.read_text())
    oracle = quintic_degeneration()
    for k in ("X", "X1", "X2", "D0"):
        assert data["strata"][k] == oracle[k]
    assert data["components"]["quartic_threefold"] == oracle["quartic_threefold"]
    assert data["components"]["base_curve"] == oracle["base_curve"]
    assert all(r["holds"] for r in euler.check_smoothing(euler.EulerDiagram.load(DATA)))
