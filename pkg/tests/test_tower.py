import numpy as np
import pytest

from isotower.errors import CapExceeded, ParameterError
from isotower.matgroup import unit_index
from isotower.tower import Tower, TowerParams


@pytest.mark.parametrize("kw", [dict(q=4, l=2, p=3), dict(q=5, l=5, p=3), dict(q=5, l=2, p=3, N=3),
                                dict(q=5, l=2, p=3, N=0), dict(q=3, l=2, p=5), dict(q=5, l=2, p=3, n_max=-1),
                                dict(q=5, l=2, p=3, k=0)])
def test_bad_params(kw):
    with pytest.raises(ParameterError):
        TowerParams(**kw).validate()


def test_auto_k(tower_5231):
    T = tower_5231
    assert T.F.k == 6
    assert all(E.is_supersingular for E in T.curves)


def test_voltage_determinants(tower_5231):
    # indices of steps whose voltage det differs from l mod p^n_max
    assert tower_5231.voltage_det_check() == []
    assert all(g.det == 2 for g in tower_5231.g)


@pytest.mark.parametrize("n", [0, 1])
def test_derived_matches_direct(tower_5231, n):
    r = tower_5231.derived_vs_direct(n)
    assert r["isomorphic"] and r["vertices"] == r["derived_vertices"]


@pytest.mark.parametrize("n", [0, 1, 2])
def test_supersingular_component_count(tower_5231, n):
    r = tower_5231.thm41(n)
    assert r["pass"] and r["unit_index"] == unit_index(9 ** (n > 1) * 3 ** (n == 1), 2)


def test_covering_chain(tower_5231):
    for row in tower_5231.covering_chain():
        assert row["covering"] and row["sheets"] == row["expected_sheets"]
    for row in tower_5231.covering_chain(direct=True)[:1]:
        assert row["covering"]


def test_galois_audit_connected_level(tower_5231):
    r = tower_5231.galois_audit(0, 1)
    assert r["galois"] and r["components"] == 1 and r["deck_order"] == 48
    assert r.get("deck_enumerated") == 48 and r["fiber_transitive"]
    assert tower_5231.galois_audit(0, 0)["galois"]


def test_cor45(tower_5231):
    r = tower_5231.cor45_audit()
    assert r["m0"] == 1 and r["status"] == "pass"
    assert r["deck_order"] == r["G_nm_order"] == 3**4


@pytest.mark.parametrize("n", [0, 1])
def test_y_graph_direct_matches_derived(tower_5231, n):
    r = tower_5231.prop53(n)
    assert r["isomorphic_min"] and r["isomorphic_max"] and r["beta_constant_l"]


def test_y_tower_small(tower_5231):
    r = tower_5231.y_tower_audit()
    assert r["status"] in ("pass", "undecided")
    if "deck_order" in r:
        assert r["deck_order"] == r["sheets"]


def test_infeasible_level_hits_cap():
    # E[315] over F_{19^k} first appears at k = 12, far beyond the field cap
    with pytest.raises(CapExceeded):
        Tower(TowerParams(19, 5, 3, 7, 2))


def test_field_cap():
    with pytest.raises(CapExceeded):
        Tower(TowerParams(5, 2, 3, 1, 2, cap_field=100))


def test_components_partition(tower_5231):
    reps = tower_5231.classify_components(1)
    assert sum(r.base_vertices for r in reps) == tower_5231.base.n
    assert all(r.reduction_type == "supersingular" for r in reps)
    total = sum(r.counts[1] for r in reps)
    assert total == tower_5231.component_labels(1)[0]
