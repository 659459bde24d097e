import numpy as np
import pytest

from erasesim.xzzx import (
    LEG_BASIS,
    LEG_ORDER,
    CodeConfig,
    build_lattice,
    build_schedule,
    stabilizer_masks,
    symplectic_product,
)


@pytest.mark.parametrize("d", [3, 5, 7])
def test_counts(d):
    lat = build_lattice(CodeConfig(d))
    assert lat.n_data == d * d
    assert lat.n_anc == d * d - 1
    assert lat.n_qubits == 2 * d * d - 1


@pytest.mark.parametrize("d", [2, 4, 1, 0, -3])
def test_invalid_distance(d):
    with pytest.raises(ValueError):
        CodeConfig(d)


def test_invalid_rounds():
    with pytest.raises(ValueError):
        CodeConfig(3, rounds=0)
    assert CodeConfig(5).num_rounds == 5
    assert CodeConfig(5, rounds=2).num_rounds == 2


@pytest.mark.parametrize("d", [3, 5])
def test_stabilizers_commute(d):
    lat = build_lattice(CodeConfig(d))
    masks = stabilizer_masks(lat)
    for i in range(len(masks)):
        for j in range(i + 1, len(masks)):
            assert symplectic_product(masks[i], masks[j]) == 0


@pytest.mark.parametrize("d", [3, 5])
def test_logicals(d):
    lat = build_lattice(CodeConfig(d))
    masks = stabilizer_masks(lat)
    for logical in lat.logicals:
        assert int(np.sum(logical[0]) + np.sum(logical[1])) == d
        for s in masks:
            assert symplectic_product(s, logical) == 0
    assert symplectic_product(*lat.logicals) == 1


@pytest.mark.parametrize("d", [3, 5])
def test_every_interior_plaquette_has_four_legs(d):
    lat = build_lattice(CodeConfig(d))
    sizes = sorted(len(legs) for legs in lat.stabilizers)
    n_boundary = sizes.count(2)
    assert set(sizes) <= {2, 4}
    # 2(d-1) weight-2 boundary checks on a planar patch
    assert n_boundary == 2 * (d - 1)


def test_stabilizer_is_xzzx():
    lat = build_lattice(CodeConfig(3))
    for legs, (rr, cc) in zip(lat.stabilizers, lat.anc_coords):
        for q, basis in legs:
            r, c = divmod(q, 3)
            dr, dc = r - int(rr - 0.5), c - int(cc - 0.5)
            leg = {(0, 0): "NW", (0, 1): "NE", (1, 0): "SW", (1, 1): "SE"}[(dr, dc)]
            assert basis == LEG_BASIS[leg]


@pytest.mark.parametrize("d", [3, 5])
def test_schedule_structure(d):
    lat = build_lattice(CodeConfig(d))
    sched = build_schedule(lat)
    assert len(sched.steps) == 4
    assert sched.n_gates == sum(len(legs) for legs in lat.stabilizers)
    # each step touches each qubit at most once
    for step_idx, step in enumerate(sched.steps):
        qubits = [q for g in step for q in (g.ancilla, g.data)]
        assert len(qubits) == len(set(qubits))
        for g in step:
            assert g.step == step_idx
            assert g.leg == LEG_ORDER[step_idx]
            assert g.kind == ("CNOT" if LEG_BASIS[g.leg] == "X" else "CZ")


def test_json_dicts_roundtrip_shapes():
    lat = build_lattice(CodeConfig(3))
    sched = build_schedule(lat)
    lj = lat.to_json_dict()
    assert lj["format"] == "erasesim-lattice/1"
    assert len(lj["data_qubits"]) == 9
    assert len(lj["ancillas"]) == 8
    assert len(lj["logicals"]) == 2
    sj = sched.to_json_dict()
    assert sj["format"] == "erasesim-schedule/1"
    assert sum(len(s) for s in sj["steps"]) == sched.n_gates
