import itertools

import numpy as np
import pytest

from bosehubbard.lattice import (
    ModelOneSpec,
    ModelTwoSpec,
    bond_connected,
    build_standard_lattice,
    validate_spec,
)


def test_two_site_chain_passes_all_checks():
    spec = ModelOneSpec([[0, 1], [1, 0]], [-1, -1])
    report = validate_spec(spec)
    assert report.ok
    assert report.failures() == []


def test_disconnected_two_sites_fail_connectivity():
    spec = ModelOneSpec(np.zeros((2, 2)), [-1, -1])
    report = validate_spec(spec)
    assert not report.ok
    assert report.failures() == ["connected"]


def test_model_two_sign_check_fails_on_negative_u2():
    spec = ModelTwoSpec([[0, 1], [1, 0]], [-1, -1], [-1, -1])
    report = validate_spec(spec)
    assert not report.checks["repulsive_u2"]
    assert report.checks["hermitian"] and report.checks["connected"]


def test_asymmetric_hopping_reported():
    spec = ModelOneSpec([[0, 1], [0.5, 0]], [-1, -1])
    assert not validate_spec(spec).checks["symmetric"]


def test_non_hermitian_model_two_reported():
    spec = ModelTwoSpec([[0, 1j], [1j, 0]], [-1, -1], [1, 1])
    assert not validate_spec(spec).checks["hermitian"]


def test_dimension_mismatch_is_structural_error():
    with pytest.raises(ValueError):
        ModelOneSpec(np.zeros((2, 2)), [-1, -1, -1])
    with pytest.raises(ValueError):
        ModelOneSpec(np.zeros((2, 3)), [-1, -1])
    with pytest.raises(ValueError):
        ModelTwoSpec(np.zeros((2, 2)), [-1], [1, 1])


def test_complex_hopping_rejected_for_model_one():
    with pytest.raises(ValueError):
        ModelOneSpec(np.array([[0, 1j], [-1j, 0]]), [-1, -1])


def test_chain_builder_is_tridiagonal():
    spec = build_standard_lattice("chain", 3, 1.0, U=-1.0)
    expected = np.array([[0, 1, 0], [1, 0, 1], [0, 1, 0]], dtype=float)
    assert np.array_equal(spec.hopping, expected)
    assert np.array_equal(spec.interactions, [-1, -1, -1])


def test_ring_builder_adds_closing_bond():
    spec = build_standard_lattice("ring", 3, 1.0, U=-1.0)
    chain = build_standard_lattice("chain", 3, 1.0, U=-1.0)
    diff = spec.hopping - chain.hopping
    assert diff[0, 2] == 1.0 and diff[2, 0] == 1.0
    assert np.count_nonzero(diff) == 2


def test_complete_builder_fills_off_diagonal():
    spec = build_standard_lattice("complete", 4, 1.0, U=-1.0)
    expected = np.ones((4, 4)) - np.eye(4)
    assert np.array_equal(spec.hopping, expected)


def test_builder_rejects_bad_arguments():
    with pytest.raises(ValueError):
        build_standard_lattice("chain", 0, 1.0, U=-1.0)
    with pytest.raises(ValueError):
        build_standard_lattice("chain", 2, 0.0, U=-1.0)
    with pytest.raises(ValueError):
        build_standard_lattice("chain", 2, 1.0)  # no interaction flavor
    with pytest.raises(ValueError):
        build_standard_lattice("chain", 2, 1.0, U=-1.0, U1=-1.0, U2=1.0)
    with pytest.raises(ValueError):
        build_standard_lattice("moebius", 3, 1.0, U=-1.0)


@pytest.mark.parametrize("kind", ["chain", "ring", "complete"])
@pytest.mark.parametrize("L", range(2, 7))
def test_standard_lattices_validate(kind, L):
    assert validate_spec(build_standard_lattice(kind, L, 0.7, U=-0.5)).ok
    assert validate_spec(build_standard_lattice(kind, L, 0.7, U1=-0.5, U2=0.5)).ok


def _reachable_by_matrix_powers(adj):
    # sum_{k<L} (|t|>0)^k has a nonzero first row iff site 0 reaches everyone
    L = adj.shape[0]
    reach = np.eye(L, dtype=bool)
    power = np.eye(L, dtype=bool)
    for _ in range(L - 1):
        power = power @ adj
        reach |= power.astype(bool)
    return bool(reach[0].all())


def test_connectivity_matches_reachability_on_all_small_graphs():
    for L in range(1, 6):
        pairs = list(itertools.combinations(range(L), 2))
        for mask in range(2 ** len(pairs)):
            t = np.zeros((L, L))
            for b, (i, j) in enumerate(pairs):
                if mask >> b & 1:
                    t[i, j] = t[j, i] = 1.0
            adj = (np.abs(t) > 0) & ~np.eye(L, dtype=bool)
            assert bond_connected(t) == _reachable_by_matrix_powers(adj)


def test_diagonal_entries_do_not_affect_connectivity():
    t = np.diag([1.0, 2.0])
    assert not bond_connected(t)
    t = np.array([[5.0, 1.0], [1.0, -3.0]])
    assert bond_connected(t)
