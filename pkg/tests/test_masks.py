import math

import numpy as np
import pytest

from optmask.masks import (
    CopyLedger,
    IncidenceMatrix,
    build_base_hamiltonian,
    build_hamiltonian,
    build_permanent,
    decode_row,
    edge_index,
    extend_hamiltonian,
    hamiltonian_edges,
    row_to_solution,
)

from .conftest import PAPER_M2, PAPER_M3, PAPER_M4, brute_force_cycle_vectors


def rows_of(m):
    return [m.row_string(r) for r in range(m.rows)]


def test_edge_index_matches_lexicographic_rank():
    for n in range(2, 8):
        for k, (s, d) in enumerate(hamiltonian_edges(n)):
            assert edge_index(n, s, d) == k
    with pytest.raises(ValueError):
        edge_index(4, 2, 2)


def test_base_matrix_is_paper_m3():
    m = build_base_hamiltonian()
    assert rows_of(m) == PAPER_M3
    assert (m.array.sum(axis=1) == 3).all()
    assert set(m.row_labels) == {(1, 2, 3), (1, 3, 2)}
    assert {decode_row(m, r) for r in range(m.rows)} == {(1, 2, 3), (1, 3, 2)}


def test_extend_base_gives_paper_m4_row_set():
    m = extend_hamiltonian(build_base_hamiltonian(), CopyLedger())
    assert (m.rows, m.cols) == (6, 12)
    assert sorted(rows_of(m)) == sorted(PAPER_M4)


def test_extend_twice_gives_all_five_vertex_cycles():
    ledger = CopyLedger()
    m = extend_hamiltonian(extend_hamiltonian(build_base_hamiltonian(), ledger), ledger)
    assert (m.rows, m.cols) == (24, 20)
    oracle = brute_force_cycle_vectors(5)
    assert len(oracle) == 24
    assert {s: oracle[s] for s in rows_of(m)} == oracle
    assert {decode_row(m, r) for r in range(m.rows)} == set(oracle.values())


def test_extend_rejects_permanent():
    with pytest.raises(ValueError):
        extend_hamiltonian(build_permanent(3), CopyLedger())


@pytest.mark.parametrize("n", [3, 4, 5, 6])
def test_row_set_matches_enumeration(n):
    m = build_hamiltonian(n)
    oracle = brute_force_cycle_vectors(n)
    assert sorted(rows_of(m)) == sorted(oracle)
    for r in range(m.rows):
        assert oracle[m.row_string(r)] == m.row_labels[r]


def test_build_sizes_and_weights():
    assert build_hamiltonian(3) == build_base_hamiltonian()
    m5 = build_hamiltonian(5)
    assert (m5.rows, m5.cols) == (24, 20)
    m6 = build_hamiltonian(6)
    assert m6.rows == 120
    assert (m6.array.sum(axis=1) == 6).all()
    m6.validate()


def test_row_zero_is_identity_cycle():
    for n in range(3, 8):
        assert build_hamiltonian(n).row_labels[0] == tuple(range(1, n + 1))


@pytest.mark.parametrize("n", [2, 1, 0, 13])
def test_build_rejects_out_of_range(n):
    with pytest.raises(ValueError):
        build_hamiltonian(n)


def test_permanent_matrix():
    p2 = build_permanent(2)
    assert rows_of(p2) == PAPER_M2
    assert rows_of(build_permanent(1)) == ["1"]
    p3 = build_permanent(3)
    assert (p3.rows, p3.cols) == (6, 9)
    assert (p3.array.sum(axis=0) == 2).all()
    assert list(p3.row_labels) == sorted(p3.row_labels)
    for n in range(1, 6):
        build_permanent(n).validate()


def test_permanent_rows_have_one_per_source_group():
    p = build_permanent(4)
    groups = p.array.reshape(p.rows, 4, 4)
    assert (groups.sum(axis=2) == 1).all()


def test_row_to_solution(m4, p2):
    assert row_to_solution(m4, 0) == (1, 2, 3, 4)
    assert row_to_solution(build_hamiltonian(3), 1) == (1, 3, 2)
    assert row_to_solution(p2, 1) == (2, 1)
    with pytest.raises(IndexError):
        row_to_solution(m4, 6)
    with pytest.raises(IndexError):
        row_to_solution(m4, -1)


def test_row_to_solution_detects_label_corruption(m4):
    labels = list(m4.row_labels)
    labels[0], labels[1] = labels[1], labels[0]
    bad = IncidenceMatrix.from_dense("hamiltonian", 4, m4.array, labels)
    with pytest.raises(ValueError):
        row_to_solution(bad, 0)


def test_packed_storage_pads_with_zero_bits():
    m = build_hamiltonian(4)  # 12 columns -> 2 bytes, 4 padding bits
    assert m.bits.shape == (6, 2)
    assert not (m.bits[:, 1] & 0x0F).any()
    assert not m.array.flags.writeable


@pytest.mark.parametrize("n", range(3, 10))
def test_copy_accounting(n):
    ledger = CopyLedger()
    m = build_hamiltonian(n, ledger)
    assert ledger.elements_written == math.factorial(n - 1) * n * (n - 1) == m.rows * m.cols
    assert ledger.block_copies <= 2 * n**4


def test_elements_per_copy_strictly_increasing():
    ratios = []
    for n in range(5, 10):
        ledger = CopyLedger()
        build_hamiltonian(n, ledger)
        ratios.append(ledger.elements_per_copy)
    assert all(a < b for a, b in zip(ratios, ratios[1:]))


def test_ledger_merge_is_associative():
    a, b, c = CopyLedger(3, 10), CopyLedger(5, 20), CopyLedger(7, 5)
    assert (a + b) + c == a + (b + c)


def test_deterministic():
    a, b = build_hamiltonian(7), build_hamiltonian(7)
    assert a == b
    assert np.array_equal(a.bits, b.bits)
