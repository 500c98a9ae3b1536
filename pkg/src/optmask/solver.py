"""Evaluating graphs and binary matrices against mask sets.

Stacking the masks of all *absent* edges over the pixel plane is the same as
multiplying the incidence matrix by the 0/1 "edge missing" vector: a pixel
transmits iff its row product is zero.  The brute-force oracles here share no
code with that path.
"""
from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .masks import Edge, IncidenceMatrix, edge_index, hamiltonian_edges

MAX_ORACLE_HAMILTONIAN_N = 9
MAX_ORACLE_PERMANENT_N = 20


@dataclass(frozen=True)
class GraphInstance:
    n: int
    present_edges: frozenset[Edge] = field(default_factory=frozenset)

    def __post_init__(self) -> None:
        edges = frozenset((int(s), int(d)) for s, d in self.present_edges)
        for s, d in edges:
            if not (1 <= s <= self.n and 1 <= d <= self.n) or s == d:
                raise ValueError(f"invalid edge ({s}, {d}) for n={self.n}")
        object.__setattr__(self, "present_edges", edges)

    @classmethod
    def complete(cls, n: int) -> GraphInstance:
        return cls(n, frozenset(hamiltonian_edges(n)))

    @classmethod
    def without(cls, n: int, missing: set[Edge] | list[Edge]) -> GraphInstance:
        """Complete digraph minus the given edges."""
        return cls(n, frozenset(hamiltonian_edges(n)) - set(missing))

    @property
    def absent_edges(self) -> list[Edge]:
        return [e for e in hamiltonian_edges(self.n) if e not in self.present_edges]


def edge_vector(g: GraphInstance) -> np.ndarray:
    """0 for present edges, 1 for absent ones, in column order."""
    return np.array(
        [0 if e in g.present_edges else 1 for e in hamiltonian_edges(g.n)], dtype=np.uint8
    )


def mask_selection(g: GraphInstance) -> tuple[int, ...]:
    """Column indices of the masks to stack: one per absent edge, ascending."""
    return tuple(edge_index(g.n, s, d) for s, d in g.absent_edges)


def selection_vector(m: IncidenceMatrix, selected) -> np.ndarray:
    v = np.zeros(m.cols, dtype=np.uint8)
    sel = list(selected)
    if sel and (min(sel) < 0 or max(sel) >= m.cols):
        raise ValueError(f"mask selection out of range for {m.cols} columns")
    v[sel] = 1
    return v


def permanent_vector(a: np.ndarray) -> np.ndarray:
    """Negated, row-major flattening of a binary matrix."""
    a = as_binary_matrix(a)
    return (1 - a).reshape(-1).astype(np.uint8)


def as_binary_matrix(a) -> np.ndarray:
    arr = np.asarray(a)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {arr.shape}")
    if not np.isin(arr, (0, 1)).all():
        raise ValueError("matrix entries must be 0 or 1")
    return arr.astype(np.uint8)


def multiply(m: IncidenceMatrix, v: np.ndarray) -> np.ndarray:
    """Per-row count of selected masks blocking that pixel.

    ``v`` may also be a 2-D batch of shape ``(cols, k)``.
    """
    v = np.asarray(v)
    if v.shape[0] != m.cols:
        raise ValueError(f"vector length {v.shape[0]} != matrix columns {m.cols}")
    return m.array.astype(np.int64) @ v.astype(np.int64)


@dataclass(frozen=True)
class HamiltonianResult:
    exists: bool
    witness_rows: tuple[int, ...]
    blocking_counts: np.ndarray = field(repr=False, compare=False)

    def cycles(self, m: IncidenceMatrix) -> list[tuple[int, ...]]:
        return [m.row_labels[r] for r in self.witness_rows]

    def histogram(self) -> dict[int, int]:
        return dict(sorted(Counter(self.blocking_counts.tolist()).items()))


def decide_hamiltonian(m: IncidenceMatrix, g: GraphInstance) -> HamiltonianResult:
    if m.kind != "hamiltonian":
        raise ValueError(f"expected a hamiltonian mask set, got {m.kind}")
    if m.n != g.n:
        raise ValueError(f"mask set is for n={m.n}, graph has n={g.n}")
    counts = multiply(m, edge_vector(g))
    witnesses = tuple(int(r) for r in np.flatnonzero(counts == 0))
    return HamiltonianResult(bool(witnesses), witnesses, counts)


def permanent(m: IncidenceMatrix, a) -> int:
    """Number of transmitting pixels when stacking the masks of the zero entries."""
    a = as_binary_matrix(a)
    if m.kind != "permanent":
        raise ValueError(f"expected a permanent mask set, got {m.kind}")
    if m.n != a.shape[0]:
        raise ValueError(f"mask set is for n={m.n}, matrix has n={a.shape[0]}")
    return int(np.count_nonzero(multiply(m, permanent_vector(a)) == 0))


def permanent_batch(m: IncidenceMatrix, mats: np.ndarray) -> np.ndarray:
    """Vectorised :func:`permanent` over a stack of matrices ``(k, n, n)``."""
    mats = np.asarray(mats, dtype=np.uint8)
    if mats.ndim != 3 or mats.shape[1:] != (m.n, m.n):
        raise ValueError(f"expected shape (k, {m.n}, {m.n}), got {mats.shape}")
    vs = (1 - mats).reshape(mats.shape[0], -1).T
    return np.count_nonzero(multiply(m, vs) == 0, axis=0)


# --- independent oracles -------------------------------------------------


@dataclass(frozen=True)
class OracleResult:
    exists: bool
    all_cycles: tuple[tuple[int, ...], ...]


def oracle_hamiltonian(g: GraphInstance) -> OracleResult:
    """All directed Hamiltonian cycles of ``g`` that start at vertex 1."""
    if g.n > MAX_ORACLE_HAMILTONIAN_N:
        raise ValueError(f"oracle limited to n <= {MAX_ORACLE_HAMILTONIAN_N}")
    edges = g.present_edges
    found = []
    for tail in itertools.permutations(range(2, g.n + 1)):
        seq = (1, *tail)
        if all((seq[i], seq[(i + 1) % g.n]) in edges for i in range(g.n)):
            found.append(seq)
    return OracleResult(bool(found), tuple(found))


def oracle_permanent(a) -> int:
    """Ryser's inclusion-exclusion formula, walking subsets in Gray-code order."""
    rows = [[int(x) for x in r] for r in np.asarray(a).tolist()]
    n = len(rows)
    if any(len(r) != n for r in rows):
        raise ValueError("matrix must be square")
    if n > MAX_ORACLE_PERMANENT_N:
        raise ValueError(f"oracle limited to n <= {MAX_ORACLE_PERMANENT_N}")
    if n == 0:
        return 1
    row_sums = [0] * n
    total = 0
    gray = 0
    for k in range(1, 1 << n):
        j = (k & -k).bit_length() - 1
        gray ^= 1 << j
        sign = 1 if gray >> j & 1 else -1
        for i in range(n):
            row_sums[i] += sign * rows[i][j]
        prod = math.prod(row_sums)
        total += -prod if (n - bin(gray).count("1")) % 2 else prod
    return total


def permanent_by_enumeration(a) -> int:
    """Sum over all n! permutations; second, slower cross-check."""
    rows = np.asarray(a).tolist()
    n = len(rows)
    return sum(
        all(rows[i][s[i]] for i in range(n)) for s in itertools.permutations(range(n))
    )
