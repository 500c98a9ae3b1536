"""Incidence matrices for Hamiltonian-cycle and binary-permanent mask sets.

A mask set is a binary matrix whose rows are candidate solutions (directed
Hamiltonian cycles through vertex 1, or permutations) and whose columns are
edges (or matrix positions).  Column ``k`` of the matrix is the physical mask
for edge ``k``: it is opaque exactly on the pixels of solutions that use it.

Hamiltonian matrices are synthesised the way an optical copier would do it,
by whole-column copies and constant fills, and every such operation is
counted in a :class:`CopyLedger`.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Literal, Sequence

import numpy as np

Kind = Literal["hamiltonian", "permanent"]
Edge = tuple[int, int]

MAX_HAMILTONIAN_N = 12
MAX_PERMANENT_N = 8


def hamiltonian_edges(n: int) -> list[Edge]:
    """All directed loopless edges on ``n`` vertices, in column order."""
    return [(s, d) for s in range(1, n + 1) for d in range(1, n + 1) if s != d]


def permanent_positions(n: int) -> list[Edge]:
    """All positions ``(i, j)`` of an ``n x n`` matrix, in column order."""
    return [(i, j) for i in range(1, n + 1) for j in range(1, n + 1)]


def edge_index(n: int, src: int, dst: int) -> int:
    """Column index of the directed edge ``src -> dst`` in a size-``n`` Hamiltonian matrix."""
    if not (1 <= src <= n and 1 <= dst <= n) or src == dst:
        raise ValueError(f"invalid edge ({src}, {dst}) for n={n}")
    return (src - 1) * (n - 1) + (dst - 1 if dst < src else dst - 2)


def position_index(n: int, row: int, col: int) -> int:
    if not (1 <= row <= n and 1 <= col <= n):
        raise ValueError(f"invalid position ({row}, {col}) for n={n}")
    return (row - 1) * n + (col - 1)


@dataclass
class CopyLedger:
    """Counts the block operations spent synthesising a matrix.

    ``block_copies`` counts whole-column copies and constant column fills;
    ``elements_written`` is the size of the last matrix produced.
    """

    block_copies: int = 0
    elements_written: int = 0

    def __add__(self, other: CopyLedger) -> CopyLedger:
        return CopyLedger(
            self.block_copies + other.block_copies,
            max(self.elements_written, other.elements_written),
        )

    @property
    def elements_per_copy(self) -> float:
        return self.elements_written / self.block_copies if self.block_copies else 0.0


@dataclass(frozen=True, eq=False)
class IncidenceMatrix:
    """Immutable binary incidence matrix with packed row-major storage.

    ``bits`` holds ``np.packbits`` rows, so each row is padded with zero bits
    up to a byte boundary.  ``array`` gives the unpacked ``rows x cols``
    ``uint8`` view.
    """

    kind: Kind
    n: int
    rows: int
    cols: int
    bits: np.ndarray
    row_labels: tuple[tuple[int, ...], ...]

    @classmethod
    def from_dense(
        cls, kind: Kind, n: int, dense: np.ndarray, row_labels: Sequence[Sequence[int]]
    ) -> IncidenceMatrix:
        dense = np.asarray(dense, dtype=np.uint8)
        if dense.ndim != 2:
            raise ValueError("incidence matrix must be two-dimensional")
        if len(row_labels) != dense.shape[0]:
            raise ValueError("one label per row required")
        bits = np.packbits(dense, axis=1)
        bits.flags.writeable = False
        return cls(
            kind=kind,
            n=n,
            rows=dense.shape[0],
            cols=dense.shape[1],
            bits=bits,
            row_labels=tuple(tuple(int(x) for x in lab) for lab in row_labels),
        )

    @cached_property
    def array(self) -> np.ndarray:
        dense = np.unpackbits(self.bits, axis=1, count=self.cols)
        dense.flags.writeable = False
        return dense

    @property
    def columns(self) -> list[Edge]:
        if self.kind == "hamiltonian":
            return hamiltonian_edges(self.n)
        return permanent_positions(self.n)

    def column_index(self, src: int, dst: int) -> int:
        if self.kind == "hamiltonian":
            return edge_index(self.n, src, dst)
        return position_index(self.n, src, dst)

    def row_string(self, r: int) -> str:
        return "".join("1" if b else "0" for b in self.array[r])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, IncidenceMatrix):
            return NotImplemented
        return (
            self.kind == other.kind
            and self.n == other.n
            and self.rows == other.rows
            and self.cols == other.cols
            and np.array_equal(self.bits, other.bits)
            and self.row_labels == other.row_labels
        )

    __hash__ = None  # type: ignore[assignment]

    def validate(self) -> None:
        """Check the structural invariants; raises ``ValueError`` on violation."""
        n, a = self.n, self.array
        if self.kind == "hamiltonian":
            expected = (math.factorial(n - 1), n * (n - 1))
        else:
            expected = (math.factorial(n), n * n)
        if (self.rows, self.cols) != expected:
            raise ValueError(f"shape {(self.rows, self.cols)} != {expected}")
        if np.any(a.sum(axis=1) != n):
            raise ValueError("every row must have exactly n ones")
        if len(set(self.row_labels)) != self.rows:
            raise ValueError("row labels are not distinct")
        for r in range(self.rows):
            if decode_row(self, r) != self.row_labels[r]:
                raise ValueError(f"row {r} does not match its label")


def cycle_columns(n: int, cycle: Sequence[int]) -> list[int]:
    """Column indices of the edges of a closed cycle given as a vertex sequence."""
    return [edge_index(n, a, b) for a, b in zip(cycle, (*cycle[1:], cycle[0]))]


def decode_row(m: IncidenceMatrix, r: int) -> tuple[int, ...]:
    """Recover a row's solution from its bits alone (ignores ``row_labels``)."""
    if not 0 <= r < m.rows:
        raise IndexError(f"row {r} out of range for {m.rows} rows")
    cols = m.columns
    ones = [cols[k] for k in np.flatnonzero(m.array[r])]
    if m.kind == "permanent":
        image = dict(ones)
        if sorted(image) != list(range(1, m.n + 1)) or len(ones) != m.n:
            raise ValueError(f"row {r} is not a permutation")
        return tuple(image[i] for i in range(1, m.n + 1))
    succ = dict(ones)
    if len(succ) != len(ones) or len(ones) != m.n:
        raise ValueError(f"row {r} is not a Hamiltonian cycle")
    seq = [1]
    while len(seq) < m.n:
        nxt = succ.get(seq[-1])
        if nxt is None or nxt in seq:
            raise ValueError(f"row {r} is not a Hamiltonian cycle")
        seq.append(nxt)
    if succ.get(seq[-1]) != 1:
        raise ValueError(f"row {r} is not a Hamiltonian cycle")
    return tuple(seq)


def row_to_solution(m: IncidenceMatrix, r: int) -> tuple[int, ...]:
    """Stored solution of row ``r``, cross-checked against the row bits."""
    if not 0 <= r < m.rows:
        raise IndexError(f"row {r} out of range for {m.rows} rows")
    label = m.row_labels[r]
    if decode_row(m, r) != label:
        raise ValueError(f"row {r} bits disagree with label {label}")
    return label


def build_base_hamiltonian(ledger: CopyLedger | None = None) -> IncidenceMatrix:
    """The 2 x 6 matrix for n = 3: cycles 1->2->3->1 and 1->3->2->1."""
    labels = [(1, 2, 3), (1, 3, 2)]
    dense = np.zeros((2, 6), dtype=np.uint8)
    for r, cyc in enumerate(labels):
        dense[r, cycle_columns(3, cyc)] = 1
    if ledger is not None:
        # one literal write per column
        ledger.block_copies += dense.shape[1]
        ledger.elements_written = dense.size
    return IncidenceMatrix.from_dense("hamiltonian", 3, dense, labels)


def _insert_before(cycle: tuple[int, ...], v: int, succ: int) -> tuple[int, ...]:
    if succ == 1:
        return (*cycle, v)
    i = cycle.index(succ)
    return (*cycle[:i], v, *cycle[i:])


def extend_hamiltonian(m: IncidenceMatrix, ledger: CopyLedger) -> IncidenceMatrix:
    """Grow the size-n cycle matrix into the size-(n+1) one.

    The new vertex ``v = n+1`` is spliced into each old cycle immediately
    before vertex ``b``, for ``b = 1..n``.  New row ``r*n + (b-1)`` holds old
    cycle ``r`` with that splice, so row 0 is always ``1 -> 2 -> ... -> v``.

    For a fixed ``b`` every new column is either a verbatim copy of one old
    column or a constant, so block ``b`` costs ``n(n+1)`` column operations:

    * ``(x, y)`` with ``y != b``: copy of old ``(x, y)``
    * ``(x, b)``: zeros (the edge into ``b`` is replaced)
    * ``(a, v)``: copy of old ``(a, b)``; zeros for ``a == b``
    * ``(v, y)``: ones for ``y == b``, zeros otherwise
    """
    if m.kind != "hamiltonian":
        raise ValueError(f"cannot extend a {m.kind} matrix")
    n, v = m.n, m.n + 1
    old = m.array
    new = np.empty((m.rows, n, v * n), dtype=np.uint8)
    ops = 0
    for b in range(1, n + 1):
        block = new[:, b - 1, :]
        for x, y in hamiltonian_edges(v):
            col = edge_index(v, x, y)
            if x != v and y != v:
                if y == b:
                    block[:, col] = 0
                else:
                    block[:, col] = old[:, edge_index(n, x, y)]
            elif y == v:
                if x == b:
                    block[:, col] = 0
                else:
                    block[:, col] = old[:, edge_index(n, x, b)]
            else:
                block[:, col] = 1 if y == b else 0
            ops += 1
    dense = new.reshape(m.rows * n, v * n)
    labels = [_insert_before(cyc, v, b) for cyc in m.row_labels for b in range(1, n + 1)]
    ledger.block_copies += ops
    ledger.elements_written = dense.size
    return IncidenceMatrix.from_dense("hamiltonian", v, dense, labels)


def build_hamiltonian(n: int, ledger: CopyLedger | None = None) -> IncidenceMatrix:
    """Hamiltonian-cycle mask matrix for ``n`` vertices by iterated extension."""
    if n < 3:
        raise ValueError(f"n must be at least 3, got {n}")
    if n > MAX_HAMILTONIAN_N:
        raise ValueError(f"n={n} exceeds supported maximum {MAX_HAMILTONIAN_N}")
    if ledger is None:
        ledger = CopyLedger()
    m = build_base_hamiltonian(ledger)
    while m.n < n:
        m = extend_hamiltonian(m, ledger)
    return m


def build_permanent(n: int) -> IncidenceMatrix:
    """Permutation mask matrix: row sigma has ones at positions (i, sigma(i))."""
    if n < 1:
        raise ValueError(f"n must be at least 1, got {n}")
    if n > MAX_PERMANENT_N:
        raise ValueError(f"n={n} exceeds supported maximum {MAX_PERMANENT_N}")
    perms = list(itertools.permutations(range(1, n + 1)))
    idx = np.array(perms, dtype=np.int64) - 1
    dense = np.zeros((len(perms), n * n), dtype=np.uint8)
    rows = np.arange(len(perms))[:, None]
    dense[rows, np.arange(n) * n + idx] = 1
    return IncidenceMatrix.from_dense("permanent", n, dense, perms)
