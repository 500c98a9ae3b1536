import itertools

import pytest

from optmask.masks import build_hamiltonian, build_permanent, hamiltonian_edges

# Mask matrices as printed in the source publication (columns in lexicographic edge order).
PAPER_M3 = ["100110", "011001"]
PAPER_M4 = [
    "100010001100",
    "100001100001",
    "010001010100",
    "010100001010",
    "001100010001",
    "001010100010",
]
PAPER_M2 = ["1001", "0110"]


def brute_force_cycle_vectors(n):
    """Incidence strings of every directed cycle through vertex 1, by plain enumeration."""
    edges = hamiltonian_edges(n)
    out = {}
    for tail in itertools.permutations(range(2, n + 1)):
        seq = (1, *tail)
        used = {(seq[i], seq[(i + 1) % n]) for i in range(n)}
        out["".join("1" if e in used else "0" for e in edges)] = seq
    return out


@pytest.fixture(scope="session")
def m4():
    return build_hamiltonian(4)


@pytest.fixture(scope="session")
def m5():
    return build_hamiltonian(5)


@pytest.fixture(scope="session")
def p2():
    return build_permanent(2)
