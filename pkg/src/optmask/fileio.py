"""Plain-text file formats: mask sets, graphs, binary matrices, intensity dumps."""
from __future__ import annotations

import csv
import hashlib
import re
from pathlib import Path

import numpy as np

from .masks import IncidenceMatrix
from .optics import IntensityField
from .solver import GraphInstance


class ParseError(ValueError):
    def __init__(self, path, line: int, message: str) -> None:
        self.path = str(path)
        self.line = line
        super().__init__(f"{path}:{line}: {message}")


def _lines(path) -> list[str]:
    return Path(path).read_text(encoding="utf-8").splitlines()


# --- mask sets ----------------------------------------------------------


def format_maskset(m: IncidenceMatrix) -> str:
    out = ["MASKSET v1", f"kind={m.kind} n={m.n} rows={m.rows} cols={m.cols}"]
    out.extend(m.row_string(r) for r in range(m.rows))
    out.extend("label=" + ",".join(map(str, lab)) for lab in m.row_labels)
    return "\n".join(out) + "\n"


def write_maskset(m: IncidenceMatrix, path) -> Path:
    path = Path(path)
    path.write_text(format_maskset(m), encoding="utf-8")
    return path


_HEADER = re.compile(r"kind=(hamiltonian|permanent) n=(\d+) rows=(\d+) cols=(\d+)")


def read_maskset(path) -> IncidenceMatrix:
    lines = _lines(path)
    if not lines or lines[0] != "MASKSET v1":
        raise ParseError(path, 1, "expected 'MASKSET v1'")
    if len(lines) < 2 or not (hdr := _HEADER.fullmatch(lines[1])):
        raise ParseError(path, 2, "expected 'kind=<kind> n=<n> rows=<r> cols=<c>'")
    kind, n, rows, cols = hdr.group(1), *(int(g) for g in hdr.groups()[1:])
    if len(lines) != 2 + 2 * rows:
        raise ParseError(path, len(lines), f"expected {2 + 2 * rows} lines, found {len(lines)}")
    dense = np.zeros((rows, cols), dtype=np.uint8)
    for r in range(rows):
        text = lines[2 + r]
        if len(text) != cols or set(text) - {"0", "1"}:
            raise ParseError(path, 3 + r, f"expected {cols} characters of 0/1")
        dense[r] = np.frombuffer(text.encode(), dtype=np.uint8) - ord("0")
    labels = []
    for r in range(rows):
        ln = 3 + rows + r
        text = lines[ln - 1]
        if not re.fullmatch(r"label=\d+(,\d+)*", text):
            raise ParseError(path, ln, "expected 'label=<comma-separated integers>'")
        labels.append(tuple(int(x) for x in text[6:].split(",")))
    m = IncidenceMatrix.from_dense(kind, n, dense, labels)
    try:
        m.validate()
    except ValueError as exc:
        raise ParseError(path, 2, f"inconsistent mask set: {exc}") from exc
    return m


# --- problem instances --------------------------------------------------


def read_graph(path) -> GraphInstance:
    lines = _lines(path)
    if not lines or not (hdr := re.fullmatch(r"GRAPH n=(\d+)", lines[0].strip())):
        raise ParseError(path, 1, "expected 'GRAPH n=<n>'")
    n = int(hdr.group(1))
    edges = set()
    for ln, text in enumerate(lines[1:], start=2):
        if not text.strip():
            continue
        parts = text.split()
        if len(parts) != 2 or not all(p.isdigit() for p in parts):
            raise ParseError(path, ln, f"expected 'i j', got {text!r}")
        s, d = int(parts[0]), int(parts[1])
        if not (1 <= s <= n and 1 <= d <= n) or s == d:
            raise ParseError(path, ln, f"invalid edge {s} {d} for n={n}")
        edges.add((s, d))
    return GraphInstance(n, frozenset(edges))


def format_graph(g: GraphInstance) -> str:
    lines = [f"GRAPH n={g.n}"] + [f"{s} {d}" for s, d in sorted(g.present_edges)]
    return "\n".join(lines) + "\n"


def read_binmat(path) -> np.ndarray:
    lines = _lines(path)
    if not lines or not (hdr := re.fullmatch(r"BINMAT n=(\d+)", lines[0].strip())):
        raise ParseError(path, 1, "expected 'BINMAT n=<n>'")
    n = int(hdr.group(1))
    body = lines[1:]
    while body and not body[-1].strip():
        body.pop()
    if len(body) != n:
        raise ParseError(path, len(lines), f"expected {n} matrix rows, found {len(body)}")
    a = np.zeros((n, n), dtype=np.uint8)
    for i, text in enumerate(body):
        text = text.strip()
        if len(text) != n or set(text) - {"0", "1"}:
            raise ParseError(path, i + 2, f"expected {n} characters of 0/1")
        a[i] = [int(ch) for ch in text]
    return a


def format_binmat(a: np.ndarray) -> str:
    a = np.asarray(a)
    return "\n".join([f"BINMAT n={a.shape[0]}"] + ["".join(map(str, r)) for r in a.tolist()]) + "\n"


# --- optics output and config -------------------------------------------


def write_field_csv(f: IntensityField, path) -> Path:
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["row", "col", "intensity"])
        for (i, j), value in np.ndenumerate(f.values):
            w.writerow([i, j, f"{value:.17g}"])
    return path


def read_config(path) -> dict[str, str]:
    """``key=value`` lines; ``#`` comments and blank lines ignored."""
    out = {}
    for ln, text in enumerate(_lines(path), start=1):
        text = text.split("#", 1)[0].strip()
        if not text:
            continue
        key, sep, value = text.partition("=")
        if not sep or not key.strip():
            raise ParseError(path, ln, f"expected 'key=value', got {text!r}")
        out[key.strip().replace("-", "_")] = value.strip()
    return out


def file_digest(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()
