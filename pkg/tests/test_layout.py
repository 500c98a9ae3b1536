import math
import re

import numpy as np
import pytest

from optmask.layout import (
    CombinationLimitError,
    LayoutParams,
    emit_rects,
    emit_svg,
    format_length,
    instance_array,
    mask_geometry,
    rects_document,
    stack_preview,
    svg_document,
)
from optmask.masks import build_hamiltonian, edge_index
from optmask.solver import multiply, selection_vector

M3, M5 = build_hamiltonian(3), build_hamiltonian(5)
BLOCK_V1 = tuple(edge_index(5, 1, j) for j in range(2, 6))


def count_rects(svg: str) -> int:
    return len(re.findall(r"<rect ", svg))


def test_layout_params_validation():
    with pytest.raises(ValueError):
        LayoutParams(pixel_size=0)
    with pytest.raises(ValueError):
        LayoutParams(mask_gap=-1)


def test_n5_mask_geometry():
    for col in range(M5.cols):
        g = mask_geometry(M5, col)
        assert g.open_cells.shape == (5, 5)
        assert g.extent_nm == (15_000, 15_000)
        assert g.open_count == 18
        assert not g.open_cells[4, 4]


def test_n3_mask_geometry():
    g = mask_geometry(M3, 0)
    assert g.open_cells.shape == (2, 2)
    assert not g.open_cells[1].any()  # both filler cells closed
    with pytest.raises(IndexError):
        mask_geometry(M3, 6)


def test_rectangular_override():
    g = mask_geometry(M5, 0, width=6)
    assert g.open_cells.shape == (4, 6)
    assert g.extent_nm == (6 * 3000, 4 * 3000)


def test_mask_rect_positions():
    g = mask_geometry(M5, 0)
    rects = list(g.rects())
    assert len(rects) == 18
    cells = {(y // 3000, x // 3000) for x, y, w, h in rects}
    assert cells == {tuple(map(int, c)) for c in zip(*np.nonzero(g.open_cells))}
    assert all(w == h == 1500 for _, _, w, h in rects)


def test_stack_preview():
    assert stack_preview(M5, ()).open_count == 24
    assert stack_preview(M5, BLOCK_V1).open_count == 0
    for col in (0, 9, 19):
        assert np.array_equal(stack_preview(M5, (col,)).open_cells, mask_geometry(M5, col).open_cells)
    for bad in ((20,), (-1,), (3, 3)):
        with pytest.raises(ValueError):
            stack_preview(M5, bad)


def test_stack_preview_agrees_with_solver():
    rng = np.random.default_rng(1)
    for _ in range(200):
        combo = tuple(sorted(rng.choice(20, size=rng.integers(0, 6), replace=False)))
        opened = stack_preview(M5, combo).open_cells.reshape(-1)[:24]
        assert np.array_equal(opened, multiply(M5, selection_vector(M5, combo)) == 0)


def test_instance_array_paper_case():
    arr = instance_array(5, 4)
    assert len(arr.combos) == 4845
    assert arr.grid_side == 70
    assert (arr.last_row_used, arr.last_row_unused) == (15, 55)
    assert arr.used_cells + arr.unused_cells == 70 * 70
    assert arr.mask_extent_nm == (15_000, 15_000)
    assert arr.extent_nm == (2_100_000, 2_100_000)
    assert arr.combos[0] == (0, 1, 2, 3) and arr.combos[-1] == (16, 17, 18, 19)
    assert list(arr.combos) == sorted(arr.combos)


def test_instance_array_small():
    arr = instance_array(3, 1)
    assert len(arr.combos) == 6 and arr.grid_side == 3 and arr.unused_cells == 3


@pytest.mark.parametrize("n", range(3, 8))
@pytest.mark.parametrize("k", range(0, 5))
def test_grid_arithmetic(n, k):
    count = math.comb(n * (n - 1), k)
    side = math.ceil(math.sqrt(count))
    while side * side < count:
        side += 1
    while (side - 1) ** 2 >= count:
        side -= 1
    arr = instance_array(n, k, m=build_hamiltonian(n))
    assert len(arr.combos) == count
    assert arr.grid_side == side
    assert arr.used_cells + arr.unused_cells == side * side


def test_instance_array_errors():
    with pytest.raises(CombinationLimitError):
        instance_array(6, 10)
    with pytest.raises(ValueError):
        instance_array(3, 7)
    with pytest.raises(CombinationLimitError):
        instance_array(5, 4, limit=4844)


def test_svg_single_mask(tmp_path):
    g = mask_geometry(M5, 3)
    path = emit_svg(g, tmp_path / "mask.svg")
    text = path.read_text()
    assert count_rects(text) == g.open_count + 1
    assert 'viewBox="0 0 15000 15000"' in text


def test_svg_without_apertures_is_background_only():
    assert count_rects(svg_document(stack_preview(M5, BLOCK_V1))) == 1


def test_svg_empty_stack_array():
    # k = 0 holds exactly one instance: the empty stack, fully open
    arr = instance_array(5, 0)
    assert count_rects(svg_document(arr)) == 24 + 1


def test_svg_full_array(tmp_path):
    arr = instance_array(5, 4)
    expected = int(arr.transmitting().sum()) + 1
    text = emit_svg(arr, tmp_path / "array.svg").read_text()
    assert count_rects(text) == expected
    assert 'viewBox="0 0 2100000 2100000"' in text
    # last instance sits at row 69, column 14
    pos = [(int(x), int(y)) for x, y in re.findall(r'<rect x="(\d+)" y="(\d+)"', text)]
    last_row = [x for x, y in pos[1:] if y >= 69 * 30_000]
    assert last_row and max(last_row) < 15 * 30_000


def test_rects_format(tmp_path):
    g = mask_geometry(M5, 0)
    text = emit_rects(g, tmp_path / "m.rects").read_text().splitlines()
    assert text[0] == "RECTS v1"
    assert len(text) == 1 + 18
    assert all(re.fullmatch(r"\d+ \d+ 1500 1500", ln) for ln in text[1:])
    assert rects_document(g) == rects_document(mask_geometry(M5, 0))


def test_emit_reports_path_on_failure(tmp_path):
    bad = tmp_path / "missing" / "x.svg"
    with pytest.raises(OSError, match="missing"):
        emit_svg(mask_geometry(M5, 0), bad)


def test_format_length():
    assert format_length(15_000) == "15um"
    assert format_length(2_100_000) == "2.1mm"
