import pytest

from mbasim import tables
from mbasim.expr import bit_and, bit_or, bit_xor, evaluate, neg, node_count, var


def _truth_index(e, t):
    names = [f"x{i}" for i in range(t)]
    idx = 0
    for i in range(1 << t):
        value = evaluate(e, {names[j]: (i >> j) & 1 for j in range(t)}, 1)
        idx |= (value & 1) << i
    return idx


@pytest.mark.parametrize("t", [1, 2, 3])
def test_every_entry_matches_its_index(t):
    table = tables.load_table(t)
    assert len(table) == 1 << (1 << t)
    for idx, e in enumerate(table):
        assert _truth_index(e, t) == idx


def test_loaded_matches_regenerated_sizes():
    for t in (1, 2, 3):
        regenerated = tables.generate_table(t)
        loaded = tables.load_table(t)
        for idx, e in enumerate(loaded):
            assert node_count(e) == node_count(regenerated[idx])


def _minimal_sizes_two_vars(max_nodes: int) -> dict[int, int]:
    """Independent oracle: bottom-up existence enumeration, one representative
    per (node count, function).  Variable truth masks follow result-vector
    indexing, so x0 is true on assignments 1 and 3."""
    by_size: dict[int, dict[int, object]] = {s: {} for s in range(1, max_nodes + 1)}

    def offer(e, f):
        s = node_count(e)
        if s <= max_nodes and f not in by_size[s]:
            by_size[s][f] = e

    offer(var("x0", 64), 0b1010)
    offer(var("x1", 64), 0b1100)
    for size in range(2, max_nodes + 1):
        for s in range(1, size):
            for f, e in list(by_size[s].items()):
                ne = neg(e)
                if node_count(ne) == size:
                    offer(ne, f ^ 0b1111)
        for s1 in range(1, size):
            for s2 in range(1, size):
                for f1, e1 in list(by_size[s1].items()):
                    for f2, e2 in list(by_size[s2].items()):
                        for op, f in ((bit_and, f1 & f2), (bit_xor, f1 ^ f2),
                                      (bit_or, f1 | f2)):
                            e = op(e1, e2)
                            if node_count(e) == size:
                                offer(e, f)
    first: dict[int, int] = {0b0000: 1, 0b1111: 1}
    for size in sorted(by_size):
        for f in by_size[size]:
            first.setdefault(f, size)
    return first


def test_two_variable_entries_are_node_minimal():
    oracle = _minimal_sizes_two_vars(6)
    table = tables.load_table(2)
    for idx, e in enumerate(table):
        assert node_count(e) == oracle[idx], str(e)


def test_instantiate_renames_and_rewidths():
    e = tables.bitwise_from_truth(0b0110, ("p", "q"), 8)
    assert str(e) == "p^q"
    assert e.width == 8
    allones = tables.bitwise_from_truth(0b1111, ("p", "q"), 8)
    assert allones.value == 255


def test_file_format_roundtrip(tmp_path):
    table = tables.generate_table(2)
    path = tmp_path / "bitwise_2.txt"
    tables.save_table(table, path)
    lines = path.read_text().splitlines()
    assert len(lines) == 16
    assert lines[0] == "0:0"
    for line in lines:
        idx, _, src = line.partition(":")
        assert int(idx) >= 0 and src
