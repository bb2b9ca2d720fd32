import io
import itertools
import math

import pytest

from listved.codes import ConvCode, SignalMapping, enumerate_events, free_distance
from listved.errors import DuplicateAlternative, InvalidConfig, NotReached
from listved.geometry import ved
from listved.listmin import (
    assemble,
    min_ved,
    min_ved_exhaustive,
    min_ved_over,
    minimal_list_size,
    write_csv,
)

K57 = ConvCode.from_octal("5", "7")
POOL = enumerate_events(K57, 8, 20)


def scan_oracle(events, L, window):
    """Plain scan over every L-subset of shifted events, solved one at a time."""
    items = [(e, o) for e in events for o in range(window + 1)]
    best = math.inf
    for combo in itertools.combinations(items, L):
        try:
            p = assemble(combo)
        except DuplicateAlternative:
            continue
        best = min(best, ved(p, "iterative").ved)
    return best


def test_assemble_examples():
    e5 = POOL[0]
    assert ved(assemble([(e5, 0)])).ved == pytest.approx(math.sqrt(5))
    p = assemble([(e5, 0), (e5, 3)])
    assert p.gram[0, 1] == 0.0
    assert ved(p).ved == pytest.approx(math.sqrt(10), rel=1e-12)
    with pytest.raises(DuplicateAlternative):
        assemble([(e5, 1), (e5, 1)])


@pytest.mark.parametrize(
    "L, expected",
    [(1, math.sqrt(5)), (2, math.sqrt(50 / 7)), (3, math.sqrt(8))],
)
def test_min_ved_57(L, expected):
    spec = min_ved(K57, L, 8, 20, 8)
    assert spec.min_ved == pytest.approx(expected, rel=1e-12)
    assert spec.exact
    # the witness reproduces the value when re-solved from scratch
    p = assemble((spec.events[e], o) for e, o in spec.witness)
    assert ved(p, "iterative").ved == pytest.approx(spec.min_ved, rel=1e-9)
    assert any(o == 0 for _, o in spec.witness)


def test_bracket_L2():
    v = min_ved(K57, 2, 8, 20, 8).min_ved
    assert math.sqrt(5) < v <= math.sqrt(10)


@pytest.mark.parametrize("L, window", [(2, 4), (3, 3), (2, 0), (4, 2)])
def test_branch_and_bound_matches_scan(L, window):
    spec = min_ved_over(POOL, L, window)
    value, witness = min_ved_exhaustive(POOL, L, window)
    assert spec.min_ved == pytest.approx(value, rel=1e-12)
    assert spec.witness == witness


@pytest.mark.parametrize("L, window", [(2, 2), (3, 1)])
def test_branch_and_bound_matches_plain_scan(L, window):
    events = POOL[:6]
    assert min_ved_over(events, L, window).min_ved == pytest.approx(scan_oracle(events, L, window), rel=1e-9)


def test_monotone_in_L():
    values = [min_ved_over(POOL, L, 6).min_ved for L in range(1, 5)]
    assert all(b >= a - 1e-12 for a, b in zip(values, values[1:]))


def test_energy_scaling():
    a = min_ved_over(POOL, 2, 4).min_ved
    b = min_ved_over(POOL, 2, 4, SignalMapping(9.0)).min_ved
    assert b == pytest.approx(3 * a, rel=1e-12)


def test_window_saturates():
    # shifts beyond the longest event support stop mattering for pairs
    a = min_ved_over(POOL[:8], 2, 8).min_ved
    b = min_ved_over(POOL[:8], 2, 14).min_ved
    assert a == pytest.approx(b, rel=1e-12)


def test_node_cap_marks_inexact():
    spec = min_ved(K57, 3, 8, 20, 8, node_cap=5)
    assert not spec.exact
    assert spec.min_ved >= math.sqrt(8) - 1e-12


def test_incomplete_pool_is_inexact():
    assert not min_ved(K57, 1, 8, 8, 4).exact
    assert min_ved(K57, 1, 8, 20, 4).exact


def test_too_few_alternatives():
    with pytest.raises(InvalidConfig):
        min_ved_exhaustive(POOL[:1], 2, 0)
    with pytest.raises(InvalidConfig):
        min_ved_over(POOL, 0, 3)


def crossing_oracle(code, depth, max_weight=8, B_max=8):
    events = enumerate_events(code, max_weight, depth, include_unmerged=True)
    target = math.sqrt(free_distance(code))
    for B in range(1, B_max + 1):
        if scan_oracle(events, B, depth) >= target - 1e-9:
            return B
    return None


@pytest.mark.parametrize("depth, B", [(2, 4), (3, 4), (4, 3), (5, 2), (6, 1)])
def test_minimal_list_size(depth, B):
    res = minimal_list_size(K57, 8, depth, depth)
    assert res.B == B
    assert res.target == pytest.approx(math.sqrt(5))
    if depth >= 4:
        assert crossing_oracle(K57, depth) == B
    assert all(s.min_ved < res.target for s in res.table[:-1])


def test_minimal_list_size_small_target():
    assert minimal_list_size(K57, 8, 3, 3, target=0.0).B == 1


def test_not_reached():
    with pytest.raises(NotReached):
        minimal_list_size(K57, 8, 2, 2, B_max=2)


def test_write_csv():
    specs = [min_ved(K57, L, 8, 20, 4) for L in (1, 2)]
    buf = io.StringIO()
    write_csv(specs, buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "L,min_ved,exact,witness"
    assert lines[1].startswith("1,2.23606798,true,")
