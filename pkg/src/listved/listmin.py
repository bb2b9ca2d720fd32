"""Minimum VED over L-subsets of shifted error events.

The universe is every (event, offset) pair with offset in [0, W].  A subset
and its translates have the same VED, so only subsets containing an
offset-0 member are visited.  Adding a vector can only shrink the CE region,
so the VED of a partial subset lower-bounds every completion of it.
"""

from __future__ import annotations

import csv
import heapq
import logging
import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np

from .codes import (
    ConvCode,
    ErrorEvent,
    SignalMapping,
    enumerate_events,
    event_to_diff,
    free_distance,
    merged_pool_complete,
)
from .errors import DuplicateAlternative, InvalidConfig, NotReached
from .geometry import VedProblem, gram_of, ved_sq_batch

log = logging.getLogger(__name__)

NODE_CAP = 10_000_000
TIE_RTOL = 1e-12


@dataclass(frozen=True)
class ListSpec:
    L: int
    min_ved: float
    witness: tuple[tuple[int, int], ...]
    explored: int
    exact: bool
    events: tuple[ErrorEvent, ...] = field(default=(), repr=False, compare=False)

    def witness_str(self) -> str:
        return ";".join(f"{e}@{o}" for e, o in self.witness)


def assemble(pairs: Iterable[tuple[ErrorEvent, int]], mapping: SignalMapping = SignalMapping()) -> VedProblem:
    vectors = []
    seen = set()
    for event, offset in pairs:
        v = event_to_diff(event, mapping, offset)
        if v in seen:
            raise DuplicateAlternative(f"event {event} at offset {offset} repeats an alternative")
        seen.add(v)
        vectors.append(v)
    return gram_of(vectors)


class _Universe:
    """Distinct shifted events and their pairwise support overlaps."""

    def __init__(self, events: Sequence[ErrorEvent], window: int, mapping: SignalMapping):
        if window < 0:
            raise InvalidConfig("offset window must be >= 0")
        n0s = {len(e.output_bits) // e.steps for e in events}
        if len(n0s) > 1:
            raise InvalidConfig("events come from codes with different n0")
        n0 = n0s.pop() if n0s else 1
        items, masks, seen = [], [], set()
        # event ids follow pool order, which is already sorted by weight
        for eid, ev in enumerate(events):
            for off in range(window + 1):
                m = ev.mask << (off * n0)
                if m in seen:
                    continue
                seen.add(m)
                items.append((eid, off))
                masks.append(m)
        self.events = tuple(events)
        self.items = items
        self.offsets = np.array([o for _, o in items], dtype=np.int64)
        self.energy = 4.0 * mapping.symbol_energy
        n = len(items)
        overlap = np.empty((n, n))
        for i in range(n):
            mi = masks[i]
            overlap[i, i] = bin(mi).count("1")
            for j in range(i + 1, n):
                overlap[i, j] = overlap[j, i] = bin(mi & masks[j]).count("1")
        self.gram = self.energy * overlap

    def __len__(self):
        return len(self.items)

    def ved_sq(self, subsets: np.ndarray) -> np.ndarray:
        subsets = np.asarray(subsets, dtype=np.int64)
        g = self.gram[subsets[:, :, None], subsets[:, None, :]]
        return ved_sq_batch(g)

    def witness(self, subset: Iterable[int]) -> tuple[tuple[int, int], ...]:
        return tuple(sorted(self.items[i] for i in subset))


def _better(v, wit, best, best_w) -> bool:
    # equal values (to TIE_RTOL) fall back to the lexicographically smaller witness
    if best_w is None or v < best * (1.0 - TIE_RTOL):
        return True
    return v <= best * (1.0 + TIE_RTOL) and wit < best_w


def _branch_and_bound(U: _Universe, L: int, node_cap: int):
    """Best-first search; returns (ved_sq, witness, explored, complete)."""
    n = len(U)
    anchors = np.flatnonzero(U.offsets == 0)
    if n < L or anchors.size == 0:
        raise InvalidConfig(f"pool has {n} distinct alternatives, fewer than L={L}")
    explored = 0
    incumbent = math.inf
    best_w = None
    # heap entries: (ved_sq, witness, anchor, others)
    sq0 = U.ved_sq(anchors[:, None])
    explored += anchors.size
    heap = [(float(v), U.witness([a]), int(a), ()) for v, a in zip(sq0, anchors)]
    heapq.heapify(heap)

    # greedy dive for a first incumbent
    if L > 1:
        v, _, a, others = heap[0]
        chosen = [a, *others]
        while len(chosen) < L:
            cand = np.array([q for q in range(n) if q not in chosen and (U.offsets[q] > 0 or q > a)])
            if cand.size == 0:
                break
            vals = U.ved_sq(np.column_stack([np.tile(chosen, (cand.size, 1)), cand]))
            explored += cand.size
            chosen.append(int(cand[int(np.argmin(vals))]))
            v = float(vals.min())
        if len(chosen) == L:
            incumbent, best_w = v, U.witness(chosen)

    complete = True
    while heap:
        v, wit, a, others = heapq.heappop(heap)
        if v > incumbent * (1.0 + TIE_RTOL):
            break
        size = 1 + len(others)
        if size == L:
            if _better(v, wit, incumbent, best_w):
                incumbent, best_w = v, wit
            continue
        if explored >= node_cap:
            complete = False
            break
        last = others[-1] if others else -1
        cand = np.arange(last + 1, n)
        cand = cand[(cand != a) & ((U.offsets[cand] > 0) | (cand > a))]
        if cand.size == 0:
            continue
        base = [a, *others]
        vals = U.ved_sq(np.column_stack([np.tile(base, (cand.size, 1)), cand]))
        explored += cand.size
        for q, cv in zip(cand, vals):
            if cv <= incumbent * (1.0 + TIE_RTOL):
                q = int(q)
                heapq.heappush(heap, (float(cv), U.witness(base + [q]), a, others + (q,)))
    if best_w is None:
        raise InvalidConfig(f"no subset of size {L} found")
    return incumbent, best_w, explored, complete


def min_ved_over(
    events: Sequence[ErrorEvent],
    L: int,
    window: int,
    mapping: SignalMapping = SignalMapping(),
    node_cap: int = NODE_CAP,
) -> ListSpec:
    """Branch-and-bound minimum over an explicit event pool.

    ``exact`` here only reflects whether the search finished; pool
    completeness is certified by :func:`min_ved`.
    """
    if L < 1:
        raise InvalidConfig("L must be >= 1")
    U = _Universe(events, window, mapping)
    v, wit, explored, complete = _branch_and_bound(U, L, node_cap)
    if not complete:
        log.warning("node cap %d reached for L=%d; result is an upper bound", node_cap, L)
    return ListSpec(L, math.sqrt(v), wit, explored, complete, tuple(events))


def min_ved_exhaustive(
    events: Sequence[ErrorEvent],
    L: int,
    window: int,
    mapping: SignalMapping = SignalMapping(),
    chunk: int = 50_000,
) -> tuple[float, tuple[tuple[int, int], ...]]:
    """Scan every subset with an offset-0 member; reference for the search."""
    U = _Universe(events, window, mapping)
    best, best_w = math.inf, None
    buf: list[tuple[int, ...]] = []

    def flush():
        nonlocal best, best_w
        arr = np.array(buf, dtype=np.int64)
        vals = U.ved_sq(arr)
        for i in np.flatnonzero(vals <= vals.min() * (1.0 + TIE_RTOL)):
            w = U.witness(arr[i])
            if _better(float(vals[i]), w, best, best_w):
                best, best_w = float(vals[i]), w
        buf.clear()

    zero = set(np.flatnonzero(U.offsets == 0).tolist())
    for combo in combinations(range(len(U)), L):
        if zero.isdisjoint(combo):
            continue
        buf.append(combo)
        if len(buf) >= chunk:
            flush()
    if buf:
        flush()
    if best_w is None:
        raise InvalidConfig(f"pool has fewer than L={L} distinct alternatives")
    return math.sqrt(best), best_w


def min_ved(
    code: ConvCode,
    L: int,
    max_weight: int,
    max_steps: int,
    window: int,
    include_unmerged: bool = False,
    mapping: SignalMapping = SignalMapping(),
    node_cap: int = NODE_CAP,
) -> ListSpec:
    """Minimum VED over L-subsets of the code's enumerated events.

    ``exact`` certifies global minimality over the pool and window: the
    search ran to completion, the pool holds every event of weight at most
    ``max_weight``, and any excluded event alone already reaches the minimum.
    """
    events = enumerate_events(code, max_weight, max_steps, include_unmerged)
    spec = min_ved_over(events, L, window, mapping, node_cap)
    excluded_floor = math.sqrt(mapping.symbol_energy * (max_weight + 1))
    complete_pool = include_unmerged or merged_pool_complete(code, max_weight, max_steps)
    exact = spec.exact and complete_pool and excluded_floor >= spec.min_ved
    return ListSpec(spec.L, spec.min_ved, spec.witness, spec.explored, exact, spec.events)


@dataclass(frozen=True)
class ListSizeResult:
    B: int
    target: float
    table: tuple[ListSpec, ...]


def minimal_list_size(
    code: ConvCode,
    max_weight: int,
    depth: int,
    window: int,
    target: float | None = None,
    B_max: int = 8,
    mapping: SignalMapping = SignalMapping(),
    node_cap: int = NODE_CAP,
) -> ListSizeResult:
    """Smallest survivor count B whose minimum VED reaches ``target``.

    The pool mixes merged events with open paths cut at ``depth`` steps.  The
    default target is the unconstrained ML asymptote sqrt(E_s * d_free).
    """
    if target is None:
        target = math.sqrt(mapping.symbol_energy * free_distance(code))
    events = enumerate_events(code, max_weight, depth, include_unmerged=True)
    table = []
    for B in range(1, B_max + 1):
        spec = min_ved_over(events, B, window, mapping, node_cap)
        table.append(spec)
        if spec.min_ved >= target - 1e-9:
            return ListSizeResult(B, target, tuple(table))
    raise NotReached(f"min VED {table[-1].min_ved:.6g} < target {target:.6g} at B = {B_max}")


def write_csv(specs: Iterable[ListSpec], fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["L", "min_ved", "exact", "witness"])
    for s in specs:
        w.writerow([s.L, f"{s.min_ved:.9g}", str(s.exact).lower(), s.witness_str()])
