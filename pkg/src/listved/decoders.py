"""Viterbi, list Viterbi and breadth-first (M-algorithm) decoders.

All decoders use the correlation metric sum_j r_j * (1 - 2 c_j), which orders
paths exactly as the AWGN likelihood does.  Paths are carried as Python ints
(first input bit most significant), so for paths of equal length integer
order is lexicographic bit order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .codes import Trellis
from .errors import LengthMismatch


def _steps_of(trellis: Trellis, received) -> tuple[np.ndarray, int]:
    r = np.asarray(received, dtype=float)
    n0 = trellis.outputs.shape[2]
    if r.shape[-1] % n0:
        raise LengthMismatch(f"received length {r.shape[-1]} is not a multiple of n0={n0}")
    return r, r.shape[-1] // n0


def _branch_signs(trellis: Trellis) -> np.ndarray:
    """(S, 2, n0) BPSK signs of every branch label."""
    return 1.0 - 2.0 * trellis.outputs


def viterbi_batch(trellis: Trellis, received: np.ndarray, terminated: bool = True) -> np.ndarray:
    """ML input sequences for a (batch, steps * n0) stack of received vectors.

    Ties in add-compare-select go to the predecessor whose dropped bit is 0.
    """
    r, steps = _steps_of(trellis, received)
    batch = r.shape[0]
    S = trellis.n_states
    n0 = trellis.outputs.shape[2]
    signs = _branch_signs(trellis).reshape(2 * S, n0).T  # (n0, 2S)
    p0, p1 = trellis.prev_state[:, 0], trellis.prev_state[:, 1]
    bit = trellis.prev_input
    col0 = 2 * p0 + bit
    col1 = 2 * p1 + bit
    metric = np.full((batch, S), -np.inf)
    metric[:, 0] = 0.0
    choice = np.empty((steps, batch, S), dtype=bool)
    for t in range(steps):
        bm = r[:, t * n0:(t + 1) * n0] @ signs  # (batch, 2S)
        m0 = metric[:, p0] + bm[:, col0]
        m1 = metric[:, p1] + bm[:, col1]
        take1 = m1 > m0
        choice[t] = take1
        metric = np.where(take1, m1, m0)
    state = np.zeros(batch, dtype=np.int64) if terminated else np.argmax(metric, axis=1)
    bits = np.empty((batch, steps), dtype=np.int8)
    rows = np.arange(batch)
    for t in range(steps - 1, -1, -1):
        bits[:, t] = state & 1
        state = trellis.prev_state[state, choice[t, rows, state].astype(np.int64)]
    return bits


def decode_viterbi(trellis: Trellis, received, terminated: bool = True) -> list[int]:
    r, _ = _steps_of(trellis, received)
    return viterbi_batch(trellis, r[None, :], terminated)[0].tolist()


def _int_to_bits(x: int, steps: int) -> list[int]:
    return [(x >> (steps - 1 - t)) & 1 for t in range(steps)]


def list_viterbi(trellis: Trellis, received, L: int, terminated: bool = True) -> list[tuple[float, int]]:
    """Parallel list Viterbi: the L best (metric, path-int) pairs, best first.

    Every state keeps its L best prefixes under the order (metric desc, bits
    asc); a globally top-L path can never drop out of its state's list.
    """
    r, steps = _steps_of(trellis, received)
    n0 = trellis.outputs.shape[2]
    S = trellis.n_states
    nxt = trellis.next_state.tolist()
    signs = _branch_signs(trellis)
    lists: list[list[tuple[float, int]]] = [[] for _ in range(S)]
    lists[0] = [(0.0, 0)]
    for t in range(steps):
        bm = (signs @ r[t * n0:(t + 1) * n0]).tolist()  # (S, 2)
        cand: list[list[tuple[float, int]]] = [[] for _ in range(S)]
        for s in range(S):
            if not lists[s]:
                continue
            for b in (0, 1):
                ns, w = nxt[s][b], bm[s][b]
                cand[ns].extend((m + w, (p << 1) | b) for m, p in lists[s])
        lists = [sorted(c, key=lambda e: (-e[0], e[1]))[:L] for c in cand]
    final = lists[0] if terminated else [e for lst in lists for e in lst]
    return sorted(final, key=lambda e: (-e[0], e[1]))[:L]


def decode_list_viterbi(trellis: Trellis, received, L: int, terminated: bool = True) -> list[list[int]]:
    if L < 1:
        raise ValueError("L must be >= 1")
    _, steps = _steps_of(trellis, received)
    return [_int_to_bits(p, steps) for _, p in list_viterbi(trellis, received, L, terminated)]


@dataclass(frozen=True)
class BreadthFirstResult:
    decided: list[int]
    deleted: bool
    deleted_at: int | None  # step after which the reference left the survivors
    trace: list[tuple[tuple[int, float, int], ...]] | None  # per step (state, metric, path)


def decode_breadth_first(
    trellis: Trellis,
    received,
    B: int,
    reference=None,
    terminated: bool = True,
    keep_trace: bool = False,
) -> BreadthFirstResult:
    """Keep the B best state survivors at every depth.

    Paths entering the same state are first reduced to the best one (metric
    desc, bits asc), exactly as in Viterbi; with B >= number of states the
    decoder is Viterbi.  With ``terminated`` the final ``memory`` inputs are
    known zeros and only 0-branches are extended there.
    """
    if B < 1:
        raise ValueError("B must be >= 1")
    r, steps = _steps_of(trellis, received)
    n0 = trellis.outputs.shape[2]
    nxt = trellis.next_state.tolist()
    signs = _branch_signs(trellis)
    tail_from = steps - trellis.code.memory if terminated else steps
    ref = None
    if reference is not None:
        ref_bits = list(reference)[:steps]
        if len(ref_bits) != steps:
            raise LengthMismatch("reference path shorter than the received sequence")
        ref = 0
        for b in ref_bits:
            ref = (ref << 1) | int(b)
    survivors: dict[int, tuple[float, int]] = {0: (0.0, 0)}
    trace = [] if keep_trace else None
    deleted_at = None
    for t in range(steps):
        bm = (signs @ r[t * n0:(t + 1) * n0]).tolist()
        best: dict[int, tuple[float, int]] = {}
        branch_bits = (0,) if t >= tail_from else (0, 1)
        for s, (m, p) in survivors.items():
            for b in branch_bits:
                ns = nxt[s][b]
                cand = (m + bm[s][b], (p << 1) | b)
                cur = best.get(ns)
                if cur is None or (-cand[0], cand[1]) < (-cur[0], cur[1]):
                    best[ns] = cand
        kept = sorted(best.items(), key=lambda kv: (-kv[1][0], kv[1][1]))[:B]
        survivors = dict(kept)
        if trace is not None:
            trace.append(tuple((s, m, p) for s, (m, p) in kept))
        if ref is not None and deleted_at is None:
            prefix = ref >> (steps - 1 - t)
            if not any(p == prefix for _, p in survivors.values()):
                deleted_at = t
    if terminated and 0 in survivors:
        winner = survivors[0][1]
    else:
        winner = min(survivors.values(), key=lambda e: (-e[0], e[1]))[1]
    return BreadthFirstResult(_int_to_bits(winner, steps), deleted_at is not None, deleted_at, trace)
