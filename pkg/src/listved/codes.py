"""Binary feedforward rate-1/n convolutional codes and their error events."""

from __future__ import annotations

import heapq
import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import Explosion, InvalidConfig, MemoryTooLarge
from .geometry import DiffVector

MAX_TRELLIS_MEMORY = 20
EVENT_CAP = 1_000_000


@dataclass(frozen=True)
class ConvCode:
    """Generators are octal with the most significant tap on the current input."""

    generators: tuple[int, ...]
    memory: int
    k0: int = field(default=1, init=False)

    def __post_init__(self):
        gens = tuple(int(g) for g in self.generators)
        object.__setattr__(self, "generators", gens)
        if not gens:
            raise InvalidConfig("at least one generator is required")
        if self.memory < 1:
            raise InvalidConfig("memory must be >= 1")
        top = 1 << self.memory
        for g in gens:
            if g <= 0 or g >= top << 1:
                raise InvalidConfig(f"generator {oct(g)[2:]} does not fit in memory+1 = {self.memory + 1} taps")
        if not any(g & 1 and g & top for g in gens):
            raise InvalidConfig("no generator has both its first and last tap set")

    @classmethod
    def from_octal(cls, *gens: str | int, memory: int | None = None) -> ConvCode:
        values = [int(str(g), 8) for g in gens]
        if memory is None:
            memory = max(v.bit_length() for v in values) - 1
        return cls(tuple(values), memory)

    @classmethod
    def parse(cls, spec: str) -> ConvCode:
        """Parse ``"rate=1/2 gens=5,7 mem=2"`` (rate and mem optional)."""
        fields = dict(re.findall(r"(\w+)\s*=\s*(\S+)", spec))
        unknown = set(fields) - {"rate", "gens", "mem"}
        if unknown or "gens" not in fields:
            raise InvalidConfig(f"bad code spec {spec!r}")
        try:
            gens = fields["gens"].split(",")
            code = cls.from_octal(*gens, memory=int(fields["mem"]) if "mem" in fields else None)
        except ValueError as exc:
            raise InvalidConfig(f"bad code spec {spec!r}: {exc}") from None
        if "rate" in fields and Fraction(fields["rate"]) != code.rate:
            raise InvalidConfig(f"rate {fields['rate']} does not match {len(gens)} generators")
        return code

    @property
    def n0(self) -> int:
        return len(self.generators)

    @property
    def rate(self) -> Fraction:
        return Fraction(self.k0, self.n0)

    @property
    def n_states(self) -> int:
        return 1 << self.memory

    def __str__(self):
        gens = ",".join(oct(g)[2:] for g in self.generators)
        return f"rate={self.rate} gens={gens} mem={self.memory}"


def _reverse_bits(x: int, width: int) -> int:
    return int(format(x, f"0{width}b")[::-1], 2)


def _taps(code: ConvCode) -> list[int]:
    # register value r has bit 0 = current input, bit k = input k steps ago
    return [_reverse_bits(g, code.memory + 1) for g in code.generators]


def _parity(x: int) -> int:
    return bin(x).count("1") & 1


@dataclass(frozen=True, eq=False)
class Trellis:
    """State s holds past inputs with the most recent in bit 0."""

    code: ConvCode
    next_state: np.ndarray  # (S, 2)
    outputs: np.ndarray  # (S, 2, n0) coded bits
    prev_state: np.ndarray  # (S, 2) the two predecessors, dropped bit 0 first
    prev_input: np.ndarray  # (S,) input bit on every branch into s

    @property
    def n_states(self) -> int:
        return self.next_state.shape[0]

    @property
    def n_branches(self) -> int:
        return self.next_state.size


def build_trellis(code: ConvCode) -> Trellis:
    if code.memory > MAX_TRELLIS_MEMORY:
        raise MemoryTooLarge(f"memory {code.memory} exceeds {MAX_TRELLIS_MEMORY}")
    m, S = code.memory, code.n_states
    taps = _taps(code)
    nxt = np.empty((S, 2), dtype=np.int64)
    out = np.empty((S, 2, code.n0), dtype=np.int8)
    for s in range(S):
        for bit in (0, 1):
            reg = (s << 1) | bit
            nxt[s, bit] = reg & (S - 1)
            out[s, bit] = [_parity(reg & t) for t in taps]
    states = np.arange(S)
    prev = np.stack([states >> 1, (states >> 1) | (1 << (m - 1))], axis=1)
    return Trellis(code, nxt, out, prev, states & 1)


def encode(code: ConvCode, bits: Sequence[int], terminate: bool = False) -> list[int]:
    taps = _taps(code)
    mask = (1 << (code.memory + 1)) - 1
    seq = list(bits) + ([0] * code.memory if terminate else [])
    reg = 0
    out: list[int] = []
    for b in seq:
        reg = ((reg << 1) | (int(b) & 1)) & mask
        out.extend(_parity(reg & t) for t in taps)
    return out


def encode_batch(trellis: Trellis, bits: np.ndarray) -> np.ndarray:
    """Vectorised encoder: (batch, steps) inputs -> (batch, steps * n0) bits."""
    batch, steps = bits.shape
    n0 = trellis.outputs.shape[2]
    state = np.zeros(batch, dtype=np.int64)
    out = np.empty((batch, steps, n0), dtype=np.int8)
    for t in range(steps):
        b = bits[:, t]
        out[:, t] = trellis.outputs[state, b]
        state = trellis.next_state[state, b]
    return out.reshape(batch, steps * n0)


@dataclass(frozen=True)
class ErrorEvent:
    input_bits: tuple[int, ...]
    output_bits: tuple[int, ...]
    merged: bool
    steps: int

    @property
    def weight(self) -> int:
        return sum(self.output_bits)

    @property
    def mask(self) -> int:
        """Output bits as an integer, coded position j -> bit j."""
        return sum(1 << j for j, v in enumerate(self.output_bits) if v)

    def __str__(self):
        kind = "merged" if self.merged else "open"
        return f"{''.join(map(str, self.input_bits))} w={self.weight} {kind}"


def enumerate_events(
    code: ConvCode,
    max_weight: int,
    max_steps: int,
    include_unmerged: bool = False,
    cap: int = EVENT_CAP,
) -> list[ErrorEvent]:
    """All events diverging from the zero path at step 0 within the bounds.

    Merged events stop at their first return to state 0.  Open events are
    paths of exactly ``max_steps`` branches that never re-merged.
    """
    if max_steps > 64:
        raise InvalidConfig("max_steps must be <= 64")
    events = list(_walk_events(code, max_weight, max_steps, include_unmerged, cap)[0])
    events.sort(key=lambda e: (e.weight, e.steps, e.input_bits))
    return events


def _walk_events(code, max_weight, max_steps, include_unmerged, cap):
    """Depth-first event walk; also reports whether any open path was cut by max_steps."""
    trellis = build_trellis(code)
    nxt, out = trellis.next_state, trellis.outputs
    found: list[ErrorEvent] = []
    truncated = False
    if max_weight <= 0 or max_steps < 1:
        return found, truncated
    # stack entries: (state, weight, inputs, outputs)
    w0 = int(out[0, 1].sum())
    stack = [(int(nxt[0, 1]), w0, (1,), tuple(int(v) for v in out[0, 1]))]
    while stack:
        state, w, ins, outs = stack.pop()
        if w > max_weight:
            continue
        steps = len(ins)
        if state == 0:
            found.append(ErrorEvent(ins, outs, True, steps))
        elif steps == max_steps:
            truncated = True
            if include_unmerged:
                found.append(ErrorEvent(ins, outs, False, steps))
        else:
            for bit in (1, 0):
                o = out[state, bit]
                stack.append((int(nxt[state, bit]), w + int(o.sum()), ins + (bit,), outs + tuple(int(v) for v in o)))
        if len(found) > cap:
            raise Explosion(f"more than {cap} error events; tighten max_weight or max_steps")
    return found, truncated


def merged_pool_complete(code: ConvCode, max_weight: int, max_steps: int) -> bool:
    """True when no open path of weight <= max_weight survives to max_steps."""
    return not _walk_events(code, max_weight, max_steps, False, EVENT_CAP)[1]


def free_distance(code: ConvCode) -> int:
    """Minimum merged-event weight by best-first search over trellis states.

    Branch weights are nonnegative, so the first time state 0 is popped no
    open path of lower weight can remain.
    """
    if code.memory > 10:
        raise InvalidConfig("free_distance supports memory <= 10")
    trellis = build_trellis(code)
    nxt, out = trellis.next_state, trellis.outputs
    wts = out.sum(axis=2)
    start = int(nxt[0, 1])
    heap = [(int(wts[0, 1]), start)]
    best = {start: int(wts[0, 1])}
    while heap:
        w, s = heapq.heappop(heap)
        if s == 0:
            return w
        if w > best.get(s, math.inf):
            continue
        for bit in (0, 1):
            t, nw = int(nxt[s, bit]), w + int(wts[s, bit])
            if nw < best.get(t, math.inf):
                best[t] = nw
                heapq.heappush(heap, (nw, t))
    raise AssertionError("state 0 unreachable")  # the all-zero input always flushes


@dataclass(frozen=True)
class SignalMapping:
    """BPSK: bit b -> (1 - 2b) * sqrt(symbol_energy)."""

    symbol_energy: float = 1.0

    def __post_init__(self):
        if not self.symbol_energy > 0:
            raise InvalidConfig("symbol_energy must be positive")

    @property
    def amplitude(self) -> float:
        return math.sqrt(self.symbol_energy)


def event_to_diff(event: ErrorEvent, mapping: SignalMapping = SignalMapping(), offset: int = 0) -> DiffVector:
    n0 = len(event.output_bits) // event.steps
    amp = -2.0 * mapping.amplitude
    base = offset * n0
    return DiffVector({base + j: amp for j, v in enumerate(event.output_bits) if v})
