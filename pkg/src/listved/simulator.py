"""Monte Carlo codeword-error rates of list decoders on the AWGN channel."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.special import erfc

from . import rng
from .codes import ConvCode, build_trellis, encode_batch, enumerate_events, free_distance
from .decoders import decode_breadth_first, list_viterbi, viterbi_batch
from .errors import InvalidConfig
from .geometry import VedProblem

DECODERS = ("viterbi", "list_viterbi", "breadth_first")
CHUNK = 4096
Z95 = 1.959963984540054


def q_function(x):
    """Gaussian tail P(N(0,1) > x); accepts scalars or arrays."""
    out = 0.5 * erfc(np.asarray(x, dtype=float) / math.sqrt(2.0))
    return float(out) if np.ndim(out) == 0 else out


def wilson_halfwidth(k: int, n: int, z: float = Z95) -> float:
    if n <= 0:
        return math.nan
    p = k / n
    return z / (1.0 + z * z / n) * math.sqrt(p * (1.0 - p) / n + z * z / (4.0 * n * n))


@dataclass(frozen=True)
class ChannelSpec:
    ebno_db: float
    rate: Fraction
    symbol_energy: float = 1.0

    @property
    def sigma_sq(self) -> float:
        ebno = 10.0 ** (self.ebno_db / 10.0)
        return self.symbol_energy / (2.0 * float(self.rate) * ebno)

    @property
    def sigma(self) -> float:
        return math.sqrt(self.sigma_sq)


@dataclass(frozen=True)
class SimResult:
    ebno_db: float
    decoder: str
    L_or_B: int
    trials: int
    ce_count: int
    p_ce: float
    ci95: float
    asymptote: float


def mc_region_probability(problem: VedProblem, sigma: float, trials: int, seed: int = 0) -> tuple[float, float]:
    """Fraction of N(0, sigma^2 I) draws landing in the CE region, with Wilson half-width."""
    _, D = problem.dense()
    b = problem.rhs
    m = D.shape[1]
    nw = rng.normal_words(m)
    hits = 0
    for start in range(0, trials, CHUNK * 4):
        n = min(CHUNK * 4, trials - start)
        z = sigma * rng.box_muller(rng.raw_words(seed, start, n, nw), m)
        hits += int(np.count_nonzero(np.all(z @ D.T >= b, axis=1)))
    return hits / trials, wilson_halfwidth(hits, trials)


@dataclass(frozen=True)
class _Job:
    code: ConvCode
    decoder: str
    size: int
    sigma: float
    amplitude: float
    info_len: int
    seed: int


def _trial_layout(code: ConvCode, info_len: int) -> tuple[int, int, int]:
    n_coded = (info_len + code.memory) * code.n0
    bit_words = -(-info_len // 64)
    return n_coded, bit_words, bit_words + rng.normal_words(n_coded)


def _draw(job: _Job, start: int, n: int):
    """Info bits and received vectors for trials start..start+n-1."""
    n_coded, bit_words, total = _trial_layout(job.code, job.info_len)
    words = rng.raw_words(job.seed, start, n, total)
    info = rng.bits_from_words(words[:, :bit_words], job.info_len)
    noise = rng.box_muller(words[:, bit_words:], n_coded)
    trellis = build_trellis(job.code)
    padded = np.concatenate([info, np.zeros((n, job.code.memory), dtype=np.int8)], axis=1)
    coded = encode_batch(trellis, padded)
    received = job.amplitude * (1.0 - 2.0 * coded) + job.sigma * noise
    return trellis, padded, received


def _outcomes(job: _Job, start: int, n: int) -> np.ndarray:
    """Boolean CE flag per trial."""
    trellis, sent, received = _draw(job, start, n)
    if job.decoder == "viterbi":
        decided = viterbi_batch(trellis, received)
        return np.any(decided != sent, axis=1)
    steps = sent.shape[1]
    weights = 1 << np.arange(steps - 1, -1, -1, dtype=object)
    flags = np.empty(n, dtype=bool)
    for i in range(n):
        if job.decoder == "list_viterbi":
            truth = int(np.dot(sent[i].astype(object), weights))
            flags[i] = all(p != truth for _, p in list_viterbi(trellis, received[i], job.size))
        else:
            res = decode_breadth_first(trellis, received[i], job.size, reference=sent[i])
            flags[i] = res.deleted
    return flags


def _count(args) -> int:
    job, start, n = args
    return int(np.count_nonzero(_outcomes(job, start, n)))


def _make_job(code, decoder, size, channel, info_len, seed) -> _Job:
    if decoder not in DECODERS:
        raise InvalidConfig(f"decoder must be one of {DECODERS}")
    if size < 1:
        raise InvalidConfig("list size must be >= 1")
    if info_len < 1:
        raise InvalidConfig("info_len must be >= 1")
    if Fraction(channel.rate) != code.rate:
        raise InvalidConfig("channel rate does not match the code")
    return _Job(code, decoder, size, channel.sigma, math.sqrt(channel.symbol_energy), info_len, seed)


def trial_outcomes(code, decoder, size, channel, info_len, trials, seed, start=0) -> np.ndarray:
    """Per-trial CE flags; trial i always sees the same bits and noise for a seed."""
    job = _make_job(code, decoder, size, channel, info_len, seed)
    return np.concatenate(
        [_outcomes(job, s, min(CHUNK, start + trials - s)) for s in range(start, start + trials, CHUNK)]
    )


def simulate_ce(
    code: ConvCode,
    decoder: str,
    size: int,
    channel: ChannelSpec,
    info_len: int,
    trials: int,
    seed: int = 0,
    workers: int = 1,
    min_ved: float | None = None,
) -> SimResult:
    """Count codeword errors over ``trials`` blocks of ``info_len`` bits.

    The block is terminated with ``memory`` zeros.  A CE is a decoded block
    differing from the sent one (viterbi), the sent codeword missing from the
    list (list_viterbi) or the sent path leaving the survivors
    (breadth_first).  ``min_ved`` sets the asymptote Q(min_ved / sigma); for
    viterbi it defaults to sqrt(E_s * d_free).
    """
    if trials < 1:
        raise InvalidConfig("trials must be >= 1")
    job = _make_job(code, decoder, size, channel, info_len, seed)
    chunks = [(job, s, min(CHUNK, trials - s)) for s in range(0, trials, CHUNK)]
    if workers > 1 and len(chunks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            ce = sum(pool.map(_count, chunks))
    else:
        ce = sum(map(_count, chunks))
    if min_ved is None and decoder == "viterbi":
        min_ved = math.sqrt(channel.symbol_energy * free_distance(code))
    asym = q_function(min_ved / channel.sigma) if min_ved is not None else math.nan
    return SimResult(
        ebno_db=channel.ebno_db,
        decoder=decoder,
        L_or_B=size,
        trials=trials,
        ce_count=ce,
        p_ce=ce / trials,
        ci95=wilson_halfwidth(ce, trials),
        asymptote=asym,
    )


def block_asymptote(code: ConvCode, info_len: int, channel: ChannelSpec) -> float:
    """Leading union-bound term for a whole block.

    info_len start positions times the number of d_free events times
    Q(sqrt(E_s * d_free) / sigma).
    """
    dfree = free_distance(code)
    events = enumerate_events(code, dfree, min(64, 8 * (code.memory + 1) + 2 * dfree))
    mult = sum(1 for e in events if e.weight == dfree)
    return info_len * mult * q_function(math.sqrt(channel.symbol_energy * dfree) / channel.sigma)


def ebno_grid(spec: str) -> list[float]:
    """Parse ``a:b:step`` (inclusive of b) or a comma list."""
    spec = spec.strip()
    if not spec:
        raise InvalidConfig("empty Eb/N0 grid")
    try:
        if ":" in spec:
            a, b, step = (float(x) for x in spec.split(":"))
            if step <= 0 or b < a:
                raise InvalidConfig(f"bad grid {spec!r}")
            n = int(math.floor((b - a) / step + 1e-9)) + 1
            return [round(a + i * step, 12) for i in range(n)]
        grid = [float(x) for x in spec.split(",") if x.strip()]
    except ValueError:
        raise InvalidConfig(f"bad grid {spec!r}") from None
    if not grid:
        raise InvalidConfig("empty Eb/N0 grid")
    return grid


def draw_trials(code: ConvCode, channel: ChannelSpec, info_len: int, trials: int, seed: int, start: int = 0):
    """(sent inputs incl. tail, received vectors) exactly as the simulator sees them."""
    job = _make_job(code, "viterbi", 1, channel, info_len, seed)
    _, sent, received = _draw(job, start, trials)
    return sent, received
