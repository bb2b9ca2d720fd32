"""Counter-based random streams addressed by (seed, trial index).

Each trial owns a fixed block of Philox output words, so any contiguous range
of trials can be generated independently and the union is identical to a
single sequential run.
"""

from __future__ import annotations

import numpy as np

_WORDS_PER_COUNTER = 4  # Philox4x64 emits four 64-bit words per counter step
_TWO_PI = 2.0 * np.pi


def block_words(n_words: int) -> int:
    """Round a per-trial word budget up to whole Philox counter blocks."""
    return -(-n_words // _WORDS_PER_COUNTER) * _WORDS_PER_COUNTER


def raw_words(seed: int, first_trial: int, n_trials: int, words_per_trial: int) -> np.ndarray:
    """(n_trials, words_per_trial) uint64 block for trials first_trial.. ."""
    stride = block_words(words_per_trial)
    bitgen = np.random.Philox(key=seed, counter=first_trial * (stride // _WORDS_PER_COUNTER))
    raw = bitgen.random_raw(n_trials * stride).reshape(n_trials, stride)
    return raw[:, :words_per_trial]


def uniforms(words: np.ndarray) -> np.ndarray:
    """Map 64-bit words to doubles in (0, 1]."""
    return ((words >> np.uint64(11)).astype(np.float64) + 1.0) * 2.0**-53


def box_muller(words: np.ndarray, n: int) -> np.ndarray:
    """Standard normals from the last axis of ``words`` (needs 2*ceil(n/2) words)."""
    u = uniforms(words)
    u1, u2 = u[..., 0::2], u[..., 1::2]
    r = np.sqrt(-2.0 * np.log(u1))
    z = np.empty(u.shape[:-1] + (2 * u1.shape[-1],))
    z[..., 0::2] = r * np.cos(_TWO_PI * u2)
    z[..., 1::2] = r * np.sin(_TWO_PI * u2)
    return z[..., :n]


def normal_words(n: int) -> int:
    return 2 * (-(-n // 2))


def bits_from_words(words: np.ndarray, n: int) -> np.ndarray:
    """First ``n`` bits of each row of a uint64 word block, as int8."""
    b = np.unpackbits(words.astype("<u8").view(np.uint8), axis=-1, bitorder="little")
    return b[..., :n].astype(np.int8)
