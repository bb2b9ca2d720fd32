import math
from fractions import Fraction

import numpy as np
import pytest
from scipy.integrate import quad

from listved.codes import ConvCode, build_trellis
from listved.decoders import viterbi_batch
from listved.errors import InvalidConfig
from listved.geometry import DiffVector, gram_of
from listved.rng import box_muller, raw_words
from listved.simulator import (
    ChannelSpec,
    block_asymptote,
    draw_trials,
    ebno_grid,
    mc_region_probability,
    q_function,
    simulate_ce,
    trial_outcomes,
    wilson_halfwidth,
)

K57 = ConvCode.from_octal("5", "7")
HALF = Fraction(1, 2)
# tail of the standard normal by quadrature, frozen
Q1 = 0.15865525393145707


def test_q1_oracle():
    val, _ = quad(lambda t: math.exp(-t * t / 2) / math.sqrt(2 * math.pi), 1, math.inf, epsabs=1e-14)
    assert val == pytest.approx(Q1, abs=1e-13)


@pytest.mark.parametrize("x, expected", [(0.0, 0.5), (math.inf, 0.0), (1.0, Q1), (-1.0, 1 - Q1)])
def test_q_function(x, expected):
    assert q_function(x) == pytest.approx(expected, abs=1e-12)


def test_q_function_array():
    np.testing.assert_allclose(q_function(np.array([0.0, 1.0])), [0.5, Q1], atol=1e-12)


def test_wilson():
    assert wilson_halfwidth(0, 1000) > 0
    assert wilson_halfwidth(500, 1000) == pytest.approx(0.030938, abs=1e-5)
    assert math.isnan(wilson_halfwidth(0, 0))


def test_sigma_sq():
    ch = ChannelSpec(0.0, HALF)
    assert ch.sigma_sq == pytest.approx(1.0)
    ch = ChannelSpec(10 * math.log10(2), HALF, symbol_energy=4.0)
    assert ch.sigma_sq == pytest.approx(2.0)


def test_box_muller_moments():
    z = box_muller(raw_words(9, 0, 20000, 4), 8).ravel()
    assert abs(z.mean()) < 0.01
    assert abs(z.std() - 1) < 0.01
    assert np.all(np.isfinite(z))


def test_rng_is_partitionable():
    whole = raw_words(3, 0, 10, 6)
    np.testing.assert_array_equal(whole[4:], raw_words(3, 4, 6, 6))


def test_region_single():
    p = gram_of([DiffVector({0: 2.0})])
    est, ci = mc_region_probability(p, 1.0, 100_000, seed=1)
    assert abs(est - Q1) <= 3 * ci


def test_region_orthogonal_pair():
    p = gram_of([DiffVector({0: 2.0}), DiffVector({1: 2.0})])
    est, ci = mc_region_probability(p, 1.0, 100_000, seed=2)
    assert abs(est - Q1**2) <= 3 * ci


def test_region_tiny_sigma():
    p = gram_of([DiffVector({0: 2.0}), DiffVector({1: 2.0})])
    assert mc_region_probability(p, 1e-6, 10_000)[0] == 0.0


def test_region_ratio_trend():
    # P(region) / Q(ved / sigma) should not grow as sigma shrinks
    p = gram_of([DiffVector({0: 2.0}), DiffVector({1: 2.0})])
    ved = math.sqrt(2)
    ratios = []
    for sigma in (1.0, 0.8, 0.6, 0.5):
        est, ci = mc_region_probability(p, sigma, 200_000, seed=5)
        q = q_function(ved / sigma)
        ratios.append((est / q, ci / q))
    for (a, da), (b, db) in zip(ratios, ratios[1:]):
        assert b <= a + 3 * (da + db)


def test_high_snr_no_errors():
    ch = ChannelSpec(60.0, HALF)
    for dec, size in (("viterbi", 1), ("list_viterbi", 2), ("breadth_first", 2)):
        res = simulate_ce(K57, dec, size, ch, 20, 1000, seed=1)
        assert res.ce_count == 0 and res.p_ce == 0.0 and res.ci95 > 0


def test_exhaustive_list_never_misses():
    ch = ChannelSpec(0.0, HALF)
    res = simulate_ce(K57, "list_viterbi", 2**4, ch, 4, 1000, seed=3)
    assert res.ce_count == 0


def test_seed_determinism():
    ch = ChannelSpec(3.0, HALF)
    a = simulate_ce(K57, "viterbi", 1, ch, 50, 5000, seed=7)
    b = simulate_ce(K57, "viterbi", 1, ch, 50, 5000, seed=7)
    c = simulate_ce(K57, "viterbi", 1, ch, 50, 5000, seed=8)
    assert a == b
    assert a.ce_count != c.ce_count or a != c


def test_worker_invariance():
    ch = ChannelSpec(3.0, HALF)
    one = simulate_ce(K57, "viterbi", 1, ch, 50, 10_000, seed=4)
    two = simulate_ce(K57, "viterbi", 1, ch, 50, 10_000, seed=4, workers=2)
    assert one == two


def test_outcomes_match_counts_and_chunks():
    ch = ChannelSpec(2.0, HALF)
    flags = trial_outcomes(K57, "viterbi", 1, ch, 30, 5000, seed=2)
    res = simulate_ce(K57, "viterbi", 1, ch, 30, 5000, seed=2)
    assert int(flags.sum()) == res.ce_count
    tail = trial_outcomes(K57, "viterbi", 1, ch, 30, 1000, seed=2, start=4000)
    np.testing.assert_array_equal(tail, flags[4000:])


def test_viterbi_flags_follow_draws():
    ch = ChannelSpec(2.0, HALF)
    sent, received = draw_trials(K57, ch, 30, 500, seed=6)
    assert sent.shape == (500, 32) and received.shape == (500, 64)
    assert np.all(sent[:, 30:] == 0)
    errors = np.any(viterbi_batch(build_trellis(K57), received) != sent, axis=1)
    np.testing.assert_array_equal(errors, trial_outcomes(K57, "viterbi", 1, ch, 30, 500, seed=6))


def test_list_nesting_paired():
    ch = ChannelSpec(1.0, HALF)
    prev = None
    for L in (1, 2, 3, 4):
        flags = trial_outcomes(K57, "list_viterbi", L, ch, 20, 600, seed=9)
        if prev is not None:
            assert not np.any(flags & ~prev)
        prev = flags


def test_asymptote_fields():
    ch = ChannelSpec(5.0, HALF)
    res = simulate_ce(K57, "viterbi", 1, ch, 10, 1000)
    assert res.asymptote == pytest.approx(q_function(math.sqrt(5) / ch.sigma))
    assert block_asymptote(K57, 100, ch) == pytest.approx(100 * q_function(math.sqrt(5) / ch.sigma))
    other = simulate_ce(K57, "list_viterbi", 2, ch, 10, 1000)
    assert math.isnan(other.asymptote)


def test_viterbi_near_union_bound():
    ch = ChannelSpec(5.0, HALF)
    res = simulate_ce(K57, "viterbi", 1, ch, 100, 100_000, seed=11)
    ratio = res.p_ce / block_asymptote(K57, 100, ch)
    assert 1 / 3 <= ratio <= 3


@pytest.mark.parametrize(
    "text, grid",
    [("3:6:1", [3.0, 4.0, 5.0, 6.0]), ("0:1:0.25", [0.0, 0.25, 0.5, 0.75, 1.0]), ("2, 4.5", [2.0, 4.5])],
)
def test_ebno_grid(text, grid):
    assert ebno_grid(text) == grid


@pytest.mark.parametrize("text", ["", " ", ",", "6:3:1", "1:2:0", "a:b:c", "x"])
def test_ebno_grid_rejects(text):
    with pytest.raises(InvalidConfig):
        ebno_grid(text)


def test_bad_jobs():
    ch = ChannelSpec(3.0, HALF)
    with pytest.raises(InvalidConfig):
        simulate_ce(K57, "nope", 1, ch, 10, 100)
    with pytest.raises(InvalidConfig):
        simulate_ce(K57, "viterbi", 1, ChannelSpec(3.0, Fraction(1, 3)), 10, 100)
    with pytest.raises(InvalidConfig):
        simulate_ce(K57, "viterbi", 0, ch, 10, 100)
