"""Channels, sub-channel statistics, SC decoding, and the tree process."""

import math

import numpy as np
import pytest

from polarkernels import polarize as pz
from polarkernels.kernel import (RecursiveEncoder, arikan, demo_kernel_4,
                                 kernel_1)


def h2(p):
    return -p * math.log2(p) - (1 - p) * math.log2(1 - p)


def test_channel_constructors():
    w = pz.bec(0.3)
    assert abs(w.capacity() - 0.7) < 1e-12
    assert abs(w.bhattacharyya() - 0.3) < 1e-12
    w = pz.bsc(0.1)
    assert abs(w.capacity() - (1 - h2(0.1))) < 1e-12
    assert abs(w.bhattacharyya() - 2 * math.sqrt(0.1 * 0.9)) < 1e-12
    perfect = pz.noiseless()
    assert perfect.capacity() == 1.0 and perfect.bhattacharyya() == 0.0
    with pytest.raises(pz.PolarizeError):
        pz.bec(1.5)
    with pytest.raises(pz.PolarizeError):
        pz.DiscreteChannel((0.5, 0.4), (0.5, 0.5))


def test_arikan_bec_subchannels():
    for eps in (0.2, 0.5, 0.9):
        w = pz.bec(eps)
        _, z1 = pz.subchannel_exact(arikan(), w, 1)
        _, z2 = pz.subchannel_exact(arikan(), w, 2)
        assert abs(z1 - (2 * eps - eps * eps)) < 1e-12
        assert abs(z2 - eps * eps) < 1e-12


def test_noiseless_subchannels():
    k = demo_kernel_4()
    for i in range(1, 5):
        I, Z = pz.subchannel_exact(k, pz.noiseless(), i)
        assert I == 1.0 and Z == 0.0


def test_capacity_conservation():
    for channel in (pz.bec(0.5), pz.bsc(0.1)):
        for k in (arikan(), demo_kernel_4()):
            total = sum(pz.subchannel_exact(k, channel, i)[0]
                        for i in range(1, k.length + 1))
            assert abs(total - k.length * channel.capacity()) < 1e-9


def test_subchannel_ranges():
    for channel in (pz.bec(0.4), pz.bsc(0.2)):
        for i in range(1, 5):
            I, Z = pz.subchannel_exact(demo_kernel_4(), channel, i)
            assert 0 <= Z <= 1 + 1e-12 and 0 <= I <= 1 + 1e-12
            # I = 1 exactly when Z = 0 for these symmetric channels
            assert (I > 1 - 1e-12) == (Z < 1e-12)


def test_exact_mode_caps():
    with pytest.raises(pz.PolarizeError):
        pz.subchannel_exact(kernel_1(), pz.bec(0.5), 1)
    with pytest.raises(pz.PolarizeError):
        pz.subchannel_exact(arikan(), pz.bec(0.5), 3)
    with pytest.raises(pz.PolarizeError):
        pz.subchannel_channel(kernel_1(), pz.bec(0.5), 1)


def test_monte_carlo_matches_exact():
    k = demo_kernel_4()
    channel = pz.bec(0.5)
    for i in (1, 2, 4):
        est = pz.subchannel_monte_carlo(k, channel, i, 3000, 123)
        I, Z = pz.subchannel_exact(k, channel, i)
        assert abs(est.capacity - I) <= max(est.capacity_radius, 1e-9)
        assert abs(est.bhattacharyya - Z) <= max(est.bhattacharyya_radius, 1e-9)


def test_monte_carlo_noiseless_and_validation():
    est = pz.subchannel_monte_carlo(demo_kernel_4(), pz.noiseless(), 2, 1000, 0)
    assert est.capacity == 1.0 and est.bhattacharyya == 0.0
    assert est.radius == 0.0
    with pytest.raises(pz.PolarizeError):
        pz.subchannel_monte_carlo(arikan(), pz.bec(0.5), 1, 100, 0)


def test_monte_carlo_deterministic():
    a = pz.subchannel_monte_carlo(arikan(), pz.bsc(0.1), 1, 1000, 9)
    b = pz.subchannel_monte_carlo(arikan(), pz.bsc(0.1), 1, 1000, 9)
    assert a == b


def test_subchannel_stats():
    stats = pz.subchannel_stats(arikan(), pz.bec(0.5))
    assert stats.method == "exact"
    assert abs(sum(stats.capacities) - 1.0) < 1e-9
    assert stats.bhattacharyyas == (0.75, 0.25)


def test_sc_decode_noiseless_inversion():
    rng = np.random.default_rng(0)
    for re in (RecursiveEncoder(arikan(), 3), RecursiveEncoder(demo_kernel_4(), 2)):
        for _ in range(10):
            u = rng.integers(0, 2, re.block_length)
            x = re.encode(u)
            assert np.array_equal(pz.sc_decode(re, x, {}, pz.noiseless()), u)


def test_sc_decode_all_frozen():
    re = RecursiveEncoder(arikan(), 3)
    rng = np.random.default_rng(1)
    frozen = {i: int(b) for i, b in enumerate(rng.integers(0, 2, 8))}
    junk = rng.integers(0, 3, 8)
    decoded = pz.sc_decode(re, junk, frozen, pz.bec(0.3))
    assert all(decoded[i] == frozen[i] for i in frozen)


def brute_force_sc(re, y, channel):
    """Chain-rule MAP decisions by explicit enumeration of all inputs."""
    n = re.block_length
    w = channel.matrix()
    allu = np.array([[(v >> j) & 1 for j in range(n)] for v in range(1 << n)])
    likes = np.array([w[re.encode(allu[v]), y].prod() for v in range(1 << n)])
    decided = []
    for i in range(n):
        mask = np.ones(1 << n, bool)
        for j, b in enumerate(decided):
            mask &= allu[:, j] == b
        p = [likes[mask & (allu[:, i] == v)].sum() for v in (0, 1)]
        decided.append(int(p[1] > p[0]))
    return np.array(decided)


def test_sc_decode_matches_brute_force():
    re = RecursiveEncoder(arikan(), 2)
    channel = pz.bsc(0.2)
    for val in range(16):
        y = np.array([(val >> j) & 1 for j in range(4)])
        assert np.array_equal(pz.sc_decode(re, y, {}, channel),
                              brute_force_sc(re, y, channel))


def test_sc_beats_repetition_baseline():
    # G_2, depth 3, BEC(0.3), rate 1/2: SC block errors must fall below the
    # unpolarized baseline (each info bit sent twice; a bit fails when both
    # copies are erased and the guess is wrong): 1 - (1 - eps^2/2)^4.
    channel = pz.bec(0.3)
    frozen = pz.select_frozen(arikan(), channel, 3, 0.5)
    assert len(frozen) == 4
    trials = 10 ** 4
    errors = pz.sc_error_rate(RecursiveEncoder(arikan(), 3), channel,
                              frozen, trials, 77)
    baseline = 1 - (1 - 0.3 ** 2 / 2) ** 4
    assert errors / trials < baseline


def test_sc_z_profile_arikan_bec():
    z = pz.sc_z_profile(arikan(), pz.bec(0.5), 2)
    assert np.allclose(z, [0.9375, 0.5625, 0.4375, 0.0625], atol=1e-9)


def test_select_frozen_heuristic_large_kernel():
    frozen = pz.select_frozen(kernel_1(), pz.bec(0.3), 2, 0.5)
    assert len(frozen) == 128
    assert all(v == 0 for v in frozen.values())
    # the first decode index rides the weakest sub-channels; the last the best
    assert 0 in frozen and 255 not in frozen


def test_tree_process_depth0_and_perfect():
    result = pz.tree_process(arikan(), pz.bec(0.5), 0, 20, 3)
    assert all(s.z == 0.5 for s in result.samples)
    result = pz.tree_process(arikan(), pz.noiseless(), 6, 20, 3)
    assert all(s.z == 0.0 for s in result.samples)


def test_tree_leaves_match_bec_recursion():
    leaves = pz.tree_leaves_exact(arikan(), pz.bec(0.5), 10)
    z = np.array([0.5])
    for _ in range(10):
        z = np.concatenate([2 * z - z * z, z * z])
    assert np.allclose(np.sort(leaves), np.sort(z), atol=1e-9)


def test_tree_process_matches_exact_leaves():
    depth, trials = 6, 4000
    leaves = pz.tree_leaves_exact(arikan(), pz.bec(0.5), depth)
    result = pz.tree_process(arikan(), pz.bec(0.5), depth, trials, 11)
    threshold = 0.01
    p = float((leaves <= threshold).mean())
    p_hat = float((result.z_values() <= threshold).mean())
    assert abs(p_hat - p) <= 3 * math.sqrt(p * (1 - p) / trials)


def test_polarization_trend_is_monotone():
    # for polarizing kernels the mass at the extremes grows with depth
    fractions = [pz.tree_process(arikan(), pz.bec(0.5), n, 600, 5)
                 .fraction_extreme() for n in range(7)]
    assert all(a <= b + 1e-12 for a, b in zip(fractions, fractions[1:]))


def test_tree_process_seeded_determinism():
    a = pz.tree_process(arikan(), pz.bsc(0.1), 4, 50, 13)
    b = pz.tree_process(arikan(), pz.bsc(0.1), 4, 50, 13)
    assert a == b


def test_subchannel_channel_preserves_statistics():
    for channel in (pz.bec(0.4), pz.bsc(0.2)):
        for i in (1, 2, 3, 4):
            merged = pz.subchannel_channel(demo_kernel_4(), channel, i)
            I, Z = pz.subchannel_exact(demo_kernel_4(), channel, i)
            assert abs(merged.capacity() - I) < 1e-9
            assert abs(merged.bhattacharyya() - Z) < 1e-9
