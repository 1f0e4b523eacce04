"""Polarization behavior of kernels on symmetric binary-input channels.

Exact sub-channel statistics by full enumeration for small dimensions,
Monte-Carlo estimation for large ones, successive-cancellation decoding of
the recursive construction, and the Bhattacharyya tree process (a uniformly
random polarized sub-channel followed through the recursion).

All randomness uses a counter-based generator; trial t of a run with master
seed s draws from an independent stream keyed by (s, t), so serial and
parallel execution produce identical results.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import reduce
from typing import Optional

import numpy as np

from .kernel import Kernel, RecursiveEncoder

MAX_EXACT_LENGTH = 8  # full output-vector enumeration cap
MAX_STEP_LENGTH = 4   # per-step exact sub-channel construction cap


class PolarizeError(ValueError):
    """Raised for invalid channels or computations beyond exact-mode caps."""


def _trial_rng(seed: int, trial: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=(int(seed) << 64) + trial))


# ---------------------------------------------------------------------------
# channels


@dataclass(frozen=True)
class DiscreteChannel:
    """A binary-input channel given by its two transition rows.

    ``p0[y]`` and ``p1[y]`` are W(y|0) and W(y|1); both rows sum to 1.
    """

    p0: tuple
    p1: tuple

    def __post_init__(self):
        if len(self.p0) != len(self.p1) or not self.p0:
            raise PolarizeError("transition rows must be equal-length and nonempty")
        for row in (self.p0, self.p1):
            if any(p < 0 for p in row):
                raise PolarizeError("negative transition probability")
            if abs(sum(row) - 1.0) > 1e-9:
                raise PolarizeError("transition row does not sum to 1")

    @property
    def output_size(self) -> int:
        return len(self.p0)

    def matrix(self) -> np.ndarray:
        """Transition rows stacked as a (2, outputs) array."""
        return np.array([self.p0, self.p1], dtype=float)

    def capacity(self) -> float:
        """Mutual information with a uniform input, in bits."""
        return _mutual_information(np.asarray(self.p0), np.asarray(self.p1))

    def bhattacharyya(self) -> float:
        """Z = sum_y sqrt(W(y|0) W(y|1))."""
        return float(np.sqrt(np.asarray(self.p0) * np.asarray(self.p1)).sum())


def bec(eps: float) -> DiscreteChannel:
    """Binary erasure channel; outputs (0, 1, erasure)."""
    if not 0 <= eps <= 1:
        raise PolarizeError(f"erasure probability {eps} outside [0, 1]")
    return DiscreteChannel((1 - eps, 0.0, eps), (0.0, 1 - eps, eps))


def bsc(p: float) -> DiscreteChannel:
    """Binary symmetric channel with crossover probability p."""
    if not 0 <= p <= 1:
        raise PolarizeError(f"crossover probability {p} outside [0, 1]")
    return DiscreteChannel((1 - p, p), (p, 1 - p))


def noiseless() -> DiscreteChannel:
    return bsc(0.0)


def _mutual_information(P0: np.ndarray, P1: np.ndarray) -> float:
    """I(X; Y) for uniform X over the likelihood pair arrays."""
    avg = 0.5 * (P0 + P1)
    total = 0.0
    for row in (P0, P1):
        mask = row > 0
        total += 0.5 * float((row[mask] * np.log2(row[mask] / avg[mask])).sum())
    return total


# ---------------------------------------------------------------------------
# exact sub-channel statistics


def _joint_likelihoods(kernel: Kernel, channel: DiscreteChannel, i: int):
    """Likelihood pair (P0, P1) of sub-channel i over (prefix, outputs).

    Entry (p, y) of P_v is the probability of observing output vector y
    with earlier inputs equal to p, given input i equals v, marginalizing
    uniformly over the later inputs.
    """
    ell = kernel.length
    if not 1 <= i <= ell:
        raise PolarizeError(f"sub-channel index {i} outside 1..{ell}")
    if ell > MAX_EXACT_LENGTH:
        raise PolarizeError(
            f"exact mode caps the dimension at {MAX_EXACT_LENGTH}, got {ell}")
    w = channel.matrix()
    q = channel.output_size
    L = np.empty((1 << ell, q ** ell))
    for u in range(1 << ell):
        x = kernel(u)
        L[u] = reduce(np.kron, ((w[(x >> c) & 1] for c in range(ell - 1, -1, -1))))
    A = L.reshape(1 << (ell - i), 2, (1 << (i - 1)) * q ** ell).sum(axis=0)
    A /= 1 << (ell - 1)  # uniform weight of prefix and suffix inputs
    return A[0], A[1]


def subchannel_exact(kernel: Kernel, channel: DiscreteChannel, i: int):
    """(I, Z) of sub-channel i by full enumeration (dimension <= 8)."""
    P0, P1 = _joint_likelihoods(kernel, channel, i)
    return _mutual_information(P0, P1), float(np.sqrt(P0 * P1).sum())


def subchannel_channel(kernel: Kernel, channel: DiscreteChannel, i: int,
                       max_outputs: int = 4096) -> DiscreteChannel:
    """Sub-channel i as a DiscreteChannel, outputs merged by posterior.

    Outputs with identical posterior pairs carry no separate information,
    so merging preserves capacity and the Bhattacharyya parameter; this
    keeps repeated application (the tree process) tractable.
    """
    if kernel.length > MAX_STEP_LENGTH:
        raise PolarizeError(
            f"per-step construction caps the dimension at {MAX_STEP_LENGTH}")
    P0, P1 = _joint_likelihoods(kernel, channel, i)
    mass = P0 + P1
    keep = mass > 0
    P0, P1, mass = P0[keep], P1[keep], mass[keep]
    keys = np.round(P1 / mass, 12)
    uniq, inverse = np.unique(keys, return_inverse=True)
    if len(uniq) > max_outputs:
        raise PolarizeError(
            f"merged output alphabet {len(uniq)} exceeds cap {max_outputs}")
    g0 = np.bincount(inverse, weights=P0, minlength=len(uniq))
    g1 = np.bincount(inverse, weights=P1, minlength=len(uniq))
    return DiscreteChannel(tuple(g0 / g0.sum()), tuple(g1 / g1.sum()))


@dataclass(frozen=True)
class SubchannelStats:
    """Per-index capacity and Bhattacharyya values for one kernel/channel."""

    kernel_length: int
    channel: DiscreteChannel
    capacities: tuple
    bhattacharyyas: tuple
    method: str  # "exact" or "monte-carlo(samples=.., seed=..)"


def subchannel_stats(kernel: Kernel, channel: DiscreteChannel,
                     samples: Optional[int] = None,
                     seed: int = 0) -> SubchannelStats:
    """All sub-channel (I, Z) pairs; exact when samples is None."""
    caps, zs = [], []
    for i in range(1, kernel.length + 1):
        if samples is None:
            I, Z = subchannel_exact(kernel, channel, i)
        else:
            I, Z, _ = subchannel_monte_carlo(kernel, channel, i, samples, seed)
        caps.append(I)
        zs.append(Z)
    method = ("exact" if samples is None
              else f"monte-carlo(samples={samples}, seed={seed})")
    return SubchannelStats(kernel.length, channel, tuple(caps), tuple(zs), method)


# ---------------------------------------------------------------------------
# Monte-Carlo estimation


@dataclass(frozen=True)
class MonteCarloEstimate:
    """Unpacks as (I, Z, radius); radius is three standard errors."""

    capacity: float
    bhattacharyya: float
    radius: float
    capacity_radius: float
    bhattacharyya_radius: float

    def __iter__(self):
        return iter((self.capacity, self.bhattacharyya, self.radius))


def subchannel_monte_carlo(kernel: Kernel, channel: DiscreteChannel, i: int,
                           samples: int, seed: int) -> MonteCarloEstimate:
    """Plug-in estimates of (I, Z) for sub-channel i.

    Each trial transmits with input i fixed to zero (the channel is
    symmetric, so the statistics do not depend on it), samples the other
    inputs uniformly and the outputs from the channel, then evaluates both
    hypothesis likelihoods by explicit summation over the later inputs.
    """
    if samples < 1000:
        raise PolarizeError("at least 1000 samples required")
    ell = kernel.length
    if not 1 <= i <= ell:
        raise PolarizeError(f"sub-channel index {i} outside 1..{ell}")
    table = kernel.table
    w = channel.matrix()
    cum = np.cumsum(w, axis=1)
    shifts = np.arange(ell)
    suffixes = np.arange(1 << (ell - i), dtype=np.int64) << i
    i_samples = np.empty(samples)
    z_samples = np.empty(samples)
    for t in range(samples):
        rng = _trial_rng(seed, t)
        prefix = int(rng.integers(0, 1 << (i - 1))) if i > 1 else 0
        suffix = int(rng.integers(0, 1 << (ell - i))) if i < ell else 0
        x = int(table[prefix | (suffix << i)])
        xbits = (x >> shifts) & 1
        y = np.minimum((cum[xbits] < rng.random(ell)[:, None]).sum(axis=1),
                       channel.output_size - 1)
        candidates = np.concatenate([prefix | suffixes,
                                     prefix | (1 << (i - 1)) | suffixes])
        bits = (table[candidates][:, None] >> shifts) & 1
        probs = w[bits, y[None, :]].prod(axis=1)
        half = len(suffixes)
        W0 = probs[:half].mean()
        W1 = probs[half:].mean()
        z_samples[t] = math.sqrt(W1 / W0)
        i_samples[t] = math.log2(2 * W0 / (W0 + W1))
    r_i = 3 * float(i_samples.std()) / math.sqrt(samples)
    r_z = 3 * float(z_samples.std()) / math.sqrt(samples)
    return MonteCarloEstimate(float(i_samples.mean()), float(z_samples.mean()),
                              max(r_i, r_z), r_i, r_z)


# ---------------------------------------------------------------------------
# successive-cancellation decoding


class _StreamDecoder:
    """Sequential likelihood evaluator for one recursion level.

    ``next_pair`` returns the likelihoods of the next undecided input bit
    given everything decided so far, marginalizing undecided bits of the
    current kernel block uniformly; ``push`` fixes the bit.  Completed
    blocks forward their hard kernel outputs to the per-output-coordinate
    child decoders, mirroring the recursive encoder.
    """

    def __init__(self, kernel: Kernel, depth: int, probs: np.ndarray):
        self.kernel = kernel
        self.depth = depth
        if depth == 0:
            self.pair = probs[0]
        else:
            seg = len(probs) // kernel.length
            self.children = [
                _StreamDecoder(kernel, depth - 1, probs[j * seg:(j + 1) * seg])
                for j in range(kernel.length)]
            self.block_bits = []
            self.block_probs = None

    def next_pair(self) -> np.ndarray:
        if self.depth == 0:
            return self.pair
        ell = self.kernel.length
        if self.block_probs is None:
            pairs = np.array([child.next_pair() for child in self.children])
            pairs /= np.maximum(pairs.sum(axis=1, keepdims=True), 1e-300)
            bits = (self.kernel.table[:, None] >> np.arange(ell)) & 1
            self.block_probs = pairs[np.arange(ell)[None, :], bits].prod(axis=1)
        i = len(self.block_bits)
        base = sum(b << k for k, b in enumerate(self.block_bits))
        u = np.arange(1 << ell)
        sel = self.block_probs[(u & ((1 << i) - 1)) == base]
        return sel.reshape(-1, 2).sum(axis=0)

    def push(self, bit: int) -> None:
        if self.depth == 0:
            return
        self.block_bits.append(int(bit))
        if len(self.block_bits) == self.kernel.length:
            val = sum(b << k for k, b in enumerate(self.block_bits))
            x = int(self.kernel.table[val])
            for j, child in enumerate(self.children):
                child.push((x >> j) & 1)
            self.block_bits = []
            self.block_probs = None


def sc_decode(re: RecursiveEncoder, outputs, frozen,
              channel: DiscreteChannel) -> np.ndarray:
    """Successive-cancellation decoding of one received block.

    ``outputs`` are channel output indices, one per code coordinate;
    ``frozen`` maps zero-based input indices to their known bits.  Each
    unfrozen bit gets the MAP decision given the outputs and all earlier
    decisions, later inputs marginalized uniformly.
    """
    n = re.block_length
    y = np.asarray(outputs, dtype=np.int64)
    if y.shape != (n,):
        raise PolarizeError(f"expected {n} channel outputs")
    if y.min() < 0 or y.max() >= channel.output_size:
        raise PolarizeError("channel output index out of range")
    frozen = dict(frozen) if frozen else {}
    w = channel.matrix()
    stream = _StreamDecoder(re.kernel, re.depth, w[:, y].T.copy())
    decoded = np.zeros(n, dtype=np.int64)
    for idx in range(n):
        p0, p1 = stream.next_pair()
        bit = int(frozen[idx]) if idx in frozen else int(p1 > p0)
        stream.push(bit)
        decoded[idx] = bit
    return decoded


def sc_z_profile(kernel: Kernel, channel: DiscreteChannel, depth: int,
                 max_outputs: int = 4096) -> np.ndarray:
    """Bhattacharyya parameter of every decode-order synthesized channel.

    Index n in base-l digits picks one kernel sub-channel per level; the
    least significant digit is applied last.  Exact, so the kernel
    dimension must fit the per-step cap.
    """
    ell = kernel.length
    memo = {0: {0: channel}}

    def chan(level: int, n: int) -> DiscreteChannel:
        if n not in memo.setdefault(level, {}):
            parent = chan(level - 1, n // ell)
            memo[level][n] = subchannel_channel(
                kernel, parent, n % ell + 1, max_outputs)
        return memo[level][n]

    return np.array([chan(depth, n).bhattacharyya()
                     for n in range(ell ** depth)])


def select_frozen(kernel: Kernel, channel: DiscreteChannel, depth: int,
                  rate: float) -> dict:
    """Zero-valued frozen set on the worst indices for the given rate.

    Small kernels rank indices by the exact synthesized Z.  Larger ones
    fall back to a reliability proxy: the product over recursion levels of
    the kernel partial distance picked by each base-l digit (higher partial
    distance, better channel).
    """
    if not 0 <= rate <= 1:
        raise PolarizeError(f"rate {rate} outside [0, 1]")
    ell = kernel.length
    n = ell ** depth
    n_frozen = n - round(rate * n)
    if ell <= MAX_STEP_LENGTH:
        score = -sc_z_profile(kernel, channel, depth)
    else:
        from .decomposition import partial_distance_sequence
        pd = np.array(tuple(partial_distance_sequence(kernel.decomposition())),
                      dtype=float)
        score = np.ones(n)
        idx = np.arange(n)
        for _ in range(depth):
            score *= pd[idx % ell]
            idx //= ell
    worst = np.argsort(score, kind="stable")[:n_frozen]
    return {int(i): 0 for i in worst}


def sc_error_rate(re: RecursiveEncoder, channel: DiscreteChannel,
                  frozen, trials: int, seed: int) -> int:
    """Block errors over seeded trials with random unfrozen bits."""
    n = re.block_length
    frozen = dict(frozen) if frozen else {}
    cum = np.cumsum(channel.matrix(), axis=1)
    errors = 0
    for t in range(trials):
        rng = _trial_rng(seed, t)
        u = rng.integers(0, 2, size=n)
        for idx, bit in frozen.items():
            u[idx] = bit
        x = re.encode(u)
        y = np.minimum((cum[x] < rng.random(n)[:, None]).sum(axis=1),
                       channel.output_size - 1)
        if not np.array_equal(sc_decode(re, y, frozen, channel), u):
            errors += 1
    return errors


# ---------------------------------------------------------------------------
# the Bhattacharyya tree process


@dataclass(frozen=True)
class TreeProcessSample:
    """One uniformly random branch sequence and its resulting Z."""

    depth: int
    branches: tuple
    z: float


@dataclass(frozen=True)
class TreeProcessResult:
    kernel_length: int
    depth: int
    trials: int
    seed: int
    samples: tuple

    def z_values(self) -> np.ndarray:
        return np.array([s.z for s in self.samples])

    def fraction_below(self, beta: float) -> float:
        """Fraction of samples with Z at most 2^(-N^beta), N = l^depth."""
        threshold = 2.0 ** -(float(self.kernel_length ** self.depth) ** beta)
        return float((self.z_values() <= threshold).mean())

    def fraction_extreme(self, lo: float = 0.01, hi: float = 0.99) -> float:
        z = self.z_values()
        return float(((z < lo) | (z > hi)).mean())


def _channel_memo(kernel: Kernel, channel: DiscreteChannel, max_outputs: int):
    memo = {(): channel}

    def chan(branches: tuple) -> DiscreteChannel:
        if branches not in memo:
            memo[branches] = subchannel_channel(
                kernel, chan(branches[:-1]), branches[-1] + 1, max_outputs)
        return memo[branches]

    return chan


def tree_process(kernel: Kernel, channel: DiscreteChannel, depth: int,
                 trials: int, seed: int,
                 max_outputs: int = 4096) -> TreeProcessResult:
    """Monte-Carlo draw of the random polarized sub-channel at given depth.

    Each trial picks the branch at every level uniformly from the l kernel
    sub-channels and reports the exact Z of the resulting channel; shared
    branch prefixes share the channel computation.
    """
    if depth < 0 or trials < 1:
        raise PolarizeError("depth must be >= 0 and trials >= 1")
    chan = _channel_memo(kernel, channel, max_outputs)
    samples = []
    for t in range(trials):
        rng = _trial_rng(seed, t)
        branches = tuple(int(b) for b in
                         rng.integers(0, kernel.length, size=depth))
        samples.append(TreeProcessSample(depth, branches,
                                         chan(branches).bhattacharyya()))
    return TreeProcessResult(kernel.length, depth, trials, seed, tuple(samples))


def tree_leaves_exact(kernel: Kernel, channel: DiscreteChannel, depth: int,
                      max_outputs: int = 4096) -> np.ndarray:
    """Z of every depth-level branch sequence, lexicographic order."""
    chan = _channel_memo(kernel, channel, max_outputs)
    ell = kernel.length
    out = np.empty(ell ** depth)
    for n in range(ell ** depth):
        digits = []
        v = n
        for _ in range(depth):
            digits.append(v % ell)
            v //= ell
        out[n] = chan(tuple(reversed(digits))).bhattacharyya()
    return out
