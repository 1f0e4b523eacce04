"""Chain and binary code decompositions and their partial distances.

A chain decomposition splits the total space {0,1}^l into nested coset
partitions.  Refining every level into two-way splits gives a binary
decomposition, whose singleton leaves define a bijection on l-bit words.
The binary decomposition is stored as exactly that bijection: a permutation
table G with G[u] = x, where input bit i of u (bit 1 is the LSB) selects
the child taken at depth i of the partition tree.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .codes import (
    MAX_LENGTH,
    _POPCOUNT,
    BinaryWord,
    Code,
    CodeError,
    has_distance_at_least,
    read_code_file,
    word_str,
    write_code_file,
)

try:
    from numba import njit

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    _HAVE_NUMBA = False

_POPCOUNT64 = _POPCOUNT.astype(np.int64)


class DecompositionError(ValueError):
    """Raised for malformed chain or binary decompositions."""


@dataclass(frozen=True)
class PartialDistanceSequence:
    """The distances D_1..D_l of a binary decomposition, in index order."""

    length: int
    values: tuple

    def __post_init__(self):
        if len(self.values) != self.length:
            raise DecompositionError("sequence length mismatch")
        if any(d < 1 for d in self.values):
            raise DecompositionError("partial distances must be positive")

    def __iter__(self):
        return iter(self.values)

    def __getitem__(self, idx):
        return self.values[idx]


def exponent(pd: PartialDistanceSequence) -> float:
    """E = (1/l) * sum_i log_l(D_i)."""
    ell = pd.length
    return sum(math.log(d) for d in pd.values) / (ell * math.log(ell))


def exponent_lower_bound(params: Sequence[tuple], ell: int) -> float:
    """(1/l) * sum_i (k_i - k_{i+1}) * log_l(d_i) over chain levels (k_i, d_i).

    The k_i must be strictly decreasing; a final k of 0 is implied.
    """
    ks = [k for k, _ in params]
    if any(a <= b for a, b in zip(ks, ks[1:])) or ks[-1] < 0:
        raise DecompositionError("level sizes k_i must be strictly decreasing")
    total = 0.0
    for j, (k, d) in enumerate(params):
        k_next = ks[j + 1] if j + 1 < len(ks) else 0
        total += (k - k_next) * math.log(d)
    return total / (ell * math.log(ell))


# ---------------------------------------------------------------------------
# chain decompositions


@dataclass(frozen=True)
class ChainLevel:
    """One chain level: a representative sub-code plus the ordered translate
    vectors that tile the previous level's representative with its cosets."""

    code: Code
    translates: tuple


class ChainDecomposition:
    """Nested coset partitions of {0,1}^l, starting from the total space.

    ``levels[0]`` must be the total space with the single translate 0; each
    later level's translates must tile the previous code exactly.  Optional
    ``declared`` holds (k_i, d_i) pairs which are checked against the actual
    level sizes and minimum distances.
    """

    def __init__(self, length: int, levels: Sequence[ChainLevel],
                 declared: Optional[Sequence[tuple]] = None):
        if not 1 <= length <= MAX_LENGTH:
            raise DecompositionError(f"length {length} outside 1..{MAX_LENGTH}")
        levels = tuple(levels)
        if not levels:
            raise DecompositionError("a chain needs at least one level")
        if levels[0].code.size != 1 << length or levels[0].translates != (0,):
            raise DecompositionError("level 0 must be the total space with translate 0")
        for j in range(1, len(levels)):
            parent, level = levels[j - 1].code, levels[j]
            if level.code.length != length:
                raise DecompositionError("all levels must share the chain length")
            if level.translates[0] != 0:
                raise DecompositionError(f"level {j}: first translate must be 0 (nesting)")
            if len(level.translates) * level.code.size != parent.size:
                raise DecompositionError(f"level {j}: cosets do not fill the parent")
            tiled = np.concatenate([t ^ level.code.words for t in level.translates])
            tiled = np.unique(tiled)
            if len(tiled) != parent.size or not np.array_equal(tiled, parent.words):
                raise DecompositionError(f"level {j}: cosets do not tile the parent")
        self.length = length
        self.levels = levels
        if declared is not None:
            declared = tuple(declared)
            if len(declared) != len(levels):
                raise DecompositionError("declared parameters must match the level count")
            for j, (k, d) in enumerate(declared):
                if levels[j].code.size != 1 << k:
                    raise DecompositionError(f"level {j}: declared k={k} mismatches size")
                if not has_distance_at_least(levels[j].code, d):
                    raise DecompositionError(f"level {j}: declared d={d} exceeds actual")
        self.declared = declared

    def parameters(self) -> tuple:
        """(k_i, d_i) per level: declared values, or measured ones."""
        if self.declared is not None:
            return self.declared
        out = []
        for level in self.levels:
            k = level.code.size.bit_length() - 1
            d = 1 if level.code.size < 2 else level.code.min_distance()
            out.append((k, d))
        return tuple(out)

    def lower_bound_sequence(self) -> PartialDistanceSequence:
        """The element-wise partial-distance floor implied by the chain."""
        params = list(self.parameters())
        if params[-1][0] > 0:
            # implicit final split of the last code down to singletons
            params.append((0, 1))
        floors = []
        for i in range(1, self.length + 1):
            pos = self.length - i + 1
            for j in range(len(params) - 1):
                if params[j + 1][0] < pos <= params[j][0]:
                    floors.append(params[j][1])
                    break
        if len(floors) != self.length:
            raise DecompositionError("chain levels do not cover all input bits")
        return PartialDistanceSequence(self.length, tuple(floors))


def example_chain_4() -> ChainDecomposition:
    """The length-4 demo chain: total space, even-weight words, antipodal pairs."""
    from .codes import repetition, single_parity_check

    full = Code(4, range(16))
    spc = single_parity_check(4)
    rep = repetition(4)
    return ChainDecomposition(
        4,
        [ChainLevel(full, (0,)),
         ChainLevel(spc, (0, 1)),
         ChainLevel(rep, (0, 3, 5, 6))],
        declared=((4, 1), (3, 2), (1, 4)),
    )


# ---------------------------------------------------------------------------
# binary decompositions


class BinaryDecomposition:
    """A depth-l binary partition tree of {0,1}^l with singleton leaves.

    Stored as the induced bijection: ``table[u]`` is the unique leaf word of
    the branch selected by the bits of u (bit i of u picks the child at
    depth i).  Sub-codes at any depth are recovered by fixing low bits of u.
    """

    def __init__(self, length: int, table):
        if not 1 <= length <= MAX_LENGTH:
            raise DecompositionError(f"length {length} outside 1..{MAX_LENGTH}")
        table = np.asarray(table, dtype=np.int64)
        n = 1 << length
        if table.shape != (n,):
            raise DecompositionError("table size must be 2^length")
        seen = np.zeros(n, dtype=bool)
        seen[table] = True
        if not seen.all():
            raise DecompositionError("table is not a permutation")
        self.length = length
        self.table = table
        self.table.flags.writeable = False

    def __eq__(self, other):
        return (isinstance(other, BinaryDecomposition)
                and self.length == other.length
                and np.array_equal(self.table, other.table))

    def subcode(self, prefix_bits: Iterable[int]) -> np.ndarray:
        """Words of the sub-code reached by the given input-bit prefix."""
        prefix = tuple(prefix_bits)
        i = len(prefix)
        if i > self.length:
            raise DecompositionError("prefix longer than the decomposition depth")
        base = sum(b << j for j, b in enumerate(prefix))
        high = np.arange(1 << (self.length - i), dtype=np.int64) << i
        return self.table[base + high]


def _as_prefix(prefix, expected_len: int) -> tuple:
    if prefix is None:
        bits = ()
    elif isinstance(prefix, BinaryWord):
        bits = tuple(prefix.bits >> j & 1 for j in range(prefix.length))
    else:
        bits = tuple(int(b) for b in prefix)
    if len(bits) != expected_len:
        raise DecompositionError(f"prefix must have {expected_len} bits")
    if any(b not in (0, 1) for b in bits):
        raise DecompositionError("prefix bits must be 0 or 1")
    return bits


def partial_distance(bd: BinaryDecomposition, i: int, prefix=None) -> int:
    """Minimum cross distance between the two children split by bit i."""
    if not 1 <= i <= bd.length:
        raise DecompositionError(f"bit index {i} outside 1..{bd.length}")
    bits = _as_prefix(prefix, i - 1)
    left = bd.subcode(bits + (0,))
    right = bd.subcode(bits + (1,))
    best = bd.length
    block = max(1, (1 << 22) // len(right))
    for lo in range(0, len(left), block):
        d = int(_POPCOUNT[left[lo:lo + block, None] ^ right[None, :]].min())
        if d < best:
            best = d
            if best == 1:
                break
    return best


if _HAVE_NUMBA:

    @njit(cache=True)
    def _pd_scan(table, length, pop):  # pragma: no cover - compiled
        n = table.shape[0]
        best = np.full(length, length, dtype=np.int64)
        for t in range(1, n):
            i = 0
            while (t >> i) & 1 == 0:
                i += 1
            b = best[i]
            if b == 1:
                continue
            bit = 1 << i
            step = bit << 1
            done = False
            for hi in range(0, n, step):
                for u in range(hi, hi + bit):
                    d = pop[table[u] ^ table[u ^ t]]
                    if d < b:
                        b = d
                        if b == 1:
                            done = True
                            break
                if done:
                    break
            best[i] = b
        return best


def _pd_scan_numpy(table: np.ndarray, length: int) -> np.ndarray:
    n = len(table)
    best = np.full(length, length, dtype=np.int64)
    idx = np.arange(n, dtype=np.int64)
    for t in range(1, n):
        i = (t & -t).bit_length() - 1
        if best[i] == 1:
            continue
        keep = (idx >> i) & 1 == 0
        u = idx[keep]
        d = int(_POPCOUNT64[table[u] ^ table[u ^ t]].min())
        if d < best[i]:
            best[i] = d
    return best


def partial_distance_sequence(bd: BinaryDecomposition) -> PartialDistanceSequence:
    """Exact D_i for every i, minimized over all prefixes.

    Every cross pair at depth i is (G[u], G[u^t]) with bit i of u clear and
    t's lowest set bit at position i, so one pass over all (u, t) pairs,
    binned by the lowest set bit of t, covers every level at once.
    """
    if _HAVE_NUMBA:
        best = _pd_scan(bd.table, bd.length, _POPCOUNT64)
    else:
        best = _pd_scan_numpy(bd.table, bd.length)
    return PartialDistanceSequence(bd.length, tuple(int(d) for d in best))


def swap_coordinates(bd: BinaryDecomposition, k: int) -> BinaryDecomposition:
    """The decomposition induced by exchanging input bits k and k+1."""
    if not 1 <= k <= bd.length - 1:
        raise DecompositionError(f"swap index {k} outside 1..{bd.length - 1}")
    idx = np.arange(1 << bd.length, dtype=np.int64)
    diff = ((idx >> (k - 1)) ^ (idx >> k)) & 1
    swapped = idx ^ (diff << (k - 1)) ^ (diff << k)
    return BinaryDecomposition(bd.length, bd.table[swapped])


def is_polarizing(bd: BinaryDecomposition) -> bool:
    """True iff some depth-l leaf pair is at Hamming distance >= 2."""
    half = 1 << (bd.length - 1)
    low = bd.table[:half]
    high = bd.table[half:]
    return int(_POPCOUNT[low ^ high].max()) >= 2


def random_decomposition(length: int, rng) -> BinaryDecomposition:
    """A uniformly random binary decomposition (a random bijection)."""
    if isinstance(rng, (int, np.integer)):
        rng = np.random.default_rng(rng)
    return BinaryDecomposition(length, rng.permutation(1 << length))


# ---------------------------------------------------------------------------
# chain -> binary refinement


def _stage_bit_index(u: np.ndarray, first_bit: int, width: int) -> np.ndarray:
    """Coset index from input bits first_bit..first_bit+width-1, first bit
    most significant."""
    idx = np.zeros(len(u), dtype=np.int64)
    for t in range(width):
        idx = (idx << 1) | ((u >> (first_bit + t - 1)) & 1)
    return idx


def binary_refinement(chain: ChainDecomposition) -> BinaryDecomposition:
    """Split every chain level into binary steps.

    Each level's translates are consumed by consecutive input bits, the
    earliest bit acting as the most significant digit of the translate
    index.  If the last level is not a singleton, its words (ordered by
    weight then value) serve as the final translates.
    """
    ell = chain.length
    stages = []
    for level in chain.levels[1:]:
        count = len(level.translates)
        if count & (count - 1):
            raise DecompositionError("level size ratio is not a power of two")
        stages.append((count.bit_length() - 1,
                       np.asarray(level.translates, dtype=np.int64)))
    last = chain.levels[-1].code
    if last.size > 1:
        order = np.lexsort((last.words, _POPCOUNT[last.words]))
        stages.append((last.size.bit_length() - 1, last.words[order]))
    if sum(w for w, _ in stages) != ell:
        raise DecompositionError("chain does not consume exactly l input bits")

    u = np.arange(1 << ell, dtype=np.int64)
    table = np.zeros(1 << ell, dtype=np.int64)
    bit = 1
    for width, translates in stages:
        table ^= translates[_stage_bit_index(u, bit, width)]
        bit += width
    return BinaryDecomposition(ell, table)


# ---------------------------------------------------------------------------
# decomposition files


def write_decomposition_file(chain: ChainDecomposition, path) -> None:
    """One line per level referencing a sibling code file, leaders inline."""
    base = os.path.splitext(path)[0]
    with open(path, "w") as fh:
        fh.write(f"length={chain.length} levels={len(chain.levels)}\n")
        params = chain.parameters()
        for j, level in enumerate(chain.levels):
            code_path = f"{base}.level{j}.code"
            write_code_file(level.code, code_path)
            leaders = ",".join(word_str(t, chain.length) for t in level.translates)
            k, d = params[j]
            fh.write(f"level k={k} d={d} code={os.path.basename(code_path)} "
                     f"leaders={leaders}\n")


def read_decomposition_file(path) -> ChainDecomposition:
    directory = os.path.dirname(os.path.abspath(path))
    with open(path) as fh:
        header = dict(item.split("=") for item in fh.readline().split())
        length = int(header["length"])
        levels, declared = [], []
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if not line.startswith("level "):
                raise DecompositionError(f"bad decomposition line: {line!r}")
            fields = dict(item.split("=", 1) for item in line[6:].split())
            code = read_code_file(os.path.join(directory, fields["code"]))
            translates = tuple(BinaryWord.from_string(s).bits
                               for s in fields["leaders"].split(","))
            levels.append(ChainLevel(code, translates))
            declared.append((int(fields["k"]), int(fields["d"])))
    if len(levels) != int(header["levels"]):
        raise DecompositionError(f"{path}: header level count mismatch")
    return ChainDecomposition(length, levels, declared=tuple(declared))
