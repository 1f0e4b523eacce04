"""Binary block codes of length at most 16.

Codewords are stored as plain integers: coordinate 1 is the least
significant bit, coordinate ``n`` the bit ``1 << (n - 1)``.  When a word is
rendered as a string, coordinate 1 comes first, so ``"0001"`` has a one in
coordinate 4.  All codes are kept as explicit word sets; with length <= 16
the universe has at most 65536 elements and enumeration beats any algebraic
shortcut.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from fractions import Fraction
from importlib import resources

import numpy as np

MAX_LENGTH = 16

# popcount lookup for 16-bit values, shared by all distance computations
_POPCOUNT = np.array([bin(i).count("1") for i in range(1 << 16)], dtype=np.uint8)


class CodeError(ValueError):
    """Raised for malformed codes or out-of-range constructions."""


@dataclass(frozen=True, order=True)
class BinaryWord:
    """A fixed-length bit vector; ``bits`` holds coordinate i at 1 << (i-1)."""

    bits: int
    length: int

    def __post_init__(self):
        if not 1 <= self.length <= MAX_LENGTH:
            raise CodeError(f"word length {self.length} outside 1..{MAX_LENGTH}")
        if not 0 <= self.bits < (1 << self.length):
            raise CodeError(f"bits {self.bits:#x} do not fit in {self.length} coordinates")

    @classmethod
    def from_string(cls, text: str) -> "BinaryWord":
        bits = 0
        for i, ch in enumerate(text):
            if ch == "1":
                bits |= 1 << i
            elif ch != "0":
                raise CodeError(f"invalid codeword string {text!r}")
        return cls(bits, len(text))

    def __str__(self) -> str:
        return "".join("1" if self.bits >> i & 1 else "0" for i in range(self.length))

    def __xor__(self, other: "BinaryWord") -> "BinaryWord":
        if self.length != other.length:
            raise CodeError("length mismatch")
        return BinaryWord(self.bits ^ other.bits, self.length)

    @property
    def weight(self) -> int:
        return int(_POPCOUNT[self.bits])


def hamming_distance(a: BinaryWord, b: BinaryWord) -> int:
    """Number of coordinates where the two equal-length words differ."""
    if a.length != b.length:
        raise CodeError(f"length mismatch: {a.length} vs {b.length}")
    return int(_POPCOUNT[a.bits ^ b.bits])


def word_str(bits: int, length: int) -> str:
    return str(BinaryWord(bits, length))


class Code:
    """An explicit set of distinct equal-length binary words."""

    def __init__(self, length: int, words):
        if not 1 <= length <= MAX_LENGTH:
            raise CodeError(f"code length {length} outside 1..{MAX_LENGTH}")
        ints = sorted({w.bits if isinstance(w, BinaryWord) else int(w) for w in words})
        if not ints:
            raise CodeError("a code needs at least one word")
        if ints[-1] >= 1 << length:
            raise CodeError("codeword does not fit the declared length")
        self.length = length
        self.words = np.asarray(ints, dtype=np.int64)
        self.word_set = frozenset(ints)
        self._min_distance = None

    @property
    def size(self) -> int:
        return len(self.words)

    def __contains__(self, word) -> bool:
        bits = word.bits if isinstance(word, BinaryWord) else int(word)
        return bits in self.word_set

    def __eq__(self, other) -> bool:
        return (isinstance(other, Code) and self.length == other.length
                and self.word_set == other.word_set)

    def __hash__(self):
        return hash((self.length, self.word_set))

    def __repr__(self):
        d = self._min_distance if self._min_distance is not None else "?"
        return f"Code(length={self.length}, size={self.size}, d={d})"

    def is_subcode_of(self, other: "Code") -> bool:
        return self.length == other.length and self.word_set <= other.word_set

    def min_distance(self) -> int:
        if self._min_distance is None:
            self._min_distance = min_distance(self)
        return self._min_distance


_MASKS_BY_WEIGHT: dict = {}


def _masks_by_weight(length: int) -> list:
    if length not in _MASKS_BY_WEIGHT:
        vals = np.arange(1, 1 << length, dtype=np.int64)
        w = _POPCOUNT[vals]
        _MASKS_BY_WEIGHT[length] = [vals[w == d] for d in range(length + 1)]
    return _MASKS_BY_WEIGHT[length]


def _closest_pair_within(words: np.ndarray, length: int, limit: int):
    """Smallest pairwise distance if it is <= limit, else None.

    Searches outward by distance: a pair at distance d exists iff some word
    XOR some weight-d mask lands back in the code.  Cost is
    |code| * #masks(<= limit), which stays small because large codes have
    small minimum distance and vice versa.
    """
    member = np.zeros(1 << length, dtype=bool)
    member[words] = True
    by_weight = _masks_by_weight(length)
    for d in range(1, limit + 1):
        masks = by_weight[d]
        chunk = max(1, (1 << 22) // max(1, len(words)))
        for lo in range(0, len(masks), chunk):
            if member[words[:, None] ^ masks[None, lo:lo + chunk]].any():
                return d
    return None


def min_distance(c: Code) -> int:
    """Exact minimum pairwise Hamming distance."""
    if c.size < 2:
        raise CodeError("min distance needs at least two words")
    return _closest_pair_within(c.words, c.length, c.length)


def has_distance_at_least(c: Code, d: int) -> bool:
    """True iff every pair of distinct codewords is at distance >= d."""
    if d <= 1 or c.size < 2:
        return True
    return _closest_pair_within(c.words, c.length, d - 1) is None


@dataclass(frozen=True)
class DistanceDistribution:
    """Average distance distribution B_0..B_l of a code (exact rationals)."""

    length: int
    values: tuple

    def __post_init__(self):
        assert len(self.values) == self.length + 1

    def __getitem__(self, i: int) -> Fraction:
        return self.values[i]


def distance_distribution(c: Code) -> DistanceDistribution:
    """B_i = (1/M) * #ordered codeword pairs at distance i."""
    counts = np.zeros(c.length + 1, dtype=np.int64)
    words = c.words
    block = max(1, (1 << 25) // len(words))
    for lo in range(0, len(words), block):
        chunk = _POPCOUNT[words[lo:lo + block, None] ^ words[None, :]]
        counts += np.bincount(chunk.ravel(), minlength=c.length + 1)
    m = c.size
    values = tuple(Fraction(int(counts[i]), m) for i in range(c.length + 1))
    return DistanceDistribution(c.length, values)


# ---------------------------------------------------------------------------
# constructors


def repetition(n: int) -> Code:
    """The two-word code {0^n, 1^n}."""
    if not 1 <= n <= MAX_LENGTH:
        raise CodeError(f"repetition length {n} outside 1..{MAX_LENGTH}")
    return Code(n, [0, (1 << n) - 1])


def single_parity_check(n: int) -> Code:
    """All even-weight words of length n."""
    if not 2 <= n <= MAX_LENGTH:
        raise CodeError(f"parity-check length {n} outside 2..{MAX_LENGTH}")
    universe = np.arange(1 << n, dtype=np.int64)
    return Code(n, universe[_POPCOUNT[universe] % 2 == 0])


def _coords(*positions: int) -> int:
    bits = 0
    for p in positions:
        bits |= 1 << (p - 1)
    return bits


def _span(generators) -> list:
    out = [0]
    for g in generators:
        out += [x ^ g for x in out]
    return out


ALL_ONES_16 = (1 << 16) - 1

# Generator rows used by the 16-dimensional constructions.  These are the
# same vectors the coset-sum kernel encoder uses; see kernel.py.
RM_1_4_ROWS = (
    _coords(2, 4, 6, 8, 10, 12, 14, 16),
    _coords(3, 4, 7, 8, 11, 12, 15, 16),
    _coords(5, 6, 7, 8, 13, 14, 15, 16),
    _coords(9, 10, 11, 12, 13, 14, 15, 16),
)
NR_COSET_VECTORS = (
    0,
    _coords(7, 8, 10, 12, 14, 15),
    _coords(4, 8, 10, 13, 15, 16),
    _coords(4, 7, 11, 13, 14, 15),
    _coords(4, 6, 7, 8, 12, 13),
    _coords(6, 7, 11, 12, 14, 16),
    _coords(4, 6, 10, 11, 12, 15),
    _coords(6, 8, 10, 11, 13, 14),
)
HAMMING_COSET_ROWS = (
    _coords(4, 8, 12, 16),
    _coords(6, 8, 14, 16),
    _coords(10, 12, 14, 16),
)
PARITY_COSET_ROWS = (
    _coords(8, 16),
    _coords(12, 16),
    _coords(14, 16),
    _coords(15, 16),
)

# A (16, 2^7, 6) linear code nested between reed_muller_1_4 and
# extended_hamming_16: two extra generators on top of the RM rows, found by
# exhaustive search over the Hamming/RM coset quotient, then frozen here.
BCH_EXTRA_ROWS = (854, 1379)
# completes the (16,7,6) code to extended_hamming_16
BCH_TO_HAMMING_ROWS = (15, 51, 85, 4369)


def reed_muller_1_4() -> Code:
    """The (16, 32, 8) first-order Reed-Muller code."""
    return Code(16, _span(RM_1_4_ROWS + (ALL_ONES_16,)))


def nordstrom_robinson() -> Code:
    """The nonlinear (16, 256, 6) code, eight cosets of reed_muller_1_4."""
    rm = _span(RM_1_4_ROWS + (ALL_ONES_16,))
    return Code(16, [v ^ x for v in NR_COSET_VECTORS for x in rm])


def extended_hamming_16() -> Code:
    """The (16, 2048, 4) extended Hamming code containing reed_muller_1_4."""
    nr = nordstrom_robinson()
    return Code(16, [a ^ x for a in _span(HAMMING_COSET_ROWS) for x in nr.words])


def extended_bch_16_7() -> Code:
    """A (16, 128, 6) linear code with RM(1,4) below and ext. Hamming above.

    Stored as an explicit generator list rather than produced by BCH
    machinery; see BCH_EXTRA_ROWS.
    """
    return Code(16, _span(RM_1_4_ROWS + (ALL_ONES_16,) + BCH_EXTRA_ROWS))


def shorten(c: Code, count: int = 1) -> Code:
    """Keep the words ending in 0 and drop the last coordinate, repeatedly."""
    if not 0 <= count < c.length:
        raise CodeError(f"cannot shorten a length-{c.length} code {count} times")
    words = c.words
    length = c.length
    for _ in range(count):
        top = 1 << (length - 1)
        words = words[words & top == 0]
        length -= 1
        if len(words) == 0:
            raise CodeError("shortening produced an empty code")
    return Code(length, words)


# ---------------------------------------------------------------------------
# best-known minimum distance table


_BEST_DISTANCE = None


def _best_distance_table() -> dict:
    global _BEST_DISTANCE
    if _BEST_DISTANCE is None:
        table = {}
        path = resources.files("polarkernels.data").joinpath("best_distance.csv")
        with path.open() as fh:
            for row in csv.DictReader(fh):
                table[int(row["n"]), int(row["k"])] = int(row["d"])
        _BEST_DISTANCE = table
    return _BEST_DISTANCE


def best_distance(n: int, k: int) -> int:
    """Largest possible minimum distance of a binary code of length n, size 2^k."""
    try:
        return _best_distance_table()[n, k]
    except KeyError:
        raise CodeError(f"no best-distance entry for n={n}, k={k}") from None


# ---------------------------------------------------------------------------
# plain-text code files


def write_code_file(c: Code, path) -> None:
    with open(path, "w") as fh:
        fh.write(f"length={c.length} size={c.size}\n")
        for w in c.words:
            fh.write(word_str(int(w), c.length) + "\n")


def read_code_file(path) -> Code:
    with open(path) as fh:
        header = fh.readline().split()
        fields = dict(item.split("=") for item in header)
        length = int(fields["length"])
        words = [BinaryWord.from_string(line.strip()).bits
                 for line in fh if line.strip()]
    code = Code(length, words)
    if code.size != int(fields["size"]):
        raise CodeError(f"code file {path}: header size {fields['size']} != {code.size}")
    return code
