"""Kernels: materialized bijections on l-bit words plus their encoders.

A kernel may carry a structural form: a list of input-index groups, each
mapping its sub-vector of the input to a coset vector, the kernel output
being the XOR of all group contributions.  The 16-dimensional kernel built
from the parity-check / extended-Hamming / Nordstrom-Robinson /
Reed-Muller / repetition chain ships with such a form.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np

from .codes import (
    ALL_ONES_16,
    HAMMING_COSET_ROWS,
    NR_COSET_VECTORS,
    PARITY_COSET_ROWS,
    RM_1_4_ROWS,
    BinaryWord,
    Code,
    _coords,
    extended_bch_16_7,
    extended_hamming_16,
    nordstrom_robinson,
    reed_muller_1_4,
    repetition,
    shorten,
    single_parity_check,
    word_str,
)
from .decomposition import (
    BinaryDecomposition,
    ChainDecomposition,
    ChainLevel,
    binary_refinement,
    example_chain_4,
)


class KernelError(ValueError):
    """Raised for malformed kernels or structural forms."""


@dataclass(frozen=True)
class KernelGroup:
    """One input-index group of a structural form.

    Linear groups list one generator row per index; the contribution is the
    XOR of the rows whose input bit is set.  Nonlinear groups list all
    2^width coset vectors, indexed by the sub-vector with the first index
    as the most significant digit.
    """

    indices: tuple
    vectors: tuple
    linear: bool

    def __post_init__(self):
        expected = len(self.indices) if self.linear else 1 << len(self.indices)
        if len(self.vectors) != expected:
            raise KernelError(
                f"group {self.indices}: expected {expected} vectors, "
                f"got {len(self.vectors)}")


def coset_sum_encode(structure: Sequence[KernelGroup], u) -> int:
    """Evaluate a structural form: XOR of the per-group coset vectors."""
    bits = u.bits if isinstance(u, BinaryWord) else int(u)
    covered = [i for g in structure for i in g.indices]
    if sorted(covered) != list(range(1, len(covered) + 1)):
        raise KernelError("group indices must partition the input positions")
    out = 0
    for group in structure:
        if group.linear:
            for pos, vec in zip(group.indices, group.vectors):
                if bits >> (pos - 1) & 1:
                    out ^= vec
        else:
            idx = 0
            for pos in group.indices:
                idx = (idx << 1) | (bits >> (pos - 1) & 1)
            out ^= group.vectors[idx]
    return out


def _structure_table(structure: Sequence[KernelGroup], length: int) -> np.ndarray:
    u = np.arange(1 << length, dtype=np.int64)
    table = np.zeros(1 << length, dtype=np.int64)
    for group in structure:
        if group.linear:
            for pos, vec in zip(group.indices, group.vectors):
                table ^= ((u >> (pos - 1)) & 1) * vec
        else:
            idx = np.zeros(1 << length, dtype=np.int64)
            for pos in group.indices:
                idx = (idx << 1) | ((u >> (pos - 1)) & 1)
            table ^= np.asarray(group.vectors, dtype=np.int64)[idx]
    return table


class Kernel:
    """A bijection on l-bit words, stored as a permutation table."""

    def __init__(self, length: int, table,
                 structure: Optional[Sequence[KernelGroup]] = None):
        table = np.asarray(table, dtype=np.int64)
        n = 1 << length
        if table.shape != (n,):
            raise KernelError("table size must be 2^length")
        seen = np.zeros(n, dtype=bool)
        seen[table] = True
        if not seen.all():
            raise KernelError("table is not a permutation")
        if structure is not None:
            structure = tuple(structure)
            if not np.array_equal(_structure_table(structure, length), table):
                raise KernelError("structural form disagrees with the table")
        self.length = length
        self.table = table
        self.table.flags.writeable = False
        self.structure = structure

    def __call__(self, u) -> int:
        bits = u.bits if isinstance(u, BinaryWord) else int(u)
        return int(self.table[bits])

    def output_bit(self, j: int, u) -> int:
        """g_j(u), the j-th output coordinate."""
        return self(u) >> (j - 1) & 1

    def restriction(self, prefix_bits):
        """g with its first input bits pinned; maps the remaining bits."""
        prefix = tuple(int(b) for b in prefix_bits)
        base = sum(b << j for j, b in enumerate(prefix))
        shift = len(prefix)
        return lambda u: int(self.table[base + (int(u) << shift)])

    def decomposition(self) -> BinaryDecomposition:
        return BinaryDecomposition(self.length, self.table)


def from_decomposition(bd: BinaryDecomposition) -> Kernel:
    """The kernel mapping each input to its singleton leaf word."""
    return Kernel(bd.length, bd.table)


def arikan() -> Kernel:
    """The classical 2x2 kernel: (u1, u2) -> (u1 xor u2, u2)."""
    return Kernel(2, [0, 1, 3, 2])


def demo_kernel_4() -> Kernel:
    """The 4-dimensional kernel of the parity / antipodal-pair chain."""
    return from_decomposition(binary_refinement(example_chain_4()))


# ---------------------------------------------------------------------------
# the four 14..16-dimensional chains and their kernels


def _ordered_span(rows) -> tuple:
    """Span of the rows ordered so the first row is the index MSB."""
    out = [0]
    for row in rows:
        out = [x for prev in out for x in (prev, prev ^ row)]
    return tuple(out)


def coset_translates(parent: Code, sub: Code) -> tuple:
    """Greedy minimum-weight translate vectors tiling parent with sub cosets.

    Raises if the cosets of sub do not tile parent exactly, which also
    guards the nonlinear levels where translate closure is not automatic.
    """
    from .codes import _POPCOUNT

    order = np.lexsort((parent.words, _POPCOUNT[parent.words]))
    remaining = set(int(w) for w in parent.words)
    sub_words = [int(w) for w in sub.words]
    translates = []
    for w in parent.words[order]:
        w = int(w)
        if w not in remaining:
            continue
        coset = {w ^ s for s in sub_words}
        if not coset <= remaining:
            raise KernelError("sub-code cosets do not tile the parent code")
        remaining -= coset
        translates.append(w)
    if remaining:
        raise KernelError("sub-code cosets do not tile the parent code")
    return tuple(translates)


def _chain_from_codes(length: int, codes_list, declared) -> ChainDecomposition:
    levels = [ChainLevel(codes_list[0], (0,))]
    for parent, sub in zip(codes_list, codes_list[1:]):
        levels.append(ChainLevel(sub, coset_translates(parent, sub)))
    return ChainDecomposition(length, levels, declared=declared)


KERNEL_1_STRUCTURE = (
    KernelGroup((1,), (_coords(16),), True),
    KernelGroup((2, 3, 4, 5), PARITY_COSET_ROWS, True),
    KernelGroup((6, 7, 8), HAMMING_COSET_ROWS, True),
    KernelGroup((9, 10, 11), NR_COSET_VECTORS, False),
    KernelGroup((12, 13, 14, 15), RM_1_4_ROWS, True),
    KernelGroup((16,), (ALL_ONES_16,), True),
)


@lru_cache(maxsize=None)
def chain_1() -> ChainDecomposition:
    """(16,16,1)-(16,15,2)-(16,11,4)-(16,8,6)-(16,5,8)-(16,1,16).

    Translate lists are fixed to match the structural form, so the refined
    kernel and the coset-sum encoder agree bit for bit.
    """
    full = Code(16, range(1 << 16))
    return ChainDecomposition(
        16,
        [ChainLevel(full, (0,)),
         ChainLevel(single_parity_check(16), _ordered_span((_coords(16),))),
         ChainLevel(extended_hamming_16(), _ordered_span(PARITY_COSET_ROWS)),
         ChainLevel(nordstrom_robinson(), _ordered_span(HAMMING_COSET_ROWS)),
         ChainLevel(reed_muller_1_4(), NR_COSET_VECTORS),
         ChainLevel(repetition(16), _ordered_span(RM_1_4_ROWS))],
        declared=((16, 1), (15, 2), (11, 4), (8, 6), (5, 8), (1, 16)),
    )


@lru_cache(maxsize=None)
def chain_2() -> ChainDecomposition:
    """(16,16,1)-(16,15,2)-(16,11,4)-(16,7,6)-(16,5,8)-(16,1,16)."""
    full = Code(16, range(1 << 16))
    codes_list = [full, single_parity_check(16), extended_hamming_16(),
                  extended_bch_16_7(), reed_muller_1_4(), repetition(16)]
    return _chain_from_codes(
        16, codes_list,
        ((16, 1), (15, 2), (11, 4), (7, 6), (5, 8), (1, 16)))


@lru_cache(maxsize=None)
def chain_3() -> ChainDecomposition:
    """(15,15,1)-(15,14,2)-(15,10,4)-(15,7,6)-(15,4,8)."""
    full = Code(15, range(1 << 15))
    codes_list = [full, single_parity_check(15),
                  shorten(extended_hamming_16(), 1),
                  shorten(nordstrom_robinson(), 1),
                  shorten(reed_muller_1_4(), 1)]
    return _chain_from_codes(
        15, codes_list, ((15, 1), (14, 2), (10, 4), (7, 6), (4, 8)))


@lru_cache(maxsize=None)
def chain_4() -> ChainDecomposition:
    """(14,14,1)-(14,13,2)-(14,9,4)-(14,6,6)-(14,3,8)."""
    full = Code(14, range(1 << 14))
    codes_list = [full, single_parity_check(14),
                  shorten(extended_hamming_16(), 2),
                  shorten(nordstrom_robinson(), 2),
                  shorten(reed_muller_1_4(), 2)]
    return _chain_from_codes(
        14, codes_list, ((14, 1), (13, 2), (9, 4), (6, 6), (3, 8)))


@lru_cache(maxsize=None)
def kernel_1() -> Kernel:
    bd = binary_refinement(chain_1())
    return Kernel(16, bd.table, structure=KERNEL_1_STRUCTURE)


@lru_cache(maxsize=None)
def kernel_2() -> Kernel:
    return from_decomposition(binary_refinement(chain_2()))


@lru_cache(maxsize=None)
def kernel_3() -> Kernel:
    return from_decomposition(binary_refinement(chain_3()))


@lru_cache(maxsize=None)
def kernel_4() -> Kernel:
    return from_decomposition(binary_refinement(chain_4()))


# ---------------------------------------------------------------------------
# recursive construction


@dataclass(frozen=True)
class RecursiveEncoder:
    """Blockwise recursion of a base kernel to dimension l^m."""

    kernel: Kernel
    depth: int

    def __post_init__(self):
        if self.depth < 1:
            raise KernelError("recursion depth must be >= 1")

    @property
    def block_length(self) -> int:
        return self.kernel.length ** self.depth

    def encode(self, u) -> np.ndarray:
        return encode_recursive(self, u)


def _encode_level(kernel: Kernel, m: int, bits: np.ndarray) -> np.ndarray:
    ell = kernel.length
    if m == 1:
        val = int((bits.astype(np.int64) << np.arange(ell)).sum())
        x = int(kernel.table[val])
        return (x >> np.arange(ell)) & 1
    blocks = bits.reshape(-1, ell).astype(np.int64)
    vals = (blocks << np.arange(ell)).sum(axis=1)
    outs = kernel.table[vals]
    # column j collects the j-th output bit of every block
    gamma = (outs[:, None] >> np.arange(ell)) & 1
    return np.concatenate([_encode_level(kernel, m - 1, gamma[:, j])
                           for j in range(ell)])


def encode_recursive(re: RecursiveEncoder, u) -> np.ndarray:
    """Apply the depth-m recursion to a bit vector of length l^m."""
    bits = np.asarray(u, dtype=np.int64)
    if bits.shape != (re.block_length,):
        raise KernelError(f"input must have {re.block_length} bits")
    if not np.isin(bits, (0, 1)).all():
        raise KernelError("input entries must be bits")
    return _encode_level(re.kernel, re.depth, bits).astype(np.int64)


# ---------------------------------------------------------------------------
# kernel files


def write_kernel_file(kernel: Kernel, path) -> None:
    """Structural forms serialize as group listings, others as hex tables."""
    with open(path, "w") as fh:
        if kernel.structure is not None:
            fh.write(f"kernel structural length={kernel.length} "
                     f"groups={len(kernel.structure)}\n")
            for group in kernel.structure:
                idx = "-".join(str(i) for i in
                               (group.indices[0], group.indices[-1])) \
                    if len(group.indices) > 1 else str(group.indices[0])
                vecs = ",".join(word_str(v, kernel.length) for v in group.vectors)
                fh.write(f"group indices={idx} "
                         f"linear={'yes' if group.linear else 'no'} "
                         f"vectors={vecs}\n")
        else:
            fh.write(f"kernel table length={kernel.length}\n")
            for u, x in enumerate(kernel.table):
                fh.write(f"{u:04x} {int(x):04x}\n")


def read_kernel_file(path) -> Kernel:
    with open(path) as fh:
        header = fh.readline().split()
        if len(header) < 2 or header[0] != "kernel":
            raise KernelError(f"{path}: not a kernel file")
        fields = dict(item.split("=") for item in header[2:])
        length = int(fields["length"])
        if header[1] == "table":
            table = np.zeros(1 << length, dtype=np.int64)
            for line in fh:
                if line.strip():
                    u, x = (int(tok, 16) for tok in line.split())
                    table[u] = x
            return Kernel(length, table)
        if header[1] != "structural":
            raise KernelError(f"{path}: unknown kernel format {header[1]!r}")
        groups = []
        for line in fh:
            line = line.strip()
            if not line:
                continue
            gf = dict(item.split("=", 1) for item in line.split()[1:])
            span = [int(tok) for tok in gf["indices"].split("-")]
            indices = tuple(range(span[0], span[-1] + 1))
            vectors = tuple(BinaryWord.from_string(s).bits
                            for s in gf["vectors"].split(","))
            groups.append(KernelGroup(indices, vectors, gf["linear"] == "yes"))
        return Kernel(length, _structure_table(groups, length), structure=groups)
