"""Kernels: coset-sum encoding, bijectivity, recursion, serialization."""

import numpy as np
import pytest

from polarkernels import codes as cd
from polarkernels import decomposition as dc
from polarkernels import kernel as kn


def test_from_decomposition_demo():
    k = kn.demo_kernel_4()
    assert k(0) == 0
    assert sorted(k.table) == list(range(16))


def test_coset_sum_encode_basic():
    s = kn.KERNEL_1_STRUCTURE
    assert kn.coset_sum_encode(s, 0) == 0
    # input bit 16 alone selects the all-ones row
    assert kn.coset_sum_encode(s, 1 << 15) == cd.ALL_ONES_16
    # input bit 1 alone selects the row with only coordinate 16 set
    assert kn.coset_sum_encode(s, 1) == 1 << 15
    assert cd.word_str(kn.coset_sum_encode(s, 1), 16) == "0000000000000001"


def test_coset_sum_encode_errors():
    with pytest.raises(kn.KernelError):
        kn.KernelGroup((1, 2), (0, 1, 2), False)  # needs 4 vectors
    bad = (kn.KernelGroup((1,), (1,), True),
           kn.KernelGroup((3,), (2,), True))  # index 2 missing
    with pytest.raises(kn.KernelError):
        kn.coset_sum_encode(bad, 0)


def test_kernel_1_structural_agreement():
    k = kn.kernel_1()
    assert np.array_equal(kn._structure_table(k.structure, 16), k.table)
    # spot-check the scalar evaluator too
    rng = np.random.default_rng(5)
    for u in rng.integers(0, 1 << 16, size=50):
        assert kn.coset_sum_encode(k.structure, int(u)) == k(int(u))


def test_all_kernels_are_bijections():
    for k in (kn.kernel_1(), kn.kernel_2(), kn.kernel_3(), kn.kernel_4(),
              kn.arikan(), kn.demo_kernel_4()):
        assert sorted(k.table.tolist()) == list(range(1 << k.length))


def test_restriction_consistency():
    k = kn.kernel_2()
    rng = np.random.default_rng(6)
    for _ in range(30):
        i = int(rng.integers(1, 16))
        prefix = [int(b) for b in rng.integers(0, 2, size=i)]
        rest = k.restriction(prefix)
        u = int(rng.integers(0, 1 << (16 - i)))
        full = sum(b << j for j, b in enumerate(prefix)) | (u << i)
        assert rest(u) == k(full)


def test_output_bit():
    k = kn.arikan()
    # g(u1, u2) = (u1 xor u2, u2)
    for u1 in (0, 1):
        for u2 in (0, 1):
            u = u1 | (u2 << 1)
            assert k.output_bit(1, u) == u1 ^ u2
            assert k.output_bit(2, u) == u2


def test_encode_recursive_m1_is_table():
    k = kn.demo_kernel_4()
    re = kn.RecursiveEncoder(k, 1)
    for u in range(16):
        bits = [(u >> j) & 1 for j in range(4)]
        x = re.encode(bits)
        assert sum(int(b) << j for j, b in enumerate(x)) == k(u)


def test_arikan_m2_matches_kronecker_square():
    # x = u[perm] @ (F kron F) mod 2 with F = [[1,0],[1,1]] and the
    # middle two input positions swapped (frozen equivalence oracle)
    re = kn.RecursiveEncoder(kn.arikan(), 2)
    F = np.array([[1, 0], [1, 1]])
    G4 = np.kron(F, F) % 2
    perm = [0, 2, 1, 3]
    for val in range(16):
        u = np.array([(val >> j) & 1 for j in range(4)])
        assert np.array_equal(re.encode(u), (u[perm] @ G4) % 2)


def test_recursive_bijection_small():
    # exhaustive for l=2 and for a random l=3 kernel at m=2
    re = kn.RecursiveEncoder(kn.arikan(), 2)
    images = {tuple(re.encode([(v >> j) & 1 for j in range(4)]))
              for v in range(16)}
    assert len(images) == 16
    k3 = kn.from_decomposition(dc.random_decomposition(3, 17))
    re3 = kn.RecursiveEncoder(k3, 2)
    images = {tuple(re3.encode([(v >> j) & 1 for j in range(9)]))
              for v in range(512)}
    assert len(images) == 512


@pytest.mark.slow
def test_recursive_injectivity_large():
    # l=16, m=2: distinct random inputs map to distinct outputs
    re = kn.RecursiveEncoder(kn.kernel_1(), 2)
    rng = np.random.default_rng(8)
    inputs = rng.integers(0, 2, size=(10 ** 5, 256))
    distinct = np.unique(inputs, axis=0)
    outputs = np.array([re.encode(u) for u in distinct])
    assert len(np.unique(outputs, axis=0)) == len(distinct)


def test_recursive_encoder_validation():
    with pytest.raises(kn.KernelError):
        kn.RecursiveEncoder(kn.arikan(), 0)
    re = kn.RecursiveEncoder(kn.arikan(), 2)
    with pytest.raises(kn.KernelError):
        re.encode([0, 1])
    with pytest.raises(kn.KernelError):
        re.encode([0, 1, 2, 0])


def test_kernel_validation():
    with pytest.raises(kn.KernelError):
        kn.Kernel(2, [0, 0, 1, 2])
    with pytest.raises(kn.KernelError):
        kn.Kernel(2, [0, 1, 2])
    with pytest.raises(kn.KernelError):
        kn.Kernel(2, [0, 1, 3, 2],
                  structure=(kn.KernelGroup((1, 2), (1, 2), True),))


def test_kernel_file_round_trips(tmp_path):
    structural = tmp_path / "k1.txt"
    kn.write_kernel_file(kn.kernel_1(), structural)
    loaded = kn.read_kernel_file(structural)
    assert np.array_equal(loaded.table, kn.kernel_1().table)
    assert loaded.structure is not None

    table = tmp_path / "g2.txt"
    kn.write_kernel_file(kn.arikan(), table)
    loaded = kn.read_kernel_file(table)
    assert np.array_equal(loaded.table, kn.arikan().table)

    bad = tmp_path / "bad.txt"
    bad.write_text("kernel magic length=2\n")
    with pytest.raises(kn.KernelError):
        kn.read_kernel_file(bad)


def test_chain_parameters_match_declarations():
    assert kn.chain_1().parameters() == \
        ((16, 1), (15, 2), (11, 4), (8, 6), (5, 8), (1, 16))
    assert kn.chain_2().parameters() == \
        ((16, 1), (15, 2), (11, 4), (7, 6), (5, 8), (1, 16))
    assert kn.chain_3().parameters() == \
        ((15, 1), (14, 2), (10, 4), (7, 6), (4, 8))
    assert kn.chain_4().parameters() == \
        ((14, 1), (13, 2), (9, 4), (6, 6), (3, 8))


def test_coset_translates_tiling_error():
    parent = cd.single_parity_check(4)
    sub = cd.Code(4, [0, 0b0011, 0b0101])  # cosets do not tile the parent
    with pytest.raises(kn.KernelError):
        kn.coset_translates(parent, sub)
