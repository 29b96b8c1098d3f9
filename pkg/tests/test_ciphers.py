import itertools
import struct

import pytest

from efxlab import ciphers
from efxlab.ciphers import (
    ConstructionKind,
    KeyDerivation,
    KeyMaterial,
    derive_related_key,
    identity_cipher,
    identity_permutation,
    make_construction,
    make_ideal_cipher,
    make_permutation,
)


def test_permutation_one_bit():
    for seed in range(20):
        p = make_permutation(1, seed)
        assert p.table in ([0, 1], [1, 0])


def test_permutation_deterministic():
    assert make_permutation(3, 12345).table == make_permutation(3, 12345).table


def test_permutation_inverse_and_dump():
    p = make_permutation(4, 99)
    assert sorted(p.table) == list(range(16))
    assert all(p.inverse_table[p.table[x]] == x for x in range(16))
    blob = p.to_bytes()
    assert list(struct.unpack("<16H", blob)) == p.table


def test_permutation_uniformity_chi_square():
    # sweep seeds, count each of the 24 permutations of 4 elements
    sweeps = 100_000
    counts = {}
    for seed in range(sweeps):
        key = tuple(make_permutation(2, seed).table)
        counts[key] = counts.get(key, 0) + 1
    assert len(counts) == 24
    expected = sweeps / 24
    chi2 = sum((c - expected) ** 2 / expected for c in counts.values())
    # 23 degrees of freedom; 3-sigma-ish ceiling is ~50
    assert chi2 < 50, chi2


def test_permutation_range_errors():
    with pytest.raises(ValueError):
        make_permutation(0, 1)
    with pytest.raises(ValueError):
        make_permutation(17, 1)


def test_ideal_cipher_determinism_and_roundtrip():
    e = make_ideal_cipher(4, 4, 2024)
    t1 = e.permutation(5).table
    t2 = make_ideal_cipher(4, 4, 2024).permutation(5).table
    assert t1 == t2
    for k in range(16):
        assert all(e.backward(k, e.forward(k, x)) == x for x in range(16))


def test_ideal_cipher_distinct_keys_differ():
    differing = 0
    for seed in range(50):
        e = make_ideal_cipher(4, 4, seed)
        if e.permutation(0).table != e.permutation(1).table:
            differing += 1
    assert differing == 50


def test_ideal_cipher_range_errors():
    with pytest.raises(ValueError):
        make_ideal_cipher(0, 4, 1)
    with pytest.raises(ValueError):
        make_ideal_cipher(4, 17, 1)
    e = make_ideal_cipher(2, 2, 1)
    with pytest.raises(ValueError):
        e.forward(4, 0)


def _efx_instance(n, kappa, seed, k, k1, k2):
    e1 = make_ideal_cipher(n, kappa, ciphers.derive_seed(seed, "E1"))
    e2 = make_ideal_cipher(n, kappa, ciphers.derive_seed(seed, "E2"))
    return make_construction(ConstructionKind.EFX, [e1, e2],
                             KeyMaterial(k=k, k1=k1, k2=k2))


class _RelatedKeyView:
    """Cipher view whose key k acts as pi(k) of the base cipher."""

    def __init__(self, base, kd):
        self.base = base
        self.kd = kd
        self.n = base.n
        self.kappa = base.kappa

    def forward(self, key, x):
        return self.base.forward(derive_related_key(self.kd, key), x)

    def backward(self, key, y):
        return self.base.backward(derive_related_key(self.kd, key), y)

    def permutation(self, key):
        return self.base.permutation(derive_related_key(self.kd, key))


def test_two_xor_is_an_efx_instance():
    n = kappa = 4
    e = make_ideal_cipher(n, kappa, 31337)
    kd = KeyDerivation()
    for k, z in itertools.product(range(16), range(16)):
        tx = make_construction(ConstructionKind.TWO_XOR, [e],
                               KeyMaterial(k=k, k1=z), kd)
        efx = make_construction(ConstructionKind.EFX,
                                [e, _RelatedKeyView(e, kd)],
                                KeyMaterial(k=k, k1=z, k2=z))
        assert all(tx._raw_encrypt(x) == efx._raw_encrypt(x) for x in range(16))


def test_efx_identity_stubs_collapse():
    e = identity_cipher(3, 3)
    inst = make_construction(ConstructionKind.EFX, [e, e],
                             KeyMaterial(k=0, k1=0b101, k2=0b011))
    assert all(inst._raw_encrypt(x) == (0b101 ^ 0b011 ^ x) for x in range(8))


def test_ecbc3_identity_stubs_collapse():
    e = identity_cipher(3, 3)
    inst = make_construction(ConstructionKind.ECBC3, [e],
                             KeyMaterial(k=0, m1=0, m2=0))
    assert all(inst._raw_encrypt(x) == x for x in range(8))


def test_em_identity_case():
    perm = identity_permutation(4)
    inst = make_construction(ConstructionKind.EM, [perm], KeyMaterial(k1=0, k2=0))
    assert all(inst._raw_encrypt(x) == x for x in range(16))


def test_defx_equals_efx_of_inner_cipher():
    n = kappa = 4
    seed = 777
    comps = [make_ideal_cipher(n, kappa, ciphers.derive_seed(seed, i))
             for i in (1, 2, 3)]
    km = KeyMaterial(k=9, k1=5, k2=12)
    defx = make_construction(ConstructionKind.DEFX, comps, km)
    efx = make_construction(ConstructionKind.EFX, comps[1:], km)
    e1 = comps[0]
    for x in range(16):
        assert defx._raw_encrypt(x) == efx._raw_encrypt(e1.forward(km.k, x))


def test_efx_matches_hand_rolled_table_composition():
    n = kappa = 3
    inst = _efx_instance(n, kappa, 4242, k=5, k1=3, k2=6)
    e1, e2 = inst.components
    t1 = e1.permutation(5).table
    t2 = e2.permutation(5).table
    for x in range(8):
        assert inst._raw_encrypt(x) == t2[6 ^ t1[3 ^ x]]


def _all_kind_instances(n=4, seed=515):
    e = make_ideal_cipher(n, n, seed)
    comps3 = [make_ideal_cipher(n, n, ciphers.derive_seed(seed, i)) for i in range(3)]
    perm = make_permutation(n, seed)
    perms = [make_permutation(n, ciphers.derive_seed(seed, "p", i)) for i in range(5)]
    return [
        make_construction(ConstructionKind.EM, [perm], KeyMaterial(k1=3, k2=9)),
        make_construction(ConstructionKind.FX, [e], KeyMaterial(k=7, k1=3, k2=9)),
        make_construction(ConstructionKind.EFX, comps3[:2], KeyMaterial(k=7, k1=3, k2=9)),
        make_construction(ConstructionKind.TWO_XOR, [e], KeyMaterial(k=7, k1=3)),
        make_construction(ConstructionKind.DEFX, comps3, KeyMaterial(k=7, k1=3, k2=9)),
        make_construction(ConstructionKind.ITERATED_EM, perms,
                          KeyMaterial(keys=[4, 11], schedule=[0, 0, 1, 0, 1, 0])),
    ]


def test_encrypt_decrypt_roundtrip_all_kinds():
    for inst in _all_kind_instances():
        for x in range(16):
            assert inst._raw_decrypt(inst._raw_encrypt(x)) == x
            assert inst._raw_encrypt(inst._raw_decrypt(x)) == x


def test_em_decrypt_matches_table_inversion():
    perm = make_permutation(4, 2)
    inst = make_construction(ConstructionKind.EM, [perm], KeyMaterial(k1=6, k2=13))
    inverse = [0] * 16
    for x, y in enumerate(perm.table):
        inverse[y] = x
    for y in range(16):
        assert inst._raw_decrypt(y) == inverse[y ^ 13] ^ 6


def test_ecbc3_decrypt_errors():
    e = make_ideal_cipher(4, 4, 9)
    inst = make_construction(ConstructionKind.ECBC3, [e], KeyMaterial(k=1, m1=2, m2=3))
    with pytest.raises(ValueError):
        inst.decrypt(0)


def test_counters():
    inst = _all_kind_instances()[2]
    for x in range(5):
        inst.encrypt(x)
    inst.decrypt(0)
    assert inst.online_forward == 5
    assert inst.online_backward == 1


def test_instances_deterministic_in_seed_and_material():
    a = _efx_instance(4, 4, 808, k=3, k1=1, k2=2)
    b = _efx_instance(4, 4, 808, k=3, k1=1, k2=2)
    assert all(a._raw_encrypt(x) == b._raw_encrypt(x) for x in range(16))


def test_derive_related_key():
    kd = KeyDerivation()
    assert derive_related_key(kd, 0) == 1
    assert derive_related_key(kd, 255) == 254
    assert all(derive_related_key(kd, k) != k for k in range(256))
    bad = KeyDerivation(pi=lambda k: k)
    with pytest.raises(ValueError):
        derive_related_key(bad, 5)


def test_make_construction_validation():
    e = make_ideal_cipher(4, 4, 1)
    with pytest.raises(ValueError):
        make_construction(ConstructionKind.EFX, [e], KeyMaterial(k=0, k1=0, k2=0))
    with pytest.raises(ValueError):
        make_construction(ConstructionKind.FX, [e], KeyMaterial(k=99, k1=0, k2=0))
    with pytest.raises(ValueError):
        make_construction(ConstructionKind.ITERATED_EM,
                          [make_permutation(4, 1)],
                          KeyMaterial(keys=[1], schedule=[0, 5]))
