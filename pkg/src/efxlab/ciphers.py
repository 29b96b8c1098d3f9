"""Seeded ideal-model primitives and the keyed constructions built from them.

Blocks and keys are little-endian integers; bit i of x is (x >> i) & 1.
Sizes are capped at 16 bits so permutation tables and attack state stay
desk-sized. Instances are immutable after construction except for their
online query counters.
"""

from __future__ import annotations

import hashlib
import random
import struct
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Dict, List, Optional, Sequence

MAX_BITS = 16


def derive_seed(*parts) -> int:
    """Stable 64-bit seed derived from labeled parts (independent of hash seed)."""
    blob = "\x1f".join(str(p) for p in parts).encode()
    return int.from_bytes(hashlib.sha256(blob).digest()[:8], "little")


@dataclass
class Permutation:
    """Explicit bijection on n-bit blocks together with its inverse table."""

    n: int
    table: List[int]
    inverse_table: List[int]

    def apply(self, x: int) -> int:
        return self.table[x]

    def invert(self, y: int) -> int:
        return self.inverse_table[y]

    def to_bytes(self) -> bytes:
        """Dump the forward table as little-endian 16-bit entries."""
        return struct.pack("<%dH" % len(self.table), *self.table)


def make_permutation(n: int, seed: int) -> Permutation:
    """Uniformly drawn bijection on {0,...,2^n-1} (Fisher-Yates over the seeded stream)."""
    if not 1 <= n <= MAX_BITS:
        raise ValueError(f"block size n={n} out of range [1, {MAX_BITS}]")
    table = list(range(1 << n))
    random.Random(seed).shuffle(table)
    inverse = [0] * (1 << n)
    for x, y in enumerate(table):
        inverse[y] = x
    return Permutation(n, table, inverse)


def identity_permutation(n: int) -> Permutation:
    table = list(range(1 << n))
    return Permutation(n, table, list(table))


@dataclass
class IdealCipher:
    """Lazily materialized family key -> random permutation.

    Each key's permutation is drawn from an independent substream of the
    cipher seed, so materialization order does not matter and repeated
    materialization is identical.
    """

    n: int
    kappa: int
    seed: int
    cache: Dict[int, Permutation] = field(default_factory=dict)

    def permutation(self, key: int) -> Permutation:
        if not 0 <= key < (1 << self.kappa):
            raise ValueError(f"key {key} out of range for kappa={self.kappa}")
        perm = self.cache.get(key)
        if perm is None:
            perm = make_permutation(self.n, derive_seed(self.seed, "key", key))
            self.cache[key] = perm
        return perm

    def forward(self, key: int, x: int) -> int:
        return self.permutation(key).table[x]

    def backward(self, key: int, y: int) -> int:
        return self.permutation(key).inverse_table[y]


def make_ideal_cipher(n: int, kappa: int, seed: int) -> IdealCipher:
    if not 1 <= n <= MAX_BITS:
        raise ValueError(f"block size n={n} out of range [1, {MAX_BITS}]")
    if not 1 <= kappa <= MAX_BITS:
        raise ValueError(f"key size kappa={kappa} out of range [1, {MAX_BITS}]")
    return IdealCipher(n, kappa, seed)


def identity_cipher(n: int, kappa: int) -> IdealCipher:
    """Stub cipher whose every key is the identity permutation (for tests)."""
    cipher = make_ideal_cipher(n, kappa, 0)
    ident = identity_permutation(n)
    for key in range(1 << kappa):
        cipher.cache[key] = ident
    return cipher


def _xor_one(k: int) -> int:
    return k ^ 1


@dataclass
class KeyDerivation:
    """Fixpoint-free permutation on kappa-bit keys; default is k -> k XOR 1."""

    pi: Callable[[int], int] = _xor_one


def derive_related_key(kd: KeyDerivation, k: int) -> int:
    v = kd.pi(k)
    if v == k:
        raise ValueError(f"key derivation has a fixpoint at k={k}")
    return v


class ConstructionKind(str, Enum):
    EM = "EM"
    FX = "FX"
    EFX = "EFX"
    TWO_XOR = "TWO_XOR"
    DEFX = "DEFX"
    ITERATED_EM = "ITERATED_EM"
    ECBC3 = "ECBC3"


@dataclass
class KeyMaterial:
    """Key record; which fields are required depends on the construction kind.

    k is the kappa-bit inner key, k1/k2 are n-bit whitening keys. TWO_XOR
    stores its single whitening key z in k1. ITERATED_EM carries the list of
    n-bit round-key values in keys plus a schedule of indices into it. ECBC3
    carries the two fixed unknown message blocks in m1/m2.
    """

    k: Optional[int] = None
    k1: Optional[int] = None
    k2: Optional[int] = None
    schedule: Optional[List[int]] = None
    keys: Optional[List[int]] = None
    m1: Optional[int] = None
    m2: Optional[int] = None


# forward E-evaluations per encryption, used by the attack cost accounting
ENCRYPT_LAYERS = {
    ConstructionKind.EM: 1,
    ConstructionKind.FX: 1,
    ConstructionKind.EFX: 2,
    ConstructionKind.TWO_XOR: 2,
    ConstructionKind.DEFX: 3,
    ConstructionKind.ECBC3: 4,
}


def encrypt_with(kind: ConstructionKind, components: Sequence,
                 km: KeyMaterial, kd: Optional[KeyDerivation], x: int) -> int:
    """Evaluate the construction formula at arbitrary key material."""
    if kind == ConstructionKind.EM:
        return components[0].table[x ^ km.k1] ^ km.k2
    if kind == ConstructionKind.FX:
        return components[0].forward(km.k, x ^ km.k1) ^ km.k2
    if kind == ConstructionKind.EFX:
        e1, e2 = components
        return e2.forward(km.k, km.k2 ^ e1.forward(km.k, km.k1 ^ x))
    if kind == ConstructionKind.TWO_XOR:
        e = components[0]
        kb = derive_related_key(kd, km.k)
        return e.forward(kb, e.forward(km.k, x ^ km.k1) ^ km.k1)
    if kind == ConstructionKind.DEFX:
        e1, e2, e3 = components
        return e3.forward(km.k, km.k2 ^ e2.forward(km.k, km.k1 ^ e1.forward(km.k, x)))
    if kind == ConstructionKind.ITERATED_EM:
        v = x ^ km.keys[km.schedule[0]]
        for i, perm in enumerate(components):
            v = perm.table[v]
            v ^= km.keys[km.schedule[i + 1]]
        return v
    if kind == ConstructionKind.ECBC3:
        e = components[0]
        kb = derive_related_key(kd, km.k)
        v = e.forward(km.k, x)
        v = e.forward(km.k, km.m1 ^ v)
        v = e.forward(km.k, km.m2 ^ v)
        return e.forward(kb, v)
    raise ValueError(f"unknown kind {kind}")


def decrypt_with(kind: ConstructionKind, components: Sequence,
                 km: KeyMaterial, kd: Optional[KeyDerivation], y: int) -> int:
    if kind == ConstructionKind.ECBC3:
        raise ValueError("ECBC3 is forward-only (MAC-style function)")
    if kind == ConstructionKind.EM:
        return components[0].inverse_table[y ^ km.k2] ^ km.k1
    if kind == ConstructionKind.FX:
        return components[0].backward(km.k, y ^ km.k2) ^ km.k1
    if kind == ConstructionKind.EFX:
        e1, e2 = components
        return km.k1 ^ e1.backward(km.k, km.k2 ^ e2.backward(km.k, y))
    if kind == ConstructionKind.TWO_XOR:
        e = components[0]
        kb = derive_related_key(kd, km.k)
        return e.backward(km.k, e.backward(kb, y) ^ km.k1) ^ km.k1
    if kind == ConstructionKind.DEFX:
        e1, e2, e3 = components
        return e1.backward(km.k, km.k1 ^ e2.backward(km.k, km.k2 ^ e3.backward(km.k, y)))
    if kind == ConstructionKind.ITERATED_EM:
        v = y ^ km.keys[km.schedule[-1]]
        for i in range(len(components) - 1, -1, -1):
            v = components[i].inverse_table[v]
            v ^= km.keys[km.schedule[i]]
        return v
    raise ValueError(f"unknown kind {kind}")


@dataclass
class ConstructionInstance:
    """A keyed construction exposing encrypt/decrypt with online query counters."""

    kind: ConstructionKind
    components: List
    key_material: KeyMaterial
    key_derivation: Optional[KeyDerivation]
    n: int
    online_forward: int = 0
    online_backward: int = 0

    def encrypt(self, x: int) -> int:
        self.online_forward += 1
        return self._raw_encrypt(x)

    def decrypt(self, y: int) -> int:
        if self.kind == ConstructionKind.ECBC3:
            raise ValueError("ECBC3 is forward-only (MAC-style function)")
        self.online_backward += 1
        return self._raw_decrypt(y)

    # uncounted access, used by simulators that realize black-box quantum
    # oracles; callers account for oracle applications themselves
    def _raw_encrypt(self, x: int) -> int:
        return encrypt_with(self.kind, self.components, self.key_material,
                            self.key_derivation, x)

    def _raw_decrypt(self, y: int) -> int:
        return decrypt_with(self.kind, self.components, self.key_material,
                            self.key_derivation, y)

    @property
    def kappa(self) -> int:
        """Search-key width: bits of the inner key the construction hides (0 for EM)."""
        if self.kind in (ConstructionKind.EM, ConstructionKind.ITERATED_EM):
            return 0
        return self.components[0].kappa


_EXPECTED_COMPONENTS = {
    ConstructionKind.EM: 1,
    ConstructionKind.FX: 1,
    ConstructionKind.EFX: 2,
    ConstructionKind.TWO_XOR: 1,
    ConstructionKind.DEFX: 3,
    ConstructionKind.ECBC3: 1,
}


def _check_block(name: str, value: Optional[int], bits: int) -> int:
    if value is None:
        raise ValueError(f"key material field {name} is required")
    if not 0 <= value < (1 << bits):
        raise ValueError(f"key material field {name}={value} out of range for {bits} bits")
    return value


def make_construction(kind: ConstructionKind, components: Sequence,
                      key_material: KeyMaterial,
                      key_derivation: Optional[KeyDerivation] = None) -> ConstructionInstance:
    """Validate components and key material, return an instance with zeroed counters."""
    kind = ConstructionKind(kind)
    components = list(components)
    if kind == ConstructionKind.ITERATED_EM:
        if not components:
            raise ValueError("ITERATED_EM needs at least one permutation")
        if key_material.schedule is None or key_material.keys is None:
            raise ValueError("ITERATED_EM needs keys and a schedule")
        if len(key_material.schedule) != len(components) + 1:
            raise ValueError("schedule must have one more entry than there are rounds")
        for idx in key_material.schedule:
            if not 0 <= idx < len(key_material.keys):
                raise ValueError(f"schedule index {idx} out of bounds")
        n = components[0].n
        for key in key_material.keys:
            _check_block("keys[]", key, n)
    else:
        if len(components) != _EXPECTED_COMPONENTS[kind]:
            raise ValueError(f"{kind.value} expects {_EXPECTED_COMPONENTS[kind]} "
                             f"component(s), got {len(components)}")
        n = components[0].n
    if any(c.n != n for c in components):
        raise ValueError("components disagree on block size")

    if kind == ConstructionKind.EM:
        _check_block("k1", key_material.k1, n)
        _check_block("k2", key_material.k2, n)
    elif kind in (ConstructionKind.FX, ConstructionKind.EFX, ConstructionKind.DEFX):
        _check_block("k", key_material.k, components[0].kappa)
        _check_block("k1", key_material.k1, n)
        _check_block("k2", key_material.k2, n)
    elif kind == ConstructionKind.TWO_XOR:
        _check_block("k", key_material.k, components[0].kappa)
        _check_block("k1", key_material.k1, n)
        if key_derivation is None:
            key_derivation = KeyDerivation()
    elif kind == ConstructionKind.ECBC3:
        _check_block("k", key_material.k, components[0].kappa)
        _check_block("m1", key_material.m1, n)
        _check_block("m2", key_material.m2, n)
        if key_derivation is None:
            key_derivation = KeyDerivation()

    return ConstructionInstance(kind, components, key_material, key_derivation, n)
