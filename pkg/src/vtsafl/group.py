"""Prime-order group abstraction.

Elements of the default group live in the order-``q`` subgroup of
``Z_p^*`` for a 2048-bit prime ``p`` with ``q | p - 1`` and ``q`` a 256-bit
prime.  Elements are plain Python ints in ``[1, p)``; scalars are ints in
``[0, q)``.  All arithmetic goes through :class:`SchnorrGroup` so another
group can be dropped in without touching the scheme code.
"""

from __future__ import annotations

import hashlib
import secrets
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Iterable, Tuple

import gmpy2

from .errors import EncodingError, ParameterError

# Domain-separation prefixes. H1 and H2 must never collide.
H1_DST = b"VTMCFE-H1-label-to-G2"
H2_DST = b"VTMCFE-H2-transcript-to-Zp"
H2G_DST = b"VTMCFE-hash-to-group"
H_GENERATOR_TAG = b"VTMCFE-h-generator"

DEFAULT_SEED = b"vtsafl-schnorr-2048-256"

# Output of derive_schnorr_params(DEFAULT_SEED, 256, 2048); see tests/test_group.py.
_DEFAULT_ORDER = 0xFEBCD555F0DD1C253C6925E2D83CD11A77B236FE0E83397E5FA22E7DCEE4C6C9
_DEFAULT_MODULUS = int(
    "fbeee109e8ebb6232338f8de99391c03df171b2ccc509d85f7f8b971b36e202e"
    "b9b6a9cbf61bc00121025eb152397abdf2474f663097401e0750d0dbab226632"
    "300fb82d84c465a662bf66931fe4bdf54d91cec6a9c036789d15833cf5453df1"
    "be3096e6a359e8469f6c95be1aee344ea91346f232165de3c927e38f9410aa5c"
    "e84f9b6e81822edd17da5cbce92713f94bf5dc438dbc9467c68456f8b2b2fd79"
    "4a1f5fa38ff70629d4a2bb8b8dd9c63324a9713a8599e295a9a74bb127d5f0a7"
    "b23597468d46aa39f977d6eedaa28f165fc0b278bd1eee638d43d234742b7163"
    "eee24b2e70bde3a6febf149318c46d3174af0fdba1fd25382de0e217bd6408c5",
    16,
)
_DEFAULT_GENERATOR = int(
    "6792c08de559a81c0c4acce564dce123724d1713bae3f7ce875bf21a253bcaaf"
    "0e5746a9c04a5ee7245668052b34296d06ec0440883cc93f98b4fc2af606d178"
    "87c8809b75538991b54c3c37f7eb2fa2778877bfbbc772dd1d725d306be0388a"
    "d711c7708445f54a7c6f89aa5ae871244e3a0319c31f061d3bff34155860e602"
    "0d6b37dc222d5c604660156c554487ebb0ae93b6bb8a8b9c21af88ef5a6290a1"
    "993303470540c704e5eea9a22794a102da907a077449379ff68816b5c9a6b70d"
    "58770f969c0302aeb614074a48541c64335debb39a9a384891ed482978628e0e"
    "349e5e0fce6e06b53f8b3e50768cd4fcbf8817b35d2a56c180c89cc4fa13bfc",
    16,
)


def derive_schnorr_params(seed: bytes, order_bits: int, modulus_bits: int) -> Tuple[int, int, int]:
    """Deterministically derive ``(q, p, g)`` from ``seed``.

    ``q`` is the first prime at or above a seed-derived ``order_bits`` value,
    ``p = k*q + 1`` the first prime of exactly ``modulus_bits`` bits with
    ``k`` even at or above a seed-derived start, and ``g`` is the first of
    ``2^((p-1)/q), 3^((p-1)/q), ...`` that is not 1.
    """

    def expand(tag: bytes, nbytes: int) -> int:
        return int.from_bytes(hashlib.shake_256(seed + b"/" + tag).digest(nbytes), "big")

    q = int(gmpy2.next_prime((expand(b"order", order_bits // 8) | (1 << (order_bits - 1))) - 1))
    while not gmpy2.is_prime(q, 64) or q.bit_length() != order_bits:
        q = int(gmpy2.next_prime(q))
    k = (expand(b"modulus", modulus_bits // 8) | (1 << (modulus_bits - 1))) // q
    k += k % 2
    while True:
        p = k * q + 1
        if p.bit_length() == modulus_bits and gmpy2.is_prime(p, 64):
            break
        k += 2
    base = 2
    while (g := pow(base, (p - 1) // q, p)) == 1:
        base += 1
    return q, p, g


def _byte_len(n: int) -> int:
    return (n.bit_length() + 7) // 8


def _expand(dst: bytes, data: bytes, nbytes: int) -> bytes:
    prefix = len(dst).to_bytes(2, "big") + dst + len(data).to_bytes(8, "big")
    return hashlib.shake_256(prefix + data).digest(nbytes)


@dataclass(frozen=True)
class SchnorrGroup:
    """Order-``order`` subgroup of ``Z_modulus^*`` with generator ``g``.

    ``h`` is derived by hashing a fixed tag into the group, so nobody knows
    ``log_g(h)``.
    """

    order: int
    modulus: int
    g: int
    name: str = field(default="custom", compare=False)

    def __post_init__(self):
        if (self.modulus - 1) % self.order:
            raise ParameterError("group order must divide modulus - 1")
        if not (1 < self.g < self.modulus) or pow(self.g, self.order, self.modulus) != 1:
            raise ParameterError("g is not a non-identity subgroup element")

    @classmethod
    def default(cls) -> "SchnorrGroup":
        return DEFAULT_GROUP

    @classmethod
    def from_order(cls, order: int) -> "SchnorrGroup":
        """Smallest Schnorr group of the given prime order. Test sizes only."""
        if not gmpy2.is_prime(order):
            raise ParameterError("order must be prime")
        k = 2
        while not gmpy2.is_prime(k * order + 1):
            k += 2
        p = k * order + 1
        base = 2
        while (g := pow(base, k, p)) == 1:
            base += 1
        return cls(order, p, g, name=f"toy-{order}")

    @classmethod
    def generate(cls, seed: bytes, order_bits: int = 256, modulus_bits: int = 2048) -> "SchnorrGroup":
        q, p, g = derive_schnorr_params(seed, order_bits, modulus_bits)
        return cls(q, p, g, name=f"schnorr-{modulus_bits}-{order_bits}")

    # -- sizes ---------------------------------------------------------------

    @property
    def element_len(self) -> int:
        return _byte_len(self.modulus)

    @property
    def scalar_len(self) -> int:
        return _byte_len(self.order)

    @cached_property
    def h(self) -> int:
        return self.hash_to_group(H_GENERATOR_TAG)

    @property
    def identity(self) -> int:
        return 1

    # -- arithmetic ----------------------------------------------------------

    def exp(self, base: int, e: int) -> int:
        return int(gmpy2.powmod(base, e % self.order, self.modulus))

    def exp_small(self, base: int, e: int) -> int:
        """``base^e`` for a small signed ``e`` without reducing mod the order."""
        if e < 0:
            return int(gmpy2.powmod(gmpy2.invert(base, self.modulus), -e, self.modulus))
        return int(gmpy2.powmod(base, e, self.modulus))

    def gexp(self, e: int) -> int:
        return self.exp(self.g, e)

    def mul(self, a: int, b: int) -> int:
        return a * b % self.modulus

    def prod(self, elements: Iterable[int]) -> int:
        acc = 1
        for x in elements:
            acc = acc * x % self.modulus
        return acc

    def inv(self, a: int) -> int:
        return int(gmpy2.invert(a, self.modulus))

    def div(self, a: int, b: int) -> int:
        return a * self.inv(b) % self.modulus

    def is_element(self, x: int) -> bool:
        return isinstance(x, int) and 0 < x < self.modulus and gmpy2.powmod(x, self.order, self.modulus) == 1

    def random_scalar(self, rng=None, nonzero: bool = False) -> int:
        rng = rng or secrets.SystemRandom()
        lo = 1 if nonzero else 0
        return rng.randrange(lo, self.order)

    def random_element(self, rng=None) -> int:
        return self.gexp(self.random_scalar(rng, nonzero=True))

    # -- hashing -------------------------------------------------------------

    def hash_to_group(self, data: bytes, dst: bytes = H2G_DST) -> int:
        return _hash_to_group(self, dst, bytes(data))

    def hash_to_group_pair(self, label: bytes) -> Tuple[int, int]:
        """``H1(label)``: two independent elements with unknown discrete logs."""
        label = bytes(label)
        return (
            _hash_to_group(self, H1_DST, label + b"|0"),
            _hash_to_group(self, H1_DST, label + b"|1"),
        )

    def hash_to_scalar(self, transcript: bytes) -> int:
        """``H2``: wide reduction of a SHAKE-256 digest modulo the order."""
        nbytes = self.scalar_len + 32
        return int.from_bytes(_expand(H2_DST, bytes(transcript), nbytes), "big") % self.order

    # -- encoding ------------------------------------------------------------

    def encode_element(self, x: int) -> bytes:
        return int(x).to_bytes(self.element_len, "big")

    def decode_element(self, data: bytes) -> int:
        if len(data) != self.element_len:
            raise EncodingError(f"element encoding must be {self.element_len} bytes")
        x = int.from_bytes(data, "big")
        if not self.is_element(x):
            raise EncodingError("bytes do not encode a subgroup element")
        return x

    def encode_scalar(self, a: int) -> bytes:
        return (int(a) % self.order).to_bytes(self.scalar_len, "big")

    def decode_scalar(self, data: bytes) -> int:
        if len(data) != self.scalar_len:
            raise EncodingError(f"scalar encoding must be {self.scalar_len} bytes")
        a = int.from_bytes(data, "big")
        if a >= self.order:
            raise EncodingError("non-canonical scalar")
        return a

    def encode_elements(self, xs: Iterable[int]) -> bytes:
        return b"".join(self.encode_element(x) for x in xs)

    def decode_elements(self, data: bytes) -> list:
        n = self.element_len
        if len(data) % n:
            raise EncodingError("truncated element list")
        return [self.decode_element(data[i:i + n]) for i in range(0, len(data), n)]

    def describe(self) -> bytes:
        """Canonical bytes identifying the group, used in parameter digests."""
        return b"".join(
            len(b).to_bytes(2, "big") + b
            for b in (_int_bytes(self.order), _int_bytes(self.modulus), _int_bytes(self.g))
        )


def _int_bytes(x: int) -> bytes:
    return x.to_bytes(max(1, _byte_len(x)), "big")


@lru_cache(maxsize=4096)
def _hash_to_group(group: SchnorrGroup, dst: bytes, data: bytes) -> int:
    cofactor = (group.modulus - 1) // group.order
    nbytes = group.element_len + 16
    counter = 0
    while True:
        digest = _expand(dst, data + counter.to_bytes(4, "big"), nbytes)
        x = int.from_bytes(digest, "big") % group.modulus
        if x:
            y = int(gmpy2.powmod(x, cofactor, group.modulus))
            if y != 1:
                return y
        counter += 1


DEFAULT_GROUP = SchnorrGroup(_DEFAULT_ORDER, _DEFAULT_MODULUS, _DEFAULT_GENERATOR,
                             name="schnorr-2048-256")
