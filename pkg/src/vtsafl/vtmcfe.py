"""Threshold multi-client functional encryption for inner products with
verifiable partial decryption.

Clients encrypt scalars under a label, a trusted authority splits the
functional key for ``y`` among ``s`` aggregators with the HLR sharing, any
``t`` aggregators produce partial decryptions with DLEQ proofs, and anyone
holding the public parameters can check those proofs and combine ``t`` of
them into ``g^<x, y>``.

Indices are 1-based for clients (``i``), aggregators (``j``) and rounds
(``k``).  The label pair ``H1(l) = (g^u0, g^u1)`` pairs ``u0`` with
evaluation point 0 and ``u1`` with point 1.
"""

from __future__ import annotations

import hashlib
import secrets
from collections import Counter
from dataclasses import dataclass
from functools import cached_property
from typing import Dict, Iterable, Optional, Sequence, Tuple

from . import dleq
from .dlog import DlogTable
from .errors import (EncodingError, InsufficientSharesError, MalformedProofError, ParameterError,
                     ProtocolError, RangeError, ThresholdError, VerificationError)
from .group import DEFAULT_GROUP, H1_DST, H2_DST, SchnorrGroup
from .hlr_mss import expand_char_poly, extend, lagrange_coeff, node

DLEQ_DST = b"VTMCFE-DLEQ-share-decrypt"

# Small signed exponents skip reduction mod the group order.
_SMALL = 1 << 64


@dataclass(frozen=True)
class PublicParams:
    group: SchnorrGroup
    t: int
    s: int
    n: int
    alpha: int
    coeffs: Tuple[int, ...]
    # setup_commitments[k - 1] = (H_{2,k}, ..., H_{t-1,k})
    setup_commitments: Tuple[Tuple[int, ...], ...]
    message_bound: Optional[int] = None

    @property
    def rounds(self) -> int:
        return len(self.setup_commitments)

    def round_commitments(self, k: int) -> Tuple[int, ...]:
        if not 1 <= k <= self.rounds:
            raise ParameterError(f"round {k} was not provisioned at setup (1..{self.rounds})")
        return self.setup_commitments[k - 1]

    @cached_property
    def digest(self) -> bytes:
        g = self.group
        h = hashlib.sha256()
        for part in (g.describe(), H1_DST, H2_DST,
                     self.t.to_bytes(2, "big"), self.s.to_bytes(2, "big"),
                     self.n.to_bytes(4, "big"), g.encode_scalar(self.alpha),
                     *(g.encode_scalar(a) for a in self.coeffs),
                     *(g.encode_elements(c) for c in self.setup_commitments)):
            h.update(len(part).to_bytes(4, "big") + part)
        return h.digest()


@dataclass(frozen=True)
class EncryptionKey:
    index: int
    vector: Tuple[int, int]


@dataclass(frozen=True)
class MasterSecretKey:
    keys: Tuple[Tuple[int, int], ...]
    # fillers[k - 1] = (c_{1,k}, ..., c_{t-2,k})
    fillers: Tuple[Tuple[int, ...], ...]

    def encryption_key(self, i: int) -> EncryptionKey:
        return EncryptionKey(i, self.keys[i - 1])


@dataclass(frozen=True)
class FunctionalKeyShare:
    """Key share ``dk_j = w[t + j - 1]`` for round ``k``.

    The wire form is the bare scalar; ``j`` and ``k`` are implied by the channel.
    """

    index: int
    value: int
    round: int

    def to_bytes(self, group: SchnorrGroup) -> bytes:
        return group.encode_scalar(self.value)

    @classmethod
    def from_bytes(cls, group: SchnorrGroup, data: bytes, index: int, round: int):
        return cls(index, group.decode_scalar(data), round)


@dataclass(frozen=True)
class RoundKeyCommitments:
    round: int
    h0: int
    h1: int

    def to_bytes(self, group: SchnorrGroup) -> bytes:
        return group.encode_elements((self.h0, self.h1))

    @classmethod
    def from_bytes(cls, group: SchnorrGroup, data: bytes, round: int):
        h0, h1 = group.decode_elements(data)
        return cls(round, h0, h1)


@dataclass(frozen=True)
class LabeledCiphertext:
    client: int
    label: bytes
    element: int

    def to_bytes(self, group: SchnorrGroup) -> bytes:
        return group.encode_element(self.element)

    @classmethod
    def from_bytes(cls, group: SchnorrGroup, data: bytes, client: int, label: bytes):
        return cls(client, bytes(label), group.decode_element(data))


@dataclass(frozen=True)
class PartialDecryption:
    index: int
    subset: Tuple[int, ...]
    ct0: int
    ct1: int
    ct2: int
    proof: dleq.DleqProof

    def to_bytes(self, group: SchnorrGroup) -> bytes:
        header = self.index.to_bytes(2, "big") + len(self.subset).to_bytes(1, "big")
        header += b"".join(j.to_bytes(2, "big") for j in self.subset)
        return (header + group.encode_elements((self.ct0, self.ct1, self.ct2))
                + self.proof.to_bytes(group))

    @classmethod
    def from_bytes(cls, group: SchnorrGroup, data: bytes) -> "PartialDecryption":
        if len(data) < 3:
            raise EncodingError("partial decryption too short")
        index = int.from_bytes(data[:2], "big")
        size = data[2]
        pos = 3 + 2 * size
        subset = tuple(int.from_bytes(data[i:i + 2], "big") for i in range(3, pos, 2))
        el = group.element_len
        if len(data) != pos + 3 * el + dleq.DleqProof.encoded_len(group, 3):
            raise EncodingError("partial decryption has wrong length")
        ct0, ct1, ct2 = group.decode_elements(data[pos:pos + 3 * el])
        proof = dleq.DleqProof.from_bytes(group, data[pos + 3 * el:])
        return cls(index, subset, ct0, ct1, ct2, proof)

    @staticmethod
    def header_len(t: int) -> int:
        return 3 + 2 * t


# ---------------------------------------------------------------------------
# Setup and key generation
# ---------------------------------------------------------------------------


def setup(t: int, s: int, n: int, rounds: int = 1, *, group: Optional[SchnorrGroup] = None,
          rng=None, message_bound: Optional[int] = None):
    """Return ``(pp, msk, encryption_keys)`` with fillers for ``rounds`` rounds."""
    group = group or DEFAULT_GROUP
    rng = rng or secrets.SystemRandom()
    if t < 2 or t > s:
        raise ParameterError(f"need 2 <= t <= s, got t={t}, s={s}")
    if n < 1 or rounds < 1:
        raise ParameterError("need at least one client and one round")
    if t + s >= group.order:
        raise ParameterError("group order too small for this many aggregators")
    alpha = group.random_scalar(rng, nonzero=True)
    coeffs = expand_char_poly(alpha, t, group.order)
    keys = tuple((group.random_scalar(rng), group.random_scalar(rng)) for _ in range(n))
    fillers = tuple(tuple(group.random_scalar(rng) for _ in range(t - 2)) for _ in range(rounds))
    commitments = tuple(tuple(group.exp(group.h, c) for c in fk) for fk in fillers)
    pp = PublicParams(group, t, s, n, alpha, coeffs, commitments, message_bound)
    msk = MasterSecretKey(keys, fillers)
    return pp, msk, [msk.encryption_key(i) for i in range(1, n + 1)]


def functional_key(pp: PublicParams, msk: MasterSecretKey, y: Sequence[int]) -> Tuple[int, int]:
    """``d = sum_i y_i * s_i`` in ``Z_q^2``."""
    if len(y) != pp.n or len(msk.keys) != pp.n:
        raise ParameterError(f"function vector must have length n={pp.n}")
    q = pp.group.order
    d0 = sum(yi * si[0] for yi, si in zip(y, msk.keys)) % q
    d1 = sum(yi * si[1] for yi, si in zip(y, msk.keys)) % q
    return d0, d1


def dkeygen(pp: PublicParams, msk: MasterSecretKey, y: Sequence[int], k: int):
    """Split the functional key for ``y`` into ``s`` shares for round ``k``."""
    pp.round_commitments(k)
    d0, d1 = functional_key(pp, msk, y)
    group, q = pp.group, pp.group.order
    initial = (d0, d1, *msk.fillers[k - 1])
    terms = extend(pp.coeffs, initial, pp.s, q)
    shares = [FunctionalKeyShare(j, w, k) for j, w in enumerate(terms, start=1)]
    published = RoundKeyCommitments(k, group.exp(group.h, d0), group.exp(group.h, d1))
    return shares, published


def derive_share_commitments(pp: PublicParams, published: RoundKeyCommitments,
                             k: int) -> Tuple[int, ...]:
    """``H_{t+j-1} = h^{dk_j}`` for ``j = 1..s`` from public commitments only."""
    if published is None or published.round != k:
        raise ProtocolError(f"missing key commitments for round {k}")
    group, q = pp.group, pp.group.order
    seq = [published.h0, published.h1, *pp.round_commitments(k)]
    if len(seq) != pp.t:
        raise ProtocolError("setup commitments do not match the threshold")
    neg = [(-a) % q for a in pp.coeffs]
    for _ in range(pp.s):
        seq.append(group.prod(group.exp(seq[-r], e) for r, e in enumerate(neg, start=1)))
    return tuple(seq[pp.t:])


# ---------------------------------------------------------------------------
# Encryption and partial decryption
# ---------------------------------------------------------------------------


def encrypt(pp: PublicParams, ek: EncryptionKey, x: int, label: bytes) -> LabeledCiphertext:
    """``ct = (g^u0)^s0 * (g^u1)^s1 * g^x``."""
    if pp.message_bound is not None and abs(x) > pp.message_bound:
        raise RangeError(f"|x|={abs(x)} exceeds the plaintext bound {pp.message_bound}")
    group = pp.group
    u0, u1 = group.hash_to_group_pair(label)
    s0, s1 = ek.vector
    mask = group.mul(group.exp(u0, s0), group.exp(u1, s1))
    return LabeledCiphertext(ek.index, bytes(label), group.mul(mask, group.gexp(x)))


def _weighted_product(group: SchnorrGroup, elements: Iterable[int], y: Iterable[int]) -> int:
    acc = 1
    for x, w in zip(elements, y):
        if w == 0:
            continue
        term = group.exp_small(x, w) if -_SMALL < w < _SMALL else group.exp(x, w)
        acc = group.mul(acc, term)
    return acc


def _check_subset(pp: PublicParams, subset: Sequence[int]) -> Tuple[int, ...]:
    subset = tuple(subset)
    if len(subset) != pp.t:
        raise ThresholdError(f"subset must have exactly t={pp.t} members")
    if len(set(subset)) != len(subset) or any(not 1 <= j <= pp.s for j in subset):
        raise ParameterError(f"invalid aggregator subset {subset}")
    return subset


def partial_bases(pp: PublicParams, label: bytes, j: int, subset: Sequence[int]) -> Tuple[int, int]:
    """Public bases ``h_{j,1} = (g^u0)^(lam_{j,0} alpha^-node)``, ``h_{j,2} = (g^u1)^(lam_{j,1} alpha^(1-node))``."""
    group, q, t = pp.group, pp.group.order, pp.t
    u0, u1 = group.hash_to_group_pair(label)
    inv_alpha_node = pow(pp.alpha, -node(j, t), q)
    e1 = lagrange_coeff(0, j, subset, t, q) * inv_alpha_node % q
    e2 = lagrange_coeff(1, j, subset, t, q) * inv_alpha_node * pp.alpha % q
    return group.exp(u0, e1), group.exp(u1, e2)


def proof_context(pp: PublicParams, k: int, label: bytes, j: int, subset: Sequence[int]) -> bytes:
    return b"".join((
        DLEQ_DST, pp.digest, k.to_bytes(4, "big"), len(label).to_bytes(4, "big"), bytes(label),
        j.to_bytes(2, "big"), len(subset).to_bytes(1, "big"),
        b"".join(m.to_bytes(2, "big") for m in subset),
    ))


def _statement(pp, k, label, j, subset, share_commitment, ct1, ct2) -> dleq.DleqStatement:
    h1, h2 = partial_bases(pp, label, j, subset)
    return dleq.DleqStatement((pp.group.h, h1, h2), (share_commitment, ct1, ct2),
                              proof_context(pp, k, label, j, subset))


def aggregate_ciphertext(pp: PublicParams, ciphertexts: Sequence[LabeledCiphertext],
                         y: Sequence[int], label: bytes) -> int:
    """``prod_i ct_i^{y_i}`` after checking every client appears once under ``label``."""
    if len(ciphertexts) != pp.n or len(y) != pp.n:
        raise ParameterError(f"need n={pp.n} ciphertexts and weights")
    by_client = {}
    for ct in ciphertexts:
        if bytes(ct.label) != bytes(label):
            raise ProtocolError(f"ciphertext from client {ct.client} has label {ct.label!r}, "
                                f"expected {label!r}")
        if ct.client in by_client:
            raise ProtocolError(f"duplicate ciphertext from client {ct.client}")
        by_client[ct.client] = ct.element
    if set(by_client) != set(range(1, pp.n + 1)):
        raise ProtocolError("ciphertexts do not cover clients 1..n")
    return _weighted_product(pp.group, (by_client[i] for i in range(1, pp.n + 1)), y)


def share_decrypt(pp: PublicParams, ciphertexts: Sequence[LabeledCiphertext], y: Sequence[int],
                  dk: FunctionalKeyShare, subset: Sequence[int], k: int, label: bytes,
                  rng=None) -> PartialDecryption:
    subset = _check_subset(pp, subset)
    j = dk.index
    if j not in subset:
        raise ParameterError(f"aggregator {j} is not in subset {subset}")
    if dk.round != k:
        raise ProtocolError(f"key share is for round {dk.round}, not {k}")
    group = pp.group
    ct0 = aggregate_ciphertext(pp, ciphertexts, y, label)
    h1, h2 = partial_bases(pp, label, j, subset)
    w = dk.value
    ct1, ct2 = group.exp(h1, w), group.exp(h2, w)
    stmt = dleq.DleqStatement((group.h, h1, h2), (group.exp(group.h, w), ct1, ct2),
                              proof_context(pp, k, label, j, subset))
    proof = dleq.prove(group, w, stmt, rng, check=False)
    return PartialDecryption(j, subset, ct0, ct1, ct2, proof)


# ---------------------------------------------------------------------------
# Verification and combination
# ---------------------------------------------------------------------------


def check_partials(pp: PublicParams, partials: Sequence[PartialDecryption], subset: Sequence[int],
                   k: int, label: bytes, published: RoundKeyCommitments,
                   share_commitments: Optional[Sequence[int]] = None) -> Dict[int, Optional[str]]:
    """Per-aggregator verdict: ``None`` when accepted, otherwise a reason string.

    A ``ct0`` value is the consensus when at least ``ceil((t+1)/2)`` of the
    received copies carry it; copies that disagree are rejected.
    """
    subset = _check_subset(pp, subset)
    if share_commitments is None:
        share_commitments = derive_share_commitments(pp, published, k)
    verdicts: Dict[int, Optional[str]] = {}
    seen = Counter(pd.index for pd in partials)
    candidates = []
    for pd in partials:
        if pd.index not in subset:
            verdicts[pd.index] = "not-in-subset"
        elif seen[pd.index] > 1:
            verdicts[pd.index] = "duplicate-index"
        elif tuple(pd.subset) != subset:
            verdicts[pd.index] = "subset-mismatch"
        else:
            candidates.append(pd)

    quorum = (pp.t + 2) // 2
    votes = Counter(pd.ct0 for pd in candidates)
    consensus = next((v for v, c in votes.items() if c >= quorum), None)

    for pd in candidates:
        if consensus is None:
            verdicts[pd.index] = "no-ct0-consensus"
            continue
        if pd.ct0 != consensus:
            verdicts[pd.index] = "ct0-mismatch"
            continue
        try:
            stmt = _statement(pp, k, label, pd.index, subset,
                              share_commitments[pd.index - 1], pd.ct1, pd.ct2)
            dleq.check(pp.group, pd.proof, stmt)
        except MalformedProofError as exc:
            verdicts[pd.index] = f"proof-malformed: {exc}"
        except VerificationError as exc:
            verdicts[pd.index] = f"proof-rejected: {exc}"
        else:
            verdicts[pd.index] = None
    return verdicts


def verify(pp: PublicParams, partials: Sequence[PartialDecryption], subset: Sequence[int], k: int,
           label: bytes, published: RoundKeyCommitments,
           share_commitments: Optional[Sequence[int]] = None) -> frozenset:
    """Indices whose partial decryptions verify; raises if fewer than ``t``."""
    verdicts = check_partials(pp, partials, subset, k, label, published, share_commitments)
    accepted = frozenset(j for j, reason in verdicts.items() if reason is None)
    if len(accepted) < pp.t:
        raise InsufficientSharesError(
            f"only {len(accepted)} of t={pp.t} partial decryptions verified",
            accepted=sorted(accepted),
            reasons={j: r for j, r in verdicts.items() if r is not None},
        )
    return accepted


def combine(pp: PublicParams, partials: Sequence[PartialDecryption]) -> int:
    """``[beta] = ct0 / (prod ct1 * prod ct2)`` over exactly ``t`` partials."""
    if len(partials) != pp.t:
        raise ThresholdError(f"need exactly t={pp.t} partial decryptions, got {len(partials)}")
    subset = _check_subset(pp, [pd.index for pd in partials])
    if any(set(pd.subset) != set(subset) for pd in partials):
        raise ProtocolError("partial decryptions disagree on the subset")
    ct0 = partials[0].ct0
    if any(pd.ct0 != ct0 for pd in partials):
        raise ProtocolError("partial decryptions disagree on the aggregated ciphertext")
    group = pp.group
    mask = group.prod(group.mul(pd.ct1, pd.ct2) for pd in partials)
    return group.div(ct0, mask)


def combine_recover(pp: PublicParams, partials: Sequence[PartialDecryption], table: DlogTable) -> int:
    """Recover ``<x, y>``; raises :class:`RangeError` when it exceeds the table bound."""
    return table.solve(combine(pp, partials))


def inner_product(x: Sequence[int], y: Sequence[int]) -> int:
    if len(x) != len(y):
        raise ParameterError("dimension mismatch")
    return sum(a * b for a, b in zip(x, y))
