"""Non-interactive proof that several statements share one discrete log.

Proves knowledge of ``w`` with ``statements[i] = bases[i]^w`` for every
``i``.  One nonce ``r`` gives one commitment per base; the challenge is
``H2(context || bases || statements || commitments)`` and the response
``z = r + c*w``.  The verifier checks ``bases[i]^z == commitments[i] *
statements[i]^c`` and recomputes ``c``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

from .errors import EncodingError, MalformedProofError, ProofRejected, VerificationError
from .group import SchnorrGroup


@dataclass(frozen=True)
class DleqStatement:
    bases: Tuple[int, ...]
    statements: Tuple[int, ...]
    context: bytes = b""

    def __post_init__(self):
        object.__setattr__(self, "bases", tuple(self.bases))
        object.__setattr__(self, "statements", tuple(self.statements))


@dataclass(frozen=True)
class DleqProof:
    commitments: Tuple[int, ...]
    challenge: int
    response: int

    def __post_init__(self):
        object.__setattr__(self, "commitments", tuple(self.commitments))

    def to_bytes(self, group: SchnorrGroup) -> bytes:
        return (group.encode_elements(self.commitments)
                + group.encode_scalar(self.challenge)
                + group.encode_scalar(self.response))

    @classmethod
    def from_bytes(cls, group: SchnorrGroup, data: bytes) -> "DleqProof":
        tail = 2 * group.scalar_len
        if len(data) <= tail:
            raise EncodingError("proof too short")
        commitments = group.decode_elements(data[:-tail])
        c = group.decode_scalar(data[-tail:-group.scalar_len])
        z = group.decode_scalar(data[-group.scalar_len:])
        return cls(tuple(commitments), c, z)

    @staticmethod
    def encoded_len(group: SchnorrGroup, k: int) -> int:
        return k * group.element_len + 2 * group.scalar_len


def challenge(group: SchnorrGroup, stmt: DleqStatement, commitments) -> int:
    parts = [len(stmt.context).to_bytes(4, "big"), stmt.context,
             len(stmt.bases).to_bytes(2, "big"),
             group.encode_elements(stmt.bases),
             group.encode_elements(stmt.statements),
             group.encode_elements(commitments)]
    return group.hash_to_scalar(b"".join(parts))


def _check_shape(group: SchnorrGroup, stmt: DleqStatement, commitments=None):
    k = len(stmt.bases)
    if k == 0 or len(stmt.statements) != k:
        raise MalformedProofError("bases and statements must be non-empty and equal length")
    if commitments is not None and len(commitments) != k:
        raise MalformedProofError(f"expected {k} commitments, got {len(commitments)}")
    for x in (*stmt.bases, *stmt.statements, *(commitments or ())):
        if not (isinstance(x, int) and 0 < x < group.modulus):
            raise MalformedProofError("value is not a group element encoding")


def prove(group: SchnorrGroup, witness: int, stmt: DleqStatement, rng=None,
          check: bool = __debug__) -> DleqProof:
    _check_shape(group, stmt)
    if check and any(group.exp(b, witness) != y for b, y in zip(stmt.bases, stmt.statements)):
        raise ValueError("statements are not bases raised to the witness")
    r = group.random_scalar(rng)
    commitments = tuple(group.exp(b, r) for b in stmt.bases)
    c = challenge(group, stmt, commitments)
    return DleqProof(commitments, c, (r + c * witness) % group.order)


def check(group: SchnorrGroup, proof: DleqProof, stmt: DleqStatement) -> None:
    """Raise :class:`MalformedProofError` or :class:`ProofRejected` unless valid."""
    _check_shape(group, stmt, proof.commitments)
    if not (0 <= proof.challenge < group.order and 0 <= proof.response < group.order):
        raise MalformedProofError("non-canonical scalar in proof")
    if challenge(group, stmt, proof.commitments) != proof.challenge:
        raise ProofRejected("challenge does not match transcript")
    for b, y, a in zip(stmt.bases, stmt.statements, proof.commitments):
        lhs = group.exp(b, proof.response)
        rhs = group.mul(a, group.exp(y, proof.challenge))
        if lhs != rhs:
            raise ProofRejected("verification equation failed")


def verify(group: SchnorrGroup, proof: DleqProof, stmt: DleqStatement) -> bool:
    try:
        check(group, proof, stmt)
    except VerificationError:
        return False
    return True
