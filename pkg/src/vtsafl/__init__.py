"""Verifiable threshold multi-client functional encryption and a secure
federated aggregation simulator built on it."""

from .errors import (EncodingError, InsufficientSharesError, MalformedProofError, ParameterError,
                     ProofRejected, ProtocolError, RangeError, ThresholdError, VerificationError,
                     VtsaflError)
from .group import DEFAULT_GROUP, SchnorrGroup

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_GROUP", "SchnorrGroup", "VtsaflError", "ParameterError", "ThresholdError",
    "InsufficientSharesError", "ProtocolError", "RangeError", "EncodingError",
    "VerificationError", "MalformedProofError", "ProofRejected",
]
