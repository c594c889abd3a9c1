"""Exception hierarchy shared by every layer of the package."""


class VtsaflError(Exception):
    """Base class for all errors raised by this package."""


class ParameterError(VtsaflError, ValueError):
    """Invalid parameters: wrong dimensions, bad indices, unknown rounds."""


class ThresholdError(VtsaflError):
    """Wrong number of shares or partial decryptions for the threshold."""


class InsufficientSharesError(ThresholdError):
    """Fewer than ``t`` partial decryptions survived verification.

    ``reasons`` maps each rejected aggregator index to a short diagnostic.
    """

    def __init__(self, message, accepted=(), reasons=None):
        super().__init__(message)
        self.accepted = tuple(accepted)
        self.reasons = dict(reasons or {})


class ProtocolError(VtsaflError):
    """Messages that cannot be processed together (label mismatch, missing data)."""


class RangeError(VtsaflError, ValueError):
    """A plaintext or a recovered exponent falls outside its configured bound."""


class EncodingError(VtsaflError, ValueError):
    """Non-canonical or malformed byte encoding."""


class VerificationError(VtsaflError):
    """Base class for proof rejection."""


class MalformedProofError(VerificationError):
    """Proof or statement is structurally invalid (length mismatch, bad element)."""


class ProofRejected(VerificationError):
    """Proof is well formed but the verification equations do not hold."""
