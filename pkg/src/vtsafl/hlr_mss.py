"""Multi-secret sharing from a homogeneous linear recursion.

The recursion ``w[i+t] + a_1 w[i+t-1] + ... + a_t w[i] = 0 (mod p)`` has
auxiliary polynomial ``(x - alpha)^t``, so every term satisfies
``w[i] = q(i) * alpha^i`` for a polynomial ``q`` of degree below ``t``.
Participant ``j`` (1-based) holds ``w[t + j - 1]``.  Any ``t`` shares pin
down ``q`` by Lagrange interpolation, and the first ``m`` terms of the
sequence are the secrets.
"""

from __future__ import annotations

import secrets
from dataclasses import dataclass
from math import comb
from typing import Iterable, Mapping, Optional, Sequence, Tuple

from .errors import ParameterError, ThresholdError


def expand_char_poly(alpha: int, t: int, p: int) -> Tuple[int, ...]:
    """Coefficients ``a_1..a_t`` with ``x^t + sum a_i x^(t-i) = (x - alpha)^t mod p``.

    >>> expand_char_poly(2, 2, 101)
    (97, 4)
    """
    if t < 1:
        raise ParameterError("t must be at least 1")
    return tuple(comb(t, i) * pow(-alpha, i, p) % p for i in range(1, t + 1))


def node(j: int, t: int) -> int:
    """Sequence index held by participant ``j``."""
    return t + j - 1


@dataclass(frozen=True)
class MssParams:
    p: int
    alpha: int
    t: int
    s: int
    coeffs: Tuple[int, ...]

    def __post_init__(self):
        if self.t < 2:
            raise ParameterError("threshold t must be at least 2")
        if self.s < self.t:
            raise ParameterError("need s >= t participants")
        if self.alpha % self.p == 0:
            raise ParameterError("alpha must be nonzero mod p")
        if len(self.coeffs) != self.t:
            raise ParameterError("need exactly t recursion coefficients")

    @classmethod
    def create(cls, p: int, alpha: int, t: int, s: int) -> "MssParams":
        alpha %= p
        return cls(p, alpha, t, s, expand_char_poly(alpha, t, p))

    @classmethod
    def random(cls, p: int, t: int, s: int, rng=None) -> "MssParams":
        rng = rng or secrets.SystemRandom()
        return cls.create(p, rng.randrange(1, p), t, s)


@dataclass(frozen=True)
class HlrSequence:
    initial: Tuple[int, ...]
    shares: Tuple[int, ...]

    @property
    def terms(self) -> Tuple[int, ...]:
        return self.initial + self.shares

    def share(self, j: int) -> int:
        """Share of participant ``j`` (1-based)."""
        if not 1 <= j <= len(self.shares):
            raise ParameterError(f"no participant {j}")
        return self.shares[j - 1]


def extend(coeffs: Sequence[int], initial: Sequence[int], count: int, p: int) -> list:
    """Run the recursion forward ``count`` terms past ``initial``."""
    t = len(coeffs)
    w = [x % p for x in initial]
    for _ in range(count):
        w.append(-sum(a * w[-r] for r, a in enumerate(coeffs, start=1)) % p)
    return w[t:]


def residuals(coeffs: Sequence[int], terms: Sequence[int], p: int) -> list:
    t = len(coeffs)
    return [
        (terms[i + t] + sum(a * terms[i + t - r] for r, a in enumerate(coeffs, start=1))) % p
        for i in range(len(terms) - t)
    ]


def share(params: MssParams, secret_values: Sequence[int], rng=None,
          filler: Optional[Sequence[int]] = None) -> HlrSequence:
    """Share ``m <= t`` secrets among ``params.s`` participants.

    Terms ``w[m..t-1]`` come from ``filler`` when given (length ``t - m``),
    otherwise from ``rng``.
    """
    p, t = params.p, params.t
    m = len(secret_values)
    if not 1 <= m <= t:
        raise ParameterError(f"can share between 1 and t={t} secrets, got {m}")
    if filler is None:
        rng = rng or secrets.SystemRandom()
        filler = [rng.randrange(p) for _ in range(t - m)]
    elif len(filler) != t - m:
        raise ParameterError(f"filler must have t - m = {t - m} values")
    initial = tuple(x % p for x in (*secret_values, *filler))
    return HlrSequence(initial, tuple(extend(params.coeffs, initial, params.s, p)))


def lagrange_coeff(e: int, j: int, subset: Iterable[int], t: int, p: int) -> int:
    """Basis coefficient moving the value at ``node(j)`` to evaluation point ``e``.

    Nodes are ``t + j' - 1`` for ``j'`` in ``subset``; the denominator
    ``j - j'`` is the node difference.
    """
    subset = tuple(subset)
    if j not in subset:
        raise ParameterError(f"participant {j} not in subset {subset}")
    if len(set(subset)) != len(subset):
        raise ParameterError("duplicate participant indices")
    num, den = 1, 1
    for other in subset:
        if other == j:
            continue
        num = num * (e - node(other, t)) % p
        den = den * (j - other) % p
    return num * pow(den, -1, p) % p


def reconstruct(params: MssParams, subset_shares: Mapping[int, int] | Iterable[Tuple[int, int]],
                m: int) -> Tuple[int, ...]:
    """Recover the first ``m`` sequence terms from exactly ``t`` shares."""
    pairs = list(subset_shares.items() if isinstance(subset_shares, Mapping) else subset_shares)
    p, t, alpha = params.p, params.t, params.alpha
    if len(pairs) != t:
        raise ThresholdError(f"need exactly t={t} shares, got {len(pairs)}")
    idx = [j for j, _ in pairs]
    if len(set(idx)) != t:
        raise ParameterError("duplicate participant indices")
    if any(not 1 <= j <= params.s for j in idx):
        raise ParameterError("participant index out of range")
    if not 1 <= m <= t:
        raise ParameterError("m must be between 1 and t")
    # q(node_j) = sh_j / alpha^node_j
    points = {j: sh * pow(alpha, -node(j, t), p) % p for j, sh in pairs}
    out = []
    for i in range(m):
        q_i = sum(lagrange_coeff(i, j, idx, t, p) * points[j] for j in idx) % p
        out.append(q_i * pow(alpha, i, p) % p)
    return tuple(out)
