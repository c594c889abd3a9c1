"""Shared pipeline driver for scheme-level tests."""

from dataclasses import dataclass, field

from vtsafl import vtmcfe
from vtsafl.dlog import table_for


@dataclass
class Round:
    pp: object
    msk: object
    eks: list
    x: list
    y: list
    label: bytes
    k: int
    ciphertexts: list
    shares: list
    published: object
    partials: dict = field(default_factory=dict)

    def decrypt(self, subset, rng):
        return [vtmcfe.share_decrypt(self.pp, self.ciphertexts, self.y, self.shares[j - 1],
                                     subset, self.k, self.label, rng) for j in subset]


def make_round(group, t, s, n, x, y, rng, label=b"round-1|coord-0", k=1, rounds=1, keys=None):
    pp, msk, eks = keys or vtmcfe.setup(t, s, n, rounds=rounds, group=group, rng=rng)
    cts = [vtmcfe.encrypt(pp, ek, xi, label) for ek, xi in zip(eks, x)]
    shares, published = vtmcfe.dkeygen(pp, msk, y, k)
    return Round(pp, msk, eks, list(x), list(y), label, k, cts, shares, published)


def recover(rnd, subset, rng, bound):
    pds = rnd.decrypt(subset, rng)
    accepted = vtmcfe.verify(rnd.pp, pds, subset, rnd.k, rnd.label, rnd.published)
    assert accepted == frozenset(subset)
    group = rnd.pp.group
    return vtmcfe.combine_recover(rnd.pp, pds, table_for(group, group.g, bound))
