"""Primitive timings and wire sizes, measured per client count ``n``."""

from __future__ import annotations

import random
import statistics
import time
from typing import Iterable, List, Optional

from . import vtmcfe
from .dlog import table_for
from .group import DEFAULT_GROUP, SchnorrGroup

# itemized per-round costs usually quoted for this construction; shown, not asserted
REFERENCE_COUNTS = {"DKeyGen": "2|G|+|Z_p|", "Encrypt": "|G|", "ShareDecrypt": "5|G|+2|Z_p|"}


def _instance(group, t, s, n, seed):
    rng = random.Random(f"{seed}:bench:{n}")
    pp, msk, eks = vtmcfe.setup(t, s, n, rounds=1, group=group, rng=rng)
    label = b"bench|round-1|coord-0"
    x = [rng.randint(-100, 100) for _ in range(n)]
    y = [1] * n
    return rng, pp, msk, eks, label, x, y


def message_sizes(ns: Iterable[int] = (5, 10, 50, 100), t: int = 3, s: int = 5,
                  group: Optional[SchnorrGroup] = None, seed: int = 0) -> dict:
    """Serialized byte counts of every wire object, for each ``n``."""
    group = group or DEFAULT_GROUP
    rows = []
    for n in ns:
        rng, pp, msk, eks, label, x, y = _instance(group, t, s, n, seed)
        shares, published = vtmcfe.dkeygen(pp, msk, y, 1)
        cts = [vtmcfe.encrypt(pp, ek, xi, label) for ek, xi in zip(eks, x)]
        subset = tuple(range(1, t + 1))
        pd = vtmcfe.share_decrypt(pp, cts, y, shares[0], subset, 1, label, rng)
        total = len(pd.to_bytes(group))
        header = vtmcfe.PartialDecryption.header_len(t)
        rows.append({
            "n": n,
            "dkeygen_share": len(shares[0].to_bytes(group)),
            "dkeygen_published": len(published.to_bytes(group)),
            "encrypt": len(cts[0].to_bytes(group)),
            "share_decrypt": total,
            "share_decrypt_crypto": total - header,
            "share_decrypt_header": header,
        })
    keys = [k for k in rows[0] if k != "n"] if rows else []
    constant = all(len({r[k] for r in rows}) == 1 for k in keys)
    el, sc = group.element_len, group.scalar_len
    return {
        "type": "sizes",
        "group": group.name,
        "element_bytes": el,
        "scalar_bytes": sc,
        "t": t,
        "s": s,
        "rows": rows,
        "symbolic": {
            "DKeyGen": "|Z_p| per aggregator + 2|G| published per round",
            "Encrypt": "|G| per client per coordinate",
            "ShareDecrypt": f"6|G|+2|Z_p| + {vtmcfe.PartialDecryption.header_len(t)} header bytes",
        },
        "reference_counts": dict(REFERENCE_COUNTS),
        "constant_in_n": constant,
    }


def _ms(fn, reps: int) -> float:
    times = []
    for _ in range(reps):
        start = time.perf_counter()
        fn()
        times.append((time.perf_counter() - start) * 1e3)
    return statistics.median(times)


def measure_primitives(ns: Iterable[int] = (5, 10, 50, 100), t: int = 3, s: int = 5,
                       reps: int = 5, group: Optional[SchnorrGroup] = None, seed: int = 0) -> dict:
    """Median milliseconds per primitive; machine dependent, never asserted."""
    group = group or DEFAULT_GROUP
    rows: List[dict] = []
    for n in ns:
        rng, pp, msk, eks, label, x, y = _instance(group, t, s, n, seed)
        table = table_for(group, group.g, 100 * n)
        subset = tuple(range(1, t + 1))

        shares, published = vtmcfe.dkeygen(pp, msk, y, 1)
        cts = [vtmcfe.encrypt(pp, ek, xi, label) for ek, xi in zip(eks, x)]
        pds = [vtmcfe.share_decrypt(pp, cts, y, shares[j - 1], subset, 1, label, rng)
               for j in subset]

        # H1(label) is cached after first use; time the encryption itself
        row = {
            "n": n,
            "DKeyGen": _ms(lambda: vtmcfe.dkeygen(pp, msk, y, 1), reps),
            "Encrypt (Avg)": _ms(lambda: [vtmcfe.encrypt(pp, ek, xi, label)
                                          for ek, xi in zip(eks, x)], reps) / n,
            "Partial Decrypt": _ms(lambda: vtmcfe.share_decrypt(
                pp, cts, y, shares[0], subset, 1, label, rng), reps),
            "Verify": _ms(lambda: vtmcfe.verify(pp, pds, subset, 1, label, published), reps),
            "Combine": _ms(lambda: vtmcfe.combine_recover(pp, pds, table), reps),
            "key_share_bytes": len(shares[0].to_bytes(group)),
            "partial_decryption_bytes": len(pds[0].to_bytes(group)),
            "dkeygen_key_terms": n,
        }
        assert vtmcfe.combine_recover(pp, pds, table) == sum(x)
        rows.append(row)
    return {"type": "bench", "group": group.name, "t": t, "s": s, "reps": reps,
            "unit": "ms", "rows": rows}
