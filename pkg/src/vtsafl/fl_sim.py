"""In-process simulation of verifiable secure aggregation rounds.

A trusted authority (TA), ``n`` clients and ``s`` aggregators exchange
serialized messages through :class:`Network`, which counts bytes per
phase and per sending role.  Client updates are synthetic and quantized to
integers; coordinate ``m`` of round ``k`` is encrypted under its own label.

Every responsive aggregator submits partial decryptions each round: the
coordinator covers the responsive set with ``t``-subsets, clients verify
each subset, and the first fully accepted subset is combined.  When no
subset passes, a fresh subset is drawn from aggregators that have not been
rejected.
"""

from __future__ import annotations

import logging
import math
import random
import time
from collections import Counter, defaultdict
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from . import dleq, vtmcfe
from .dlog import table_for
from .errors import ParameterError, ProtocolError, RangeError, VtsaflError
from .group import DEFAULT_GROUP, SchnorrGroup
from .vtmcfe import LabeledCiphertext, PartialDecryption

logger = logging.getLogger(__name__)

BEHAVIORS = ("honest", "tamper_partial", "random_output", "replay_previous", "crash")
_ALIASES = {"tamper": "tamper_partial", "random": "random_output", "replay": "replay_previous"}


def normalize_behavior(name: str) -> str:
    name = _ALIASES.get(name, name)
    if name not in BEHAVIORS:
        raise ParameterError(f"unknown aggregator behavior {name!r}; choose from {BEHAVIORS}")
    return name


def round_label(k: int, m: int) -> bytes:
    return f"round-{k}|coord-{m}".encode()


# ---------------------------------------------------------------------------
# Configuration and data
# ---------------------------------------------------------------------------


@dataclass
class SimConfig:
    clients: int = 5
    aggregators: int = 4
    threshold: int = 3
    rounds: int = 3
    dim: int = 8
    scale: int = 100
    clip: float = 1.0
    bound: Optional[int] = None
    malicious: Dict[int, str] = field(default_factory=dict)
    seed: int = 0
    verifiers: str = "all"

    def __post_init__(self):
        self.malicious = {int(j): normalize_behavior(b) for j, b in dict(self.malicious).items()}

    @property
    def client_bound(self) -> int:
        """Largest absolute quantized coordinate a client can produce."""
        return math.floor(self.scale * self.clip + 0.5)

    @property
    def dlog_bound(self) -> int:
        return self.bound if self.bound is not None else self.clients * self.client_bound

    def validate(self) -> "SimConfig":
        if not 2 <= self.threshold <= self.aggregators:
            raise ParameterError(f"need 2 <= threshold <= aggregators, got "
                                 f"t={self.threshold}, s={self.aggregators}")
        if min(self.clients, self.dim, self.rounds) < 1:
            raise ParameterError("clients, dim and rounds must be at least 1")
        if self.scale < 1 or self.clip <= 0:
            raise ParameterError("scale must be >= 1 and clip > 0")
        if self.dlog_bound < self.clients * self.client_bound:
            raise ParameterError(f"bound {self.dlog_bound} < clients*scale*clip = "
                                 f"{self.clients * self.client_bound}")
        for j in self.malicious:
            if not 1 <= j <= self.aggregators:
                raise ParameterError(f"malicious index {j} outside 1..{self.aggregators}")
        if self.verifiers not in ("all", "one"):
            raise ParameterError("verifiers must be 'all' or 'one'")
        return self

    def behavior(self, j: int) -> str:
        return self.malicious.get(j, "honest")


@dataclass(frozen=True)
class ModelVector:
    values: Tuple[float, ...]
    quantized: Tuple[int, ...]

    @property
    def dim(self) -> int:
        return len(self.values)


def quantize(v: Sequence[float], scale: int, bound: Optional[int] = None) -> List[int]:
    """Round ``v * scale`` to the nearest integer, ties away from zero."""
    if scale < 1:
        raise ParameterError("scale must be a positive integer")
    arr = np.asarray(v, dtype=float) * scale
    out = (np.sign(arr) * np.floor(np.abs(arr) + 0.5)).astype(np.int64)
    if bound is not None and out.size and int(np.max(np.abs(out))) > bound:
        raise RangeError(f"quantized value exceeds the per-client bound {bound}")
    return [int(x) for x in out]


def dequantize(q: Sequence[int], scale: int) -> List[float]:
    return [x / scale for x in q]


def synth_client_update(k: int, i: int, dim: int, seed: int = 0, scale: int = 100,
                        clip: float = 1.0) -> ModelVector:
    """Reproducible stand-in for client ``i``'s locally trained update in round ``k``."""
    rng = np.random.default_rng([seed, k, i])
    values = rng.uniform(-clip, clip, size=dim)
    return ModelVector(tuple(float(x) for x in values), tuple(quantize(values, scale)))


def fedavg_oracle(updates: Sequence[Sequence[int]], y: Sequence[int]) -> List[int]:
    """Plaintext ``sum_i y_i * x_i`` per coordinate."""
    if len(updates) != len(y):
        raise ParameterError("need one weight per update")
    if not updates:
        return []
    dim = len(updates[0])
    if any(len(u) != dim for u in updates):
        raise ParameterError("updates differ in dimension")
    return [sum(w * u[m] for u, w in zip(updates, y)) for m in range(dim)]


@dataclass
class RoundReport:
    round: int
    success: bool
    failure: Optional[str]
    subset: Optional[List[int]]
    attempts: List[List[int]]
    recovered: Optional[List[int]]
    oracle: List[int]
    matches_oracle: bool
    global_update: Optional[List[float]]
    plaintext_mean: List[float]
    max_abs_error: Optional[float]
    verdicts: Dict[str, Dict[str, Optional[str]]]
    bytes: Dict[str, int]
    bytes_by_role: Dict[str, int]
    timings_ms: Dict[str, float]

    def to_dict(self, timings: bool = True) -> dict:
        d = asdict(self)
        d["type"] = "round"
        if not timings:
            d.pop("timings_ms")
        return d

    def rejected(self) -> Dict[int, str]:
        return {int(j): v["reason"] for j, v in self.verdicts.items() if v["status"] == "rejected"}


# ---------------------------------------------------------------------------
# Network
# ---------------------------------------------------------------------------


class Network:
    """Counts every delivered payload once per recipient."""

    PHASES = ("encrypt", "key_request", "dkeygen", "share_decrypt")

    def __init__(self):
        self.by_phase = Counter({p: 0 for p in self.PHASES})
        self.by_role = Counter({"client": 0, "aggregator": 0, "ta": 0})

    def send(self, phase: str, sender: str, payload: bytes, recipients: int = 1) -> bytes:
        size = len(payload) * recipients
        self.by_phase[phase] += size
        self.by_role[sender] += size
        return payload


# ---------------------------------------------------------------------------
# Parties
# ---------------------------------------------------------------------------


def collect_ciphertexts(pp: vtmcfe.PublicParams, messages, label: bytes) -> List[LabeledCiphertext]:
    """Decode ``(client, label, bytes)`` messages, rejecting stale labels and duplicates."""
    out, seen = [], set()
    for client, msg_label, payload in messages:
        if bytes(msg_label) != bytes(label):
            raise ProtocolError(f"client {client} sent a ciphertext for {msg_label!r}, "
                                f"expected {label!r}")
        if client in seen:
            raise ProtocolError(f"duplicate ciphertext from client {client} for {label!r}")
        seen.add(client)
        out.append(LabeledCiphertext.from_bytes(pp.group, payload, client, label))
    return out


class Aggregator:
    def __init__(self, index: int, behavior: str, seed: int):
        self.index = index
        self.behavior = normalize_behavior(behavior)
        self.rng = random.Random(f"{seed}:aggregator:{index}")
        self.key: Optional[vtmcfe.FunctionalKeyShare] = None
        self.previous: Dict[int, PartialDecryption] = {}
        self.current: Dict[int, PartialDecryption] = {}

    @property
    def responsive(self) -> bool:
        return self.behavior != "crash"

    def begin_round(self):
        if self.current:
            self.previous = self.current
        self.current = {}

    def partial(self, pp, ciphertexts, y, subset, k: int, m: int) -> PartialDecryption:
        label = round_label(k, m)
        honest = vtmcfe.share_decrypt(pp, ciphertexts, y, self.key, subset, k, label, self.rng)
        self.current[m] = honest
        g = pp.group
        if self.behavior == "honest":
            return honest
        if self.behavior == "tamper_partial":
            return PartialDecryption(honest.index, honest.subset, honest.ct0,
                                     g.mul(honest.ct1, g.g), honest.ct2, honest.proof)
        if self.behavior == "random_output":
            proof = dleq.DleqProof(tuple(g.random_element(self.rng) for _ in range(3)),
                                   g.random_scalar(self.rng), g.random_scalar(self.rng))
            return PartialDecryption(honest.index, honest.subset, honest.ct0,
                                     g.random_element(self.rng), g.random_element(self.rng), proof)
        if self.behavior == "replay_previous":
            if m in self.previous:
                return self.previous[m]
            # no history yet: replay a decryption made under the previous round's label
            stale = round_label(k - 1, m)
            relabeled = [LabeledCiphertext(ct.client, stale, ct.element) for ct in ciphertexts]
            return vtmcfe.share_decrypt(pp, relabeled, y, self.key, subset, k, stale, self.rng)
        raise ProtocolError(f"aggregator {self.index} cannot act as {self.behavior}")


def cover_subsets(members: Sequence[int], t: int) -> List[Tuple[int, ...]]:
    """``t``-subsets covering ``members``; the last chunk is padded from the front."""
    members = sorted(members)
    if len(members) < t:
        return []
    out = []
    for start in range(0, len(members), t):
        chunk = members[start:start + t]
        if len(chunk) < t:
            chunk = chunk + [j for j in members if j not in chunk][: t - len(chunk)]
        out.append(tuple(sorted(chunk)))
    return out


# ---------------------------------------------------------------------------
# Simulation
# ---------------------------------------------------------------------------


class Simulation:
    def __init__(self, config: SimConfig, group: Optional[SchnorrGroup] = None):
        self.config = config.validate()
        self.group = group or DEFAULT_GROUP
        c = config
        ta_rng = random.Random(f"{c.seed}:ta")
        self.pp, self.msk, self.eks = vtmcfe.setup(
            c.threshold, c.aggregators, c.clients, rounds=c.rounds, group=self.group,
            rng=ta_rng, message_bound=c.client_bound)
        self.table = table_for(self.group, self.group.g, c.dlog_bound)
        self.aggregators = {j: Aggregator(j, c.behavior(j), c.seed)
                            for j in range(1, c.aggregators + 1)}
        self.weights = [1] * c.clients

    def run(self) -> List[RoundReport]:
        return [self.run_round(k) for k in range(1, self.config.rounds + 1)]

    def run_round(self, k: int) -> RoundReport:
        c, pp, g = self.config, self.pp, self.group
        net = Network()
        timings: Dict[str, float] = defaultdict(float)
        n, d, t = c.clients, c.dim, c.threshold
        clock = time.perf_counter

        # Local training and encryption
        start = clock()
        updates = [synth_client_update(k, i, d, c.seed, c.scale, c.clip) for i in range(1, n + 1)]
        responsive = [j for j, a in self.aggregators.items() if a.responsive]
        inbox = defaultdict(list)
        for i, (ek, upd) in enumerate(zip(self.eks, updates), start=1):
            for m in range(d):
                label = round_label(k, m)
                ct = vtmcfe.encrypt(pp, ek, upd.quantized[m], label)
                payload = net.send("encrypt", "client", ct.to_bytes(g), recipients=c.aggregators)
                inbox[m].append((i, label, payload))
        timings["encrypt"] = (clock() - start) * 1e3

        oracle = fedavg_oracle([u.quantized for u in updates], self.weights)
        plain_mean = [float(x) for x in np.mean([u.values for u in updates], axis=0)]
        verdicts = {str(j): {"status": "silent", "reason": "no response"}
                    for j in self.aggregators}

        def report(success, failure=None, subset=None, attempts=(), recovered=None):
            glob = err = None
            if recovered is not None:
                glob = [x / (c.scale * n) for x in recovered]
                err = max(abs(a - b) for a, b in zip(glob, plain_mean))
            return RoundReport(
                round=k, success=success, failure=failure,
                subset=list(subset) if subset else None,
                attempts=[list(s) for s in attempts], recovered=recovered, oracle=oracle,
                matches_oracle=recovered == oracle, global_update=glob,
                plaintext_mean=plain_mean, max_abs_error=err, verdicts=verdicts,
                bytes=dict(net.by_phase), bytes_by_role=dict(net.by_role),
                timings_ms={p: round(v, 3) for p, v in timings.items()})

        # Key requests and functional key shares
        start = clock()
        ciphertexts = {}
        for j in responsive:
            self.aggregators[j].begin_round()
            # each aggregator decodes its own copy of the uploads
            ciphertexts[j] = [collect_ciphertexts(pp, inbox[m], round_label(k, m)) for m in range(d)]
        requests = {}
        for j in responsive:
            payload = b"".join(w.to_bytes(8, "big", signed=True) for w in self.weights)
            net.send("key_request", "aggregator", payload)
            requests[j] = tuple(self.weights)
        if len(set(requests.values())) > 1:
            timings["dkeygen"] = (clock() - start) * 1e3
            return report(False, "aggregators requested different function vectors")
        shares, published = vtmcfe.dkeygen(pp, self.msk, self.weights, k)
        for j in responsive:
            wire = net.send("dkeygen", "ta", shares[j - 1].to_bytes(g))
            self.aggregators[j].key = vtmcfe.FunctionalKeyShare.from_bytes(g, wire, j, k)
        pub_wire = net.send("dkeygen", "ta", published.to_bytes(g), recipients=n)
        published = vtmcfe.RoundKeyCommitments.from_bytes(g, pub_wire, k)
        timings["dkeygen"] = (clock() - start) * 1e3

        share_commitments = vtmcfe.derive_share_commitments(pp, published, k)
        rejected: Dict[int, str] = {}
        accepted_once: set = set()
        attempts: List[Tuple[int, ...]] = []
        plan = cover_subsets(responsive, t)
        good = good_wires = None
        n_verifiers = n if c.verifiers == "all" else 1

        # the whole cover runs so every responsive aggregator is checked each round
        while plan:
            subset = plan.pop(0)
            attempts.append(subset)
            start = clock()
            wires = {m: [] for m in range(d)}
            for j in subset:
                agg = self.aggregators[j]
                for m in range(d):
                    pd = agg.partial(pp, ciphertexts[j][m], self.weights, subset, k, m)
                    wires[m].append(net.send("share_decrypt", "aggregator", pd.to_bytes(g),
                                             recipients=n))
            timings["share_decrypt"] += (clock() - start) * 1e3

            start = clock()
            subset_verdicts = None
            for _ in range(n_verifiers):
                v = self._client_verify(wires, subset, k, published, share_commitments)
                if subset_verdicts is not None and v != subset_verdicts:
                    raise ProtocolError("clients reached different verdicts on identical input")
                subset_verdicts = v
            timings["verify"] += (clock() - start) * 1e3

            for j, reason in subset_verdicts.items():
                if reason is None:
                    accepted_once.add(j)
                else:
                    rejected.setdefault(j, reason)
            if good is None and all(subset_verdicts.get(j) is None for j in subset):
                good, good_wires = subset, wires
            if good is None and not plan:
                pool = [j for j in responsive if j not in rejected]
                fresh = tuple(pool[:t])
                if len(pool) >= t and fresh not in attempts:
                    plan.append(fresh)

        for j in responsive:
            if j in rejected:
                verdicts[str(j)] = {"status": "rejected", "reason": rejected[j]}
            elif j in accepted_once:
                verdicts[str(j)] = {"status": "accepted", "reason": None}
            else:
                verdicts[str(j)] = {"status": "idle", "reason": "not selected"}

        if good is None:
            return report(False, f"insufficient-shares: {len(responsive) - len(rejected)} "
                                 f"usable aggregators, threshold {t}", attempts=attempts)

        start = clock()
        recovered = []
        try:
            for m in range(d):
                pds = [PartialDecryption.from_bytes(g, w) for w in good_wires[m]]
                recovered.append(vtmcfe.combine_recover(pp, pds, self.table))
        except VtsaflError as exc:
            timings["combine"] = (clock() - start) * 1e3
            return report(False, f"combine failed: {exc}", subset=good, attempts=attempts)
        timings["combine"] = (clock() - start) * 1e3
        logger.debug("round %d recovered via subset %s", k, good)
        return report(True, subset=good, attempts=attempts, recovered=recovered)

    def _client_verify(self, wires: Mapping[int, List[bytes]], subset, k, published,
                       share_commitments) -> Dict[int, Optional[str]]:
        """One client's verdicts: an aggregator passes only if every coordinate verifies."""
        pp, g = self.pp, self.group
        verdicts: Dict[int, Optional[str]] = {j: None for j in subset}
        for m, payloads in wires.items():
            pds = []
            for j, payload in zip(subset, payloads):
                try:
                    pd = PartialDecryption.from_bytes(g, payload)
                except VtsaflError as exc:
                    verdicts[j] = verdicts[j] or f"undecodable: {exc}"
                    continue
                if pd.index != j:
                    verdicts[j] = verdicts[j] or "sender-index-mismatch"
                    continue
                pds.append(pd)
            got = vtmcfe.check_partials(pp, pds, subset, k, round_label(k, m), published,
                                        share_commitments)
            for j, reason in got.items():
                if reason is not None and verdicts.get(j) is None:
                    verdicts[j] = f"coord {m}: {reason}"
        return verdicts


def summarize(reports: Sequence[RoundReport]) -> dict:
    phase = Counter()
    role = Counter()
    for r in reports:
        phase.update(r.bytes)
        role.update(r.bytes_by_role)
    rejected = defaultdict(list)
    for r in reports:
        for j in r.rejected():
            rejected[str(j)].append(r.round)
    return {
        "type": "summary",
        "rounds": len(reports),
        "succeeded": sum(r.success for r in reports),
        "all_succeeded": all(r.success for r in reports),
        "all_match_oracle": all(r.matches_oracle for r in reports),
        "bytes_by_phase": dict(phase),
        "bytes_by_role": dict(role),
        "rejected_rounds": dict(rejected),
    }
