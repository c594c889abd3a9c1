import itertools
import random

import pytest

from vtsafl import dleq, vtmcfe
from vtsafl.dlog import DlogTable, table_for
from vtsafl.errors import (InsufficientSharesError, ParameterError, ProtocolError, RangeError,
                           ThresholdError)
from vtsafl.hlr_mss import expand_char_poly, lagrange_coeff, node

from scheme_helpers import make_round, recover


def toy_params(toy, t=2, s=3, n=1, alpha=2, fillers=()):
    commitments = (tuple(toy.exp(toy.h, c) for c in fillers),)
    return vtmcfe.PublicParams(toy, t, s, n, alpha, expand_char_poly(alpha, t, toy.order),
                               commitments)


# -- setup -----------------------------------------------------------------

def test_setup_commitment_counts(group, rng):
    pp, msk, eks = vtmcfe.setup(2, 3, 2, rounds=1, group=group, rng=rng)
    assert pp.round_commitments(1) == ()
    pp, msk, eks = vtmcfe.setup(3, 4, 2, rounds=1, group=group, rng=rng)
    assert len(pp.round_commitments(1)) == 1
    assert pp.round_commitments(1)[0] == group.exp(group.h, msk.fillers[0][0])
    pp, msk, eks = vtmcfe.setup(5, 6, 2, rounds=4, group=group, rng=rng)
    assert all(len(pp.round_commitments(k)) == 3 for k in range(1, 5))
    assert len(eks) == 2 and eks[1].index == 2 and eks[1].vector == msk.keys[1]


def test_setup_generators(group, rng):
    pp, _, _ = vtmcfe.setup(2, 3, 1, group=group, rng=rng)
    g = pp.group
    assert g.g != g.h and 1 not in (g.g, g.h)
    assert pp.alpha != 0


@pytest.mark.parametrize("t,s,n,k", [(5, 4, 1, 1), (1, 3, 1, 1), (2, 3, 0, 1), (2, 3, 1, 0)])
def test_setup_rejects(group, t, s, n, k):
    with pytest.raises(ParameterError):
        vtmcfe.setup(t, s, n, rounds=k, group=group)


# -- dkeygen -----------------------------------------------------------------

def test_functional_key_vector_arithmetic(toy):
    pp = toy_params(toy, n=2)
    msk = vtmcfe.MasterSecretKey(((2, 3), (1, 1)), ((),))
    assert vtmcfe.functional_key(pp, msk, [1, 2]) == (4, 5)


def test_dkeygen_worked_instance(toy):
    pp = toy_params(toy)
    msk = vtmcfe.MasterSecretKey(((5, 7),), ((),))
    shares, pub = vtmcfe.dkeygen(pp, msk, [1], 1)
    assert [s.value for s in shares] == [8, 4, 85]
    assert (pub.h0, pub.h1) == (toy.exp(toy.h, 5), toy.exp(toy.h, 7))


def test_dkeygen_zero(toy):
    pp = toy_params(toy, t=3, s=4, n=2, fillers=(0,))
    msk = vtmcfe.MasterSecretKey(((5, 7), (1, 2)), ((0,),))
    shares, pub = vtmcfe.dkeygen(pp, msk, [0, 0], 1)
    assert all(s.value == 0 for s in shares)
    assert vtmcfe.derive_share_commitments(pp, pub, 1) == (1, 1, 1, 1)


def test_dkeygen_structure(group, rng):
    pp, msk, _ = vtmcfe.setup(3, 5, 4, rounds=2, group=group, rng=rng)
    shares, pub = vtmcfe.dkeygen(pp, msk, [1, 2, 3, 4], 2)
    assert len(shares) == 5 and all(s.round == 2 for s in shares)
    assert all(len(s.to_bytes(group)) == group.scalar_len for s in shares)
    assert len(pub.to_bytes(group)) == 2 * group.element_len
    with pytest.raises(ParameterError):
        vtmcfe.dkeygen(pp, msk, [1, 2, 3], 1)
    with pytest.raises(ParameterError):
        vtmcfe.dkeygen(pp, msk, [1, 2, 3, 4], 3)


# -- share commitments -------------------------------------------------------

def test_derive_share_commitments_worked_instance(toy, toy_log):
    pp = toy_params(toy)
    pub = vtmcfe.RoundKeyCommitments(1, toy.exp(toy.h, 5), toy.exp(toy.h, 7))
    derived = vtmcfe.derive_share_commitments(pp, pub, 1)
    # exponent oracle: w2 = 4*7 - 4*5 = 8
    assert derived[0] == toy.exp(toy.h, 8)
    assert derived == tuple(toy.exp(toy.h, w) for w in (8, 4, 85))
    assert derived[0] == toy.mul(toy.exp(pub.h1, 4), toy.exp(pub.h0, -4))


def test_derived_commitments_match_shares(group, rng):
    for t, s in [(2, 2), (3, 5), (5, 8)]:
        pp, msk, _ = vtmcfe.setup(t, s, 3, group=group, rng=rng)
        shares, pub = vtmcfe.dkeygen(pp, msk, [1, -1, 2], 1)
        derived = vtmcfe.derive_share_commitments(pp, pub, 1)
        assert derived == tuple(group.exp(group.h, sh.value) for sh in shares)


def test_derive_requires_round_commitments(group, rng):
    pp, msk, _ = vtmcfe.setup(3, 4, 1, rounds=2, group=group, rng=rng)
    _, pub = vtmcfe.dkeygen(pp, msk, [1], 1)
    with pytest.raises(ProtocolError):
        vtmcfe.derive_share_commitments(pp, pub, 2)
    with pytest.raises(ProtocolError):
        vtmcfe.derive_share_commitments(pp, None, 1)


# -- encryption ---------------------------------------------------------------

def test_encrypt_properties(group, rng):
    pp, _, eks = vtmcfe.setup(2, 3, 2, group=group, rng=rng)
    label = b"round-1|coord-0"
    u0, u1 = group.hash_to_group_pair(label)
    s0, s1 = eks[0].vector
    mask = group.mul(group.exp(u0, s0), group.exp(u1, s1))
    assert vtmcfe.encrypt(pp, eks[0], 0, label).element == mask
    ct = vtmcfe.encrypt(pp, eks[0], 17, label)
    assert ct == vtmcfe.encrypt(pp, eks[0], 17, label)
    assert group.mul(ct.element, group.gexp(-17)) == mask
    assert len(ct.to_bytes(group)) == group.element_len


def test_encrypt_bound(group, rng):
    pp, _, eks = vtmcfe.setup(2, 3, 1, group=group, rng=rng, message_bound=10)
    vtmcfe.encrypt(pp, eks[0], -10, b"l")
    with pytest.raises(RangeError):
        vtmcfe.encrypt(pp, eks[0], 11, b"l")


# -- share_decrypt --------------------------------------------------------------

def test_single_client_ct0_is_ciphertext(group, rng):
    rnd = make_round(group, 2, 3, 1, [5], [1], rng)
    pd = rnd.decrypt((1, 2), rng)[0]
    assert pd.ct0 == rnd.ciphertexts[0].element


def test_zero_key_share(group, rng):
    rnd = make_round(group, 2, 3, 1, [5], [1], rng)
    zero = vtmcfe.FunctionalKeyShare(1, 0, 1)
    pd = vtmcfe.share_decrypt(rnd.pp, rnd.ciphertexts, [1], zero, (1, 2), 1, rnd.label, rng)
    assert pd.ct1 == pd.ct2 == 1
    stmt = dleq.DleqStatement((group.h, *vtmcfe.partial_bases(rnd.pp, rnd.label, 1, (1, 2))),
                              (1, 1, 1), vtmcfe.proof_context(rnd.pp, 1, rnd.label, 1, (1, 2)))
    assert dleq.verify(group, pd.proof, stmt)


def test_partial_exponents_in_toy_group(toy, toy_log):
    rng = random.Random(5)
    t, s = 3, 5
    rnd = make_round(toy, t, s, 3, [1, 2, 3], [1, 1, 1], rng)
    pp, q = rnd.pp, toy.order
    u0, u1 = (toy_log(u) for u in toy.hash_to_group_pair(rnd.label))
    subset = (1, 3, 5)
    for pd in rnd.decrypt(subset, rng):
        j = pd.index
        qj = rnd.shares[j - 1].value * pow(pp.alpha, -node(j, t), q) % q
        assert toy_log(pd.ct1) == u0 * lagrange_coeff(0, j, subset, t, q) * qj % q
        assert toy_log(pd.ct2) == u1 * lagrange_coeff(1, j, subset, t, q) * qj * pp.alpha % q


def test_toy_group_end_to_end(toy):
    rng = random.Random(11)
    rnd = make_round(toy, 3, 4, 3, [1, 2, 3], [1, 1, 1], rng)
    for subset in itertools.combinations(range(1, 5), 3):
        assert recover(rnd, subset, rng, 20) == 6


def test_share_decrypt_errors(group, rng):
    rnd = make_round(group, 3, 4, 2, [1, 2], [1, 1], rng)
    sh = rnd.shares[0]
    with pytest.raises(ParameterError):
        vtmcfe.share_decrypt(rnd.pp, rnd.ciphertexts, rnd.y, sh, (2, 3, 4), 1, rnd.label)
    with pytest.raises(ThresholdError):
        vtmcfe.share_decrypt(rnd.pp, rnd.ciphertexts, rnd.y, sh, (1, 2), 1, rnd.label)
    stale = vtmcfe.encrypt(rnd.pp, rnd.eks[1], 2, b"round-0|coord-0")
    with pytest.raises(ProtocolError):
        vtmcfe.share_decrypt(rnd.pp, [rnd.ciphertexts[0], stale], rnd.y, sh, (1, 2, 3), 1,
                             rnd.label)
    with pytest.raises(ProtocolError):
        vtmcfe.share_decrypt(rnd.pp, [rnd.ciphertexts[0]] * 2, rnd.y, sh, (1, 2, 3), 1, rnd.label)


def test_partial_decryption_roundtrip(group, rng):
    rnd = make_round(group, 3, 4, 2, [1, 2], [1, 1], rng)
    pd = rnd.decrypt((1, 2, 4), rng)[2]
    data = pd.to_bytes(group)
    assert vtmcfe.PartialDecryption.from_bytes(group, data) == pd
    assert len(data) == vtmcfe.PartialDecryption.header_len(3) + 6 * group.element_len + 2 * group.scalar_len


# -- verify and combine -------------------------------------------------------

def test_verify_honest(group, rng):
    rnd = make_round(group, 3, 5, 3, [4, -2, 9], [1, 1, 1], rng)
    subset = (2, 3, 5)
    pds = rnd.decrypt(subset, rng)
    assert vtmcfe.verify(rnd.pp, pds, subset, 1, rnd.label, rnd.published) == frozenset(subset)


def test_verify_rejects_ct1_times_g(group, rng):
    rnd = make_round(group, 3, 5, 3, [4, -2, 9], [1, 1, 1], rng)
    subset = (1, 2, 3)
    pds = rnd.decrypt(subset, rng)
    bad = pds[1]
    pds[1] = vtmcfe.PartialDecryption(bad.index, bad.subset, bad.ct0,
                                      group.mul(bad.ct1, group.g), bad.ct2, bad.proof)
    verdicts = vtmcfe.check_partials(rnd.pp, pds, subset, 1, rnd.label, rnd.published)
    assert verdicts[1] is None and verdicts[3] is None and verdicts[2] is not None
    with pytest.raises(InsufficientSharesError) as exc:
        vtmcfe.verify(rnd.pp, pds, subset, 1, rnd.label, rnd.published)
    assert exc.value.accepted == (1, 3) and 2 in exc.value.reasons


def test_verify_rejects_stale_ct0(group, rng):
    keys = vtmcfe.setup(3, 4, 2, rounds=2, group=group, rng=rng)
    prev = make_round(group, 3, 4, 2, [1, 2], [1, 1], rng, label=b"round-1|coord-0", keys=keys)
    cur = make_round(group, 3, 4, 2, [3, 4], [1, 1], rng, label=b"round-2|coord-0", k=2, keys=keys)
    subset = (1, 2, 3)
    pds = cur.decrypt(subset, rng)
    old = prev.decrypt(subset, rng)[0]
    pds[0] = vtmcfe.PartialDecryption(1, subset, old.ct0, pds[0].ct1, pds[0].ct2, pds[0].proof)
    verdicts = vtmcfe.check_partials(cur.pp, pds, subset, 2, cur.label, cur.published)
    assert verdicts == {1: "ct0-mismatch", 2: None, 3: None}


def test_verify_subset_claims(group, rng):
    rnd = make_round(group, 3, 5, 2, [1, 2], [1, 1], rng)
    pds = rnd.decrypt((1, 2, 3), rng)
    other = rnd.decrypt((1, 2, 4), rng)
    mixed = [pds[0], pds[1], other[2]]
    verdicts = vtmcfe.check_partials(rnd.pp, mixed, (1, 2, 3), 1, rnd.label, rnd.published)
    assert verdicts[4] == "not-in-subset"
    forged = vtmcfe.PartialDecryption(3, (1, 2, 4), pds[2].ct0, pds[2].ct1, pds[2].ct2, pds[2].proof)
    verdicts = vtmcfe.check_partials(rnd.pp, [pds[0], pds[1], forged], (1, 2, 3), 1, rnd.label,
                                     rnd.published)
    assert verdicts[3] == "subset-mismatch"


def test_combine_errors(group, rng):
    rnd = make_round(group, 3, 4, 2, [1, 2], [1, 1], rng)
    pds = rnd.decrypt((1, 2, 3), rng)
    with pytest.raises(ThresholdError):
        vtmcfe.combine(rnd.pp, pds[:2])
    table = DlogTable(group, group.g, 2)
    with pytest.raises(RangeError):
        vtmcfe.combine_recover(rnd.pp, pds, table)


def test_zero_plaintexts_give_identity(group, rng):
    rnd = make_round(group, 2, 3, 3, [0, 0, 0], [3, -1, 7], rng)
    pds = rnd.decrypt((1, 3), rng)
    assert vtmcfe.combine(rnd.pp, pds) == 1
    assert vtmcfe.combine_recover(rnd.pp, pds, table_for(group, group.g, 10)) == 0


def test_weighted_inner_product(group, rng):
    x, y = [3, -4, 5, 6], [2, 0, -3, 1]
    rnd = make_round(group, 2, 4, 4, x, y, rng)
    assert recover(rnd, (2, 4), rng, 100) == vtmcfe.inner_product(x, y) == -3


def test_label_splice_breaks_recovery(group, rng):
    keys = vtmcfe.setup(2, 3, 3, group=group, rng=rng)
    rnd = make_round(group, 2, 3, 3, [1, 2, 3], [1, 1, 1], rng, keys=keys)
    other = vtmcfe.encrypt(rnd.pp, rnd.eks[2], 3, b"round-1|coord-1")
    rnd.ciphertexts[2] = vtmcfe.LabeledCiphertext(3, rnd.label, other.element)
    pds = rnd.decrypt((1, 2), rng)
    with pytest.raises(RangeError):
        vtmcfe.combine_recover(rnd.pp, pds, table_for(group, group.g, 10_000))


def test_sizes_independent_of_n(group, rng):
    seen = set()
    for n in (5, 10, 50, 100):
        rnd = make_round(group, 3, 4, n, [1] * n, [1] * n, rng)
        pd = rnd.decrypt((1, 2, 3), rng)[0]
        seen.add((len(rnd.shares[0].to_bytes(group)), len(pd.to_bytes(group))))
    assert len(seen) == 1
