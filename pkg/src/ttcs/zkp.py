"""Non-interactive proof systems.

Two proof families live here:

* a Schnorr proof of knowledge of the member secret behind a join
  commitment, bound to the issuer key it was made for, and
* a one-of-many membership proof: a Pedersen commitment to the member
  secret, a Schnorr equality component tying the committed exponent to
  the comment pseudonym, and a sigma protocol showing that one of the
  offset commitments c / nym1_i opens to zero (communication grows
  logarithmically in the list size).  Fiat-Shamir makes everything
  non-interactive.

The Pedersen bases are g = H("1") and gH = H("2"), chosen so that a
genesis pseudonym nym1 = H("1")^sk is itself a commitment to sk with
zero randomness.
"""

from __future__ import annotations

from dataclasses import dataclass

from .groups import (
    ORDER,
    DecodeError,
    G1,
    rand_scalar,
    rand_scalar_any,
    scalar_from_bytes,
    scalar_to_bytes,
)
from .primitives import hash, hash_to_g1, scalar_from_digest
from .wire import Reader, WireError, pack

GK_TAG = b"TT-GK-v1"
JOIN_TAG = b"TT-JOIN-v1"
RGB_TAG = b"TT-RGB-v1"
PAD_TAG = b"TT-GK-pad"
GENESIS_BASENAME = b"1"

_VERSION = 1


class ZkpError(Exception):
    pass


class ProverNotInList(ZkpError):
    pass


@dataclass(frozen=True)
class CRS:
    """Transparent setup: every base is derived by hash-to-curve."""

    h1: G1  # base for join proofs
    g: G1  # Pedersen message base, = H("1")
    g_hat: G1  # Pedersen randomness base, = H("2")

    def to_bytes(self) -> bytes:
        return bytes([_VERSION]) + pack(
            [self.h1.to_bytes(), self.g.to_bytes(), self.g_hat.to_bytes()]
        )

    @classmethod
    def from_bytes(cls, data: bytes) -> "CRS":
        r = Reader(data)
        if r.take_u8() != _VERSION:
            raise DecodeError("unknown CRS version")
        h1 = G1.from_bytes(r.take_part())
        g = G1.from_bytes(r.take_part())
        g_hat = G1.from_bytes(r.take_part())
        r.expect_end()
        return cls(h1=h1, g=g, g_hat=g_hat)


def zk_setup(security_level: int = 128) -> CRS:
    if security_level != 128:
        raise ZkpError(f"unsupported security level {security_level}")
    return CRS(
        h1=hash_to_g1(b"tt-h1"),
        g=hash_to_g1(GENESIS_BASENAME),
        g_hat=hash_to_g1(b"2"),
    )


def pedersen_commit(crs: CRS, x: int, r: int) -> G1:
    return crs.g * x + crs.g_hat * r


# ---------------------------------------------------------------------------
# Join proof: PoK of f with F = h1^f, transcript bound to the issuer key


@dataclass(frozen=True)
class JoinProof:
    R: G1
    z: int

    def to_bytes(self) -> bytes:
        return bytes([_VERSION]) + pack([self.R.to_bytes(), scalar_to_bytes(self.z)])

    @classmethod
    def from_bytes(cls, data: bytes) -> "JoinProof":
        r = Reader(data)
        if r.take_u8() != _VERSION:
            raise DecodeError("unknown join proof version")
        R = G1.from_bytes(r.take_part())
        z = scalar_from_bytes(r.take_part())
        r.expect_end()
        return cls(R=R, z=z)


def _join_proof_challenge(crs: CRS, com_bytes: bytes, pk_bytes: bytes, R: G1) -> int:
    return scalar_from_digest(
        hash([JOIN_TAG, crs.to_bytes(), pk_bytes, com_bytes, R.to_bytes()])
    )


def prove_join(crs: CRS, com, pk_i, sk: int) -> JoinProof:
    r = rand_scalar_any()
    R = crs.h1 * r
    c = _join_proof_challenge(crs, com.to_bytes(), pk_i.to_bytes(), R)
    return JoinProof(R=R, z=(r + c * sk) % ORDER)


def verify_join(crs: CRS, com, pk_i, proof: JoinProof) -> bool:
    try:
        c = _join_proof_challenge(crs, com.to_bytes(), pk_i.to_bytes(), proof.R)
        return crs.h1 * proof.z == proof.R + com.F * c
    except (DecodeError, WireError, AttributeError, TypeError):
        return False


# ---------------------------------------------------------------------------
# One-of-many proof (sigma protocol, Fiat-Shamir)


@dataclass(frozen=True)
class OneOfManyProof:
    cl: tuple  # per-round bit commitments
    ca: tuple
    cb: tuple
    cd: tuple  # degree-coefficient commitments
    f: tuple  # per-round responses
    za: tuple
    zb: tuple
    zd: int
    challenge: int

    @property
    def rounds(self) -> int:
        return len(self.cl)

    def group_elements(self):
        return list(self.cl) + list(self.ca) + list(self.cb) + list(self.cd)

    def to_bytes(self) -> bytes:
        m = len(self.cl)
        parts = []
        for seq in (self.cl, self.ca, self.cb, self.cd):
            parts.extend(p.to_bytes() for p in seq)
        for seq in (self.f, self.za, self.zb):
            parts.extend(scalar_to_bytes(s) for s in seq)
        parts.append(scalar_to_bytes(self.zd))
        parts.append(scalar_to_bytes(self.challenge))
        return bytes([_VERSION, m]) + pack(parts)

    @classmethod
    def from_bytes(cls, data: bytes) -> "OneOfManyProof":
        r = Reader(data)
        if r.take_u8() != _VERSION:
            raise DecodeError("unknown proof version")
        m = r.take_u8()
        if not 1 <= m <= 32:
            raise DecodeError("implausible round count")
        groups = [
            tuple(G1.from_bytes(r.take_part()) for _ in range(m)) for _ in range(4)
        ]
        scalars = [
            tuple(scalar_from_bytes(r.take_part()) for _ in range(m)) for _ in range(3)
        ]
        zd = scalar_from_bytes(r.take_part())
        challenge = scalar_from_bytes(r.take_part())
        r.expect_end()
        return cls(
            cl=groups[0],
            ca=groups[1],
            cb=groups[2],
            cd=groups[3],
            f=scalars[0],
            za=scalars[1],
            zb=scalars[2],
            zd=zd,
            challenge=challenge,
        )


def _bit(i: int, k: int) -> int:
    return (i >> k) & 1


def _poly_mul(a, b):
    out = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if not ai:
            continue
        for j, bj in enumerate(b):
            out[i + j] = (out[i + j] + ai * bj) % ORDER
    return out


def _coeff_polys(n: int, m: int, bits, a):
    """p_i(x) = prod_k f_{k, bit_k(i)}(x) for every i, as coefficient lists."""
    polys = []
    for i in range(n):
        poly = [1]
        for k in range(m):
            if _bit(i, k):
                factor = [a[k], bits[k]]  # delta_k * x + a_k
            else:
                factor = [-a[k] % ORDER, 1 - bits[k]]  # (1-delta_k) x - a_k
            poly = _poly_mul(poly, factor)
        poly += [0] * (m + 1 - len(poly))
        polys.append(poly)
    return polys


def _gk_challenge(crs: CRS, statement: bytes, commitments, cl, ca, cb, cd) -> int:
    parts = [GK_TAG, crs.to_bytes(), statement]
    parts.extend(c.to_bytes() for c in commitments)
    for seq in (cl, ca, cb, cd):
        parts.extend(p.to_bytes() for p in seq)
    return scalar_from_digest(hash(parts))


def _pad_commitments(crs: CRS, commitments, statement: bytes):
    """Pad the list to a power of two with commitments to derived
    nonzero values, recomputable by any verifier."""
    cs = list(commitments)
    n = len(cs)
    if n == 0:
        raise ZkpError("empty commitment list")
    m = max(1, (n - 1).bit_length())
    total = 1 << m
    idx = n
    while len(cs) < total:
        ctr = 0
        while True:
            d = hash([PAD_TAG, statement, idx.to_bytes(4, "big"), ctr.to_bytes(4, "big")])
            x = scalar_from_digest(d)
            if x:
                break
            ctr += 1
        rr = scalar_from_digest(hash([PAD_TAG, b"r", statement, idx.to_bytes(4, "big")]))
        cs.append(pedersen_commit(crs, x, rr))
        idx += 1
    return cs, m


def prove_one_of_many(
    crs: CRS, commitments, index: int, opening: int, statement: bytes = b""
) -> OneOfManyProof:
    """Prove that commitments[index] opens to 0 with randomness `opening`."""
    cs, m = _pad_commitments(crs, commitments, statement)
    n = 1 << m
    if not 0 <= index < len(commitments):
        raise ZkpError("index out of range")
    if cs[index] != crs.g_hat * opening:
        raise ZkpError("commitment does not open to zero under this randomness")

    bits = [_bit(index, k) for k in range(m)]
    rk = [rand_scalar_any() for _ in range(m)]
    ak = [rand_scalar_any() for _ in range(m)]
    sk_ = [rand_scalar_any() for _ in range(m)]
    tk = [rand_scalar_any() for _ in range(m)]
    rho = [rand_scalar_any() for _ in range(m)]

    cl = tuple(pedersen_commit(crs, bits[k], rk[k]) for k in range(m))
    ca = tuple(pedersen_commit(crs, ak[k], sk_[k]) for k in range(m))
    cb = tuple(pedersen_commit(crs, bits[k] * ak[k], tk[k]) for k in range(m))

    polys = _coeff_polys(n, m, bits, ak)
    cd = []
    for d in range(m):
        point = G1.msm(cs, [polys[i][d] for i in range(n)])
        cd.append(point + crs.g_hat * rho[d])
    cd = tuple(cd)

    x = _gk_challenge(crs, statement, cs, cl, ca, cb, cd)

    f = tuple((bits[k] * x + ak[k]) % ORDER for k in range(m))
    za = tuple((rk[k] * x + sk_[k]) % ORDER for k in range(m))
    zb = tuple((rk[k] * (x - f[k]) + tk[k]) % ORDER for k in range(m))
    zd = opening * pow(x, m, ORDER) % ORDER
    for d in range(m):
        zd = (zd - rho[d] * pow(x, d, ORDER)) % ORDER

    return OneOfManyProof(cl=cl, ca=ca, cb=cb, cd=cd, f=f, za=za, zb=zb, zd=zd, challenge=x)


def _verify_rounds(crs: CRS, cs, proof: OneOfManyProof, x: int) -> bool:
    m = proof.rounds
    n = len(cs)
    if n != 1 << m:
        return False
    for k in range(m):
        # cl^x * ca == Com(f_k; za_k)
        if proof.cl[k] * x + proof.ca[k] != pedersen_commit(crs, proof.f[k], proof.za[k]):
            return False
        # cl^(x-f_k) * cb == Com(0; zb_k)
        if proof.cl[k] * ((x - proof.f[k]) % ORDER) + proof.cb[k] != crs.g_hat * proof.zb[k]:
            return False
    exps = []
    for i in range(n):
        e = 1
        for k in range(m):
            e = e * (proof.f[k] if _bit(i, k) else (x - proof.f[k])) % ORDER
        exps.append(e)
    lhs = G1.msm(cs, exps)
    for d in range(m):
        lhs = lhs - proof.cd[d] * pow(x, d, ORDER)
    return lhs == crs.g_hat * proof.zd


def verify_one_of_many(
    crs: CRS, commitments, proof: OneOfManyProof, statement: bytes = b""
) -> bool:
    try:
        cs, m = _pad_commitments(crs, commitments, statement)
        if proof.rounds != m:
            return False
        x = _gk_challenge(crs, statement, cs, proof.cl, proof.ca, proof.cb, proof.cd)
        if x != proof.challenge:
            return False
        return _verify_rounds(crs, cs, proof, x)
    except (DecodeError, WireError, ZkpError, AttributeError, TypeError):
        return False


def simulate_one_of_many(crs: CRS, commitments, x: int, statement: bytes = b""):
    """Zero-knowledge simulator: a transcript for challenge x without a
    witness.  Returns a proof accepted by the round equations for x."""
    cs, m = _pad_commitments(crs, commitments, statement)
    n = 1 << m
    f = [rand_scalar_any() for _ in range(m)]
    za = [rand_scalar_any() for _ in range(m)]
    zb = [rand_scalar_any() for _ in range(m)]
    zd = rand_scalar_any()
    cl = [pedersen_commit(crs, 0, rand_scalar_any()) for _ in range(m)]
    xinv = pow(x, -1, ORDER)
    ca = [pedersen_commit(crs, f[k], za[k]) - cl[k] * x for k in range(m)]
    cb = [crs.g_hat * zb[k] - cl[k] * ((x - f[k]) % ORDER) for k in range(m)]
    cd = [G1.identity()] * m
    for d in range(1, m):
        cd[d] = pedersen_commit(crs, 0, rand_scalar_any())
    exps = []
    for i in range(n):
        e = 1
        for k in range(m):
            e = e * (f[k] if _bit(i, k) else (x - f[k])) % ORDER
        exps.append(e)
    acc = G1.msm(cs, exps)
    for d in range(1, m):
        acc = acc - cd[d] * pow(x, d, ORDER)
    cd[0] = acc - crs.g_hat * zd
    _ = xinv
    return OneOfManyProof(
        cl=tuple(cl),
        ca=tuple(ca),
        cb=tuple(cb),
        cd=tuple(cd),
        f=tuple(f),
        za=tuple(za),
        zb=tuple(zb),
        zd=zd,
        challenge=x,
    )


def verify_rounds_only(crs: CRS, commitments, proof: OneOfManyProof, x: int,
                       statement: bytes = b"") -> bool:
    """Check only the sigma-protocol equations for a given challenge
    (used to validate simulator output; no Fiat-Shamir binding)."""
    cs, _ = _pad_commitments(crs, commitments, statement)
    return _verify_rounds(crs, cs, proof, x)


# ---------------------------------------------------------------------------
# Genesis membership proof


@dataclass(frozen=True)
class MembershipProof:
    c: G1  # Pedersen commitment to the member secret
    eq_a1: G1  # equality component: commitment opening announcement
    eq_a2: G1  # equality component: pseudonym announcement
    eq_z1: int
    eq_z2: int
    gk: OneOfManyProof

    def to_bytes(self) -> bytes:
        return bytes([_VERSION]) + pack(
            [
                self.c.to_bytes(),
                self.eq_a1.to_bytes(),
                self.eq_a2.to_bytes(),
                scalar_to_bytes(self.eq_z1),
                scalar_to_bytes(self.eq_z2),
                self.gk.to_bytes(),
            ]
        )

    @classmethod
    def from_bytes(cls, data: bytes) -> "MembershipProof":
        r = Reader(data)
        if r.take_u8() != _VERSION:
            raise DecodeError("unknown membership proof version")
        c = G1.from_bytes(r.take_part())
        a1 = G1.from_bytes(r.take_part())
        a2 = G1.from_bytes(r.take_part())
        z1 = scalar_from_bytes(r.take_part())
        z2 = scalar_from_bytes(r.take_part())
        gk = OneOfManyProof.from_bytes(r.take_part())
        r.expect_end()
        return cls(c=c, eq_a1=a1, eq_a2=a2, eq_z1=z1, eq_z2=z2, gk=gk)


def _membership_statement(nym: G1, dom, nym1_list) -> bytes:
    if isinstance(dom, str):
        dom = dom.encode()
    parts = [RGB_TAG, nym.to_bytes(), dom]
    parts.extend(p.to_bytes() for p in nym1_list)
    return hash(parts)


def _eq_challenge(crs, statement, c, a1, a2) -> int:
    return scalar_from_digest(
        hash([RGB_TAG, b"eq", crs.to_bytes(), statement,
              c.to_bytes(), a1.to_bytes(), a2.to_bytes()])
    )


def prove_membership(crs: CRS, nym: G1, dom, nym1_list, sk: int) -> MembershipProof:
    """Prove nym = H(dom)^sk and H("1")^sk is one of nym1_list."""
    sk %= ORDER
    target = crs.g * sk
    index = None
    for i, candidate in enumerate(nym1_list):
        if candidate == target:
            index = i
            break
    if index is None:
        raise ProverNotInList("no genesis pseudonym matches this secret key")

    statement = _membership_statement(nym, dom, nym1_list)
    r = rand_scalar()
    c = pedersen_commit(crs, sk, r)

    # Equality component: c opens to (sk, r) and nym = H(dom)^sk.
    j_dom = hash_to_g1(dom)
    r1 = rand_scalar_any()
    r2 = rand_scalar_any()
    a1 = pedersen_commit(crs, r1, r2)
    a2 = j_dom * r1
    e = _eq_challenge(crs, statement, c, a1, a2)
    z1 = (r1 + e * sk) % ORDER
    z2 = (r2 + e * r) % ORDER

    offsets = [c - p for p in nym1_list]
    gk = prove_one_of_many(crs, offsets, index, r, statement=statement + c.to_bytes())
    return MembershipProof(c=c, eq_a1=a1, eq_a2=a2, eq_z1=z1, eq_z2=z2, gk=gk)


def verify_membership(crs: CRS, nym: G1, dom, nym1_list, proof: MembershipProof) -> bool:
    try:
        statement = _membership_statement(nym, dom, nym1_list)
        j_dom = hash_to_g1(dom)
        e = _eq_challenge(crs, statement, proof.c, proof.eq_a1, proof.eq_a2)
        if pedersen_commit(crs, proof.eq_z1, proof.eq_z2) != proof.eq_a1 + proof.c * e:
            return False
        if j_dom * proof.eq_z1 != proof.eq_a2 + nym * e:
            return False
        offsets = [proof.c - p for p in nym1_list]
        return verify_one_of_many(
            crs, offsets, proof.gk, statement=statement + proof.c.to_bytes()
        )
    except (DecodeError, WireError, ZkpError, AttributeError, TypeError, ValueError):
        return False
