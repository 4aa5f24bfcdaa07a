# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled BN254 backend: Montgomery limb arithmetic for the hot kernels.

Mirrors `ttcs.curve.pure` operation for operation; the Python-facing
functions take and return the same int/tuple representations, so the
two backends are interchangeable (and parity-tested against each other).
"""

from libc.stdint cimport uint64_t
from cpython.mem cimport PyMem_Malloc, PyMem_Free

cdef extern from *:
    ctypedef unsigned long long u128 "unsigned __int128"

from .params import ATE_NAF as _ATE_NAF_PY
from .params import BN_U, P as P_INT, R as R_INT
from . import pure as _pure

# ---------------------------------------------------------------------------
# Fp: 4x64 little-endian limbs, Montgomery form (R = 2^256)

cdef uint64_t PL0 = 0x3c208c16d87cfd47ULL
cdef uint64_t PL1 = 0x97816a916871ca8dULL
cdef uint64_t PL2 = 0xb85045b68181585dULL
cdef uint64_t PL3 = 0x30644e72e131a029ULL
cdef uint64_t NP0 = 0x87d20782e4866389ULL

ctypedef struct fp:
    uint64_t v[4]

cdef fp FP_ZERO
FP_ZERO.v[0] = 0; FP_ZERO.v[1] = 0; FP_ZERO.v[2] = 0; FP_ZERO.v[3] = 0

cdef fp FP_R1  # 1 in Montgomery form (2^256 mod p)
FP_R1.v[0] = 0xd35d438dc58f0d9dULL
FP_R1.v[1] = 0x0a78eb28f5c70b3dULL
FP_R1.v[2] = 0x666ea36f7879462cULL
FP_R1.v[3] = 0x0e0a77c19a07df2fULL

cdef fp FP_R2  # 2^512 mod p
FP_R2.v[0] = 0xf32cfc5b538afa89ULL
FP_R2.v[1] = 0xb5e71911d44501fbULL
FP_R2.v[2] = 0x47ab1eff0a417ff6ULL
FP_R2.v[3] = 0x06d89f71cab8351fULL

cdef uint64_t PM2[4]  # p - 2, exponent for Fermat inversion
PM2[0] = 0x3c208c16d87cfd45ULL
PM2[1] = 0x97816a916871ca8dULL
PM2[2] = 0xb85045b68181585dULL
PM2[3] = 0x30644e72e131a029ULL


cdef inline bint fp_is_zero(const fp* a):
    return a.v[0] == 0 and a.v[1] == 0 and a.v[2] == 0 and a.v[3] == 0


cdef inline bint fp_eq(const fp* a, const fp* b):
    return (a.v[0] == b.v[0] and a.v[1] == b.v[1]
            and a.v[2] == b.v[2] and a.v[3] == b.v[3])


cdef inline bint _geq_p(uint64_t t0, uint64_t t1, uint64_t t2, uint64_t t3):
    if t3 != PL3:
        return t3 > PL3
    if t2 != PL2:
        return t2 > PL2
    if t1 != PL1:
        return t1 > PL1
    return t0 >= PL0


cdef inline void _reduce_once(fp* o, uint64_t t0, uint64_t t1, uint64_t t2, uint64_t t3):
    """o = (t3..t0) - P, assuming (t3..t0) >= P."""
    cdef uint64_t brw
    o.v[0] = t0 - PL0
    brw = 1 if t0 < PL0 else 0
    o.v[1] = t1 - PL1 - brw
    brw = 1 if (<u128>t1 < <u128>PL1 + brw) else 0
    o.v[2] = t2 - PL2 - brw
    brw = 1 if (<u128>t2 < <u128>PL2 + brw) else 0
    o.v[3] = t3 - PL3 - brw


cdef inline void fp_add(fp* o, const fp* a, const fp* b):
    cdef u128 s
    cdef uint64_t t0, t1, t2, t3, c
    s = <u128>a.v[0] + b.v[0]
    t0 = <uint64_t>s; c = <uint64_t>(s >> 64)
    s = <u128>a.v[1] + b.v[1] + c
    t1 = <uint64_t>s; c = <uint64_t>(s >> 64)
    s = <u128>a.v[2] + b.v[2] + c
    t2 = <uint64_t>s; c = <uint64_t>(s >> 64)
    s = <u128>a.v[3] + b.v[3] + c
    t3 = <uint64_t>s
    if _geq_p(t0, t1, t2, t3):
        _reduce_once(o, t0, t1, t2, t3)
    else:
        o.v[0] = t0; o.v[1] = t1; o.v[2] = t2; o.v[3] = t3


cdef inline void fp_sub(fp* o, const fp* a, const fp* b):
    cdef uint64_t t0, t1, t2, t3, brw
    cdef u128 s
    t0 = a.v[0] - b.v[0]
    brw = 1 if a.v[0] < b.v[0] else 0
    t1 = a.v[1] - b.v[1] - brw
    brw = 1 if (<u128>a.v[1] < <u128>b.v[1] + brw) else 0
    t2 = a.v[2] - b.v[2] - brw
    brw = 1 if (<u128>a.v[2] < <u128>b.v[2] + brw) else 0
    t3 = a.v[3] - b.v[3] - brw
    brw = 1 if (<u128>a.v[3] < <u128>b.v[3] + brw) else 0
    if brw:
        s = <u128>t0 + PL0
        t0 = <uint64_t>s
        s = <u128>t1 + PL1 + <uint64_t>(s >> 64)
        t1 = <uint64_t>s
        s = <u128>t2 + PL2 + <uint64_t>(s >> 64)
        t2 = <uint64_t>s
        t3 = t3 + PL3 + <uint64_t>(s >> 64)
    o.v[0] = t0; o.v[1] = t1; o.v[2] = t2; o.v[3] = t3


cdef inline void fp_neg(fp* o, const fp* a):
    if fp_is_zero(a):
        o[0] = FP_ZERO
    else:
        fp_sub(o, &FP_ZERO, a)


cdef void fp_mul(fp* out, const fp* a, const fp* b):
    """Montgomery CIOS multiplication."""
    cdef uint64_t t0 = 0, t1 = 0, t2 = 0, t3 = 0, t4 = 0, t5 = 0
    cdef uint64_t c, m, ai
    cdef u128 s
    cdef int i
    for i in range(4):
        ai = a.v[i]
        s = <u128>t0 + <u128>ai * b.v[0]
        t0 = <uint64_t>s; c = <uint64_t>(s >> 64)
        s = <u128>t1 + <u128>ai * b.v[1] + c
        t1 = <uint64_t>s; c = <uint64_t>(s >> 64)
        s = <u128>t2 + <u128>ai * b.v[2] + c
        t2 = <uint64_t>s; c = <uint64_t>(s >> 64)
        s = <u128>t3 + <u128>ai * b.v[3] + c
        t3 = <uint64_t>s; c = <uint64_t>(s >> 64)
        s = <u128>t4 + c
        t4 = <uint64_t>s; t5 = t5 + <uint64_t>(s >> 64)

        m = t0 * NP0
        s = <u128>t0 + <u128>m * PL0
        c = <uint64_t>(s >> 64)
        s = <u128>t1 + <u128>m * PL1 + c
        t0 = <uint64_t>s; c = <uint64_t>(s >> 64)
        s = <u128>t2 + <u128>m * PL2 + c
        t1 = <uint64_t>s; c = <uint64_t>(s >> 64)
        s = <u128>t3 + <u128>m * PL3 + c
        t2 = <uint64_t>s; c = <uint64_t>(s >> 64)
        s = <u128>t4 + c
        t3 = <uint64_t>s; c = <uint64_t>(s >> 64)
        t4 = t5 + c
        t5 = 0
    if t4 or _geq_p(t0, t1, t2, t3):
        _reduce_once(out, t0, t1, t2, t3)
    else:
        out.v[0] = t0; out.v[1] = t1; out.v[2] = t2; out.v[3] = t3


cdef inline void fp_sqr(fp* out, const fp* a):
    fp_mul(out, a, a)


cdef inline void fp_dbl(fp* o, const fp* a):
    fp_add(o, a, a)


cdef void fp_inv(fp* out, const fp* a):
    """Fermat inversion a^(p-2); maps 0 to 0."""
    cdef fp acc
    cdef fp base = a[0]
    cdef int w, bit
    cdef uint64_t e
    cdef bint started = False
    acc = FP_R1
    for w in range(3, -1, -1):
        e = PM2[w]
        for bit in range(63, -1, -1):
            if started:
                fp_sqr(&acc, &acc)
            if (e >> bit) & 1:
                if started:
                    fp_mul(&acc, &acc, &base)
                else:
                    acc = base
                    started = True
    out[0] = acc


cdef fp int_to_fp(object x):
    cdef fp raw
    cdef fp o
    cdef bytes b = (<object>(int(x) % P_INT)).to_bytes(32, "little")
    cdef const unsigned char* d = b
    cdef int i, j
    for i in range(4):
        raw.v[i] = 0
        for j in range(8):
            raw.v[i] |= (<uint64_t>d[8 * i + j]) << (8 * j)
    fp_mul(&o, &raw, &FP_R2)
    return o


cdef object fp_to_int(const fp* a):
    cdef fp one
    cdef fp t
    one.v[0] = 1; one.v[1] = 0; one.v[2] = 0; one.v[3] = 0
    fp_mul(&t, a, &one)
    return (int(t.v[0]) | (int(t.v[1]) << 64)
            | (int(t.v[2]) << 128) | (int(t.v[3]) << 192))


# ---------------------------------------------------------------------------
# Fp2

ctypedef struct fp2:
    fp a
    fp b

cdef fp2 F2_ZERO_C
F2_ZERO_C.a = FP_ZERO
F2_ZERO_C.b = FP_ZERO

cdef fp2 F2_ONE_C
F2_ONE_C.a = FP_R1
F2_ONE_C.b = FP_ZERO


cdef inline bint f2_is_zero(const fp2* x):
    return fp_is_zero(&x.a) and fp_is_zero(&x.b)


cdef inline bint f2_eq(const fp2* x, const fp2* y):
    return fp_eq(&x.a, &y.a) and fp_eq(&x.b, &y.b)


cdef inline void f2_add(fp2* o, const fp2* x, const fp2* y):
    fp_add(&o.a, &x.a, &y.a)
    fp_add(&o.b, &x.b, &y.b)


cdef inline void f2_sub(fp2* o, const fp2* x, const fp2* y):
    fp_sub(&o.a, &x.a, &y.a)
    fp_sub(&o.b, &x.b, &y.b)


cdef inline void f2_neg(fp2* o, const fp2* x):
    fp_neg(&o.a, &x.a)
    fp_neg(&o.b, &x.b)


cdef inline void f2_conj(fp2* o, const fp2* x):
    o.a = x.a
    fp_neg(&o.b, &x.b)


cdef void f2_mul(fp2* o, const fp2* x, const fp2* y):
    cdef fp t0, t1, sx, sy, m
    fp_mul(&t0, &x.a, &y.a)
    fp_mul(&t1, &x.b, &y.b)
    fp_add(&sx, &x.a, &x.b)
    fp_add(&sy, &y.a, &y.b)
    fp_mul(&m, &sx, &sy)
    fp_sub(&m, &m, &t0)
    fp_sub(&m, &m, &t1)
    fp_sub(&o.a, &t0, &t1)
    o.b = m


cdef void f2_sqr(fp2* o, const fp2* x):
    cdef fp s, d, m
    fp_add(&s, &x.a, &x.b)
    fp_sub(&d, &x.a, &x.b)
    fp_mul(&m, &x.a, &x.b)
    fp_mul(&o.a, &s, &d)
    fp_dbl(&o.b, &m)


cdef inline void f2_mul_xi(fp2* o, const fp2* x):
    # (9 + u)(a + bu) = (9a - b) + (9b + a)u
    cdef fp a9, b9, t
    fp_dbl(&a9, &x.a); fp_dbl(&a9, &a9); fp_dbl(&a9, &a9)
    fp_add(&a9, &a9, &x.a)
    fp_dbl(&b9, &x.b); fp_dbl(&b9, &b9); fp_dbl(&b9, &b9)
    fp_add(&b9, &b9, &x.b)
    fp_sub(&t, &a9, &x.b)
    fp_add(&o.b, &b9, &x.a)
    o.a = t


cdef void f2_inv(fp2* o, const fp2* x):
    cdef fp n, t, d
    fp_sqr(&n, &x.a)
    fp_sqr(&t, &x.b)
    fp_add(&n, &n, &t)
    fp_inv(&d, &n)
    fp_mul(&o.a, &x.a, &d)
    fp_mul(&t, &x.b, &d)
    fp_neg(&o.b, &t)


cdef inline void f2_triple(fp2* o, const fp2* x):
    cdef fp2 t
    f2_add(&t, x, x)
    f2_add(o, &t, x)


cdef inline void f2_mul_fp(fp2* o, const fp2* x, const fp* s):
    fp_mul(&o.a, &x.a, s)
    fp_mul(&o.b, &x.b, s)


# ---------------------------------------------------------------------------
# Fp12 in the w-basis (fp2[6], w^6 = xi)

ctypedef struct fp12:
    fp2 c[6]

cdef fp12 F12_ONE_C
F12_ONE_C.c[0] = F2_ONE_C
F12_ONE_C.c[1] = F2_ZERO_C
F12_ONE_C.c[2] = F2_ZERO_C
F12_ONE_C.c[3] = F2_ZERO_C
F12_ONE_C.c[4] = F2_ZERO_C
F12_ONE_C.c[5] = F2_ZERO_C


cdef void f12_mul(fp12* o, const fp12* x, const fp12* y):
    cdef fp2 acc[6]
    cdef fp2 t, tx
    cdef int i, j, k
    for i in range(6):
        acc[i] = F2_ZERO_C
    for i in range(6):
        if f2_is_zero(&x.c[i]):
            continue
        for j in range(6):
            if f2_is_zero(&y.c[j]):
                continue
            f2_mul(&t, &x.c[i], &y.c[j])
            k = i + j
            if k >= 6:
                f2_mul_xi(&tx, &t)
                f2_add(&acc[k - 6], &acc[k - 6], &tx)
            else:
                f2_add(&acc[k], &acc[k], &t)
    for i in range(6):
        o.c[i] = acc[i]


cdef void f12_sqr(fp12* o, const fp12* x):
    cdef fp2 acc[6]
    cdef fp2 t, tx
    cdef int i, j, k
    for i in range(6):
        acc[i] = F2_ZERO_C
    for i in range(6):
        if f2_is_zero(&x.c[i]):
            continue
        f2_sqr(&t, &x.c[i])
        k = 2 * i
        if k >= 6:
            f2_mul_xi(&tx, &t)
            f2_add(&acc[k - 6], &acc[k - 6], &tx)
        else:
            f2_add(&acc[k], &acc[k], &t)
        for j in range(i + 1, 6):
            if f2_is_zero(&x.c[j]):
                continue
            f2_mul(&t, &x.c[i], &x.c[j])
            f2_add(&t, &t, &t)
            k = i + j
            if k >= 6:
                f2_mul_xi(&tx, &t)
                f2_add(&acc[k - 6], &acc[k - 6], &tx)
            else:
                f2_add(&acc[k], &acc[k], &t)
    for i in range(6):
        o.c[i] = acc[i]


cdef void f12_conj(fp12* o, const fp12* x):
    o.c[0] = x.c[0]
    f2_neg(&o.c[1], &x.c[1])
    o.c[2] = x.c[2]
    f2_neg(&o.c[3], &x.c[3])
    o.c[4] = x.c[4]
    f2_neg(&o.c[5], &x.c[5])


ctypedef struct fp6:
    fp2 c[3]


cdef void f6_mul(fp6* o, const fp6* x, const fp6* y):
    cdef fp2 t00, t11, t22, t, s, c0, c1, c2
    f2_mul(&t00, &x.c[0], &y.c[0])
    f2_mul(&t11, &x.c[1], &y.c[1])
    f2_mul(&t22, &x.c[2], &y.c[2])
    f2_mul(&t, &x.c[1], &y.c[2])
    f2_mul(&s, &x.c[2], &y.c[1])
    f2_add(&t, &t, &s)
    f2_mul_xi(&t, &t)
    f2_add(&c0, &t00, &t)
    f2_mul(&t, &x.c[0], &y.c[1])
    f2_mul(&s, &x.c[1], &y.c[0])
    f2_add(&t, &t, &s)
    f2_mul_xi(&s, &t22)
    f2_add(&c1, &t, &s)
    f2_mul(&t, &x.c[0], &y.c[2])
    f2_mul(&s, &x.c[2], &y.c[0])
    f2_add(&t, &t, &s)
    f2_add(&c2, &t, &t11)
    o.c[0] = c0; o.c[1] = c1; o.c[2] = c2


cdef void f6_inv(fp6* o, const fp6* x):
    cdef fp2 t0, t1, t2, den, d, s, t
    f2_sqr(&t0, &x.c[0])
    f2_mul(&t, &x.c[1], &x.c[2])
    f2_mul_xi(&t, &t)
    f2_sub(&t0, &t0, &t)
    f2_sqr(&t1, &x.c[2])
    f2_mul_xi(&t1, &t1)
    f2_mul(&t, &x.c[0], &x.c[1])
    f2_sub(&t1, &t1, &t)
    f2_sqr(&t2, &x.c[1])
    f2_mul(&t, &x.c[0], &x.c[2])
    f2_sub(&t2, &t2, &t)
    f2_mul(&den, &x.c[0], &t0)
    f2_mul(&s, &x.c[2], &t1)
    f2_mul(&t, &x.c[1], &t2)
    f2_add(&s, &s, &t)
    f2_mul_xi(&s, &s)
    f2_add(&den, &den, &s)
    f2_inv(&d, &den)
    f2_mul(&o.c[0], &t0, &d)
    f2_mul(&o.c[1], &t1, &d)
    f2_mul(&o.c[2], &t2, &d)


cdef void f12_inv(fp12* o, const fp12* x):
    cdef fp6 A, B, A2, B2, den, dinv, ev, od
    cdef fp2 t
    A.c[0] = x.c[0]; A.c[1] = x.c[2]; A.c[2] = x.c[4]
    B.c[0] = x.c[1]; B.c[1] = x.c[3]; B.c[2] = x.c[5]
    f6_mul(&A2, &A, &A)
    f6_mul(&B2, &B, &B)
    f2_mul_xi(&t, &B2.c[2])
    f2_sub(&den.c[0], &A2.c[0], &t)
    f2_sub(&den.c[1], &A2.c[1], &B2.c[0])
    f2_sub(&den.c[2], &A2.c[2], &B2.c[1])
    f6_inv(&dinv, &den)
    f6_mul(&ev, &A, &dinv)
    f6_mul(&od, &B, &dinv)
    o.c[0] = ev.c[0]; o.c[2] = ev.c[1]; o.c[4] = ev.c[2]
    f2_neg(&o.c[1], &od.c[0])
    f2_neg(&o.c[3], &od.c[1])
    f2_neg(&o.c[5], &od.c[2])


# Frobenius constants, converted once from the pure backend at import.

cdef fp2 FROB1_C[6]
cdef fp2 FROB2_C[6]
cdef fp2 FROB3_C[6]
cdef fp2 TWFX, TWFY, TWF2X, TWF2Y


cdef fp2 _f2_from_tuple(object t):
    cdef fp2 o
    o.a = int_to_fp(t[0])
    o.b = int_to_fp(t[1])
    return o


cdef int _k
for _k in range(6):
    FROB1_C[_k] = _f2_from_tuple(_pure.FROB1[_k])
    FROB2_C[_k] = _f2_from_tuple(_pure.FROB2[_k])
    FROB3_C[_k] = _f2_from_tuple(_pure.FROB3[_k])
TWFX = _f2_from_tuple(_pure.TW_FROB_X)
TWFY = _f2_from_tuple(_pure.TW_FROB_Y)
TWF2X = _f2_from_tuple(_pure.TW_FROB2_X)
TWF2Y = _f2_from_tuple(_pure.TW_FROB2_Y)


cdef void f12_frob(fp12* o, const fp12* x):
    cdef fp2 t
    cdef int k
    for k in range(6):
        f2_conj(&t, &x.c[k])
        f2_mul(&o.c[k], &t, &FROB1_C[k])


cdef void f12_frob2(fp12* o, const fp12* x):
    cdef int k
    for k in range(6):
        f2_mul(&o.c[k], &x.c[k], &FROB2_C[k])


cdef void f12_frob3(fp12* o, const fp12* x):
    cdef fp2 t
    cdef int k
    for k in range(6):
        f2_conj(&t, &x.c[k])
        f2_mul(&o.c[k], &t, &FROB3_C[k])


cdef void f12_pow_u64(fp12* o, const fp12* x, uint64_t e):
    cdef fp12 acc
    cdef int bit
    cdef bint started = False
    acc = F12_ONE_C
    for bit in range(63, -1, -1):
        if started:
            f12_sqr(&acc, &acc)
        if (e >> bit) & 1:
            if started:
                f12_mul(&acc, &acc, x)
            else:
                acc = x[0]
                started = True
    o[0] = acc


# ---------------------------------------------------------------------------
# G1 Jacobian

ctypedef struct g1j:
    fp x
    fp y
    fp z


cdef inline void g1j_set_inf(g1j* o):
    o.x = FP_R1
    o.y = FP_R1
    o.z = FP_ZERO


cdef void g1j_double(g1j* o, const g1j* pt):
    cdef fp a, b, c, d, e, f, t, x3, y3, z3
    if fp_is_zero(&pt.z) or fp_is_zero(&pt.y):
        g1j_set_inf(o)
        return
    fp_sqr(&a, &pt.x)
    fp_sqr(&b, &pt.y)
    fp_sqr(&c, &b)
    fp_add(&d, &pt.x, &b)
    fp_sqr(&d, &d)
    fp_sub(&d, &d, &a)
    fp_sub(&d, &d, &c)
    fp_dbl(&d, &d)
    fp_dbl(&e, &a)
    fp_add(&e, &e, &a)
    fp_sqr(&f, &e)
    fp_dbl(&t, &d)
    fp_sub(&x3, &f, &t)
    fp_sub(&t, &d, &x3)
    fp_mul(&y3, &e, &t)
    fp_dbl(&t, &c); fp_dbl(&t, &t); fp_dbl(&t, &t)
    fp_sub(&y3, &y3, &t)
    fp_mul(&z3, &pt.y, &pt.z)
    fp_dbl(&z3, &z3)
    o.x = x3; o.y = y3; o.z = z3


cdef void g1j_add(g1j* o, const g1j* p1, const g1j* p2):
    cdef fp z1s, z2s, u1, u2, s1, s2, h, r, h2, h3, u1h2, t, x3, y3, z3
    if fp_is_zero(&p1.z):
        o[0] = p2[0]
        return
    if fp_is_zero(&p2.z):
        o[0] = p1[0]
        return
    fp_sqr(&z1s, &p1.z)
    fp_sqr(&z2s, &p2.z)
    fp_mul(&u1, &p1.x, &z2s)
    fp_mul(&u2, &p2.x, &z1s)
    fp_mul(&s1, &p1.y, &z2s)
    fp_mul(&s1, &s1, &p2.z)
    fp_mul(&s2, &p2.y, &z1s)
    fp_mul(&s2, &s2, &p1.z)
    if fp_eq(&u1, &u2):
        if not fp_eq(&s1, &s2):
            g1j_set_inf(o)
            return
        g1j_double(o, p1)
        return
    fp_sub(&h, &u2, &u1)
    fp_sub(&r, &s2, &s1)
    fp_sqr(&h2, &h)
    fp_mul(&h3, &h, &h2)
    fp_mul(&u1h2, &u1, &h2)
    fp_sqr(&x3, &r)
    fp_sub(&x3, &x3, &h3)
    fp_dbl(&t, &u1h2)
    fp_sub(&x3, &x3, &t)
    fp_sub(&t, &u1h2, &x3)
    fp_mul(&y3, &r, &t)
    fp_mul(&t, &s1, &h3)
    fp_sub(&y3, &y3, &t)
    fp_mul(&z3, &p1.z, &p2.z)
    fp_mul(&z3, &z3, &h)
    o.x = x3; o.y = y3; o.z = z3


cdef void g1j_mul(g1j* o, const g1j* pt, object k):
    cdef g1j acc
    g1j_set_inf(&acc)
    cdef bytes kb = (<object>(int(k) % R_INT)).to_bytes(32, "big")
    cdef const unsigned char* d = kb
    cdef int i, bit
    cdef bint started = False
    for i in range(32):
        for bit in range(7, -1, -1):
            if started:
                g1j_double(&acc, &acc)
            if (d[i] >> bit) & 1:
                if started:
                    g1j_add(&acc, &acc, pt)
                else:
                    acc = pt[0]
                    started = True
    if not started:
        g1j_set_inf(o)
    else:
        o[0] = acc


cdef object g1j_to_obj(const g1j* pt):
    cdef fp zi, zi2, zi3, xa, ya
    if fp_is_zero(&pt.z):
        return None
    fp_inv(&zi, &pt.z)
    fp_sqr(&zi2, &zi)
    fp_mul(&zi3, &zi2, &zi)
    fp_mul(&xa, &pt.x, &zi2)
    fp_mul(&ya, &pt.y, &zi3)
    return (fp_to_int(&xa), fp_to_int(&ya))


cdef void g1j_from_obj(g1j* o, object pt):
    if pt is None:
        g1j_set_inf(o)
        return
    o.x = int_to_fp(pt[0])
    o.y = int_to_fp(pt[1])
    o.z = FP_R1


# ---------------------------------------------------------------------------
# G2 affine over Fp2

ctypedef struct g2a:
    fp2 x
    fp2 y
    bint inf


cdef g2a _g2_from_obj(object pt):
    cdef g2a o
    if pt is None:
        o.inf = True
        o.x = F2_ZERO_C
        o.y = F2_ZERO_C
        return o
    o.inf = False
    o.x = _f2_from_tuple(pt[0])
    o.y = _f2_from_tuple(pt[1])
    return o


cdef object _g2_to_obj(const g2a* pt):
    if pt.inf:
        return None
    return (
        (fp_to_int(&pt.x.a), fp_to_int(&pt.x.b)),
        (fp_to_int(&pt.y.a), fp_to_int(&pt.y.b)),
    )


cdef void g2a_add(g2a* o, const g2a* p1, const g2a* p2):
    cdef fp2 lam, num, den, x3, y3, t
    cdef fp2 p1x = p1.x, p1y = p1.y, p2x = p2.x, p2y = p2.y
    if p1.inf:
        o[0] = p2[0]
        return
    if p2.inf:
        o[0] = p1[0]
        return
    if f2_eq(&p1x, &p2x):
        f2_add(&t, &p1y, &p2y)
        if f2_is_zero(&t):
            o.inf = True
            o.x = F2_ZERO_C; o.y = F2_ZERO_C
            return
        f2_sqr(&num, &p1x)
        f2_triple(&num, &num)
        f2_add(&den, &p1y, &p1y)
    else:
        f2_sub(&num, &p2y, &p1y)
        f2_sub(&den, &p2x, &p1x)
    f2_inv(&den, &den)
    f2_mul(&lam, &num, &den)
    f2_sqr(&x3, &lam)
    f2_sub(&x3, &x3, &p1x)
    f2_sub(&x3, &x3, &p2x)
    f2_sub(&t, &p1x, &x3)
    f2_mul(&y3, &lam, &t)
    f2_sub(&y3, &y3, &p1y)
    o.inf = False
    o.x = x3
    o.y = y3


cdef void g2a_mul(g2a* o, const g2a* pt, object k):
    cdef g2a acc
    acc.inf = True
    acc.x = F2_ZERO_C; acc.y = F2_ZERO_C
    cdef bytes kb = (<object>(int(k) % R_INT)).to_bytes(32, "big")
    cdef const unsigned char* d = kb
    cdef int i, bit
    for i in range(32):
        for bit in range(7, -1, -1):
            g2a_add(&acc, &acc, &acc)
            if (d[i] >> bit) & 1:
                g2a_add(&acc, &acc, pt)
    o[0] = acc


# ---------------------------------------------------------------------------
# Pairing

cdef list _ATE_NAF = list(_ATE_NAF_PY)


cdef void _mul_line(fp12* f, const fp2* l0, const fp2* l1, const fp2* l3):
    cdef fp2 acc[6]
    cdef fp2 t, tx
    cdef int j, k
    for j in range(6):
        acc[j] = F2_ZERO_C
    for j in range(6):
        if f2_is_zero(&f.c[j]):
            continue
        f2_mul(&t, &f.c[j], l0)
        f2_add(&acc[j], &acc[j], &t)
        f2_mul(&t, &f.c[j], l1)
        k = j + 1
        if k >= 6:
            f2_mul_xi(&tx, &t)
            f2_add(&acc[k - 6], &acc[k - 6], &tx)
        else:
            f2_add(&acc[k], &acc[k], &t)
        f2_mul(&t, &f.c[j], l3)
        k = j + 3
        if k >= 6:
            f2_mul_xi(&tx, &t)
            f2_add(&acc[k - 6], &acc[k - 6], &tx)
        else:
            f2_add(&acc[k], &acc[k], &t)
    for j in range(6):
        f.c[j] = acc[j]


cdef void _line_dbl(g2a* r, const fp* px, const fp* py,
                    fp2* l0, fp2* l1, fp2* l3):
    cdef fp2 lam, den, x3, y3, t
    f2_sqr(&lam, &r.x)
    f2_triple(&lam, &lam)
    f2_add(&den, &r.y, &r.y)
    f2_inv(&den, &den)
    f2_mul(&lam, &lam, &den)
    f2_sqr(&x3, &lam)
    f2_add(&t, &r.x, &r.x)
    f2_sub(&x3, &x3, &t)
    f2_sub(&t, &r.x, &x3)
    f2_mul(&y3, &lam, &t)
    f2_sub(&y3, &y3, &r.y)
    fp_neg(&l0.a, py)
    l0.b = FP_ZERO
    f2_mul_fp(l1, &lam, px)
    f2_mul(&t, &lam, &r.x)
    f2_sub(l3, &r.y, &t)
    r.x = x3
    r.y = y3


cdef void _line_add(g2a* r, const g2a* q, const fp* px, const fp* py,
                    fp2* l0, fp2* l1, fp2* l3):
    cdef fp2 lam, den, x3, y3, t
    f2_sub(&lam, &q.y, &r.y)
    f2_sub(&den, &q.x, &r.x)
    f2_inv(&den, &den)
    f2_mul(&lam, &lam, &den)
    f2_sqr(&x3, &lam)
    f2_sub(&x3, &x3, &r.x)
    f2_sub(&x3, &x3, &q.x)
    f2_sub(&t, &r.x, &x3)
    f2_mul(&y3, &lam, &t)
    f2_sub(&y3, &y3, &r.y)
    fp_neg(&l0.a, py)
    l0.b = FP_ZERO
    f2_mul_fp(l1, &lam, px)
    f2_mul(&t, &lam, &r.x)
    f2_sub(l3, &r.y, &t)
    r.x = x3
    r.y = y3


cdef void _final_exp(fp12* o, const fp12* f):
    cdef fp12 t, inv, fr1, fr2, fr3, fu, fu2, fu3
    cdef fp12 y0, y1, y2, y3, y4, y5, y6, t0, t1, tmp
    f12_conj(&t, f)
    f12_inv(&inv, f)
    f12_mul(&t, &t, &inv)
    f12_frob2(&tmp, &t)
    f12_mul(&t, &tmp, &t)

    f12_frob(&fr1, &t)
    f12_frob2(&fr2, &t)
    f12_frob3(&fr3, &t)
    f12_pow_u64(&fu, &t, <uint64_t>BN_U)
    f12_pow_u64(&fu2, &fu, <uint64_t>BN_U)
    f12_pow_u64(&fu3, &fu2, <uint64_t>BN_U)
    f12_mul(&y0, &fr1, &fr2)
    f12_mul(&y0, &y0, &fr3)
    f12_conj(&y1, &t)
    f12_frob2(&y2, &fu2)
    f12_frob(&y3, &fu)
    f12_conj(&y3, &y3)
    f12_frob(&tmp, &fu2)
    f12_mul(&y4, &fu, &tmp)
    f12_conj(&y4, &y4)
    f12_conj(&y5, &fu2)
    f12_frob(&tmp, &fu3)
    f12_mul(&y6, &fu3, &tmp)
    f12_conj(&y6, &y6)

    f12_sqr(&t0, &y6)
    f12_mul(&t0, &t0, &y4)
    f12_mul(&t0, &t0, &y5)
    f12_mul(&t1, &y3, &y5)
    f12_mul(&t1, &t1, &t0)
    f12_mul(&t0, &t0, &y2)
    f12_sqr(&t1, &t1)
    f12_mul(&t1, &t1, &t0)
    f12_sqr(&t1, &t1)
    f12_mul(&t0, &t1, &y1)
    f12_mul(&t1, &t1, &y0)
    f12_sqr(&t0, &t0)
    f12_mul(o, &t0, &t1)


cdef void _miller(fp12* o, object p, object q):
    cdef fp px = int_to_fp(p[0])
    cdef fp py = int_to_fp(p[1])
    cdef g2a Q = _g2_from_obj(q)
    cdef g2a nQ
    cdef g2a r = Q
    cdef g2a q1, q2
    cdef fp12 f = F12_ONE_C
    cdef fp2 l0, l1, l3, t
    nQ.inf = False
    nQ.x = Q.x
    f2_neg(&nQ.y, &Q.y)
    cdef int i, d
    cdef int n = len(_ATE_NAF)
    for i in range(n - 2, -1, -1):
        f12_sqr(&f, &f)
        _line_dbl(&r, &px, &py, &l0, &l1, &l3)
        _mul_line(&f, &l0, &l1, &l3)
        d = _ATE_NAF[i]
        if d == 1:
            _line_add(&r, &Q, &px, &py, &l0, &l1, &l3)
            _mul_line(&f, &l0, &l1, &l3)
        elif d == -1:
            _line_add(&r, &nQ, &px, &py, &l0, &l1, &l3)
            _mul_line(&f, &l0, &l1, &l3)
    q1.inf = False
    f2_conj(&t, &Q.x)
    f2_mul(&q1.x, &t, &TWFX)
    f2_conj(&t, &Q.y)
    f2_mul(&q1.y, &t, &TWFY)
    q2.inf = False
    f2_mul(&q2.x, &Q.x, &TWF2X)
    f2_mul(&q2.y, &Q.y, &TWF2Y)
    f2_neg(&q2.y, &q2.y)
    _line_add(&r, &q1, &px, &py, &l0, &l1, &l3)
    _mul_line(&f, &l0, &l1, &l3)
    _line_add(&r, &q2, &px, &py, &l0, &l1, &l3)
    _mul_line(&f, &l0, &l1, &l3)
    o[0] = f


cdef object _gt_to_obj(const fp12* f):
    cdef list out = []
    cdef int k
    for k in range(6):
        out.append(fp_to_int(&f.c[k].a))
        out.append(fp_to_int(&f.c[k].b))
    return tuple(out)


cdef fp12 _gt_from_obj(object t):
    cdef fp12 o
    cdef int k
    for k in range(6):
        o.c[k].a = int_to_fp(t[2 * k])
        o.c[k].b = int_to_fp(t[2 * k + 1])
    return o


# ---------------------------------------------------------------------------
# Public API, mirroring ttcs.curve.pure

GT_ONE = tuple([1] + [0] * 11)

NAME = "fast"


def g1_is_on_curve(pt):
    return _pure.g1_is_on_curve(pt)


def g1_neg(pt):
    return _pure.g1_neg(pt)


def g1_add(p1, p2):
    cdef g1j a, b, o
    g1j_from_obj(&a, p1)
    g1j_from_obj(&b, p2)
    g1j_add(&o, &a, &b)
    return g1j_to_obj(&o)


def g1_double(pt):
    return g1_add(pt, pt)


def g1_mul(pt, k):
    cdef g1j a, o
    if pt is None or int(k) % R_INT == 0:
        return None
    g1j_from_obj(&a, pt)
    g1j_mul(&o, &a, k)
    return g1j_to_obj(&o)


def g1_multi_mul(points, scalars):
    cdef g1j acc, term, base
    g1j_set_inf(&acc)
    for pt, k in zip(points, scalars):
        kk = int(k) % R_INT
        if pt is None or kk == 0:
            continue
        g1j_from_obj(&base, pt)
        g1j_mul(&term, &base, kk)
        g1j_add(&acc, &acc, &term)
    return g1j_to_obj(&acc)


def g2_is_on_curve(pt):
    return _pure.g2_is_on_curve(pt)


def g2_neg(pt):
    return _pure.g2_neg(pt)


def g2_add(p1, p2):
    cdef g2a a = _g2_from_obj(p1)
    cdef g2a b = _g2_from_obj(p2)
    cdef g2a o
    g2a_add(&o, &a, &b)
    return _g2_to_obj(&o)


def g2_mul(pt, k):
    cdef g2a a
    cdef g2a o
    if pt is None or int(k) % R_INT == 0:
        return None
    a = _g2_from_obj(pt)
    g2a_mul(&o, &a, k)
    return _g2_to_obj(&o)


def g2_in_subgroup(pt):
    # Order test must not reduce the scalar; reuse the reference ladder.
    return _pure.g2_in_subgroup(pt)


def pairing(p, q):
    cdef fp12 f, o
    if p is None or q is None:
        return GT_ONE
    _miller(&f, p, q)
    _final_exp(&o, &f)
    return _gt_to_obj(&o)


def gt_mul(a, b):
    cdef fp12 x = _gt_from_obj(a)
    cdef fp12 y = _gt_from_obj(b)
    cdef fp12 o
    f12_mul(&o, &x, &y)
    return _gt_to_obj(&o)


def gt_inv(a):
    cdef fp12 x = _gt_from_obj(a)
    cdef fp12 o
    f12_inv(&o, &x)
    return _gt_to_obj(&o)


def gt_pow(a, e):
    cdef fp12 x, acc
    ee = int(e) % R_INT
    if ee == 0:
        return GT_ONE
    x = _gt_from_obj(a)
    acc = F12_ONE_C
    cdef bytes eb = ee.to_bytes(32, "big")
    cdef const unsigned char* d = eb
    cdef int i, bit
    cdef bint started = False
    for i in range(32):
        for bit in range(7, -1, -1):
            if started:
                f12_sqr(&acc, &acc)
            if (d[i] >> bit) & 1:
                if started:
                    f12_mul(&acc, &acc, &x)
                else:
                    acc = x
                    started = True
    return _gt_to_obj(&acc)


def gt_multi_pow(bases, exps):
    cdef list keep_b = []
    cdef list keep_e = []
    cdef fp12 acc
    cdef fp12* xs
    cdef int top = 0, i, idx, n
    for b, e in zip(bases, exps):
        ee = int(e) % R_INT
        if ee:
            keep_b.append(b)
            keep_e.append(ee)
            if ee.bit_length() > top:
                top = ee.bit_length()
    if not keep_b:
        return GT_ONE
    n = len(keep_b)
    xs = <fp12*>PyMem_Malloc(n * sizeof(fp12))
    if xs == NULL:
        raise MemoryError()
    try:
        for idx in range(n):
            xs[idx] = _gt_from_obj(keep_b[idx])
        acc = F12_ONE_C
        for i in range(top - 1, -1, -1):
            f12_sqr(&acc, &acc)
            for idx in range(n):
                if (keep_e[idx] >> i) & 1:
                    f12_mul(&acc, &acc, &xs[idx])
        return _gt_to_obj(&acc)
    finally:
        PyMem_Free(xs)
