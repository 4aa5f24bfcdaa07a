"""Pure-Python BN254 arithmetic backend.

Reference implementation of the backend interface; the compiled
extension (`ttcs.curve._fast`) mirrors it operation for operation.
Representation conventions at the API boundary:

  Fp        int in [0, P)
  Fp2       (int, int) meaning c0 + c1*u
  G1 point  (x, y) affine or None for the identity
  G2 point  ((x0,x1), (y0,y1)) affine on the twist or None
  GT        tuple of 12 ints: Fp12 in the w-basis (w^6 = xi), the
            Fp2 coefficient of w^k flattened as (c0, c1) pairs

All functions are pure; nothing here keeps state.
"""

from .params import ATE_NAF, BN_U, G2_GEN, P, R, XI

# ---------------------------------------------------------------------------
# Fp


def fp_inv(a):
    return pow(a, P - 2, P)


def fp_sqrt(a):
    """Square root in Fp (P = 3 mod 4); None if a is not a square."""
    if a == 0:
        return 0
    r = pow(a, (P + 1) // 4, P)
    return r if r * r % P == a else None


# ---------------------------------------------------------------------------
# Fp2 = Fp[u] / (u^2 + 1)

F2_ZERO = (0, 0)
F2_ONE = (1, 0)


def f2_add(a, b):
    return ((a[0] + b[0]) % P, (a[1] + b[1]) % P)


def f2_sub(a, b):
    return ((a[0] - b[0]) % P, (a[1] - b[1]) % P)


def f2_neg(a):
    return (-a[0] % P, -a[1] % P)


def f2_conj(a):
    return (a[0], -a[1] % P)


def f2_mul(a, b):
    t0 = a[0] * b[0]
    t1 = a[1] * b[1]
    return ((t0 - t1) % P, ((a[0] + a[1]) * (b[0] + b[1]) - t0 - t1) % P)


def f2_sqr(a):
    return ((a[0] + a[1]) * (a[0] - a[1]) % P, 2 * a[0] * a[1] % P)


def f2_muls(a, k):
    return (a[0] * k % P, a[1] * k % P)


def f2_mul_xi(a):
    # (9 + u) * (a0 + a1 u) = (9 a0 - a1) + (9 a1 + a0) u
    return ((9 * a[0] - a[1]) % P, (9 * a[1] + a[0]) % P)


def f2_inv(a):
    d = fp_inv((a[0] * a[0] + a[1] * a[1]) % P)
    return (a[0] * d % P, -a[1] * d % P)


def f2_pow(a, e):
    out = F2_ONE
    for bit in bin(e)[2:]:
        out = f2_sqr(out)
        if bit == "1":
            out = f2_mul(out, a)
    return out


def f2_sqrt(a):
    """Square root in Fp2 via two Fp roots; None if not a square."""
    if a == F2_ZERO:
        return F2_ZERO
    a0, a1 = a
    if a1 == 0:
        r = fp_sqrt(a0)
        if r is not None:
            return (r, 0)
        # sqrt(a0) = t*u with t^2 = -a0
        t = fp_sqrt(-a0 % P)
        return None if t is None else (0, t)
    n = fp_sqrt((a0 * a0 + a1 * a1) % P)
    if n is None:
        return None
    inv2 = fp_inv(2)
    for s in (n, -n % P):
        t2 = (a0 + s) * inv2 % P
        t = fp_sqrt(t2)
        if t is None or t == 0:
            continue
        y1 = a1 * fp_inv(2 * t % P) % P
        cand = (t, y1)
        if f2_sqr(cand) == a:
            return cand
    return None


# ---------------------------------------------------------------------------
# Fp6 = Fp2[v] / (v^3 - xi), used internally for Fp12 inversion

F6_ZERO = (F2_ZERO, F2_ZERO, F2_ZERO)


def f6_mul(a, b):
    a0, a1, a2 = a
    b0, b1, b2 = b
    t00 = f2_mul(a0, b0)
    t11 = f2_mul(a1, b1)
    t22 = f2_mul(a2, b2)
    c0 = f2_add(t00, f2_mul_xi(f2_add(f2_mul(a1, b2), f2_mul(a2, b1))))
    c1 = f2_add(f2_add(f2_mul(a0, b1), f2_mul(a1, b0)), f2_mul_xi(t22))
    c2 = f2_add(f2_add(f2_mul(a0, b2), f2_mul(a2, b0)), t11)
    return (c0, c1, c2)


def f6_sqr(a):
    return f6_mul(a, a)


def f6_mul_v(a):
    return (f2_mul_xi(a[2]), a[0], a[1])


def f6_sub(a, b):
    return (f2_sub(a[0], b[0]), f2_sub(a[1], b[1]), f2_sub(a[2], b[2]))


def f6_neg(a):
    return (f2_neg(a[0]), f2_neg(a[1]), f2_neg(a[2]))


def f6_inv(a):
    a0, a1, a2 = a
    t0 = f2_sub(f2_sqr(a0), f2_mul_xi(f2_mul(a1, a2)))
    t1 = f2_sub(f2_mul_xi(f2_sqr(a2)), f2_mul(a0, a1))
    t2 = f2_sub(f2_sqr(a1), f2_mul(a0, a2))
    den = f2_add(
        f2_mul(a0, t0),
        f2_mul_xi(f2_add(f2_mul(a2, t1), f2_mul(a1, t2))),
    )
    d = f2_inv(den)
    return (f2_mul(t0, d), f2_mul(t1, d), f2_mul(t2, d))


# ---------------------------------------------------------------------------
# Fp12 in the w-basis: tuple of 6 Fp2 coefficients, w^6 = xi

F12_ONE = (F2_ONE, F2_ZERO, F2_ZERO, F2_ZERO, F2_ZERO, F2_ZERO)


def f12_mul(a, b):
    acc = [F2_ZERO] * 6
    for i in range(6):
        ai = a[i]
        if ai == F2_ZERO:
            continue
        for j in range(6):
            bj = b[j]
            if bj == F2_ZERO:
                continue
            t = f2_mul(ai, bj)
            k = i + j
            if k >= 6:
                acc[k - 6] = f2_add(acc[k - 6], f2_mul_xi(t))
            else:
                acc[k] = f2_add(acc[k], t)
    return tuple(acc)


def f12_sqr(a):
    return f12_mul(a, a)


def f12_conj(a):
    """Conjugation over Fp6, i.e. the p^6 Frobenius: negate odd-w terms."""
    return (a[0], f2_neg(a[1]), a[2], f2_neg(a[3]), a[4], f2_neg(a[5]))


def f12_inv(a):
    # Split into even/odd parts: a = A(v) + w*B(v) with v = w^2,
    # then invert via (A - wB) / (A^2 - v B^2) over Fp6.
    A = (a[0], a[2], a[4])
    B = (a[1], a[3], a[5])
    den = f6_sub(f6_sqr(A), f6_mul_v(f6_sqr(B)))
    d = f6_inv(den)
    ev = f6_mul(A, d)
    od = f6_neg(f6_mul(B, d))
    return (ev[0], od[0], ev[1], od[1], ev[2], od[2])


def f12_pow(a, e):
    out = F12_ONE
    for bit in bin(e)[2:]:
        out = f12_sqr(out)
        if bit == "1":
            out = f12_mul(out, a)
    return out


def _frob_constants():
    frob1 = [f2_pow(XI, k * (P - 1) // 6) for k in range(6)]
    frob2 = [f2_pow(XI, k * (P * P - 1) // 6) for k in range(6)]
    frob3 = [f2_pow(XI, k * (P**3 - 1) // 6) for k in range(6)]
    return frob1, frob2, frob3


FROB1, FROB2, FROB3 = _frob_constants()

# Frobenius action on twist coordinates (untwist-frobenius-twist).
TW_FROB_X = FROB1[2]  # xi^((p-1)/3)
TW_FROB_Y = FROB1[3]  # xi^((p-1)/2)
TW_FROB2_X = FROB2[2]
TW_FROB2_Y = FROB2[3]


def f12_frob(a):
    return tuple(f2_mul(f2_conj(a[k]), FROB1[k]) for k in range(6))


def f12_frob2(a):
    return tuple(f2_mul(a[k], FROB2[k]) for k in range(6))


def f12_frob3(a):
    return tuple(f2_mul(f2_conj(a[k]), FROB3[k]) for k in range(6))


# ---------------------------------------------------------------------------
# G1 (affine tuples, Jacobian internally for scalar multiplication)


def g1_is_on_curve(pt):
    if pt is None:
        return True
    x, y = pt
    return (y * y - x * x * x - 3) % P == 0


def g1_neg(pt):
    if pt is None:
        return None
    return (pt[0], -pt[1] % P)


def g1_add(p1, p2):
    if p1 is None:
        return p2
    if p2 is None:
        return p1
    x1, y1 = p1
    x2, y2 = p2
    if x1 == x2:
        if (y1 + y2) % P == 0:
            return None
        lam = 3 * x1 * x1 * fp_inv(2 * y1 % P) % P
    else:
        lam = (y2 - y1) * fp_inv((x2 - x1) % P) % P
    x3 = (lam * lam - x1 - x2) % P
    return (x3, (lam * (x1 - x3) - y1) % P)


def g1_double(pt):
    return g1_add(pt, pt)


def _jac_double(x, y, z):
    if not y:
        return (0, 1, 0)
    a = x * x % P
    b = y * y % P
    c = b * b % P
    d = 2 * ((x + b) * (x + b) - a - c) % P
    e = 3 * a % P
    f = e * e % P
    x3 = (f - 2 * d) % P
    y3 = (e * (d - x3) - 8 * c) % P
    z3 = 2 * y * z % P
    return (x3, y3, z3)


def _jac_add(p1, p2):
    x1, y1, z1 = p1
    x2, y2, z2 = p2
    if not z1:
        return p2
    if not z2:
        return p1
    z1s = z1 * z1 % P
    z2s = z2 * z2 % P
    u1 = x1 * z2s % P
    u2 = x2 * z1s % P
    s1 = y1 * z2s * z2 % P
    s2 = y2 * z1s * z1 % P
    if u1 == u2:
        if s1 != s2:
            return (0, 1, 0)
        return _jac_double(x1, y1, z1)
    h = (u2 - u1) % P
    r = (s2 - s1) % P
    h2 = h * h % P
    h3 = h * h2 % P
    u1h2 = u1 * h2 % P
    x3 = (r * r - h3 - 2 * u1h2) % P
    y3 = (r * (u1h2 - x3) - s1 * h3) % P
    z3 = z1 * z2 * h % P
    return (x3, y3, z3)


def _jac_to_affine(p):
    x, y, z = p
    if not z:
        return None
    zi = fp_inv(z)
    zi2 = zi * zi % P
    return (x * zi2 % P, y * zi2 * zi % P)


def g1_mul(pt, k):
    k %= R
    if pt is None or k == 0:
        return None
    acc = (0, 1, 0)
    add = (pt[0], pt[1], 1)
    for bit in bin(k)[2:]:
        acc = _jac_double(*acc)
        if bit == "1":
            acc = _jac_add(acc, add)
    return _jac_to_affine(acc)


def g1_multi_mul(points, scalars):
    acc = (0, 1, 0)
    for pt, k in zip(points, scalars):
        k %= R
        if pt is None or k == 0:
            continue
        term = (0, 1, 0)
        add = (pt[0], pt[1], 1)
        for bit in bin(k)[2:]:
            term = _jac_double(*term)
            if bit == "1":
                term = _jac_add(term, add)
        acc = _jac_add(acc, term)
    return _jac_to_affine(acc)


# ---------------------------------------------------------------------------
# G2 (affine over Fp2, on the twist)

B_G2 = f2_muls(f2_inv(XI), 3)


def g2_is_on_curve(pt):
    if pt is None:
        return True
    x, y = pt
    return f2_sqr(y) == f2_add(f2_mul(f2_sqr(x), x), B_G2)


def g2_neg(pt):
    if pt is None:
        return None
    return (pt[0], f2_neg(pt[1]))


def g2_add(p1, p2):
    if p1 is None:
        return p2
    if p2 is None:
        return p1
    x1, y1 = p1
    x2, y2 = p2
    if x1 == x2:
        if f2_add(y1, y2) == F2_ZERO:
            return None
        lam = f2_mul(f2_muls(f2_sqr(x1), 3), f2_inv(f2_add(y1, y1)))
    else:
        lam = f2_mul(f2_sub(y2, y1), f2_inv(f2_sub(x2, x1)))
    x3 = f2_sub(f2_sqr(lam), f2_add(x1, x2))
    return (x3, f2_sub(f2_mul(lam, f2_sub(x1, x3)), y1))


def g2_mul(pt, k):
    k %= R
    if pt is None or k == 0:
        return None
    acc = None
    for bit in bin(k)[2:]:
        acc = g2_add(acc, acc)
        if bit == "1":
            acc = g2_add(acc, pt)
    return acc


def _g2_mul_raw(pt, k):
    """Ladder without scalar reduction (needed to test point order)."""
    if pt is None or k == 0:
        return None
    acc = None
    for bit in bin(k)[2:]:
        acc = g2_add(acc, acc)
        if bit == "1":
            acc = g2_add(acc, pt)
    return acc


def g2_in_subgroup(pt):
    return g2_is_on_curve(pt) and _g2_mul_raw(pt, R) is None


# ---------------------------------------------------------------------------
# Optimal ate pairing

GT_ONE = tuple(c for pair in F12_ONE for c in pair)


def _line_dbl(r, px, py):
    """Double r on the twist; return (2r, line coefficients L0, L1, L3)."""
    x, y = r
    lam = f2_mul(f2_muls(f2_sqr(x), 3), f2_inv(f2_add(y, y)))
    x3 = f2_sub(f2_sqr(lam), f2_add(x, x))
    y3 = f2_sub(f2_mul(lam, f2_sub(x, x3)), y)
    l0 = (-py % P, 0)
    l1 = f2_muls(lam, px)
    l3 = f2_sub(y, f2_mul(lam, x))
    return (x3, y3), l0, l1, l3


def _line_add(r, q, px, py):
    """Chord through r and q; assumes r != +-q."""
    x1, y1 = r
    x2, y2 = q
    lam = f2_mul(f2_sub(y2, y1), f2_inv(f2_sub(x2, x1)))
    x3 = f2_sub(f2_sqr(lam), f2_add(x1, x2))
    y3 = f2_sub(f2_mul(lam, f2_sub(x1, x3)), y1)
    l0 = (-py % P, 0)
    l1 = f2_muls(lam, px)
    l3 = f2_sub(y1, f2_mul(lam, x1))
    return (x3, y3), l0, l1, l3


def _mul_line(f, l0, l1, l3):
    """Sparse multiply f by l0 + l1*w + l3*w^3."""
    acc = [F2_ZERO] * 6
    for j in range(6):
        fj = f[j]
        if fj == F2_ZERO:
            continue
        t = f2_mul(fj, l0)
        acc[j] = f2_add(acc[j], t)
        t = f2_mul(fj, l1)
        k = j + 1
        if k >= 6:
            acc[k - 6] = f2_add(acc[k - 6], f2_mul_xi(t))
        else:
            acc[k] = f2_add(acc[k], t)
        t = f2_mul(fj, l3)
        k = j + 3
        if k >= 6:
            acc[k - 6] = f2_add(acc[k - 6], f2_mul_xi(t))
        else:
            acc[k] = f2_add(acc[k], t)
    return tuple(acc)


def _twist_frob(q):
    x, y = q
    return (f2_mul(f2_conj(x), TW_FROB_X), f2_mul(f2_conj(y), TW_FROB_Y))


def _twist_frob2(q):
    x, y = q
    return (f2_mul(x, TW_FROB2_X), f2_mul(y, TW_FROB2_Y))


def _miller(p, q):
    px, py = p
    f = F12_ONE
    r = q
    nq = g2_neg(q)
    for d in reversed(ATE_NAF[:-1]):
        f = f12_sqr(f)
        r, l0, l1, l3 = _line_dbl(r, px, py)
        f = _mul_line(f, l0, l1, l3)
        if d == 1:
            r, l0, l1, l3 = _line_add(r, q, px, py)
            f = _mul_line(f, l0, l1, l3)
        elif d == -1:
            r, l0, l1, l3 = _line_add(r, nq, px, py)
            f = _mul_line(f, l0, l1, l3)
    q1 = _twist_frob(q)
    q2 = g2_neg(_twist_frob2(q))
    r, l0, l1, l3 = _line_add(r, q1, px, py)
    f = _mul_line(f, l0, l1, l3)
    _, l0, l1, l3 = _line_add(r, q2, px, py)
    f = _mul_line(f, l0, l1, l3)
    return f


def _final_exp(f):
    # Easy part: f^((p^6 - 1)(p^2 + 1)).
    t = f12_mul(f12_conj(f), f12_inv(f))
    t = f12_mul(f12_frob2(t), t)
    # Hard part (standard BN decomposition in terms of the curve parameter).
    fp1 = f12_frob(t)
    fp2 = f12_frob2(t)
    fp3 = f12_frob3(t)
    fu = f12_pow(t, BN_U)
    fu2 = f12_pow(fu, BN_U)
    fu3 = f12_pow(fu2, BN_U)
    y0 = f12_mul(f12_mul(fp1, fp2), fp3)
    y1 = f12_conj(t)
    y2 = f12_frob2(fu2)
    y3 = f12_conj(f12_frob(fu))
    y4 = f12_conj(f12_mul(fu, f12_frob(fu2)))
    y5 = f12_conj(fu2)
    y6 = f12_conj(f12_mul(fu3, f12_frob(fu3)))
    t0 = f12_mul(f12_mul(f12_sqr(y6), y4), y5)
    t1 = f12_mul(f12_mul(y3, y5), t0)
    t0 = f12_mul(t0, y2)
    t1 = f12_sqr(f12_mul(f12_sqr(t1), t0))
    t0 = f12_mul(t1, y1)
    t1 = f12_mul(t1, y0)
    t0 = f12_sqr(t0)
    return f12_mul(t0, t1)


def _gt_pack(f):
    return tuple(c for pair in f for c in pair)


def _gt_unpack(t):
    return tuple((t[2 * k], t[2 * k + 1]) for k in range(6))


def pairing(p, q):
    if p is None or q is None:
        return GT_ONE
    return _gt_pack(_final_exp(_miller(p, q)))


def gt_mul(a, b):
    return _gt_pack(f12_mul(_gt_unpack(a), _gt_unpack(b)))


def gt_inv(a):
    return _gt_pack(f12_inv(_gt_unpack(a)))


def gt_pow(a, e):
    e %= R
    if e == 0:
        return GT_ONE
    return _gt_pack(f12_pow(_gt_unpack(a), e))


def gt_multi_pow(bases, exps):
    """prod bases[i]^exps[i] with shared squarings."""
    pairs = [(_gt_unpack(b), e % R) for b, e in zip(bases, exps) if e % R]
    if not pairs:
        return GT_ONE
    top = max(e.bit_length() for _, e in pairs)
    acc = F12_ONE
    for i in range(top - 1, -1, -1):
        acc = f12_sqr(acc)
        for b, e in pairs:
            if (e >> i) & 1:
                acc = f12_mul(acc, b)
    return _gt_pack(acc)


NAME = "pure"
