"""BN254 curve constants shared by every arithmetic backend.

The curve is the 254-bit Barreto-Naehrig curve (a.k.a. alt_bn128):
E/Fp: y^2 = x^3 + 3, with a sextic twist E'/Fp2: y^2 = x^3 + 3/xi,
xi = 9 + u.  G1 has cofactor 1; G2 points live on the twist.
"""

# BN parameter x0 and the derived primes.
BN_U = 4965661367192848881

P = 21888242871839275222246405745257275088696311157297823662689037894645226208583
R = 21888242871839275222246405745257275088548364400416034343698204186575808495617

assert P == 36 * BN_U**4 + 36 * BN_U**3 + 24 * BN_U**2 + 6 * BN_U + 1
assert R == 36 * BN_U**4 + 36 * BN_U**3 + 18 * BN_U**2 + 6 * BN_U + 1

# Optimal-ate Miller loop length.
ATE_LOOP_COUNT = 6 * BN_U + 2

B_G1 = 3
# xi = 9 + u as an Fp2 element (c0, c1).
XI = (9, 1)

G1_GEN = (1, 2)

# Standard generator of the order-R subgroup of the twist.
G2_GEN = (
    (
        10857046999023057135944570762232829481370756359578518086990519993285655852781,
        11559732032986387107991004021392285783925812861821192530917403151452391805634,
    ),
    (
        8495653923123431417604973247489272438418190587263600148770280649306958101930,
        4082367875863433681332203403145435568316851327593401208105741076214120093531,
    ),
)


def naf(k):
    """Non-adjacent form of k, least significant digit first."""
    digits = []
    while k > 0:
        if k & 1:
            d = 2 - (k % 4)
            k -= d
        else:
            d = 0
        digits.append(d)
        k >>= 1
    return digits


ATE_NAF = naf(ATE_LOOP_COUNT)
