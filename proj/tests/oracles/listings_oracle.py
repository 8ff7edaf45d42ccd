#!/usr/bin/env python3
"""Reference cost tables for the built-in frameworks.

Each framework is written out again here as plain Python lambdas over exact
fractions, independent of the C++ code, and evaluated on a grid of parameter
points. The output is a C++ table included by the formula tests:

    python3 tests/oracles/listings_oracle.py > tests/data/listing_expected.inc

Rules shared by all formulas:
  * log(x) is ceil(log2(x)).
  * A formula without `size` describes one instance; its bit components are
    multiplied by size, its rounds are not.
  * Every component is rounded up at the end; size == 0 costs nothing.
"""

import math
from fractions import Fraction as F


def clog(x):
    x = F(x)
    if x <= 0:
        raise ValueError("log of non-positive")
    n = 0
    while F(2) ** n < x:
        n += 1
    return n


def cdiv(a, b):
    return math.ceil(F(a) / F(b))


# ---- Cheetah ciphertext count -----------------------------------------------

def cheetah_ct(p, q, r, deg, lp, bp):
    min_cost = float("inf")
    s_ct = r_ct = 0
    for d1 in range(1, min(deg, p + 1)):
        bn1 = -(-p // d1)
        d2 = 1
        while d2 <= q and d1 * d2 <= deg:
            bn2 = -(-q // d2)
            d3 = min(r, -(-deg // (d1 * d2)))
            bn3 = -(-r // d3)
            s = min(bn1, bn3) * bn2
            rc = -(-(bn1 * bn3) // d2)
            num1 = -(-(bn1 * bn3) // deg) * d2
            num2 = bn1 * bn2 * bn3
            cost = (s + rc) * bp + num1 * lp + num2 * lp / 10.0
            if cost <= min_cost:
                min_cost = cost
                s_ct, r_ct = s, rc
            d2 *= 2
    return s_ct, r_ct


# ---- SEMI2K message count ---------------------------------------------------

def semi2k_mmul(p, q, r, k):
    mem = 2 ** 31
    if p == 0 or q == 0 or r == 0 or (p * q + q * r) * k < mem:
        return p * q + q * r
    if q > (p + r) * 8:
        epr = p + r
        q_step = max(1, -(-mem // (k * epr)))
    elif (p + r) > q * 8:
        q_step = q
        epr = max(1, -(-mem // (k * q_step)))
    else:
        pr_step = math.sqrt((p + r) * mem / (q * k))
        q_step = max(1, math.ceil(mem / k / pr_step))
        epr = max(1, math.ceil(pr_step))
    p_step = max(1, -(-(epr * p) // (p + r)))
    r_step = max(1, -(-(epr * r) // (p + r)))
    res = 0
    for i in range(-(-p // p_step)):
        for j in range(-(-q // q_step)):
            for l in range(-(-r // r_step)):
                ps = min(p - p_step * i, p_step)
                qs = min(q - q_step * j, q_step)
                rs = min(r - r_step * l, r_step)
                res += ps * qs + qs * rs
    return res


# ---- framework formulas -----------------------------------------------------
# Each entry: op -> (uses_size, lambda env -> 4-tuple)

def cryptflow2():
    return {
        "share": (False, lambda e: (0, 0, 0, 0)),
        "reveal": (False, lambda e: (2 * e.k, 1, 0, 0)),
        "muls": (True, lambda e: (e.size * e.k * (cdiv(e.k + 1, 2) + e.kappa), 2, 0, 0)),
        "matmuls": (False, lambda e: (e.q * e.r * e.k * (e.p * cdiv(e.k + 1, 2) + e.kappa),
                                      max(2, math.ceil(F(2 * e.k) / cdiv(2 ** 24, e.p * e.q * e.r))), 0, 0)),
        "TruncPr": (False, lambda e: ((e.kappa + 14) * e.f + 2 * e.kappa + 4 * e.k if e.knownmsb
                                      else e.kappa * (e.k + 2) + 19 * e.k + (e.kappa + 14) * e.f,
                                      2 if e.knownmsb else 2 * clog(e.k) + 2, 0, 0)),
        "LTZ": (False, lambda e: ((e.kappa + 18) * e.k, clog(e.k), 0, 0)),
    }


def crypten():
    return {
        "share": (False, lambda e: (0, 0, 0, 0)),
        "reveal": (False, lambda e: (2 * e.k, 1, 0, 0)),
        "muls": (True, lambda e: (2 * e.k * e.size, 1, e.k * e.size, 3)),
        "matmuls": (False, lambda e: ((e.p * e.q + e.q * e.r) * e.k * 2, 1, e.p * e.r * e.k, 3)),
        "TruncPr": (False, lambda e: (0, 0, 0, 0)),
        "LTZ": (False, lambda e: (54 * e.k, clog(e.k) + 2, 14 * e.k, (clog(e.k) + 2) * 3)),
        "exp_fx": (False, lambda e: (16 * e.k, 8, 8 * e.k, 24)),
        "EQZ": (False, lambda e: (26 * e.k, clog(e.k), 7 * e.k, 21)),
        "Reciprocal": (False, lambda e: (138 * e.k, 38, 44 * e.k, 114)),
    }


def aby():
    return {
        "share": (False, lambda e: (0, 0, 0, 0)),
        "reveal": (False, lambda e: (2 * e.k, 1, 0, 0)),
        "muls": (True, lambda e: (4 * e.k * e.size, 1, (2 * e.kappa + e.k + 1) * e.k * e.size, 2)),
        "matmuls": (False, lambda e: (e.p * e.q * e.r * e.k * 4, 1,
                                      e.p * e.q * e.r * (2 * e.kappa + e.k + 1) * e.k, 2)),
        "TruncPr": (False, lambda e: (0, 0, 0, 0)),
        "LTZ": (False, lambda e: (e.kappa * e.k * 7 + F(e.k ** 2 + e.k, 2), 4, 5 * e.kappa * e.k, 2)),
    }


def spdz2k():
    def trip(e):
        return (18 * e.ks ** 2 + 4 * e.k ** 2 + 17 * e.ks * e.k) * e.m * (e.m - 1)

    return {
        "share": (False, lambda e: ((e.ks + e.k) * (e.m - 1), 1, e.ks * (e.k + e.ks) * e.m * (e.m - 1), 3)),
        "reveal": (False, lambda e: ((e.ks + e.k) * e.m * (e.m - 1), 1, e.ks * (e.k + e.ks) * e.m * (e.m - 1), 3)),
        "muls": (False, lambda e: ((e.k + e.ks) * e.m * (e.m - 1) * 2, 1, trip(e), 8)),
        "matmuls": (False, lambda e: ((e.k + e.ks) * e.m * (e.m - 1) * 2 * e.p * e.q * e.r, 1,
                                      trip(e) * e.p * e.q * e.r, 8)),
        "TruncPr": (False, lambda e: ((e.k + e.ks) * e.m * (e.m - 1), 1,
                                      e.k * ((e.ks + e.k) * (3 * e.m + 1) * (e.m - 1)
                                             + e.ks * (e.k + e.ks) * e.m * (e.m - 1) * 2 + trip(e)), 11)),
    }


def aby3():
    return {
        "share": (False, lambda e: (3 * e.k, 1, 0, 0)),
        "reveal": (False, lambda e: (3 * e.k, 1, 0, 0)),
        "muls": (True, lambda e: (3 * e.k * e.size, 1, 0, 0)),
        "matmuls": (False, lambda e: (3 * e.p * e.r * e.k, 1, 0, 0)),
        "TruncPr": (False, lambda e: (e.k, 1, 0, 0)),
        "LTZ": (False, lambda e: (9 * e.k, clog(e.k) + 2, 0, 0)),
    }


def falcon():
    def ltz_off(e):
        return (e.k + 8 + clog(e.k)) * e.k * 3

    return {
        "share": (False, lambda e: (3 * e.k, 1, 0, 0)),
        "reveal": (False, lambda e: (6 * e.k, 1, 0, 0)),
        "muls": (True, lambda e: (6 * e.k * e.size, 1, 0, 0)),
        "matmuls": (False, lambda e: (6 * e.p * e.r * e.k, 1, 0, 0)),
        "TruncPr": (False, lambda e: (2 * e.k, 1, (6 + clog(e.k)) * e.k + (6 + clog(e.k - e.f)) * (e.k - e.f),
                                      clog(e.k) + 2)),
        "LTZ": (False, lambda e: (24 * e.k, clog(e.k) + 5, ltz_off(e), 4 + 2 * clog(e.k))),
        "Pow2": (False, lambda e: (24 * e.k * e.k, (clog(e.k) + 5) * e.k, ltz_off(e) * e.k, 4 + 2 * clog(e.k))),
        "Reciprocal": (False, lambda e: (24 * e.k * e.k + 36 * e.k, (clog(e.k) + 5) * e.k + 5, ltz_off(e) * e.k,
                                         4 + 2 * clog(e.k))),
    }


def delphi():
    return {
        "share": (False, lambda e: (0, 0, 0, 0)),
        "reveal": (False, lambda e: (2 * e.k, 1, 0, 0)),
        "muls": (True, lambda e: (e.k * e.size, 1, cdiv(e.size, e.deg) * e.deg * sum(e.mod) * 4, 2)),
        "matmuls": (False, lambda e: (e.p * e.q * e.k, 1,
                                      (cdiv(e.p * e.r, e.deg) + cdiv(e.p * e.q, e.deg)) * e.deg * sum(e.mod) * 2, 2)),
        "TruncPr": (False, lambda e: (0, 0, 0, 0)),
        "LTZ": (False, lambda e: (148 * e.k, 1, 1470 * e.k, 3)),
        "conv2d": (False, lambda e: (e.batch * e.cin * e.inw * e.inh * e.k, 1,
                                     e.batch * cdiv(e.cin * e.inw * e.inh, e.deg) * e.kw * e.kh * e.deg * sum(e.mod)
                                     + cdiv(e.batch * e.cout * e.outw * e.outh, e.deg) * e.deg * sum(e.mod), 2)),
    }


def cheetah():
    def mm(e):
        s, rc = cheetah_ct(e.p, e.q, e.r, e.deg, e.lp, e.bp)
        return 2 * (s * e.deg * sum(e.mod[0:-1]) + rc * e.deg * sum(e.mod[0:-2]))

    return {
        "share": (False, lambda e: (0, 0, 0, 0)),
        "reveal": (False, lambda e: (2 * e.k, 1, 0, 0)),
        "muls": (True, lambda e: (cdiv(e.size, e.deg) * (e.deg * sum(e.mod[0:-1]) + e.deg * sum(e.mod[0:-2])), 2, 0, 0)),
        "matmuls": (False, lambda e: (mm(e), 4, 0, 0)),
        "TruncPr": (False, lambda e: (e.f + 4, 2, 0, 0)),
        "LTZ": (False, lambda e: (13 * e.k + 1, clog(e.k), 0, 0)),
    }


def deep_mpc():
    return {
        "share": (False, lambda e: (e.k, 1, 0, 0)),
        "reveal": (False, lambda e: (3 * e.k, 1, 0, 0)),
        "muls": (False, lambda e: (3 * e.k, 1, 0, 0)),
        "matmuls": (False, lambda e: (3 * e.p * e.r * e.k, 1, 0, 0)),
        "TruncPr": (False, lambda e: (8 * e.k, 3, 0, 0)),
        "LTZ": (False, lambda e: (F(7425, 1000) * e.k, clog(e.k) + 2, 3 * e.k, 2)),
    }


def semi2k():
    return {
        "share": (False, lambda e: (0, 0, 0, 0)),
        "reveal": (False, lambda e: (e.m * (e.m - 1) * e.k, 1, 0, 0)),
        "muls": (True, lambda e: (2 * e.m * (e.m - 1) * e.k * e.size, 1, 0, 0)),
        "matmuls": (False, lambda e: (e.m * e.k * semi2k_mmul(e.p, e.q, e.r, e.k), 1, 0, 0)),
        "TruncPr": (False, lambda e: (e.m * (e.m - 1) * e.k, 1, 0, 0)),
        "LTZ": (False, lambda e: (e.m * (2 * e.k + 2 * (e.m - 1) * (2 * e.k + 32)), clog(e.k) + 1, 0, 0)),
    }


FRAMEWORKS = [
    ("CrypTFlow2", cryptflow2, [2]),
    ("CrypTen", crypten, [2]),
    ("ABY", aby, [2]),
    ("SPDZ-2k", spdz2k, [2, 3, 5]),
    ("ABY3", aby3, [3]),
    ("Falcon", falcon, [3]),
    ("Delphi", delphi, [2]),
    ("Cheetah", cheetah, [2]),
    ("Deep-MPC", deep_mpc, [3]),
    ("SEMI2K", semi2k, [2, 3, 4]),
]

# (k, kappa_s, kappa, f)
SECURITY = [(64, 40, 128, 16), (32, 20, 80, 8), (60, 40, 128, 20), (128, 64, 128, 40)]

HE = [(4096, [59, 55, 49, 49], 1.0, 1000.0), (8192, [60, 49, 49, 49, 60], 10.0, 1.0)]

SIZES = [0, 1, 7, 5000]

MATMUL_DIMS = [(1, 1, 1), (2, 3, 4), (17, 33, 5), (128, 784, 10), (300, 300, 300),
               (20, 2000000, 20), (3000000, 10, 3000000), (5000, 6000, 7000)]

CONVS = [  # batch, cin, cout, inw, inh, outw, outh, kw, kh
    (1, 1, 1, 1, 1, 1, 1, 1, 1),
    (1, 3, 8, 32, 32, 32, 32, 3, 3),
    (4, 16, 32, 14, 14, 7, 7, 5, 5),
]


class Env:
    def __init__(self, **kw):
        self.__dict__.update(kw)


def evaluate(fw, op, env):
    uses_size, fn = fw[op]
    if env.size == 0:
        return (0, 0, 0, 0)
    raw = [F(v) for v in fn(env)]
    if not uses_size:
        raw[0] *= env.size
        raw[2] *= env.size
    out = []
    for v in raw:
        if v < 0:
            raise ValueError("negative")
        out.append(math.ceil(v))
    return tuple(out)


def cases():
    for name, make, parties in FRAMEWORKS:
        fw = make()
        for op in fw:
            for (k, ks, kappa, f) in SECURITY:
                if name == "SPDZ-2k" and k < ks:
                    continue
                for m in parties:
                    for deg, mod, lp, bp in HE:
                        base = dict(k=k, ks=ks, kappa=kappa, f=f, m=m, deg=deg, mod=mod, lp=lp, bp=bp,
                                    knownmsb=False, p=0, q=0, r=0, size=1, conv=None)
                        variants = []
                        if op == "matmuls":
                            for (p, q, r) in MATMUL_DIMS:
                                for size in (1, 3):
                                    variants.append(dict(base, p=p, q=q, r=r, size=size))
                        elif op == "conv2d":
                            for c in CONVS:
                                variants.append(dict(base, conv=c))
                        elif op == "TruncPr":
                            for size in SIZES:
                                for msb in (False, True):
                                    variants.append(dict(base, size=size, knownmsb=msb))
                        else:
                            for size in SIZES:
                                variants.append(dict(base, size=size))
                        for v in variants:
                            env = Env(**v)
                            if v["conv"] is not None:
                                (env.batch, env.cin, env.cout, env.inw, env.inh,
                                 env.outw, env.outh, env.kw, env.kh) = v["conv"]
                            exp = evaluate(fw, op, env)
                            if max(exp) >= 2 ** 64:
                                continue
                            yield name, op, v, exp


def main():
    print("// Generated by tests/oracles/listings_oracle.py; do not edit.")
    print("// framework, op, k, kappa_s, kappa, f, m, size, p, q, r, knownmsb, deg, mod, lp, bp,")
    print("// has_conv, {batch, in_c, out_c, inw, inh, outw, outh, kw, kh}, {expected}")
    n = 0
    for name, op, v, exp in cases():
        conv = v["conv"] or (0,) * 9
        mod = ",".join(str(x) for x in v["mod"])
        print('{"%s", "%s", %d, %d, %d, %d, %d, %dULL, %dULL, %dULL, %dULL, %s, %d, "%s", %r, %r, %s, {%s}, {%dULL, %dULL, %dULL, %dULL}},'
              % (name, op, v["k"], v["ks"], v["kappa"], v["f"], v["m"], v["size"], v["p"], v["q"], v["r"],
                 "true" if v["knownmsb"] else "false", v["deg"], mod, v["lp"], v["bp"],
                 "true" if v["conv"] else "false", ", ".join(str(x) for x in conv), *exp))
        n += 1
    import sys
    print("// %d cases" % n, file=sys.stderr)


if __name__ == "__main__":
    main()
