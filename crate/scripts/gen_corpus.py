#!/usr/bin/env python3
"""Generate the eigendata corpus by counting points on Weierstrass models.

a_q = q + 1 - #E(F_q) at every prime, including bad ones (the singular point
is counted, which yields +-1 at multiplicative primes and 0 at additive ones).
Writes corpus/<label>.json and corpus/SHA256SUMS.
"""

import argparse
import hashlib
import json
import os

CURVES = {
    "11a": (11, [0, -1, 1, -10, -20]),
    "14a": (14, [1, 0, 1, 4, -6]),
    "15a": (15, [1, 1, 1, -10, -10]),
    "17a": (17, [1, -1, 1, -1, -14]),
    "19a": (19, [0, 1, 1, -9, -15]),
}


def primes_up_to(n):
    sieve = bytearray([1]) * (n + 1)
    sieve[0:2] = b"\x00\x00"
    for i in range(2, int(n ** 0.5) + 1):
        if sieve[i]:
            sieve[i * i :: i] = bytearray(len(sieve[i * i :: i]))
    return [i for i in range(n + 1) if sieve[i]]


def count_points(coeffs, p):
    a1, a2, a3, a4, a6 = coeffs
    if p == 2:
        n = 1
        for x in range(2):
            for y in range(2):
                lhs = y * y + a1 * x * y + a3 * y
                rhs = x ** 3 + a2 * x * x + a4 * x + a6
                if (lhs - rhs) % 2 == 0:
                    n += 1
        return n
    squares = [0] * p
    for y in range(p):
        squares[y * y % p] += 1
    n = 1
    for x in range(p):
        # (2y + a1 x + a3)^2 = 4(x^3 + a2 x^2 + a4 x + a6) + (a1 x + a3)^2
        f = 4 * (x ** 3 + a2 * x * x + a4 * x + a6) + (a1 * x + a3) ** 2
        n += squares[f % p]
    return n


def factor(n):
    out = {}
    d = 2
    while d * d <= n:
        while n % d == 0:
            out[d] = out.get(d, 0) + 1
            n //= d
        d += 1
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def build(label, level, coeffs, bound):
    ap = []
    for q in primes_up_to(bound):
        a = q + 1 - count_points(coeffs, q)
        ap.append([q, a, 1])
    local = {}
    for q, e in factor(level).items():
        a = next(x[1] for x in ap if x[0] == q)
        kind = "steinberg" if e == 1 and a != 0 else "principal_ram"
        local[str(q)] = {"type": kind, "subcase": "none", "minimal_twist_aq": [a, 1]}
    names = ["a1", "a2", "a3", "a4", "a6"]
    return {
        "label": label,
        "level": level,
        "weight": 2,
        "nebentypus": {"modulus": 1, "values": []},
        "ap": ap,
        "ap_bound": bound,
        "local_types": local,
        "curve": dict(zip(names, coeffs)),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=os.path.join(os.path.dirname(__file__), "..", "corpus"))
    ap.add_argument("--bound", type=int, default=2000)
    args = ap.parse_args()
    os.makedirs(args.out, exist_ok=True)
    sums = []
    for label, (level, coeffs) in CURVES.items():
        data = build(label, level, coeffs, args.bound)
        text = json.dumps(data, sort_keys=True, separators=(",", ":")) + "\n"
        path = os.path.join(args.out, label + ".json")
        with open(path, "w") as fh:
            fh.write(text)
        sums.append("%s  %s.json" % (hashlib.sha256(text.encode()).hexdigest(), label))
    with open(os.path.join(args.out, "SHA256SUMS"), "w") as fh:
        fh.write("\n".join(sums) + "\n")


if __name__ == "__main__":
    main()
