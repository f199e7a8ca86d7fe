#!/usr/bin/env python
"""Freeze cubic-field reference values from PARI for the test suite.

Tooling only (needs ``cypari``).  Draws monic cubics x^3 + b x^2 + c x + d
with negative discriminant and small coefficients, asks PARI for the field
discriminant, class number, regulator, the decomposition of 2 and the 2-adic
valuation of N(eps - 1) for its fundamental unit, and writes JSON.

    python tools/cubic_oracle.py --count 120 --out tests/data/cubic_fields.json
"""

import argparse
import json
import random

from cypari import pari


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--count", type=int, default=120)
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--out", required=True)
    args = ap.parse_args()

    rng = random.Random(args.seed)
    fu = pari("(K)->lift(K.fu[1])")
    norm_minus_one = pari("(f,p)->norm(Mod(f-1,p))")
    rows, seen = [], set()
    while len(rows) < args.count:
        b, c, d = (rng.randint(-30, 30) for _ in range(3))
        pol = pari(f"x^3+({b})*x^2+({c})*x+({d})")
        if d == 0 or not pari.polisirreducible(pol):
            continue
        disc = int(pari.poldisc(pol))
        if disc >= 0 or abs(disc) > 3 * 10**6 or (b, c, d) in seen:
            continue
        seen.add((b, c, d))
        K = pari.bnfinit(pol, 1)
        nf = K[6]
        dec = pari.idealprimedec(nf, 2)
        total = len(dec) == 1 and int(dec[0][2]) == 3
        v = int(pari.valuation(norm_minus_one(fu(K), pol), 2)) if total else None
        rows.append({"cubic": [b, c, d], "poly_disc": disc, "field_disc": int(nf[2]),
                     "class_number": int(K[7][0][0]), "regulator": round(float(K[7][1]), 6),
                     "two_totally_ramified": total, "unit_minus_one_v2": v})
    with open(args.out, "w") as fh:
        json.dump(rows, fh, indent=1)


if __name__ == "__main__":
    main()
