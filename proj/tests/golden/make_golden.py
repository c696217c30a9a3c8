#!/usr/bin/env python3
"""Regenerates the golden sampling transcripts from first principles.

Implements the draw recipe independently of the C++ library (hashlib vs
OpenSSL, Python integers vs __int128) so the committed files cross-check
two implementations byte for byte:

  u_k  = first 8 bytes, big-endian, of SHA-256(seed + "," + str(k))
  SRS  : position = floor(u_k * N / 2^64) + 1, skipping repeats
  PPEB : integer weights over the bounds' common denominator; draw k picks
         the first unit whose cumulative weight w has w * 2^64 >= u_k * W

Run from anywhere; writes golden_srs.csv and golden_ppeb.csv next to
itself. The unit tests compare these files against the library's
transcripts, so regenerate only if the recipe itself changes.
"""

import hashlib
import os
from fractions import Fraction

OUT_DIR = os.path.dirname(os.path.abspath(__file__))

SEED = "TEST-SEED-2018"
SRS_POPULATION = 100
SRS_DRAWS = 5
PPEB_BOUNDS = [("pct-1", Fraction(3, 4)), ("pct-2", Fraction(1, 4))]
PPEB_DRAWS = 8


def digest_hex(seed: str, k: int) -> str:
    return hashlib.sha256(f"{seed},{k}".encode()).hexdigest()


def u64(seed: str, k: int) -> int:
    return int(digest_hex(seed, k)[:16], 16)


def plan_lines(rows):
    out = ["schema:plan.v1", "draw_index,digest_hex,selected_id"]
    out += [f"{k},{h},{sel}" for k, h, sel in rows]
    return "\n".join(out) + "\n"


def srs_transcript():
    rows = []
    seen = set()
    k = 0
    while len(rows) < SRS_DRAWS:
        k += 1
        x = u64(SEED, k)
        pos = (x * SRS_POPULATION >> 64) + 1
        if pos in seen:
            continue
        seen.add(pos)
        rows.append((k, digest_hex(SEED, k), str(pos)))
    return rows


def ppeb_transcript():
    den = 1
    for _, b in PPEB_BOUNDS:
        den = den * b.denominator // __import__("math").gcd(den, b.denominator)
    weights = [(unit, b.numerator * (den // b.denominator)) for unit, b in PPEB_BOUNDS]
    total = sum(w for _, w in weights)

    rows = []
    for k in range(1, PPEB_DRAWS + 1):
        x = u64(SEED, k)
        target = (x * total + (1 << 64) - 1) >> 64
        cum = 0
        for unit, w in weights:
            cum += w
            if cum >= target:
                rows.append((k, digest_hex(SEED, k), unit))
                break
    return rows


def main():
    with open(os.path.join(OUT_DIR, "golden_srs.csv"), "w") as f:
        f.write(plan_lines(srs_transcript()))
    with open(os.path.join(OUT_DIR, "golden_ppeb.csv"), "w") as f:
        f.write(plan_lines(ppeb_transcript()))
    print("wrote golden_srs.csv and golden_ppeb.csv")


if __name__ == "__main__":
    main()
