#!/usr/bin/env python3
# Copyright 2026 The mvr Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Writes the golden files with a standalone encoder (stdlib only).

The values are small dyadic rationals, so every dot product is exact and the
expected bytes do not depend on any floating-point library.
"""

import json
import struct
from fractions import Fraction
from pathlib import Path

HERE = Path(__file__).resolve().parent


def golden_value(doc, i):
    return ((doc * 13 + i * 7) % 17 - 8) / 8.0


def golden_docs():
    # Two docs, 4 patches (2x2 grid), dim 3.
    docs = []
    for d, name in enumerate(["doc-a", "doc-b"]):
        docs.append((name, 4, [golden_value(d, i) for i in range(12)]))
    # One non-dyadic value to pin binary16 rounding: float32(0.1).
    name, n, vals = docs[1]
    vals[5] = struct.unpack("<f", struct.pack("<f", 0.1))[0]
    return docs


def mvec(dtype_code, dim, docs, meta):
    blob = json.dumps(meta, separators=(",", ":"), sort_keys=True).encode()
    out = b"MVEC" + struct.pack("<IBIQI", 1, dtype_code, dim, len(docs), len(blob)) + blob
    for name, n, vals in docs:
        raw = name.encode()
        out += struct.pack("<H", len(raw)) + raw + struct.pack("<I", n)
        fmt = "<e" if dtype_code == 1 else "<f"
        for v in vals:
            out += struct.pack(fmt, v)
    return out


def fmt_number(x):
    return str(int(x)) if x == int(x) else repr(x)


def simmap():
    # Query token and a 3x4 grid of dim-4 patches.
    q = [0.5, -1.0, 0.25, 2.0]
    patches = [[((r * 5 + c * 3 + k) % 9 - 4) / 4.0 for k in range(4)] for r in range(3) for c in range(4)]
    vals = [sum(a * b for a, b in zip(q, p)) for p in patches]
    csv = "".join(",".join(fmt_number(v) for v in vals[r * 4:(r + 1) * 4]) + "\n" for r in range(3))
    lo, hi = min(vals), max(vals)
    pix = []
    for v in vals:
        unit = Fraction(v) - Fraction(lo)
        scaled = unit * 255 / (Fraction(hi) - Fraction(lo)) + Fraction(1, 2)
        pix.append(int(scaled // 1))
    pgm = b"P5\n4 3\n255\n" + bytes(pix)
    return q, patches, csv, pgm


def main():
    meta = {"grid_cols": "2", "grid_rows": "2", "name": "golden"}
    (HERE / "golden_f32.mvec").write_bytes(mvec(0, 3, golden_docs(), meta))
    (HERE / "golden_f16.mvec").write_bytes(mvec(1, 3, golden_docs(), meta))
    _, _, csv, pgm = simmap()
    (HERE / "simmap.csv").write_text(csv)
    (HERE / "simmap.pgm").write_bytes(pgm)


if __name__ == "__main__":
    main()
