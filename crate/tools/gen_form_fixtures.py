#!/usr/bin/env python3
"""Regenerate fixtures/forms/*.json: rational weight-2 newforms on Gamma0(N), N <= 100.

Forms at each level are sorted lexicographically by (a_1, a_2, ...), which is the
order LMFDB uses to assign the Hecke orbit letters for dimension-1 newforms.
Requires cypari2.
"""
import json
import string
import sys
from pathlib import Path

import cypari2

COEFFS = 400
MAX_LEVEL = 100


def main(out_dir):
    pari = cypari2.Pari()
    pari.allocatemem(2 * 10**9)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    total = 0
    for level in range(1, MAX_LEVEL + 1):
        mf = pari(f"mfinit([{level},2],0)")
        basis = pari.mfeigenbasis(mf)
        fields = pari.mffields(mf)
        forms = []
        for i in range(len(basis)):
            if pari.poldegree(fields[i]) == 1:
                coeffs = [int(x) for x in pari.mfcoefs(basis[i], COEFFS)]
                forms.append(coeffs[1:])
        forms.sort()
        for idx, an in enumerate(forms):
            label = f"{level}.2.a.{string.ascii_lowercase[idx]}"
            record = {"label": label, "level": level, "weight": 2, "an": an, "source": "fixture"}
            (out / f"{label}.json").write_text(json.dumps(record) + "\n")
            total += 1
    print(f"wrote {total} forms")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "fixtures/forms")
