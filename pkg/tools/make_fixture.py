#!/usr/bin/env python
"""Build the allcurves/degphi test fixture from PARI's elldata package.

Tooling only: needs ``cypari`` and an unpacked ``elldata`` directory
(e.g. from the ``passagemath-pari-elldata`` wheel).  The library itself
never imports PARI.

    python tools/make_fixture.py --elldata DIR --max 3000 --extra 24859 \
        --out tests/data

Ranks are the number of Mordell-Weil generators stored in elldata,
torsion orders come from ``elltors`` and modular degrees from
``ellmoddegree`` on the optimal curve of each isogeny class.
"""

import argparse
import os
import re

import cypari

pari = cypari.pari
pari.allocatemem(2 * 10**9)

LABEL = re.compile(r"^(\d+)([a-z]+)(\d+)$")

# Cremona's numbering puts the optimal curve first except in class 990h.
OPTIMAL_EXCEPTIONS = {"990h": 3}


def load_block(path):
    data = pari(open(path).read())
    for entry in data:
        conductor = int(entry[0])
        for k in range(1, len(entry)):
            row = entry[k]
            yield conductor, str(row[0]), [int(a) for a in row[1]], len(row[2])


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--elldata", required=True)
    ap.add_argument("--max", type=int, default=3000)
    ap.add_argument("--extra", type=int, nargs="*", default=[])
    ap.add_argument("--out", default="tests/data")
    args = ap.parse_args()

    wanted = set(range(1, args.max + 1)) | set(args.extra)
    blocks = sorted({n // 1000 for n in wanted})
    rows = []
    for b in blocks:
        path = os.path.join(args.elldata, "ell%d" % b)
        for conductor, label, ainvs, rank in load_block(path):
            if conductor in wanted:
                rows.append((conductor, label, ainvs, rank))

    allc = open(os.path.join(args.out, "allcurves.txt"), "w")
    degf = open(os.path.join(args.out, "degphi.txt"), "w")
    allc.write("# conductor class number [a1,a2,a3,a4,a6] rank torsion\n")
    degf.write("# conductor class number [a1,a2,a3,a4,a6] degree (optimal curves)\n")
    for conductor, label, ainvs, rank in rows:
        m = LABEL.match(label)
        iso, num = m.group(2), int(m.group(3))
        E = pari.ellinit(ainvs)
        tors = int(pari.elltors(E)[0])
        inv = "[" + ",".join(str(a) for a in ainvs) + "]"
        allc.write("%d %s %d %s %d %d\n" % (conductor, iso, num, inv, rank, tors))
        if num == OPTIMAL_EXCEPTIONS.get("%d%s" % (conductor, iso), 1):
            deg = int(pari.ellmoddegree(E))
            degf.write("%d %s %d %s %d\n" % (conductor, iso, num, inv, deg))
    allc.close()
    degf.close()


if __name__ == "__main__":
    main()
