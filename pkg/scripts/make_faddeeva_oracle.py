"""Freeze an arbitrary-precision table of w(z) and erfc(z) on |z| <= 10.

Run once; the test suite reads tests/data/faddeeva_oracle.csv and never
imports the package under test here.
"""

import argparse
import csv
from pathlib import Path

import mpmath as mp


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default=str(Path(__file__).resolve().parents[1] / "tests" / "data" / "faddeeva_oracle.csv"))
    ap.add_argument("--step", type=float, default=0.5)
    ap.add_argument("--dps", type=int, default=40)
    args = ap.parse_args()
    mp.mp.dps = args.dps
    n = int(round(10 / args.step))
    pts = [complex(i * args.step, j * args.step) for i in range(-n, n + 1) for j in range(-n, n + 1)]
    pts = [z for z in pts if abs(z) <= 10] + [1 + 1j, 0.5 + 1j]
    with open(args.out, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["re_z", "im_z", "re_w", "im_w", "re_erfc", "im_erfc"])
        for z in pts:
            zm = mp.mpc(z.real, z.imag)
            w = mp.exp(-zm**2) * mp.erfc(-1j * zm)
            e = mp.erfc(zm)
            wr.writerow([repr(z.real), repr(z.imag)] + [mp.nstr(v, 25) for v in (w.real, w.imag, e.real, e.imag)])
    print(f"wrote {len(pts)} points to {args.out}")


if __name__ == "__main__":
    main()
