"""Run the CLI over every config in scripts/configs and plot-ready the CSVs.

Exit code 2 from a run means "finished with flags" (for instance the growing
divergence verdict); it is reported, not treated as a failure.
"""

import argparse
import sys
from pathlib import Path

from pointflux.cli import PLOT_HEADERS, emit_plot_data, main as cli_main

HERE = Path(__file__).resolve().parent

RUNS = [
    ("evolve", "evolve.cfg"),
    ("spectral", "evolve.cfg"),
    ("identity", "fas_positive.cfg"),
    ("fas", "fas_resonant.cfg"),
    ("fas", "fas_positive.cfg"),
    ("fas", "fas_bound.cfg"),
    ("decay", "decay.cfg"),
    ("resonance", "resonance_nonw.cfg"),
    ("resonance", "resonance_w.cfg"),
]


def _plot_kind(csv_path: Path):
    header = csv_path.read_text().splitlines()[0].split(",")
    for kind, expected in PLOT_HEADERS.items():
        if header == expected:
            return kind
    return None


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="experiments")
    ap.add_argument("--threads", type=int, default=None)
    ap.add_argument("--only", nargs="*", help="commands to run (default: all)")
    args = ap.parse_args()
    worst = 0
    for cmd, cfg in RUNS:
        if args.only and cmd not in args.only:
            continue
        out = Path(args.out) / f"{cmd}_{Path(cfg).stem}"
        argv = [cmd, "--config", str(HERE / "configs" / cfg), "--out", str(out)]
        if args.threads:
            argv += ["--threads", str(args.threads)]
        code = cli_main(argv)
        print(f"{cmd:10s} {cfg:22s} exit {code}")
        if code == 1:
            worst = 1
        for csv_path in sorted(out.glob("*.csv")):
            kind = _plot_kind(csv_path)
            if kind:
                emit_plot_data(csv_path, kind)
    return worst


if __name__ == "__main__":
    sys.exit(main())
