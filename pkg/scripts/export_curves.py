#!/usr/bin/env python3
"""Export the analytic information-versus-disturbance curves as CSV.

By default this writes the combined five-family sweep (the same document the
golden test file was frozen from) to stdout. With --out-dir it writes one
file per curve family instead, which is handy for plotting tools that want
separate series.
"""

import argparse
import sys
from pathlib import Path

from bb84eve.report_cli import SweepSpec, cmd_analytic_curves

FAMILIES = [
    ("intercept_resend_phi0", "intercept_resend", "0"),
    ("intercept_resend_phi_pi4", "intercept_resend", "pi/4"),
    ("ancilla_no_memory_phi0", "ancilla_no_memory", "0"),
    ("ancilla_no_memory_phi_pi4", "ancilla_no_memory", "pi/4"),
    ("ancilla_with_memory", "ancilla_with_memory", None),
]


def parse_args(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--grid", type=int, default=101, help="points per curve")
    parser.add_argument("--out", type=Path, help="combined CSV path (default stdout)")
    parser.add_argument(
        "--out-dir", type=Path, help="write one CSV per curve family here"
    )
    return parser.parse_args(argv)


def main(argv=None) -> int:
    args = parse_args(argv)
    if args.out_dir is not None:
        args.out_dir.mkdir(parents=True, exist_ok=True)
        from bb84eve.report_cli import parse_angle

        for name, strategy, phi_text in FAMILIES:
            phi = parse_angle(phi_text) if phi_text is not None else None
            spec = SweepSpec(strategy=strategy, phi=phi, grid=args.grid)
            path = args.out_dir / f"{name}.csv"
            path.write_text(cmd_analytic_curves(spec))
            print(f"wrote {path}", file=sys.stderr)
        return 0

    spec = SweepSpec(strategy="all", grid=args.grid)
    document = cmd_analytic_curves(spec)
    if args.out is None:
        sys.stdout.write(document)
    else:
        args.out.write_text(document)
        print(f"wrote {args.out}", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
