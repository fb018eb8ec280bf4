#!/usr/bin/env python3
"""Cross-check the Monte Carlo engine against the closed-form predictions.

Runs a battery of attack configurations, compares the empirical QBER and
mutual information to their analytic targets, and prints one line per
configuration with z-scores. Exits nonzero if any statistic lands more than
four standard errors from its target, so the script doubles as a slow gate.
"""

import argparse
import math
import sys

from bb84eve.analytic_strategies import (
    ancilla_no_memory,
    ancilla_with_memory,
    intercept_resend,
)
from bb84eve.protocol_sim import (
    AncillaNoMemory,
    AncillaWithMemory,
    InterceptResend,
    run_protocol,
)


def battery():
    """(label, attack, expected_qber, expected_info) for each configuration."""
    cases = []
    for phi, tag in ((0.0, "0"), (math.pi / 8, "pi/8"), (math.pi / 4, "pi/4")):
        report = intercept_resend(phi)
        cases.append(
            (
                f"intercept phi={tag}",
                InterceptResend(phi=phi),
                report.bob_overall.disturbance,
                report.eve_avg_info,
            )
        )
    report = intercept_resend(0.0)
    cases.append(
        (
            "intercept phi=0 f=0.4",
            InterceptResend(phi=0.0, fraction=0.4),
            0.4 * report.bob_overall.disturbance,
            0.4 * report.eve_avg_info,
        )
    )
    for alpha, phi, tag in ((1.0, math.pi / 8, "1.0,pi/8"), (math.pi / 2, math.pi / 4, "pi/2,pi/4")):
        probe = ancilla_no_memory(alpha, phi)
        cases.append(
            (
                f"ancilla-nm a,phi={tag}",
                AncillaNoMemory(alpha=alpha, phi=phi),
                probe.bob_overall.disturbance,
                probe.eve_avg_info,
            )
        )
    for alpha, tag in ((math.pi / 3, "pi/3"), (math.pi / 2, "pi/2")):
        stored = ancilla_with_memory(alpha)
        cases.append(
            (
                f"ancilla-wm a={tag}",
                AncillaWithMemory(alpha=alpha),
                stored.bob_overall.disturbance,
                stored.eve_avg_info,
            )
        )
    return cases


def z_score(value, target, se):
    if se == 0.0:
        return 0.0 if value == target else math.inf
    return (value - target) / se


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--rounds", type=int, default=1_000_000)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--jobs", type=int, default=1)
    args = parser.parse_args(argv)

    print(
        f"{'configuration':<24} {'qber':>9} {'target':>9} {'z':>6}   "
        f"{'info':>9} {'target':>9} {'z':>6}   verdict"
    )
    worst = 0.0
    for index, (label, attack, want_qber, want_info) in enumerate(battery()):
        est, _ = run_protocol(
            args.rounds, attack, seed=args.seed + index, workers=args.jobs
        )
        qz = z_score(est.qber, want_qber, est.qber_se)
        iz = z_score(est.eve_mutual_info, want_info, est.eve_mutual_info_se)
        worst = max(worst, abs(qz), abs(iz))
        verdict = "ok" if max(abs(qz), abs(iz)) <= 4.0 else "DEVIANT"
        print(
            f"{label:<24} {est.qber:>9.5f} {want_qber:>9.5f} {qz:>6.2f}   "
            f"{est.eve_mutual_info:>9.5f} {want_info:>9.5f} {iz:>6.2f}   {verdict}"
        )
    print(f"worst |z| = {worst:.2f} over {args.rounds} rounds per case")
    return 0 if worst <= 4.0 else 1


if __name__ == "__main__":
    sys.exit(main())
