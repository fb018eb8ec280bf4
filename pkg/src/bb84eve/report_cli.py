"""Command-line driver emitting deterministic CSV curve and simulation data.

Three subcommands: ``analytic`` evaluates closed-form information-vs-
disturbance curves, ``simulate`` runs the Monte Carlo engine, and ``compare``
ranks the strategies at one target disturbance. All output is CSV with a
header row, UNIX newlines, and 12-significant-digit numbers, so identical
invocations are byte-identical and suitable for golden-file testing.

Exit status: 0 on success, 2 on usage or configuration errors, 3 when a
simulation produced too few sifted rounds for standard errors.
"""

from __future__ import annotations

import argparse
import math
import re
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .analytic_strategies import (
    ANCILLA_NO_MEMORY,
    ANCILLA_WITH_MEMORY,
    INTERCEPT_RESEND,
    STRATEGIES,
    ancilla_no_memory,
    ancilla_with_memory,
    curve_sweep,
    intercept_resend,
)
from .protocol_sim import (
    AncillaNoMemory,
    AncillaWithMemory,
    InsufficientSampleError,
    InterceptResend,
    NoAttack,
    REVEALED_BASIS_MARKER,
    run_protocol,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INSUFFICIENT_SAMPLE = 3

ANALYTIC_HEADER = "strategy,phi,alpha,fraction,d_bob,i_eve,i_bob"
SIMULATE_HEADER = (
    "strategy,phi,alpha,fraction,n_rounds,seed,qber,qber_se,"
    "i_eve_emp,i_eve_se,f_eve_x,f_eve_y,n_sifted"
)
COMPARE_HEADER = "strategy,phi,alpha,fraction,d_bob,i_eve,in_domain,best_memoryless"
TRACE_HEADER = (
    "round,alice_basis,alice_bit,eve_acted,eve_basis,eve_outcome,eve_guess,"
    "bob_basis,bob_bit,sifted"
)

NO_ATTACK = "none"
ALL_STRATEGIES = "all"
INTERCEPT_DOMAIN_MAX = 0.25


class UsageError(Exception):
    """Invalid flag combination or out-of-range configuration."""


@dataclass(frozen=True)
class SweepSpec:
    """Parsed request for one subcommand run."""

    strategy: str
    phi: float | None = None
    alpha: float | None = None
    fraction: float | None = None
    grid: int | None = None
    rounds: int | None = None
    seed: int = 0
    symmetrize: bool = True
    jobs: int = 1
    d_bob: float | None = None


def parse_angle(text: str) -> float:
    """Angle in radians from a float literal or a pi expression like 3pi/8."""
    s = text.strip().lower().replace(" ", "")
    m = re.fullmatch(r"(-?)(?:(\d+(?:\.\d*)?|\.\d+)\*?)?(pi)?(?:/(\d+(?:\.\d*)?|\.\d+))?", s)
    if not m or (m.group(2) is None and m.group(3) is None):
        raise ValueError(f"cannot parse angle {text!r}")
    sign, coeff, pi_token, divisor = m.groups()
    value = float(coeff) if coeff is not None else 1.0
    if pi_token:
        value *= math.pi
    if divisor is not None:
        div = float(divisor)
        if div == 0.0:
            raise ValueError(f"zero divisor in angle {text!r}")
        value /= div
    return -value if sign else value


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), ".12g")


def _document(header: str, rows: list[list]) -> str:
    lines = [header]
    lines.extend(",".join(_fmt(cell) for cell in row) for row in rows)
    return "\n".join(lines) + "\n"


def _sort_key(point):
    return (
        point.strategy,
        point.d_bob,
        -1.0 if point.phi is None else point.phi,
        -1.0 if point.alpha is None else point.alpha,
        -1.0 if point.fraction is None else point.fraction,
    )


# --- analytic ----------------------------------------------------------------


def cmd_analytic_curves(spec: SweepSpec) -> str:
    """CSV of curve points for one strategy family or the five standard ones."""
    grid = 101 if spec.grid is None else spec.grid
    if grid < 1:
        raise UsageError(f"--grid must be at least 1, got {grid}")
    points = []
    if spec.strategy == ALL_STRATEGIES:
        if spec.phi is not None or spec.alpha is not None or spec.fraction is not None:
            raise UsageError("--strategy all takes no phi/alpha/fraction overrides")
        for phi in (0.0, math.pi / 4):
            points.extend(curve_sweep(INTERCEPT_RESEND, phi, grid=grid))
            points.extend(curve_sweep(ANCILLA_NO_MEMORY, phi, grid=grid))
        points.extend(curve_sweep(ANCILLA_WITH_MEMORY, grid=grid))
    elif spec.strategy == INTERCEPT_RESEND:
        if spec.phi is None:
            raise UsageError("intercept_resend requires --phi")
        if spec.alpha is not None:
            raise UsageError("intercept_resend takes no --alpha")
        values = None if spec.fraction is None else [spec.fraction]
        points = curve_sweep(INTERCEPT_RESEND, spec.phi, grid=grid, values=values)
    elif spec.strategy == ANCILLA_NO_MEMORY:
        if spec.phi is None:
            raise UsageError("ancilla_no_memory requires --phi")
        if spec.fraction is not None:
            raise UsageError("fractional interception applies only to intercept_resend")
        values = None if spec.alpha is None else [spec.alpha]
        points = curve_sweep(ANCILLA_NO_MEMORY, spec.phi, grid=grid, values=values)
    elif spec.strategy == ANCILLA_WITH_MEMORY:
        if spec.phi is not None:
            raise UsageError("ancilla_with_memory takes no --phi")
        if spec.fraction is not None:
            raise UsageError("fractional interception applies only to intercept_resend")
        values = None if spec.alpha is None else [spec.alpha]
        points = curve_sweep(ANCILLA_WITH_MEMORY, grid=grid, values=values)
    else:
        raise UsageError(f"unknown strategy {spec.strategy!r}")

    points.sort(key=_sort_key)
    rows = [[p.strategy, p.phi, p.alpha, p.fraction, p.d_bob, p.i_eve, p.i_bob] for p in points]
    return _document(ANALYTIC_HEADER, rows)


# --- simulate ----------------------------------------------------------------


def _attack_rows(spec: SweepSpec) -> list[tuple]:
    """(attack, phi, alpha, fraction) per CSV row, honoring an optional sweep."""
    if spec.strategy == NO_ATTACK:
        if spec.phi is not None or spec.alpha is not None or spec.fraction is not None:
            raise UsageError("--strategy none takes no attack parameters")
        if spec.grid is not None:
            raise UsageError("--strategy none has nothing to sweep")
        return [(NoAttack(), None, None, None)]

    if spec.strategy == INTERCEPT_RESEND:
        if spec.phi is None:
            raise UsageError("intercept_resend requires --phi")
        if spec.alpha is not None:
            raise UsageError("intercept_resend takes no --alpha")
        if spec.grid is not None:
            if spec.fraction is not None:
                raise UsageError("give either --fraction or --grid, not both")
            fractions = np.linspace(0.0, 1.0, spec.grid)
        else:
            fractions = [1.0 if spec.fraction is None else spec.fraction]
        return [
            (InterceptResend(phi=spec.phi, fraction=float(f), symmetrize=spec.symmetrize),
             spec.phi, None, float(f))
            for f in fractions
        ]

    if spec.fraction is not None:
        raise UsageError("fractional interception applies only to intercept_resend")

    if spec.strategy == ANCILLA_NO_MEMORY:
        if spec.phi is None:
            raise UsageError("ancilla_no_memory requires --phi")
    elif spec.strategy == ANCILLA_WITH_MEMORY:
        if spec.phi is not None:
            raise UsageError("ancilla_with_memory takes no --phi")
    else:
        raise UsageError(f"unknown strategy {spec.strategy!r}")

    if spec.grid is not None:
        if spec.alpha is not None:
            raise UsageError("give either --alpha or --grid, not both")
        alphas = np.linspace(0.0, math.pi / 2, spec.grid)
    else:
        if spec.alpha is None:
            raise UsageError(f"{spec.strategy} requires --alpha (or --grid to sweep it)")
        alphas = [spec.alpha]

    rows = []
    for a in alphas:
        a = float(a)
        if spec.strategy == ANCILLA_NO_MEMORY:
            attack = AncillaNoMemory(alpha=a, phi=spec.phi, symmetrize=spec.symmetrize)
        else:
            attack = AncillaWithMemory(alpha=a)
        rows.append((attack, spec.phi, a, None))
    return rows


def _trace_document(records) -> str:
    rows = []
    for r in records:
        if not r.eve_acted:
            basis = outcome = guess = None
        else:
            basis = r.eve_basis if r.eve_basis == REVEALED_BASIS_MARKER else float(r.eve_basis)
            outcome = r.eve_outcome.name.lower()
            guess = r.eve_guess
        rows.append(
            [r.round_index, r.alice_basis, r.alice_bit, r.eve_acted, basis, outcome,
             guess, r.bob_basis, r.bob_bit, r.sifted]
        )
    return _document(TRACE_HEADER, rows)


def cmd_simulate(spec: SweepSpec, *, keep_trace: bool = False) -> tuple[str, str | None]:
    """Run the engine for each grid point; returns (CSV, optional trace CSV).

    Each row uses seed + row_index so sweeps stay reproducible row by row.
    Tracing is limited to single-row runs because a trace belongs to exactly
    one (attack, seed) pair.
    """
    if spec.rounds is None or spec.rounds < 1:
        raise UsageError("--rounds must be a positive integer")
    if spec.grid is not None and spec.grid < 1:
        raise UsageError(f"--grid must be at least 1, got {spec.grid}")
    if spec.seed < 0:
        raise UsageError("--seed must be non-negative")
    if spec.jobs < 1:
        raise UsageError("--jobs must be at least 1")
    try:
        attack_rows = _attack_rows(spec)
    except ValueError as exc:  # out-of-range attack parameters
        raise UsageError(str(exc)) from exc
    if keep_trace and len(attack_rows) != 1:
        raise UsageError("--trace requires a single-point run, not a sweep")

    rows = []
    trace_doc = None
    for index, (attack, phi, alpha, fraction) in enumerate(attack_rows):
        row_seed = spec.seed + index
        est, trace = run_protocol(
            spec.rounds, attack, row_seed, keep_trace=keep_trace, workers=spec.jobs
        )
        rows.append(
            [
                spec.strategy, phi, alpha, fraction, spec.rounds, row_seed,
                est.qber, est.qber_se, est.eve_mutual_info, est.eve_mutual_info_se,
                est.eve_fidelity_x, est.eve_fidelity_y, est.n_sifted,
            ]
        )
        if keep_trace:
            trace_doc = _trace_document(trace)
    return _document(SIMULATE_HEADER, rows), trace_doc


# --- compare -----------------------------------------------------------------


@dataclass
class _CompareRow:
    strategy: str
    phi: float | None
    alpha: float | None
    fraction: float | None
    d_bob: float
    i_eve: float | None
    in_domain: bool
    memoryless: bool


def cmd_compare(spec: SweepSpec) -> str:
    """Rank the strategies at one target disturbance.

    Emits intercept/resend rows at phi 0 and pi/4 plus the best phi on the
    grid (via fractional interception, defined only up to d_bob = 1/4), the
    same three rows for the no-memory ancilla at the alpha matching the
    disturbance, and the with-memory ancilla. The best memoryless row is
    flagged; out-of-domain intercept/resend rows carry no information value.
    """
    d = spec.d_bob
    if d is None or not (0.0 < d <= 0.5):
        raise UsageError("--d-bob must lie in (0, 0.5]")
    grid = 101 if spec.grid is None else spec.grid
    if grid < 1:
        raise UsageError(f"--grid must be at least 1, got {grid}")
    phi_grid = np.linspace(0.0, math.pi / 4, grid)

    rows: list[_CompareRow] = []

    ir_in_domain = d <= INTERCEPT_DOMAIN_MAX
    fraction = 4.0 * d if ir_in_domain else None

    def ir_info(phi: float) -> float:
        return fraction * intercept_resend(phi).eve_avg_info

    for phi in (0.0, math.pi / 4):
        rows.append(
            _CompareRow(
                INTERCEPT_RESEND, phi, None, fraction, d,
                ir_info(phi) if ir_in_domain else None, ir_in_domain, True,
            )
        )
    if ir_in_domain:
        ir_values = [ir_info(float(phi)) for phi in phi_grid]
        best = int(np.argmax(ir_values))
        best_phi, best_info = float(phi_grid[best]), ir_values[best]
    else:
        best_phi, best_info = None, None
    rows.append(
        _CompareRow(
            INTERCEPT_RESEND + "_opt", best_phi, None, fraction, d,
            best_info, ir_in_domain, True,
        )
    )

    alpha = math.acos(1.0 - 2.0 * d)
    for phi in (0.0, math.pi / 4):
        rows.append(
            _CompareRow(
                ANCILLA_NO_MEMORY, phi, alpha, None, d,
                ancilla_no_memory(alpha, phi).eve_avg_info, True, True,
            )
        )
    nm_values = [ancilla_no_memory(alpha, float(phi)).eve_avg_info for phi in phi_grid]
    best = int(np.argmax(nm_values))
    rows.append(
        _CompareRow(
            ANCILLA_NO_MEMORY + "_opt", float(phi_grid[best]), alpha, None, d,
            nm_values[best], True, True,
        )
    )
    rows.append(
        _CompareRow(
            ANCILLA_WITH_MEMORY, None, alpha, None, d,
            ancilla_with_memory(alpha).eve_avg_info, True, False,
        )
    )

    rows.sort(key=lambda r: (r.strategy, -1.0 if r.phi is None else r.phi))
    candidates = [r.i_eve for r in rows if r.memoryless and r.in_domain and r.i_eve is not None]
    best_value = max(candidates) if candidates else None
    flagged = False
    out = []
    for r in rows:
        if not r.memoryless:
            flag = None
        else:
            is_best = (not flagged) and r.in_domain and r.i_eve is not None and r.i_eve == best_value
            flagged = flagged or is_best
            flag = is_best
        out.append([r.strategy, r.phi, r.alpha, r.fraction, r.d_bob, r.i_eve, r.in_domain, flag])
    return _document(COMPARE_HEADER, out)


# --- argument parsing ---------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bb84eve",
        description="Information-vs-disturbance curves for eavesdropping on BB84.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, strategies, *, grid_help: str) -> None:
        p.add_argument("--strategy", required=True, choices=strategies)
        p.add_argument("--phi", type=parse_angle, default=None,
                       help="measurement angle in radians (accepts pi expressions like pi/4)")
        p.add_argument("--alpha", type=parse_angle, default=None,
                       help="interaction strength in radians")
        p.add_argument("--fraction", type=float, default=None,
                       help="intercepted fraction for intercept_resend")
        p.add_argument("--grid", type=int, default=None, help=grid_help)
        p.add_argument("--out", type=Path, default=None, help="write CSV here instead of stdout")

    p_analytic = sub.add_parser("analytic", help="closed-form curve points as CSV")
    common(p_analytic, (*STRATEGIES, ALL_STRATEGIES),
           grid_help="points per curve family (default 101)")

    p_sim = sub.add_parser("simulate", help="Monte Carlo protocol runs as CSV")
    common(p_sim, (NO_ATTACK, *STRATEGIES),
           grid_help="sweep the natural parameter over this many points")
    p_sim.add_argument("--rounds", type=int, required=True, help="protocol rounds per row")
    p_sim.add_argument("--seed", type=int, default=0, help="base seed; row i uses seed + i")
    p_sim.add_argument("--jobs", type=int, default=1,
                       help="worker threads (output is identical for any value)")
    p_sim.add_argument("--no-symmetrize", action="store_true",
                       help="always measure at phi instead of coin-flipping with its companion")
    p_sim.add_argument("--trace", type=Path, default=None,
                       help="also dump one CSV row per protocol round (single-point runs only)")

    p_cmp = sub.add_parser("compare", help="rank strategies at one disturbance")
    p_cmp.add_argument("--d-bob", dest="d_bob", type=float, required=True,
                       help="target disturbance in (0, 0.5]")
    p_cmp.add_argument("--grid", type=int, default=None,
                       help="phi grid size for the optimized rows (default 101)")
    p_cmp.add_argument("--out", type=Path, default=None)
    return parser


def _spec_from_args(args: argparse.Namespace) -> SweepSpec:
    return SweepSpec(
        strategy=getattr(args, "strategy", ""),
        phi=getattr(args, "phi", None),
        alpha=getattr(args, "alpha", None),
        fraction=getattr(args, "fraction", None),
        grid=args.grid,
        rounds=getattr(args, "rounds", None),
        seed=getattr(args, "seed", 0),
        symmetrize=not getattr(args, "no_symmetrize", False),
        jobs=getattr(args, "jobs", 1),
        d_bob=getattr(args, "d_bob", None),
    )


def _write(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text)


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits on its own for bad flags or --help; fold that into
        # the return-code contract so callers never see the exception
        return int(exc.code or 0)
    spec = _spec_from_args(args)
    try:
        if args.command == "analytic":
            _write(cmd_analytic_curves(spec), args.out)
        elif args.command == "simulate":
            csv, trace = cmd_simulate(spec, keep_trace=args.trace is not None)
            _write(csv, args.out)
            if args.trace is not None:
                args.trace.write_text(trace)
        else:
            _write(cmd_compare(spec), args.out)
    except (UsageError, ValueError) as exc:
        # range checks in the strategy and engine layers raise ValueError
        # for out-of-domain parameters, which is a usage problem here
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InsufficientSampleError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INSUFFICIENT_SAMPLE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
