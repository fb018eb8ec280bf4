"""Monte Carlo BB84 engine with deterministic counter-based randomness.

Every round consumes one fixed-width row of 8 uniforms from a Philox stream
keyed by the run seed, so results are bit-identical for a given
(n_rounds, attack, seed) regardless of chunking or thread count. Column
semantics, fixed for the life of the format:

    0 Alice basis   1 Alice bit      2 Bob basis      3 intercept coin
    4 Eve basis coin 5 Eve outcome / joint outcome draw
    6 Bob outcome (intercept/resend and untouched rounds)
    7 tie-break coin, doubling as the guess coin on untouched rounds

A value u maps to index (u >= 0.5), so u < 0.5 means x / bit 0 / PLUS.

All sampling probabilities are Born-rule values computed from raw state
vectors via quantum_core at run start; the engine never consults the
closed-form module, which keeps the two routes independent for
cross-validation.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .infotheory import mutual_information
from .quantum_core import (
    EquatorBasis,
    Outcome,
    apply_eve_unitary,
    make_bb84_state,
    joint_outcome_probabilities,
    outcome_probabilities,
)

UNIFORMS_PER_ROUND = 8
# Philox yields 4 doubles per 128-bit counter block, so one 8-uniform round
# row is exactly 2 blocks; advancing 2*start blocks aligns a chunk with the
# corresponding rows of a one-shot draw.
_BLOCKS_PER_ROUND = 2
_DEFAULT_CHUNK = 1 << 18

TIE_TOL = 1e-12
MIN_SIFTED = 100

BASIS_LABELS = ("x", "y")
BASIS_ANGLES = (0.0, math.pi / 2)
REVEALED_BASIS_MARKER = "revealed"

_PHI_MAX = math.pi / 4
_ALPHA_MAX = math.pi / 2


class InsufficientSampleError(Exception):
    """Raised when too few sifted rounds exist to report standard errors."""


def _check_range(name: str, value: float, lo: float, hi: float) -> None:
    if not (lo <= value <= hi):
        raise ValueError(f"{name} must lie in [{lo!r}, {hi!r}], got {value!r}")


@dataclass(frozen=True)
class NoAttack:
    """Eve stays out of the channel entirely."""


@dataclass(frozen=True)
class InterceptResend:
    """Measure a fraction of the qubits at angle phi and forward the eigenstate.

    With symmetrize on, each intercepted round measures at phi or its
    companion pi/2 - phi on a fair coin.
    """

    phi: float
    fraction: float = 1.0
    symmetrize: bool = True

    def __post_init__(self) -> None:
        _check_range("phi", self.phi, 0.0, _PHI_MAX)
        _check_range("fraction", self.fraction, 0.0, 1.0)


@dataclass(frozen=True)
class AncillaNoMemory:
    """Entangle every qubit, measure the ancilla immediately at angle phi."""

    alpha: float
    phi: float
    symmetrize: bool = True

    def __post_init__(self) -> None:
        _check_range("alpha", self.alpha, 0.0, _ALPHA_MAX)
        _check_range("phi", self.phi, 0.0, _PHI_MAX)


@dataclass(frozen=True)
class AncillaWithMemory:
    """Entangle every qubit, store the ancilla, measure in the revealed basis."""

    alpha: float

    def __post_init__(self) -> None:
        _check_range("alpha", self.alpha, 0.0, _ALPHA_MAX)


AttackConfig = NoAttack | InterceptResend | AncillaNoMemory | AncillaWithMemory


@dataclass(frozen=True)
class TrialRecord:
    """One protocol round. eve_basis / eve_outcome / eve_guess exist iff Eve acted."""

    round_index: int
    alice_basis: str
    alice_bit: int
    eve_acted: bool
    eve_basis: float | str | None
    eve_outcome: Outcome | None
    eve_guess: int | None
    bob_basis: str
    bob_bit: int
    sifted: bool

    def __post_init__(self) -> None:
        if self.sifted != (self.alice_basis == self.bob_basis):
            raise ValueError("sifted flag must match basis agreement")
        present = (self.eve_basis is not None, self.eve_outcome is not None, self.eve_guess is not None)
        if any(present) != self.eve_acted or not (all(present) == any(present)):
            raise ValueError("eve fields must be present exactly when eve acted")


@dataclass(frozen=True)
class SimEstimate:
    """Empirical counterparts of the analytic quantities, over sifted rounds.

    eve_mutual_info is the full-key value: a weighted average of per-context
    plug-in MI, where a context is (acted, Eve's measurement basis, revealed
    basis) and untouched rounds enter as fair-coin guesses.
    eve_mutual_info_intercepted restricts to rounds Eve touched. Per-basis
    Eve fidelities condition on the revealed basis and on Eve having acted.
    Fields are None where the corresponding conditioning set is empty.
    """

    n_rounds: int
    n_sifted: int
    n_intercepted: int
    qber: float
    qber_se: float
    qber_x: float | None
    qber_y: float | None
    eve_mutual_info: float | None
    eve_mutual_info_se: float | None
    eve_mutual_info_intercepted: float | None
    eve_mutual_info_intercepted_se: float | None
    eve_fidelity_x: float | None
    eve_fidelity_x_se: float | None
    eve_fidelity_y: float | None
    eve_fidelity_y_se: float | None


@dataclass
class RoundCounts:
    """Order-insensitive integer accumulators for a (partial) run.

    guess_counts is indexed [acted, t, revealed_basis, alice_bit, guess],
    where t distinguishes Eve's coin-chosen measurement basis (0 also covers
    the revealed-basis and untouched cases). Only sifted rounds are counted.
    """

    n_rounds: int
    n_sifted_by_basis: np.ndarray
    n_errors_by_basis: np.ndarray
    guess_counts: np.ndarray

    @classmethod
    def zeros(cls) -> "RoundCounts":
        return cls(
            n_rounds=0,
            n_sifted_by_basis=np.zeros(2, dtype=np.int64),
            n_errors_by_basis=np.zeros(2, dtype=np.int64),
            guess_counts=np.zeros((2, 2, 2, 2, 2), dtype=np.int64),
        )

    def merge(self, other: "RoundCounts") -> None:
        self.n_rounds += other.n_rounds
        self.n_sifted_by_basis += other.n_sifted_by_basis
        self.n_errors_by_basis += other.n_errors_by_basis
        self.guess_counts += other.guess_counts

    @property
    def n_sifted(self) -> int:
        return int(self.n_sifted_by_basis.sum())


def _ml_decision(eve_angle: float, revealed_angle: float, correlation_scale: float) -> int:
    """Maximum-likelihood interpretation of an equatorial outcome.

    The correlation between Eve's outcome bit at angle t and the key bit in
    the revealed angle-rho basis is scale * cos(t - rho). Returns +1 (guess
    the outcome bit), -1 (guess its complement), or 0 (exact tie).
    """
    corr = correlation_scale * math.cos(eve_angle - revealed_angle)
    if corr > TIE_TOL:
        return 1
    if corr < -TIE_TOL:
        return -1
    return 0


def interpret_outcome(
    eve_basis,
    eve_outcome: Outcome,
    revealed_basis,
    *,
    correlation_scale: float = 1.0,
    tie_coin: float | None = None,
) -> int:
    """Convert Eve's stored outcome into a bit guess after the basis reveal.

    eve_basis is an EquatorBasis, a plain angle, or the marker "revealed"
    (stored-ancilla attack: she measured in the revealed basis itself).
    revealed_basis is "x", "y", or an EquatorBasis. correlation_scale is 1
    for direct interception and sin(alpha) for ancilla outcomes. Exact ties
    need tie_coin, a uniform from the round's stream.
    """
    if isinstance(revealed_basis, EquatorBasis):
        revealed_angle = revealed_basis.phi
    elif revealed_basis in BASIS_LABELS:
        revealed_angle = BASIS_ANGLES[BASIS_LABELS.index(revealed_basis)]
    else:
        raise ValueError(f"revealed_basis must be 'x', 'y', or an EquatorBasis, got {revealed_basis!r}")
    if eve_basis == REVEALED_BASIS_MARKER:
        eve_angle = revealed_angle
    elif isinstance(eve_basis, EquatorBasis):
        eve_angle = eve_basis.phi
    else:
        eve_angle = float(eve_basis)
    decision = _ml_decision(eve_angle, revealed_angle, correlation_scale)
    if decision == 1:
        return eve_outcome.bit
    if decision == -1:
        return 1 - eve_outcome.bit
    if tie_coin is None:
        raise ValueError("outcome carries no information about this basis; a tie_coin is required")
    return int(tie_coin >= 0.5)


# --- Born-rule tables for the vectorized sampler ---------------------------


def _protocol_states():
    return [
        [make_bb84_state(EquatorBasis(BASIS_ANGLES[b]), Outcome.from_bit(bit)) for bit in (0, 1)]
        for b in (0, 1)
    ]


def _direct_bob_table() -> np.ndarray:
    """p_plus[alice_basis, alice_bit, bob_basis] for an untouched qubit."""
    states = _protocol_states()
    table = np.empty((2, 2, 2), dtype=np.float64)
    for ab in (0, 1):
        for abit in (0, 1):
            for bb in (0, 1):
                table[ab, abit, bb] = outcome_probabilities(
                    states[ab][abit], EquatorBasis(BASIS_ANGLES[bb])
                )[0]
    return table


@dataclass
class _EngineTables:
    variant: str
    fraction: float = 1.0
    symmetrize: bool = False
    eve_angles: tuple[float, float] | None = None
    p_direct: np.ndarray | None = None
    p_eve: np.ndarray | None = None
    p_forward: np.ndarray | None = None
    joint_cdf: np.ndarray | None = None
    decisions: np.ndarray | None = None


def _build_tables(attack: AttackConfig) -> _EngineTables:
    states = _protocol_states()
    if isinstance(attack, NoAttack):
        return _EngineTables(variant="none", fraction=0.0, p_direct=_direct_bob_table())

    if isinstance(attack, InterceptResend):
        angles = (attack.phi, math.pi / 2 - attack.phi)
        p_eve = np.empty((2, 2, 2), dtype=np.float64)
        p_forward = np.empty((2, 2, 2), dtype=np.float64)
        for t, angle in enumerate(angles):
            basis = EquatorBasis(angle)
            for ab in (0, 1):
                for abit in (0, 1):
                    p_eve[t, ab, abit] = outcome_probabilities(states[ab][abit], basis)[0]
            for e in (0, 1):
                forwarded = basis.eigenstate(Outcome.from_bit(e))
                for bb in (0, 1):
                    p_forward[t, e, bb] = outcome_probabilities(
                        forwarded, EquatorBasis(BASIS_ANGLES[bb])
                    )[0]
        decisions = np.array(
            [[_ml_decision(angle, rho, 1.0) for rho in BASIS_ANGLES] for angle in angles],
            dtype=np.int64,
        )
        return _EngineTables(
            variant="intercept_resend",
            fraction=attack.fraction,
            symmetrize=attack.symmetrize,
            eve_angles=angles,
            p_direct=_direct_bob_table(),
            p_eve=p_eve,
            p_forward=p_forward,
            decisions=decisions,
        )

    if isinstance(attack, AncillaNoMemory):
        angles = (attack.phi, math.pi / 2 - attack.phi)
        scale = math.sin(attack.alpha)
        cdf = np.empty((2, 2, 2, 2, 4), dtype=np.float64)
        for t, angle in enumerate(angles):
            eve_basis = EquatorBasis(angle)
            for ab in (0, 1):
                for abit in (0, 1):
                    entangled = apply_eve_unitary(states[ab][abit], attack.alpha)
                    for bb in (0, 1):
                        table = joint_outcome_probabilities(
                            entangled, EquatorBasis(BASIS_ANGLES[bb]), eve_basis
                        )
                        cdf[t, ab, abit, bb] = np.cumsum(table.reshape(4))
        decisions = np.array(
            [[_ml_decision(angle, rho, scale) for rho in BASIS_ANGLES] for angle in angles],
            dtype=np.int64,
        )
        return _EngineTables(
            variant="ancilla_no_memory",
            symmetrize=attack.symmetrize,
            eve_angles=angles,
            joint_cdf=cdf,
            decisions=decisions,
        )

    if isinstance(attack, AncillaWithMemory):
        scale = math.sin(attack.alpha)
        cdf = np.empty((2, 2, 2, 4), dtype=np.float64)
        for ab in (0, 1):
            eve_basis = EquatorBasis(BASIS_ANGLES[ab])
            for abit in (0, 1):
                entangled = apply_eve_unitary(states[ab][abit], attack.alpha)
                for bb in (0, 1):
                    table = joint_outcome_probabilities(
                        entangled, EquatorBasis(BASIS_ANGLES[bb]), eve_basis
                    )
                    cdf[ab, abit, bb] = np.cumsum(table.reshape(4))
        decisions = np.array(
            [_ml_decision(rho, rho, scale) for rho in BASIS_ANGLES], dtype=np.int64
        )
        return _EngineTables(
            variant="ancilla_with_memory",
            joint_cdf=cdf,
            decisions=decisions,
        )

    raise ValueError(f"unsupported attack config: {attack!r}")


# --- chunk execution --------------------------------------------------------


def _chunk_uniforms(seed: int, start: int, size: int) -> np.ndarray:
    gen = np.random.Philox(key=seed)
    if start:
        gen.advance(start * _BLOCKS_PER_ROUND)
    return np.random.Generator(gen).random((size, UNIFORMS_PER_ROUND))


def _joint_draw(cdf_rows: np.ndarray, u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    cell = np.minimum((u[:, None] >= cdf_rows).sum(axis=1), 3)
    return cell >> 1, cell & 1


def _resolve_guess(decisions: np.ndarray, e: np.ndarray, coin: np.ndarray) -> np.ndarray:
    return np.where(decisions == 1, e, np.where(decisions == -1, 1 - e, coin))


def _run_chunk(
    tables: _EngineTables, seed: int, start: int, size: int, keep_trace: bool
) -> tuple[RoundCounts, list[TrialRecord] | None]:
    u = _chunk_uniforms(seed, start, size)
    ab = (u[:, 0] >= 0.5).astype(np.int64)
    abit = (u[:, 1] >= 0.5).astype(np.int64)
    bb = (u[:, 2] >= 0.5).astype(np.int64)
    coin = (u[:, 7] >= 0.5).astype(np.int64)
    zeros = np.zeros(size, dtype=np.int64)

    if tables.variant == "none":
        acted = np.zeros(size, dtype=bool)
        t = zeros
        e = zeros
        bob_bit = (u[:, 6] >= tables.p_direct[ab, abit, bb]).astype(np.int64)
        guess = np.full(size, -1, dtype=np.int64)
    elif tables.variant == "intercept_resend":
        acted = u[:, 3] < tables.fraction
        t = (u[:, 4] >= 0.5).astype(np.int64) if tables.symmetrize else zeros
        e = (u[:, 5] >= tables.p_eve[t, ab, abit]).astype(np.int64)
        p_bob = np.where(acted, tables.p_forward[t, e, bb], tables.p_direct[ab, abit, bb])
        bob_bit = (u[:, 6] >= p_bob).astype(np.int64)
        guess = np.where(acted, _resolve_guess(tables.decisions[t, ab], e, coin), coin)
    elif tables.variant == "ancilla_no_memory":
        acted = np.ones(size, dtype=bool)
        t = (u[:, 4] >= 0.5).astype(np.int64) if tables.symmetrize else zeros
        bob_bit, e = _joint_draw(tables.joint_cdf[t, ab, abit, bb], u[:, 5])
        guess = _resolve_guess(tables.decisions[t, ab], e, coin)
    else:  # ancilla_with_memory
        acted = np.ones(size, dtype=bool)
        t = zeros
        bob_bit, e = _joint_draw(tables.joint_cdf[ab, abit, bb], u[:, 5])
        guess = _resolve_guess(tables.decisions[ab], e, coin)

    sifted = ab == bb
    counts = RoundCounts.zeros()
    counts.n_rounds = size
    counts.n_sifted_by_basis += np.bincount(ab[sifted], minlength=2)
    errors = sifted & (bob_bit != abit)
    counts.n_errors_by_basis += np.bincount(ab[errors], minlength=2)

    recorded = sifted & (guess >= 0)
    if np.any(recorded):
        acted_i = acted.astype(np.int64)
        t_acc = np.where(acted, t, 0)  # untouched rounds all share stratum t=0
        flat = ((((acted_i * 2 + t_acc) * 2 + ab) * 2 + abit) * 2 + guess)[recorded]
        counts.guess_counts += np.bincount(flat, minlength=32).reshape(2, 2, 2, 2, 2)

    trace = None
    if keep_trace:
        trace = []
        acted_list = acted.tolist()
        for i in range(size):
            is_acted = acted_list[i]
            if is_acted:
                if tables.variant == "ancilla_with_memory":
                    eve_basis = REVEALED_BASIS_MARKER
                else:
                    eve_basis = tables.eve_angles[int(t[i])]
                eve_outcome = Outcome.from_bit(int(e[i]))
                eve_guess = int(guess[i])
            else:
                eve_basis = None
                eve_outcome = None
                eve_guess = None
            trace.append(
                TrialRecord(
                    round_index=start + i,
                    alice_basis=BASIS_LABELS[int(ab[i])],
                    alice_bit=int(abit[i]),
                    eve_acted=is_acted,
                    eve_basis=eve_basis,
                    eve_outcome=eve_outcome,
                    eve_guess=eve_guess,
                    bob_basis=BASIS_LABELS[int(bb[i])],
                    bob_bit=int(bob_bit[i]),
                    sifted=bool(sifted[i]),
                )
            )
    return counts, trace


def run_protocol(
    n_rounds: int,
    attack: AttackConfig,
    seed: int,
    *,
    keep_trace: bool = False,
    workers: int = 1,
    chunk_rounds: int = _DEFAULT_CHUNK,
) -> tuple[SimEstimate, list[TrialRecord] | None]:
    """Run BB84 rounds under an attack and estimate the observable statistics.

    Deterministic: the per-round stream depends only on (seed, round index),
    and accumulation is integer-valued and merged in chunk order, so the
    result is bit-identical for any workers/chunk_rounds combination.
    keep_trace materializes one TrialRecord per round (memory-bound; meant
    for small runs).
    """
    if not isinstance(attack, (NoAttack, InterceptResend, AncillaNoMemory, AncillaWithMemory)):
        raise ValueError(f"unsupported attack config: {attack!r}")
    if n_rounds < 1:
        raise ValueError(f"n_rounds must be at least 1, got {n_rounds!r}")
    if not (0 <= seed < 2**64):
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed!r}")
    if chunk_rounds < 1:
        raise ValueError(f"chunk_rounds must be at least 1, got {chunk_rounds!r}")

    tables = _build_tables(attack)
    spans = [(s, min(chunk_rounds, n_rounds - s)) for s in range(0, n_rounds, chunk_rounds)]
    if workers > 1 and len(spans) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(
                pool.map(lambda sp: _run_chunk(tables, seed, sp[0], sp[1], keep_trace), spans)
            )
    else:
        results = [_run_chunk(tables, seed, s, m, keep_trace) for s, m in spans]

    totals = RoundCounts.zeros()
    trace: list[TrialRecord] | None = [] if keep_trace else None
    for counts, chunk_trace in results:  # chunk order, not completion order
        totals.merge(counts)
        if keep_trace:
            trace.extend(chunk_trace)
    return _estimate_from_counts(totals), trace


# --- estimation -------------------------------------------------------------


def _rate(numer: int, denom: int) -> tuple[float | None, float | None]:
    if denom == 0:
        return None, None
    p = numer / denom
    return p, math.sqrt(p * (1.0 - p) / denom)


def _stratified_mi(strata: np.ndarray) -> tuple[float | None, float | None]:
    """Weighted per-stratum plug-in MI and its standard error.

    strata has shape (n_strata, 2, 2). The point estimate is
    sum_s (n_s/n) MI_s; the SE is the sample standard deviation of the
    per-round score log2(p_s(a,g)/(p_s(a) p_s(g))) over sqrt(n), which is the
    delta-method error of that same mean and includes the weight noise.
    """
    totals = strata.sum(axis=(1, 2))
    n = int(totals.sum())
    if n == 0:
        return None, None
    point = 0.0
    score_sum = 0.0
    score_sq = 0.0
    for table, n_s in zip(strata, totals):
        if n_s == 0:
            continue
        point += (n_s / n) * mutual_information(table)
        p = table / n_s
        p_a = p.sum(axis=1)
        p_g = p.sum(axis=0)
        for a in (0, 1):
            for g in (0, 1):
                if table[a, g] > 0:
                    score = math.log2(p[a, g] / (p_a[a] * p_g[g]))
                    score_sum += table[a, g] * score
                    score_sq += table[a, g] * score * score
    mean = score_sum / n
    variance = max(score_sq / n - mean * mean, 0.0)
    return point, math.sqrt(variance / n)


def _estimate_from_counts(counts: RoundCounts) -> SimEstimate:
    n_sifted = counts.n_sifted
    if n_sifted < MIN_SIFTED:
        raise InsufficientSampleError(
            f"need at least {MIN_SIFTED} sifted rounds to report standard errors, got {n_sifted}"
        )
    n_err = int(counts.n_errors_by_basis.sum())
    qber, qber_se = _rate(n_err, n_sifted)
    qber_x, _ = _rate(int(counts.n_errors_by_basis[0]), int(counts.n_sifted_by_basis[0]))
    qber_y, _ = _rate(int(counts.n_errors_by_basis[1]), int(counts.n_sifted_by_basis[1]))

    gc = counts.guess_counts
    mi_full, mi_full_se = _stratified_mi(gc.reshape(8, 2, 2))
    mi_int, mi_int_se = _stratified_mi(gc[1].reshape(4, 2, 2))

    acted = gc[1]  # [t, rb, abit, guess]
    fid = {}
    for rb in (0, 1):
        basis_counts = acted[:, rb]
        n_basis = int(basis_counts.sum())
        n_correct = int(basis_counts[:, 0, 0].sum() + basis_counts[:, 1, 1].sum())
        fid[rb] = _rate(n_correct, n_basis)

    return SimEstimate(
        n_rounds=counts.n_rounds,
        n_sifted=n_sifted,
        n_intercepted=int(acted.sum()),
        qber=qber,
        qber_se=qber_se,
        qber_x=qber_x,
        qber_y=qber_y,
        eve_mutual_info=mi_full,
        eve_mutual_info_se=mi_full_se,
        eve_mutual_info_intercepted=mi_int,
        eve_mutual_info_intercepted_se=mi_int_se,
        eve_fidelity_x=fid[0][0],
        eve_fidelity_x_se=fid[0][1],
        eve_fidelity_y=fid[1][0],
        eve_fidelity_y_se=fid[1][1],
    )


def _counts_from_trace(records, coin_seed: int) -> RoundCounts:
    """Rebuild accumulators from a trace.

    Untouched sifted rounds need fair-coin guesses that TrialRecord cannot
    carry (its eve fields exist only when Eve acted), so they are drawn from
    a dedicated Philox stream keyed by coin_seed. Full-key MI from a trace
    of a fractional interception run therefore matches the engine's value in
    distribution, not bit-for-bit; every other statistic matches exactly.
    """
    rng = np.random.Generator(np.random.Philox(key=coin_seed))
    counts = RoundCounts.zeros()
    basis_angle_to_t: dict[float, int] = {}
    for record in records:
        counts.n_rounds += 1
        if not record.sifted:
            continue
        rb = BASIS_LABELS.index(record.alice_basis)
        counts.n_sifted_by_basis[rb] += 1
        if record.bob_bit != record.alice_bit:
            counts.n_errors_by_basis[rb] += 1
        if record.eve_acted:
            if record.eve_basis == REVEALED_BASIS_MARKER:
                t = 0
            else:
                t = basis_angle_to_t.setdefault(float(record.eve_basis), len(basis_angle_to_t))
                if t > 1:
                    raise ValueError("trace contains more than two Eve measurement angles")
            counts.guess_counts[1, t, rb, record.alice_bit, record.eve_guess] += 1
        else:
            guess = int(rng.random() >= 0.5)
            counts.guess_counts[0, 0, rb, record.alice_bit, guess] += 1
    return counts


def estimate(source, *, coin_seed: int = 0) -> SimEstimate:
    """Estimate statistics from RoundCounts accumulators or a TrialRecord trace.

    Refuses to report when fewer than 100 sifted rounds are available, since
    the normal-approximation standard errors would be meaningless.
    """
    if isinstance(source, RoundCounts):
        return _estimate_from_counts(source)
    return _estimate_from_counts(_counts_from_trace(source, coin_seed))
