"""State vectors, equatorial measurement bases, and the entangling probe.

Everything lives on the Poincare-sphere equator: the four protocol states
|x+-> = (|0> +- |1>)/sqrt(2) and |y+-> = (|0> +- i|1>)/sqrt(2) are the
phi = 0 and phi = pi/2 members of the one-parameter eigenstate family
|+-phi> = (|0> +- e^{i phi}|1>)/sqrt(2). Measurements are projective onto
such a pair. The eavesdropping probe couples a signal qubit to an ancilla
prepared in |0> via the unitary

    |0>|0> -> |00>        |1>|0> -> cos(alpha)|10> + sin(alpha)|01>

with two-qubit amplitudes ordered |signal, ancilla> (index = 2*s + a).

States are rays: comparisons go through overlap probabilities, never through
raw amplitudes, so global phase is irrelevant throughout.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

NORM_TOL = 1e-12
PROB_SUM_TOL = 1e-9
ZERO_PROB_TOL = 1e-15

_INV_SQRT2 = 1.0 / math.sqrt(2.0)


class Outcome(enum.Enum):
    """Binary measurement result; PLUS maps to key bit 0, MINUS to 1."""

    PLUS = 0
    MINUS = 1

    @property
    def bit(self) -> int:
        return self.value

    @property
    def sign(self) -> int:
        return 1 if self is Outcome.PLUS else -1

    @classmethod
    def from_bit(cls, bit: int) -> "Outcome":
        if bit not in (0, 1):
            raise ValueError(f"bit must be 0 or 1, got {bit!r}")
        return cls.PLUS if bit == 0 else cls.MINUS


@dataclass(frozen=True)
class PureState:
    """Normalized complex amplitude vector of one qubit (2) or qubit+ancilla (4)."""

    amplitudes: np.ndarray = field(repr=False)

    def __init__(self, amplitudes) -> None:
        amps = np.array(amplitudes, dtype=np.complex128, copy=True)
        if amps.shape not in ((2,), (4,)):
            raise ValueError(f"state must have 2 or 4 amplitudes, got shape {amps.shape}")
        if not (np.all(np.isfinite(amps.real)) and np.all(np.isfinite(amps.imag))):
            raise ValueError("amplitudes must be finite")
        norm_sq = float(np.sum(np.abs(amps) ** 2))
        if abs(norm_sq - 1.0) > NORM_TOL:
            raise ValueError(f"state not normalized: |psi|^2 = {norm_sq!r}")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    def __len__(self) -> int:
        return self.amplitudes.shape[0]

    def overlap(self, other: "PureState") -> complex:
        """Inner product <self|other>."""
        if len(self) != len(other):
            raise ValueError("states live in different spaces")
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def overlap_probability(self, other: "PureState") -> float:
        """|<self|other>|^2, clamped into [0, 1]."""
        return _clamp01(abs(self.overlap(other)) ** 2)

    def __repr__(self) -> str:
        return f"PureState({self.amplitudes.tolist()!r})"


def _clamp01(p: float) -> float:
    return 0.0 if p < 0.0 else 1.0 if p > 1.0 else p


@dataclass(frozen=True)
class EquatorBasis:
    """Projective measurement onto |+-phi> = (|0> +- e^{i phi}|1>)/sqrt(2)."""

    phi: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.phi):
            raise ValueError("phi must be finite")

    @classmethod
    def x(cls) -> "EquatorBasis":
        return cls(0.0)

    @classmethod
    def y(cls) -> "EquatorBasis":
        return cls(math.pi / 2)

    @classmethod
    def intermediate(cls) -> "EquatorBasis":
        return cls(math.pi / 4)

    def conjugate_basis(self) -> "EquatorBasis":
        """The companion basis at phi' = pi/2 - phi (x and y swap roles)."""
        return EquatorBasis(math.pi / 2 - self.phi)

    def eigenstate(self, outcome: Outcome) -> PureState:
        phase = complex(math.cos(self.phi), math.sin(self.phi))
        return PureState([_INV_SQRT2, outcome.sign * phase * _INV_SQRT2])


def make_bb84_state(basis: EquatorBasis, sign: Outcome) -> PureState:
    """Prepare a protocol state: |x+-> at phi=0 or |y+-> at phi=pi/2 only."""
    if not (abs(basis.phi) <= NORM_TOL or abs(basis.phi - math.pi / 2) <= NORM_TOL):
        raise ValueError(
            f"preparation uses only the x (phi=0) and y (phi=pi/2) bases, got phi={basis.phi!r}"
        )
    return basis.eigenstate(sign)


def outcome_probabilities(state: PureState, basis: EquatorBasis) -> tuple[float, float]:
    """Born probabilities (p_plus, p_minus) for measuring a single qubit."""
    if len(state) != 2:
        raise ValueError("outcome_probabilities takes a single-qubit state")
    p_plus = basis.eigenstate(Outcome.PLUS).overlap_probability(state)
    return p_plus, 1.0 - p_plus


def project(state: PureState, basis: EquatorBasis, outcome: Outcome) -> PureState:
    """Post-measurement state: the basis eigenstate matching the outcome.

    Raises if the outcome has (numerically) zero probability, since asking for
    that collapse indicates a logic error in the caller.
    """
    p_plus, p_minus = outcome_probabilities(state, basis)
    p = p_plus if outcome is Outcome.PLUS else p_minus
    if p <= ZERO_PROB_TOL:
        raise ValueError(f"outcome {outcome} has zero probability in this basis")
    return basis.eigenstate(outcome)


def apply_eve_unitary(state: PureState, alpha: float) -> PureState:
    """Couple a single-qubit state to a fresh |0> ancilla.

    Linear extension of |0>|0> -> |00>, |1>|0> -> cos(alpha)|10> + sin(alpha)|01>,
    so a|0> + b|1> maps to a|00> + b sin(alpha)|01> + b cos(alpha)|10>.
    """
    if len(state) != 2:
        raise ValueError("apply_eve_unitary takes a single-qubit state")
    if not math.isfinite(alpha):
        raise ValueError("alpha must be finite")
    a, b = state.amplitudes
    return PureState([a, b * math.sin(alpha), b * math.cos(alpha), 0.0])


def joint_outcome_probabilities(
    state: PureState, bob_basis: EquatorBasis, eve_basis: EquatorBasis
) -> np.ndarray:
    """2x2 Born table for measuring both qubits of a two-qubit state.

    Entry [b, e] is the probability that the signal qubit (first tensor slot)
    gives outcome bit b in bob_basis while the ancilla gives bit e in
    eve_basis. Rows/columns are indexed PLUS=0, MINUS=1.
    """
    if len(state) != 4:
        raise ValueError("joint_outcome_probabilities takes a two-qubit state")
    table = np.empty((2, 2), dtype=np.float64)
    for b_out in Outcome:
        bra_b = np.conj(bob_basis.eigenstate(b_out).amplitudes)
        for e_out in Outcome:
            bra_e = np.conj(eve_basis.eigenstate(e_out).amplitudes)
            amp = np.kron(bra_b, bra_e) @ state.amplitudes
            table[b_out.bit, e_out.bit] = _clamp01(abs(amp) ** 2)
    return table


def _check_distribution(probs: np.ndarray) -> None:
    if np.any(probs < -PROB_SUM_TOL):
        raise ValueError("probabilities must be non-negative")
    total = float(probs.sum())
    if abs(total - 1.0) > PROB_SUM_TOL:
        raise ValueError(f"probabilities must sum to 1, got {total!r}")


def sample_outcome(probabilities, rng: np.random.Generator) -> Outcome:
    """Inverse-CDF draw of a single outcome from (p_plus, p_minus)."""
    probs = np.asarray(probabilities, dtype=np.float64)
    if probs.shape != (2,):
        raise ValueError("expected a pair (p_plus, p_minus)")
    _check_distribution(probs)
    u = rng.random()
    return Outcome.PLUS if u < probs[0] else Outcome.MINUS


def sample_joint_outcome(table, rng: np.random.Generator) -> tuple[Outcome, Outcome]:
    """Inverse-CDF draw of (signal outcome, ancilla outcome) from a 2x2 table.

    Cells are flattened row-major: (+,+), (+,-), (-,+), (-,-). The same
    ordering is used by the vectorized protocol engine so the two sampling
    paths are interchangeable for a shared uniform draw.
    """
    probs = np.asarray(table, dtype=np.float64)
    if probs.shape != (2, 2):
        raise ValueError("expected a 2x2 probability table")
    _check_distribution(probs)
    cdf = np.cumsum(probs.reshape(4))
    u = rng.random()
    idx = min(int(np.searchsorted(cdf, u, side="right")), 3)
    return Outcome.from_bit(idx >> 1), Outcome.from_bit(idx & 1)
