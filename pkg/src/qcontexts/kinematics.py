"""States, projective observables, Born statistics, collapse, and evolution.

Observables are projective decompositions — labeled orthogonal projectors
resolving the identity — which strictly generalizes the nondegenerate case:
rank-1 outcomes recover textbook spectra, while rank > 1 outcomes collapse
by the Lüders convention P|s> / ||P|s>||. Every state returned by an
operation carries a canonical global phase (first non-negligible amplitude
real-positive) so equality testing is reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ImpossibleOutcomeError, InvariantViolation, ToleranceError
from .linalg import (
    ALGEBRA_TOL,
    CONSTRUCTION_TOL,
    NEGLIGIBLE,
    HermitianOperator,
    apply_projector,
    as_complex_matrix,
    as_complex_vector,
    fix_global_phase,
    frozen_copy,
    hermiticity_defect,
    max_abs,
    unitary_exponential,
)

# Probabilities may drift past [0, 1] by round-off; clamping beyond this is a bug.
CLAMP_TOL = 1e-9

# Outcomes at least this close to probability one count as certain.
CERTAINTY_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class StateVector:
    """Unit-norm complex amplitudes over a finite basis."""

    amplitudes: np.ndarray

    def __post_init__(self):
        amps = as_complex_vector(self.amplitudes, "state amplitudes")
        if amps.size == 0:
            raise InvariantViolation("state must have at least one amplitude")
        norm = float(np.linalg.norm(amps))
        if abs(norm - 1.0) > CONSTRUCTION_TOL:
            raise InvariantViolation(
                f"state must be unit norm within {CONSTRUCTION_TOL:.0e}, got norm {norm!r}"
            )
        object.__setattr__(self, "amplitudes", frozen_copy(amps))

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    @classmethod
    def normalized(cls, amplitudes) -> "StateVector":
        """Rescale to unit norm; rejects vectors indistinguishable from zero."""
        amps = as_complex_vector(amplitudes, "state amplitudes")
        norm = float(np.linalg.norm(amps))
        if norm <= 1e-9:
            raise InvariantViolation(f"cannot normalize a near-zero vector (norm {norm!r})")
        return cls(amps / norm)

    @classmethod
    def basis_state(cls, dim: int, index: int) -> "StateVector":
        amps = np.zeros(dim, dtype=complex)
        amps[index] = 1.0
        return cls(amps)

    def phase_fixed(self) -> "StateVector":
        return StateVector(fix_global_phase(self.amplitudes))

    def overlap(self, other: "StateVector") -> complex:
        """<self|other>."""
        if self.dim != other.dim:
            raise InvariantViolation(f"dimension mismatch: {self.dim} vs {other.dim}")
        return complex(np.vdot(self.amplitudes, other.amplitudes))


@dataclass(frozen=True, eq=False)
class Outcome:
    """One labeled value of an observable, with its orthogonal projector."""

    label: str
    value: float
    projector: np.ndarray

    def __post_init__(self):
        if not isinstance(self.label, str) or not self.label:
            raise InvariantViolation("outcome label must be a nonempty string")
        if not np.isfinite(self.value):
            raise InvariantViolation(f"outcome value for {self.label!r} must be finite")
        proj = as_complex_matrix(self.projector, f"projector for {self.label!r}")
        if proj.shape[0] != proj.shape[1]:
            raise InvariantViolation(f"projector for {self.label!r} must be square")
        object.__setattr__(self, "value", float(self.value))
        object.__setattr__(self, "projector", frozen_copy(proj))

    @property
    def rank(self) -> int:
        return int(round(float(np.real(np.trace(self.projector)))))


@dataclass(frozen=True, eq=False)
class ProjectiveDecomposition:
    """Labeled orthogonal projectors resolving the identity."""

    outcomes: tuple[Outcome, ...]

    def __post_init__(self):
        outcomes = tuple(self.outcomes)
        if not outcomes:
            raise InvariantViolation("decomposition needs at least one outcome")
        labels = [o.label for o in outcomes]
        if len(set(labels)) != len(labels):
            raise InvariantViolation(f"outcome labels must be unique, got {labels}")
        dim = outcomes[0].projector.shape[0]
        total = np.zeros((dim, dim), dtype=complex)
        for outcome in outcomes:
            p = outcome.projector
            if p.shape != (dim, dim):
                raise InvariantViolation(f"projector for {outcome.label!r} has mismatched dimension")
            if hermiticity_defect(p) > ALGEBRA_TOL:
                raise InvariantViolation(f"projector for {outcome.label!r} is not Hermitian")
            if max_abs(p @ p - p) > ALGEBRA_TOL:
                raise InvariantViolation(f"projector for {outcome.label!r} is not idempotent")
            total += p
        for i, a in enumerate(outcomes):
            for b in outcomes[i + 1 :]:
                if max_abs(a.projector @ b.projector) > ALGEBRA_TOL:
                    raise InvariantViolation(
                        f"projectors for {a.label!r} and {b.label!r} are not orthogonal"
                    )
        if max_abs(total - np.eye(dim)) > ALGEBRA_TOL:
            raise InvariantViolation("projectors do not sum to the identity")
        object.__setattr__(self, "outcomes", outcomes)

    @property
    def dim(self) -> int:
        return self.outcomes[0].projector.shape[0]

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(o.label for o in self.outcomes)

    def outcome(self, label: str) -> Outcome:
        for o in self.outcomes:
            if o.label == label:
                return o
        raise InvariantViolation(f"unknown outcome label {label!r}; known labels: {list(self.labels)}")

    def projector(self, label: str) -> np.ndarray:
        return self.outcome(label).projector

    def conjugated(self) -> "ProjectiveDecomposition":
        """Entrywise complex conjugate of every projector (time-reversal companion)."""
        return ProjectiveDecomposition(
            tuple(Outcome(o.label, o.value, o.projector.conj()) for o in self.outcomes)
        )

    @classmethod
    def from_states(
        cls,
        states: list[StateVector] | tuple[StateVector, ...],
        labels: list[str] | tuple[str, ...] | None = None,
        values: list[float] | tuple[float, ...] | None = None,
    ) -> "ProjectiveDecomposition":
        """Rank-1 decomposition from orthonormal states spanning the space."""
        if not states:
            raise InvariantViolation("need at least one state")
        dim = states[0].dim
        if len(states) != dim:
            raise InvariantViolation(f"{len(states)} states cannot span dimension {dim}")
        if labels is None:
            labels = tuple(str(k) for k in range(dim))
        if values is None:
            values = tuple(float(k) for k in range(dim))
        outcomes = tuple(
            Outcome(label, value, np.outer(s.amplitudes, s.amplitudes.conj()))
            for s, label, value in zip(states, labels, values)
        )
        return cls(outcomes)


def pauli_z() -> ProjectiveDecomposition:
    """The {+1, -1} decomposition of sigma_z."""
    return ProjectiveDecomposition((
        Outcome("+1", 1.0, np.array([[1, 0], [0, 0]], dtype=complex)),
        Outcome("-1", -1.0, np.array([[0, 0], [0, 1]], dtype=complex)),
    ))


def pauli_x() -> ProjectiveDecomposition:
    """The {+1, -1} decomposition of sigma_x."""
    return ProjectiveDecomposition((
        Outcome("+1", 1.0, np.array([[0.5, 0.5], [0.5, 0.5]], dtype=complex)),
        Outcome("-1", -1.0, np.array([[0.5, -0.5], [-0.5, 0.5]], dtype=complex)),
    ))


def pauli_y() -> ProjectiveDecomposition:
    """The {+1, -1} decomposition of sigma_y."""
    return ProjectiveDecomposition((
        Outcome("+1", 1.0, np.array([[0.5, -0.5j], [0.5j, 0.5]], dtype=complex)),
        Outcome("-1", -1.0, np.array([[0.5, 0.5j], [-0.5j, 0.5]], dtype=complex)),
    ))


@dataclass(frozen=True)
class OutcomeDistribution:
    """Labeled nonnegative probabilities summing to one."""

    entries: tuple[tuple[str, float], ...]

    def __post_init__(self):
        cleaned = []
        seen = set()
        for label, prob in self.entries:
            if label in seen:
                raise InvariantViolation(f"duplicate outcome label {label!r}")
            seen.add(label)
            prob = float(prob)
            if prob < -CLAMP_TOL or prob > 1.0 + CLAMP_TOL:
                raise ToleranceError(
                    f"probability for {label!r} is {prob!r}; clamping beyond {CLAMP_TOL:.0e} means a bug"
                )
            cleaned.append((str(label), min(max(prob, 0.0), 1.0)))
        total = sum(p for _, p in cleaned)
        if abs(total - 1.0) > 1e-9:
            raise InvariantViolation(f"probabilities sum to {total!r}, not 1")
        object.__setattr__(self, "entries", tuple(cleaned))

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(label for label, _ in self.entries)

    def probability(self, label: str) -> float:
        for lab, prob in self.entries:
            if lab == label:
                return prob
        raise InvariantViolation(f"unknown outcome label {label!r}; known labels: {list(self.labels)}")

    def as_dict(self) -> dict[str, float]:
        return dict(self.entries)

    def most_likely(self) -> tuple[str, float]:
        return max(self.entries, key=lambda entry: entry[1])


def prepare_eigenstate(observable: ProjectiveDecomposition, label: str) -> StateVector:
    """State spanning a rank-1 outcome projector, with canonical phase.

    Rank > 1 outcomes are rejected: projecting says which subspace, not
    which state, so the caller must supply the state explicitly.
    """
    outcome = observable.outcome(label)
    if outcome.rank != 1:
        raise InvariantViolation(
            f"outcome {label!r} has rank {outcome.rank}: ambiguous preparation, supply a state explicitly"
        )
    for j in range(observable.dim):
        column = outcome.projector[:, j]
        if float(np.linalg.norm(column)) > 1e-7:
            return StateVector.normalized(fix_global_phase(column))
    raise ToleranceError(f"projector for {label!r} has a numerically empty range")


def born_distribution(state: StateVector, observable: ProjectiveDecomposition) -> OutcomeDistribution:
    """Outcome probabilities <s|P_k|s> from the preparation alone."""
    if state.dim != observable.dim:
        raise InvariantViolation(f"dimension mismatch: state {state.dim} vs observable {observable.dim}")
    entries = []
    for outcome in observable.outcomes:
        _, weight = apply_projector(outcome.projector, state.amplitudes)
        entries.append((outcome.label, weight))
    return OutcomeDistribution(tuple(entries))


def lueders_collapse(state: StateVector, observable: ProjectiveDecomposition, label: str) -> StateVector:
    """Post-measurement state P_k|s> / ||P_k|s>|| for the labeled outcome."""
    outcome = observable.outcome(label)
    if state.dim != observable.dim:
        raise InvariantViolation(f"dimension mismatch: state {state.dim} vs observable {observable.dim}")
    image, weight = apply_projector(outcome.projector, state.amplitudes)
    if weight <= NEGLIGIBLE:
        raise ImpossibleOutcomeError(
            f"zero-probability outcome {label!r} (weight {weight:.3e}) marks an impossible branch"
        )
    return StateVector.normalized(fix_global_phase(image))


def evolve(state: StateVector, hamiltonian: HermitianOperator, duration: float) -> StateVector:
    """Apply exp(-i H t) to the state (hbar = 1)."""
    if state.dim != hamiltonian.dim:
        raise InvariantViolation(f"dimension mismatch: state {state.dim} vs Hamiltonian {hamiltonian.dim}")
    propagator = unitary_exponential(hamiltonian, duration)
    return StateVector.normalized(fix_global_phase(propagator.matrix @ state.amplitudes))
