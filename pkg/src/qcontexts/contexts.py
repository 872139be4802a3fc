"""Measurement contexts with both pre- and post-selection.

A context fixes a preparation at t1, an optional intermediate observable at
t, and a post-selected outcome at t2, with a Hamiltonian driving the
evolution in between. The central quantity is the Aharonov-Bergmann-Lebowitz
(ABL) conditional distribution: the probability of each intermediate outcome
given *both* boundary conditions. The weight of outcome i is the squared
norm of the branch that starts in the prepared state, is projected onto
outcome i at t, and lands in the post-selected projector at t2; weights are
normalized over i. For rank-1 projectors and a vanishing Hamiltonian this is
the familiar two-kernel form |<b|c_i><c_i|a>|^2 (normalized), and for
rank > 1 it is the Lüders-consistent generalization, so the analytic rule
agrees exactly with Bayesian conditioning of the simulated
measure-collapse-measure chain.

Whether the numbers are read as subjective (the intermediate measurement
happened, its record is merely unknown) or as counterfactual/objective (no
intermediate measurement was performed) changes nothing quantitative; the
reading is carried as context metadata only.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ImpossibleOutcomeError, InvariantViolation, TimeReversalConventionWarning
from .kinematics import (
    CERTAINTY_TOL,
    Outcome,
    OutcomeDistribution,
    ProjectiveDecomposition,
    StateVector,
    born_distribution,
    lueders_collapse,
    prepare_eigenstate,
)
from .linalg import HermitianOperator, NEGLIGIBLE, unitary_exponential

# Below this total branch weight, post-selection is unreachable rather than
# merely unlikely; the conditional distribution is undefined.
DENOMINATOR_FLOOR = 1e-15


@dataclass(frozen=True, eq=False)
class Preparation:
    """Pre-selection: the state the system is prepared in, and when."""

    state: StateVector
    time: float

    def __post_init__(self):
        if not np.isfinite(self.time):
            raise InvariantViolation("preparation time must be finite")


@dataclass(frozen=True, eq=False)
class Intermediate:
    """The observable probed between the boundary conditions.

    performed=False marks the counterfactual arrangement: the number asked
    about an observable nobody measured. It never changes any probability.
    """

    observable: ProjectiveDecomposition
    time: float
    performed: bool = True

    def __post_init__(self):
        if not np.isfinite(self.time):
            raise InvariantViolation("intermediate time must be finite")


@dataclass(frozen=True, eq=False)
class PostSelection:
    """Post-selection: the final observable, the retained outcome, and when."""

    observable: ProjectiveDecomposition
    label: str
    time: float

    def __post_init__(self):
        if not np.isfinite(self.time):
            raise InvariantViolation("post-selection time must be finite")
        self.observable.outcome(self.label)  # raises on unknown label


@dataclass(frozen=True, eq=False)
class Context:
    """A full preparation / (intermediate) / post-selection arrangement."""

    preparation: Preparation
    postselection: PostSelection
    intermediate: Intermediate | None = None
    hamiltonian: HermitianOperator | None = None  # None means free (H = 0)

    def __post_init__(self):
        dim = self.preparation.state.dim
        if self.postselection.observable.dim != dim:
            raise InvariantViolation("post-selection observable dimension differs from the preparation")
        if self.intermediate is not None and self.intermediate.observable.dim != dim:
            raise InvariantViolation("intermediate observable dimension differs from the preparation")
        if self.hamiltonian is not None and self.hamiltonian.dim != dim:
            raise InvariantViolation("Hamiltonian dimension differs from the preparation")
        t1, t2 = self.preparation.time, self.postselection.time
        if self.intermediate is None:
            if not t1 < t2:
                raise InvariantViolation(f"times must satisfy t1 < t2, got {t1} and {t2}")
        else:
            t = self.intermediate.time
            if not t1 < t < t2:
                raise InvariantViolation(f"times must satisfy t1 < t < t2, got {t1}, {t}, {t2}")

    @property
    def dim(self) -> int:
        return self.preparation.state.dim

    @property
    def reading(self) -> str:
        """"counterfactual" when the intermediate is present but not performed, else "subjective"."""
        if self.intermediate is not None and not self.intermediate.performed:
            return "counterfactual"
        return "subjective"

    def is_free(self) -> bool:
        return self.hamiltonian is None or self.hamiltonian.is_zero()


def _propagator(ctx: Context, duration: float) -> np.ndarray:
    if ctx.is_free():
        return np.eye(ctx.dim, dtype=complex)
    return unitary_exponential(ctx.hamiltonian, duration).matrix


def _require_intermediate(ctx: Context) -> Intermediate:
    if ctx.intermediate is None:
        raise InvariantViolation("context has no intermediate observable")
    return ctx.intermediate


def _branch_weights(ctx: Context) -> np.ndarray:
    """Unnormalized weight per intermediate outcome: post-selected branch norms squared."""
    inter = _require_intermediate(ctx)
    forward = _propagator(ctx, inter.time - ctx.preparation.time)
    onward = _propagator(ctx, ctx.postselection.time - inter.time)
    post_proj = ctx.postselection.observable.projector(ctx.postselection.label)
    prepared = forward @ ctx.preparation.state.amplitudes
    weights = np.empty(len(inter.observable.outcomes))
    for k, outcome in enumerate(inter.observable.outcomes):
        branch = post_proj @ (onward @ (outcome.projector @ prepared))
        weights[k] = float(np.real(np.vdot(branch, branch)))
    return weights


def abl_distribution(ctx: Context) -> OutcomeDistribution:
    """Conditional distribution of the intermediate outcome given both selections.

    Evaluated in the Schrödinger picture: the prepared ket is propagated to
    the intermediate time and the post-selection projector acts behind the
    remaining propagator. Raises ImpossibleOutcomeError when every branch
    misses the post-selection (denominator below 1e-15).
    """
    inter = _require_intermediate(ctx)
    weights = _branch_weights(ctx)
    total = float(weights.sum())
    if total <= DENOMINATOR_FLOOR:
        raise ImpossibleOutcomeError(
            f"post-selection {ctx.postselection.label!r} is unreachable from every "
            f"intermediate branch (total weight {total:.3e})"
        )
    return OutcomeDistribution(
        tuple((label, w / total) for label, w in zip(inter.observable.labels, weights))
    )


def sequential_success_probability(ctx: Context) -> float:
    """Probability that post-selection succeeds when the intermediate IS measured.

    Equals the normalizing denominator of the conditional rule, and the
    expected retention rate of the chain sampler.
    """
    return float(_branch_weights(ctx).sum())


def born_context_distribution(ctx: Context) -> OutcomeDistribution:
    """Born distribution of the intermediate observable, post-selection ignored."""
    inter = _require_intermediate(ctx)
    forward = _propagator(ctx, inter.time - ctx.preparation.time)
    evolved = StateVector.normalized(forward @ ctx.preparation.state.amplitudes)
    return born_distribution(evolved, inter.observable)


@dataclass(frozen=True)
class ChainSampleReport:
    """Post-selected Monte Carlo tallies over the measure-collapse-measure chain.

    frequencies is None when no run survived post-selection; that no-data
    outcome is distinct from a distribution of zeros.
    """

    requested: int
    retained: int
    frequencies: OutcomeDistribution | None
    seed: int

    def __post_init__(self):
        if self.retained > self.requested:
            raise InvariantViolation("retained cannot exceed requested")
        if (self.retained == 0) != (self.frequencies is None):
            raise InvariantViolation("frequencies must be present exactly when runs were retained")

    @property
    def no_data(self) -> bool:
        return self.retained == 0


def sample_chain(ctx: Context, samples: int, seed: int) -> ChainSampleReport:
    """Simulate the explicit chain run by run and post-select.

    Each run evolves the preparation to the intermediate time, draws the
    intermediate outcome from its Born distribution, collapses, evolves to
    the post-selection time, and draws the final outcome; runs whose final
    outcome differs from the post-selected label are discarded. The
    per-branch distributions are precomputed, so a run costs two inverse-CDF
    draws while the sampling law is untouched. Output is bit-identical for
    identical (context, samples, seed).
    """
    inter = _require_intermediate(ctx)
    if samples < 1:
        raise InvariantViolation("samples must be at least 1")
    forward = _propagator(ctx, inter.time - ctx.preparation.time)
    onward = _propagator(ctx, ctx.postselection.time - inter.time)
    post_proj = ctx.postselection.observable.projector(ctx.postselection.label)
    evolved = StateVector.normalized(forward @ ctx.preparation.state.amplitudes)
    born = born_distribution(evolved, inter.observable)
    probs = np.array([p for _, p in born.entries])
    probs = probs / probs.sum()
    success = np.zeros(len(probs))
    for k, outcome in enumerate(inter.observable.outcomes):
        if probs[k] <= NEGLIGIBLE:
            continue
        collapsed = lueders_collapse(evolved, inter.observable, outcome.label)
        final = onward @ collapsed.amplitudes
        weight = float(np.real(np.vdot(final, post_proj @ final)))
        success[k] = min(max(weight, 0.0), 1.0)
    rng = np.random.default_rng(seed)
    picks = rng.choice(len(probs), size=samples, p=probs)
    kept = rng.random(samples) < success[picks]
    retained = int(kept.sum())
    if retained == 0:
        return ChainSampleReport(samples, 0, None, seed)
    counts = np.bincount(picks[kept], minlength=len(probs))
    frequencies = OutcomeDistribution(
        tuple((label, counts[k] / retained) for k, label in enumerate(inter.observable.labels))
    )
    return ChainSampleReport(samples, retained, frequencies, seed)


@dataclass(frozen=True)
class TotalProbabilityGap:
    """Direct transition probability vs the two-step classical chain, and their difference."""

    quantum: float
    classical_chain: float
    gap: float


def total_probability_gap(
    preparation: StateVector,
    post_observable: ProjectiveDecomposition,
    post_label: str,
    intermediate_observable: ProjectiveDecomposition,
) -> TotalProbabilityGap:
    """Violation of the classical total-probability chain (equal times, free Hamiltonian).

    quantum is <a|P_b|a>; classical_chain is sum_i P(b|c_i) P(c_i|a) with
    every factor a Born value. An intermediate observable holding a
    measurement-independent true value would force the two to coincide;
    projective statistics generally keep them apart.
    """
    if preparation.dim != post_observable.dim or preparation.dim != intermediate_observable.dim:
        raise InvariantViolation("total-probability gap needs matching dimensions throughout")
    post_proj = post_observable.projector(post_label)
    quantum = float(np.real(np.vdot(preparation.amplitudes, post_proj @ preparation.amplitudes)))
    quantum = min(max(quantum, 0.0), 1.0)
    classical = 0.0
    born = born_distribution(preparation, intermediate_observable)
    for label, prob in born.entries:
        if prob <= NEGLIGIBLE:
            continue
        collapsed = lueders_collapse(preparation, intermediate_observable, label)
        through = float(np.real(np.vdot(collapsed.amplitudes, post_proj @ collapsed.amplitudes)))
        classical += prob * min(max(through, 0.0), 1.0)
    return TotalProbabilityGap(quantum, classical, quantum - classical)


def _projector_question(
    amplitudes: np.ndarray, yes_label: str = "yes", no_label: str = "no"
) -> ProjectiveDecomposition:
    """Two-outcome indicator observable "is the system in this state?"."""
    projector = np.outer(amplitudes, amplitudes.conj())
    dim = amplitudes.size
    if dim == 1:
        return ProjectiveDecomposition((Outcome(yes_label, 1.0, projector),))
    return ProjectiveDecomposition((
        Outcome(yes_label, 1.0, projector),
        Outcome(no_label, 0.0, np.eye(dim) - projector),
    ))


def _postselection_state(postselection: PostSelection) -> StateVector:
    """Unit vector spanning a rank-1 post-selection projector."""
    return prepare_eigenstate(postselection.observable, postselection.label)


def time_reverse_context(ctx: Context) -> Context:
    """Swap preparation with post-selection, conjugate states and projectors, negate times.

    For a vanishing Hamiltonian the conditional distribution is invariant
    under this map. A nonvanishing Hamiltonian is conjugated as well;
    whether that models the reversal of a physical measurement process is a
    convention, so a TimeReversalConventionWarning is emitted. Requires a
    rank-1 post-selection projector so the reversed preparation is a state.
    """
    inter = _require_intermediate(ctx)
    reversed_prep_state = StateVector(_postselection_state(ctx.postselection).amplitudes.conj())
    hamiltonian = ctx.hamiltonian
    if hamiltonian is not None and not hamiltonian.is_zero():
        warnings.warn(
            "time reversal with a nonvanishing Hamiltonian conjugates it; "
            "the result is convention-dependent",
            TimeReversalConventionWarning,
            stacklevel=2,
        )
        hamiltonian = HermitianOperator(hamiltonian.matrix.conj())
    preparation = Preparation(reversed_prep_state, -ctx.postselection.time)
    intermediate = Intermediate(inter.observable.conjugated(), -inter.time, inter.performed)
    post_obs = _projector_question(ctx.preparation.state.amplitudes.conj())
    postselection = PostSelection(post_obs, "yes", -ctx.preparation.time)
    return Context(preparation, postselection, intermediate, hamiltonian)


def interchange_context(ctx: Context) -> Context:
    """Exchange the preparation and post-selection roles without conjugation.

    Defined for the free (zero) Hamiltonian, where the conditional rule is
    symmetric under the exchange. Times are kept.
    """
    inter = _require_intermediate(ctx)
    if not ctx.is_free():
        raise InvariantViolation("interchange symmetry is defined for the free (zero) Hamiltonian")
    preparation = Preparation(_postselection_state(ctx.postselection), ctx.preparation.time)
    post_obs = _projector_question(ctx.preparation.state.amplitudes)
    postselection = PostSelection(post_obs, "yes", ctx.postselection.time)
    return Context(preparation, postselection, inter, None)


@dataclass(frozen=True, eq=False)
class ElementOfReality:
    """An outcome predictable with probability one (certainty criterion)."""

    observable: ProjectiveDecomposition
    label: str
    probability: float
    certified: bool

    def __post_init__(self):
        self.observable.outcome(self.label)
        prob = float(self.probability)
        if prob < -CERTAINTY_TOL or prob > 1.0 + CERTAINTY_TOL:
            raise InvariantViolation(f"probability {prob!r} outside [0, 1]")
        prob = min(max(prob, 0.0), 1.0)
        if self.certified != (prob >= 1.0 - CERTAINTY_TOL):
            raise InvariantViolation("certified must hold exactly when probability reaches one")
        object.__setattr__(self, "probability", prob)


def element_of_reality(
    preparation: Preparation,
    hamiltonian: HermitianOperator | None,
    at_time: float,
    observable: ProjectiveDecomposition | None = None,
) -> ElementOfReality | None:
    """Certainty check at a later time, from the preparation alone.

    Without an observable, the question "is the system in its evolved
    state?" is certain by construction: the answer is the time-dependent
    projector onto the evolved state, returned as a certified element. With
    an observable, the outcome whose Born probability reaches certainty is
    returned, or None when every outcome stays genuinely uncertain.
    """
    if at_time < preparation.time:
        raise InvariantViolation("query time precedes the preparation")
    if hamiltonian is None:
        hamiltonian = HermitianOperator.zero(preparation.state.dim)
    forward = (
        np.eye(preparation.state.dim, dtype=complex)
        if hamiltonian.is_zero()
        else unitary_exponential(hamiltonian, at_time - preparation.time).matrix
    )
    evolved = StateVector.normalized(forward @ preparation.state.amplitudes)
    if observable is None:
        question = _projector_question(evolved.amplitudes)
        return ElementOfReality(question, "yes", 1.0, True)
    if observable.dim != preparation.state.dim:
        raise InvariantViolation("observable dimension differs from the preparation")
    label, prob = born_distribution(evolved, observable).most_likely()
    if prob >= 1.0 - CERTAINTY_TOL:
        return ElementOfReality(observable, label, prob, True)
    return None


def abl_certified_element(ctx: Context) -> ElementOfReality | None:
    """Certainty under both boundary conditions.

    Returns the intermediate outcome whose conditional probability reaches
    one — certain even when its Born weight is far from it — or None.
    """
    inter = _require_intermediate(ctx)
    label, prob = abl_distribution(ctx).most_likely()
    if prob >= 1.0 - CERTAINTY_TOL:
        return ElementOfReality(inter.observable, label, prob, True)
    return None


def picture_consistency_check(ctx: Context) -> float:
    """Max per-label gap between Schrödinger- and Heisenberg-picture evaluations.

    Schrödinger: propagate the kets, keep the projectors fixed. Heisenberg:
    keep the kets fixed at the preparation time and conjugate every
    projector to its event time. The two orderings compute the same
    conditional distribution; the return value is the numerical daylight
    between them (contract: at most 1e-10).
    """
    inter = _require_intermediate(ctx)
    schrodinger = abl_distribution(ctx)
    u_mid = _propagator(ctx, inter.time - ctx.preparation.time)
    u_post = _propagator(ctx, ctx.postselection.time - ctx.preparation.time)
    prepared = ctx.preparation.state.amplitudes
    post_proj = ctx.postselection.observable.projector(ctx.postselection.label)
    post_heis = u_post.conj().T @ post_proj @ u_post
    weights = np.empty(len(inter.observable.outcomes))
    for k, outcome in enumerate(inter.observable.outcomes):
        proj_heis = u_mid.conj().T @ outcome.projector @ u_mid
        branch = post_heis @ (proj_heis @ prepared)
        weights[k] = float(np.real(np.vdot(branch, branch)))
    total = float(weights.sum())
    if total <= DENOMINATOR_FLOOR:
        raise ImpossibleOutcomeError("post-selection unreachable in the Heisenberg evaluation")
    discrepancy = 0.0
    for k, label in enumerate(inter.observable.labels):
        discrepancy = max(discrepancy, abs(schrodinger.probability(label) - weights[k] / total))
    return discrepancy
