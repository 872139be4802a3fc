"""Tests for joint states, rebasing, pointer selection, spreading, and facts."""

import dataclasses
import math

import numpy as np
import pytest

from qcontexts import (
    FactSequence,
    InvariantViolation,
    JointState,
    SpreadingModel,
    complete_basis,
    detector_click_simulation,
    fuzziness_resolvable,
    pointer_basis_select,
    premeasurement_joint,
    rebase_joint,
    spreading_sigma,
)
from helpers import random_unitary

RNG = np.random.default_rng(90125)

HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)


def random_joint(rng, system_dim, apparatus_dim) -> JointState:
    raw = rng.standard_normal((system_dim, apparatus_dim)) + 1j * rng.standard_normal(
        (system_dim, apparatus_dim)
    )
    return JointState.from_amplitudes(raw / np.linalg.norm(raw))


def random_record_joint(rng, dim) -> tuple[JointState, np.ndarray, np.ndarray]:
    """Premeasurement state with distinct coefficient magnitudes in random bases."""
    weights = np.sort(rng.uniform(0.5, 1.5, size=dim))[::-1]
    coeffs = np.sqrt(weights / weights.sum()) * np.exp(1j * rng.uniform(0, 2 * np.pi, size=dim))
    system = random_unitary(rng, dim)
    apparatus = random_unitary(rng, dim)
    return premeasurement_joint(coeffs, system, apparatus), system, apparatus


# --- premeasurement_joint -------------------------------------------------------


def test_premeasurement_basis_case():
    joint = premeasurement_joint([1.0, 0.0])
    ambient = joint.ambient_amplitudes()
    np.testing.assert_allclose(ambient, [[1, 0], [0, 0]])


def test_premeasurement_bell_case():
    joint = premeasurement_joint(np.array([1.0, 1.0]) / np.sqrt(2))
    np.testing.assert_allclose(joint.ambient_amplitudes(), np.eye(2) / np.sqrt(2))


def test_premeasurement_unit_norm():
    for _ in range(10):
        dim = int(RNG.integers(2, 5))
        joint, _, _ = random_record_joint(RNG, dim)
        assert abs(np.linalg.norm(joint.coefficient_matrix) - 1.0) < 1e-12


def test_premeasurement_rejects_unnormalized():
    with pytest.raises(InvariantViolation, match="unit power"):
        premeasurement_joint([1.0, 1.0])


def test_premeasurement_allows_larger_bases():
    joint = premeasurement_joint([0.6, 0.8], np.eye(3), np.eye(4))
    assert joint.system_dim == 3
    assert joint.apparatus_dim == 4
    assert joint.coefficient_matrix.shape == (3, 4)


# --- rebase_joint ----------------------------------------------------------------


def test_rebase_identity_basis_recovers_record():
    coeffs = np.array([np.sqrt(0.7), np.sqrt(0.3)])
    joint = premeasurement_joint(coeffs)
    rebased = rebase_joint(joint, np.eye(2))
    np.testing.assert_allclose(rebased.coefficients, coeffs, atol=1e-12)
    np.testing.assert_allclose(np.abs(rebased.relative_states), np.eye(2), atol=1e-12)
    assert rebased.orthogonality_score == 1.0


def test_rebase_bell_to_hadamard_stays_orthogonal():
    # Degenerate coefficients: the alternate basis works just as well.
    joint = premeasurement_joint(np.array([1.0, 1.0]) / np.sqrt(2))
    rebased = rebase_joint(joint, HADAMARD)
    s = 1 / np.sqrt(2)
    np.testing.assert_allclose(rebased.coefficients, [s, s], atol=1e-12)
    np.testing.assert_allclose(np.abs(rebased.relative_states.T), [[s, s], [s, s]], atol=1e-12)
    assert rebased.orthogonality_score > 1.0 - 1e-12


def test_rebase_skewed_state_loses_orthogonality():
    # Weights 0.9 / 0.1 rebased to the Hadamard pair: overlap (0.9 - 0.1) = 0.8.
    joint = premeasurement_joint([np.sqrt(0.9), np.sqrt(0.1)])
    rebased = rebase_joint(joint, HADAMARD)
    overlap = abs(np.vdot(rebased.relative_states[:, 0], rebased.relative_states[:, 1]))
    assert abs(overlap - 0.8) < 1e-12
    assert abs(rebased.orthogonality_score - 0.2) < 1e-12


def test_rebase_reconstruction_random():
    for _ in range(30):
        system_dim = int(RNG.integers(2, 5))
        apparatus_dim = int(RNG.integers(2, 5))
        joint = random_joint(RNG, system_dim, apparatus_dim)
        basis = random_unitary(RNG, apparatus_dim)
        rebased = rebase_joint(joint, basis)
        assert np.max(np.abs(rebased.reconstruct() - joint.ambient_amplitudes())) < 1e-10
        # The apparatus-outcome marginal keeps total probability 1 in any basis.
        assert abs(np.sum(rebased.coefficients**2) - 1.0) < 1e-10


def test_rebase_requires_complete_basis():
    joint = random_joint(RNG, 2, 3)
    with pytest.raises(InvariantViolation, match="complete"):
        rebase_joint(joint, np.eye(3)[:, :2])


def test_rebase_rejects_nonorthonormal_basis():
    joint = random_joint(RNG, 2, 2)
    with pytest.raises(InvariantViolation, match="orthonormal"):
        rebase_joint(joint, np.array([[1.0, 1.0], [0.0, 1.0]]))


# --- pointer_basis_select ----------------------------------------------------------


def test_pointer_recovers_declared_apparatus_basis():
    for _ in range(10):
        dim = int(RNG.integers(2, 5))
        joint, _, apparatus = random_record_joint(RNG, dim)
        schmidt = pointer_basis_select(joint)
        assert not schmidt.non_unique
        # Match recovered vectors to declared ones by overlap, up to phase/order.
        overlaps = np.abs(apparatus.conj().T @ schmidt.apparatus_states)
        for k in range(schmidt.rank):
            assert np.max(overlaps[:, k]) > 1.0 - 1e-9


def test_pointer_product_state_flags_non_unique():
    joint = premeasurement_joint([1.0, 0.0])
    schmidt = pointer_basis_select(joint)
    assert schmidt.rank == 1
    assert schmidt.non_unique


def test_pointer_bell_flags_non_unique():
    schmidt = pointer_basis_select(premeasurement_joint(np.array([1.0, 1.0]) / np.sqrt(2)))
    assert schmidt.non_unique


def test_random_bases_never_beat_the_pointer_score():
    for _ in range(10):
        dim = int(RNG.integers(2, 4))
        joint, _, _ = random_record_joint(RNG, dim)
        schmidt = pointer_basis_select(joint)
        pointer_score = rebase_joint(
            joint, complete_basis(schmidt.apparatus_states, joint.apparatus_dim)
        ).orthogonality_score
        for _ in range(50):
            challenger = rebase_joint(joint, random_unitary(RNG, dim)).orthogonality_score
            assert challenger <= pointer_score + 1e-9


# --- spreading ------------------------------------------------------------------------


def test_spreading_starts_at_sigma0():
    assert spreading_sigma(SpreadingModel(0.3, 2.0), 0.0) == 0.3


def test_spreading_asymptote_scales_inversely_with_mass():
    sigma0, mass = 0.5, 2.0
    t = 1e6 * mass * sigma0**2
    ratio = spreading_sigma(SpreadingModel(sigma0, 2 * mass), t) / spreading_sigma(
        SpreadingModel(sigma0, mass), t
    )
    assert abs(ratio - 0.5) < 1e-3


def test_spreading_heavy_limit_freezes():
    assert abs(spreading_sigma(SpreadingModel(0.4, 1e12), 5.0) - 0.4) < 1e-12


def test_spreading_monotonicity():
    model = SpreadingModel(0.2, 1.5)
    times = np.linspace(0, 10, 25)
    widths = [spreading_sigma(model, t) for t in times]
    assert all(b >= a for a, b in zip(widths, widths[1:]))
    heavier = [spreading_sigma(SpreadingModel(0.2, 3.0), t) for t in times]
    assert all(h <= w for h, w in zip(heavier[1:], widths[1:]))


def test_spreading_rejects_negative_time():
    with pytest.raises(InvariantViolation, match="nonnegative"):
        spreading_sigma(SpreadingModel(1.0, 1.0), -0.1)


def test_fuzziness_resolvable_boundary():
    assert fuzziness_resolvable(1e-3, 1e-6)
    assert not fuzziness_resolvable(1e-9, 1e-6)
    assert not fuzziness_resolvable(1e-6, 1e-6)  # strict inequality at the boundary


# --- detector facts ---------------------------------------------------------------------


def test_detector_zero_rate_never_clicks():
    sequence = detector_click_simulation(0.0, 0.5, 5.0, seed=1)
    assert not sequence.clicked
    assert sequence.click_time is None
    assert len(sequence.ticks) == 10
    assert all(kind == "nonclick" for _, kind in sequence.ticks)


def test_detector_sequences_are_well_formed():
    for seed in range(200):
        sequence = detector_click_simulation(2.0, 0.1, 5.0, seed=seed)
        kinds = [kind for _, kind in sequence.ticks]
        assert kinds.count("click") <= 1
        if "click" in kinds:
            assert kinds[-1] == "click"
            assert sequence.click_time == sequence.ticks[-1][0]
        times = [t for t, _ in sequence.ticks]
        assert all(b > a for a, b in zip(times, times[1:]))


def test_detector_deterministic():
    a = detector_click_simulation(1.5, 0.05, 8.0, seed=42)
    b = detector_click_simulation(1.5, 0.05, 8.0, seed=42)
    assert a == b


def test_detector_click_times_follow_exponential_law():
    # Empirical CDF against 1 - exp(-rate t) over a modest seeded batch.
    rate, tick = 2.0, 0.004
    times = []
    for seed in range(2000):
        sequence = detector_click_simulation(rate, tick, 10.0, seed=seed)
        if sequence.clicked:
            times.append(sequence.click_time)
    times.sort()
    n = len(times)
    assert n > 1990
    worst = 0.0
    for i, t in enumerate(times):
        cdf = 1.0 - math.exp(-rate * t)
        worst = max(worst, abs((i + 1) / n - cdf), abs(i / n - cdf))
    assert worst <= 0.03


def test_fact_sequence_is_append_only():
    sequence = detector_click_simulation(1.0, 0.2, 3.0, seed=5)
    with pytest.raises(dataclasses.FrozenInstanceError):
        sequence.click_time = None
    assert isinstance(sequence.ticks, tuple)


def test_fact_sequence_rejects_inconsistent_records():
    with pytest.raises(InvariantViolation, match="final"):
        FactSequence(((0.1, "click"), (0.2, "nonclick")), 0.1)
    with pytest.raises(InvariantViolation, match="increasing"):
        FactSequence(((0.2, "nonclick"), (0.1, "nonclick")), None)
    with pytest.raises(InvariantViolation, match="mirror"):
        FactSequence(((0.1, "nonclick"),), 0.1)
