"""Shared test utilities: seeded random objects and brute-force oracles."""

from __future__ import annotations

import numpy as np

from qcontexts import (
    Context,
    HermitianOperator,
    Intermediate,
    PostSelection,
    Preparation,
    ProjectiveDecomposition,
    StateVector,
    born_distribution,
    evolve,
    lueders_collapse,
)


def random_state(rng: np.random.Generator, dim: int) -> StateVector:
    raw = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return StateVector.normalized(raw)


def random_unitary(rng: np.random.Generator, dim: int) -> np.ndarray:
    """Haar-ish random unitary via QR with the phase ambiguity fixed."""
    raw = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(raw)
    diag = np.diag(r)
    return q * (diag / np.abs(diag))


def random_observable(rng: np.random.Generator, dim: int, prefix: str = "o") -> ProjectiveDecomposition:
    """Nondegenerate observable with rank-1 projectors from a random unitary."""
    basis = random_unitary(rng, dim)
    states = [StateVector.normalized(basis[:, k]) for k in range(dim)]
    labels = tuple(f"{prefix}{k}" for k in range(dim))
    return ProjectiveDecomposition.from_states(states, labels, tuple(float(k) for k in range(dim)))


def random_hermitian(rng: np.random.Generator, dim: int, scale: float = 1.0) -> HermitianOperator:
    raw = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return HermitianOperator(scale * (raw + raw.conj().T) / 2)


def random_context(
    rng: np.random.Generator,
    dim: int,
    *,
    free: bool = False,
    performed: bool = True,
) -> Context:
    t1, t, t2 = np.sort(rng.uniform(-1.0, 2.0, size=3))
    # Keep the three events separated so the ordering invariant holds robustly.
    t = max(t, t1 + 1e-3)
    t2 = max(t2, t + 1e-3)
    hamiltonian = None if free else random_hermitian(rng, dim)
    post_obs = random_observable(rng, dim, prefix="b")
    label = f"b{rng.integers(dim)}"
    return Context(
        Preparation(random_state(rng, dim), float(t1)),
        PostSelection(post_obs, label, float(t2)),
        Intermediate(random_observable(rng, dim, prefix="c"), float(t), performed),
        hamiltonian,
    )


def enumerate_chain(ctx: Context) -> dict[tuple[str, str], float]:
    """Brute-force joint law of (intermediate label, final label).

    Walks the explicit measure-collapse-measure chain with the kinematics
    primitives, enumerating every branch instead of sampling — an
    independent route to the same statistics as the closed-form rule.
    """
    hamiltonian = ctx.hamiltonian or HermitianOperator.zero(ctx.dim)
    inter = ctx.intermediate
    evolved = evolve(ctx.preparation.state, hamiltonian, inter.time - ctx.preparation.time)
    first = born_distribution(evolved, inter.observable)
    joint: dict[tuple[str, str], float] = {}
    for c_label, c_prob in first.entries:
        if c_prob == 0.0:
            for b_label in ctx.postselection.observable.labels:
                joint[(c_label, b_label)] = 0.0
            continue
        collapsed = lueders_collapse(evolved, inter.observable, c_label)
        arrived = evolve(collapsed, hamiltonian, ctx.postselection.time - inter.time)
        second = born_distribution(arrived, ctx.postselection.observable)
        for b_label, b_prob in second.entries:
            joint[(c_label, b_label)] = c_prob * b_prob
    return joint


def conditional_from_joint(
    joint: dict[tuple[str, str], float], b_label: str, c_labels: tuple[str, ...]
) -> dict[str, float]:
    """Bayesian conditioning of the enumerated chain on the final outcome."""
    total = sum(joint[(c, b_label)] for c in c_labels)
    return {c: joint[(c, b_label)] / total for c in c_labels}
