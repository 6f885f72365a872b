"""The local hidden-variable model for POV measurements on Werner states.

The hidden variable is a unit vector λ in C^d drawn from the unitarily
invariant measure. Given fine-grained measurements ``{x_i |p_i><p_i|}`` for
Alice and ``{y_j |q_j><q_j|}`` for Bob:

* Alice accepts outcome ``i`` with probability ``x_i |<λ|p_i>|^2`` provided
  ``|<λ|p_i>|^2 > 1/d``; otherwise rejection happens and outcome ``i`` is
  reported with probability ``x_i / d``.
* Bob reports ``j`` with probability ``y_j (1 - |<λ|q_j>|^2) / (d - 1)``.

Averaging the product of both responses over λ reproduces the Born-rule
statistics of the Werner state with weight :func:`~lhvpov.werner.paper_alpha`.

Randomness: stream ``w`` of a run with seed ``s`` is
``PCG64(SeedSequence(s).spawn(workers)[w])``; each worker draws its share of
the samples in fixed-size chunks and the partial sums are merged in worker
order, so results are reproducible for a fixed ``(seed, n, workers)``.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, DomainError
from .linalg import TOL_NORM, Povm
from .sampling import stream, unit_vectors

CHUNK = 100_000


@dataclass(frozen=True)
class HiddenState:
    vector: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vector, dtype=np.complex128)
        if v.ndim != 1:
            raise DimensionMismatch(f"hidden state must be a vector, got shape {v.shape}")
        norm = float(np.linalg.norm(v))
        if abs(norm - 1.0) > TOL_NORM:
            raise ValueError(f"hidden state is not normalized (norm {norm})")
        object.__setattr__(self, "vector", v)

    @property
    def dim(self) -> int:
        return self.vector.shape[0]


@dataclass(frozen=True)
class LocalResponse:
    """Outcome probabilities for one party given λ, indexed by fine-grained outcome."""

    outcome_probs: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.outcome_probs, dtype=float)
        if np.any(p < -1e-12) or np.any(p > 1 + 1e-12) or abs(p.sum() - 1.0) > 1e-12:
            raise ValueError(f"not a probability vector: {p}")
        object.__setattr__(self, "outcome_probs", p)

    def aggregate(self, povm: Povm) -> np.ndarray:
        """Sum fine-grained probabilities into the raw outcomes of ``povm``."""
        return self.outcome_probs @ povm.aggregation


@dataclass(frozen=True)
class ModelConfig:
    seed: int = 0
    n_lambda: int = 1_000_000
    workers: int = 1
    # Θ(0) = 0: an overlap exactly at 1/d is not accepted
    theta_at_zero: bool = False

    def __post_init__(self):
        if self.n_lambda < 1:
            raise DomainError("n_lambda must be >= 1")
        if self.workers < 1:
            raise DomainError("workers must be >= 1")
        if self.theta_at_zero:
            raise DomainError("only the Θ(0) = 0 convention is supported")


def sample_lambda(d: int, rng: np.random.Generator) -> HiddenState:
    if d < 2:
        raise DomainError(f"dimension must be >= 2, got {d}")
    return HiddenState(unit_vectors(rng, 1, d)[0])


def _check_dims(povm: Povm, d: int) -> None:
    if povm.dim != d:
        raise DimensionMismatch(f"POVM acts on C^{povm.dim}, hidden state on C^{d}")
    if not povm.fine_grained:
        raise DomainError("POVM has not been fine-grained")


def _overlaps(povm: Povm, lam: np.ndarray) -> np.ndarray:
    """``|<λ|p_k>|^2`` for a batch of hidden states ``lam`` of shape ``(n, d)``."""
    return np.abs(lam.conj() @ povm.directions.T) ** 2


def alice_probs(povm: Povm, lam: np.ndarray) -> np.ndarray:
    """Alice's fine-grained response for a batch of hidden states, shape ``(n, n_fine)``."""
    d = povm.dim
    x = povm.weights
    ov = _overlaps(povm, lam)
    accept = x * ov * (ov > 1.0 / d)
    reject = 1.0 - accept.sum(axis=1, keepdims=True)
    return accept + reject * (x / d)


def bob_probs(povm: Povm, lam: np.ndarray) -> np.ndarray:
    """Bob's fine-grained response for a batch of hidden states, shape ``(n, n_fine)``."""
    d = povm.dim
    if d < 2:
        raise DomainError("Bob's response needs d >= 2")
    return povm.weights * (1.0 - _overlaps(povm, lam)) / (d - 1)


def alice_response(povm: Povm, lam: HiddenState) -> LocalResponse:
    _check_dims(povm, lam.dim)
    return LocalResponse(alice_probs(povm, lam.vector[np.newaxis, :])[0])


def bob_response(povm: Povm, lam: HiddenState) -> LocalResponse:
    _check_dims(povm, lam.dim)
    return LocalResponse(bob_probs(povm, lam.vector[np.newaxis, :])[0])


def rejection_probability(povm: Povm, lam: np.ndarray) -> np.ndarray:
    d = povm.dim
    ov = _overlaps(povm, np.atleast_2d(lam))
    return 1.0 - (povm.weights * ov * (ov > 1.0 / d)).sum(axis=1)


@dataclass(frozen=True)
class JointEstimate:
    """Monte Carlo joint-probability table over raw outcomes with standard errors."""

    probs: np.ndarray
    se: np.ndarray
    n_lambda: int

    def within(self, expected: np.ndarray, n_se: float = 4.0, floor: float = 1e-12) -> np.ndarray:
        return np.abs(self.probs - expected) <= n_se * self.se + floor


def _joint_sums(povm_a: Povm, povm_b: Povm, n: int, seed: int, index: int, workers: int):
    rng = stream(seed, index, workers)
    d = povm_a.dim
    shape = (povm_a.n_outcomes, povm_b.n_outcomes)
    total = np.zeros(shape)
    total_sq = np.zeros(shape)
    done = 0
    while done < n:
        m = min(CHUNK, n - done)
        lam = unit_vectors(rng, m, d)
        a = alice_probs(povm_a, lam) @ povm_a.aggregation
        b = bob_probs(povm_b, lam) @ povm_b.aggregation
        total += a.T @ b
        total_sq += (a * a).T @ (b * b)
        done += m
    return total, total_sq


def _split(n: int, workers: int) -> list[int]:
    return [n // workers + (1 if w < n % workers else 0) for w in range(workers)]


def joint_prob_mc(povm_a: Povm, povm_b: Povm, config: ModelConfig) -> JointEstimate:
    """Estimate ``∫ dλ ω(λ) Pr(A_i|λ) Pr(B_j|λ)`` by averaging analytic responses."""
    if povm_a.dim != povm_b.dim:
        raise DimensionMismatch(f"POVM dimensions differ: {povm_a.dim} vs {povm_b.dim}")
    _check_dims(povm_a, povm_a.dim)
    _check_dims(povm_b, povm_b.dim)
    counts = _split(config.n_lambda, config.workers)
    jobs = [(povm_a, povm_b, n, config.seed, w, config.workers) for w, n in enumerate(counts)]
    if config.workers == 1:
        parts = [_joint_sums(*job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            parts = list(pool.map(_joint_sums, *zip(*jobs)))
    total = np.zeros((povm_a.n_outcomes, povm_b.n_outcomes))
    total_sq = np.zeros_like(total)
    for s, sq in parts:
        total += s
        total_sq += sq
    n = config.n_lambda
    mean = total / n
    if n > 1:
        var = np.maximum(total_sq / n - mean ** 2, 0.0) * n / (n - 1)
        se = np.sqrt(var / n)
    else:
        se = np.full_like(mean, np.inf)
    return JointEstimate(mean, se, n)


def _draw(cum: np.ndarray, u: np.ndarray) -> np.ndarray:
    idx = (u[:, np.newaxis] >= cum[:, :-1]).sum(axis=1)
    return idx


def _simulate_chunk(povm_a: Povm, povm_b: Povm, n: int, seed: int, index: int, workers: int) -> np.ndarray:
    rng = stream(seed, index, workers)
    d = povm_a.dim
    out = np.empty((n, 2), dtype=np.int64)
    done = 0
    while done < n:
        m = min(CHUNK, n - done)
        lam = unit_vectors(rng, m, d)
        a = alice_probs(povm_a, lam) @ povm_a.aggregation
        b = bob_probs(povm_b, lam) @ povm_b.aggregation
        u = rng.random((m, 2))
        # normalize the cumulative sums so rounding can never leave u beyond the last edge
        ca = np.cumsum(a, axis=1)
        cb = np.cumsum(b, axis=1)
        ca /= ca[:, -1:]
        cb /= cb[:, -1:]
        out[done:done + m, 0] = _draw(ca, u[:, 0])
        out[done:done + m, 1] = _draw(cb, u[:, 1])
        done += m
    return out


def simulate_runs(povm_a: Povm, povm_b: Povm, n_runs: int, seed: int, workers: int = 1) -> np.ndarray:
    """Sample ``n_runs`` experimental runs, returning an ``(n_runs, 2)`` array of raw outcomes.

    Each run draws λ, then Alice's and Bob's outcomes independently from
    their responses to that λ.
    """
    if povm_a.dim != povm_b.dim:
        raise DimensionMismatch(f"POVM dimensions differ: {povm_a.dim} vs {povm_b.dim}")
    if n_runs < 0:
        raise DomainError("n_runs must be >= 0")
    if n_runs == 0:
        return np.empty((0, 2), dtype=np.int64)
    _check_dims(povm_a, povm_a.dim)
    _check_dims(povm_b, povm_b.dim)
    workers = max(1, int(workers))
    chunks = [
        _simulate_chunk(povm_a, povm_b, n, seed, w, workers)
        for w, n in enumerate(_split(n_runs, workers))
        if n > 0
    ]
    return np.concatenate(chunks, axis=0)


def frequency_table(runs: np.ndarray, n_a: int, n_b: int) -> np.ndarray:
    table = np.zeros((n_a, n_b))
    if len(runs):
        np.add.at(table, (runs[:, 0], runs[:, 1]), 1.0)
        table /= len(runs)
    return table
