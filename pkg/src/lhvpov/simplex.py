"""Simplex moment integrals behind the model's correlation function.

Let ``u`` be uniform on the probability simplex in d coordinates (the
squared moduli of a unitarily invariant random unit vector). Then

* ``J0 = E[u1 ; u1 > 1/d]``
* ``J1 = E[u1^2 ; u1 > 1/d]``
* ``Jnu = E[u1 u_nu ; u1 > 1/d]`` for any ``nu >= 2``, equal to ``(J0 - J1)/(d - 1)``

Closed forms are given for J0 and J1, together with two independent checks:
Gauss-Legendre quadrature of the one-dimensional marginal integrals and a
Dirichlet Monte Carlo estimate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, DomainError
from .sampling import stream
from .werner import paper_alpha


def _check_dim(d: int) -> int:
    if int(d) != d or d < 2:
        raise DomainError(f"dimension must be an integer >= 2, got {d!r}")
    return int(d)


def j0_closed(d: int) -> float:
    d = _check_dim(d)
    s = 1.0 - 1.0 / d
    return s ** (d - 1) / d + s ** d / d


def j1_closed(d: int) -> float:
    d = _check_dim(d)
    s = 1.0 - 1.0 / d
    return (1.0 / d ** 2 + 2.0 * s / d ** 2 + 2.0 * s ** 2 / (d * (d + 1))) * s ** (d - 1)


def jnu_closed(d: int) -> float:
    return (j0_closed(d) - j1_closed(d)) / (_check_dim(d) - 1)


def alpha_from_moments(d: int, j0: float, j1: float) -> float:
    return (d * d * j1 - d * j0) / (d - 1)


def alpha_closed(d: int) -> float:
    return alpha_from_moments(d, j0_closed(d), j1_closed(d))


def marginal_moment_quad(d: int, power: int) -> float:
    """``∫_{1/d}^1 u^power (d-1)(1-u)^(d-2) du`` by exact Gauss-Legendre quadrature.

    The integrand is a polynomial of degree ``power + d - 2``, so
    ``power + d`` nodes integrate it exactly.
    """
    d = _check_dim(d)
    nodes, wts = np.polynomial.legendre.leggauss(power + d)
    lo, hi = 1.0 / d, 1.0
    u = 0.5 * (hi - lo) * nodes + 0.5 * (hi + lo)
    f = u ** power * (d - 1) * (1.0 - u) ** (d - 2)
    return float(0.5 * (hi - lo) * np.dot(wts, f))


def j0_quad(d: int) -> float:
    return marginal_moment_quad(d, 1)


def j1_quad(d: int) -> float:
    return marginal_moment_quad(d, 2)


@dataclass(frozen=True)
class SimplexMoments:
    d: int
    J0: float
    J1: float
    Jnu: float
    alpha: float

    @classmethod
    def closed(cls, d: int) -> "SimplexMoments":
        j0, j1 = j0_closed(d), j1_closed(d)
        return cls(d, j0, j1, (j0 - j1) / (d - 1), alpha_from_moments(d, j0, j1))


@dataclass(frozen=True)
class MomentEstimate:
    """Monte Carlo estimates with standard errors.

    ``Jnu`` uses coordinate 2 and ``Jnu_last`` coordinate d; ``Jnu_identity``
    is the per-sample estimator of ``(J0 - J1)/(d-1)``.
    """

    d: int
    n_samples: int
    J0: float
    J1: float
    Jnu: float
    Jnu_last: float
    Jnu_identity: float
    alpha: float
    se_J0: float
    se_J1: float
    se_Jnu: float
    se_Jnu_last: float
    se_Jnu_identity: float
    se_alpha: float
    se_Jnu_diff: float  # SE of Jnu - Jnu_identity (paired)
    se_Jnu_sym: float  # SE of Jnu - Jnu_last (paired)

    @property
    def moments(self) -> SimplexMoments:
        return SimplexMoments(self.d, self.J0, self.J1, self.Jnu, self.alpha)


_CHUNK = 200_000


def _stats(total: np.ndarray, total_sq: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    mean = total / n
    if n < 2:
        return mean, np.full_like(mean, np.inf)
    var = np.maximum(total_sq / n - mean ** 2, 0.0) * n / (n - 1)
    return mean, np.sqrt(var / n)


def _moment_sums(d: int, n: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    k = 8
    total = np.zeros(k)
    total_sq = np.zeros(k)
    done = 0
    while done < n:
        m = min(_CHUNK, n - done)
        e = rng.standard_exponential((m, d))
        u = e / e.sum(axis=1, keepdims=True)
        u1 = u[:, 0]
        gate = (u1 > 1.0 / d).astype(float)
        j0 = u1 * gate
        j1 = u1 * u1 * gate
        jnu = u1 * u[:, 1] * gate
        jlast = u1 * u[:, d - 1] * gate
        jid = (j0 - j1) / (d - 1)
        alpha = (d * d * j1 - d * j0) / (d - 1)
        cols = np.stack([j0, j1, jnu, jlast, jid, alpha, jnu - jid, jnu - jlast], axis=1)
        total += cols.sum(axis=0)
        total_sq += (cols * cols).sum(axis=0)
        done += m
    return total, total_sq


def moments_mc(d: int, n_samples: int, seed: int, workers: int = 1) -> MomentEstimate:
    """Monte Carlo estimate of the simplex moments.

    Points on the simplex are normalized vectors of ``d`` unit-rate
    exponentials (flat Dirichlet). Samples are split evenly over ``workers``
    streams and their sums merged in stream order, so the result depends on
    ``(seed, n_samples, workers)`` only.
    """
    d = _check_dim(d)
    if n_samples < 1:
        raise DomainError("n_samples must be >= 1")
    workers = max(1, int(workers))
    counts = [n_samples // workers + (1 if w < n_samples % workers else 0) for w in range(workers)]
    total = np.zeros(8)
    total_sq = np.zeros(8)
    for w, n in enumerate(counts):
        if n == 0:
            continue
        s, sq = _moment_sums(d, n, stream(seed, w, workers))
        total += s
        total_sq += sq
    mean, se = _stats(total, total_sq, n_samples)
    return MomentEstimate(
        d=d,
        n_samples=n_samples,
        J0=float(mean[0]),
        J1=float(mean[1]),
        Jnu=float(mean[2]),
        Jnu_last=float(mean[3]),
        Jnu_identity=float(mean[4]),
        alpha=float(mean[5]),
        se_J0=float(se[0]),
        se_J1=float(se[1]),
        se_Jnu=float(se[2]),
        se_Jnu_last=float(se[3]),
        se_Jnu_identity=float(se[4]),
        se_alpha=float(se[5]),
        se_Jnu_diff=float(se[6]),
        se_Jnu_sym=float(se[7]),
    )


def _overlap_sq(p, q) -> float:
    p = np.asarray(p, dtype=np.complex128)
    q = np.asarray(q, dtype=np.complex128)
    if p.shape != q.shape:
        raise DimensionMismatch(f"vector lengths differ: {p.shape} vs {q.shape}")
    return float(abs(np.vdot(p, q)) ** 2)


def jij(x_i: float, p_i, y_j: float, q_j, d: int) -> float:
    """Gated overlap integral ``x y E[<λ|P|λ><λ|Q|λ> ; <λ|P|λ> > 1/d]``."""
    d = _check_dim(d)
    if len(p_i) != d:
        raise DimensionMismatch(f"direction has length {len(p_i)}, expected {d}")
    ov = _overlap_sq(p_i, q_j)
    j0, j1 = j0_closed(d), j1_closed(d)
    return x_i * y_j * (j0 - j1) / (d - 1) + alpha_from_moments(d, j0, j1) * x_i * y_j * ov / d


def model_correlation_closed(x_i: float, p_i, y_j: float, q_j, d: int, alpha: float | None = None) -> float:
    """Joint probability the model assigns to rank-one outcomes ``x|p><p|`` and ``y|q><q|``.

    ``alpha`` defaults to the value the model actually simulates; passing a
    different one evaluates the same expression for another Werner weight.
    """
    d = _check_dim(d)
    if len(p_i) != d:
        raise DimensionMismatch(f"direction has length {len(p_i)}, expected {d}")
    a = paper_alpha(d) if alpha is None else alpha
    ov = _overlap_sq(p_i, q_j)
    return (d - 1 + a) / (d * d * (d - 1)) * x_i * y_j - a / (d * (d - 1)) * ov * x_i * y_j


def model_table_closed(povm_a, povm_b, alpha: float | None = None) -> np.ndarray:
    """Closed-form model table over raw outcomes of two fine-grained POVMs."""
    if povm_a.dim != povm_b.dim:
        raise DimensionMismatch(f"POVM dimensions differ: {povm_a.dim} vs {povm_b.dim}")
    d = _check_dim(povm_a.dim)
    a = paper_alpha(d) if alpha is None else alpha
    ov = np.abs(povm_a.directions.conj() @ povm_b.directions.T) ** 2
    xy = np.outer(povm_a.weights, povm_b.weights)
    fine = (d - 1 + a) / (d * d * (d - 1)) * xy - a / (d * (d - 1)) * ov * xy
    return povm_a.aggregation.T @ fine @ povm_b.aggregation
