"""Dense complex linear algebra: operators, spectral decomposition and POVMs.

Operators are plain ``complex128`` numpy arrays. The helpers here check the
Hermitian/PSD predicates under the package tolerances and build the
fine-grained (weighted rank-one) form of a POVM that the hidden-variable
response functions consume.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionMismatch, InvalidPovm, NotHermitian

TOL_HERM = 1e-9
TOL_COMPLETE = 1e-9
TOL_EIG = 1e-9
TOL_RECON = 1e-8
TOL_NORM = 1e-10
# eigenvalues closer than this are treated as one degenerate cluster
DEGENERACY_TOL = 1e-8


def as_operator(op, dim: int | None = None) -> np.ndarray:
    """Return ``op`` as a read-only square complex128 array."""
    m = np.array(op, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"operator must be a square matrix, got shape {m.shape}")
    if dim is not None and m.shape[0] != dim:
        raise DimensionMismatch(f"expected a {dim}x{dim} operator, got {m.shape[0]}x{m.shape[1]}")
    m.setflags(write=False)
    return m


def _as_vector(v) -> np.ndarray:
    u = np.asarray(v, dtype=np.complex128)
    if u.ndim != 1:
        raise DimensionMismatch(f"expected a vector, got shape {u.shape}")
    return u


def dagger(op) -> np.ndarray:
    m = np.asarray(op, dtype=np.complex128)
    if m.ndim != 2:
        raise DimensionMismatch(f"expected a matrix, got shape {m.shape}")
    return m.conj().T


def trace(op) -> complex:
    m = np.asarray(op, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"trace needs a square matrix, got shape {m.shape}")
    return complex(np.trace(m))


def tensor(a, b) -> np.ndarray:
    """Kronecker product ``a ⊗ b`` of two square operators."""
    a = as_operator(a)
    b = as_operator(b)
    return np.kron(a, b)


def overlap(u, v) -> complex:
    """Inner product ``<u|v>`` (conjugate-linear in ``u``)."""
    u = _as_vector(u)
    v = _as_vector(v)
    if u.shape != v.shape:
        raise DimensionMismatch(f"vector lengths differ: {u.shape[0]} vs {v.shape[0]}")
    return complex(np.vdot(u, v))


def projector(v) -> np.ndarray:
    """Rank-one projector ``|v><v|`` for a (not necessarily normalized) vector."""
    v = _as_vector(v)
    return np.outer(v, v.conj())


def hermitian_deviation(op) -> float:
    m = np.asarray(op, dtype=np.complex128)
    return float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0


def is_hermitian(op, tol: float = TOL_HERM) -> bool:
    return hermitian_deviation(op) <= tol


def is_psd(op, tol: float = TOL_EIG) -> bool:
    m = as_operator(op)
    if not is_hermitian(m):
        return False
    return bool(np.linalg.eigvalsh(_hermitian_part(m)).min() >= -tol)


def _hermitian_part(m: np.ndarray) -> np.ndarray:
    return 0.5 * (m + m.conj().T)


def canonical_phase(v: np.ndarray, tol: float = TOL_NORM) -> np.ndarray:
    """Rotate the global phase so the first component above ``tol`` is real and positive."""
    v = np.asarray(v, dtype=np.complex128)
    for c in v:
        mag = abs(c)
        if mag > tol:
            return v * (c.conjugate() / mag)
    return v.copy()


def _lex_key(v: np.ndarray) -> tuple[float, ...]:
    return tuple(x for c in v for x in (float(c.real), float(c.imag)))


def _gram_schmidt(vectors: Sequence[np.ndarray]) -> list[np.ndarray]:
    out: list[np.ndarray] = []
    for v in vectors:
        w = v.copy()
        for u in out:
            w = w - np.vdot(u, w) * u
        w = w / np.linalg.norm(w)
        out.append(w)
    return out


def spectral_decompose(op) -> list[tuple[float, np.ndarray]]:
    """Eigenpairs of a Hermitian operator in a canonical, reproducible form.

    Eigenvalues come out in descending order. Every eigenvector has its
    global phase fixed by :func:`canonical_phase`. Inside a degenerate
    cluster the basis is Gram-Schmidt orthonormalized in solver order,
    re-phased, and then ordered by descending lexicographic comparison of
    its ``(re, im)`` component tuples; the eigenvalue reported for each
    direction is its Rayleigh quotient.
    """
    m = as_operator(op)
    dev = hermitian_deviation(m)
    if dev > TOL_HERM:
        raise NotHermitian(dev)
    h = _hermitian_part(m)
    evals, evecs = np.linalg.eigh(h)
    evals = evals[::-1]
    evecs = evecs[:, ::-1]

    pairs: list[tuple[float, np.ndarray]] = []
    start = 0
    n = len(evals)
    while start < n:
        stop = start + 1
        while stop < n and evals[stop - 1] - evals[stop] <= DEGENERACY_TOL:
            stop += 1
        vecs = [canonical_phase(evecs[:, k]) for k in range(start, stop)]
        if stop - start == 1:
            pairs.append((float(evals[start]), vecs[0]))
        else:
            basis = [canonical_phase(w) for w in _gram_schmidt(vecs)]
            basis.sort(key=_lex_key, reverse=True)
            for w in basis:
                pairs.append((float(np.vdot(w, h @ w).real), w))
        start = stop
    return pairs


@dataclass(frozen=True)
class RankOneElement:
    """``weight * |direction><direction|`` with ``0 <= weight <= 1``."""

    weight: float
    direction: np.ndarray

    def __post_init__(self):
        if not -TOL_EIG <= self.weight <= 1 + TOL_EIG:
            raise ValueError(f"weight {self.weight} outside [0, 1]")
        norm = float(np.linalg.norm(self.direction))
        if abs(norm - 1.0) > TOL_NORM:
            raise ValueError(f"direction is not normalized (norm {norm})")

    def operator(self) -> np.ndarray:
        return self.weight * projector(self.direction)


@dataclass(frozen=True)
class Povm:
    """A validated POVM together with its fine-grained rank-one form.

    ``fine_grained`` lists ``(outcome_index, RankOneElement)`` pairs; the
    outcome index points back into ``elements``. Build instances with
    :func:`validate_povm` rather than directly.
    """

    dim: int
    elements: tuple[np.ndarray, ...]
    fine_grained: tuple[tuple[int, RankOneElement], ...] = field(default=())

    @property
    def n_outcomes(self) -> int:
        return len(self.elements)

    @cached_property
    def weights(self) -> np.ndarray:
        return np.array([r.weight for _, r in self.fine_grained], dtype=float)

    @cached_property
    def directions(self) -> np.ndarray:
        """Fine-grained directions stacked as rows, shape ``(n_fine, dim)``."""
        if not self.fine_grained:
            return np.zeros((0, self.dim), dtype=np.complex128)
        return np.array([r.direction for _, r in self.fine_grained], dtype=np.complex128)

    @cached_property
    def outcome_index(self) -> np.ndarray:
        return np.array([i for i, _ in self.fine_grained], dtype=np.intp)

    @cached_property
    def aggregation(self) -> np.ndarray:
        """0/1 matrix of shape ``(n_fine, n_outcomes)`` summing children into parents."""
        agg = np.zeros((len(self.fine_grained), self.n_outcomes))
        agg[np.arange(len(self.fine_grained)), self.outcome_index] = 1.0
        return agg


def _check_elements(elements: Iterable) -> tuple[int, tuple[np.ndarray, ...]]:
    ops = tuple(as_operator(e) for e in elements)
    if not ops:
        raise InvalidPovm("not-complete", "POVM has no elements")
    dim = ops[0].shape[0]
    for k, e in enumerate(ops):
        if e.shape[0] != dim:
            raise DimensionMismatch(f"element {k} is {e.shape[0]}x{e.shape[0]}, expected {dim}x{dim}")
    for k, e in enumerate(ops):
        dev = hermitian_deviation(e)
        if dev > TOL_HERM:
            raise InvalidPovm("not-hermitian", f"element {k} deviates by {dev:.3e}")
    for k, e in enumerate(ops):
        lo = float(np.linalg.eigvalsh(_hermitian_part(e)).min())
        if lo < -TOL_EIG:
            raise InvalidPovm("not-psd", f"element {k} has eigenvalue {lo:.3e}")
    total = np.sum(ops, axis=0)
    gap = float(np.max(np.abs(total - np.eye(dim))))
    if gap > TOL_COMPLETE:
        raise InvalidPovm("not-complete", f"elements sum to identity only within {gap:.3e}")
    return dim, ops


def _decompose_element(k: int, e: np.ndarray) -> list[tuple[int, RankOneElement]]:
    out = []
    for lam, v in spectral_decompose(e):
        if lam > 1 + TOL_EIG:
            raise InvalidPovm("not-complete", f"element {k} has eigenvalue {lam:.6g} > 1")
        if lam < -TOL_EIG:
            raise InvalidPovm("not-psd", f"element {k} has eigenvalue {lam:.3e}")
        w = min(max(lam, 0.0), 1.0)
        if w <= TOL_EIG:
            continue
        out.append((k, RankOneElement(w, v)))
    return out


def fine_grain(povm: Povm) -> Povm:
    """Replace each element by its weighted rank-one spectral components.

    Components with (clipped) weight below ``TOL_EIG`` carry no probability
    and are dropped. The decomposition of degenerate elements is the fixed
    map given by :func:`spectral_decompose`.
    """
    dim, ops = _check_elements(povm.elements)
    if dim != povm.dim:
        raise DimensionMismatch(f"POVM declares dim {povm.dim} but elements are {dim}x{dim}")
    fine: list[tuple[int, RankOneElement]] = []
    for k, e in enumerate(ops):
        fine.extend(_decompose_element(k, e))
    return Povm(dim=dim, elements=ops, fine_grained=tuple(fine))


def validate_povm(elements: Iterable) -> Povm:
    """Check that ``elements`` form a POVM and return it fine-grained."""
    dim, ops = _check_elements(elements)
    return fine_grain(Povm(dim=dim, elements=ops))
