"""Random generators for unitaries, isometries, POVMs and hidden states.

All functions take an explicit :class:`numpy.random.Generator`. Streams are
derived with :func:`stream`, which uses numpy's PCG64 bit generator seeded
through ``SeedSequence(seed).spawn``; stream ``k`` of seed ``s`` is the same
sequence on every platform for a given numpy release.
"""

from __future__ import annotations

import numpy as np

from .errors import DomainError
from .linalg import Povm, validate_povm


def stream(seed: int, index: int = 0, n_streams: int | None = None) -> np.random.Generator:
    """Independent generator number ``index`` derived from ``seed``.

    ``n_streams`` only sets how many children are spawned; child ``k`` does
    not depend on it.
    """
    n = max(index + 1, n_streams or 0)
    child = np.random.SeedSequence(seed).spawn(n)[index]
    return np.random.Generator(np.random.PCG64(child))


def complex_gaussian(rng: np.random.Generator, shape) -> np.ndarray:
    """Standard circular complex normals, ``E|z|^2 = 1``."""
    g = rng.standard_normal(tuple(np.atleast_1d(shape)) + (2,))
    return (g[..., 0] + 1j * g[..., 1]) / np.sqrt(2.0)


def unit_vectors(rng: np.random.Generator, n: int, d: int) -> np.ndarray:
    """``n`` unitarily invariant random unit vectors in C^d, shape ``(n, d)``."""
    z = complex_gaussian(rng, (n, d))
    return z / np.linalg.norm(z, axis=1, keepdims=True)


def haar_isometry(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    """Haar-random isometry ``V`` of shape ``(rows, cols)`` with ``V^† V = I``."""
    if rows < cols:
        raise DomainError(f"isometry needs rows >= cols, got {rows}x{cols}")
    z = complex_gaussian(rng, (rows, cols))
    q, r = np.linalg.qr(z)
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph[np.newaxis, :]


def haar_unitary(rng: np.random.Generator, d: int) -> np.ndarray:
    return haar_isometry(rng, d, d)


def kraus_from_isometry(v: np.ndarray, n_ops: int) -> list[np.ndarray]:
    """Split a ``(n_ops*d, d)`` isometry into ``n_ops`` blocks of shape ``(d, d)``."""
    rows, d = v.shape
    if rows != n_ops * d:
        raise DomainError(f"isometry has {rows} rows, expected {n_ops * d}")
    return [v[k * d:(k + 1) * d, :].copy() for k in range(n_ops)]


def random_rank_one_povm(rng: np.random.Generator, d: int, n_outcomes: int | None = None) -> Povm:
    """POVM whose elements are ``|v_k><v_k|`` for the rows of a Haar isometry's adjoint."""
    n = d if n_outcomes is None else n_outcomes
    v = haar_isometry(rng, n, d)
    return validate_povm([np.outer(v[k].conj(), v[k]) for k in range(n)])


def random_povm(rng: np.random.Generator, d: int, n_outcomes: int, rank: int) -> Povm:
    """POVM with elements ``V_k^† V_k`` of rank ``rank`` (generically non-projective)."""
    v = haar_isometry(rng, n_outcomes * rank, d)
    blocks = [v[k * rank:(k + 1) * rank, :] for k in range(n_outcomes)]
    return validate_povm([b.conj().T @ b for b in blocks])


def random_projective(rng: np.random.Generator, d: int) -> Povm:
    u = haar_unitary(rng, d)
    return validate_povm([np.outer(u[:, k], u[:, k].conj()) for k in range(d)])


def random_general_povm(rng: np.random.Generator, d: int) -> Povm:
    """Random POVM whose element ranks add up to more than ``d``, so it is not projective."""
    n_out = int(rng.integers(2, d + 2))
    rank = int(rng.integers(d // n_out + 1, d + 1))
    return random_povm(rng, d, n_out, rank)
