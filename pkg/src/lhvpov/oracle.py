"""Born-rule ground truth by explicit d^2 x d^2 matrix arithmetic."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .errors import DimensionMismatch
from .linalg import TOL_EIG, Povm, as_operator


def _bipartite(rho, d: int) -> np.ndarray:
    rho = as_operator(rho)
    if rho.shape[0] != d * d:
        raise DimensionMismatch(f"state is {rho.shape[0]}-dimensional, expected {d * d}")
    return rho


def born_prob(rho, povm_a: Povm, povm_b: Povm) -> np.ndarray:
    """``Tr(rho A_i ⊗ B_j)`` for every pair of raw outcomes."""
    if povm_a.dim != povm_b.dim:
        raise DimensionMismatch(f"POVM dimensions differ: {povm_a.dim} vs {povm_b.dim}")
    d = povm_a.dim
    rho = _bipartite(rho, d)
    table = np.empty((povm_a.n_outcomes, povm_b.n_outcomes), dtype=np.complex128)
    for i, a in enumerate(povm_a.elements):
        for j, b in enumerate(povm_b.elements):
            table[i, j] = np.trace(rho @ np.kron(a, b))
    return table.real.copy()


def reduced_state(rho, d: int, keep: int = 0) -> np.ndarray:
    r = _bipartite(rho, d).reshape(d, d, d, d)
    if keep == 0:
        return np.einsum("abcb->ac", r)
    if keep == 1:
        return np.einsum("abad->bd", r)
    raise ValueError("keep must be 0 or 1")


def partial_transpose(rho, subsystem: int = 1, d: int | None = None) -> np.ndarray:
    rho = as_operator(rho)
    if d is None:
        d = int(round(np.sqrt(rho.shape[0])))
    r = _bipartite(rho, d).reshape(d, d, d, d)
    if subsystem == 0:
        r = r.transpose(2, 1, 0, 3)
    elif subsystem == 1:
        r = r.transpose(0, 3, 2, 1)
    else:
        raise ValueError("subsystem must be 0 or 1")
    return r.reshape(d * d, d * d)


def is_ppt(rho, tol: float = TOL_EIG) -> bool:
    pt = partial_transpose(rho, 1)
    return bool(np.linalg.eigvalsh(0.5 * (pt + pt.conj().T)).min() >= -tol)


def correlator(rho, povm_a: Povm, povm_b: Povm) -> float:
    """``E = Σ_ij (-1)^(i+j) p(i,j)`` for two-outcome measurements (outcome 0 ↦ +1)."""
    if povm_a.n_outcomes != 2 or povm_b.n_outcomes != 2:
        raise DimensionMismatch("correlator needs two-outcome measurements")
    p = born_prob(rho, povm_a, povm_b)
    return float(p[0, 0] + p[1, 1] - p[0, 1] - p[1, 0])


def chsh_value(rho, a0: Povm, a1: Povm, b0: Povm, b1: Povm) -> float:
    """``E(a0,b0) + E(a0,b1) + E(a1,b0) - E(a1,b1)`` for qubit pairs."""
    for m in (a0, a1, b0, b1):
        if m.dim != 2:
            raise DimensionMismatch("CHSH evaluation is defined for qubits only")
    return (
        correlator(rho, a0, b0)
        + correlator(rho, a0, b1)
        + correlator(rho, a1, b0)
        - correlator(rho, a1, b1)
    )


def dichotomic(direction: Sequence[complex]) -> list[np.ndarray]:
    """Projective pair ``{|v><v|, I - |v><v|}`` for a unit vector in C^2."""
    v = np.asarray(direction, dtype=np.complex128)
    p = np.outer(v, v.conj())
    return [p, np.eye(len(v)) - p]


def bloch_direction(theta: float, phi: float = 0.0) -> np.ndarray:
    """Qubit state whose Bloch vector has polar angle ``theta`` and azimuth ``phi``."""
    return np.array([np.cos(theta / 2), np.exp(1j * phi) * np.sin(theta / 2)])
