"""Local Kraus channels and the transfer of the model to transformed states.

If ``rho2 = Σ (M_k ⊗ N_l) rho1 (M_k ⊗ N_l)^†``, then measuring ``A_i`` on
``rho2`` has the same statistics as measuring the pulled-back element
``Σ_k M_k^† A_i M_k`` on ``rho1``. Running the base model on the pulled-back
measurements therefore simulates ``rho2`` with the same hidden variables.
Only product channels are representable; there is no way to correlate the
two wings.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DimensionMismatch, DomainError, InvalidChannel
from .linalg import TOL_COMPLETE, TOL_EIG, TOL_HERM, Povm, as_operator, hermitian_deviation, validate_povm
from .model import JointEstimate, ModelConfig, joint_prob_mc
from .sampling import haar_isometry, kraus_from_isometry


@dataclass(frozen=True)
class KrausChannel:
    dim: int
    kraus_ops: tuple[np.ndarray, ...]

    def __post_init__(self):
        ops = tuple(np.asarray(k, dtype=np.complex128) for k in self.kraus_ops)
        if not ops:
            raise InvalidChannel("channel needs at least one Kraus operator")
        for n, k in enumerate(ops):
            if k.shape != (self.dim, self.dim):
                raise InvalidChannel(f"Kraus operator {n} has shape {k.shape}, expected {(self.dim, self.dim)}")
        gap = float(np.max(np.abs(sum(k.conj().T @ k for k in ops) - np.eye(self.dim))))
        if gap > TOL_COMPLETE:
            raise InvalidChannel(f"Kraus operators are not complete (deviation {gap:.3e})")
        for k in ops:
            k.setflags(write=False)
        object.__setattr__(self, "kraus_ops", ops)

    @classmethod
    def from_ops(cls, ops: Sequence) -> "KrausChannel":
        ops = [np.asarray(k, dtype=np.complex128) for k in ops]
        if not ops or ops[0].ndim != 2:
            raise InvalidChannel("expected a non-empty list of square matrices")
        return cls(ops[0].shape[0], tuple(ops))

    @classmethod
    def identity(cls, d: int) -> "KrausChannel":
        return cls(d, (np.eye(d, dtype=np.complex128),))

    @classmethod
    def unitary(cls, u) -> "KrausChannel":
        u = np.asarray(u, dtype=np.complex128)
        return cls(u.shape[0], (u,))

    @classmethod
    def fully_depolarizing(cls, d: int) -> "KrausChannel":
        """``rho -> Tr(rho) I/d`` via the ``d^2`` operators ``|a><b| / sqrt(d)``."""
        ops = []
        for a in range(d):
            for b in range(d):
                k = np.zeros((d, d), dtype=np.complex128)
                k[a, b] = 1.0 / np.sqrt(d)
                ops.append(k)
        return cls(d, tuple(ops))

    @classmethod
    def depolarizing_qubit(cls, p: float) -> "KrausChannel":
        sx = np.array([[0, 1], [1, 0]], dtype=np.complex128)
        sy = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
        sz = np.array([[1, 0], [0, -1]], dtype=np.complex128)
        c = np.sqrt(p / 3.0)
        return cls(2, (np.sqrt(1.0 - p) * np.eye(2, dtype=np.complex128), c * sx, c * sy, c * sz))

    def apply(self, rho) -> np.ndarray:
        rho = as_operator(rho, self.dim)
        return sum(k @ rho @ k.conj().T for k in self.kraus_ops)

    def adjoint(self, op) -> np.ndarray:
        """Heisenberg-picture action ``Σ_k M_k^† op M_k``."""
        op = as_operator(op, self.dim)
        return sum(k.conj().T @ op @ k for k in self.kraus_ops)


def pullback_measurement(povm: Povm, ch: KrausChannel) -> Povm:
    """Measurement on the input that reproduces ``povm`` measured after ``ch``."""
    if povm.dim != ch.dim:
        raise DimensionMismatch(f"POVM acts on C^{povm.dim}, channel on C^{ch.dim}")
    return validate_povm([ch.adjoint(e) for e in povm.elements])


def apply_channel_to_state(rho, ch_a: KrausChannel, ch_b: KrausChannel) -> np.ndarray:
    """``Σ_{k,l} (M_k ⊗ N_l) rho (M_k ⊗ N_l)^†`` for a state on C^dA ⊗ C^dB."""
    da, db = ch_a.dim, ch_b.dim
    rho = as_operator(rho)
    if rho.shape[0] != da * db:
        raise DimensionMismatch(f"state is {rho.shape[0]}-dimensional, channels act on {da}x{db}")
    dev = hermitian_deviation(rho)
    if dev > TOL_HERM:
        raise DomainError(f"state is not Hermitian (deviation {dev:.3e})")
    # one wing at a time
    r = rho.reshape(da, db, da, db)
    out = np.zeros_like(r)
    for m in ch_a.kraus_ops:
        out += np.einsum("ia,abcd,jc->ibjd", m, r, m.conj(), optimize=True)
    r = out
    out = np.zeros_like(r)
    for n in ch_b.kraus_ops:
        out += np.einsum("jb,abcd,kd->ajck", n, r, n.conj(), optimize=True)
    result = out.reshape(da * db, da * db)
    if np.linalg.eigvalsh(0.5 * (result + result.conj().T)).min() < -TOL_EIG:
        raise InvalidChannel("channel output is not positive")
    return result


def extended_model_prob(
    povm_a: Povm, povm_b: Povm, ch_a: KrausChannel, ch_b: KrausChannel, config: ModelConfig
) -> JointEstimate:
    """Model statistics for the channel-transformed state: the base model on pulled-back measurements."""
    if not povm_a.dim == povm_b.dim == ch_a.dim == ch_b.dim:
        raise DimensionMismatch("POVMs and channels must share one dimension")
    return joint_prob_mc(pullback_measurement(povm_a, ch_a), pullback_measurement(povm_b, ch_b), config)


def random_channel(rng: np.random.Generator, d: int, n_ops: int | None = None) -> KrausChannel:
    """Channel whose Kraus operators are the ``d x d`` blocks of a Haar-random isometry."""
    k = int(rng.integers(1, d + 2)) if n_ops is None else n_ops
    return KrausChannel.from_ops(kraus_from_isometry(haar_isometry(rng, k * d, d), k))
