"""Generalized Werner states on C^d ⊗ C^d."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError


def _check_dim(d: int) -> int:
    if int(d) != d or d < 2:
        raise DomainError(f"dimension must be an integer >= 2, got {d!r}")
    return int(d)


def paper_alpha(d: int) -> float:
    """Mixing weight simulated by the hidden-variable model in dimension ``d``.

    ``(d-1)^(d-1) d^(-d) (3d-1) / (d+1)``, which always exceeds the
    separability threshold ``1/(d+1)``.
    """
    d = _check_dim(d)
    alpha = (d - 1) ** (d - 1) * (3 * d - 1) / (d ** d * (d + 1))
    assert alpha > 1.0 / (d + 1)
    return alpha


def entanglement_threshold(d: int) -> float:
    return 1.0 / (_check_dim(d) + 1)


def swap_operator(d: int) -> np.ndarray:
    d = _check_dim(d)
    s = np.zeros((d * d, d * d), dtype=np.complex128)
    for a in range(d):
        for b in range(d):
            s[b * d + a, a * d + b] = 1.0
    return s


def antisymmetric_projector(d: int) -> np.ndarray:
    """``(I - SWAP)/2``, trace ``d(d-1)/2``."""
    d = _check_dim(d)
    return 0.5 * (np.eye(d * d) - swap_operator(d))


@dataclass(frozen=True)
class WernerState:
    """``alpha * 2 P_anti / (d(d-1)) + (1 - alpha) I / d^2``, kept symbolic."""

    d: int
    alpha: float

    def __post_init__(self):
        _check_dim(self.d)
        if not 0.0 <= self.alpha <= 1.0:
            raise DomainError(f"alpha must lie in [0, 1], got {self.alpha}")

    @classmethod
    def simulated(cls, d: int) -> "WernerState":
        return cls(d, paper_alpha(d))

    @property
    def entangled(self) -> bool:
        return self.alpha > entanglement_threshold(self.d)

    def materialize(self) -> np.ndarray:
        return materialize(self)

    def rank_one_prob(self, x: float, p, y: float, q) -> float:
        """``Tr(rho  x|p><p| ⊗ y|q><q|)`` without building rho."""
        ov = abs(np.vdot(p, q)) ** 2
        d, a = self.d, self.alpha
        return x * y * (a * (1.0 - ov) / (d * (d - 1)) + (1.0 - a) / d ** 2)


def materialize(w: WernerState) -> np.ndarray:
    d = w.d
    return (w.alpha * 2.0 / (d * (d - 1))) * antisymmetric_projector(d) + ((1.0 - w.alpha) / d ** 2) * np.eye(
        d * d, dtype=np.complex128
    )
