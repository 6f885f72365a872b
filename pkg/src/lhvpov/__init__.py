"""Local hidden-variable model for single POV measurements on generalized Werner states."""

from .channels import KrausChannel, apply_channel_to_state, extended_model_prob, pullback_measurement
from .errors import (
    DimensionMismatch,
    DomainError,
    InvalidChannel,
    InvalidPovm,
    LhvError,
    NotHermitian,
    ParseError,
)
from .linalg import Povm, RankOneElement, fine_grain, spectral_decompose, validate_povm
from .model import (
    HiddenState,
    LocalResponse,
    ModelConfig,
    alice_response,
    bob_response,
    joint_prob_mc,
    sample_lambda,
    simulate_runs,
)
from .oracle import born_prob, chsh_value, is_ppt, partial_transpose
from .simplex import SimplexMoments, j0_closed, j1_closed, jij, model_correlation_closed, moments_mc
from .werner import WernerState, antisymmetric_projector, materialize, paper_alpha

__version__ = "0.1.0"
