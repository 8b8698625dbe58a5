"""Discrete-variable quantum illumination with M-mode Bell states."""

__version__ = "0.1.0"

from .channel import (
    ChannelParams,
    ConditionalBranch,
    EnumerationLimitError,
    WeightedEnsemble,
    binomial_q,
    phi_tilde,
    phi_tilde_oracle,
    rho_abs_ensemble,
    rho_pres_ensemble,
)
from .fock import BasisLabel, ModeOccupation, SparseKet, beamsplitter_pair, inner, make_bell_state
from .measurement import (
    DetectionEstimate,
    Outcome,
    pdet_exact,
    pdet_mc,
    pfa_exact,
    pfa_mc,
    projector_overlap,
    projector_state,
    single_shot,
)
from .noise import NoiseModel, parse_noise
from .protocol import (
    AdvantagePoint,
    AnalysisParams,
    advantage_ratio,
    effective_eta,
    figure1_data,
    nair_gu_bound,
    pe_block_quantum,
    pe_coherent,
    pe_sequential,
    sequential_sim,
)
