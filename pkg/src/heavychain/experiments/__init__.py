"""Seeded Monte Carlo sweeps with CSV/JSON/SVG output."""

from .config import EXPERIMENTS, ConfigError, ExperimentConfig
from .envelopes import reference_envelope
from .results import SweepResult, summarize
from .runners import (
    RUNNERS,
    cell_seed,
    gine_zinn_threshold,
    index_family,
    run_baiyin,
    run_covariance,
    run_decomposition,
    run_experiment,
    run_gamma,
    run_gamma_sandwich,
    run_omega_events,
    run_symmetrization,
    run_tail_lemma,
    run_theorem_b,
    run_weak_lp_tail,
)

__all__ = [name for name in dir() if not name.startswith("_")]
