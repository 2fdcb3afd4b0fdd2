"""Admissible sequences, tail functionals, good-event checks and decompositions."""

from .admissible import (
    AdmissibleSequence,
    BallAdmissible,
    GreedyAdmissible,
    L2Metric,
    LinfMetric,
    Psi2ProxyMetric,
    ball_admissible,
    gamma_beta_bruteforce,
    gamma_beta_value,
    get_metric,
    greedy_admissible,
)
from .decomposition import (
    BernoulliBound,
    DecompositionParams,
    DecompositionSpec,
    bernoulli_rhs,
    decomposition_params,
    verify_decomposition,
)
from .eta import EtaInvariantError, EtaSequence, make_eta, s0_and_ells
from .omega import (
    OmegaReport,
    build_linear_tables,
    check_good_event_conclusions,
    check_omega1,
    check_omega2,
    check_omega3,
    gamma_u,
)
from .phi import PhiFamily, phi_aggregates, phi_eval
from .processes import GammaSandwich, bernoulli_sup_mc, exp_sup_E, gamma12_vs_E_check
from .tails import (
    KAPPA3,
    LqTail,
    Psi1Tail,
    QuantileTable,
    F_u,
    check_tail_lemma,
    class_quantile_tables,
    tail_lemma_bound,
    tail_lemma_violations,
    f_u,
    f_u_profile,
    tail_quantile_y,
)
from .theta import theta_ball, theta_ball_table, theta_logconcave, theta_logconcave_table

__all__ = [name for name in dir() if not name.startswith("_")]
