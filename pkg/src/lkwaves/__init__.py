"""Random Laplace eigenfunctions on the flat torus and the round sphere.

Sample the fields, measure Lipschitz-Killing curvatures of their excursion
sets, and compare them with their Wiener-chaos projections.
"""

__version__ = "0.1.0"

from .chaos import (
    ChaosTerm,
    Form,
    ReductionReport,
    area_chaos,
    boundary_chaos,
    boundary_second_chaos,
    chaos_term,
    epc_second_chaos,
    expected_lkc,
    integral_hermite,
    verify_reduction,
)
from .coefficients import (
    KappaSet,
    Manifold,
    alpha_coeff,
    beta_coeff,
    collapse_assembled,
    collapse_closed_form,
    gamma_coeff,
    h_coeffs,
    kappa_set,
    reduction_constants,
)
from .errors import *  # noqa: F401,F403
from .geometry import LkcEstimate, boundary_length_eps, boundary_length_marching, estimate_lkc, euler_characteristic
from .harness import EnsembleResult, ExperimentConfig, emit_plotdata, run_ensemble, summarize
from .lattice import FrequencySet, enumerate_frequencies, is_representable, lattice_points, mu_hat4
from .sampler import FieldGrid, WaveSpec, load_field, sample, sample_sphere, sample_torus, save_field
