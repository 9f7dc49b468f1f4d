"""Conjugate Bayesian quadrature.

Places a Gaussian process prior on an integrand and reports the induced
Gaussian posterior over its integral against the uniform measure on the
unit cube.  Includes closed-form kernel mean embeddings, node-generation
strategies, active (acquisition-driven) node selection, ML-II
hyperparameter estimation, and a benchmark/convergence CLI (``bq``).
"""

from .acquisition import (SearchConfig, StoppingRule, acquisition_value,
                          make_state, maximize_acquisition, run_sequential_bq,
                          squared_correlation)
from .designs import DesignGeometry, DesignSpec, design_geometry, generate_design
from .embeddings import (EmbeddingVector, Measure, initial_variance,
                         kernel_mean, kernel_mean_vector, oracle_embedding)
from .gp import (FactorizationError, FactoredSystem, NuggetPolicy, ZERO_NUGGET,
                 cholesky_with_nugget, gp_posterior_at)
from .hyper import HyperParams, fit_ml, log_marginal, ml_scale_closed_form
from .kernels import KernelSpec, gram, kernel_eval, kernel_from_name
from .quadrature import (BQPosterior, Dataset, bq_infer, bq_weights,
                         normalized_weights, rkhs_norm_translates,
                         worst_case_error)
from .testbed import (TestFunction, make_brownian_path, make_family,
                      make_fourier, true_integral_oracle)

__version__ = "0.1.0"
