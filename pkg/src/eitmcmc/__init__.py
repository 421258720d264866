"""Bayesian electrical impedance tomography on the unit square.

Forward modeling with a smoothened complete electrode model, affine and
log-transformed conductivity priors, adaptive sparse polynomial surrogates,
and Metropolis-Hastings samplers for the resulting inverse problem.
"""

from eitmcmc.config import RunConfig
from eitmcmc.forward import (
    ForwardSolver,
    ParametricForward,
    forward_map,
    solve_patterns,
    standard_patterns,
)
from eitmcmc.geometry import (
    ElectrodeLayout,
    Mesh,
    build_unit_square_mesh,
    classify_boundary_edges,
    electrode_layout,
)
from eitmcmc.interpolation import (
    RLejaFamily,
    Surrogate,
    adapt,
    build_from_set,
    iso_set,
    load_surrogate,
    rleja_nodes,
    save_surrogate,
)
from eitmcmc.mcmc import (
    ChainConfig,
    ChainResult,
    Observation,
    posterior_mean_sigma,
    run_chain,
)
from eitmcmc.priors import (
    PixelGrid,
    TrigModel,
    WaveletModel,
    render_pixels,
    sample_prior,
    sigma_eval,
)

__version__ = "0.1.0"
