"""Generalised hyperbolic Levy process simulation and state-space inference.

The package has five layers:

- :mod:`levy_ssm.numerics`: special functions (Bessel, incomplete gamma,
  error-function family) and the GIG / GH densities.
- :mod:`levy_ssm.jumps`: shot-noise jump samplers for tempered stable, gamma
  and GIG subordinators, plus GH jump attachment.
- :mod:`levy_ssm.ssm`: linear SDEs driven by the jump processes, with exact
  conditionally Gaussian transition moments.
- :mod:`levy_ssm.filtering`: Rao-Blackwellised sequential MCMC state
  inference built on Kalman recursions.
- :mod:`levy_ssm.cli` (with :mod:`levy_ssm.dataio` and
  :mod:`levy_ssm.validate`): command line front end, file formats, and the
  statistical validation suites.
"""

from .accel import NUMBA_ENABLED, backend_name
from .filtering import (
    FilterConfig,
    FilterStepResult,
    GaussianState,
    filter_step,
    run_filter,
)
from .jumps import (
    JumpSequence,
    attach_gh_jumps,
    sample_gamma_process,
    sample_gig,
    sample_tempered_stable,
    shot_noise_path,
    z1_upper_bound,
)
from .numerics import bessel_k, gh_pdf, gig_pdf, hankel1_abs_sq
from .params import GHParams, GIGParams, TruncationBudget
from .ssm import (
    CondGaussMoments,
    LangevinSSM,
    LinearSSM,
    expm,
    simulate_path,
    transition_sample,
)

__version__ = "0.1.0"

__all__ = [
    "GHParams",
    "GIGParams",
    "TruncationBudget",
    "JumpSequence",
    "sample_tempered_stable",
    "sample_gamma_process",
    "sample_gig",
    "attach_gh_jumps",
    "shot_noise_path",
    "z1_upper_bound",
    "LinearSSM",
    "LangevinSSM",
    "CondGaussMoments",
    "expm",
    "simulate_path",
    "transition_sample",
    "GaussianState",
    "FilterConfig",
    "FilterStepResult",
    "filter_step",
    "run_filter",
    "bessel_k",
    "hankel1_abs_sq",
    "gig_pdf",
    "gh_pdf",
    "NUMBA_ENABLED",
    "backend_name",
    "__version__",
]
