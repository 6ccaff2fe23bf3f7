"""Coverage analysis of dense multi-antenna wireless networks.

Coverage probabilities with Gamma-distributed signal gains are expressed as
the first-column sum of the exponential of a lower-triangular Toeplitz
matrix. Modules:

* :mod:`toepcov.specfun` -- special functions (2F1, 3F2, incomplete gamma)
* :mod:`toepcov.toeplitz` -- Toeplitz algebra on first columns
* :mod:`toepcov.framework` -- general scenario evaluator
* :mod:`toepcov.hetnet` -- K-tier multiuser MIMO HetNets
* :mod:`toepcov.security` -- secrecy with jamming and interference nulling
* :mod:`toepcov.mmwave` -- directional arrays in LOS-ball mmWave networks
* :mod:`toepcov.montecarlo` -- simulation oracle
* :mod:`toepcov.cli` -- configuration-driven command line
"""

__version__ = "0.1.0"

from .exceptions import (  # noqa: E402
    BracketError,
    ConfigError,
    ConvergenceError,
    DomainError,
    NumericError,
    RangeError,
    SingularMatrixError,
    ToepcovError,
)
from .framework import (  # noqa: E402
    CoverageResult,
    GammaGain,
    GammaLaw,
    InterfererClass,
    PatternGammaLaw,
    RadiusSpec,
    Scenario,
    ServingDistance,
    adaptive_quadrature,
    coverage_theorem1,
    gain_actual,
    gain_cosine,
    nearest_rayleigh_scenario,
    rayleigh_baseline,
    serving_distance_pdf,
    solve_threshold,
)
from .hetnet import TierParams, hetnet_coverage, hetnet_coverage_numeric, hetnet_qki  # noqa: E402
from .mmwave import MmWaveParams, mmwave_coverage_lb, mmwave_J, mmwave_qhat, mmwave_y  # noqa: E402
from .security import (  # noqa: E402
    SecurityParams,
    connection_outage,
    optimize_d0,
    p_requests,
    secrecy_capacity,
    secrecy_outage_ub,
    security_qk,
)
from .specfun import gauss_2f1, hyp_3f2, ln_gamma, reg_lower_inc_gamma  # noqa: E402
from .toeplitz import (  # noqa: E402
    ToeplitzLT,
    dense_exp_oracle,
    exp_first_column,
    inv_first_column,
    l1_exp,
    l1_inv,
    nilpotent_power_l1,
)
