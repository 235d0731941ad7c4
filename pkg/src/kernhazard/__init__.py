"""Kernel estimators of the hazard function and their asymptotics."""

from .kernels import Kernel, epanechnikov, get_kernel, paper_constants
from .models import Exponential, Gamma, ScaledBeta, Uniform, Weibull, parse_model
from .estimators import (
    EstimatorSpec,
    SortedSample,
    direct_density_ratio,
    direct_hazard,
    eta_n,
    M_n,
    naive_hazard,
    plugin_bandwidth,
    terrell_scott_hazard,
)
from .asymptotics import AmseReport, amse, optimal_bandwidth

__version__ = "0.1.0"
