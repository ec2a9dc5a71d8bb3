"""Delayed-feedback control design for period-2 cycles of scalar maps.

The package designs prehistory-based feedback gains that stabilize an
unstable 2-cycle of a one-dimensional discrete map, certifies the result
by two independent stability criteria, and simulates the controlled
dynamics (logistic map included).
"""

from .dynamics import (CycleEstimate, MapModel, Trajectory, detect_cycle2,
                       linearized_growth, logistic, multiplier, simulate_closed,
                       simulate_open)
from .gains import (ControlGains, HorizonPlan, a_to_eps, a_to_gamma, eps_to_a,
                    min_horizon, optimal_gains)
from .polyroots import (ComplexPolynomial, RootConvergenceError, RootSet,
                        SchurReport, SchurVerdict, find_roots, is_schur_stable)
from .stability import (HodographCurve, InternalConsistencyError, StabilityReport,
                        TrigPair, brute_force_j_min, char_poly,
                        fejer_identity_residual, hodograph_curve, j_value,
                        mu_star_by_hodograph, mu_star_by_sweep)

__version__ = "0.1.0"

__all__ = [
    "ComplexPolynomial", "RootSet", "RootConvergenceError", "SchurReport",
    "SchurVerdict", "find_roots", "is_schur_stable",
    "ControlGains", "HorizonPlan", "optimal_gains", "eps_to_a", "a_to_eps",
    "min_horizon", "a_to_gamma",
    "TrigPair", "HodographCurve", "StabilityReport", "InternalConsistencyError",
    "char_poly", "mu_star_by_sweep", "mu_star_by_hodograph", "j_value",
    "brute_force_j_min", "fejer_identity_residual", "hodograph_curve",
    "MapModel", "Trajectory", "CycleEstimate", "logistic", "multiplier",
    "simulate_open", "simulate_closed", "detect_cycle2", "linearized_growth",
]
