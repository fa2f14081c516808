"""warplab: numerical laboratory for Green's functions, monotone quantities,
heat-kernel entropies and cone-distance criteria on rotationally symmetric
manifolds with nonnegative Ricci curvature."""

from .green import GreenData, LevelData, hessian_integrand, level_quantities, solve_green
from .heat import EntropyReport, HeatData, entropy_identities, entropy_series, solve_heat_kernel
from .monotone import (MonotoneReport, area_ratio, drift_laplacian,
                       gradient_suite, pole_laplacian_estimate, tail_volume,
                       theorem_residuals, volume_ratio)
from .profiles import (CurvatureReport, ManifoldModel, Profile,
                       asymptotic_volume_ratio, ball_volume, curvature_report,
                       make_model, make_profile, nonparabolicity_check,
                       sphere_area, volume_ball)
from .cones import (CriteriaVerdict, ThetaSeries, dini_check, fund_ratio_report,
                    koch_theta, ode_criterion_check, theta_hat, theta_series,
                    unique_cone_scenario, weighted_distance)

__version__ = "0.1.0"
