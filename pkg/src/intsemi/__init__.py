"""Numerics for integrated semigroups: resolvent families, fractional integrals,
contour and Laplace transforms, sector estimates and integrated Euler formulas."""

from .core_ops import (AdmissibilityError, ComplexTime, DiagRank1, FamilyError, GridSpec, OperatorFamily,
                       ResolventSetError, family_from_json, make_family)
from .estimates import (HYReport, RateFit, SectorGrid, SectorReport, ThresholdError, boundary_values,
                        fit_origin_rate, group_check, hy_scan, sector_scan)
from .euler import PnkSpec, euler_convergence_study, integrated_euler, pnk_eval, verify_pnk_identity
from .fracint import (LambdaFunction, TimeTrace, family_trace, frac_integrate_lambda, frac_integrate_time,
                      power_law, resolvent_function)
from .transforms import ContourSpec, contour_invert, contour_trace, laplace_forward, post_widder

__version__ = "0.1.0"
