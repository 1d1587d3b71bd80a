"""Sublevel-set persistence barcodes of scalar fields on surfaces.

The package computes lower-star persistence of piecewise-linear fields
on triangulated surfaces and on the circle, bottleneck distances,
weighted bar-length functionals with their level-set bounds, closed
form product barcodes for sums of circle functions, and the spectral
side (trigonometric polynomials, smoothing kernel, moduli) needed to
verify how barcode length is constrained by the Laplacian budget.
"""

from .functionals import (IndicatrixProfile, WeightFunction,
                          approx_lower_bound, banach_indicatrix,
                          check_indicatrix_inequality,
                          circle_approx_lower_bound, eigenvalue_lower_bound,
                          indicatrix_profile, significant_value_count,
                          sort_significant_bars, weighted_indicatrix_integral,
                          weighted_length, weighted_length_continuous,
                          weighted_length_topk)
from .kunneth import (GradedBarcode, barcode_product, circle_sine_barcode,
                      normalized_torus_sum_total_length, torus_eigenfunction_barcode,
                      torus_sum_barcode, torus_sum_constants,
                      torus_sum_total_length)
from .matching import Matching, bottleneck_distance, epsilon_matching
from .mesh import (CircleField, CriticalReport, ScalarField, SimplicialSurface,
                   build_flat_torus_grid, classify_critical_points,
                   field_from_grid, perturb_to_simple, read_field_csv,
                   read_off, sample_field, write_field_csv)
from .persistence import (Bar, Barcode, Filtration, circle_barcode,
                          compute_barcode, lower_star_filtration,
                          spectral_invariants)
from .spectral import (CircleTrigPoly, KorovkinKernel, SpectralSample,
                       TrigPoly, average_bar_length_check, grid_c0_distance,
                       grid_l2_norm, init_korovkin_kernel, korovkin_mean,
                       l2_norm, laplacian_l2_norm, modulus_of_smoothness,
                       read_grid_csv, sample_circle_laplacian_bounded,
                       sample_laplacian_bounded, torus_eigenfunction,
                       write_grid_csv)

__version__ = "0.1.0"
