"""Post-training weight quantization as per-column box-constrained integer least squares."""
from .decoder import (Candidate, DegenerateTemperature, KleinParams, babai_decode,
                      compute_alpha, kbest_decode, klein_decode, klein_sample_component)
from .matlin import NotPositiveDefinite, cholesky, gram_regularized, solve_lower, solve_upper
from .objective import (BilsColumnProblem, JtaConfig, assemble_columns, build_target,
                        column_residual, jta_score)
from .oracle import TooLarge, brute_force_bils, sphere_decode
from .parallel import ppi_kbabai
from .pipeline import LayerReport, LayerSpec, quantize_chain, quantize_layer
from .quantgrid import QuantGrid, calibrate_minmax, dequantize, nearest_grid_point

__version__ = "0.1.0"
