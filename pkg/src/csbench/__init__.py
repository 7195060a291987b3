"""Sparse recovery via nullspace Kalman filtering, with baselines.

The package bundles an l1-minimizing Kalman filter that searches the
nullspace of the sensing matrix, two reference solvers (Chambolle-Pock
basis pursuit and orthogonal matching pursuit), seeded generators for
synthetic compressed-sensing problems, image-quality metrics, and a
benchmark harness exposed through the ``csbench`` command.
"""

from .baselines import (CpConfig, OmpConfig, chambolle_pock_bp, omp,
                        operator_norm_est, soft_threshold)
from .errors import (CmatFormatError, CsbenchError, DimensionMismatch,
                     NotConverged, NumericalFailure, RankDeficient,
                     ZeroImage, ZeroReferenceAmplitude)
from .harness import (DtCellResult, DtGridConfig, SolverSettings,
                      emit_heatmap, make_instance, run_dt_grid,
                      run_scene_experiment, solve_one, time_crossover)
from .metrics import (detections, fa_md, image_contrast, image_entropy,
                      l2_error, rrmse, tcr)
from .nkf import (NkfConfig, NkfState, l1_jacobian_row, l1_norm, predict,
                  solve as solve_nkf, update)
from .nullspace import (NullspaceDecomposition, assemble_estimate,
                        lq_factorize, nullspace_basis, particular_solution)
from .problem import RecoveryResult, SensingProblem
from .rng import PortableRng, combine_seeds
from .schedule import (MODE_AITKEN, MODE_GEOMETRIC, ScheduleState,
                       contract_push, geometric_target, next_target,
                       steffensen_extrapolate)
from .sensing import (SceneSpec, SignalSpec, gen_gaussian_matrix,
                      gen_partial_fourier_2d, gen_scene, gen_sparse_signal,
                      measure, reference_image)

__version__ = "0.1.0"

__all__ = [
    "CmatFormatError", "CpConfig", "CsbenchError", "DimensionMismatch",
    "DtCellResult", "DtGridConfig", "MODE_AITKEN", "MODE_GEOMETRIC",
    "NkfConfig", "NkfState", "NotConverged",
    "NullspaceDecomposition", "NumericalFailure", "OmpConfig",
    "PortableRng", "RankDeficient", "RecoveryResult", "SceneSpec",
    "ScheduleState", "SensingProblem", "SignalSpec", "SolverSettings",
    "ZeroImage", "ZeroReferenceAmplitude", "assemble_estimate",
    "chambolle_pock_bp", "combine_seeds", "contract_push", "detections",
    "emit_heatmap",
    "fa_md", "gen_gaussian_matrix", "gen_partial_fourier_2d", "gen_scene",
    "gen_sparse_signal", "geometric_target", "image_contrast",
    "image_entropy", "l1_jacobian_row", "l1_norm", "l2_error",
    "lq_factorize", "make_instance", "measure", "next_target",
    "nullspace_basis", "omp", "operator_norm_est", "particular_solution",
    "predict", "reference_image", "rrmse", "run_dt_grid",
    "run_scene_experiment", "soft_threshold", "solve_nkf", "solve_one",
    "steffensen_extrapolate", "tcr", "time_crossover", "update",
]
