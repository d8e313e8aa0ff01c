from .config import StudyConfig, parse_config
from .errors import MollifemError
from .experiment import ErrorEstimate, NoiseModel, analytic_error, analytic_noreg_error, damped_sine, mc_error
from .kernel import BUILTIN_KERNELS, H, K, Kernel, convolve_basis, mollified_reconstruct
from .mesh_fe import Family, FEBasis, build_basis, build_design, eval_basis, reconstruct, sample
from .quadrature import GridSpec, l2_distance, simpson
from .rates import RateEstimate, StudyTable, fit_rate, run_study
from .theory import RegimeParams, Strategy, beta_star, lambda_max, predicted_gamma, recommend_strategy

__all__ = [
    "BUILTIN_KERNELS", "ErrorEstimate", "FEBasis", "Family", "GridSpec", "H", "K", "Kernel",
    "MollifemError", "NoiseModel", "RateEstimate", "RegimeParams", "Strategy", "StudyConfig",
    "StudyTable", "analytic_error", "analytic_noreg_error", "beta_star", "build_basis",
    "build_design", "convolve_basis", "damped_sine", "eval_basis", "fit_rate", "l2_distance",
    "lambda_max", "mc_error", "mollified_reconstruct", "parse_config", "predicted_gamma",
    "recommend_strategy", "reconstruct", "run_study", "sample", "simpson",
]
