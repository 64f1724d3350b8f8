"""Training-free screening of adversarially perturbed images via the
gradient-energy ratio of high-order staggered-grid mimetic operators."""

__version__ = "0.1.0"

from .detector import (
    Calibration,
    DetectorReport,
    calibrate,
    classify,
    gradient_energy,
    gradient_magnitude_map,
    pixel_energy,
    statistic,
)
from .evaluate import EvalSummary, auc_rank, evaluate_corpus
from .experiments import Table1Row, prepare_image, rows_to_csv, table1_rows
from .imaging import decode_image, encode_pgm, load_image, pad_and_vectorize, resize, to_grayscale
from .operators import (
    apply_operator,
    build_grad_1d,
    build_grad_2d,
    build_weights_1d,
    build_weights_2d,
    one_sided_stencil,
)
from .perturb import Perturbation, apply_and_clip, sign_noise, smooth_control
from .synthetic import load_vendored_image, synthetic_image

__all__ = [
    "Calibration",
    "DetectorReport",
    "EvalSummary",
    "Perturbation",
    "Table1Row",
    "apply_and_clip",
    "apply_operator",
    "auc_rank",
    "build_grad_1d",
    "build_grad_2d",
    "build_weights_1d",
    "build_weights_2d",
    "calibrate",
    "classify",
    "decode_image",
    "encode_pgm",
    "evaluate_corpus",
    "gradient_energy",
    "gradient_magnitude_map",
    "load_image",
    "load_vendored_image",
    "one_sided_stencil",
    "pad_and_vectorize",
    "pixel_energy",
    "prepare_image",
    "resize",
    "rows_to_csv",
    "sign_noise",
    "smooth_control",
    "statistic",
    "synthetic_image",
    "table1_rows",
    "to_grayscale",
    "__version__",
]
