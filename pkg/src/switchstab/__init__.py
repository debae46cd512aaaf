"""Bounds, Lyapunov tables and simulations for switched linear systems."""

__version__ = "0.1.0"

from .bounds import (
    algorithm1_upper,
    best_response_upper,
    cone_lower_bound,
    rate_profile,
    subradius_norm_upper,
    sv_lower_bound,
)
from .errors import (
    ConeInapplicable,
    HorizonTooLarge,
    LambdaNotCertifiable,
    MatrixFileError,
    MethodInapplicable,
    NotCertifiable,
    SwitchStabError,
)
from .instances import get_instance, instance_names
from .linalg import MatrixSet, enumerate_products, product_stack, singular_values, word_matrix
from .lyapunov import AngularGrid, decrease_ratio, extract_feedback, min_product_profile, v_hat, v_lambda

__all__ = [
    "AngularGrid",
    "ConeInapplicable",
    "HorizonTooLarge",
    "LambdaNotCertifiable",
    "MatrixFileError",
    "MatrixSet",
    "MethodInapplicable",
    "NotCertifiable",
    "SwitchStabError",
    "algorithm1_upper",
    "best_response_upper",
    "cone_lower_bound",
    "decrease_ratio",
    "enumerate_products",
    "extract_feedback",
    "get_instance",
    "instance_names",
    "min_product_profile",
    "product_stack",
    "rate_profile",
    "singular_values",
    "subradius_norm_upper",
    "sv_lower_bound",
    "v_hat",
    "v_lambda",
    "word_matrix",
]
