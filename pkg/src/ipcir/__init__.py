"""Imprecise-probability inference with the conservative updating rule."""

from .cir import (
    CirResult,
    IncompletenessModel,
    ObservationSpec,
    car_update,
    cir_lower,
    completion_support,
    cur_lower,
    joint_with_ip,
    theorem1_oracle,
)
from .config import RunConfig
from .incompleteness import (
    CarCoefficients,
    MultiValuedMap,
    car_admissibility,
    product_map,
    validate_unknown_ip,
)
from .previsions import (
    ConditionalTable,
    CredalSet,
    Gamble,
    LinearPrevision,
    ProductSpace,
    VariableSpec,
    bayes_condition,
    expectation,
    lower_prevision,
    marginal_extension,
    regular_extension,
    strong_product,
    irrelevant_product,
    upper_prevision,
    vacuous,
)

__version__ = "0.1.0"

__all__ = [
    "CirResult", "IncompletenessModel", "ObservationSpec", "car_update", "cir_lower",
    "completion_support", "cur_lower", "joint_with_ip", "theorem1_oracle", "RunConfig",
    "CarCoefficients", "MultiValuedMap", "car_admissibility", "product_map", "validate_unknown_ip",
    "ConditionalTable", "CredalSet", "Gamble", "LinearPrevision", "ProductSpace", "VariableSpec",
    "bayes_condition", "expectation", "lower_prevision", "marginal_extension", "regular_extension",
    "strong_product", "irrelevant_product", "upper_prevision", "vacuous",
]
