"""Fractional anti-Zener and Zener viscoelastic models.

Model catalogue and constraint checks, pole location, relaxation and creep
responses, Mittag-Leffler evaluation, asymptotic series and energy balance.
"""

from .asymptotics import AsymptoticSeries, series
from .constraints import (
    ConstraintReport,
    K_closed_form,
    K_generic,
    K_nonneg_scan,
    check_narrowed,
    check_thermo,
)
from .energy import (
    History,
    energy_from_strain,
    energy_from_stress,
    strain_from_stress,
    stress_from_strain,
)
from .errors import FracZenerError
from .mittag_leffler import ml_E, ml_e
from .model_catalog import (
    MODEL_CODES,
    ModelSpec,
    PowerSum,
    build_model,
    laplace_creep,
    laplace_relaxation,
    load_model,
    model_from_descriptor,
)
from .pole_finder import PoleClassification, classify
from .quadrature import bromwich_oracle
from .response import ResponseCurve, creep, creep_rate, relaxation

__version__ = "0.1.0"

__all__ = [
    "AsymptoticSeries", "series",
    "ConstraintReport", "K_closed_form", "K_generic", "K_nonneg_scan", "check_narrowed",
    "check_thermo",
    "History", "energy_from_strain", "energy_from_stress", "strain_from_stress",
    "stress_from_strain",
    "FracZenerError", "ml_E", "ml_e",
    "MODEL_CODES", "ModelSpec", "PowerSum", "build_model", "laplace_creep",
    "laplace_relaxation", "load_model", "model_from_descriptor",
    "PoleClassification", "classify", "bromwich_oracle",
    "ResponseCurve", "creep", "creep_rate", "relaxation",
]
