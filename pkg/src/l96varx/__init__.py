"""Data-driven VARX stochastic parameterization of the two-layer Lorenz '96 model."""
from .config import ModelConfig, preset
from .diagnostics import compare_reports, conditional_pdf, make_report
from .estimation import fit_parameterization
from .l96 import SampleSeries, simulate_full
from .narmax import fit_narmax, preset_model
from .reduced import simulate_ensemble, simulate_reduced
from .timeseries import acf, pacf
from .varx import VarxModel, VarxSpec, check_stability, named_spec

__all__ = [
    "ModelConfig",
    "preset",
    "SampleSeries",
    "simulate_full",
    "VarxSpec",
    "VarxModel",
    "named_spec",
    "check_stability",
    "fit_parameterization",
    "fit_narmax",
    "preset_model",
    "simulate_reduced",
    "simulate_ensemble",
    "acf",
    "pacf",
    "make_report",
    "compare_reports",
    "conditional_pdf",
]

__version__ = "0.1.0"
