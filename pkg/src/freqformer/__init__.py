"""Frequency-heterogeneous attention: a reference layer and an analytic cost model."""
from .bands import BandPartition, BandSpec, build_partition
from .estimator import FreqFormerAttention
from .exceptions import ConfigError, ShapeError
from .layer import ApproxReport, LayerConfig, LayerWeights, approximation_report, init_weights
from .perf_model import CostConfig, HardwareProfile, PROFILES, table_report
from .spectral import SpectralPlan

__all__ = [
    "ApproxReport",
    "BandPartition",
    "BandSpec",
    "ConfigError",
    "CostConfig",
    "FreqFormerAttention",
    "HardwareProfile",
    "LayerConfig",
    "LayerWeights",
    "PROFILES",
    "ShapeError",
    "SpectralPlan",
    "approximation_report",
    "build_partition",
    "init_weights",
    "table_report",
]

__version__ = "0.1.0"
