"""
Configuration management for ebt-rvnn
"""

from .settings import Config, ModelConfig, DataConfig, TrainConfig, BenchConfig, MODEL_VARIANTS

__all__ = ["Config", "ModelConfig", "DataConfig", "TrainConfig", "BenchConfig", "MODEL_VARIANTS"]
