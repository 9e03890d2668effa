"""
Configuration management for ebt-rvnn

The configuration file is plain text, one ``section.key = value`` per line::

    # model shape
    model.d = 128
    model.beam_size = 5
    train.lr = 0.001
    seed = 7

Sections are ``model``, ``data``, ``train`` and ``bench``; ``seed`` and
``log_level`` are top level.
"""

from dataclasses import dataclass, asdict, fields
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

from ..data.listops import GenConfig
from ..errors import ConfigError
from ..utils.helpers import parse_int_list
from ..utils.logging import get_logger


MODEL_VARIANTS = ("gold-grc", "gt-grc", "egt-grc", "bt-grc", "ebt-grc", "ebt-gau")
DTYPES = ("float32", "float64")
LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")


@dataclass
class ModelConfig:
    """Model shape and search configuration"""
    variant: str = "ebt-grc"
    d: int = 128
    d_cell: int = 512
    d_s: int = 64
    slice_scorer: bool = True
    beam_size: int = 5
    beam_noise: bool = True
    head_size: int = 128
    rel_max_dist: int = 10
    attention_iterations: int = 2
    dropout: float = 0.1
    gumbel_temperature: float = 1.0
    dtype: str = "float32"

    def validate(self):
        if self.variant not in MODEL_VARIANTS:
            raise ConfigError(f"Unknown model variant {self.variant!r}; expected one of {', '.join(MODEL_VARIANTS)}")
        for name in ("d", "d_cell", "d_s", "beam_size", "head_size", "rel_max_dist", "attention_iterations"):
            if getattr(self, name) < 1:
                raise ConfigError(f"model.{name} must be positive")
        if not 0.0 <= self.dropout < 1.0:
            raise ConfigError("model.dropout must be in [0, 1)")
        if self.gumbel_temperature <= 0:
            raise ConfigError("model.gumbel_temperature must be positive")
        if self.dtype not in DTYPES:
            raise ConfigError(f"model.dtype must be one of {', '.join(DTYPES)}")


@dataclass
class DataConfig:
    """ListOps split sizes and generator bounds"""
    train_size: int = 10000
    val_size: int = 2000
    test_size: int = 2000
    max_depth: int = 4
    max_args: int = 3
    max_length: int = 50
    branch_prob: float = 0.35
    length_split_min: int = 50
    length_split_max: int = 100
    length_split_depth: int = 8
    args_split_max: int = 5
    args_split_max_length: int = 100

    def train_gen(self, seed: int) -> GenConfig:
        return GenConfig(max_depth=self.max_depth, max_args=self.max_args,
                         max_length=self.max_length, branch_prob=self.branch_prob, seed=seed)

    def length_split_gen(self, seed: int) -> GenConfig:
        return GenConfig(max_depth=self.length_split_depth, max_args=self.max_args,
                         max_length=self.length_split_max, min_length=self.length_split_min,
                         branch_prob=max(self.branch_prob, 0.5), seed=seed)

    def args_split_gen(self, seed: int) -> GenConfig:
        return GenConfig(max_depth=self.max_depth, max_args=self.args_split_max,
                         max_length=self.args_split_max_length, branch_prob=self.branch_prob, seed=seed)


@dataclass
class TrainConfig:
    """Optimizer and training loop configuration"""
    epochs: int = 30
    batch_size: int = 32
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    patience: int = 5

    def validate(self):
        for name in ("epochs", "batch_size"):
            if getattr(self, name) < 1:
                raise ConfigError(f"train.{name} must be positive")
        if self.lr <= 0:
            raise ConfigError("train.lr must be positive")
        if self.eps <= 0:
            raise ConfigError("train.eps must be positive")
        for name in ("beta1", "beta2"):
            if not 0.0 <= getattr(self, name) < 1.0:
                raise ConfigError(f"train.{name} must be in [0, 1)")
        if self.patience < 0:
            raise ConfigError("train.patience must be non-negative (0 disables early stopping)")


@dataclass
class BenchConfig:
    """Activation memory benchmark configuration"""
    lengths: str = "50,100,200"
    variants: str = "bt-grc,ebt-grc,ebt-grc-noslice,ebt-grc-512,ebt-grc-512-noslice"
    repetitions: int = 3
    beam_size: int = 5
    d: int = 128
    d_cell: int = 512
    d_s: int = 64
    scalar_budget: int = 1_000_000_000
    dtype: str = "float32"

    def length_list(self) -> List[int]:
        return parse_int_list(self.lengths)

    def variant_list(self) -> List[str]:
        return [v.strip() for v in self.variants.split(",") if v.strip()]


_SECTIONS = ("model", "data", "train", "bench")
_TOP_LEVEL = {"seed": int, "log_level": str}


def _coerce(raw: str, kind: type, where: str) -> Any:
    """Convert a raw config string to the dataclass field's type"""
    if kind is bool:
        lowered = raw.lower()
        if lowered in ("1", "true", "yes", "on"):
            return True
        if lowered in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"{where}: expected a boolean, got {raw!r}")
    try:
        if kind is int:
            return int(float(raw)) if "e" in raw.lower() else int(raw)
        return kind(raw)
    except ValueError:
        raise ConfigError(f"{where}: expected {kind.__name__}, got {raw!r}")


class Config:
    """Main configuration class"""

    def __init__(self, config_path: Optional[str] = None):
        self.config_path = Path(config_path) if config_path else None
        self.logger = get_logger(__name__)

        self.model = ModelConfig()
        self.data = DataConfig()
        self.train = TrainConfig()
        self.bench = BenchConfig()
        self.seed = 0
        self.log_level = "INFO"

        if self.config_path is not None:
            self.load_config()

    def load_config(self):
        """Load ``section.key = value`` lines from the config file"""
        if not self.config_path.exists():
            raise ConfigError(f"Config file not found: {self.config_path}")

        with open(self.config_path, 'r', encoding='utf-8') as f:
            for line_number, line in enumerate(f, start=1):
                text = line.split('#', 1)[0].strip()
                if not text:
                    continue
                if '=' not in text:
                    raise ConfigError(f"{self.config_path}:{line_number}: expected 'key = value'")
                key, raw = (part.strip() for part in text.split('=', 1))
                self._apply(key, raw, f"{self.config_path}:{line_number}")

        self.validate()
        self.logger.info(f"Loaded configuration from {self.config_path}")

    def _apply(self, key: str, raw: str, where: str):
        if key in _TOP_LEVEL:
            setattr(self, key, _coerce(raw, _TOP_LEVEL[key], where))
            return

        section_name, _, field_name = key.partition('.')
        if section_name not in _SECTIONS or not field_name:
            raise ConfigError(f"{where}: unknown key {key!r}")

        section = getattr(self, section_name)
        types = {f.name: f.type for f in fields(section)}
        if field_name not in types:
            raise ConfigError(f"{where}: unknown key {key!r}")

        kind = types[field_name]
        if isinstance(kind, str):
            kind = {"int": int, "float": float, "bool": bool, "str": str}[kind]
        setattr(section, field_name, _coerce(raw, kind, where))

    def save_config(self, path: Optional[str] = None):
        """Write the current configuration in the same key = value format"""
        target = Path(path) if path else self.config_path
        if target is None:
            raise ConfigError("No path to save the configuration to")

        target.parent.mkdir(parents=True, exist_ok=True)
        with open(target, 'w', encoding='utf-8') as f:
            for key, value in self.items():
                if isinstance(value, bool):
                    value = "true" if value else "false"
                f.write(f"{key} = {value}\n")

        self.logger.info(f"Saved configuration to {target}")

    def items(self) -> List[Tuple[str, Any]]:
        """Flattened (dotted key, value) pairs in a stable order"""
        pairs = [("seed", self.seed), ("log_level", self.log_level)]
        for section_name in _SECTIONS:
            for key, value in asdict(getattr(self, section_name)).items():
                pairs.append((f"{section_name}.{key}", value))
        return pairs

    def to_dict(self) -> Dict[str, Any]:
        """Nested dictionary form, echoed into checkpoints"""
        return {
            'model': asdict(self.model),
            'data': asdict(self.data),
            'train': asdict(self.train),
            'bench': asdict(self.bench),
            'seed': self.seed,
            'log_level': self.log_level,
        }

    def update_config(self, **kwargs):
        """Update configuration values; nested sections take dictionaries"""
        for key, value in kwargs.items():
            if not hasattr(self, key):
                raise ConfigError(f"Unknown configuration entry {key!r}")
            if isinstance(getattr(self, key), (ModelConfig, DataConfig, TrainConfig, BenchConfig)):
                config_obj = getattr(self, key)
                for nested_key, nested_value in value.items():
                    if not hasattr(config_obj, nested_key):
                        raise ConfigError(f"Unknown configuration entry {key}.{nested_key}")
                    setattr(config_obj, nested_key, nested_value)
            else:
                setattr(self, key, value)

        self.validate()

    def validate(self):
        """Check every section that has constraints; raises ConfigError"""
        self.model.validate()
        self.train.validate()
        if self.log_level.upper() not in LOG_LEVELS:
            raise ConfigError(f"log_level must be one of {', '.join(LOG_LEVELS)}, got {self.log_level!r}")

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Config":
        """Rebuild a configuration from ``to_dict`` output (e.g. a checkpoint header)"""
        config = cls()
        try:
            config.update_config(**data)
        except (TypeError, AttributeError) as e:
            raise ConfigError(f"Malformed configuration record: {e}") from None
        return config
