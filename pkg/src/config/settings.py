import json
import os
from dataclasses import dataclass, field
from typing import List, Optional, Dict, Any
from pathlib import Path

import yaml
from dotenv import load_dotenv, find_dotenv

from .coder_configs import (
    CoderType,
    CoderConfig,
    default_coder_config,
)
from ..utils.errors import require

load_dotenv(find_dotenv(usecwd=True))

THREADS_ENV_VAR = "SPARSE_DENOISE_THREADS"


def threads_from_env(default: int = 1) -> int:
    """Worker count from SPARSE_DENOISE_THREADS, falling back to ``default``."""
    value = os.getenv(THREADS_ENV_VAR)
    if not value:
        return default
    try:
        return max(1, int(value))
    except ValueError:
        return default


@dataclass
class TrainConfig:
    """Settings for K-SVD dictionary training."""

    ksvd_iterations: int = 10
    num_atoms: int = 256
    coder: CoderType = CoderType.PDAS
    coder_config: Optional[CoderConfig] = None
    seed: int = 0

    # Initialization and dead-atom policy
    init_mode: str = "dct"  # dct, sample
    min_usage: int = 1

    threads: int = 1

    def validate(self) -> None:
        """Check the training preconditions."""
        require(self.ksvd_iterations >= 1,
                f"ksvd_iterations must be >= 1, got {self.ksvd_iterations}")
        require(self.num_atoms >= 1, f"num_atoms must be >= 1, got {self.num_atoms}")
        require(self.init_mode in ("dct", "sample"),
                f"init_mode must be 'dct' or 'sample', got {self.init_mode!r}")
        require(self.min_usage >= 1, f"min_usage must be >= 1, got {self.min_usage}")
        require(self.coder_config is not None, "TrainConfig needs a coder_config")
        self.coder_config.validate()

    def to_dict(self) -> Dict[str, Any]:
        """Convert settings to dictionary."""
        return {
            'ksvd_iterations': self.ksvd_iterations,
            'num_atoms': self.num_atoms,
            'coder': self.coder.value,
            'coder_config': self.coder_config.to_dict() if self.coder_config else None,
            'seed': self.seed,
            'init_mode': self.init_mode,
            'min_usage': self.min_usage,
            'threads': self.threads,
        }


@dataclass
class DenoiseConfig:
    """Settings for one denoising run."""

    sigma: float
    coder: CoderType = CoderType.PDAS
    coder_config: Optional[CoderConfig] = None
    train: Optional[TrainConfig] = None

    # Patch geometry
    patch_edge: int = 8
    stride: int = 1
    train_patches: int = 500

    # Reconstruction blend weight; None means 30/σ
    blend: Optional[float] = None
    remove_mean: bool = False

    seed: int = 0
    threads: int = 1

    def __post_init__(self):
        if self.coder_config is None:
            self.coder_config = default_coder_config(self.coder, self.sigma, seed=self.seed)
        if self.train is None:
            self.train = TrainConfig(
                coder=self.coder,
                coder_config=self.coder_config,
                seed=self.seed,
                threads=self.threads,
            )

    @property
    def blend_weight(self) -> float:
        """Effective λ_blend."""
        if self.blend is not None:
            return float(self.blend)
        return 30.0 / self.sigma if self.sigma > 0 else 0.0

    def validate(self) -> None:
        """Check the run preconditions."""
        require(self.sigma >= 0, f"sigma must be >= 0, got {self.sigma}")
        require(self.patch_edge >= 1, f"patch_edge must be >= 1, got {self.patch_edge}")
        require(self.stride >= 1, f"stride must be >= 1, got {self.stride}")
        require(self.train_patches >= 1, f"train_patches must be >= 1, got {self.train_patches}")
        require(self.blend is None or self.blend >= 0, f"blend must be >= 0, got {self.blend}")
        self.coder_config.validate()
        self.train.validate()

    def to_dict(self) -> Dict[str, Any]:
        """Convert settings to dictionary."""
        return {
            'sigma': self.sigma,
            'coder': self.coder.value,
            'coder_config': self.coder_config.to_dict(),
            'train': self.train.to_dict(),
            'patch_edge': self.patch_edge,
            'stride': self.stride,
            'train_patches': self.train_patches,
            'blend': self.blend_weight,
            'remove_mean': self.remove_mean,
            'seed': self.seed,
            'threads': self.threads,
        }


@dataclass
class RunSettings:
    """Settings for a CLI run over images × noise levels × coders."""

    inputs: List[str] = field(default_factory=list)
    sigmas: List[float] = field(default_factory=lambda: [50.0])
    coders: List[str] = field(default_factory=lambda: ["pdas"])

    # Coder overrides; None means the schedule / calibration
    t0: Optional[int] = None
    lam: Optional[float] = None

    seed: int = 0
    calibration_image: Optional[str] = None
    out_dir: str = "results"
    formats: List[str] = field(default_factory=lambda: ["csv", "json"])
    image_format: str = "pgm"
    threads: int = 1

    # Pipeline overrides
    ksvd_iterations: int = 10
    num_atoms: int = 256
    train_patches: int = 500
    stride: int = 1
    blend: Optional[float] = None

    # Emit flags
    emit_images: bool = True
    save_noisy: bool = False
    save_dictionary: bool = False

    # Saved artifacts to resume from: a file used by every job, or the
    # directory a previous run wrote them to
    dictionary: Optional[str] = None
    noisy: Optional[str] = None

    def validate(self) -> None:
        """Check the run-spec invariants."""
        require(len(self.coders) >= 1, "At least one coder is required")
        for coder in self.coders:
            require(coder in [c.value for c in CoderType], f"Unknown coder: {coder}")
        require(all(s >= 0 for s in self.sigmas), f"Noise levels must be >= 0, got {self.sigmas}")
        require(self.image_format in ("pgm", "png"),
                f"image_format must be 'pgm' or 'png', got {self.image_format!r}")
        for fmt in self.formats:
            require(fmt in ("csv", "json"), f"Unknown results format: {fmt}")
        if self.noisy is not None and not Path(self.noisy).is_dir():
            require(len(self.inputs) <= 1 and len(self.sigmas) == 1,
                    "A single noisy file needs exactly one input and one noise level; "
                    "pass the noisy/ directory of a previous run instead")

    def denoise_config(self, coder: CoderType, sigma: float, lam: Optional[float] = None) -> DenoiseConfig:
        """Build the DenoiseConfig for one (σ, coder) job."""
        coder_config = default_coder_config(
            coder, sigma, sparsity=self.t0, lam=lam if lam is not None else self.lam, seed=self.seed
        )
        train = TrainConfig(
            ksvd_iterations=self.ksvd_iterations,
            num_atoms=self.num_atoms,
            coder=coder,
            coder_config=coder_config,
            seed=self.seed,
            threads=self.threads,
        )
        return DenoiseConfig(
            sigma=sigma,
            coder=coder,
            coder_config=coder_config,
            train=train,
            stride=self.stride,
            train_patches=self.train_patches,
            blend=self.blend,
            seed=self.seed,
            threads=self.threads,
        )

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'RunSettings':
        """Create settings from dictionary."""
        data = dict(data)
        if 'lambda' in data and 'lam' not in data:
            data['lam'] = data.pop('lambda')
        return cls(**{k: v for k, v in data.items() if k in cls.__dataclass_fields__})

    def to_dict(self) -> Dict[str, Any]:
        """Convert settings to dictionary."""
        return {
            field.name: getattr(self, field.name)
            for field in self.__dataclass_fields__.values()
        }

    def merged(self, overrides: Dict[str, Any]) -> 'RunSettings':
        """Copy with every non-None, non-empty override applied (flags win over file values)."""
        data = self.to_dict()
        for key, value in overrides.items():
            if value is None or (isinstance(value, (list, tuple)) and len(value) == 0):
                continue
            data[key] = list(value) if isinstance(value, tuple) else value
        return RunSettings.from_dict(data)


@dataclass
class GlobalSettings:
    """Global application settings."""

    # Logging
    log_level: str = "INFO"
    log_file: Optional[str] = None
    log_dir: str = "logs"

    # Performance
    threads: int = field(default_factory=threads_from_env)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'GlobalSettings':
        """Create settings from dictionary."""
        return cls(**{k: v for k, v in data.items() if k in cls.__dataclass_fields__})

    def to_dict(self) -> Dict[str, Any]:
        """Convert settings to dictionary."""
        return {
            field.name: getattr(self, field.name)
            for field in self.__dataclass_fields__.values()
        }


class SettingsManager:
    """Manager for loading and saving run specifications."""

    def __init__(self, config_dir: str = "config"):
        """
        Initialize settings manager.

        Args:
            config_dir: Directory containing configuration files
        """
        self.config_dir = Path(config_dir)
        self.runs_file = self.config_dir / "runs.yaml"

    @staticmethod
    def _read(path: Path) -> Dict[str, Any]:
        # YAML is a superset of JSON, so one loader covers both run-spec formats
        with open(path, 'r', encoding='utf-8') as f:
            data = yaml.safe_load(f) or {}
        require(isinstance(data, dict), f"Run spec {path} must contain a mapping")
        return data

    def load_run_settings(self, path: Optional[str] = None, name: Optional[str] = None) -> RunSettings:
        """
        Load a run spec from a YAML or JSON file.

        Args:
            path: File path (defaults to config_dir/runs.yaml)
            name: Entry under the top-level 'runs' mapping; when omitted the whole file is the spec

        Returns:
            Run settings
        """
        file_path = Path(path) if path else self.runs_file
        require(file_path.exists(), f"Run spec not found: {file_path}")
        data = self._read(file_path)
        if name is not None:
            runs = data.get('runs', {})
            require(name in runs, f"Run '{name}' not found in {file_path}")
            data = runs[name]
        return RunSettings.from_dict(data)

    def save_run_settings(self, name: str, settings: RunSettings, path: Optional[str] = None) -> None:
        """Save settings for a named run."""
        file_path = Path(path) if path else self.runs_file
        file_path.parent.mkdir(parents=True, exist_ok=True)

        data = {'runs': {}}
        if file_path.exists():
            data = self._read(file_path)
            data.setdefault('runs', {})

        data['runs'][name] = settings.to_dict()

        with open(file_path, 'w', encoding='utf-8') as f:
            if file_path.suffix == '.json':
                json.dump(data, f, indent=2)
            else:
                yaml.dump(data, f, default_flow_style=False)

    def list_run_configurations(self, path: Optional[str] = None) -> List[str]:
        """List all saved run configurations."""
        file_path = Path(path) if path else self.runs_file
        if not file_path.exists():
            return []
        return list(self._read(file_path).get('runs', {}).keys())

