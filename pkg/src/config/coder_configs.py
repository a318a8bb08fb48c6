from dataclasses import dataclass, asdict
from typing import Dict, Any, Optional, Union
from enum import Enum
import math

from ..utils.errors import require


class CoderType(Enum):
    """Supported sparse coders."""
    PDAS = "pdas"
    OMP = "omp"
    LASSO = "lasso"


# Chosen sparsity level per noise level for the active-set coder
SPARSITY_SCHEDULE: Dict[int, int] = {15: 20, 20: 20, 25: 15, 50: 2, 75: 2, 100: 2}

OMP_DEFAULT_SPARSITY = 5

# λ = 2^k·σ for k in this range
LAMBDA_GRID_EXPONENTS = range(-4, 5)


@dataclass
class PdasConfig:
    """Configuration of the primal-dual active-set coder."""
    sparsity: int
    max_iterations: int = 20
    ridge_epsilon: float = 1e-8
    seed: int = 0

    def validate(self, n: Optional[int] = None, num_atoms: Optional[int] = None) -> None:
        """Check 1 ≤ T₀ ≤ min(n, K), R ≥ 1 and ε ≥ 0."""
        require(self.sparsity >= 1, f"PDAS sparsity must be >= 1, got {self.sparsity}")
        require(self.max_iterations >= 1,
                f"PDAS max_iterations must be >= 1, got {self.max_iterations}")
        require(self.ridge_epsilon >= 0,
                f"PDAS ridge_epsilon must be >= 0, got {self.ridge_epsilon}")
        if n is not None and num_atoms is not None:
            require(self.sparsity <= min(n, num_atoms),
                    f"PDAS sparsity {self.sparsity} exceeds min(n, K) = {min(n, num_atoms)}")

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'PdasConfig':
        """Create config from dictionary."""
        return cls(**{k: v for k, v in data.items() if k in cls.__dataclass_fields__})

    def to_dict(self) -> Dict[str, Any]:
        """Convert config to dictionary."""
        return asdict(self)


@dataclass
class OmpConfig:
    """Configuration of orthogonal matching pursuit."""
    sparsity: int
    residual_threshold: Optional[float] = None

    def validate(self, n: Optional[int] = None, num_atoms: Optional[int] = None) -> None:
        """Check T₀ ≥ 1 and a nonnegative residual threshold."""
        require(self.sparsity >= 1, f"OMP sparsity must be >= 1, got {self.sparsity}")
        if self.residual_threshold is not None:
            require(self.residual_threshold >= 0,
                    f"OMP residual_threshold must be >= 0, got {self.residual_threshold}")

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'OmpConfig':
        """Create config from dictionary."""
        return cls(**{k: v for k, v in data.items() if k in cls.__dataclass_fields__})

    def to_dict(self) -> Dict[str, Any]:
        """Convert config to dictionary."""
        return asdict(self)


@dataclass
class LassoConfig:
    """Configuration of the coordinate-descent ℓ₁ coder."""
    lam: float
    tolerance: float = 1e-7
    max_sweeps: int = 1000

    def validate(self, n: Optional[int] = None, num_atoms: Optional[int] = None) -> None:
        """Check λ ≥ 0, tolerance > 0 and max_sweeps ≥ 1."""
        require(math.isfinite(self.lam) and self.lam >= 0,
                f"LASSO lambda must be >= 0, got {self.lam}")
        require(self.tolerance > 0, f"LASSO tolerance must be > 0, got {self.tolerance}")
        require(self.max_sweeps >= 1, f"LASSO max_sweeps must be >= 1, got {self.max_sweeps}")

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'LassoConfig':
        """Create config from dictionary."""
        data = dict(data)
        if 'lambda' in data and 'lam' not in data:
            data['lam'] = data.pop('lambda')
        return cls(**{k: v for k, v in data.items() if k in cls.__dataclass_fields__})

    def to_dict(self) -> Dict[str, Any]:
        """Convert config to dictionary."""
        return asdict(self)


CoderConfig = Union[PdasConfig, OmpConfig, LassoConfig]

_CONFIG_CLASSES = {
    CoderType.PDAS: PdasConfig,
    CoderType.OMP: OmpConfig,
    CoderType.LASSO: LassoConfig,
}


def scheduled_sparsity(sigma: float) -> int:
    """T₀ from the schedule entry whose σ is nearest (lower σ wins ties)."""
    nearest = min(SPARSITY_SCHEDULE, key=lambda s: (abs(s - sigma), s))
    return SPARSITY_SCHEDULE[nearest]


def default_sparsity(coder: CoderType, sigma: float) -> int:
    """Default T₀: the schedule for PDAS, 5 for OMP."""
    if coder is CoderType.OMP:
        return OMP_DEFAULT_SPARSITY
    return scheduled_sparsity(sigma)


def lambda_grid(sigma: float):
    """Candidate LASSO penalties {2^k·σ}."""
    return [float(2.0 ** k * sigma) for k in LAMBDA_GRID_EXPONENTS]


def default_coder_config(
    coder: CoderType,
    sigma: float,
    sparsity: Optional[int] = None,
    lam: Optional[float] = None,
    seed: int = 0
) -> CoderConfig:
    """
    Build the default configuration for a coder at a noise level.

    Args:
        coder: Coder type
        sigma: Noise standard deviation
        sparsity: Explicit T₀ (overrides the schedule)
        lam: Explicit LASSO penalty (defaults to σ, the centre of the calibration grid)
        seed: Seed for the random initial active set

    Returns:
        Coder configuration
    """
    if coder is CoderType.LASSO:
        return LassoConfig(lam=float(sigma) if lam is None else float(lam))
    t0 = sparsity if sparsity is not None else default_sparsity(coder, sigma)
    if coder is CoderType.OMP:
        return OmpConfig(sparsity=t0)
    return PdasConfig(sparsity=t0, seed=seed)


def coder_config_from_dict(coder: CoderType, data: Dict[str, Any]) -> CoderConfig:
    """Create the config class matching ``coder`` from a dictionary."""
    return _CONFIG_CLASSES[coder].from_dict(data)
