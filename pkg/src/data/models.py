import json
import math
from functools import cached_property
from typing import Optional, Dict, Any, List, Tuple
from dataclasses import dataclass, field, asdict

import numpy as np

from ..utils.errors import require

UNIT_NORM_TOLERANCE = 1e-8


def _frozen_array(values, dtype=np.float64) -> np.ndarray:
    array = np.array(values, dtype=dtype, copy=True)
    array.flags.writeable = False
    return array


@dataclass(frozen=True, eq=False)
class Dictionary:
    """n×K matrix of unit-norm atoms, immutable once built."""
    atoms: np.ndarray

    def __post_init__(self):
        atoms = np.asarray(self.atoms, dtype=np.float64)
        require(atoms.ndim == 2, f"Dictionary must be a 2-D matrix, got shape {atoms.shape}")
        require(atoms.shape[0] >= 1 and atoms.shape[1] >= 1,
                f"Dictionary needs n >= 1 and K >= 1, got shape {atoms.shape}")
        require(bool(np.all(np.isfinite(atoms))), "Dictionary entries must be finite")
        norms = np.linalg.norm(atoms, axis=0)
        worst = float(np.max(np.abs(norms - 1.0)))
        require(worst <= UNIT_NORM_TOLERANCE,
                f"Dictionary atoms must have unit norm (worst deviation {worst:.3e})")
        object.__setattr__(self, 'atoms', _frozen_array(atoms))

    @classmethod
    def from_matrix(cls, matrix: np.ndarray) -> 'Dictionary':
        """Build a dictionary from any matrix by normalizing its columns."""
        matrix = np.asarray(matrix, dtype=np.float64)
        require(matrix.ndim == 2, f"Dictionary must be a 2-D matrix, got shape {matrix.shape}")
        norms = np.linalg.norm(matrix, axis=0)
        require(bool(np.all(norms > 0)), "Cannot normalize a dictionary with zero columns")
        return cls(matrix / norms)

    @property
    def n(self) -> int:
        """Signal dimension."""
        return self.atoms.shape[0]

    @property
    def num_atoms(self) -> int:
        """Atom count K."""
        return self.atoms.shape[1]

    @cached_property
    def gram(self) -> np.ndarray:
        """DᵀD, shared by every coder call on this dictionary."""
        gram = self.atoms.T @ self.atoms
        gram.flags.writeable = False
        return gram

    def atom(self, j: int) -> np.ndarray:
        """Return column j."""
        return self.atoms[:, j]

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary."""
        return {'n': self.n, 'K': self.num_atoms, 'atoms': self.atoms.tolist()}


@dataclass(frozen=True, eq=False)
class SparseCode:
    """K-length coefficient vector stored as (support, values); zero off the support."""
    support: np.ndarray
    values: np.ndarray
    length: int

    def __post_init__(self):
        support = np.asarray(self.support, dtype=np.int64).ravel()
        values = np.asarray(self.values, dtype=np.float64).ravel()
        require(self.length >= 1, f"Code length must be positive, got {self.length}")
        require(support.size == values.size,
                f"Support has {support.size} indices but {values.size} values")
        require(bool(np.all((support >= 0) & (support < self.length))),
                f"Support indices must lie in [0, {self.length})")
        order = np.argsort(support, kind="stable")
        support, values = support[order], values[order]
        require(np.unique(support).size == support.size, "Support indices must be distinct")
        object.__setattr__(self, 'support', _frozen_array(support, dtype=np.int64))
        object.__setattr__(self, 'values', _frozen_array(values))

    @classmethod
    def empty(cls, length: int) -> 'SparseCode':
        """The all-zero code."""
        return cls(np.empty(0, dtype=np.int64), np.empty(0), length)

    @classmethod
    def from_dense(cls, x: np.ndarray) -> 'SparseCode':
        """Build a code from a dense vector, keeping its nonzero entries."""
        x = np.asarray(x, dtype=np.float64).ravel()
        support = np.flatnonzero(x)
        return cls(support, x[support], x.size)

    @property
    def size(self) -> int:
        """Number of active atoms |support|."""
        return int(self.support.size)

    def to_dense(self) -> np.ndarray:
        """Return the full K-length vector."""
        x = np.zeros(self.length)
        x[self.support] = self.values
        return x

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary."""
        return {
            'support': self.support.tolist(),
            'values': self.values.tolist(),
            'length': self.length,
        }


@dataclass(frozen=True, eq=False)
class DualState:
    """Dual variable g and sacrifice h of the active-set coder."""
    g: np.ndarray
    h: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.g, dtype=np.float64).ravel()
        h = np.asarray(self.h, dtype=np.float64).ravel()
        require(g.size == h.size, f"g has {g.size} entries but h has {h.size}")
        object.__setattr__(self, 'g', _frozen_array(g))
        object.__setattr__(self, 'h', _frozen_array(h))

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary."""
        return {'g': self.g.tolist(), 'h': self.h.tolist()}


@dataclass(frozen=True, eq=False)
class GrayImage:
    """H×W grid of real intensities, nominal range [0, 255], unclipped while processing."""
    pixels: np.ndarray

    def __post_init__(self):
        pixels = np.asarray(self.pixels, dtype=np.float64)
        require(pixels.ndim == 2, f"Grayscale image must be 2-D, got shape {pixels.shape}")
        require(pixels.shape[0] >= 1 and pixels.shape[1] >= 1, "Image must be non-empty")
        require(bool(np.all(np.isfinite(pixels))), "Image pixels must be finite")
        object.__setattr__(self, 'pixels', _frozen_array(pixels))

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def shape(self) -> Tuple[int, int]:
        return self.pixels.shape

    def clipped(self) -> 'GrayImage':
        """Return the image clipped to [0, 255]."""
        return GrayImage(np.clip(self.pixels, 0.0, 255.0))

    def to_uint8(self) -> np.ndarray:
        """Quantize to 8-bit for storage."""
        return np.clip(np.rint(self.pixels), 0, 255).astype(np.uint8)


@dataclass(frozen=True)
class NoiseSpec:
    """Additive white Gaussian noise in intensity units."""
    sigma: float
    seed: int = 0

    def __post_init__(self):
        require(math.isfinite(self.sigma) and self.sigma >= 0,
                f"Noise sigma must be a nonnegative real, got {self.sigma}")


@dataclass(frozen=True, eq=False)
class PatchSet:
    """
    Vectorized square patches (one per column, row-major pixel order)
    with their top-left origins in row-major order.
    """
    patch_edge: int
    stride: int
    patches: np.ndarray
    origins: np.ndarray
    image_shape: Optional[Tuple[int, int]] = None

    def __post_init__(self):
        patches = np.asarray(self.patches, dtype=np.float64)
        origins = np.asarray(self.origins, dtype=np.int64).reshape(-1, 2)
        require(self.patch_edge >= 1, f"Patch edge must be positive, got {self.patch_edge}")
        require(self.stride >= 1, f"Stride must be positive, got {self.stride}")
        require(patches.ndim == 2 and patches.shape[0] == self.patch_edge ** 2,
                f"Patches must be an n×p matrix with n = {self.patch_edge ** 2}, got {patches.shape}")
        require(patches.shape[1] == origins.shape[0],
                f"{patches.shape[1]} patches but {origins.shape[0]} origins")
        object.__setattr__(self, 'patches', _frozen_array(patches))
        object.__setattr__(self, 'origins', _frozen_array(origins, dtype=np.int64))

    @property
    def n(self) -> int:
        """Patch dimension (patch_edge²)."""
        return self.patches.shape[0]

    @property
    def count(self) -> int:
        """Number of patches p."""
        return self.patches.shape[1]

    def subset(self, indices: np.ndarray) -> 'PatchSet':
        """Patches at the given column indices, in that order."""
        indices = np.asarray(indices, dtype=np.int64)
        return PatchSet(self.patch_edge, self.stride, self.patches[:, indices],
                        self.origins[indices], self.image_shape)

    def with_patches(self, patches: np.ndarray) -> 'PatchSet':
        """Same origins, new patch contents (e.g. the coded reconstructions)."""
        return PatchSet(self.patch_edge, self.stride, patches, self.origins, self.image_shape)


@dataclass
class CoderStats:
    """Aggregate statistics of one coding pass over many signals."""
    signals: int = 0
    mean_iterations: float = 0.0
    converged_fraction: float = 1.0
    mean_support: float = 0.0
    seconds: float = 0.0

    @classmethod
    def merge(cls, parts: List['CoderStats']) -> 'CoderStats':
        """Combine statistics of consecutive batches, weighting by signal count."""
        total = sum(p.signals for p in parts)
        if total == 0:
            return cls(seconds=sum(p.seconds for p in parts))
        return cls(
            signals=total,
            mean_iterations=sum(p.mean_iterations * p.signals for p in parts) / total,
            converged_fraction=sum(p.converged_fraction * p.signals for p in parts) / total,
            mean_support=sum(p.mean_support * p.signals for p in parts) / total,
            seconds=sum(p.seconds for p in parts),
        )

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary."""
        return asdict(self)


@dataclass
class TrainIteration:
    """One K-SVD round: coding stage then dictionary-update sweep."""
    iteration: int
    objective_after_coding: float
    objective_after_update: float
    atoms_replaced: int
    coding: CoderStats = field(default_factory=CoderStats)
    update_seconds: float = 0.0

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary."""
        data = asdict(self)
        data['coding'] = self.coding.to_dict()
        return data


@dataclass
class TrainReport:
    """Per-iteration record of a K-SVD training run."""
    iterations: List[TrainIteration] = field(default_factory=list)
    init_mode: str = "dct"
    total_seconds: float = 0.0

    @property
    def objectives(self) -> List[float]:
        """Representation error ‖Y − DX‖²_F after each dictionary-update sweep."""
        return [it.objective_after_update for it in self.iterations]

    @property
    def atoms_replaced(self) -> List[int]:
        return [it.atoms_replaced for it in self.iterations]

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary."""
        return {
            'init_mode': self.init_mode,
            'total_seconds': self.total_seconds,
            'iterations': [it.to_dict() for it in self.iterations],
        }


@dataclass
class DenoiseReport:
    """Per-run record of configuration, quality, iteration counts and timings."""
    config: Dict[str, Any]
    train: Optional[TrainReport] = None
    coding: CoderStats = field(default_factory=CoderStats)
    timings: Dict[str, float] = field(default_factory=dict)
    blend: float = 0.0
    lam: Optional[float] = None
    psnr_db: Optional[float] = None
    ssim: Optional[float] = None

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary."""
        return {
            'config': self.config,
            'train': self.train.to_dict() if self.train else None,
            'coding': self.coding.to_dict(),
            'timings': self.timings,
            'blend': self.blend,
            'lambda': self.lam,
            'psnr_db': format_metric(self.psnr_db),
            'ssim': self.ssim,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


CSV_COLUMNS = [
    'image', 'sigma', 'coder', 't0', 'lambda', 'psnr_db',
    'ssim', 'seconds', 'converged_frac', 'seed'
]


def format_metric(value: Optional[float]):
    """PSNR of identical images is +inf and is serialized as the literal "inf"."""
    if value is not None and math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return value


@dataclass
class BenchmarkRecord:
    """One (image, σ, coder) cell of a benchmark grid."""
    image: str
    sigma: float
    coder: str
    t0: Optional[int]
    lam: Optional[float]
    psnr_db: float
    ssim: float
    seconds: float
    converged_frac: float
    seed: int

    def to_row(self) -> Dict[str, Any]:
        """Row keyed by CSV_COLUMNS."""
        return {
            'image': self.image,
            'sigma': self.sigma,
            'coder': self.coder,
            't0': self.t0,
            'lambda': self.lam,
            'psnr_db': format_metric(self.psnr_db),
            'ssim': self.ssim,
            'seconds': self.seconds,
            'converged_frac': self.converged_frac,
            'seed': self.seed,
        }
