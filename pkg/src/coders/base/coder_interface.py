import json
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Dict, Any, List, Optional, Tuple

import numpy as np

from ...data.models import Dictionary, SparseCode, DualState


@dataclass
class CodingResult:
    """Outcome of coding one signal."""
    code: SparseCode
    iterations: int = 0
    converged: bool = True
    objective: float = 0.0
    dual: Optional[DualState] = None
    residual_history: List[float] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        """Debug dump of support, values, g, h, iterations and convergence."""
        data = {
            'support': self.code.support.tolist(),
            'values': self.code.values.tolist(),
            'length': self.code.length,
            'iterations': self.iterations,
            'converged': self.converged,
            'objective': self.objective,
            'residual_history': list(self.residual_history),
        }
        if self.dual is not None:
            data.update(self.dual.to_dict())
        return data

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


class SparseCoder(ABC):
    """Interface that all sparse coders must implement."""

    # Coders that set this code a whole block of signals per encode_batch call
    batched = False

    def encode_batch(
        self,
        signals: np.ndarray,
        dictionary: Dictionary,
        offset: int = 0
    ) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """
        Code the columns of an n×p block.

        Returns:
            K×p codes, iterations per column and convergence flags
        """
        raise NotImplementedError(f"{self.name} codes one signal at a time")

    @abstractmethod
    def encode(self, y: np.ndarray, dictionary: Dictionary, index: int = 0) -> CodingResult:
        """
        Find a sparse code x with y ≈ Dx.

        Args:
            y: Signal of length n
            dictionary: Unit-norm dictionary
            index: Position of the signal in its batch; seeds any randomness

        Returns:
            Coding result
        """
        pass

    @property
    @abstractmethod
    def name(self) -> str:
        """Return the coder name."""
        pass

    @property
    @abstractmethod
    def sparsity(self) -> Optional[int]:
        """Configured support bound T₀, or None for penalized coders."""
        pass

    @property
    def penalty(self) -> Optional[float]:
        """ℓ₁ penalty λ, or None for cardinality-constrained coders."""
        return None
