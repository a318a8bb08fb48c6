from typing import Dict, Type, Optional, Any

from ..base.coder_interface import SparseCoder
from ...config.coder_configs import (
    CoderType,
    CoderConfig,
    coder_config_from_dict,
    default_coder_config,
)


class CoderFactory:
    """
    Factory class for creating sparse coders by type.
    """

    _coders: Dict[CoderType, Type[SparseCoder]] = {}

    @classmethod
    def register_coder(cls, coder_type: CoderType, coder_class: Type[SparseCoder]):
        """
        Register a coder class for a coder type.

        Args:
            coder_type: The type of coder
            coder_class: The coder class to register
        """
        cls._coders[coder_type] = coder_class

    @classmethod
    def create_coder(
        cls,
        coder_type: CoderType,
        config: Optional[CoderConfig] = None,
        sigma: Optional[float] = None,
        **overrides: Any
    ) -> SparseCoder:
        """
        Create a coder instance.

        Args:
            coder_type: Type of coder to create
            config: Coder configuration; built from defaults for ``sigma`` when omitted
            sigma: Noise level used to pick default T₀ or λ
            **overrides: Config fields to override (e.g. sparsity=5)

        Returns:
            Configured coder instance

        Raises:
            ValueError: If coder type is not supported
        """
        if coder_type not in cls._coders:
            available_types = ", ".join([t.value for t in cls._coders.keys()])
            raise ValueError(
                f"Unsupported coder type: {coder_type.value}. "
                f"Available types: {available_types}"
            )

        if config is None:
            config = default_coder_config(coder_type, sigma if sigma is not None else 0.0)
        if overrides:
            data = config.to_dict()
            data.update(overrides)
            config = coder_config_from_dict(coder_type, data)

        return cls._coders[coder_type](config)

    @classmethod
    def create_by_name(cls, name: str, config: Optional[CoderConfig] = None, **kwargs) -> SparseCoder:
        """Create a coder from its name ('pdas', 'omp', 'lasso')."""
        try:
            coder_type = CoderType(name.lower())
        except ValueError:
            available_types = ", ".join([t.value for t in CoderType])
            raise ValueError(f"Unsupported coder type: {name}. Available types: {available_types}")
        return cls.create_coder(coder_type, config, **kwargs)

    @classmethod
    def get_available_coders(cls) -> Dict[str, str]:
        """
        Get a dictionary of available coder types and their descriptions.

        Returns:
            Dictionary mapping coder type to description
        """
        descriptions = {
            CoderType.PDAS: "Primal-dual active set, exact ℓ₀ constraint",
            CoderType.OMP: "Orthogonal matching pursuit, greedy ℓ₀",
            CoderType.LASSO: "Coordinate-descent ℓ₁ penalty",
        }

        return {
            coder_type.value: descriptions.get(coder_type, "No description available")
            for coder_type in cls._coders.keys()
        }


def _register_default_coders():
    """Register all available coders with the factory."""
    from ..algorithms.pdas import PdasCoder
    from ..algorithms.omp import OmpCoder
    from ..algorithms.lasso import LassoCoder

    CoderFactory.register_coder(CoderType.PDAS, PdasCoder)
    CoderFactory.register_coder(CoderType.OMP, OmpCoder)
    CoderFactory.register_coder(CoderType.LASSO, LassoCoder)


_register_default_coders()
