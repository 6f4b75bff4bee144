"""Voice-preserving many-accent speech conversion toolkit."""

__version__ = "0.1.0"

from .accents import ACCENT_CODES, AccentId
from .backend import COMPILED as KERNELS_COMPILED

__all__ = ["ACCENT_CODES", "AccentId", "KERNELS_COMPILED", "__version__"]
