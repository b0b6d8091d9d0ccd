"""Frame-bundle prolongations, Galois-groupoid dimension probes and confluence checks."""

__version__ = "0.1.0"

from .errors import JetGroupoidError  # noqa: E402
from .field import QQ, PrimeField, prime_for_seed  # noqa: E402

__all__ = ["__version__", "JetGroupoidError", "QQ", "PrimeField", "prime_for_seed"]
