"""prismkit: exact computations with Witt vectors, delta-rings and prisms."""

from .base_rings import Precision, RingElem, RingHom, RingSpec, mk_ring, parse_spec_id
from .errors import PrismkitError

__all__ = ["Precision", "RingElem", "RingHom", "RingSpec", "mk_ring", "parse_spec_id", "PrismkitError"]
__version__ = "0.1.0"
