"""Product states in superpositions of bipartite pure states.

Exact pencil classification of entangled/product pairs, product searches in
subspaces, unextendible entangled bases, local identifiability certificates
and superposition bounds.
"""

__version__ = "0.1.0"

from .errors import InputError, PreconditionError, SupersepError  # noqa: E402
from .states import DEFAULT_TOL, PureState, Tolerances  # noqa: E402

__all__ = ["__version__", "PureState", "Tolerances", "DEFAULT_TOL",
           "SupersepError", "PreconditionError", "InputError"]
