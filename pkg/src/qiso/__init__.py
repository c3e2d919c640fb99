"""Classical and quantum isometries of finite metric measure spaces."""

__version__ = "0.1.0"

from .errors import (InvalidSpaceError, NotEmbeddableError, PreconditionError, QisoError,  # noqa: E402
                     ResourceBoundError, StructuralError)
from .metric_space import (FiniteMetricSpace, from_coordinates, load_space, parse_standard_name,  # noqa: E402
                           standard_space, validate)
from .euclidean_embed import EmbeddedSpace, embed, embeddability  # noqa: E402
from .classical_iso import PermGroup, affine_form, isometry_group, mu_preserving_subgroup  # noqa: E402
from .magic_unitary import MagicUnitaryRep, check_all, from_permutation, quantum_certificate  # noqa: E402
from .filtration import build_filtration, check_preserved_classical, check_preserved_quantum  # noqa: E402
from .hopf_finite import GroupAction, build_hopf, check_isometry_formula, check_kac  # noqa: E402
