"""Finite models of coarse maps, Roe-type block matrices and their homotopies."""

from .coarse_maps import (ExpansionModulus, PointMap, closeness_distance, compose,
                          equibornologous_modulus, expansion_modulus, fiber_profile)
from .cylinder import (CoarseHomotopyData, PCylinder, build_cylinder, inclusions, slice_family,
                       verify_family_properties)
from .metric_space import FiniteMetricSpace, ball, growth_profile, validate_metric
from .pipeline import (ChainedHomotopy, demonstrate_propmult_gap, verify_corner_lemma,
                       verify_functoriality, verify_homotopy_invariance, verify_identity_law)
from .report import StructuralError, ValidationReport, VerificationReport
from .roe_matrix import (BlockMatrix, IndexSpace, corner_embed, operator_norm, propagation,
                         pushforward, reindex, schur_constant)
from .rotation import (Involution, RotationPath, closeness_homotopy, constancy_check,
                       propagation_bound_check, rotation_matrix, rotation_propagation)

__version__ = "0.1.0"
