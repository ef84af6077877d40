"""Weight sequences, weight matrices and weight functions, with the seminorm
systems of Roumieu-type ultradifferentiable classes checked on finite prefixes."""

from .errors import (BlockNotFound, BoundaryAttained, ConstructionFailed, DepthExceeded,
                     ExtendDepth, ExtendGrid, InvalidArgument, InvalidSequence, NoGap,
                     ParseError, RoumieuError)
from .family import RSequence, N_from_r, product_weight, r_from_N
from .matrices import (SCHEDULES, VWitness, WeightMatrix, check_matrix_M2prime,
                       vset_membership, vset_sample, vset_star_membership, witness_diagonal,
                       witness_sup)
from .seminorms import (DerivativeBoundProfile, EquivalenceReport, SeminormValue, corpus,
                        equivalence_report, projective_membership, roumieu_membership,
                        seminorm_Mh, seminorm_N1, seminorm_omega_rho, seminorm_r)
from .sequences import (WeightSequence, associated_function, associated_function_grid,
                        check_condition, log_convex_minorant, relation, scale_geometric)
from .verdict import FAILS, HOLDS, INCONCLUSIVE, Verdict
from .weights import (WeightFunctionOmega, YoungConjugate, biconjugate,
                      check_equiv_associated, check_weight_function, interpolate_sigma,
                      matrix_from_omega, shipped_omegas, vomega_membership,
                      young_conjugate)

__version__ = "0.1.0"
