"""Weak pairings, logarithmic norms and contraction checks on R^n."""

from .contraction import (VectorFieldSpec, contraction_verify, integrate, jacobian_mu_bound,
                          osl_estimate)
from .errors import (DivergenceError, InputError, InternalConsistencyError, LognormlabError,
                     NumericError, ResourceError, SpecError)
from .lognorm import LogNormResult, lognorm, lognorm_limit_oracle, lumer_sup_estimate, lumer_witness
from .lpsolve import LinearProgram, LpSolution, build_polyhedral_lognorm_lp, extract_H, solve_lp
from .norms import NormSpec, l1_as_polyhedral, norm_eval, validate_norm_spec
from .pairings import (PairingSpec, active_index_set, compatible_norm, ell1_jmt_closed, jmt_lower,
                       jmt_upper, min_index_lg_eval, pairing_eval)
from .regularity import (almost_uniqueness_probe, check_lg_representability, check_regularity,
                         check_wp_axioms, curve_norm_check, dini_estimate, orthogonality_check)

__version__ = "0.1.0"
