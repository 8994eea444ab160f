"""Basis-independent quantum coherence and its distribution.

Coherence is measured as the square-root Jensen-Shannon distance from a
state to the maximally mixed state, which makes it invariant under every
unitary, and is then split into collective/localized and intrinsic/local
parts for multipartite systems.
"""
from .coherence import (
    BasisSpec,
    basis_coherence,
    basis_spec,
    computational_basis,
    delta_coherence,
    hadamard_basis,
    pure_coherence_closed_form,
    total_coherence,
    unitary_invariance_check,
    werner_coherence_closed_form,
)
from .decompose import (
    DecompositionReport,
    SeparableAnsatz,
    check_inequalities,
    collective_coherence,
    intrinsic_coherence,
    local_coherence_bd,
    local_coherence_bi,
    local_unitary_invariance_check,
    localized_coherence,
    product_of_marginals,
    verify_closest_product,
)
from .divergence import (
    ProbDist,
    classical_jsd,
    j_divergence,
    lp_distance,
    metric,
    prob_dist,
    qjsd,
    quantum_relative_entropy,
    relative_entropy,
    s_divergence,
)
from .errors import (
    NumericError,
    OptimizerFailure,
    QcohereError,
    ValidationError,
)
from .harness import SweepSpec, run_sweep, verify_metric_campaign, verify_product_campaign
from .optim import OptimizerConfig, OptimizerResult, minimize
from .qstate import (
    DensityMatrix,
    PureState,
    StateRecipe,
    UnitaryMatrix,
    conjugate,
    dephase,
    make_ket,
    make_state,
    maximally_mixed,
    partial_trace,
    random_density_matrix,
    random_pure_state,
    random_unitary,
    spectrum,
    tensor,
    validate,
    von_neumann_entropy,
)

__version__ = "0.1.0"
