"""Replicator dynamics on the sequence form of two-player extensive-form games."""

from .dynamics import (
    DriftError,
    DriftWarning,
    PayoffPositivityError,
    ReplicatorConfig,
    TrajectoryPoint,
    continuous_rhs_normal,
    continuous_rhs_sequence,
    discrete_step_normal,
    discrete_step_sequence,
    expected_payoff,
    g_matrix,
    g_vector,
    integrate_trajectory,
    naive_discrete_step_sequence,
)
from .forms import (
    NormalForm,
    Plan,
    Sequence,
    SequenceForm,
    build_normal_form,
    build_sequence_form,
    check_sequence_constraints,
    enumerate_plans,
    reduce_normal_form,
    reduced_plans,
)
from .game_tree import (
    Decision,
    GameTree,
    PlanCapError,
    Terminal,
    Violation,
    build_example_fig1,
    comb_game,
    random_game,
    validate_game,
)
from .numerics import EigenSolverError, SparseBilinear, bilinear, eigenvalues, finite_difference_jacobian
from .stability import (
    StabilityReport,
    analyze_stability,
    classify_stability,
    g_vector_completed,
    jacobian,
    tiebreak_variants,
)
from .strategies import (
    BehavioralStrategy,
    NormalStrategy,
    SequenceStrategy,
    behavioral_to_normal,
    behavioral_to_sequence,
    is_realization_equivalent,
    normal_to_behavioral,
    realization_probabilities,
    reduced_normal_to_sequence,
    sequence_to_behavioral,
)

__version__ = "0.1.0"
