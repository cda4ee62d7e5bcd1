"""Tensorized Chebyshev collocation solver for discrete-space pollution games.

The package computes Markov-perfect (feedback) Nash equilibria of a
J-player linear-quadratic pollution game by discounted value iteration on
a tensor-product Chebyshev collocation grid, with batched evaluation of
the interpolants involved and block-parallel scheduling of the per-node
work.  A coefficient-space fixed point of the same Bellman update serves
as an exact oracle for the 2-player case.
"""

from .cheb1d import (
    ChebBasis1D,
    CoefVector,
    coeffs_from_samples,
    derivative_coeffs,
    eval_1d,
    from_reference,
    make_basis,
    to_reference,
)
from .chebnd import (
    CoefTensor,
    GatherIndex,
    TensorStack,
    basis_matrix,
    eval_axis,
    eval_diagonal_batch,
    eval_full,
    make_gather_index,
    stack_coeffs,
    tensor_coeffs,
)
from .game import (
    GameSpec,
    StateGrid,
    build_state_grid,
    discounted_payoff,
    dynamics,
    stage_payoff,
    step,
)
from .oracle import LQFeedback, lq_bellman_update, lq_solve, policy_error
from .presets import preset_spec, spec_from_dict, spec_to_dict
from .solver import (
    BlockPlan,
    EquilibriumResult,
    PolicyField,
    TimePath,
    ValueField,
    bellman_sweep,
    fit_policy,
    newton_maximize,
    partition,
    precompute_dynamics_stack,
    simulate,
    solve,
)

__version__ = "0.1.0"
