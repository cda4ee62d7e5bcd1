"""Collocation solver for the feedback equilibrium of the pollution game.

The iteration keeps, for every player, the node values of the value
function together with its state-space interpolant and the current policy
values.  One sweep performs, at every state node and for every player:

1. bind the other players' controls (at their current policy values) in
   the precomputed control-space drift interpolants, leaving, per node,
   a one-variable polynomial family for the player's own control;
2. evaluate the candidate objective at the player's control nodes:
   stage gain plus the discounted value interpolant at the Euler
   successor state, everything multiplied by the per-step discount;
3. fit the one-dimensional Chebyshev interpolant of those samples and
   maximise it over the control interval with a safeguarded Newton
   iteration on its derivative;
4. after all nodes are done, refit the state-space value interpolants.

Work is scheduled in blocks of nodes (an exact factorisation
N_b * N_f = N_P); blocks may run on a thread pool.  Every kernel on the
block path performs a fixed per-node arithmetic sequence, so results are
bitwise identical for every block plan and worker count.

Successor states are clamped to the state box before interpolation; the
solver warns when more than 1% of the sampled successor components clamp,
which signals that P_max is too small for the chosen control bound.
"""

from __future__ import annotations

import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .cheb1d import CoefVector, derivative_array, make_basis, reference_nodes
from .chebnd import (
    CoefTensor,
    TensorStack,
    _bind_diagonal,
    _bind_rows,
    _bind_shared,
    _row_basis,
    stack_coeffs,
    tensor_coeffs,
)
from .game import GameSpec, StateGrid, build_state_grid, dynamics, step

_NEWTON_MAX_ITER = 30
_NEWTON_TOL = 1e-12
_SCAN_POINTS = 257
_BISECT_STEPS = 60
_CLAMP_WARN_FRACTION = 0.01


# ---------------------------------------------------------------------------
# plan and result containers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BlockPlan:
    """Exact factorisation of the node count into blocks: N_b * N_f = N_P."""

    n_blocks: int
    block_size: int

    def __post_init__(self):
        if self.n_blocks < 1 or self.block_size < 1:
            raise ValueError("block counts must be positive")

    @property
    def n_nodes(self) -> int:
        return self.n_blocks * self.block_size

    def slices(self) -> list[slice]:
        f = self.block_size
        return [slice(k * f, (k + 1) * f) for k in range(self.n_blocks)]


def partition(n_nodes: int, n_blocks: int) -> BlockPlan:
    """Split n_nodes into n_blocks contiguous blocks; n_blocks must divide."""
    if n_nodes < 1 or n_blocks < 1:
        raise ValueError("node and block counts must be positive")
    if n_nodes % n_blocks:
        raise ValueError(f"{n_blocks} does not divide {n_nodes} nodes")
    return BlockPlan(n_blocks=n_blocks, block_size=n_nodes // n_blocks)


@dataclass
class ValueField:
    """Per-player value node values (J, N_P) and state-space interpolants."""

    values: np.ndarray
    interpolants: list[CoefTensor]


@dataclass
class PolicyField:
    """Per-player control values on the state grid, shape (J, N_P)."""

    values: np.ndarray


@dataclass
class TimePath:
    """Simulated trajectory: times (T+1,), states and controls (T+1, J)."""

    t: np.ndarray
    states: np.ndarray
    controls: np.ndarray


@dataclass
class EquilibriumResult:
    """Outcome of the value iteration.

    `history` holds one row per sweep with the per-player sup-norm of the
    value change; `clamp_fraction` is the worst per-sweep share of sampled
    successor-state components that hit the state box.
    """

    converged: bool
    iterations: int
    values: ValueField
    policy: PolicyField
    history: np.ndarray
    timings: dict[str, float]
    clamp_fraction: float


# ---------------------------------------------------------------------------
# offline precomputation
# ---------------------------------------------------------------------------

def control_bases(spec: GameSpec):
    """Per-player control bases on [0, U_max] with degrees spec.Nu."""
    return tuple(make_basis(int(n), 0.0, spec.U_max) for n in spec.Nu)


def precompute_dynamics_stack(spec: GameSpec, grid: StateGrid) -> list[TensorStack]:
    """Control-space drift interpolants, one stack member per state node.

    For every player i, member j of stack i interpolates
    u -> g_i(node_j, u) through all control node tuples of [0, U_max]^J.
    These are computed once; every sweep only binds and evaluates them.
    """
    bases = control_bases(spec)
    cshape = tuple(b.size for b in bases)
    grids = np.meshgrid(*(b.nodes for b in bases), indexing="ij")
    controls = np.stack([g.ravel(order="F") for g in grids], axis=-1)
    vals = dynamics(spec, grid.nodes[None, :, :], controls[:, None, :])
    J = spec.J
    stacks = []
    for i in range(J):
        a = vals[:, :, i].reshape(tuple(reversed(cshape)) + (grid.n_nodes,))
        a = np.transpose(a, tuple(range(J - 1, -1, -1)) + (J,))
        stacks.append(stack_coeffs(a, bases))
    return stacks


def _transform_matrix(degree: int) -> np.ndarray:
    """Matrix form of the 1-D node-samples -> coefficients transform."""
    n = degree
    size = n + 1
    B = _row_basis(reference_nodes(n), size)
    w = np.ones(size)
    w[0] = w[-1] = 0.5
    s = np.full(size, 2.0 / n)
    s[0] = s[-1] = 1.0 / n
    return s[:, None] * (B.T * w[None, :])


class _PlayerWork:
    """Per-player constants: reordered drift coefficients and stage table."""

    __slots__ = ("index", "bind_order", "bind_sizes", "coeffs", "K", "B0", "M0", "stage")

    def __init__(self, spec: GameSpec, grid: StateGrid, stacks: list[TensorStack], i: int):
        J = spec.J
        self.index = i
        self.bind_order = [j for j in range(J) if j != i]
        self.bind_sizes = [int(spec.Nu[j]) + 1 for j in self.bind_order]
        # axes: (node, bound dims ascending..., own control dim, component)
        parts = []
        for comp in range(J):
            a = np.moveaxis(stacks[comp].coefficients, -1, 0)
            parts.append(np.transpose(a, [0] + [1 + j for j in self.bind_order] + [1 + i]))
        self.coeffs = np.ascontiguousarray(np.stack(parts, axis=-1))
        self.K = int(spec.Nu[i]) + 1
        self.B0 = _row_basis(reference_nodes(int(spec.Nu[i])), self.K)
        self.M0 = _transform_matrix(int(spec.Nu[i]))
        u_nodes = make_basis(int(spec.Nu[i]), 0.0, spec.U_max).nodes
        gain = u_nodes * (spec.A[i] - 0.5 * u_nodes)
        damage = 0.5 * spec.phi[i] * grid.nodes[:, i] ** 2
        self.stage = spec.h * (gain[None, :] - damage[:, None])


class _Workspace:
    __slots__ = ("spec", "grid", "state_sizes", "u_scale", "p_scale", "players")

    def __init__(self, spec: GameSpec, grid: StateGrid, stacks: list[TensorStack]):
        if len(stacks) != spec.J:
            raise ValueError("need one drift stack per player")
        for st in stacks:
            if st.count != grid.n_nodes:
                raise ValueError("drift stacks and grid disagree on the node count")
        self.spec = spec
        self.grid = grid
        self.state_sizes = list(grid.shape)
        self.u_scale = 2.0 / spec.U_max
        self.p_scale = 2.0 / spec.P_max
        self.players = [_PlayerWork(spec, grid, stacks, i) for i in range(spec.J)]


# ---------------------------------------------------------------------------
# safeguarded Newton maximisation (reference variable)
# ---------------------------------------------------------------------------

def _clenshaw_last(c: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Clenshaw evaluation of rows of (m, L) coefficients at points (m,)."""
    n = c.shape[1] - 1
    if n == 0:
        return c[:, 0].copy()
    x2 = 2.0 * x
    b1 = np.zeros_like(x)
    b2 = np.zeros_like(x)
    for k in range(n, 0, -1):
        b1, b2 = c[:, k] + x2 * b1 - b2, b1
    return c[:, 0] + x * b1 - b2


def _scan_refine(coef: np.ndarray, q1: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Dense-scan fallback: 257-point grid plus 60 bisection steps on f'."""
    m = coef.shape[0]
    xs = np.linspace(-1.0, 1.0, _SCAN_POINTS)
    vals = _clenshaw_last(
        np.repeat(coef, xs.size, axis=0),
        np.tile(xs, m),
    ).reshape(m, xs.size)
    best = np.argmax(vals, axis=1)
    x_scan = xs[best]
    lo = xs[np.maximum(best - 1, 0)]
    hi = xs[np.minimum(best + 1, xs.size - 1)]
    s_lo = np.sign(_clenshaw_last(q1, lo))
    for _ in range(_BISECT_STEPS):
        mid = 0.5 * (lo + hi)
        same = np.sign(_clenshaw_last(q1, mid)) == s_lo
        lo = np.where(same, mid, lo)
        hi = np.where(same, hi, mid)
    x_ref = 0.5 * (lo + hi)
    better = _clenshaw_last(coef, x_ref) >= vals[np.arange(m), best]
    return np.where(better, x_ref, x_scan), x_scan


def _maximise_block(
    coef: np.ndarray, x0: np.ndarray, always_scan: bool = False
) -> tuple[np.ndarray, np.ndarray]:
    """Maximise rows of (m, L) interpolants over [-1, 1].

    Runs a projected Newton iteration on the derivative from the warm
    start, compares the result against both endpoints, and falls back to
    a dense scan with bisection refinement for rows where Newton failed
    (no convergence, vanishing curvature, an iterate leaving the box, or
    a non-concave landing point).  `always_scan` adds the scan candidate
    for every row regardless of Newton's outcome.  Every operation is
    element-wise per row, so results do not depend on how rows are
    grouped into blocks.
    """
    m, L = coef.shape
    alt = np.ones(L)
    alt[1::2] = -1.0
    f_hi = coef.sum(axis=1)
    f_lo = (coef * alt).sum(axis=1)
    if L <= 2:
        take_hi = f_hi >= f_lo
        return np.where(take_hi, 1.0, -1.0), np.maximum(f_hi, f_lo)

    q1 = derivative_array(coef)
    q2 = derivative_array(q1)
    x = np.clip(x0, -1.0, 1.0).astype(float).copy()
    moving = np.ones(m, dtype=bool)
    failed = np.zeros(m, dtype=bool)
    for _ in range(_NEWTON_MAX_ITER):
        f1 = _clenshaw_last(q1, x)
        f2 = _clenshaw_last(q2, x)
        tiny = np.abs(f2) <= 1e-300
        raw = x - f1 / np.where(tiny, 1.0, f2)
        xn = np.clip(raw, -1.0, 1.0)
        left_box = moving & ~tiny & (raw != xn)
        failed |= left_box | (moving & tiny)
        moving &= ~tiny
        apply = moving
        dx = np.abs(xn - x)
        x = np.where(apply, xn, x)
        moving = apply & (dx > _NEWTON_TOL)
        if not moving.any():
            break
    failed |= moving
    failed |= _clenshaw_last(q2, x) >= 0.0
    if always_scan:
        failed |= True

    f_x = _clenshaw_last(coef, x)
    best_x = x
    best_f = f_x
    for cand_x, cand_f in ((-1.0, f_lo), (1.0, f_hi)):
        upd = cand_f > best_f
        best_x = np.where(upd, cand_x, best_x)
        best_f = np.where(upd, cand_f, best_f)
    if failed.any():
        idx = np.flatnonzero(failed)
        x_fb, x_scan = _scan_refine(coef[idx], q1[idx])
        for cand_x in (x_fb, x_scan):
            cand_f = _clenshaw_last(coef[idx], cand_x)
            upd = cand_f > best_f[idx]
            bx = best_x[idx]
            bf = best_f[idx]
            bx[upd] = cand_x[upd]
            bf[upd] = cand_f[upd]
            best_x[idx] = bx
            best_f[idx] = bf
    return best_x, best_f


def newton_maximize(coeffs: CoefVector, u0: float) -> tuple[float, float]:
    """Global maximiser of a 1-D interpolant over its interval.

    Parameters
    ----------
    coeffs : CoefVector
        Objective interpolant on an interval [a, b] (the control interval
        [0, U_max] in the solver).
    u0 : float
        Warm start in interval units.

    Returns
    -------
    (u_star, value)
        Maximising abscissa in interval units and the interpolant value
        there; never below any candidate (Newton point, both endpoints,
        dense scan with bisection refinement) by more than 1e-12.  The
        scan candidate is always evaluated here, so the result is the
        global maximum of the interpolant up to that resolution even on
        multimodal inputs.
    """
    basis = coeffs.basis
    x0 = (2.0 * float(u0) - (basis.a + basis.b)) / (basis.b - basis.a)
    coef = coeffs.coefficients[None, :]
    x, f = _maximise_block(coef, np.array([x0]), always_scan=True)
    u = 0.5 * (basis.b - basis.a) * float(x[0]) + 0.5 * (basis.a + basis.b)
    return u, float(f[0])


# ---------------------------------------------------------------------------
# one sweep
# ---------------------------------------------------------------------------

def _best_response_block(
    ws: _Workspace,
    i: int,
    sl: slice,
    value_coeffs: list[np.ndarray],
    policy_values: np.ndarray,
    out_u: np.ndarray,
    out_v: np.ndarray,
) -> int:
    """Best response of player i on one block of nodes; returns clamp count."""
    spec = ws.spec
    pw = ws.players[i]
    m = sl.stop - sl.start
    J = spec.J

    # Step 1: bind the other players' current controls, node by node.
    cur = pw.coeffs[sl]
    for t, j in enumerate(pw.bind_order):
        xb = policy_values[j, sl] * ws.u_scale - 1.0
        B = _row_basis(xb, pw.bind_sizes[t])
        cur = _bind_diagonal(B, cur.reshape(m, pw.bind_sizes[t], -1))

    # Step 2: drift at the player's own control nodes and successor states.
    g = _bind_shared(pw.B0, cur.reshape(m, pw.K, J))          # (m, K, J)
    nxt = ws.grid.nodes[sl][:, None, :] + spec.h * g
    clipped = np.clip(nxt, 0.0, spec.P_max)
    n_clamped = int(np.count_nonzero(clipped != nxt))
    pts = clipped.reshape(-1, J) * ws.p_scale - 1.0           # (m*K, J)

    # discounted value at the successor states (diagonal over the point axis)
    vc = value_coeffs[i]
    sizes = ws.state_sizes
    B = _row_basis(pts[:, 0], sizes[0])
    curv = _bind_rows(B, vc.reshape(sizes[0], -1))
    for d in range(1, J - 1):
        B = _row_basis(pts[:, d], sizes[d])
        curv = _bind_diagonal(B, curv.reshape(-1, sizes[d], curv.shape[1] // sizes[d]))
    B = _row_basis(pts[:, J - 1], sizes[J - 1])
    v_next = np.einsum("ql,ql->q", B, curv.reshape(-1, sizes[J - 1]))

    objective = spec.delta * (pw.stage[sl] + v_next.reshape(m, pw.K))
    if not np.all(np.isfinite(objective)):
        raise FloatingPointError("non-finite objective sample in sweep")

    # Steps 3-4: fit in the own control and maximise.
    coef = np.matmul(pw.M0, objective[:, :, None])[:, :, 0]
    x0 = policy_values[i, sl] * ws.u_scale - 1.0
    x_best, f_best = _maximise_block(coef, x0)
    out_u[i, sl] = (x_best + 1.0) * (0.5 * spec.U_max)
    out_v[i, sl] = f_best
    return n_clamped


def _run_sweep(
    ws: _Workspace,
    value_coeffs: list[np.ndarray],
    policy_values: np.ndarray,
    plan: BlockPlan,
    executor: ThreadPoolExecutor | None,
) -> tuple[np.ndarray, np.ndarray, int]:
    spec = ws.spec
    n = ws.grid.n_nodes
    out_u = np.empty((spec.J, n))
    out_v = np.empty((spec.J, n))
    tasks = [(i, sl) for i in range(spec.J) for sl in plan.slices()]
    if executor is None:
        counts = [
            _best_response_block(ws, i, sl, value_coeffs, policy_values, out_u, out_v)
            for i, sl in tasks
        ]
    else:
        counts = list(
            executor.map(
                lambda t: _best_response_block(
                    ws, t[0], t[1], value_coeffs, policy_values, out_u, out_v
                ),
                tasks,
            )
        )
    return out_u, out_v, int(sum(counts))


def _refit(ws: _Workspace, node_values: np.ndarray) -> tuple[list[CoefTensor], list[np.ndarray]]:
    tensors = []
    arrays = []
    shape = tuple(ws.state_sizes)
    for i in range(ws.spec.J):
        t = tensor_coeffs(node_values[i].reshape(shape, order="F"), ws.grid.bases)
        tensors.append(t)
        arrays.append(t.coefficients)
    return tensors, arrays


def bellman_sweep(
    spec: GameSpec,
    grid: StateGrid,
    values: ValueField,
    policy: PolicyField,
    stacks: list[TensorStack],
    plan: BlockPlan | None = None,
) -> tuple[ValueField, PolicyField]:
    """One synchronous best-response sweep over all players and nodes.

    All players respond to the iteration-r fields; the result is bitwise
    independent of the block plan.
    """
    ws = _Workspace(spec, grid, stacks)
    plan = plan if plan is not None else partition(grid.n_nodes, 1)
    if plan.n_nodes != grid.n_nodes:
        raise ValueError("block plan does not cover the grid")
    coeff_arrays = [t.coefficients for t in values.interpolants]
    u_new, v_new, _ = _run_sweep(ws, coeff_arrays, policy.values, plan, None)
    tensors, _ = _refit(ws, v_new)
    return ValueField(values=v_new, interpolants=tensors), PolicyField(values=u_new)


# ---------------------------------------------------------------------------
# fixed-point driver
# ---------------------------------------------------------------------------

def _initial_fields(spec: GameSpec, grid: StateGrid, init) -> tuple[np.ndarray, np.ndarray]:
    n = grid.n_nodes
    if init is None:
        v = np.zeros((spec.J, n))
        u = np.broadcast_to(spec.A[:, None], (spec.J, n)).copy()
        return v, u
    values, policy = init
    v = np.array(getattr(values, "values", values), dtype=float)
    u = np.array(getattr(policy, "values", policy), dtype=float)
    if v.shape != (spec.J, n) or u.shape != (spec.J, n):
        raise ValueError(f"initial fields must have shape {(spec.J, n)}")
    if np.any(u < 0.0) or np.any(u > spec.U_max):
        raise ValueError("initial policy outside [0, U_max]")
    return v, u


def solve(
    spec: GameSpec,
    plan: BlockPlan | None = None,
    init=None,
    workers: int = 1,
) -> EquilibriumResult:
    """Iterate best-response sweeps until the value change drops below tol.

    Parameters
    ----------
    spec : GameSpec
        Model and numerical parameters.
    plan : BlockPlan, optional
        Work split (defaults to a single block).  Plans never change the
        result, only the scheduling.
    init : pair, optional
        Initial (values, policy) as (J, N_P) arrays or field objects;
        defaults to zero values and the myopic policy u_i = A_i.
    workers : int
        Thread count for block processing; 1 runs inline.

    Returns
    -------
    EquilibriumResult
        Non-convergence within max_iters is reported via the `converged`
        flag rather than an exception, so partial runs can be recorded.
    """
    t_start = time.perf_counter()
    grid = build_state_grid(spec)
    stacks = precompute_dynamics_stack(spec, grid)
    ws = _Workspace(spec, grid, stacks)
    n = grid.n_nodes
    plan = plan if plan is not None else partition(n, 1)
    if plan.n_nodes != n:
        raise ValueError(f"block plan covers {plan.n_nodes} nodes, grid has {n}")
    v_values, u_values = _initial_fields(spec, grid, init)
    tensors, coeff_arrays = _refit(ws, v_values)
    targets_per_sweep = n * sum(pw.K for pw in ws.players) * spec.J
    t_setup = time.perf_counter() - t_start

    executor = ThreadPoolExecutor(max_workers=workers) if workers > 1 else None
    history = []
    clamp_fraction = 0.0
    converged = False
    iterations = 0
    try:
        for iterations in range(1, spec.max_iters + 1):
            u_new, v_new, clamped = _run_sweep(ws, coeff_arrays, u_values, plan, executor)
            clamp_fraction = max(clamp_fraction, clamped / targets_per_sweep)
            diffs = np.max(np.abs(v_new - v_values), axis=1)
            history.append(diffs)
            v_values, u_values = v_new, u_new
            tensors, coeff_arrays = _refit(ws, v_values)
            if float(diffs.max()) < spec.tol:
                converged = True
                break
    finally:
        if executor is not None:
            executor.shutdown(wait=True)
    if clamp_fraction > _CLAMP_WARN_FRACTION:
        warnings.warn(
            f"{clamp_fraction:.1%} of successor-state samples clamped to the state box; "
            "P_max is probably too small",
            RuntimeWarning,
            stacklevel=2,
        )
    t_total = time.perf_counter() - t_start
    return EquilibriumResult(
        converged=converged,
        iterations=iterations,
        values=ValueField(values=v_values, interpolants=tensors),
        policy=PolicyField(values=u_values),
        history=np.array(history).reshape(-1, spec.J),
        timings={"setup": t_setup, "sweeps": t_total - t_setup, "total": t_total},
        clamp_fraction=clamp_fraction,
    )


# ---------------------------------------------------------------------------
# trajectory simulation
# ---------------------------------------------------------------------------

def fit_policy(grid: StateGrid, policy: PolicyField) -> list[CoefTensor]:
    """State-space interpolants of the per-player policy node values."""
    shape = tuple(b.size for b in grid.bases)
    return [
        tensor_coeffs(policy.values[i].reshape(shape, order="F"), grid.bases)
        for i in range(policy.values.shape[0])
    ]


def _basis_vector(x: float, size: int) -> np.ndarray:
    v = np.empty(size)
    v[0] = 1.0
    if size > 1:
        v[1] = x
    for l in range(2, size):
        v[l] = 2.0 * x * v[l - 1] - v[l - 2]
    return v


def simulate(
    spec: GameSpec,
    policies: list[CoefTensor],
    p0,
    n_steps: int,
) -> TimePath:
    """Roll the closed loop forward: u_n = policy(p_n), Euler step, repeat.

    Controls are clipped to [0, U_max] and states to [0, P_max]; the
    returned path has n_steps + 1 rows including the initial state.
    """
    J = spec.J
    if len(policies) != J:
        raise ValueError("need one policy interpolant per player")
    p = np.asarray(p0, dtype=float).copy()
    if p.shape != (J,) or np.any(p < 0.0) or np.any(p > spec.P_max):
        raise ValueError(f"p0 must lie in [0, {spec.P_max}]^{J}")
    coefs = np.stack([pt.coefficients for pt in policies], axis=-1)
    letters = "abcdefgh"[:J]
    expr = f"{letters}z," + ",".join(letters) + "->z"
    sizes = [b.size for b in policies[0].bases]
    n_steps = int(n_steps)
    t = np.arange(n_steps + 1) * spec.h
    states = np.empty((n_steps + 1, J))
    controls = np.empty((n_steps + 1, J))
    scale = 2.0 / spec.P_max
    for nstep in range(n_steps + 1):
        states[nstep] = p
        vecs = [_basis_vector(scale * p[d] - 1.0, sizes[d]) for d in range(J)]
        u = np.clip(np.einsum(expr, coefs, *vecs), 0.0, spec.U_max)
        controls[nstep] = u
        if nstep < n_steps:
            p = step(spec, p, u)
    return TimePath(t=t, states=states, controls=controls)
