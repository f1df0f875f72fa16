"""Weighted-consensus engine: iteration matrix, certification, runs, predictions.

The update rule is x(k+1) = P x(k) with P = I - eps * L_w, where
L_w = W^{-1} L scales each Laplacian row by the inverse node weight.  When
the graph is strongly connected and 0 < eps < min_i w_i / d_i, P is
primitive row-stochastic and the state converges to a consensus value
alpha = v . x(0), where v is the positive unit-l1 null vector of L_w^T.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .graph import Digraph, is_strongly_connected, is_undirected, laplacian, out_degrees
from .linalg import as_vector, null_vector, power_iteration

DEFAULT_EPSILON_FACTOR = 0.9
DEFAULT_TOL = 1e-10
DEFAULT_MAX_STEPS = 1_000_000
DEFAULT_SNAPSHOT_LIMIT = 1000
# step size used when the bound is infinite (graph without edges)
FALLBACK_EPSILON = 1.0

_POWER_TOL = 1e-13
_POWER_MAX_ITER = 20_000


class HypothesisViolation(RuntimeError):
    """A convergence-theorem hypothesis required by the operation does not hold."""


@dataclass(frozen=True)
class WeightedSystem:
    """A digraph with positive node weights and the derived matrices.

    lap is the Laplacian L = D - A; lap_w is W^{-1} L (row i divided by
    w[i]).  listeners/sources are the edges as parallel index arrays sorted
    by (listener, source); this fixed ascending order is the canonical
    summation order shared with the message-passing simulator, which is what
    keeps the two execution paths bit-identical.  Treat instances as
    immutable; the arrays are not defensively copied.
    """

    graph: Digraph
    w: np.ndarray
    d: np.ndarray
    lap: np.ndarray
    lap_w: np.ndarray
    listeners: np.ndarray
    sources: np.ndarray

    @property
    def n(self) -> int:
        return self.graph.n


def build_system(graph: Digraph, w) -> WeightedSystem:
    """Validate weights and precompute the matrices for a weighted system."""
    wv = as_vector(w, graph.n).copy()
    if wv.size and float(wv.min()) <= 0.0:
        raise ValueError("node weights must be strictly positive")
    d = out_degrees(graph)
    lap = laplacian(graph)
    lap_w = lap / wv[:, None]
    edge_list = sorted(graph.edges)
    listeners = np.array([i for i, _ in edge_list], dtype=np.intp)
    sources = np.array([j for _, j in edge_list], dtype=np.intp)
    return WeightedSystem(
        graph=graph, w=wv, d=d, lap=lap, lap_w=lap_w, listeners=listeners, sources=sources
    )


def epsilon_bound(system: WeightedSystem) -> float:
    """Largest certified step size: min over nodes with out-degree > 0 of w_i / d_i.

    Returns +inf for a graph without edges (any step size leaves the state
    fixed).
    """
    active = system.d > 0
    if not bool(active.any()):
        return math.inf
    return float(np.min(system.w[active] / system.d[active]))


def default_epsilon(system: WeightedSystem) -> float:
    """0.9 times the certified bound, or 1.0 when the bound is infinite."""
    bound = epsilon_bound(system)
    if math.isinf(bound):
        return FALLBACK_EPSILON
    return DEFAULT_EPSILON_FACTOR * bound


@dataclass(frozen=True)
class IterationMatrix:
    """Iteration matrix P = I - eps * L_w plus its certification flag.

    certified is True iff eps is strictly below the degree bound and the
    graph is strongly connected, the hypotheses under which convergence to
    consensus is guaranteed.
    """

    p: np.ndarray
    epsilon: float
    certified: bool


def build_iteration_matrix(system: WeightedSystem, epsilon: float) -> IterationMatrix:
    """Assemble P = I - eps * L_w entrywise.

    Each row uses the ratio eps / w_i computed first, so off-diagonal
    entries are exactly fl(eps / w_i) and the diagonal is
    fl(1 - fl(ratio * d_i)).  Starting from the ratio makes the matrix
    invariant under jointly scaling (w, eps) by any constant whose products
    round exactly, and within a couple of ulps otherwise.
    """
    eps = float(epsilon)
    if not math.isfinite(eps) or eps <= 0.0:
        raise ValueError("epsilon must be positive and finite")
    n = system.n
    ratios = eps / system.w
    p = np.zeros((n, n), dtype=np.float64)
    if system.listeners.size:
        p[system.listeners, system.sources] = ratios[system.listeners]
    idx = np.arange(n)
    p[idx, idx] = 1.0 - ratios * system.d
    certified = eps < epsilon_bound(system) and is_strongly_connected(system.graph)
    return IterationMatrix(p=p, epsilon=eps, certified=certified)


@dataclass(frozen=True)
class SpectralPrediction:
    """Closed-form prediction for a certified system.

    v is the positive unit-l1 null vector of L_w^T (the conserved functional),
    alpha = v . x0 is the predicted consensus value, and rho_estimate is a
    power-iteration estimate of the spectral radius of P (1.0 up to numerics
    for a certified system).
    """

    v: np.ndarray
    alpha: float
    rho_estimate: float


def predict(system: WeightedSystem, x0, epsilon: float | None = None) -> SpectralPrediction:
    """Predict the consensus value without iterating.

    Requires a strongly connected graph.  epsilon only affects the
    rho_estimate diagnostic; when omitted or not certified, the default
    step size is used for that estimate.
    """
    x = as_vector(x0, system.n)
    if not is_strongly_connected(system.graph):
        raise HypothesisViolation("graph is not strongly connected")
    v = null_vector(system.lap_w.T)
    alpha = float(v @ x)
    bound = epsilon_bound(system)
    eps = float(epsilon) if epsilon is not None else default_epsilon(system)
    if not (0.0 < eps < bound):
        eps = default_epsilon(system)
    pm = build_iteration_matrix(system, eps)
    start = np.full(system.n, 1.0 / system.n)
    pr = power_iteration(pm.p.T, start, max_iter=_POWER_MAX_ITER, tol=_POWER_TOL)
    return SpectralPrediction(v=v, alpha=alpha, rho_estimate=pr.value)


def matrix_stepper(system: WeightedSystem, epsilon: float) -> Callable[[np.ndarray], np.ndarray]:
    """One synchronous update as a callable on state vectors.

    Evaluates x_i + (eps / w_i) * sum_j (x_j - x_i) over edges in ascending
    (listener, source) order; np.bincount accumulates each node's sum left
    to right, reproducing the simulator's per-agent loop bit for bit.
    """
    ratios = epsilon / system.w
    listeners = system.listeners
    sources = system.sources
    n = system.n

    def step(x: np.ndarray) -> np.ndarray:
        diffs = x[sources] - x[listeners]
        sums = np.bincount(listeners, weights=diffs, minlength=n)
        return x + ratios * sums

    return step


class _SnapshotSampler:
    """Stride-doubling trace thinning: deterministic, keeps first and final rows.

    Records every stride-th step; when the buffer would exceed the limit the
    stride doubles and already-recorded rows are rethinned, so the kept steps
    are always the multiples of a single power of two plus the final step.
    """

    def __init__(self, limit: int):
        self.limit = max(2, int(limit))
        self.stride = 1
        self.rows: list[tuple[int, np.ndarray, float, float]] = []

    def offer(self, step: int, x: np.ndarray, dis: float, cons: float) -> None:
        if step % self.stride:
            return
        self.rows.append((step, x.copy(), dis, cons))
        while len(self.rows) > self.limit - 1:
            self.stride *= 2
            self.rows = [row for row in self.rows if row[0] % self.stride == 0]

    def finish(self, step: int, x: np.ndarray, dis: float, cons: float) -> None:
        if self.rows and self.rows[-1][0] == step:
            return
        self.rows.append((step, x.copy(), dis, cons))


@dataclass(frozen=True)
class RunTrace:
    """Recorded trajectory of a consensus run.

    steps holds the recorded step indices (downsampled, always including 0
    and the final step); states, disagreement, and conserved are parallel to
    it.  converged_at is the first step whose disagreement dropped below the
    tolerance, or None when the budget ran out first.  conserved_drift is
    the spread of the conserved quantity over the recorded trace relative to
    max|x0| (nan when the conserved functional is unavailable).
    """

    steps: list[int]
    states: list[np.ndarray]
    disagreement: list[float]
    conserved: list[float]
    predicted_alpha: float
    converged_at: int | None
    steps_run: int
    conserved_drift: float

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]

    @property
    def final_disagreement(self) -> float:
        return self.disagreement[-1]


def run(
    system: WeightedSystem,
    x0,
    epsilon: float | None = None,
    *,
    tol: float = DEFAULT_TOL,
    max_steps: int = DEFAULT_MAX_STEPS,
    snapshot_limit: int = DEFAULT_SNAPSHOT_LIMIT,
    override_uncertified: bool = False,
    stepper: Callable[[np.ndarray], np.ndarray] | None = None,
) -> RunTrace:
    """Iterate the consensus update until the disagreement max(x) - min(x)
    falls below tol or max_steps updates have been applied.

    Refuses to run an uncertified configuration (epsilon at or above the
    bound, or a graph that is not strongly connected) unless
    override_uncertified is set; uncertified runs carry no guarantee and may
    diverge.  On a strongly connected graph the conserved functional v . x
    and the predicted consensus value are tracked; otherwise those fields
    are nan.

    stepper replaces the built-in matrix update with any callable mapping a
    state vector to the next state; the run loop, stopping rule, and trace
    recording are unchanged, which is how the message-passing simulator is
    driven through the identical reporting path.
    """
    x = as_vector(x0, system.n).copy()
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    if max_steps < 0:
        raise ValueError("max_steps must be nonnegative")
    eps = float(epsilon) if epsilon is not None else default_epsilon(system)
    pm = build_iteration_matrix(system, eps)
    if not pm.certified and not override_uncertified:
        raise HypothesisViolation(
            "configuration is not certified (epsilon at or above the bound, or graph "
            "not strongly connected)"
        )

    if is_strongly_connected(system.graph):
        v = null_vector(system.lap_w.T)
        alpha = float(v @ x)
    else:
        v = None
        alpha = math.nan

    if stepper is None:
        stepper = matrix_stepper(system, eps)

    x0_scale = float(np.max(np.abs(x))) if system.n else 0.0
    drift_denom = x0_scale if x0_scale > 0.0 else 1.0

    sampler = _SnapshotSampler(snapshot_limit)
    cons_min = math.inf
    cons_max = -math.inf
    converged_at: int | None = None
    k = 0
    while True:
        dis = float(x.max() - x.min())
        if v is not None:
            cons = float(v @ x)
            cons_min = min(cons_min, cons)
            cons_max = max(cons_max, cons)
        else:
            cons = math.nan
        sampler.offer(k, x, dis, cons)
        if dis < tol:
            converged_at = k
            break
        if k >= max_steps:
            break
        x = stepper(x)
        k += 1
    sampler.finish(k, x, dis, cons)

    drift = (cons_max - cons_min) / drift_denom if v is not None else math.nan
    return RunTrace(
        steps=[row[0] for row in sampler.rows],
        states=[row[1] for row in sampler.rows],
        disagreement=[row[2] for row in sampler.rows],
        conserved=[row[3] for row in sampler.rows],
        predicted_alpha=alpha,
        converged_at=converged_at,
        steps_run=k,
        conserved_drift=drift,
    )


def limit_matrix(system: WeightedSystem, epsilon: float | None = None) -> np.ndarray:
    """Limit of P^k for a certified system: every row equals v.

    With v the positive unit-l1 null vector of L_w^T, the powers of P
    converge to the rank-one matrix with constant rows v, so the limit state
    is (v . x0) in every coordinate.
    """
    eps = float(epsilon) if epsilon is not None else default_epsilon(system)
    pm = build_iteration_matrix(system, eps)
    if not pm.certified:
        raise HypothesisViolation(
            "limit matrix requires a certified system (strongly connected graph and "
            "epsilon strictly below the bound)"
        )
    v = null_vector(system.lap_w.T)
    return np.tile(v, (system.n, 1))


def undirected_alpha(system: WeightedSystem, x0) -> float:
    """Consensus value on a connected undirected graph: sum(w x0) / sum(w).

    The conserved direction is proportional to the weight vector itself
    there, so no eigenvector computation is needed.
    """
    x = as_vector(x0, system.n)
    if not is_undirected(system.graph):
        raise HypothesisViolation("closed-form weighted mean requires an undirected graph")
    if not is_strongly_connected(system.graph):
        raise HypothesisViolation("closed-form weighted mean requires a connected graph")
    return float((system.w @ x) / np.sum(system.w))
