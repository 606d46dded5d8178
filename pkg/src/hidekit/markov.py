"""Random-walk transition matrices, exact propagation, TV distance and mixing times."""

from __future__ import annotations

import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    BadTerminationProbability,
    DimensionMismatch,
    InvalidDistribution,
    MismatchedSupport,
    NotMixedWithinCap,
    OutOfRange,
)
from .graph import PortLabeledGraph
from .infotheory import Dist, JointDist, conditional_entropy, kl_divergence

__all__ = [
    "TransitionMatrix",
    "lazy_walk_matrix",
    "simple_walk_matrix",
    "algorithm_walk_matrix",
    "stationary_distribution",
    "propagate",
    "matrix_power",
    "tv_distance",
    "d_t",
    "dbar_t",
    "mixing_time",
    "default_t_max",
    "markov_joint",
    "monotonicity_probes",
    "MonotonicityReport",
]

ROW_TOL = 1e-12
# below this step count d(t) sweeps multiply incrementally; above it they square
LINEAR_SWEEP_LIMIT = 64


@dataclass(frozen=True, eq=False)
class TransitionMatrix:
    """Row-stochastic matrix; ``states[i]`` labels row/column ``i``."""

    matrix: np.ndarray
    states: tuple = ()

    def __post_init__(self) -> None:
        P = np.array(self.matrix, dtype=float)
        if P.ndim != 2 or P.shape[0] != P.shape[1]:
            raise DimensionMismatch(f"transition matrix must be square, got shape {P.shape}")
        if (P < 0).any():
            raise InvalidDistribution("transition matrix has a negative entry")
        bad = np.flatnonzero(np.abs(P.sum(axis=1) - 1.0) > ROW_TOL)
        if bad.size:
            raise InvalidDistribution(f"row {bad[0]} sums to {P[bad[0]].sum()!r}")
        P.setflags(write=False)
        object.__setattr__(self, "matrix", P)
        states = tuple(self.states) or tuple(range(1, P.shape[0] + 1))
        if len(states) != P.shape[0]:
            raise DimensionMismatch(f"{len(states)} state labels for a {P.shape[0]}-state matrix")
        object.__setattr__(self, "states", states)

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    def row(self, state) -> Dist:
        return Dist.from_vector(self.matrix[self.states.index(state)], self.states)


def lazy_walk_matrix(g: PortLabeledGraph) -> TransitionMatrix:
    P = np.zeros((g.n, g.n))
    for v in g.vertices:
        P[v - 1, v - 1] = 0.5
        share = 0.5 / g.degree(v)
        for u in g.neighbors(v):
            P[v - 1, u - 1] = share
    return TransitionMatrix(P, tuple(g.vertices))


def simple_walk_matrix(g: PortLabeledGraph) -> TransitionMatrix:
    """Non-lazy walk: move to a uniform neighbor every step (periodic on bipartite graphs)."""
    P = np.zeros((g.n, g.n))
    for v in g.vertices:
        for u in g.neighbors(v):
            P[v - 1, u - 1] = 1.0 / g.degree(v)
    return TransitionMatrix(P, tuple(g.vertices))


def algorithm_walk_matrix(g: PortLabeledGraph, q: float) -> TransitionMatrix:
    """Movement kernel of the randomized hider conditioned on not terminating.

    One round terminates with probability ``q``, stays with ``1/2`` and moves
    with ``1/2 - q``; dividing the last two by ``1 - q`` gives this kernel.
    """
    check_q(q)
    stay = 0.5 / (1.0 - q)
    P = np.zeros((g.n, g.n))
    for v in g.vertices:
        P[v - 1, v - 1] = stay
        share = (1.0 - stay) / g.degree(v)
        for u in g.neighbors(v):
            P[v - 1, u - 1] = share
    return TransitionMatrix(P, tuple(g.vertices))


def check_q(q: float) -> None:
    if not (isinstance(q, (int, float)) and 0.0 < q <= 0.5):
        raise BadTerminationProbability(f"termination probability must lie in (0, 1/2], got {q!r}")


def stationary_distribution(g: PortLabeledGraph) -> Dist:
    two_m = 2 * g.m
    return Dist({v: g.degree(v) / two_m for v in g.vertices})


def _vec(d: Dist, P: TransitionMatrix) -> np.ndarray:
    if set(d.probs) - set(P.states):
        raise DimensionMismatch(f"distribution has outcomes outside the chain's states: "
                                f"{sorted(map(str, set(d.probs) - set(P.states)))}")
    return np.array(d.vector(P.states))


def matrix_power(P: TransitionMatrix, t: int) -> np.ndarray:
    """``P^t`` by repeated squaring."""
    if t < 0:
        raise OutOfRange(f"step count must be >= 0, got {t}")
    return np.linalg.matrix_power(P.matrix, t)


def propagate(d: Dist, P: TransitionMatrix, t: int) -> Dist:
    """Exact law after ``t`` steps from initial law ``d``."""
    if t < 0:
        raise OutOfRange(f"step count must be >= 0, got {t}")
    if t == 0:
        return d
    v = _vec(d, P)
    if t <= LINEAR_SWEEP_LIMIT:
        for _ in range(t):
            v = v @ P.matrix
    else:
        v = v @ matrix_power(P, t)
    return Dist.from_vector(_renorm(v), P.states)


def _renorm(v: np.ndarray) -> np.ndarray:
    v = np.clip(v, 0.0, None)
    return v / math.fsum(v)


def tv_distance(p: Dist, q: Dist) -> float:
    if set(p.probs) != set(q.probs):
        raise MismatchedSupport("total variation needs both laws on the same outcome space")
    return 0.5 * math.fsum(abs(px - q.probs[x]) for x, px in p.probs.items())


def _tv_rows(A: np.ndarray, b: np.ndarray) -> np.ndarray:
    return 0.5 * np.abs(A - b).sum(axis=1)


def _d_of_power(Pt: np.ndarray, pi: np.ndarray) -> float:
    return float(_tv_rows(Pt, pi).max())


def _dbar_of_power(Pt: np.ndarray) -> float:
    best = 0.0
    for i in range(Pt.shape[0]):
        best = max(best, float(_tv_rows(Pt, Pt[i]).max()))
    return best


def d_t(P: TransitionMatrix, pi: Dist, t: int) -> float:
    """Worst-case TV distance to ``pi`` after ``t`` steps."""
    return _d_of_power(matrix_power(P, t), _vec(pi, P))


def dbar_t(P: TransitionMatrix, t: int) -> float:
    """Worst-case TV distance between two ``t``-step rows."""
    return _dbar_of_power(matrix_power(P, t))


def default_t_max(n: int, epsilon: float) -> int:
    return 8 * n**3 * max(1, math.ceil(math.log2(1.0 / epsilon)))


def mixing_time(P: TransitionMatrix, pi: Dist, epsilon: float = 0.25, t_max: int | None = None) -> int:
    """Least ``t`` with ``d(t) <= epsilon``.

    Multiplies step by step up to 64 steps, then doubles ``P^t`` by squaring
    and bisects the last doubling interval (``d`` is non-increasing in ``t``).
    """
    if not 0.0 < epsilon < 1.0:
        raise OutOfRange(f"epsilon must lie in (0, 1), got {epsilon}")
    if t_max is None:
        t_max = default_t_max(P.n, epsilon)
    if t_max < 1:
        raise OutOfRange(f"t_max must be >= 1, got {t_max}")
    pi_v = _vec(pi, P)
    M = P.matrix
    Pt = np.eye(P.n)
    for t in range(0, min(t_max, LINEAR_SWEEP_LIMIT) + 1):
        if _d_of_power(Pt, pi_v) <= epsilon:
            return t
        Pt = Pt @ M
    if t_max <= LINEAR_SWEEP_LIMIT:
        raise NotMixedWithinCap(t_max, _d_of_power(np.linalg.matrix_power(M, t_max), pi_v))
    lo, P_lo = LINEAR_SWEEP_LIMIT, np.linalg.matrix_power(M, LINEAR_SWEEP_LIMIT)
    while True:
        hi = min(2 * lo, t_max)
        P_hi = P_lo @ (P_lo if hi - lo == lo else np.linalg.matrix_power(M, hi - lo))
        if _d_of_power(P_hi, pi_v) <= epsilon:
            break
        if hi == t_max:
            raise NotMixedWithinCap(t_max, _d_of_power(P_hi, pi_v))
        lo, P_lo = hi, P_hi
    # invariant: d(lo) > epsilon >= d(hi)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        P_mid = P_lo @ np.linalg.matrix_power(M, mid - lo)
        if _d_of_power(P_mid, pi_v) <= epsilon:
            hi = mid
        else:
            lo, P_lo = mid, P_mid
    return hi


def markov_joint(prior: Dist, P: TransitionMatrix, t: int) -> JointDist:
    """Joint law of ``(X_0, X_t)`` with ``X_0 ~ prior``."""
    Pt = matrix_power(P, t)
    idx = {s: i for i, s in enumerate(P.states)}
    probs = {}
    for x, px in prior.probs.items():
        if px == 0:
            continue
        row = Pt[idx[x]]
        for j, y in enumerate(P.states):
            if row[j] > 0:
                probs[(x, y)] = px * row[j]
    return JointDist(_normalize(probs))


def _normalize(probs: dict) -> dict:
    total = math.fsum(probs.values())
    return {k: v / total for k, v in probs.items()}


@dataclass
class MonotonicityReport:
    t: list[int]
    kl: list[float]
    cond_entropy: list[float]
    slack: float = 1e-9
    monotone_kl_decreasing: bool = field(init=False)
    monotone_cond_entropy_nondecreasing: bool = field(init=False)

    def __post_init__(self) -> None:
        self.monotone_kl_decreasing = all(
            b <= a + self.slack or (math.isinf(a)) for a, b in zip(self.kl, self.kl[1:]))
        self.monotone_cond_entropy_nondecreasing = all(
            b >= a - self.slack for a, b in zip(self.cond_entropy, self.cond_entropy[1:]))

    def to_dict(self) -> dict:
        return {
            "t": self.t,
            "kl": [None if math.isinf(v) else v for v in self.kl],
            "cond_entropy": self.cond_entropy,
            "monotone_kl_decreasing": self.monotone_kl_decreasing,
            "monotone_cond_entropy_nondecreasing": self.monotone_cond_entropy_nondecreasing,
        }


def monotonicity_probes(
    P: TransitionMatrix,
    mu: Dist,
    nu: Dist,
    t_range: Iterable[int],
    prior: Dist | None = None,
    slack: float = 1e-9,
) -> MonotonicityReport:
    """Track D(mu P^t || nu P^t) and H(X_0 | X_t) over ``t_range``.

    ``X_0`` is drawn from ``prior`` (default ``mu``). Laws are pushed forward
    one step at a time, so ``t_range`` should be increasing.
    """
    ts = sorted(t_range)
    prior = mu if prior is None else prior
    full = lambda d: Dist({s: d[s] for s in P.states})  # noqa: E731
    mu_v, nu_v = _vec(mu, P), _vec(nu, P)
    rows = np.eye(P.n)
    kl, ce = [], []
    t_now = 0
    for t in ts:
        steps = t - t_now
        for _ in range(steps):
            mu_v, nu_v, rows = mu_v @ P.matrix, nu_v @ P.matrix, rows @ P.matrix
        t_now = t
        kl.append(kl_divergence(Dist.from_vector(_renorm(mu_v), P.states),
                                Dist.from_vector(_renorm(nu_v), P.states)))
        ce.append(conditional_entropy(_joint_from_rows(full(prior), rows, P.states)))
    return MonotonicityReport(ts, kl, ce, slack)


def _joint_from_rows(prior: Dist, rows: np.ndarray, states: Sequence) -> JointDist:
    probs = {}
    for i, x in enumerate(states):
        px = prior[x]
        if px == 0:
            continue
        for j, y in enumerate(states):
            if rows[i, j] > 0:
                probs[(x, y)] = px * rows[i, j]
    return JointDist(_normalize(probs))
