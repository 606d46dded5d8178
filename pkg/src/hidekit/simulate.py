"""Synchronous-round execution of k agents, plus exact final-position laws."""

from __future__ import annotations

from collections import Counter
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .algorithms import Action, Agent, AlgorithmSpec, LocalView, make_agent
from .errors import NonTermination, UnsupportedAlgorithm, ValidationError
from .graph import PortLabeledGraph
from .infotheory import Dist
from .markov import algorithm_walk_matrix

__all__ = [
    "DEFAULT_CAP",
    "TAIL_TOL",
    "Trace",
    "Configuration",
    "RunResult",
    "agent_rng",
    "run_agent",
    "run_single",
    "run_multi",
    "exact_final_law",
    "final_law_rows",
]

DEFAULT_CAP = 10**6
# geometric tail mass left out of the randomized hider's exact law
TAIL_TOL = 1e-9


@dataclass
class Trace:
    """Positions at the start of every round (``visited[0]`` is the start).

    ``rounds`` counts executed Stay/Move rounds; the round in which the agent
    decides to terminate is not counted, so a run may have zero rounds.
    ``terminated`` is False when the run was cut by a truncation horizon.
    """

    visited: list[int]
    moves: int
    rounds: int
    terminated: bool

    @property
    def final(self) -> int:
        return self.visited[-1]

    def to_dict(self) -> dict[str, Any]:
        return {"visited": self.visited, "moves": self.moves, "rounds": self.rounds,
                "terminated": self.terminated}


@dataclass(frozen=True)
class Configuration:
    """Agent counts per vertex; agents are indistinguishable."""

    counts: tuple[tuple[int, int], ...]

    @classmethod
    def of(cls, positions: Iterable[int]) -> Configuration:
        return cls(tuple(sorted(Counter(positions).items())))

    @property
    def k(self) -> int:
        return sum(c for _, c in self.counts)

    def key(self) -> int | tuple[int, ...]:
        """Hashable outcome label: the vertex for one agent, else the sorted multiset."""
        flat = tuple(v for v, c in self.counts for _ in range(c))
        return flat[0] if len(flat) == 1 else flat

    def to_dict(self) -> dict[str, int]:
        return {str(v): c for v, c in self.counts}


@dataclass
class RunResult:
    initial: Configuration
    final: Configuration
    per_agent: list[Trace]
    energy: int = field(init=False)
    makespan: int = field(init=False)

    def __post_init__(self) -> None:
        self.energy = max(t.moves for t in self.per_agent)
        self.makespan = max(t.rounds for t in self.per_agent)

    def to_dict(self) -> dict[str, Any]:
        return {
            "initial": self.initial.to_dict(),
            "final": self.final.to_dict(),
            "energy": self.energy,
            "makespan": self.makespan,
            "per_agent": [t.to_dict() for t in self.per_agent],
        }


def agent_rng(seed: int, agent_index: int) -> np.random.Generator:
    """Independent stream for one agent, a fixed function of (seed, index)."""
    return np.random.default_rng([seed, agent_index])


def run_agent(
    g: PortLabeledGraph,
    agent: Agent,
    start: int,
    *,
    n_hint: int | None = None,
    cap: int = DEFAULT_CAP,
    truncate: int | None = None,
    detect_loops: bool = False,
    agent_index: int = 0,
) -> Trace:
    """Drive one agent until it terminates, hits ``truncate`` rounds, or loops.

    With ``detect_loops`` (only sound for memoryless deterministic agents,
    whose decision depends on the current vertex alone) a revisited vertex
    raises :class:`NonTermination` carrying the repeated cycle.
    """
    g._idx(start)
    v, arrival = start, None
    visited = [start]
    moves = rounds = 0
    seen = {start: 0}
    while True:
        if truncate is not None and rounds >= truncate:
            return Trace(visited, moves, rounds, terminated=False)
        if rounds >= cap:
            raise NonTermination(cap, rounds, None, agent_index)
        decision = agent.decide(LocalView(v, g.degree(v), arrival, n_hint, rounds))
        if decision.action is Action.TERMINATE:
            return Trace(visited, moves, rounds, terminated=True)
        rounds += 1
        if decision.action is Action.MOVE:
            w = g.neighbor(v, decision.port)
            arrival = g.port_to(w, v)
            v = w
            moves += 1
        visited.append(v)
        if detect_loops:
            if v in seen:
                first = seen[v]
                cert = {
                    "vertex": v,
                    "first_seen_round": first,
                    "repeat_round": rounds,
                    "period": rounds - first,
                    "cycle": visited[first:],
                }
                raise NonTermination(cap, rounds, cert, agent_index)
            seen[v] = rounds


def _loops_detectable(algo: AlgorithmSpec) -> bool:
    r = algo.resources
    return not r.has_memory and not r.has_randomness


def run_multi(
    g: PortLabeledGraph,
    algo: AlgorithmSpec,
    starts: Sequence[int],
    seed: int | None = None,
    *,
    cap: int = DEFAULT_CAP,
    truncate: int | None = None,
) -> RunResult:
    """Run ``len(starts)`` independent agents; agent ``i`` uses ``agent_rng(seed, i)``."""
    if not starts:
        raise ValidationError("need at least one start vertex")
    if algo.resources.has_randomness and seed is None:
        raise ValidationError(f"{algo.kind} is randomized; pass a seed")
    n_hint = g.n if algo.resources.knows_n else None
    traces = []
    for i, s in enumerate(starts):
        rng = agent_rng(seed, i) if algo.resources.has_randomness else None
        agent = make_agent(algo, g, rng)
        traces.append(run_agent(g, agent, s, n_hint=n_hint, cap=cap, truncate=truncate,
                                detect_loops=truncate is None and _loops_detectable(algo),
                                agent_index=i))
    return RunResult(Configuration.of(starts), Configuration.of(t.final for t in traces), traces)


def run_single(
    g: PortLabeledGraph,
    algo: AlgorithmSpec,
    start: int,
    seed: int | None = None,
    *,
    cap: int = DEFAULT_CAP,
    truncate: int | None = None,
) -> RunResult:
    return run_multi(g, algo, [start], seed, cap=cap, truncate=truncate)


def final_law_rows(
    g: PortLabeledGraph,
    algo: AlgorithmSpec,
    starts: Sequence[int],
    *,
    truncate: int | None = None,
    tail_tol: float = TAIL_TOL,
) -> np.ndarray:
    """Row ``i`` is the exact law of the final vertex from ``starts[i]`` (index ``v - 1``).

    For the randomized hider the untruncated law is the geometric mixture
    ``sum_t q (1-q)^t e_s K^t`` over the survival kernel ``K``, cut once the
    remaining tail mass drops below ``tail_tol`` and renormalized. With
    ``truncate = t`` the mixture stops at ``t`` and the surviving mass sits at
    ``e_s K^t``, which is exact.
    """
    for s in starts:
        g._idx(s)
    if algo.kind == "rw-hider":
        K = algorithm_walk_matrix(g, algo.q).matrix
        q = algo.q
        rows = np.zeros((len(starts), g.n))
        rows[np.arange(len(starts)), [s - 1 for s in starts]] = 1.0
        acc = np.zeros_like(rows)
        survive = 1.0
        t = 0
        while True:
            if truncate is not None and t == truncate:
                acc += survive * rows
                return acc
            acc += q * survive * rows
            survive *= 1.0 - q
            t += 1
            if truncate is None and survive < tail_tol:
                return acc / acc.sum(axis=1, keepdims=True)
            rows = rows @ K
    if algo.kind == "det-no-memory" and truncate is None:
        raise UnsupportedAlgorithm("det-no-memory need not terminate, so it has no final law")
    out = np.zeros((len(starts), g.n))
    for i, s in enumerate(starts):
        final = run_single(g, algo, s, truncate=truncate).per_agent[0].final
        out[i, final - 1] = 1.0
    return out


def exact_final_law(
    g: PortLabeledGraph,
    algo: AlgorithmSpec,
    start: int,
    *,
    truncate: int | None = None,
    tail_tol: float = TAIL_TOL,
) -> Dist:
    row = final_law_rows(g, algo, [start], truncate=truncate, tail_tol=tail_tol)[0]
    return Dist.from_vector(row, g.vertices)

