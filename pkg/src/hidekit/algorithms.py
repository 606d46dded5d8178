"""Hiding algorithms as agents that decide one round at a time from a local view.

Resource limits are enforced by construction: :func:`make_agent` hands the
graph object only to the topology-aware algorithm, and hands a random
generator only to randomized ones. Every other agent sees nothing but the
:class:`LocalView` the engine passes to ``decide`` each round. Memoryless
agents keep no mutable state between rounds.
"""

from __future__ import annotations

import enum
from collections import deque
from collections.abc import Generator, Mapping
from dataclasses import dataclass
from typing import Any, Protocol

import numpy as np

from .errors import ConfigError, RuleMissingDegree, ValidationError
from .graph import PortLabeledGraph
from .markov import check_q

__all__ = [
    "LocalView",
    "Action",
    "Decision",
    "STAY",
    "TERMINATE",
    "move",
    "Resources",
    "AlgorithmSpec",
    "KINDS",
    "Agent",
    "make_agent",
    "random_walk_hider_step",
    "deterministic_no_memory_step",
    "go_to_min_id",
    "dfs_min_id",
    "bridge_trap_rule",
    "TARGET_VERTEX",
]

# rendezvous vertex shared by both perfectly hiding algorithms
TARGET_VERTEX = 1


@dataclass(frozen=True)
class LocalView:
    """What an agent observes at the start of a round.

    ``vertex`` is the (readable) id of the current node; ``arrival_port`` is
    the port through which the agent entered it, ``None`` before any move.
    """

    vertex: int
    degree: int
    arrival_port: int | None = None
    n_hint: int | None = None
    round: int = 0


class Action(enum.Enum):
    STAY = "stay"
    MOVE = "move"
    TERMINATE = "terminate"


@dataclass(frozen=True)
class Decision:
    action: Action
    port: int | None = None

    def __str__(self) -> str:
        return f"move({self.port})" if self.action is Action.MOVE else self.action.value


STAY = Decision(Action.STAY)
TERMINATE = Decision(Action.TERMINATE)


def move(port: int) -> Decision:
    return Decision(Action.MOVE, port)


@dataclass(frozen=True)
class Resources:
    knows_topology: bool
    has_memory: bool
    has_randomness: bool
    knows_n: bool


KINDS: dict[str, Resources] = {
    "go-to-min-id": Resources(knows_topology=True, has_memory=True, has_randomness=False, knows_n=True),
    "dfs-min-id": Resources(knows_topology=False, has_memory=True, has_randomness=False, knows_n=False),
    "rw-hider": Resources(knows_topology=False, has_memory=False, has_randomness=True, knows_n=True),
    "det-no-memory": Resources(knows_topology=False, has_memory=False, has_randomness=False, knows_n=True),
    # test stub: terminates immediately, never moves
    "idle": Resources(knows_topology=False, has_memory=False, has_randomness=False, knows_n=False),
}

_ALIASES = {
    "go_to_min_id": "go-to-min-id", "gotominid": "go-to-min-id",
    "dfs_min_id": "dfs-min-id", "dfsminid": "dfs-min-id",
    "rw_hider": "rw-hider", "random_walk_hider": "rw-hider", "randomwalkhider": "rw-hider",
    "det_no_memory": "det-no-memory", "deterministic_no_memory": "det-no-memory",
    "deterministicnomemory": "det-no-memory",
}


@dataclass(frozen=True)
class AlgorithmSpec:
    kind: str
    q: float | None = None
    rule: Mapping[int, int] | None = None

    def __post_init__(self) -> None:
        kind = _ALIASES.get(self.kind.lower(), self.kind.lower())
        if kind not in KINDS:
            raise ConfigError(f"algorithm.kind: unknown algorithm {self.kind!r}; expected one of {sorted(KINDS)}")
        object.__setattr__(self, "kind", kind)
        if kind == "rw-hider":
            if self.q is None:
                raise ConfigError("algorithm.q: rw-hider needs a termination probability q")
            check_q(self.q)
        elif self.q is not None:
            raise ConfigError(f"algorithm.q: only rw-hider takes q, not {kind}")
        if kind == "det-no-memory":
            if not self.rule:
                raise ConfigError("algorithm.rule: det-no-memory needs a degree -> port rule")
            rule = {int(k): int(v) for k, v in self.rule.items()}
            for deg, port in rule.items():
                if not 1 <= port <= deg:
                    raise ConfigError(f"algorithm.rule: port {port} invalid for degree {deg}")
            object.__setattr__(self, "rule", rule)
        elif self.rule is not None:
            raise ConfigError(f"algorithm.rule: only det-no-memory takes a rule, not {kind}")

    @property
    def resources(self) -> Resources:
        return KINDS[self.kind]

    @property
    def deterministic(self) -> bool:
        return not self.resources.has_randomness

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"kind": self.kind}
        if self.q is not None:
            out["q"] = self.q
        if self.rule is not None:
            out["rule"] = {str(k): v for k, v in sorted(self.rule.items())}
        return out

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> AlgorithmSpec:
        unknown = set(data) - {"kind", "q", "rule"}
        if unknown:
            raise ConfigError(f"algorithm.{sorted(unknown)[0]}: unknown field")
        if "kind" not in data:
            raise ConfigError("algorithm.kind: missing")
        return cls(data["kind"], data.get("q"), data.get("rule"))


class Agent(Protocol):
    def decide(self, view: LocalView) -> Decision: ...


# -- step functions ------------------------------------------------------------

def random_walk_hider_step(view: LocalView, q: float, branch_u: float, port_u: float) -> Decision:
    """One round of the randomized memoryless hider.

    ``branch_u`` and ``port_u`` are independent uniforms on [0, 1). The
    branches are checked in order: terminate (``q``), stay (``1/2``), move
    (``1/2 - q``) through a port chosen uniformly from ``1..degree``.
    """
    check_q(q)
    if branch_u < q:
        return TERMINATE
    if branch_u < q + 0.5:
        return STAY
    return move(1 + min(int(port_u * view.degree), view.degree - 1))


def deterministic_no_memory_step(view: LocalView, rule: Mapping[int, int]) -> Decision:
    try:
        port = rule[view.degree]
    except KeyError:
        raise RuleMissingDegree(f"rule has no entry for degree {view.degree}") from None
    if not 1 <= port <= view.degree:
        raise ValidationError(f"rule picks port {port} at a degree-{view.degree} vertex")
    return move(port)


def bridge_trap_rule(d: int, p: int) -> dict[int, int]:
    """Rule that leaves a leaf by its only port and a degree-(d+1) center by port ``p``."""
    return {1: 1, d + 1: p}


# -- agents --------------------------------------------------------------------

class GoToMinIdAgent:
    """Walks a BFS shortest path to the target; ties go to the smallest next id."""

    def __init__(self, g: PortLabeledGraph, target: int = TARGET_VERTEX):
        dist = g.bfs(target)
        self._port: dict[int, int] = {}
        for v in g.vertices:
            if v != target:
                nxt = min(w for w in g.neighbors(v) if dist[w] == dist[v] - 1)
                self._port[v] = g.port_to(v, nxt)
        self.target = target

    def decide(self, view: LocalView) -> Decision:
        if view.vertex == self.target:
            return TERMINATE
        return move(self._port[view.vertex])


class DfsMinIdAgent:
    """Explores the graph depth-first through ports, then walks to vertex 1.

    Ports are probed in ascending order. Reaching an already-seen vertex is a
    back-edge probe: the agent steps straight back through the arrival port.
    Both endpoints' ports of every traversed edge are recorded, so no edge is
    probed from its second side. After the search returns to the start, the
    agent follows a shortest path to vertex 1 in the learned map.
    """

    def __init__(self, target: int = TARGET_VERTEX):
        self.target = target
        self._program = self._run()
        next(self._program)

    def decide(self, view: LocalView) -> Decision:
        return self._program.send(view)

    def _run(self) -> Generator[Decision, LocalView, None]:
        view = yield STAY  # priming value, discarded
        ports: dict[int, dict[int, int]] = {view.vertex: {}}
        degree = {view.vertex: view.degree}
        stack: list[tuple[int, int | None]] = [(view.vertex, None)]
        while stack:
            v, back = stack[-1]
            p = next((p for p in range(1, degree[v] + 1) if p not in ports[v]), None)
            if p is None:
                stack.pop()
                if back is not None:
                    view = yield move(back)
                continue
            view = yield move(p)
            w, r = view.vertex, view.arrival_port
            ports[v][p] = w
            if w in ports:
                ports[w][r] = v
                view = yield move(r)
            else:
                ports[w] = {r: v}
                degree[w] = view.degree
                stack.append((w, r))
        for port in _learned_path(ports, view.vertex, self.target):
            view = yield move(port)
        yield TERMINATE


def _learned_path(ports: dict[int, dict[int, int]], src: int, dst: int) -> list[int]:
    dist = {dst: 0}
    queue = deque([dst])
    while queue:
        u = queue.popleft()
        for w in ports[u].values():
            if w not in dist:
                dist[w] = dist[u] + 1
                queue.append(w)
    out = []
    v = src
    while v != dst:
        nxt = min(w for w in ports[v].values() if dist.get(w, -2) == dist[v] - 1)
        out.append(next(p for p, w in ports[v].items() if w == nxt))
        v = nxt
    return out


class RandomWalkHiderAgent:
    """Memoryless: the only state is the random source (uniforms drawn in blocks)."""

    __slots__ = ("q", "_rng", "_buf", "_pos")
    BLOCK = 4096

    def __init__(self, q: float, rng: np.random.Generator):
        check_q(q)
        self.q = q
        self._rng = rng
        self._buf: list[float] = []
        self._pos = 0

    def _uniform(self) -> float:
        if self._pos == len(self._buf):
            self._buf = self._rng.random(self.BLOCK).tolist()
            self._pos = 0
        self._pos += 1
        return self._buf[self._pos - 1]

    def decide(self, view: LocalView) -> Decision:
        return random_walk_hider_step(view, self.q, self._uniform(), self._uniform())


class DeterministicNoMemoryAgent:
    __slots__ = ("rule",)

    def __init__(self, rule: Mapping[int, int]):
        self.rule = dict(rule)

    def decide(self, view: LocalView) -> Decision:
        return deterministic_no_memory_step(view, self.rule)


class IdleAgent:
    __slots__ = ()

    def decide(self, view: LocalView) -> Decision:
        return TERMINATE


def make_agent(spec: AlgorithmSpec, g: PortLabeledGraph, rng: np.random.Generator | None = None) -> Agent:
    """Instantiate ``spec``, passing each algorithm only the resources it declares."""
    if spec.kind == "go-to-min-id":
        return GoToMinIdAgent(g)
    if spec.kind == "dfs-min-id":
        return DfsMinIdAgent()
    if spec.kind == "rw-hider":
        if rng is None:
            raise ValidationError("rw-hider needs a random generator (pass a seed)")
        return RandomWalkHiderAgent(spec.q, rng)
    if spec.kind == "det-no-memory":
        return DeterministicNoMemoryAgent(spec.rule)
    return IdleAgent()


def go_to_min_id(g: PortLabeledGraph, start: int):
    """Trace of the known-topology protocol from ``start``."""
    from .simulate import run_single

    return run_single(g, AlgorithmSpec("go-to-min-id"), start).per_agent[0]


def dfs_min_id(g: PortLabeledGraph, start: int):
    """Trace of the DFS-then-go-to-minimum-id protocol from ``start``."""
    from .simulate import run_single

    return run_single(g, AlgorithmSpec("dfs-min-id"), start).per_agent[0]
