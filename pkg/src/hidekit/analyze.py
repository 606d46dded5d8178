"""The adversary's side: joint laws of (X_0, X_T), hiding reports, lower-bound experiments."""

from __future__ import annotations

import csv
import io
import math
from collections import Counter
from collections.abc import Hashable, Iterable, Sequence
from dataclasses import asdict, dataclass, field
from typing import Any

import numpy as np

from .algorithms import (
    Action,
    AlgorithmSpec,
    LocalView,
    RandomWalkHiderAgent,
    make_agent,
    random_walk_hider_step,
)
from .errors import BadVertices, InvalidDistribution, UnsupportedAlgorithm, ValidationError
from .graph import (
    GraphFamilySpec,
    PortLabeledGraph,
    ball,
    bipartition,
    chain_of_cliques,
    diameter,
    diameter_pair,
    gen_family,
)
from .infotheory import (
    Dist,
    JointDist,
    binary_entropy,
    entropy,
    mutual_information,
    uncertainty_coefficient,
)
from .markov import lazy_walk_matrix, markov_joint, simple_walk_matrix
from .simulate import final_law_rows, run_agent, run_multi

__all__ = [
    "HidingReport",
    "LemmaKnownWitness",
    "FloorDHalfReport",
    "ScalingRow",
    "BipartiteParityReport",
    "parse_prior",
    "exact_joint",
    "mc_joint",
    "hiding_report",
    "uc_series",
    "n_sweep",
    "lemma_known_check",
    "floor_d_half_experiment",
    "chain_cliques_scaling",
    "scaling_slope",
    "scaling_csv",
    "bipartite_parity_probe",
    "SCALING_HEADER",
]

PLUGIN_BIAS_NOTE = "plug-in estimate; mutual information is biased upward by about (|X|-1)(|Y|-1)/(2N ln 2) bits"


def derive_seed(*parts: int) -> int:
    """Stable 63-bit seed from integer parts."""
    return int(np.random.SeedSequence([int(p) for p in parts]).generate_state(2, np.uint64)[0] >> np.uint64(1))


def parse_prior(g: PortLabeledGraph, prior: str | dict | Dist) -> Dist:
    """Prior over start vertices.

    Accepts a :class:`Dist`, a ``{vertex: prob}`` map, ``"uniform"``,
    ``"two_point:u,v"`` or ``"diameter"`` (two-point on the first diameter pair).
    """
    if isinstance(prior, Dist):
        d = prior
    elif isinstance(prior, dict):
        try:
            d = Dist({int(k): float(v) for k, v in prior.items()})
        except (TypeError, ValueError) as exc:
            raise ValidationError(f"prior: {exc}") from None
    elif prior == "uniform":
        d = Dist.uniform(g.vertices)
    elif prior == "diameter":
        u, v = diameter_pair(g)
        d = Dist({u: 0.5, v: 0.5})
    elif isinstance(prior, str) and prior.startswith("two_point:"):
        try:
            u, v = (int(s) for s in prior.split(":", 1)[1].split(","))
        except ValueError:
            raise ValidationError(f"prior: cannot parse {prior!r}, expected two_point:u,v") from None
        if u == v:
            raise BadVertices(f"prior: two_point vertices must differ, got {u} twice")
        d = Dist({u: 0.5, v: 0.5})
    else:
        raise ValidationError(f"prior: unknown prior {prior!r}")
    for x in d.probs:
        if not isinstance(x, int) or not 1 <= x <= g.n:
            raise BadVertices(f"prior: {x!r} is not a vertex of the graph")
    return d


@dataclass
class HidingReport:
    h_x0: float
    mi: float
    uc: float
    mode: str
    samples: int | None = None
    seed: int | None = None
    note: str | None = None

    def __post_init__(self) -> None:
        if not 0.0 <= self.uc <= 1.0 or self.mi > self.h_x0 + 1e-9:
            raise InvalidDistribution(f"inconsistent report: uc={self.uc}, mi={self.mi}, h_x0={self.h_x0}")

    @property
    def verdict_epsilon(self) -> float:
        """The measured U; compare against an epsilon threshold yourself."""
        return self.uc

    def to_dict(self) -> dict[str, Any]:
        out = {k: v for k, v in asdict(self).items() if v is not None}
        out["verdict_epsilon"] = self.uc
        return out


def exact_joint(
    g: PortLabeledGraph,
    algo: AlgorithmSpec,
    prior: Dist,
    *,
    truncate: int | None = None,
) -> JointDist:
    """Exact law of (X_0, X_T) for a single agent with ``X_0 ~ prior``."""
    starts = [x for x, p in sorted(prior.probs.items()) if p > 0]
    rows = final_law_rows(g, algo, starts, truncate=truncate)
    probs = {}
    for x, row in zip(starts, rows):
        px = prior[x]
        for j in np.flatnonzero(row):
            probs[(x, int(j) + 1)] = px * float(row[j])
    return JointDist(probs)


def _start_list(x: Hashable) -> list[int]:
    return list(x) if isinstance(x, tuple) else [x]


def mc_joint(
    g: PortLabeledGraph,
    algo: AlgorithmSpec,
    prior: Dist,
    samples: int,
    seed: int,
    *,
    truncate: int | None = None,
) -> JointDist:
    """Plug-in estimate of the joint law of (initial, final) configuration.

    Prior outcomes are start vertices (one agent) or tuples of start vertices
    (one entry per agent). Each prior outcome is run ``samples`` times and its
    row is weighted by its exact prior probability, so only the conditional
    law of the final configuration is estimated. Agent ``j`` of prior outcome
    number ``i`` draws from the stream ``(seed, i, j)``.
    """
    if samples < 1:
        raise ValidationError(f"samples must be >= 1, got {samples}")
    n_hint = g.n if algo.resources.knows_n else None
    probs: dict[tuple, float] = {}
    support = sorted((x for x, p in prior.probs.items() if p > 0), key=lambda x: _start_list(x))
    for i, x in enumerate(support):
        starts = _start_list(x)
        counts: Counter = Counter()
        if algo.deterministic:
            finals = [run_agent(g, make_agent(algo, g), s, n_hint=n_hint, truncate=truncate).final
                      for s in starts]
            counts[_config_key(finals)] = samples
        else:
            agents = [make_agent(algo, g, np.random.default_rng([seed, i, j])) for j in range(len(starts))]
            for _ in range(samples):
                finals = [run_agent(g, a, s, n_hint=n_hint, truncate=truncate).final
                          for a, s in zip(agents, starts)]
                counts[_config_key(finals)] += 1
        px = prior[x]
        for y, c in counts.items():
            probs[(x, y)] = px * c / samples
    return JointDist(probs)


def _config_key(finals: Sequence[int]) -> Hashable:
    return finals[0] if len(finals) == 1 else tuple(sorted(finals))


def hiding_report(
    joint: JointDist,
    mode: str = "exact",
    samples: int | None = None,
    seed: int | None = None,
) -> HidingReport:
    return HidingReport(
        h_x0=entropy(joint.row_marginal()),
        mi=mutual_information(joint),
        uc=uncertainty_coefficient(joint),
        mode=mode,
        samples=samples,
        seed=seed,
        note=PLUGIN_BIAS_NOTE if mode == "monte_carlo" else None,
    )


def uc_series(g: PortLabeledGraph, algo: AlgorithmSpec, prior: Dist, horizon: int) -> list[tuple[int, float]]:
    """U(X_0; X_min(T,t)) of the algorithm cut after ``t`` rounds, for ``t = 0..horizon``."""
    return [(t, uncertainty_coefficient(exact_joint(g, algo, prior, truncate=t))) for t in range(horizon + 1)]


def n_sweep(
    family: str,
    sizes: Iterable[int],
    algo: AlgorithmSpec,
    prior: str = "diameter",
    params: dict[str, int] | None = None,
    size_param: str = "n",
    seed: int | None = None,
) -> list[dict[str, Any]]:
    """Exact U for growing members of one family; reports the trend, never a verdict."""
    out = []
    for size in sizes:
        spec = GraphFamilySpec(family, {**(params or {}), size_param: size}, seed)
        g = gen_family(spec)
        rep = hiding_report(exact_joint(g, algo, parse_prior(g, prior)))
        out.append({"graph": spec.to_dict(), "n": g.n, "m": g.m, "uc": rep.uc, "mi": rep.mi, "h_x0": rep.h_x0})
    return out


# -- lower-bound experiments ---------------------------------------------------

@dataclass
class LemmaKnownWitness:
    u: int
    v: int
    t: int
    disjoint_prob: float
    gamma: float
    eta_bound: float
    measured_mi: float
    uc: float
    mode: str
    trials: int | None = None
    supports: tuple[list[int], list[int]] | None = None

    def __post_init__(self) -> None:
        if self.mode == "exact" and self.gamma > 0 and self.measured_mi < self.eta_bound - 1e-6:
            raise ValidationError(f"measured MI {self.measured_mi} below the bound {self.eta_bound}")

    def to_dict(self) -> dict[str, Any]:
        return {k: v for k, v in asdict(self).items() if v is not None}


def _eta(gamma: float) -> float:
    return 1.0 - binary_entropy(0.5 + gamma) if gamma > 0 else 0.0


def lemma_known_check(
    g: PortLabeledGraph,
    algo: AlgorithmSpec,
    t: int,
    u: int,
    v: int,
    trials: int = 1000,
    seed: int = 0,
    mode: str = "exact",
) -> LemmaKnownWitness:
    """Test the disjoint-reachable-sets condition for the algorithm cut at ``t`` rounds.

    Exact mode takes the reachable sets to be the supports of the time-``t``
    laws from ``u`` and ``v``, so the disjointness probability is 0 or 1.
    Monte Carlo mode pairs one run from each start per trial and counts the
    trials whose visited vertex sets are disjoint. Either way the prior is
    uniform on ``{u, v}`` and the measured mutual information is that of the
    truncated algorithm.
    """
    for w in (u, v):
        if not isinstance(w, int) or not 1 <= w <= g.n:
            raise BadVertices(f"{w!r} is not a vertex of the graph")
    if u == v:
        raise BadVertices(f"u and v must differ, got {u} twice")
    if t < 0:
        raise ValidationError(f"t must be >= 0, got {t}")
    prior = Dist({u: 0.5, v: 0.5})
    if mode == "exact":
        rows = final_law_rows(g, algo, [u, v], truncate=t)
        s1 = sorted(int(j) + 1 for j in np.flatnonzero(rows[0]))
        s2 = sorted(int(j) + 1 for j in np.flatnonzero(rows[1]))
        disjoint = 1.0 if not set(s1) & set(s2) else 0.0
        joint = exact_joint(g, algo, prior, truncate=t)
        gamma = disjoint - 0.5
        return LemmaKnownWitness(u, v, t, disjoint, gamma, _eta(gamma), mutual_information(joint),
                                 uncertainty_coefficient(joint), "exact", supports=(s1, s2))
    if mode != "monte_carlo":
        raise ValidationError(f"mode must be 'exact' or 'monte_carlo', got {mode!r}")
    n_hint = g.n if algo.resources.knows_n else None
    hits = 0
    for i in range(trials):
        seen = []
        for j, s in enumerate((u, v)):
            rng = np.random.default_rng([seed, i, j]) if algo.resources.has_randomness else None
            seen.append(set(run_agent(g, make_agent(algo, g, rng), s, n_hint=n_hint, truncate=t).visited))
        hits += not (seen[0] & seen[1])
    disjoint = hits / trials
    gamma = disjoint - 0.5
    joint = mc_joint(g, algo, prior, trials, seed, truncate=t)
    return LemmaKnownWitness(u, v, t, disjoint, gamma, _eta(gamma), mutual_information(joint),
                             uncertainty_coefficient(joint), "monte_carlo", trials=trials)


@dataclass
class FloorDHalfReport:
    u: int
    v: int
    D: int
    delta: int
    k: int
    balls_disjoint: bool
    prob_moves_ge_delta: float
    mode: str
    hiding: HidingReport
    trials: int | None = None

    def to_dict(self) -> dict[str, Any]:
        out = {k: v for k, v in asdict(self).items() if v is not None and k != "hiding"}
        out["hiding"] = self.hiding.to_dict()
        return out


def floor_d_half_experiment(
    g: PortLabeledGraph,
    algo: AlgorithmSpec,
    trials: int = 1000,
    seed: int = 0,
    k: int = 1,
) -> FloorDHalfReport:
    """Step count versus hiding quality under the two-point diameter prior.

    All ``k`` agents start together at ``u`` or together at ``v`` (the first
    diameter pair), each with probability 1/2. Reports the probability that
    the energy (max moves over agents) reaches ``floor(D/2)``, next to the
    hiding report for the same prior. Deterministic algorithms are evaluated
    exactly; randomized ones with ``trials`` runs per side.
    """
    if k < 1:
        raise ValidationError(f"k must be >= 1, got {k}")
    u, v = diameter_pair(g)
    D = diameter(g)
    delta = D // 2
    disjoint = not (ball(g, u, delta) & ball(g, v, delta))
    runs = 1 if algo.deterministic else trials
    freq = []
    for side, s in enumerate((u, v)):
        hit = 0
        for i in range(runs):
            res = run_multi(g, algo, [s] * k, derive_seed(seed, side, i) if not algo.deterministic else None)
            hit += res.energy >= delta
        freq.append(hit / runs)
    prob = 0.5 * freq[0] + 0.5 * freq[1]
    if k == 1 and algo.kind != "det-no-memory":
        rep = hiding_report(exact_joint(g, algo, Dist({u: 0.5, v: 0.5})))
    else:
        prior = Dist({(u,) * k: 0.5, (v,) * k: 0.5})
        rep = hiding_report(mc_joint(g, algo, prior, runs, seed), "monte_carlo", runs, seed)
    mode = "exact" if algo.deterministic else "monte_carlo"
    return FloorDHalfReport(u, v, D, delta, k, disjoint, prob, mode, rep,
                            None if algo.deterministic else trials)


SCALING_HEADER = ("x", "y", "n", "m", "trials", "mean_steps", "std_steps")


@dataclass
class ScalingRow:
    x: int
    y: int
    n: int
    m: int
    trials: int
    mean_steps: float
    std_steps: float
    samples: list[int] = field(default_factory=list, repr=False)

    def csv_row(self) -> list:
        return [self.x, self.y, self.n, self.m, self.trials, repr(self.mean_steps), repr(self.std_steps)]


def _steps_to_middle(g, algo, start, middle, rng, cap) -> int:
    if start in middle:
        return 0
    if algo.kind == "rw-hider":
        # hitting time of the walk conditioned on not terminating
        q = algo.q
        walker = RandomWalkHiderAgent(q, rng)
        v, rounds = start, 0
        while v not in middle:
            if rounds >= cap:
                raise ValidationError(f"walk did not reach the middle within {cap} rounds")
            d = random_walk_hider_step(LocalView(v, g.degree(v), None, g.n, rounds),
                                       q, q + (1.0 - q) * walker._uniform(), walker._uniform())
            rounds += 1
            if d.action is Action.MOVE:
                v = g.neighbor(v, d.port)
        return rounds
    trace = run_agent(g, make_agent(algo, g), start, cap=cap)
    return next(i for i, w in enumerate(trace.visited) if w in middle)


def chain_cliques_scaling(
    x_list: Sequence[int],
    y_list: Sequence[int],
    algo: AlgorithmSpec,
    members: int = 50,
    trials: int = 20,
    seed: int = 0,
    cap: int = 10**7,
) -> list[ScalingRow]:
    """Mean rounds to first reach the middle of random chain-of-cliques members.

    For each ``(x, y)`` draws ``members`` random members and ``trials`` start
    vertices per member, uniformly from the original vertices of the first
    clique. The middle is the middle bridge's endpoints for even ``y`` and the
    middle clique (with its bridgeheads) for odd ``y``. For the randomized
    hider the count is the hitting time of its movement kernel, i.e. how long
    it would have to survive. ``std_steps`` is the population standard
    deviation over all ``members * trials`` values.
    """
    if algo.kind not in ("dfs-min-id", "rw-hider"):
        raise UnsupportedAlgorithm(f"chain_cliques_scaling supports dfs-min-id and rw-hider, not {algo.kind}")
    rows = []
    for x in x_list:
        for y in y_list:
            values = []
            for member in range(members):
                coc = chain_of_cliques(x, y, seed=derive_seed(seed, x, y, member))
                middle = coc.middle()
                rng = np.random.default_rng([seed, x, y, member])
                for _ in range(trials):
                    start = int(rng.choice(coc.cliques[0]))
                    values.append(_steps_to_middle(coc.graph, algo, start, middle, rng, cap))
            arr = np.array(values, dtype=float)
            rows.append(ScalingRow(x, y, coc.graph.n, coc.graph.m, len(values),
                                   float(arr.mean()), float(arr.std()), values))
    return rows


def scaling_slope(rows: Sequence[ScalingRow]) -> float:
    """Least-squares slope of log(mean_steps) against log(m); rows with zero mean are skipped."""
    pts = [(math.log(r.m), math.log(r.mean_steps)) for r in rows if r.mean_steps > 0]
    if len(pts) < 2:
        raise ValidationError("need at least two rows with positive mean steps")
    xs, ys = zip(*pts)
    return float(np.polyfit(xs, ys, 1)[0])


def scaling_csv(rows: Sequence[ScalingRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SCALING_HEADER)
    for r in rows:
        w.writerow(r.csv_row())
    return buf.getvalue()


@dataclass
class BipartiteParityReport:
    u: int
    v: int
    t: int
    uc_non_lazy: float
    uc_lazy: float

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


def bipartite_parity_probe(
    g: PortLabeledGraph,
    t: int,
    u: int | None = None,
    v: int | None = None,
) -> BipartiteParityReport:
    """U after exactly ``t`` steps of the non-lazy and the lazy walk.

    The prior is uniform on one vertex of each color class (default: vertex 1
    and its smallest neighbor). Under the non-lazy walk the parity of the
    position gives away the starting side.
    """
    black, white = bipartition(g)
    if u is None:
        u = 1
    if v is None:
        v = min(g.neighbors(u))
    for w in (u, v):
        if not isinstance(w, int) or not 1 <= w <= g.n:
            raise BadVertices(f"{w!r} is not a vertex of the graph")
    if (u in black) == (v in black):
        raise BadVertices(f"{u} and {v} have the same color; pick one vertex from each side")
    if t < 0:
        raise ValidationError(f"t must be >= 0, got {t}")
    prior = Dist({u: 0.5, v: 0.5})
    uc_plain = uncertainty_coefficient(markov_joint(prior, simple_walk_matrix(g), t))
    uc_lazy = uncertainty_coefficient(markov_joint(prior, lazy_walk_matrix(g), t))
    return BipartiteParityReport(u, v, t, uc_plain, uc_lazy)
