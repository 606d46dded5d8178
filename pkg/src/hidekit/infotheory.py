"""Exact finite-alphabet information measures, in bits.

All logarithms are base 2. Sums go through :func:`math.fsum`, which is
correctly rounded and therefore independent of summation order.
"""

from __future__ import annotations

import math
from collections.abc import Hashable, Iterable, Mapping
from dataclasses import dataclass
from typing import Any

from .errors import InvalidDistribution, MismatchedSupport, OutOfRange, ZeroInQ

__all__ = [
    "Dist",
    "JointDist",
    "entropy",
    "conditional_entropy",
    "mutual_information",
    "uncertainty_coefficient",
    "kl_divergence",
    "kl_upper_bound",
    "binary_entropy",
]

VALIDATION_TOL = 1e-12


def _check_probs(items: Iterable[tuple[Any, float]], what: str) -> dict:
    out = {}
    for k, p in items:
        p = float(p)
        if not math.isfinite(p) or p < 0:
            raise InvalidDistribution(f"{what}: probability of {k!r} is {p}")
        out[k] = p
    if not out:
        raise InvalidDistribution(f"{what}: empty outcome space")
    total = math.fsum(out.values())
    if abs(total - 1.0) > VALIDATION_TOL:
        raise InvalidDistribution(f"{what}: probabilities sum to {total!r}, not 1")
    return out


@dataclass(frozen=True)
class Dist:
    """Probability distribution over a finite outcome space.

    Outcomes with probability zero may be listed explicitly; they are part of
    the outcome space (which matters for KL divergence and TV distance).
    """

    probs: Mapping[Hashable, float]

    def __post_init__(self) -> None:
        object.__setattr__(self, "probs", _check_probs(self.probs.items(), "Dist"))

    @classmethod
    def uniform(cls, outcomes: Iterable[Hashable]) -> Dist:
        outcomes = list(outcomes)
        return cls({x: 1.0 / len(outcomes) for x in outcomes})

    @classmethod
    def point(cls, outcome: Hashable, space: Iterable[Hashable] = ()) -> Dist:
        probs = {x: 0.0 for x in space}
        probs[outcome] = 1.0
        return cls(probs)

    @classmethod
    def from_vector(cls, values: Iterable[float], outcomes: Iterable[Hashable]) -> Dist:
        return cls(dict(zip(outcomes, (float(v) for v in values), strict=True)))

    @property
    def outcomes(self) -> list:
        return list(self.probs)

    @property
    def support(self) -> frozenset:
        return frozenset(x for x, p in self.probs.items() if p > 0)

    def __getitem__(self, outcome: Hashable) -> float:
        return self.probs.get(outcome, 0.0)

    def __len__(self) -> int:
        return len(self.probs)

    def vector(self, outcomes: Iterable[Hashable]) -> list[float]:
        return [self.probs.get(x, 0.0) for x in outcomes]

    def to_json(self) -> dict[str, float]:
        return {str(k): v for k, v in sorted(self.probs.items(), key=lambda kv: _sort_key(kv[0]))}


@dataclass(frozen=True)
class JointDist:
    """Joint law of a (row, column) pair; missing pairs have probability zero."""

    probs: Mapping[tuple[Hashable, Hashable], float]

    def __post_init__(self) -> None:
        for k in self.probs:
            if not isinstance(k, tuple) or len(k) != 2:
                raise InvalidDistribution(f"JointDist keys must be (row, column) pairs, got {k!r}")
        object.__setattr__(self, "probs", _check_probs(self.probs.items(), "JointDist"))

    @classmethod
    def product(cls, rows: Dist, cols: Dist) -> JointDist:
        return cls({(x, y): px * py for x, px in rows.probs.items() for y, py in cols.probs.items()})

    def row_marginal(self) -> Dist:
        acc: dict[Hashable, list[float]] = {}
        for (x, _), p in self.probs.items():
            acc.setdefault(x, []).append(p)
        return Dist({x: math.fsum(ps) for x, ps in acc.items()})

    def col_marginal(self) -> Dist:
        acc: dict[Hashable, list[float]] = {}
        for (_, y), p in self.probs.items():
            acc.setdefault(y, []).append(p)
        return Dist({y: math.fsum(ps) for y, ps in acc.items()})

    def transpose(self) -> JointDist:
        return JointDist({(y, x): p for (x, y), p in self.probs.items()})

    def to_json(self) -> list[list]:
        rows = sorted(self.probs.items(), key=lambda kv: (_sort_key(kv[0][0]), _sort_key(kv[0][1])))
        return [[_jsonable(x), _jsonable(y), p] for (x, y), p in rows]


def _sort_key(x: Any) -> tuple:
    return (0, x) if isinstance(x, (int, float)) else (1, str(x))


def _jsonable(x: Any) -> Any:
    return list(x) if isinstance(x, tuple) else x


def _plogp(p: float) -> float:
    return p * math.log2(p) if p > 0 else 0.0


def entropy(d: Dist) -> float:
    return max(0.0, -math.fsum(_plogp(p) for p in d.probs.values()))


def conditional_entropy(j: JointDist) -> float:
    """H(row | column)."""
    col = j.col_marginal()
    terms = []
    for (_, y), p in j.probs.items():
        if p > 0:
            terms.append(p * math.log2(p / col[y]))
    return max(0.0, -math.fsum(terms))


def mutual_information(j: JointDist) -> float:
    """I(row; column) = H(row) - H(row | column), clipped at zero."""
    return max(0.0, entropy(j.row_marginal()) - conditional_entropy(j))


def uncertainty_coefficient(j: JointDist) -> float:
    """I(X;Y)/H(X) for rows X, columns Y; zero when H(X) = 0."""
    h = entropy(j.row_marginal())
    if h == 0.0:
        return 0.0
    return min(1.0, max(0.0, mutual_information(j) / h))


def _same_space(p: Dist, q: Dist) -> None:
    if set(p.probs) != set(q.probs):
        only_p = set(p.probs) - set(q.probs)
        only_q = set(q.probs) - set(p.probs)
        raise MismatchedSupport(
            f"outcome spaces differ (only in p: {sorted(map(str, only_p))}, only in q: {sorted(map(str, only_q))})")


def kl_divergence(p: Dist, q: Dist) -> float:
    """D(p || q) in bits; ``math.inf`` when p puts mass where q has none."""
    _same_space(p, q)
    terms = []
    for x, px in p.probs.items():
        if px == 0:
            continue
        qx = q.probs[x]
        if qx == 0:
            return math.inf
        terms.append(px * math.log2(px / qx))
    return max(0.0, math.fsum(terms))


def kl_upper_bound(p: Dist, q: Dist) -> float:
    """Chi-square style upper bound ``(sum p^2/q - 1) / ln 2`` on D(p || q)."""
    _same_space(p, q)
    zeros = [x for x, qx in q.probs.items() if qx == 0]
    if zeros:
        raise ZeroInQ(f"q vanishes at {zeros[0]!r}; the bound needs q > 0 everywhere")
    return max(0.0, (math.fsum(px * px / q.probs[x] for x, px in p.probs.items()) - 1.0) / math.log(2))


def binary_entropy(p: float) -> float:
    if not 0.0 <= p <= 1.0:
        raise OutOfRange(f"binary_entropy needs p in [0, 1], got {p}")
    return -(_plogp(p) + _plogp(1.0 - p))
