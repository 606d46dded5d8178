"""Exception hierarchy shared by all hidekit modules."""

from __future__ import annotations


class HidekitError(Exception):
    """Base class for every error raised by hidekit."""


class ValidationError(HidekitError, ValueError):
    """Input failed a precondition. The CLI maps these to exit code 2."""


# graph
class GraphError(ValidationError):
    pass


class DisconnectedGraph(GraphError):
    pass


class DuplicateEdge(GraphError):
    pass


class SelfLoop(GraphError):
    pass


class BadPortPermutation(GraphError):
    pass


class BadParameters(GraphError):
    pass


class BadVertex(GraphError):
    pass


class NotBipartite(GraphError):
    pass


# infotheory / markov
class InvalidDistribution(ValidationError):
    pass


class MismatchedSupport(ValidationError):
    pass


class ZeroInQ(ValidationError):
    pass


class OutOfRange(ValidationError):
    pass


class DimensionMismatch(ValidationError):
    pass


class NotMixedWithinCap(HidekitError):
    def __init__(self, t_max: int, d_at_cap: float):
        super().__init__(f"d(t) = {d_at_cap:.3g} still above epsilon at t_max = {t_max}")
        self.t_max = t_max
        self.d_at_cap = d_at_cap


# algorithms / simulate / analyze
class BadTerminationProbability(ValidationError):
    pass


class RuleMissingDegree(ValidationError):
    pass


class UnsupportedAlgorithm(ValidationError):
    pass


class BadVertices(ValidationError):
    pass


class ConfigError(ValidationError):
    pass


class NonTermination(HidekitError):
    """A run hit its round cap, or a memoryless deterministic agent revisited a state.

    ``certificate`` is a dict describing the repeated state when a loop was
    detected, else ``None``.
    """

    def __init__(self, cap: int, rounds: int, certificate: dict | None = None, agent: int = 0):
        if certificate is not None:
            msg = (f"agent {agent} loops: vertex {certificate['vertex']} revisited at round "
                   f"{certificate['repeat_round']} (first seen at round {certificate['first_seen_round']})")
        else:
            msg = f"agent {agent} did not terminate within {cap} rounds"
        super().__init__(msg)
        self.cap = cap
        self.rounds = rounds
        self.certificate = certificate
        self.agent = agent

    def to_dict(self) -> dict:
        return {
            "error": "NonTermination",
            "agent": self.agent,
            "cap": self.cap,
            "rounds": self.rounds,
            "certificate": self.certificate,
        }
