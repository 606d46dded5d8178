"""Simulation and exact analysis of location-hiding protocols for mobile agents."""

from .algorithms import AlgorithmSpec, LocalView
from .analyze import exact_joint, hiding_report, mc_joint
from .graph import GraphFamilySpec, PortLabeledGraph, build_graph, gen_family
from .infotheory import Dist, JointDist
from .simulate import run_multi, run_single

__version__ = "0.1.0"

__all__ = [
    "AlgorithmSpec",
    "Dist",
    "GraphFamilySpec",
    "JointDist",
    "LocalView",
    "PortLabeledGraph",
    "build_graph",
    "exact_joint",
    "gen_family",
    "hiding_report",
    "mc_joint",
    "run_multi",
    "run_single",
]
