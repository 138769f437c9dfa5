"""Consensus dynamics with uniformly quantized communication, ``x' = -D x + A q(x)``."""

from .dynamics import consensus_stats, field, field_cell
from .equilibria import (CARATHEODORY, EXTENDED, KRASOWSKII, EquilibriumRecord, classify_point,
                         enumerate_extended_equilibria, path_extremal_equilibrium, zero_in_hull)
from .graph import Connectivity, Graph, connectivity_class, load_edge_list, make_graph, spectral_summary
from .integrator import SimConfig, Trajectory, simulate
from .quantize import constructive_entry_sector, feasible_entry_sectors, krasowskii_vertices, q_vec

__version__ = "0.1.0"

__all__ = [
    "CARATHEODORY", "EXTENDED", "KRASOWSKII", "Connectivity", "EquilibriumRecord", "Graph",
    "SimConfig", "Trajectory", "classify_point", "connectivity_class", "consensus_stats",
    "constructive_entry_sector", "enumerate_extended_equilibria", "feasible_entry_sectors", "field",
    "field_cell", "krasowskii_vertices", "load_edge_list", "make_graph", "path_extremal_equilibrium",
    "q_vec", "simulate", "spectral_summary", "zero_in_hull",
]
