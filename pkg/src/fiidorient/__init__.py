"""Balanced orientations, perfect matchings and Schreier decorations on graphs, with
spectral and factor-of-iid tooling."""

__version__ = "0.1.0"

from .errors import FiidError
from .graph import (Ball, BipartitionWitness, Graph, LazyGraph, ball, bipartition, builtin_lazy,
                    circulant_graph, complete_bipartite, complete_graph, cycle_graph,
                    disjoint_union, path_graph, random_regular_bipartite, validate_graph)
from .structures import (EdgeColoring, Matching, Orientation, SchreierDecoration,
                         UnorderedDecoration, verify_balanced, verify_coloring, verify_schreier)
