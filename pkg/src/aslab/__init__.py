"""AS-level Internet topology laboratory.

Labeled relationship graphs with valley-free reachability, a peering
formation game with exhaustive equilibrium enumeration, a hyperbolic
topology generator, empirical metrics and the matching numerical theory,
plus relationship-file I/O and a CLI.
"""

from .game import (
    Action,
    GameParams,
    StrategyProfile,
    clique_size_bound,
    cone_size_bound,
    contains_spanning_spider,
    cost,
    cost_vector,
    enumerate_equilibria,
    induce_graph,
    is_cpe,
    is_pairwise_stable,
)
from .graph import (
    GraphConstructionError,
    LabeledAsGraph,
    SpiderReport,
    build_graph,
    customer_cone,
    has_provider_cycle,
    spider_coverage,
    top_clique,
    valley_free_distance,
    valley_free_distances_from,
    verify_spider,
)

__version__ = "0.1.0"
