"""Discrete stochastic models: loop-erased walks, spanning trees, percolation,
reflected walks, and Brownian excursions."""

from .lerw import (
    SpanningTree,
    loop_erase,
    sample_lerw,
    wilson_ust,
    tree_path,
    ust_peano,
    contour_cycle,
    wired_grid_graph,
)
from .percolation import (
    PercolationConfig,
    percolation_sample,
    crossing,
    cardy_crossing_experiment,
    arm_indicator,
    arm_probability,
    exploration_interface,
    extract_interface,
    exploration_domain,
    dump_config_rle,
    load_config_rle,
)
from .walks import (
    wedge_to_halfplane,
    wedge_reflected_walk,
    wedge_hitting_counts,
    wedge_exact_hitting_law,
    sample_brownian_excursion,
    excursion_avoids_hull,
    excursion_avoid_batch,
    excursion_level_crossing_batch,
    halfplane_reflected_step_rules,
    cylinder_nondisconnection_batch,
)

__all__ = [
    "SpanningTree", "loop_erase", "sample_lerw", "wilson_ust", "tree_path",
    "ust_peano", "contour_cycle", "wired_grid_graph",
    "PercolationConfig", "percolation_sample", "crossing",
    "cardy_crossing_experiment", "arm_indicator", "arm_probability",
    "exploration_interface", "extract_interface", "exploration_domain",
    "dump_config_rle", "load_config_rle",
    "wedge_reflected_walk", "wedge_hitting_counts", "wedge_exact_hitting_law",
    "wedge_to_halfplane",
    "sample_brownian_excursion", "excursion_avoids_hull",
    "excursion_avoid_batch", "excursion_level_crossing_batch",
    "halfplane_reflected_step_rules", "cylinder_nondisconnection_batch",
]
