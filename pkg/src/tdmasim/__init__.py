"""Deterministic simulator for a self-stabilizing TDMA slot-assignment stack.

Layers, bottom to top: neighborhood discovery with aging caches, unique
naming within three hops, a maximal independent set of leaders, a
distance-two coloring dealt out block-wise by leaders, and fractional
bandwidth intervals discretized into TDMA slots. All of it runs over a
collision-prone shared medium with hidden-terminal semantics, from arbitrary
initial states, under seeded fault injection.
"""
from .coloring import (
    adopt_color,
    block_assignment_problems,
    coloring_locally_minimal,
    coloring_problems,
    coloring_valid,
    f_assign,
    minimality_gaps,
    used_colors,
)
from .harness import (
    ExperimentConfig,
    FaultEvent,
    MetricsReport,
    Simulation,
    run,
    sweep,
    verify_trace,
)
from .medium import (
    Frame,
    SuperframeConfig,
    TransmissionRecord,
    effective_tau,
    overhead_round,
    resolve_slot,
    tdma_collisions,
    tdma_round,
)
from .mis import mis_problems, mis_step, mis_valid
from .naming import (
    NamespaceExhausted,
    NamingParams,
    longest_increasing_path,
    new_id,
    uniq,
    uniq_all,
)
from .runtime import ProtocolParams, age_and_expire, make_frame, on_receive, step
from .slots import (
    EMPTY,
    FULL,
    IntervalSet,
    discretize,
    g_assign,
    priority_key,
    slots_problems,
    slots_valid,
)
from .state import NameRef, NodeCache, NodeState, SharedVars
from .topology import (
    GeometricSpec,
    Topology,
    TopologyError,
    generate_geometric,
    path_topology,
    star_chain_topology,
)
from .validators import (
    ConvergenceTracker,
    LegitimacyReport,
    OracleResult,
    brute_force_min_d2_coloring,
    brute_force_mis,
    collision_containment,
    fixed_point_oracle,
    oracle_mismatches,
)

__version__ = "0.1.0"

__all__ = [
    "ConvergenceTracker",
    "EMPTY",
    "ExperimentConfig",
    "FaultEvent",
    "Frame",
    "FULL",
    "GeometricSpec",
    "IntervalSet",
    "LegitimacyReport",
    "MetricsReport",
    "NameRef",
    "NamespaceExhausted",
    "NamingParams",
    "NodeCache",
    "NodeState",
    "OracleResult",
    "ProtocolParams",
    "SharedVars",
    "Simulation",
    "SuperframeConfig",
    "Topology",
    "TopologyError",
    "TransmissionRecord",
    "adopt_color",
    "age_and_expire",
    "brute_force_min_d2_coloring",
    "brute_force_mis",
    "collision_containment",
    "block_assignment_problems",
    "coloring_locally_minimal",
    "coloring_problems",
    "coloring_valid",
    "discretize",
    "effective_tau",
    "f_assign",
    "fixed_point_oracle",
    "g_assign",
    "generate_geometric",
    "longest_increasing_path",
    "make_frame",
    "minimality_gaps",
    "mis_problems",
    "mis_step",
    "mis_valid",
    "new_id",
    "on_receive",
    "oracle_mismatches",
    "overhead_round",
    "path_topology",
    "priority_key",
    "resolve_slot",
    "run",
    "slots_problems",
    "slots_valid",
    "star_chain_topology",
    "step",
    "sweep",
    "tdma_collisions",
    "tdma_round",
    "uniq",
    "uniq_all",
    "used_colors",
    "verify_trace",
]
