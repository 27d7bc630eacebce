"""Cooperative UAV localization in GNSS-denied environments.

A group of UAVs maintains its relative geometry with a pairwise-ranging EKF
and anchors itself globally by matching magnetic anomaly measurements to a
prior anomaly map with a per-vehicle particle filter. This package wraps the
C++ core: the communication schedule, the map utilities, and the seeded
Monte Carlo harness.
"""

from ._coopnav import (
    MagneticMap,
    SyntheticMapSpec,
    TrialConfig,
    build_map,
    degrade_resolution,
    edge_set,
    generate_synthetic,
    load_grid,
    load_trial_config,
    parse_trial_config,
    propagation_steps,
    reference_velocity,
    rotate_relative,
    run_monte_carlo,
    run_trial,
    save_grid,
    steps_lower_bound,
    vertices_reached,
)

__all__ = [
    "MagneticMap",
    "SyntheticMapSpec",
    "TrialConfig",
    "build_map",
    "degrade_resolution",
    "edge_set",
    "generate_synthetic",
    "load_grid",
    "load_trial_config",
    "parse_trial_config",
    "propagation_steps",
    "reference_velocity",
    "rotate_relative",
    "run_monte_carlo",
    "run_trial",
    "save_grid",
    "steps_lower_bound",
    "vertices_reached",
]

__version__ = "0.1.0"
