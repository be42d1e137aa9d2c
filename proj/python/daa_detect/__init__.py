"""Backdoor sample detection from cross-attention dynamics."""

from ._core import (
    CouplingSchedule,
    DaaError,
    DaaIConfig,
    DaaSConfig,
    Metric,
    SynthParams,
    TokenChoice,
    Trajectory,
    auc,
    calibrate_threshold,
    classify,
    daa_i_score,
    daa_s_score,
    dumps,
    evolve_rates,
    f1_score,
    gen_dataset,
    gen_trajectory,
    integrate_states,
    laplacian,
    load_trajectory,
    loads,
    lyapunov_profile,
    read_manifest,
    rer_eos,
    run_cli,
    save_trajectory,
)

__all__ = [name for name in dir() if not name.startswith("_")]
