"""Pinching-antenna cognitive radio: placement optimization and analysis.

A desk-scale simulator for a spectrum-sharing link pair where each
transmitter radiates from repositionable elements along a dielectric
waveguide.  The package provides closed-form average spectral
efficiencies under Ricean fading, a three-stage placement-plus-power
optimizer, four benchmark schemes, seeded Monte Carlo validation of every
closed form, and a reproducible sweep harness.
"""

__version__ = "0.1.0"

from .errors import (
    ConfigError,
    DegenerateChannelError,
    InfeasibleRegionError,
    InfeasibleSearchError,
    PacrError,
    SingularityError,
)
from .model import (
    AseReport,
    DerivedConstants,
    PinchLayout,
    SystemConfig,
    Vec3,
    ase_report,
    average_channel_gain,
    cumulative_phase,
    dbm_to_watts,
    derive_constants,
    guided_phase,
    instantaneous_sinrs,
    watts_to_dbm,
)
from .montecarlo import (
    ChannelRealization,
    McEstimate,
    mc_ase,
    mc_channel_gain,
    sample_realization,
    substream,
)
from .optimizer import (
    CancelMode,
    PhaseSearchResult,
    Solution,
    candidate_step,
    coarse_placement,
    destructive_cycles,
    exact_cancel_targets,
    gap_fraction,
    phase_pair_search,
    power_control,
    refine_layout,
    refine_layout_traced,
    residual_phasor_sum,
    target_phases,
    three_stage,
)
from .baselines import (
    Beamformer,
    FixedArrayChannel,
    foc_ic_solution,
    fpa_channels,
    fpa_evaluate,
    fpa_mrt,
    fpa_st_beamformer,
    fpa_sum_se,
    ideal_components,
    ideal_sum_se,
)
from .experiments import (
    ALGORITHMS,
    DropResult,
    SweepSpec,
    random_user_drop,
    run_scenario,
    sweep,
    write_sweep_csv,
)

__all__ = [name for name in dir() if not name.startswith("_")]
