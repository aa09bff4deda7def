"""Joint transmit-covariance and fluid-antenna port optimization for a
near-field link, with a reproducible Monte-Carlo experiment harness."""

from .channel import (
    PathSet,
    assemble_channel,
    path_delta_approx,
    path_delta_exact,
    path_delta_taylor,
    port_field_matrix,
    rx_field_matrix,
    sample_path_gains,
    sample_paths,
    tx_field_matrix,
    tx_field_vector,
)
from .config import RunConfig, default_config, load_config
from .geometry import (
    PortSelection,
    Scenario,
    p_max_from_snr,
    port_offset,
    tx_offset,
    validate_selection,
)
from .harness import (
    AltOptReport,
    ExperimentResult,
    TrialRecord,
    alternate,
    run_baseline_fpa,
    run_baseline_random,
    run_experiments,
)
from .metrics import (
    energy_efficiency,
    exact_rate_mc,
    expectation_identity_check,
    rate_upper_bound,
)
from .portopt import (
    PortGainContext,
    coordinate_update,
    exhaustive_search,
    port_gain,
    random_selection,
    sweep_ports,
)
from .txopt import DinkelbachTrace, dinkelbach, inner_max

__version__ = "0.1.0"
