"""Tunable flux-qubit coupling through a current-biased dc SQUID.

Statics of the coupler SQUID, the bias-tunable bipolar coupling it mediates
between two flux qubits, the ohmic noise cost of operating it, and the
synthesis of a CNOT pulse sequence verified by time-domain propagation and
Weyl-chamber analysis.
"""

__version__ = "0.1.0"

from .cnot import SynthesisConfig, SynthesisResult, analytic_seed, synthesize_cnot
from .config import DeviceConfig, paper_device
from .coupler import (
    QubitPair,
    bias_shift,
    coupling_vs_bias,
    direct_coupling,
    find_decoupling_bias,
    max_ks_vs_beta,
    net_coupling,
    squid_coupling,
)
from .dynamics import (
    CouplerPulse,
    Crosstalk,
    DriveWindow,
    PulseSchedule,
    envelope,
    hamiltonian,
    propagate,
)
from .gates import (
    CNOT,
    GateReport,
    WeylPoint,
    analytic_trajectory,
    computational_deviation,
    makhlin_invariants,
    weyl_coordinates,
    weyl_distance,
)
from .noise import NoiseSpec, dephasing_estimate, linearized_response, ohmic_alpha, spectral_density
from .squid import (
    SquidParams,
    WorkingPoint,
    critical_current,
    re_transfer_function,
    re_transfer_smallbeta,
    solve_working_point,
)

__all__ = [
    "CNOT",
    "CouplerPulse",
    "Crosstalk",
    "DeviceConfig",
    "DriveWindow",
    "GateReport",
    "NoiseSpec",
    "PulseSchedule",
    "QubitPair",
    "SquidParams",
    "SynthesisConfig",
    "SynthesisResult",
    "WeylPoint",
    "WorkingPoint",
    "analytic_seed",
    "analytic_trajectory",
    "bias_shift",
    "computational_deviation",
    "coupling_vs_bias",
    "critical_current",
    "dephasing_estimate",
    "direct_coupling",
    "envelope",
    "find_decoupling_bias",
    "hamiltonian",
    "linearized_response",
    "makhlin_invariants",
    "max_ks_vs_beta",
    "net_coupling",
    "ohmic_alpha",
    "paper_device",
    "propagate",
    "re_transfer_function",
    "re_transfer_smallbeta",
    "solve_working_point",
    "spectral_density",
    "squid_coupling",
    "synthesize_cnot",
    "weyl_coordinates",
    "weyl_distance",
]
