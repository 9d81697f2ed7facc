"""Simulator and analysis toolkit for the two-way entanglement protocol.

The package covers the full attack/defense story of ping-pong style
quantum communication: statevector simulation of the protocol rounds,
the measure-resend and symmetric entangling attacks, the information
trade-off formulas with the 0.11 detection threshold, and the
nested-code QKD variant that survives noisy channels.
"""

from .quantum_core import (
    HOME,
    TRAVEL,
    BellOutcome,
    BitFlip,
    Depolarizing,
    DensityMatrix2,
    NoiseModel,
    NoNoise,
    PhaseFlip,
    PureState,
    TwoQubitState,
    apply_noise,
    apply_pauli_x,
    apply_pauli_y,
    apply_pauli_z,
    bell_measure,
    bell_probabilities,
    bell_state,
    discrimination_basis,
    fidelity,
    helstrom_decide,
    helstrom_measure,
    helstrom_success,
    measure_computational,
    measure_in_basis,
    prepare_polarized,
    product_state,
    reduced_density_travel,
)
from .infotheory import (
    JointCounts2x2,
    binary_entropy,
    bob_info_symmetric,
    detection_threshold,
    empirical_mutual_information,
    eve_info_bound,
    eve_info_measurement,
    helstrom_info,
    security_margin,
)
from .attacks import (
    EveRecord,
    EveStrategy,
    GenericAncilla,
    MeasureResend,
    NoEve,
    SymmetricEntangle,
    detection_probability_measurement,
    eve_decode,
    format_strategy,
    generic_attack_detection,
    intercept_resend,
    omega_after_encoding,
    omega_state,
    parse_strategy,
    resend_state,
)
from .pingpong import (
    DECODE_MAP,
    Mode,
    ProtocolConfig,
    RoundOutcome,
    SessionReport,
    TheoryRates,
    expected_report,
    run_round,
    run_session,
)
from .css_qkd import (
    AbortedControl,
    AbortedDecoy,
    BinaryCode,
    BinaryWord,
    Completed,
    NestedCodePair,
    PositionKind,
    PositionLabeling,
    QkdConfig,
    QkdResult,
    QkdSessionReport,
    assign_positions,
    bundled_code_path,
    codeword_superposition,
    contains,
    coset_key,
    encode,
    load_code,
    min_distance,
    run_qkd_block,
    run_qkd_session,
    syndrome_decode,
)

__version__ = "0.1.0"
