"""Round-by-round simulation of the two-way entanglement protocol.

One round: Bob prepares |psi->, keeps the home qubit and sends the
travel qubit.  With probability ``control_prob`` the round is a control
round: Alice measures the travel qubit in the computational basis, Bob
measures his home qubit, and a coincidence of results exposes an
eavesdropper (the honest pair is perfectly anticorrelated).  Otherwise
the round carries a message bit: Alice applies the phase flip for 1 or
nothing for 0 and returns the qubit, and Bob reads the bit with a Bell
measurement.

Channel noise acts once per transit leg, before the eavesdropper on the
outgoing leg and before Bob's measurement on the return leg.  Every
random draw comes from the single session Generator, in a fixed
documented order, so a session is bit-for-bit reproducible from its
seed.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .attacks import (
    EveRecord,
    EveStrategy,
    GenericAncilla,
    MeasureResend,
    NoEve,
    SymmetricEntangle,
    intercept_resend,
    omega_state,
    return_discrimination_basis,
)
from .quantum_core import (
    HOME,
    TRAVEL,
    BellOutcome,
    BitFlip,
    Depolarizing,
    NoiseModel,
    NoNoise,
    PhaseFlip,
    apply_noise,
    apply_pauli_z,
    bell_measure,
    bell_state,
    measure_computational,
    measure_in_basis,
)
from .infotheory import JointCounts2x2, empirical_mutual_information

# Bell outcome -> message bit.  The phi outcomes only occur under attack
# or noise and are assigned to the opposite bit of their psi partner, so
# the symmetric entangling attack yields a binary symmetric channel.
DECODE_MAP: dict[BellOutcome, int] = {
    BellOutcome.PSI_MINUS: 0,
    BellOutcome.PSI_PLUS: 1,
    BellOutcome.PHI_PLUS: 1,
    BellOutcome.PHI_MINUS: 0,
}


class Mode(Enum):
    CONTROL = "control"
    MESSAGE = "message"


@dataclass(frozen=True)
class ProtocolConfig:
    """Parameters of a simulated session.

    ``control_prob`` is the per-round probability of a control round.
    ``seed`` feeds a fresh numpy Generator per session.
    """

    rounds: int
    control_prob: float = 0.5
    eve: EveStrategy = NoEve()
    noise: NoiseModel = NoNoise()
    seed: int = 0

    def __post_init__(self) -> None:
        if self.rounds < 1:
            raise ValueError(f"round count must be positive, got {self.rounds!r}")
        if not 0.0 <= self.control_prob <= 1.0:
            raise ValueError(f"control probability {self.control_prob!r} outside [0, 1]")
        if self.seed < 0:
            raise ValueError(f"seed must be non-negative, got {self.seed!r}")


@dataclass(frozen=True)
class RoundOutcome:
    """Everything observable from one protocol round."""

    mode: Mode
    alice_bit: int | None
    coincidence: bool | None
    bob_bell: BellOutcome | None
    bob_decoded: int | None
    eve: EveRecord


@dataclass(frozen=True)
class TheoryRates:
    """Closed-form detection and error rates for a supported config."""

    detection_rate: float
    bob_error_rate: float


@dataclass(frozen=True)
class SessionReport:
    """Aggregated Monte Carlo estimates for one session.

    ``eve_accuracy`` and ``i_ae_hat`` are None unless the strategy makes
    per-round guesses; ``i_ab_hat`` is None when no message rounds ran.
    ``theory`` is None for configs without a closed form.
    """

    n_control: int
    n_coincidence: int
    detection_rate: float
    n_message: int
    bob_error_rate: float
    eve_accuracy: float | None
    i_ab_hat: float | None
    i_ae_hat: float | None
    theory: TheoryRates | None


def run_round(config: ProtocolConfig, rng: np.random.Generator) -> RoundOutcome:
    """Simulate one round.

    Draw order: outgoing noise, eavesdropper interception, mode choice,
    then either the two control measurements (Alice first) or the
    message bit, return noise, eavesdropper discrimination and Bob's
    Bell measurement.
    """
    eve = config.eve
    if isinstance(eve, GenericAncilla):
        raise ValueError(
            "the generic ancilla strategy fixes only its amplitude split "
            "and cannot be simulated round by round"
        )
    joint = bell_state(BellOutcome.PSI_MINUS)
    record = EveRecord()

    joint = apply_noise(joint, config.noise, TRAVEL, rng)
    if isinstance(eve, MeasureResend):
        record, joint = intercept_resend(joint, eve.theta, rng)
    elif isinstance(eve, SymmetricEntangle):
        # the substitution discards the incoming pair entirely
        joint = omega_state(eve.alpha)

    if rng.random() < config.control_prob:
        alice_result, joint = measure_computational(joint, TRAVEL, rng)
        bob_result, _ = measure_computational(joint, HOME, rng)
        return RoundOutcome(
            mode=Mode.CONTROL,
            alice_bit=None,
            coincidence=alice_result == bob_result,
            bob_bell=None,
            bob_decoded=None,
            eve=record,
        )

    alice_bit = int(rng.integers(2))
    if alice_bit == 1:
        joint = apply_pauli_z(joint, TRAVEL)

    joint = apply_noise(joint, config.noise, TRAVEL, rng)
    if isinstance(eve, MeasureResend):
        basis = return_discrimination_basis(eve.theta, record.intercept_bit)
        if basis is None:
            guess = int(rng.integers(2))
        else:
            guess, joint = measure_in_basis(joint, TRAVEL, basis, rng)
        record = EveRecord(record.intercept_bit, guess)

    outcome = bell_measure(joint, rng)
    return RoundOutcome(
        mode=Mode.MESSAGE,
        alice_bit=alice_bit,
        coincidence=None,
        bob_bell=outcome,
        bob_decoded=DECODE_MAP[outcome],
        eve=record,
    )


def _pauli_leg_profile(noise: NoiseModel) -> tuple[float, float]:
    # per-leg probability that the sampled Pauli has an X component
    # (flips computational correlation) or a Z component (flips the
    # decoded bit); Y counts in both
    if isinstance(noise, NoNoise):
        return 0.0, 0.0
    if isinstance(noise, BitFlip):
        return noise.p, 0.0
    if isinstance(noise, PhaseFlip):
        return 0.0, noise.p
    if isinstance(noise, Depolarizing):
        return 2.0 * noise.p / 3.0, 2.0 * noise.p / 3.0
    raise ValueError(f"unknown noise model {noise!r}")


def expected_report(config: ProtocolConfig) -> TheoryRates | None:
    """Closed-form rates where known, None otherwise.

    Supported: any Pauli noise model with no eavesdropper (detection is
    the outgoing-leg X-component probability; an error needs an odd
    number of Z components across the two legs), and either intercept
    strategy on a noiseless channel.
    """
    eve, noise = config.eve, config.noise
    if isinstance(eve, NoEve):
        x_prob, z_prob = _pauli_leg_profile(noise)
        return TheoryRates(
            detection_rate=x_prob,
            bob_error_rate=2.0 * z_prob * (1.0 - z_prob),
        )
    if not isinstance(noise, NoNoise):
        return None
    if isinstance(eve, MeasureResend):
        return TheoryRates(
            detection_rate=float(np.sin(0.5 * eve.theta) ** 2),
            bob_error_rate=0.5,
        )
    if isinstance(eve, SymmetricEntangle):
        d = float(np.sin(eve.alpha) ** 2)
        return TheoryRates(detection_rate=d, bob_error_rate=d)
    return None


def run_session(config: ProtocolConfig) -> SessionReport:
    """Run ``config.rounds`` rounds and aggregate the observable rates.

    Memory stays constant in the round count; only counters and the two
    2x2 contingency tables (sender/receiver and sender/eavesdropper) are
    kept.
    """
    rng = np.random.default_rng(config.seed)
    n_control = n_coincidence = 0
    n_message = n_bob_errors = 0
    n_guesses = n_guesses_right = 0
    counts_ab = JointCounts2x2()
    counts_ae = JointCounts2x2()

    for _ in range(config.rounds):
        outcome = run_round(config, rng)
        if outcome.mode is Mode.CONTROL:
            n_control += 1
            if outcome.coincidence:
                n_coincidence += 1
            continue
        n_message += 1
        if outcome.bob_decoded != outcome.alice_bit:
            n_bob_errors += 1
        counts_ab.add(outcome.alice_bit, outcome.bob_decoded)
        guess = outcome.eve.guess_bit
        if guess is not None:
            n_guesses += 1
            if guess == outcome.alice_bit:
                n_guesses_right += 1
            counts_ae.add(outcome.alice_bit, guess)

    return SessionReport(
        n_control=n_control,
        n_coincidence=n_coincidence,
        detection_rate=n_coincidence / n_control if n_control else 0.0,
        n_message=n_message,
        bob_error_rate=n_bob_errors / n_message if n_message else 0.0,
        eve_accuracy=n_guesses_right / n_guesses if n_guesses else None,
        i_ab_hat=empirical_mutual_information(counts_ab) if n_message else None,
        i_ae_hat=empirical_mutual_information(counts_ae) if n_guesses else None,
        theory=expected_report(config),
    )
