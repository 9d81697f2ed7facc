"""Eavesdropping strategies against the two-way entanglement protocol.

Three concrete attacks are modeled:

* measure-resend: project the travel qubit onto the computational basis
  on the way out, substitute a polarized qubit at polar angle theta, and
  later discriminate the two possible returns with the optimal
  two-outcome measurement;
* symmetric entangling: replace the travel qubit so the pair sits in
  cos(alpha) |psi-> + sin(alpha) |phi+>, which is detected with
  probability sin^2(alpha) in either protocol mode;
* generic ancilla: an abstract one-probe interaction specified only by
  its amplitude split, usable for detection bookkeeping but not
  round-by-round simulation.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .quantum_core import (
    TRAVEL,
    PureState,
    TwoQubitState,
    _trusted_state,
    apply_pauli_z,
    discrimination_basis,
    helstrom_decide,
    measure_computational,
    prepare_polarized,
    product_state,
)

_EPS = 1e-12

# angles given as rounded literals (1.5708 for pi/2) land slightly past
# the bound; accept within this grace and clamp to the exact domain
_ANGLE_TOL = 1e-4


def _canonical_angle(value: float, hi: float, what: str) -> float:
    if not -_ANGLE_TOL <= value <= hi + _ANGLE_TOL:
        raise ValueError(f"{what} {value!r} outside [0, {hi:.6g}]")
    return min(max(float(value), 0.0), hi)


@dataclass(frozen=True)
class NoEve:
    """Passive channel, no interception."""


@dataclass(frozen=True)
class MeasureResend:
    """Computational-basis interception with resend angle theta in [0, pi/2]."""

    theta: float

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "theta", _canonical_angle(self.theta, np.pi / 2.0, "resend angle")
        )


@dataclass(frozen=True)
class SymmetricEntangle:
    """Entangling substitution with mixing angle alpha in [0, pi/4]."""

    alpha: float

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "alpha", _canonical_angle(self.alpha, np.pi / 4.0, "mixing angle")
        )


@dataclass(frozen=True)
class GenericAncilla:
    """Abstract probe |0,chi> -> alpha_amp |0,chi0> + beta_amp |1,chi1>.

    Only the amplitude split is specified, so the strategy supports
    analytic detection accounting but cannot be simulated per round.
    """

    alpha_amp: complex
    beta_amp: complex

    def __post_init__(self) -> None:
        total = abs(self.alpha_amp) ** 2 + abs(self.beta_amp) ** 2
        if abs(total - 1.0) > _EPS:
            raise ValueError(f"probe amplitudes are not normalized: {total!r}")

    def detection(self) -> float:
        return float(abs(self.beta_amp) ** 2)


EveStrategy = NoEve | MeasureResend | SymmetricEntangle | GenericAncilla


@dataclass(frozen=True)
class EveRecord:
    """What the eavesdropper learned in one round.

    ``intercept_bit`` is the outgoing-leg measurement result and
    ``guess_bit`` the returning-leg discrimination verdict; either is
    None when that step did not happen (no attack, or a control round
    that never came back).
    """

    intercept_bit: int | None = None
    guess_bit: int | None = None


@lru_cache(maxsize=None)
def resend_state(theta: float, intercept_bit: int) -> PureState:
    """Qubit substituted for intercept outcome ``intercept_bit``.

    Outcome 0 is resent as cos(theta/2)|0> + sin(theta/2)|1> and outcome
    1 as its mirror sin(theta/2)|0> + cos(theta/2)|1>, so theta = 0
    reproduces honest forwarding and theta = pi/2 erases the bit.
    """
    if intercept_bit not in (0, 1):
        raise ValueError(f"intercept bit must be 0 or 1, got {intercept_bit!r}")
    up = prepare_polarized(_canonical_angle(theta, np.pi / 2.0, "resend angle"))
    if intercept_bit == 0:
        return up
    return _trusted_state(up.amps[::-1].copy(), 1)


def intercept_resend(
    joint: TwoQubitState, theta: float, rng: np.random.Generator
) -> tuple[EveRecord, TwoQubitState]:
    """Measure the travel qubit in the computational basis and substitute.

    Returns the eavesdropper record and the post-attack pair, which is a
    product of the collapsed home qubit with the resent qubit.
    """
    bit, collapsed = measure_computational(joint, TRAVEL, rng)
    home = _trusted_state(np.ascontiguousarray(collapsed.amps.reshape(2, 2)[:, bit]), 1)
    forged = product_state(home, resend_state(theta, bit))
    return EveRecord(intercept_bit=bit), forged


@lru_cache(maxsize=None)
def return_discrimination_basis(
    theta: float, intercept_bit: int
) -> tuple[PureState, PureState] | None:
    """Optimal basis for reading the encoded bit off the returning qubit.

    Discriminates the resent state from its phase-flipped image.  None
    when the two coincide up to phase (theta = 0), where no measurement
    helps.
    """
    s0 = resend_state(theta, intercept_bit)
    s1 = apply_pauli_z(s0, 0)
    return discrimination_basis(s0, s1)


def eve_decode(
    travel: PureState, theta: float, intercept_bit: int, rng: np.random.Generator
) -> int:
    """Optimal guess of the encoded bit from the returning travel qubit.

    The honest sender either returned the resent state unchanged (bit 0)
    or applied the phase flip (bit 1); the two possibilities are
    discriminated by the optimal two-outcome measurement.
    """
    s0 = resend_state(theta, intercept_bit)
    s1 = apply_pauli_z(s0, 0)
    return helstrom_decide(s0, s1, travel, rng)


def omega_state(alpha: float) -> TwoQubitState:
    """Pair state cos(alpha)|psi-> + sin(alpha)|phi+> left by the symmetric attack."""
    alpha = _canonical_angle(alpha, np.pi / 4.0, "mixing angle")
    c = np.cos(alpha)
    s = np.sin(alpha)
    inv = 1.0 / np.sqrt(2.0)
    amps = np.array([s * inv, c * inv, -c * inv, s * inv], dtype=np.complex128)
    return _trusted_state(amps, 2)


def omega_after_encoding(alpha: float, alice_bit: int) -> TwoQubitState:
    """Symmetric-attack pair after the sender's encoding step.

    Bit 0 leaves the state alone; bit 1 applies the phase flip to the
    travel qubit, carrying the state to the orthogonal combination
    of |psi+> and |phi->.
    """
    if alice_bit not in (0, 1):
        raise ValueError(f"encoded bit must be 0 or 1, got {alice_bit!r}")
    state = omega_state(alpha)
    if alice_bit == 1:
        state = apply_pauli_z(state, TRAVEL)
    return state


def detection_probability_measurement(theta: float) -> float:
    """Control-mode detection probability sin^2(theta/2) of measure-resend."""
    theta = _canonical_angle(theta, np.pi, "angle")
    return float(np.sin(0.5 * theta) ** 2)


def generic_attack_detection(alpha_amp: complex, beta_amp: complex) -> float:
    """Detection probability |beta_amp|^2 of the generic one-probe attack."""
    return GenericAncilla(alpha_amp, beta_amp).detection()


def parse_strategy(text: str) -> EveStrategy:
    """Parse an attack spec string.

    Accepted forms: ``none``, ``measure:theta=<radians>``,
    ``entangle:alpha=<radians>``, ``ancilla:beta2=<probability>``.
    """
    spec = text.strip()
    if spec == "none":
        return NoEve()
    head, sep, tail = spec.partition(":")
    if not sep:
        raise ValueError(f"unrecognized attack spec {text!r}")
    key, sep, raw = tail.partition("=")
    if not sep:
        raise ValueError(f"attack spec {text!r} is missing a parameter value")
    try:
        value = float(raw)
    except ValueError:
        raise ValueError(f"attack parameter {raw!r} is not a number") from None
    if head == "measure" and key == "theta":
        return MeasureResend(value)
    if head == "entangle" and key == "alpha":
        return SymmetricEntangle(value)
    if head == "ancilla" and key == "beta2":
        if not 0.0 <= value <= 1.0:
            raise ValueError(f"detection probability {value!r} outside [0, 1]")
        return GenericAncilla(np.sqrt(1.0 - value), np.sqrt(value))
    raise ValueError(f"unrecognized attack spec {text!r}")


def format_strategy(strategy: EveStrategy) -> str:
    """Inverse of parse_strategy, up to float round-trip."""
    if isinstance(strategy, NoEve):
        return "none"
    if isinstance(strategy, MeasureResend):
        return f"measure:theta={strategy.theta!r}"
    if isinstance(strategy, SymmetricEntangle):
        return f"entangle:alpha={strategy.alpha!r}"
    if isinstance(strategy, GenericAncilla):
        return f"ancilla:beta2={float(abs(strategy.beta_amp) ** 2)!r}"
    raise ValueError(f"unknown strategy {strategy!r}")
