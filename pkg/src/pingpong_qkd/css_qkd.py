"""GF(2) linear codes, nested code pairs, and the coded QKD protocol.

The key-distribution variant of the two-way protocol transmits blocks
of n + m + l pairs: n carry a random string x, m are sacrificed to the
outgoing-leg control check, and l decoys (always encoding 0) estimate
the return-leg error rate.  A nested pair of classical codes
C2 inside C1 turns the surviving noisy string into a shared secret: the
key is the coset label of a random codeword v in C1/C2, and single-bit
channel errors are absorbed by syndrome decoding with C1.

Codes are row-space objects over GF(2).  Words and codes are immutable
and hashable; derived matrices (parity checks, syndrome tables, coset
solvers) are cached per code object.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from itertools import combinations
from pathlib import Path

import numpy as np

from .attacks import (
    EveStrategy,
    GenericAncilla,
    MeasureResend,
    NoEve,
    SymmetricEntangle,
    intercept_resend,
    omega_state,
    return_discrimination_basis,
)
from .pingpong import DECODE_MAP
from .quantum_core import (
    HOME,
    MAX_QUBITS,
    TRAVEL,
    BellOutcome,
    NoiseModel,
    NoNoise,
    PureState,
    _trusted_state,
    apply_noise,
    apply_pauli_z,
    bell_measure,
    bell_state,
    measure_computational,
    measure_in_basis,
)

# exhaustive enumeration and syndrome tables are capped at this length
MAX_CODE_BITS = 24


@dataclass(frozen=True)
class BinaryWord:
    """Fixed-length bit string; addition is bitwise XOR."""

    bits: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.bits) == 0:
            raise ValueError("empty word")
        if any(b not in (0, 1) for b in self.bits):
            raise ValueError(f"word bits must be 0 or 1: {self.bits!r}")

    @classmethod
    def from_string(cls, text: str) -> "BinaryWord":
        clean = text.strip()
        if not clean or set(clean) - {"0", "1"}:
            raise ValueError(f"word must be nonempty characters in 01, got {text!r}")
        return cls(tuple(int(ch) for ch in clean))

    @classmethod
    def zero(cls, n: int) -> "BinaryWord":
        return cls((0,) * n)

    def __len__(self) -> int:
        return len(self.bits)

    def __xor__(self, other: "BinaryWord") -> "BinaryWord":
        if len(other) != len(self):
            raise ValueError("XOR of words with different lengths")
        return BinaryWord(tuple(a ^ b for a, b in zip(self.bits, other.bits)))

    def weight(self) -> int:
        return sum(self.bits)

    def __str__(self) -> str:
        return "".join(str(b) for b in self.bits)


def _word_array(word: BinaryWord) -> np.ndarray:
    return np.array(word.bits, dtype=np.uint8)


def _array_word(arr: np.ndarray) -> BinaryWord:
    return BinaryWord(tuple(int(b) & 1 for b in arr))


@dataclass(frozen=True)
class BinaryCode:
    """Linear code over GF(2) given by linearly independent generator rows."""

    n: int
    k: int
    generators: tuple[BinaryWord, ...]

    def __post_init__(self) -> None:
        if self.k < 1 or self.k > self.n:
            raise ValueError(f"dimension {self.k} invalid for length {self.n}")
        if len(self.generators) != self.k:
            raise ValueError(f"expected {self.k} generators, got {len(self.generators)}")
        if any(len(g) != self.n for g in self.generators):
            raise ValueError("generator length differs from block length")
        if _gf2_rank(np.array([g.bits for g in self.generators], dtype=np.uint8)) != self.k:
            raise ValueError("generators are linearly dependent over GF(2)")

    @classmethod
    def from_rows(cls, rows: list[str] | tuple[str, ...]) -> "BinaryCode":
        words = tuple(BinaryWord.from_string(r) for r in rows)
        return cls(n=len(words[0]), k=len(words), generators=words)


def _gf2_eliminate(matrix: np.ndarray) -> tuple[np.ndarray, list[int]]:
    """Row-reduce a copy of ``matrix`` over GF(2); returns (rref, pivot columns)."""
    m = (matrix.copy() & 1).astype(np.uint8)
    rows, cols = m.shape
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        hit = np.nonzero(m[r:, c])[0]
        if hit.size == 0:
            continue
        lead = r + int(hit[0])
        if lead != r:
            m[[r, lead]] = m[[lead, r]]
        others = np.nonzero(m[:, c])[0]
        for i in others:
            if i != r:
                m[i] ^= m[r]
        pivots.append(c)
        r += 1
        if r == rows:
            break
    return m[:r], pivots


def _gf2_rank(matrix: np.ndarray) -> int:
    if matrix.size == 0:
        return 0
    return len(_gf2_eliminate(matrix)[1])


@lru_cache(maxsize=None)
def _generator_matrix(code: BinaryCode) -> np.ndarray:
    g = np.array([w.bits for w in code.generators], dtype=np.uint8)
    g.flags.writeable = False
    return g


@lru_cache(maxsize=None)
def _code_rref(code: BinaryCode) -> tuple[np.ndarray, tuple[int, ...]]:
    rref, pivots = _gf2_eliminate(_generator_matrix(code))
    rref.flags.writeable = False
    return rref, tuple(pivots)


@lru_cache(maxsize=None)
def _parity_check(code: BinaryCode) -> np.ndarray:
    """Basis of the dual space, as rows h with G h^T = 0."""
    rref, pivots = _code_rref(code)
    pivot_set = set(pivots)
    free_cols = [c for c in range(code.n) if c not in pivot_set]
    rows = []
    for f in free_cols:
        h = np.zeros(code.n, dtype=np.uint8)
        h[f] = 1
        for i, p in enumerate(pivots):
            h[p] = rref[i, f]
        rows.append(h)
    check = np.array(rows, dtype=np.uint8).reshape(len(rows), code.n)
    check.flags.writeable = False
    return check


def encode(code: BinaryCode, message: BinaryWord) -> BinaryWord:
    """Generator-matrix encoding: XOR of the generators picked by message bits."""
    if len(message) != code.k:
        raise ValueError(f"message length {len(message)} differs from dimension {code.k}")
    out = (_word_array(message) @ _generator_matrix(code)) & 1
    return _array_word(out)


def contains(code: BinaryCode, word: BinaryWord) -> bool:
    """True iff the word lies in the code's row space over GF(2)."""
    if len(word) != code.n:
        raise ValueError(f"word length {len(word)} differs from block length {code.n}")
    check = _parity_check(code)
    if check.shape[0] == 0:
        return True
    return not ((check @ _word_array(word)) & 1).any()


def min_distance(code: BinaryCode) -> int:
    """Minimum Hamming weight over the nonzero codewords, by enumeration."""
    if code.n > MAX_CODE_BITS:
        raise ValueError(f"block length {code.n} exceeds the {MAX_CODE_BITS}-bit enumeration cap")
    g = _generator_matrix(code)
    best = code.n
    total = 1 << code.k
    shifts = np.arange(code.k, dtype=np.uint32)
    chunk = 1 << 16
    for start in range(1, total, chunk):
        msgs = np.arange(start, min(start + chunk, total), dtype=np.uint32)
        bits = ((msgs[:, None] >> shifts) & 1).astype(np.uint8)
        weights = ((bits @ g) & 1).sum(axis=1)
        best = min(best, int(weights.min()))
    return best


@lru_cache(maxsize=None)
def _syndrome_table(code: BinaryCode) -> tuple[dict[bytes, np.ndarray], int]:
    """Coset-leader table for all error patterns the code can correct.

    Maps syndrome bytes to the minimum-weight error with that syndrome,
    for weights up to floor((min_distance - 1) / 2).
    """
    if code.n > MAX_CODE_BITS:
        raise ValueError(f"block length {code.n} exceeds the {MAX_CODE_BITS}-bit enumeration cap")
    check = _parity_check(code)
    radius = (min_distance(code) - 1) // 2
    table: dict[bytes, np.ndarray] = {}
    for weight in range(radius + 1):
        for positions in combinations(range(code.n), weight):
            err = np.zeros(code.n, dtype=np.uint8)
            err[list(positions)] = 1
            syndrome = ((check @ err) & 1).tobytes()
            if syndrome not in table:
                err.flags.writeable = False
                table[syndrome] = err
    return table, radius


def syndrome_decode(c1: BinaryCode, word: BinaryWord) -> BinaryWord | None:
    """Correct ``word`` to the unique codeword within the packing radius.

    Returns None when no codeword lies within floor((d-1)/2) flips; the
    caller decides what a failure means.
    """
    if len(word) != c1.n:
        raise ValueError(f"word length {len(word)} differs from block length {c1.n}")
    table, _ = _syndrome_table(c1)
    w = _word_array(word)
    syndrome = ((_parity_check(c1) @ w) & 1).tobytes()
    err = table.get(syndrome)
    if err is None:
        return None
    return _array_word(w ^ err)


@dataclass(frozen=True)
class NestedCodePair:
    """Codes C2 strictly inside C1 on the same block length."""

    c1: BinaryCode
    c2: BinaryCode

    def __post_init__(self) -> None:
        if self.c1.n != self.c2.n:
            raise ValueError("nested code violation: block lengths differ")
        if not self.c2.k < self.c1.k:
            raise ValueError("nested code violation: inner code must have smaller dimension")
        for g in self.c2.generators:
            if not contains(self.c1, g):
                raise ValueError(
                    f"nested code violation: inner generator {g} is outside the outer code"
                )

    @property
    def key_length(self) -> int:
        return self.c1.k - self.c2.k


@lru_cache(maxsize=None)
def _coset_solver(pair: NestedCodePair) -> tuple[np.ndarray, np.ndarray, tuple[int, ...]]:
    """Full-rank basis of GF(2)^n starting with C2 rows, then C1, then units.

    Returns (rref, transform, pivots) with rref = transform @ basis, so
    any word's coordinates in the basis come from reducing against rref
    and mapping the used rows back through the transform.  Coordinates
    k2..k1-1 are the coset label.
    """
    n = pair.c1.n
    rows: list[np.ndarray] = [_word_array(g) for g in pair.c2.generators]
    candidates = [_word_array(g) for g in pair.c1.generators]
    candidates += [np.eye(n, dtype=np.uint8)[i] for i in range(n)]
    for cand in candidates:
        if _gf2_rank(np.array(rows + [cand], dtype=np.uint8)) > len(rows):
            rows.append(cand)
        if len(rows) == n:
            break
    basis = np.array(rows, dtype=np.uint8)
    aug = np.concatenate([basis, np.eye(n, dtype=np.uint8)], axis=1)
    reduced, pivots = _gf2_eliminate(aug)
    # the basis is full rank, so the left block has n pivots
    left_pivots = tuple(p for p in pivots if p < n)
    rref = reduced[:, :n].copy()
    transform = reduced[:, n:].copy()
    rref.flags.writeable = False
    transform.flags.writeable = False
    return rref, transform, left_pivots


def _basis_coordinates(pair: NestedCodePair, word: BinaryWord) -> np.ndarray:
    rref, transform, pivots = _coset_solver(pair)
    residual = _word_array(word)
    used = np.zeros(rref.shape[0], dtype=np.uint8)
    for i, p in enumerate(pivots):
        if residual[p]:
            residual = residual ^ rref[i]
            used[i] = 1
    if residual.any():
        raise RuntimeError("full-rank basis failed to span the word")
    return (used @ transform) & 1


def coset_key(pair: NestedCodePair, v: BinaryWord) -> BinaryWord:
    """Label of the coset v + C2 inside C1, as dim C1 - dim C2 bits.

    Constant on cosets, injective across them, and all-zero exactly on
    members of C2.
    """
    if not contains(pair.c1, v):
        raise ValueError(f"word {v} is not a codeword of the outer code")
    coords = _basis_coordinates(pair, v)
    return _array_word(coords[pair.c2.k : pair.c1.k])


def _raw_coset_label(pair: NestedCodePair, word: BinaryWord) -> BinaryWord:
    # same coordinate window without the membership requirement; used
    # when a failed decode still has to produce a key-length output
    coords = _basis_coordinates(pair, word)
    return _array_word(coords[pair.c2.k : pair.c1.k])


def codeword_superposition(pair: NestedCodePair, x: BinaryWord) -> PureState:
    """Equal superposition over the coset {x XOR y : y in C2}.

    The amplitude of each member index is 1/sqrt(|C2|); two
    representatives of the same coset build the identical state.
    """
    n = pair.c1.n
    if n > MAX_QUBITS:
        raise ValueError(f"block length {n} exceeds the {MAX_QUBITS}-qubit register cap")
    if not contains(pair.c1, x):
        raise ValueError(f"word {x} is not a codeword of the outer code")
    g2 = _generator_matrix(pair.c2)
    k2 = pair.c2.k
    msgs = np.arange(1 << k2, dtype=np.uint32)
    bits = ((msgs[:, None] >> np.arange(k2, dtype=np.uint32)) & 1).astype(np.uint8)
    members = (bits @ g2 & 1) ^ _word_array(x)
    place = (1 << np.arange(n - 1, -1, -1)).astype(np.int64)
    indices = members.astype(np.int64) @ place
    amps = np.zeros(1 << n, dtype=np.complex128)
    amps[indices] = 1.0 / np.sqrt(len(indices))
    return _trusted_state(amps, n)


class PositionKind(Enum):
    MESSAGE = "message"
    CONTROL = "control"
    DECOY = "decoy"


@dataclass(frozen=True)
class PositionLabeling:
    """Assignment of each block position to one of the three roles."""

    labels: tuple[PositionKind, ...]

    def count(self, kind: PositionKind) -> int:
        return sum(1 for lab in self.labels if lab is kind)

    def positions(self, kind: PositionKind) -> tuple[int, ...]:
        return tuple(i for i, lab in enumerate(self.labels) if lab is kind)


def assign_positions(n: int, m: int, l: int, rng: np.random.Generator) -> PositionLabeling:
    """Uniformly random labeling with exactly n Message, m Control, l Decoy."""
    if n < 1 or m < 1 or l < 1:
        raise ValueError(f"all position counts must be positive, got {(n, m, l)!r}")
    pool = [PositionKind.MESSAGE] * n + [PositionKind.CONTROL] * m + [PositionKind.DECOY] * l
    order = rng.permutation(n + m + l)
    return PositionLabeling(labels=tuple(pool[i] for i in order))


@dataclass(frozen=True)
class QkdConfig:
    """Parameters of a coded key-distribution run.

    Abort thresholds default to floor(0.11 * count): the protocol
    tolerates at most an 0.11 observed error ratio on either check.
    """

    pair: NestedCodePair
    m: int
    l: int
    t: int | None = None
    t_prime: int | None = None
    blocks: int = 1
    eve: EveStrategy = NoEve()
    noise: NoiseModel = NoNoise()
    seed: int = 0

    def __post_init__(self) -> None:
        if self.m < 1 or self.l < 1:
            raise ValueError(f"control and decoy counts must be positive, got {(self.m, self.l)!r}")
        if self.blocks < 1:
            raise ValueError(f"block count must be positive, got {self.blocks!r}")
        if self.seed < 0:
            raise ValueError(f"seed must be non-negative, got {self.seed!r}")
        if self.t is None:
            object.__setattr__(self, "t", int(np.floor(0.11 * self.m)))
        if self.t_prime is None:
            object.__setattr__(self, "t_prime", int(np.floor(0.11 * self.l)))
        if not 0 <= self.t <= self.m:
            raise ValueError(f"control threshold {self.t!r} outside [0, {self.m}]")
        if not 0 <= self.t_prime <= self.l:
            raise ValueError(f"decoy threshold {self.t_prime!r} outside [0, {self.l}]")


@dataclass(frozen=True)
class AbortedControl:
    """Outgoing-leg check failed: more than t control coincidences."""

    coincidences: int


@dataclass(frozen=True)
class AbortedDecoy:
    """Return-leg check failed: more than t' decoys decoded as 1."""

    ones: int


@dataclass(frozen=True)
class Completed:
    """Both checks passed and a key was extracted on each side."""

    alice_key: BinaryWord
    bob_key: BinaryWord
    decode_failures: int


QkdResult = AbortedControl | AbortedDecoy | Completed


def run_qkd_block(
    config: QkdConfig, rng: np.random.Generator, inject_message_flips: int = 0
) -> QkdResult:
    """Execute one block of the coded protocol.

    Sequence: draw the position labeling, Alice's n-bit string x and a
    random outer codeword v; transmit each pair's travel qubit through
    noise and the eavesdropper; measure the control positions (Alice
    then Bob, ascending position order) and abort past t coincidences;
    encode x on Message positions and 0 on Decoys; return the surviving
    qubits through noise and the eavesdropper's discrimination; Bell
    decode; abort past t' decoy ones; finally Bob corrects
    r XOR (x XOR v) with the outer code and both sides take the coset
    label as the key.

    ``inject_message_flips`` flips that many of Bob's decoded message
    bits at random distinct positions (drawn after decoding), modeling
    adversarial return-leg errors for error-correction tests.

    A failed syndrome decode is not an abort: it increments
    ``decode_failures`` and the uncorrected word's coset window is used,
    so the mismatch shows up in agreement statistics.
    """
    eve = config.eve
    if isinstance(eve, GenericAncilla):
        raise ValueError(
            "the generic ancilla strategy fixes only its amplitude split "
            "and cannot be simulated round by round"
        )
    pair = config.pair
    n = pair.c1.n
    if not 0 <= inject_message_flips <= n:
        raise ValueError(f"cannot flip {inject_message_flips!r} of {n} message bits")

    labeling = assign_positions(n, config.m, config.l, rng)
    x = rng.integers(0, 2, size=n, dtype=np.uint8)
    v_message = _array_word(rng.integers(0, 2, size=pair.c1.k, dtype=np.uint8))
    v = encode(pair.c1, v_message)

    # outgoing leg for every position
    states: list[PureState] = []
    intercepts: list[int | None] = []
    for _ in range(len(labeling.labels)):
        joint = bell_state(BellOutcome.PSI_MINUS)
        joint = apply_noise(joint, config.noise, TRAVEL, rng)
        bit = None
        if isinstance(eve, MeasureResend):
            record, joint = intercept_resend(joint, eve.theta, rng)
            bit = record.intercept_bit
        elif isinstance(eve, SymmetricEntangle):
            joint = omega_state(eve.alpha)
        states.append(joint)
        intercepts.append(bit)

    coincidences = 0
    for pos in labeling.positions(PositionKind.CONTROL):
        alice_result, collapsed = measure_computational(states[pos], TRAVEL, rng)
        bob_result, _ = measure_computational(collapsed, HOME, rng)
        if alice_result == bob_result:
            coincidences += 1
    if coincidences > config.t:
        return AbortedControl(coincidences)

    message_positions = labeling.positions(PositionKind.MESSAGE)
    decoy_positions = labeling.positions(PositionKind.DECOY)
    encoded = {pos: int(x[j]) for j, pos in enumerate(message_positions)}
    encoded.update({pos: 0 for pos in decoy_positions})

    decoded: dict[int, int] = {}
    for pos in sorted(encoded):
        joint = states[pos]
        if encoded[pos] == 1:
            joint = apply_pauli_z(joint, TRAVEL)
        joint = apply_noise(joint, config.noise, TRAVEL, rng)
        if isinstance(eve, MeasureResend):
            basis = return_discrimination_basis(eve.theta, intercepts[pos])
            if basis is not None:
                _, joint = measure_in_basis(joint, TRAVEL, basis, rng)
        decoded[pos] = DECODE_MAP[bell_measure(joint, rng)]

    decoy_ones = sum(decoded[pos] for pos in decoy_positions)
    if decoy_ones > config.t_prime:
        return AbortedDecoy(decoy_ones)

    r = np.array([decoded[pos] for pos in message_positions], dtype=np.uint8)
    if inject_message_flips:
        flips = rng.choice(n, size=inject_message_flips, replace=False)
        r[flips] ^= 1

    announced = x ^ _word_array(v)
    w = _array_word(r ^ announced)
    v_hat = syndrome_decode(pair.c1, w)
    failures = 0
    if v_hat is None:
        failures = 1
        bob_key = _raw_coset_label(pair, w)
    else:
        bob_key = _raw_coset_label(pair, v_hat)
    return Completed(alice_key=coset_key(pair, v), bob_key=bob_key, decode_failures=failures)


@dataclass(frozen=True)
class QkdSessionReport:
    """Per-block results and aggregates for a multi-block run."""

    results: tuple[QkdResult, ...]
    n_blocks: int
    n_aborted_control: int
    n_aborted_decoy: int
    n_completed: int
    abort_rate: float
    n_agreed: int
    agreement_rate: float | None
    total_key_bits: int
    total_decode_failures: int


def run_qkd_session(config: QkdConfig) -> QkdSessionReport:
    """Run ``config.blocks`` independent blocks.

    Block i uses its own Generator seeded from (seed, i), so blocks are
    reproducible individually and the aggregate is order-independent.
    """
    results = []
    for i in range(config.blocks):
        rng = np.random.default_rng([config.seed, i])
        results.append(run_qkd_block(config, rng))
    aborted_control = sum(1 for r in results if isinstance(r, AbortedControl))
    aborted_decoy = sum(1 for r in results if isinstance(r, AbortedDecoy))
    completed = [r for r in results if isinstance(r, Completed)]
    agreed = sum(1 for r in completed if r.alice_key == r.bob_key)
    return QkdSessionReport(
        results=tuple(results),
        n_blocks=config.blocks,
        n_aborted_control=aborted_control,
        n_aborted_decoy=aborted_decoy,
        n_completed=len(completed),
        abort_rate=(aborted_control + aborted_decoy) / config.blocks,
        n_agreed=agreed,
        agreement_rate=agreed / len(completed) if completed else None,
        total_key_bits=len(completed) * config.pair.key_length,
        total_decode_failures=sum(r.decode_failures for r in completed),
    )


def load_code(path: str | Path) -> BinaryCode:
    """Read a code file: first line `n k`, then k rows of n characters in 01.

    Blank lines and lines starting with `#` are skipped.
    """
    text = Path(path).read_text()
    lines = [
        line.strip()
        for line in text.splitlines()
        if line.strip() and not line.lstrip().startswith("#")
    ]
    if not lines:
        raise ValueError(f"code file {path} is empty")
    header = lines[0].split()
    if len(header) != 2:
        raise ValueError(f"code file {path}: header must be `n k`, got {lines[0]!r}")
    try:
        n, k = int(header[0]), int(header[1])
    except ValueError:
        raise ValueError(f"code file {path}: header must be two integers") from None
    rows = lines[1:]
    if len(rows) != k:
        raise ValueError(f"code file {path}: expected {k} generator rows, found {len(rows)}")
    for row in rows:
        if len(row) != n or set(row) - {"0", "1"}:
            raise ValueError(f"code file {path}: bad generator row {row!r}")
    return BinaryCode.from_rows(rows)


def bundled_code_path(name: str) -> Path:
    """Filesystem path of a code file shipped inside the package.

    Accepts the bare name or the full `<name>.code` filename.
    """
    from importlib.resources import files

    filename = name if name.endswith(".code") else name + ".code"
    path = Path(str(files(__package__).joinpath("codes", filename)))
    if not path.is_file():
        known = sorted(p.stem for p in path.parent.glob("*.code"))
        raise ValueError(f"no bundled code named {name!r}; available: {', '.join(known)}")
    return path
