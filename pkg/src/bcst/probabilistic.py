"""Probabilistic bidirectional controlled teleportation.

The channel pairs generalize to a|00> +/- b|11> (psi' family) and
a|01> +/- b|10> (phi' family) with a^2 + b^2 = 1, a != 1/sqrt(2), and the
convention 0 < b <= a so that the conversion unitary stays real.  The sender
side is unchanged; the receiver attaches an ancilla in |0>, applies U (psi'
family) or U1 = U (X (x) I) (phi' family) built from the shared pair's
(a, b), and measures the ancilla: outcome 0 heralds success and a Pauli
correction restores the input exactly, outcome 1 leaves |1> and the round
fails.  Success probability per direction is 2 b^2.

Register scheduling: the 7-qubit system (channel + two inputs) is collapsed
by the three measurements before each receiver attaches an ancilla on a
fresh 2-qubit register, so nothing ever exceeds the 8-qubit engine limit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from importlib import resources

import numpy as np

from .bell import (
    CorrectionTable,
    PauliKind,
    Smo,
    load_correction_table,
    pauli_matrix,
    smo_of_kind,
)
from .errors import ConditionViolated, InvalidRatio, NoUniqueCorrection
from .protocol import Transcript, UnknownQubit, qubit_fidelity
from .qcore import (
    BellKind,
    SingleQubitBasis,
    StateVector,
    apply_1q,
    apply_2q,
    computational_basis,
    equal_up_to_global_phase,
    factor_subsystem,
    haar_state,
    ket,
    measure_bell_pair,
    measure_bell_pair_branches,
    measure_qubit,
    measure_qubit_branches,
    single_qubit,
    tensor,
)

_B1, _A2, _C1, _IN_A, _IN_B = 1, 2, 4, 5, 6

SQRT_HALF = 1.0 / math.sqrt(2.0)


class GenFamily(Enum):
    PSI = "psi"  # support on |00>, |11>
    PHI = "phi"  # support on |01>, |10>


@dataclass(frozen=True)
class GenBellParams:
    """One non-maximally entangled pair: family, sign, real coefficients a >= b > 0."""

    a: float
    b: float
    family: GenFamily
    sign: int = +1

    def __post_init__(self) -> None:
        if self.sign not in (+1, -1):
            raise ValueError(f"sign must be +1 or -1, got {self.sign!r}")
        if not (self.a > 0.0 and self.b > 0.0):
            raise ValueError(f"coefficients must be positive, got a={self.a}, b={self.b}")
        if self.b > self.a:
            raise InvalidRatio(f"need b <= a, got a={self.a}, b={self.b}")
        if abs(self.a**2 + self.b**2 - 1.0) > 1e-12:
            raise ValueError(f"a^2 + b^2 = {self.a**2 + self.b**2!r}, expected 1")
        if abs(self.a - SQRT_HALF) <= 1e-9:
            raise ValueError("a = 1/sqrt(2) is the maximally entangled case; excluded")

    @classmethod
    def normalized(cls, a: float, b: float, family: GenFamily, sign: int = +1) -> "GenBellParams":
        """Accept coefficients in either order; the larger one becomes a."""
        return cls(max(a, b), min(a, b), family, sign)

    @property
    def kind(self) -> tuple[GenFamily, int]:
        return (self.family, self.sign)

    @property
    def table_kind(self) -> BellKind:
        """BellKind used to key correction tables for this generalized pair."""
        if self.family is GenFamily.PSI:
            return BellKind.PSI_PLUS if self.sign > 0 else BellKind.PSI_MINUS
        return BellKind.PHI_PLUS if self.sign > 0 else BellKind.PHI_MINUS

    @property
    def label(self) -> str:
        return f"{self.family.value}'{'+' if self.sign > 0 else '-'}"


def gen_bell_state(p: GenBellParams) -> StateVector:
    if p.family is GenFamily.PSI:
        amps = [p.a, 0.0, 0.0, p.sign * p.b]
    else:
        amps = [0.0, p.a, p.sign * p.b, 0.0]
    return StateVector(2, np.array(amps, dtype=complex))


@dataclass(frozen=True)
class ProbChannelSpec:
    """Generalized channel: slots 1,3 share pair-1 coefficients by convention,
    slots 2,4 pair-2, but each slot carries its own parameters."""

    g1: GenBellParams
    g2: GenBellParams
    g3: GenBellParams
    g4: GenBellParams
    charlie_basis: SingleQubitBasis
    sign: int = +1

    def __post_init__(self) -> None:
        if self.sign not in (+1, -1):
            raise ValueError(f"sign must be +1 or -1, got {self.sign!r}")
        if self.g1.kind == self.g3.kind or self.g2.kind == self.g4.kind:
            raise ConditionViolated("generalized kinds must satisfy psi1 != psi3, psi2 != psi4")

    @property
    def quad_text(self) -> str:
        return ",".join(g.label for g in (self.g1, self.g2, self.g3, self.g4))


def _outer3(u: np.ndarray, v: np.ndarray, w: np.ndarray) -> np.ndarray:
    return np.multiply.outer(np.multiply.outer(u, v).reshape(-1), w).reshape(-1)


def build_prob_channel_state(spec: ProbChannelSpec) -> StateVector:
    branch_a = _outer3(
        gen_bell_state(spec.g1).amps, gen_bell_state(spec.g2).amps, spec.charlie_basis.ket_a
    )
    branch_b = _outer3(
        gen_bell_state(spec.g3).amps, gen_bell_state(spec.g4).amps, spec.charlie_basis.ket_b
    )
    return StateVector(5, (branch_a + spec.sign * branch_b) / math.sqrt(2.0))


def matrix_U(a: float, b: float) -> np.ndarray:
    """Conversion unitary for the psi' family, rows exactly as published."""
    _check_ratio(a, b)
    r = b / a
    s = math.sqrt(1.0 - r * r)
    return np.array(
        [
            [r, s, 0.0, 0.0],
            [0.0, 0.0, 0.0, -1.0],
            [0.0, 0.0, 1.0, 0.0],
            [s, -r, 0.0, 0.0],
        ],
        dtype=complex,
    )


def matrix_U1(a: float, b: float) -> np.ndarray:
    """Conversion unitary for the phi' family: U composed with X on the data qubit."""
    x_kron_i = np.kron(pauli_matrix(PauliKind.X), np.eye(2, dtype=complex))
    return matrix_U(a, b) @ x_kron_i


def _check_ratio(a: float, b: float) -> None:
    if not (0.0 < b <= a):
        raise InvalidRatio(f"need 0 < b <= a, got a={a}, b={b}")
    if abs(a * a + b * b - 1.0) > 1e-12:
        raise ValueError(f"a^2 + b^2 = {a * a + b * b!r}, expected 1")


@lru_cache(maxsize=None)
def conversion_unitary(p: GenBellParams) -> np.ndarray:
    u = matrix_U(p.a, p.b) if p.family is GenFamily.PSI else matrix_U1(p.a, p.b)
    u.flags.writeable = False
    return u


@dataclass(frozen=True)
class ProbDirection:
    success: bool
    fidelity: float
    ancilla_outcome: int
    smo: Smo
    shared_label: str


@dataclass(frozen=True)
class ProbResult:
    charlie_outcome: str
    dir_ab: ProbDirection
    dir_ba: ProbDirection
    transcript: Transcript


def _branch_pairs(spec: ProbChannelSpec, outcome: str) -> tuple[GenBellParams, GenBellParams]:
    return (spec.g1, spec.g2) if outcome == "a" else (spec.g3, spec.g4)


def _receiver_convert(
    data: StateVector, shared: GenBellParams
) -> StateVector:
    """Attach |0> ancilla and apply the shared pair's conversion unitary."""
    reg = tensor([data, ket("0")])
    return apply_2q(reg, 0, 1, conversion_unitary(shared))


def _receive(
    state7: StateVector,
    data_q: int,
    shared: GenBellParams,
    smo: Smo,
    chi: UnknownQubit,
    random: float,
    transcript: Transcript | None,
    party: str,
) -> ProbDirection:
    data = factor_subsystem(state7, [data_q])
    reg = _receiver_convert(data, shared)
    anc = measure_qubit(reg, 1, computational_basis(), random)
    outcome_bit = 0 if anc.outcome == "a" else 1
    if transcript is not None:
        transcript.log(party, "measure", qubit="ancilla", outcome=outcome_bit)
    if outcome_bit == 0:
        pauli = derive_prob_correction_table()[(shared.table_kind, smo)]
        corrected = apply_1q(anc.state, 0, pauli_matrix(pauli))
        if transcript is not None:
            transcript.log(party, "apply-correction", pauli=pauli.value, qubit="data")
        return ProbDirection(
            success=True,
            fidelity=qubit_fidelity(corrected, 0, chi),
            ancilla_outcome=0,
            smo=smo,
            shared_label=shared.label,
        )
    return ProbDirection(
        success=False,
        fidelity=qubit_fidelity(anc.state, 0, chi),
        ancilla_outcome=1,
        smo=smo,
        shared_label=shared.label,
    )


def run_pbcst(
    spec: ProbChannelSpec,
    input_a: UnknownQubit,
    input_b: UnknownQubit,
    rng: np.random.Generator,
) -> ProbResult:
    """One sampled probabilistic round.  Randomness order: Charlie, Alice's
    Bell measurement, Bob's Bell measurement, Bob's ancilla, Alice's ancilla."""
    transcript = Transcript()
    state = tensor([build_prob_channel_state(spec), input_a.as_state(), input_b.as_state()])

    charlie = measure_qubit(state, _C1, spec.charlie_basis, float(rng.random()))
    state = charlie.state
    transcript.log("charlie", "measure", qubit="C1", outcome=charlie.outcome)
    transcript.log("charlie", "send-classical", to="alice,bob", bits=charlie.outcome)

    alice = measure_bell_pair(state, _IN_A, 0, float(rng.random()))
    state = alice.state
    smo_a = smo_of_kind(alice.outcome)
    transcript.log("alice", "measure", pair="(input_a,A1)", outcome=alice.outcome.value)
    transcript.log("alice", "send-classical", to="bob", bits=smo_a.text)

    bob = measure_bell_pair(state, _IN_B, 3, float(rng.random()))
    state = bob.state
    smo_b = smo_of_kind(bob.outcome)
    transcript.log("bob", "measure", pair="(input_b,B2)", outcome=bob.outcome.value)
    transcript.log("bob", "send-classical", to="alice", bits=smo_b.text)

    shared_ab, shared_ba = _branch_pairs(spec, charlie.outcome)
    dir_ab = _receive(state, _B1, shared_ab, smo_a, input_a, float(rng.random()), transcript, "bob")
    dir_ba = _receive(state, _A2, shared_ba, smo_b, input_b, float(rng.random()), transcript, "alice")
    return ProbResult(charlie.outcome, dir_ab, dir_ba, transcript)


@dataclass(frozen=True)
class ProbBranch:
    charlie_outcome: str
    smo: Smo
    ancilla_outcome: int
    probability: float
    fidelity: float
    success: bool


def enumerate_direction_branches(
    spec: ProbChannelSpec, direction: str, chi: UnknownQubit
) -> list[ProbBranch]:
    """All (Charlie, SMO, ancilla) branches of one direction with exact probabilities.

    After Charlie's collapse the two directions factorize, so each direction
    is simulated on its own (sender, pair) register.
    """
    if direction not in ("ab", "ba"):
        raise ValueError(f"direction must be 'ab' or 'ba', got {direction!r}")
    out = []
    for charlie_outcome in ("a", "b"):
        pairs = _branch_pairs(spec, charlie_outcome)
        shared = pairs[0] if direction == "ab" else pairs[1]
        reg = tensor([chi.as_state(), gen_bell_state(shared)])
        for sender in measure_bell_pair_branches(reg, 0, 1):
            smo = smo_of_kind(sender.outcome)
            data = factor_subsystem(sender.state, [2])
            converted = _receiver_convert(data, shared)
            for anc in measure_qubit_branches(converted, 1, computational_basis()):
                bit = 0 if anc.outcome == "a" else 1
                if bit == 0:
                    pauli = derive_prob_correction_table()[(shared.table_kind, smo)]
                    final = apply_1q(anc.state, 0, pauli_matrix(pauli))
                else:
                    final = anc.state
                out.append(
                    ProbBranch(
                        charlie_outcome=charlie_outcome,
                        smo=smo,
                        ancilla_outcome=bit,
                        probability=0.5 * sender.probability * anc.probability,
                        fidelity=qubit_fidelity(final, 0, chi),
                        success=bit == 0,
                    )
                )
    return out


@dataclass(frozen=True)
class SuccessProbability:
    analytic_ab: float
    numeric_ab: float
    analytic_ba: float
    numeric_ba: float


_PROBE = UnknownQubit(0.6, 0.8)


def success_probability(spec: ProbChannelSpec) -> SuccessProbability:
    """Per-direction success probability, analytic (2 b^2, branch-averaged)
    and by exhaustive branch enumeration.  Input-independent."""

    def analytic(direction: str) -> float:
        pairs_a = _branch_pairs(spec, "a")
        pairs_b = _branch_pairs(spec, "b")
        idx = 0 if direction == "ab" else 1
        return 0.5 * 2.0 * pairs_a[idx].b ** 2 + 0.5 * 2.0 * pairs_b[idx].b ** 2

    def numeric(direction: str) -> float:
        return sum(
            br.probability
            for br in enumerate_direction_branches(spec, direction, _PROBE)
            if br.success
        )

    return SuccessProbability(
        analytic_ab=analytic("ab"),
        numeric_ab=numeric("ab"),
        analytic_ba=analytic("ba"),
        numeric_ba=numeric("ba"),
    )


def _read_data_lines(name: str) -> list[str]:
    text = (resources.files("bcst") / "data" / name).read_text(encoding="utf-8")
    return text.splitlines()


@lru_cache(maxsize=None)
def paper_table_3() -> CorrectionTable:
    """Reference probabilistic-teleportation table from the shipped data file."""
    return load_correction_table(_read_data_lines("table3.txt"))


_ORACLE_PARAMS = ((0.8, 0.6), (math.sqrt(0.7), math.sqrt(0.3)), (math.sqrt(0.9), math.sqrt(0.1)))


def _prob_teleported_state(
    shared: GenBellParams, smo: Smo, chi: StateVector
) -> StateVector | None:
    """Receiver's data qubit after a heralded-success round, None if the
    success branch is impossible."""
    reg = tensor([chi, gen_bell_state(shared)])
    for sender in measure_bell_pair_branches(reg, 0, 1):
        if smo_of_kind(sender.outcome) != smo:
            continue
        data = factor_subsystem(sender.state, [2])
        converted = _receiver_convert(data, shared)
        for anc in measure_qubit_branches(converted, 1, computational_basis()):
            if anc.outcome == "a":
                return factor_subsystem(anc.state, [0])
    return None


@lru_cache(maxsize=None)
def derive_prob_correction_table() -> CorrectionTable:
    """Re-derive the probabilistic correction table by the uniqueness oracle.

    Runs the conversion + heralding step for several (a, b) and probe inputs;
    the correction must be the same unique Pauli across all of them.
    """
    rng = np.random.default_rng(23)
    inputs = [single_qubit(1, 0), single_qubit(0, 1), single_qubit(0.6, 0.8)]
    inputs += [haar_state(1, rng) for _ in range(3)]
    table: CorrectionTable = {}
    for family in GenFamily:
        for sign in (+1, -1):
            for smo in (Smo(0, 0), Smo(0, 1), Smo(1, 0), Smo(1, 1)):
                survivors = []
                for p in PauliKind:
                    mat = pauli_matrix(p)
                    ok = True
                    for a, b in _ORACLE_PARAMS:
                        shared = GenBellParams(a, b, family, sign)
                        for chi in inputs:
                            got = _prob_teleported_state(shared, smo, chi)
                            if got is None or not equal_up_to_global_phase(
                                apply_1q(got, 0, mat), chi, 1e-10
                            ):
                                ok = False
                                break
                        if not ok:
                            break
                    if ok:
                        survivors.append(p)
                key_kind = GenBellParams(0.8, 0.6, family, sign).table_kind
                if len(survivors) != 1:
                    raise NoUniqueCorrection(
                        f"shared={key_kind.value} smo={smo.text}: candidates {survivors}"
                    )
                table[(key_kind, smo)] = survivors[0]
    return table
