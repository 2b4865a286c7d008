"""The full bidirectional controlled teleportation protocol.

Register layout during a run: positions 0..4 hold the channel in canonical
order (A1, B1, A2, B2, C1), position 5 Alice's unknown input, position 6
Bob's.  Alice teleports to Bob over pair (A1, B1): she Bell-measures
(5, 0) and Bob corrects B1.  Bob teleports to Alice over (A2, B2): he
Bell-measures (6, 3) and Alice corrects A2.

Sampled runs consume exactly one unit-interval sample per measurement, in
the fixed order Charlie -> Alice -> Bob.  When disclosure is withheld the
receivers fall back to a fixed guess: they apply the correction that would
be right for Charlie's outcome-a branch.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .bell import Smo, derive_correction_table, pauli_matrix, smo_of_kind
from .channel import ChannelSpec, build_channel_state, check_condition
from .errors import ConditionViolated, EmptySample
from .qcore import (
    BellKind,
    StateVector,
    apply_1q,
    measure_bell_pair,
    measure_bell_pair_branches,
    measure_qubit,
    measure_qubit_branches,
    tensor,
)

_B1, _A2, _C1, _IN_A, _IN_B = 1, 2, 4, 5, 6


@dataclass(frozen=True)
class UnknownQubit:
    """The state alpha|0> + beta|1> to be teleported."""

    alpha: complex
    beta: complex

    def __post_init__(self) -> None:
        norm2 = abs(self.alpha) ** 2 + abs(self.beta) ** 2
        if abs(norm2 - 1.0) > 1e-12:
            raise ValueError(f"|alpha|^2 + |beta|^2 = {norm2!r}, expected 1")

    def as_state(self) -> StateVector:
        return StateVector(1, np.array([self.alpha, self.beta], dtype=complex))

    @classmethod
    def haar_random(cls, rng: np.random.Generator) -> "UnknownQubit":
        z = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        z = z / np.linalg.norm(z)
        return cls(complex(z[0]), complex(z[1]))


FIXED_SWEEP_INPUTS = (
    UnknownQubit(1.0, 0.0),
    UnknownQubit(0.0, 1.0),
    UnknownQubit(0.6, 0.8),
)


@dataclass(frozen=True)
class Event:
    t: int
    party: str
    action: str
    payload: dict


@dataclass
class Transcript:
    """Ordered log of measurements, classical messages, and corrections."""

    events: list[Event] = field(default_factory=list)

    def log(self, party: str, action: str, **payload) -> None:
        self.events.append(Event(len(self.events), party, action, dict(payload)))

    def as_dicts(self) -> list[dict]:
        return [
            {"t": e.t, "party": e.party, "action": e.action, **e.payload}
            for e in self.events
        ]


@dataclass(frozen=True)
class BcstResult:
    fidelity_a_to_b: float
    fidelity_b_to_a: float
    transcript: Transcript
    charlie_outcome: str
    smo_a: Smo
    smo_b: Smo


@dataclass(frozen=True)
class BcstBranch:
    charlie_outcome: str
    smo_a: Smo
    smo_b: Smo
    probability: float
    fidelity_a_to_b: float
    fidelity_b_to_a: float


@dataclass(frozen=True)
class ExhaustiveBcstResult:
    branches: tuple[BcstBranch, ...]
    min_fidelity_a_to_b: float
    max_fidelity_a_to_b: float
    min_fidelity_b_to_a: float
    max_fidelity_b_to_a: float
    total_probability: float


def qubit_fidelity(state: StateVector, q: int, unknown: UnknownQubit) -> float:
    """<chi| rho_q |chi> -- equals |<chi|phi>|^2 when the marginal is pure.

    Computed as the probability of projecting qubit q onto chi, which avoids
    building the density matrix.
    """
    chi = np.array([unknown.alpha, unknown.beta], dtype=complex)
    rest = np.tensordot(chi.conj(), state.tensor_view(), axes=([0], [q]))
    return float(np.sum(np.abs(rest) ** 2))


def _branch_kinds(spec: ChannelSpec, outcome: str) -> tuple[BellKind, BellKind]:
    return (spec.psi1, spec.psi2) if outcome == "a" else (spec.psi3, spec.psi4)


def _full_register(spec: ChannelSpec, input_a: UnknownQubit, input_b: UnknownQubit) -> StateVector:
    return tensor([build_channel_state(spec), input_a.as_state(), input_b.as_state()])


def _apply_corrections(
    state: StateVector,
    spec: ChannelSpec,
    charlie_outcome: str,
    smo_a: Smo,
    smo_b: Smo,
    disclose: bool,
    transcript: Transcript | None,
) -> StateVector:
    table = derive_correction_table()
    guess = _branch_kinds(spec, charlie_outcome if disclose else "a")
    p_bob = table[(guess[0], smo_a)]
    p_alice = table[(guess[1], smo_b)]
    state = apply_1q(state, _B1, pauli_matrix(p_bob))
    if transcript is not None:
        transcript.log("bob", "apply-correction", pauli=p_bob.value, qubit="B1")
    state = apply_1q(state, _A2, pauli_matrix(p_alice))
    if transcript is not None:
        transcript.log("alice", "apply-correction", pauli=p_alice.value, qubit="A2")
    return state


def _run_sampled(
    spec: ChannelSpec,
    input_a: UnknownQubit,
    input_b: UnknownQubit,
    disclose: bool,
    rng: np.random.Generator,
    channel_state: StateVector | None = None,
    with_transcript: bool = True,
) -> BcstResult:
    transcript = Transcript()
    log = transcript.log if with_transcript else None
    if channel_state is None:
        channel_state = build_channel_state(spec)
    state = tensor([channel_state, input_a.as_state(), input_b.as_state()])

    charlie = measure_qubit(state, _C1, spec.charlie_basis, float(rng.random()))
    state = charlie.state
    if log:
        log("charlie", "measure", qubit="C1", outcome=charlie.outcome)
        if disclose:
            log("charlie", "send-classical", to="alice,bob", bits=charlie.outcome)

    alice = measure_bell_pair(state, _IN_A, 0, float(rng.random()))
    state = alice.state
    smo_a = smo_of_kind(alice.outcome)
    if log:
        log("alice", "measure", pair="(input_a,A1)", outcome=alice.outcome.value)
        log("alice", "send-classical", to="bob", bits=smo_a.text)

    bob = measure_bell_pair(state, _IN_B, 3, float(rng.random()))
    state = bob.state
    smo_b = smo_of_kind(bob.outcome)
    if log:
        log("bob", "measure", pair="(input_b,B2)", outcome=bob.outcome.value)
        log("bob", "send-classical", to="alice", bits=smo_b.text)

    state = _apply_corrections(
        state, spec, charlie.outcome, smo_a, smo_b, disclose,
        transcript if with_transcript else None,
    )
    return BcstResult(
        fidelity_a_to_b=qubit_fidelity(state, _B1, input_a),
        fidelity_b_to_a=qubit_fidelity(state, _A2, input_b),
        transcript=transcript,
        charlie_outcome=charlie.outcome,
        smo_a=smo_a,
        smo_b=smo_b,
    )


def run_bcst(
    spec: ChannelSpec,
    input_a: UnknownQubit,
    input_b: UnknownQubit,
    disclose: bool,
    rng: np.random.Generator,
) -> BcstResult:
    """One sampled protocol run; requires a condition-satisfying channel."""
    if not check_condition(spec):
        raise ConditionViolated(f"{spec.quad_text} violates psi1 != psi3, psi2 != psi4")
    return _run_sampled(spec, input_a, input_b, disclose, rng)


def _enumerate_branches(
    spec: ChannelSpec, input_a: UnknownQubit, input_b: UnknownQubit, disclose: bool
) -> list[BcstBranch]:
    state0 = _full_register(spec, input_a, input_b)
    out = []
    for charlie in measure_qubit_branches(state0, _C1, spec.charlie_basis):
        for alice in measure_bell_pair_branches(charlie.state, _IN_A, 0):
            smo_a = smo_of_kind(alice.outcome)
            for bob in measure_bell_pair_branches(alice.state, _IN_B, 3):
                smo_b = smo_of_kind(bob.outcome)
                corrected = _apply_corrections(
                    bob.state, spec, charlie.outcome, smo_a, smo_b, disclose, None
                )
                out.append(
                    BcstBranch(
                        charlie_outcome=charlie.outcome,
                        smo_a=smo_a,
                        smo_b=smo_b,
                        probability=charlie.probability * alice.probability * bob.probability,
                        fidelity_a_to_b=qubit_fidelity(corrected, _B1, input_a),
                        fidelity_b_to_a=qubit_fidelity(corrected, _A2, input_b),
                    )
                )
    return out


def run_bcst_exhaustive(
    spec: ChannelSpec,
    input_a: UnknownQubit,
    input_b: UnknownQubit,
    disclose: bool = True,
) -> ExhaustiveBcstResult:
    """Every (Charlie x Alice x Bob) branch with its exact probability."""
    if not check_condition(spec):
        raise ConditionViolated(f"{spec.quad_text} violates psi1 != psi3, psi2 != psi4")
    branches = _enumerate_branches(spec, input_a, input_b, disclose)
    fid_ab = [b.fidelity_a_to_b for b in branches]
    fid_ba = [b.fidelity_b_to_a for b in branches]
    return ExhaustiveBcstResult(
        branches=tuple(branches),
        min_fidelity_a_to_b=min(fid_ab),
        max_fidelity_a_to_b=max(fid_ab),
        min_fidelity_b_to_a=min(fid_ba),
        max_fidelity_b_to_a=max(fid_ba),
        total_probability=sum(b.probability for b in branches),
    )


def average_infidelity_without_disclosure(
    spec: ChannelSpec, trials: int, rng: np.random.Generator
) -> tuple[float, float]:
    """Monte Carlo mean of 1 - fidelity per direction over Haar-random inputs.

    Accepts condition-violating channels on purpose: a direction whose pair
    is the same in both Charlie branches needs no disclosure and averages to
    zero infidelity.
    """
    if trials < 1:
        raise EmptySample(f"trials must be >= 1, got {trials}")
    channel_state = build_channel_state(spec)
    acc_ab = 0.0
    acc_ba = 0.0
    for _ in range(trials):
        input_a = UnknownQubit.haar_random(rng)
        input_b = UnknownQubit.haar_random(rng)
        result = _run_sampled(
            spec, input_a, input_b, disclose=False, rng=rng,
            channel_state=channel_state, with_transcript=False,
        )
        acc_ab += 1.0 - result.fidelity_a_to_b
        acc_ba += 1.0 - result.fidelity_b_to_a
    return acc_ab / trials, acc_ba / trials


def expected_infidelity_without_disclosure(spec: ChannelSpec) -> tuple[float, float]:
    """Exact Haar average of the no-disclosure infidelity per direction.

    Branch probabilities are input-independent here, and averaging each
    branch fidelity over the six Pauli eigenstates (a 2-design) equals the
    Haar average, so enumeration over those inputs is exact.
    """
    s = 1.0 / np.sqrt(2.0)
    design = [
        UnknownQubit(1.0, 0.0),
        UnknownQubit(0.0, 1.0),
        UnknownQubit(s, s),
        UnknownQubit(s, -s),
        UnknownQubit(s, 1j * s),
        UnknownQubit(s, -1j * s),
    ]
    acc_ab = 0.0
    acc_ba = 0.0
    for chi in design:
        for branch in _enumerate_branches(spec, chi, chi, disclose=False):
            acc_ab += branch.probability * (1.0 - branch.fidelity_a_to_b)
            acc_ba += branch.probability * (1.0 - branch.fidelity_b_to_a)
    return acc_ab / len(design), acc_ba / len(design)
