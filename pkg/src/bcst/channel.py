"""The 5-qubit channel class for bidirectional controlled teleportation.

A channel is (|psi1>_{A1B1} |psi2>_{A2B2} |a>_{C1} +/- |psi3>_{A1B1}
|psi4>_{A2B2} |b>_{C1}) / sqrt(2): two Bell pairs shared by Alice and Bob,
steered by the controller Charlie's qubit.  The canonical register order is
(A1, B1, A2, B2, C1); published states with other qubit numberings are
mapped in through explicit QubitLayout permutations, which prevents silent
misindexing.

The usefulness condition is psi1 != psi3 and psi2 != psi4.  It is checked,
never enforced at construction: condition-violating channels must stay
representable so that one-directional control can be demonstrated on them.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .bell import bell_state
from .errors import ConditionViolated, IndeterminateControl, ParseError
from .qcore import (
    BELL_TENSORS,
    BellKind,
    SingleQubitBasis,
    StateVector,
    basis_from_angles,
    computational_basis,
    equal_up_to_global_phase,
    fidelity_pure,
    measure_qubit_branches,
    permute_qubits,
    plus_minus_basis,
    purity,
    reduced_density,
    tensor,
)

PURITY_TOL = 1e-9


@dataclass(frozen=True)
class ChannelSpec:
    """One member of the channel class: four Bell kinds, Charlie's basis, the sign."""

    psi1: BellKind
    psi2: BellKind
    psi3: BellKind
    psi4: BellKind
    charlie_basis: SingleQubitBasis
    sign: int = +1

    def __post_init__(self) -> None:
        if self.sign not in (+1, -1):
            raise ValueError(f"sign must be +1 or -1, got {self.sign!r}")

    @property
    def quad(self) -> tuple[BellKind, BellKind, BellKind, BellKind]:
        return (self.psi1, self.psi2, self.psi3, self.psi4)

    @property
    def quad_text(self) -> str:
        return ",".join(k.value for k in self.quad)


@dataclass(frozen=True)
class QubitLayout:
    """Positions of the five roles inside a 5-qubit register."""

    a1: int
    b1: int
    a2: int
    b2: int
    c1: int

    def __post_init__(self) -> None:
        if sorted(self.positions) != [0, 1, 2, 3, 4]:
            raise ValueError(f"layout {self.positions} is not a permutation of 0..4")

    @property
    def positions(self) -> tuple[int, int, int, int, int]:
        return (self.a1, self.b1, self.a2, self.b2, self.c1)

    @property
    def owners(self) -> dict[str, tuple[int, ...]]:
        return {"alice": (self.a1, self.a2), "bob": (self.b1, self.b2), "charlie": (self.c1,)}


CANONICAL_LAYOUT = QubitLayout(a1=0, b1=1, a2=2, b2=3, c1=4)


@dataclass(frozen=True)
class ControlReport:
    """Per-direction verdicts: purity 1/2 means controlled, purity 1 uncontrolled."""

    dir_ab_controlled: bool
    dir_ba_controlled: bool
    purity_ab: float
    purity_ba: float


def check_condition(spec: ChannelSpec) -> bool:
    return spec.psi1 is not spec.psi3 and spec.psi2 is not spec.psi4


def _outer3(u: np.ndarray, v: np.ndarray, w: np.ndarray) -> np.ndarray:
    return np.multiply.outer(np.multiply.outer(u, v).reshape(-1), w).reshape(-1)


def build_channel_state(spec: ChannelSpec) -> StateVector:
    """Channel state in canonical register order (A1, B1, A2, B2, C1)."""
    branch_a = _outer3(
        BELL_TENSORS[spec.psi1].reshape(-1),
        BELL_TENSORS[spec.psi2].reshape(-1),
        spec.charlie_basis.ket_a,
    )
    branch_b = _outer3(
        BELL_TENSORS[spec.psi3].reshape(-1),
        BELL_TENSORS[spec.psi4].reshape(-1),
        spec.charlie_basis.ket_b,
    )
    return StateVector(5, (branch_a + spec.sign * branch_b) / math.sqrt(2.0))


def enumerate_valid(basis: SingleQubitBasis, sign: int = +1) -> list[ChannelSpec]:
    """All quadruples satisfying the condition, in lexicographic enum order."""
    return [
        ChannelSpec(p1, p2, p3, p4, basis, sign)
        for p1, p2, p3, p4 in itertools.product(BellKind, repeat=4)
        if p1 is not p3 and p2 is not p4
    ]


def enumerate_invalid(basis: SingleQubitBasis, sign: int = +1) -> list[ChannelSpec]:
    """The complement: quadruples violating the condition in at least one slot."""
    return [
        ChannelSpec(p1, p2, p3, p4, basis, sign)
        for p1, p2, p3, p4 in itertools.product(BellKind, repeat=4)
        if p1 is p3 or p2 is p4
    ]


def _classify_purity(p: float) -> bool:
    """True = controlled (purity 1/2), False = uncontrolled (purity 1)."""
    if abs(p - 0.5) < PURITY_TOL:
        return True
    if abs(p - 1.0) < PURITY_TOL:
        return False
    raise IndeterminateControl(f"pair purity {p!r} is neither 1/2 nor 1")


def control_report(state: StateVector, layout: QubitLayout = CANONICAL_LAYOUT) -> ControlReport:
    """Classify Charlie's control over each direction from the pair marginals."""
    if state.num_qubits != 5:
        raise ValueError("control analysis needs a 5-qubit state")
    p_ab = purity(reduced_density(state, {layout.a1, layout.b1}))
    p_ba = purity(reduced_density(state, {layout.a2, layout.b2}))
    return ControlReport(
        dir_ab_controlled=_classify_purity(p_ab),
        dir_ba_controlled=_classify_purity(p_ba),
        purity_ab=p_ab,
        purity_ba=p_ba,
    )


def collapse_factorization(
    spec: ChannelSpec,
) -> tuple[tuple[BellKind, BellKind], tuple[BellKind, BellKind]]:
    """Bell-pair products left on (A1B1, A2B2) after each of Charlie's outcomes.

    Verifies the factorization against the actual collapsed branches before
    returning ((psi1, psi2) for outcome a, (psi3, psi4) for outcome b).
    """
    if not check_condition(spec):
        raise ConditionViolated(f"{spec.quad_text} violates psi1 != psi3, psi2 != psi4")
    state = build_channel_state(spec)
    expected = {
        "a": (spec.psi1, spec.psi2, spec.charlie_basis.ket_a),
        "b": (spec.psi3, spec.psi4, spec.charlie_basis.ket_b),
    }
    for branch in measure_qubit_branches(state, 4, spec.charlie_basis):
        k1, k2, ket = expected[branch.outcome]
        product = tensor([bell_state(k1), bell_state(k2), StateVector(1, ket)])
        if not equal_up_to_global_phase(branch.state, product, 1e-12):
            raise AssertionError(f"branch {branch.outcome} does not factorize as expected")
    return (spec.psi1, spec.psi2), (spec.psi3, spec.psi4)


# --- Published special cases, amplitudes exactly as printed --- #


@dataclass(frozen=True)
class PublishedState:
    name: str
    state: StateVector
    layout: QubitLayout
    spec: ChannelSpec
    condition_expected: bool


def _amps(entries: dict[int, float], scale: float) -> np.ndarray:
    amps = np.zeros(32, dtype=complex)
    for index, sign in entries.items():
        amps[index] = sign * scale
    return amps


@lru_cache(maxsize=None)
def published_states() -> dict[str, PublishedState]:
    """Registry of the three published 5-qubit states, keyed by CLI name.

    Amplitude vectors are stored verbatim (not rebuilt from the channel
    constructor) so that verification starts from the literal published data.
    """
    zha = PublishedState(
        name="zha",
        # (|00000> + |00111> + |11010> + |11101>) / 2, qubits 1..5
        state=StateVector(5, _amps({0: 1, 7: 1, 26: 1, 29: 1}, 0.5)),
        # pairs (1,2) and (3,5), Charlie holds qubit 4
        layout=QubitLayout(a1=0, b1=1, a2=2, b2=4, c1=3),
        spec=ChannelSpec(
            BellKind.PSI_PLUS, BellKind.PSI_PLUS, BellKind.PSI_MINUS, BellKind.PSI_MINUS,
            plus_minus_basis(), +1,
        ),
        condition_expected=True,
    )
    zha_prime = PublishedState(
        name="zha-prime",
        # (-|11101> + |11110> + |00000> - |00011> + |01001> + |01010>
        #  + |10100> + |10111>) / (2 sqrt 2), qubits 1..5
        state=StateVector(
            5,
            _amps(
                {29: -1, 30: 1, 0: 1, 3: -1, 9: 1, 10: 1, 20: 1, 23: 1},
                1.0 / (2.0 * math.sqrt(2.0)),
            ),
        ),
        # pairs (1,3) and (2,4), Charlie holds qubit 5
        layout=QubitLayout(a1=0, b1=2, a2=1, b2=3, c1=4),
        spec=ChannelSpec(
            BellKind.PSI_PLUS, BellKind.PSI_PLUS, BellKind.PSI_MINUS, BellKind.PHI_MINUS,
            computational_basis(), -1,
        ),
        condition_expected=True,
    )
    li = PublishedState(
        name="li",
        # (|000> + |111>)_{123} (|00> + |11>)_{45} / 2
        state=StateVector(5, _amps({0: 1, 3: 1, 28: 1, 31: 1}, 0.5)),
        # pairs (3,1) and (5,4), Charlie holds qubit 2
        layout=QubitLayout(a1=2, b1=0, a2=4, b2=3, c1=1),
        spec=ChannelSpec(
            BellKind.PSI_PLUS, BellKind.PSI_PLUS, BellKind.PSI_MINUS, BellKind.PSI_PLUS,
            plus_minus_basis(), +1,
        ),
        condition_expected=False,
    )
    return {s.name: s for s in (zha, zha_prime, li)}


@dataclass(frozen=True)
class PublishedCheck:
    name: str
    ok: bool
    residual: float
    condition_holds: bool
    purity_ab: float
    purity_ba: float


def verify_published_states() -> list[PublishedCheck]:
    """Rebuild each published state from its ChannelSpec and compare.

    The residual is 1 - fidelity between the printed amplitudes and the
    constructed state permuted into the published qubit numbering (global
    phase allowed).  Control purities are computed on the printed state.
    """
    checks = []
    for entry in published_states().values():
        built = permute_qubits(build_channel_state(entry.spec), list(entry.layout.positions))
        residual = 1.0 - fidelity_pure(built, entry.state)
        condition = check_condition(entry.spec)
        report = control_report(entry.state, entry.layout)
        purity_ok = abs(report.purity_ab - 0.5) < PURITY_TOL and (
            abs(report.purity_ba - 0.5) < PURITY_TOL
            if entry.condition_expected
            else abs(report.purity_ba - 1.0) < PURITY_TOL
        )
        ok = abs(residual) < 1e-12 and condition == entry.condition_expected and purity_ok
        checks.append(
            PublishedCheck(
                name=entry.name,
                ok=ok,
                residual=residual,
                condition_holds=condition,
                purity_ab=report.purity_ab,
                purity_ba=report.purity_ba,
            )
        )
    return checks


# --- Text formats (shared with the CLI) --- #


def parse_basis(text: str) -> SingleQubitBasis:
    """Parse `+/-`, `0/1`, or `theta=<radians>,phi=<radians>`."""
    text = text.strip()
    if text == "+/-":
        return plus_minus_basis()
    if text == "0/1":
        return computational_basis()
    if text.startswith("theta="):
        try:
            fields = dict(tok.split("=", 1) for tok in text.split(","))
            return basis_from_angles(float(fields["theta"]), float(fields["phi"]))
        except (KeyError, ValueError) as exc:
            raise ParseError(f"bad basis spec {text!r}: {exc}") from exc
    raise ParseError(f"unknown basis spec {text!r}")


def parse_quad(text: str) -> tuple[BellKind, BellKind, BellKind, BellKind]:
    labels = [t.strip() for t in text.split(",")]
    if len(labels) != 4:
        raise ParseError(f"expected four Bell labels, got {text!r}")
    by_value = {k.value: k for k in BellKind}
    try:
        return tuple(by_value[t] for t in labels)  # type: ignore[return-value]
    except KeyError as exc:
        raise ParseError(f"unknown Bell state label {exc.args[0]!r}") from exc


def parse_sign(text: str) -> int:
    if text == "+":
        return +1
    if text == "-":
        return -1
    raise ParseError(f"sign must be '+' or '-', got {text!r}")


def parse_channel_spec(text: str) -> ChannelSpec:
    """Parse `psi+,psi+,psi-,psi-;basis=+/-;sign=+` (basis and sign optional)."""
    segments = [seg.strip() for seg in text.strip().split(";") if seg.strip()]
    if not segments:
        raise ParseError("empty channel spec")
    quad = parse_quad(segments[0])
    basis = plus_minus_basis()
    sign = +1
    for seg in segments[1:]:
        if seg.startswith("basis="):
            basis = parse_basis(seg[len("basis="):])
        elif seg.startswith("sign="):
            sign = parse_sign(seg[len("sign="):])
        else:
            raise ParseError(f"unknown channel-spec segment {seg!r}")
    return ChannelSpec(*quad, basis, sign)
