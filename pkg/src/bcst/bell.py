"""Bell states, Pauli corrections, sender-outcome encoding, correction tables.

The sender's two-bit measurement outcome (SMO) names the Bell state found:
00 <-> psi+, 01 <-> phi+, 10 <-> psi-, 11 <-> phi-.  The first bit is the
phase bit, the second the parity bit.  Corrections are restricted to the
real matrices I, X, Z and iY so that all sign bookkeeping stays explicit;
corrections are always validated up to a global phase.

Correction tables exist in two flavors: the reference table shipped as a
data file, and the table re-derived from first principles by simulating a
teleportation round per (shared state, outcome) and searching for the unique
Pauli that restores the input.  `diff_tables` reports where they disagree.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from importlib import resources

import numpy as np

from .errors import NoUniqueCorrection, ParseError
from .qcore import (
    BELL_TENSORS,
    BellKind,
    StateVector,
    apply_1q,
    equal_up_to_global_phase,
    factor_subsystem,
    haar_state,
    measure_bell_pair_branches,
    single_qubit,
    tensor,
)

__all__ = [
    "BellKind",
    "PauliKind",
    "Smo",
    "CorrectionTable",
    "SMO_ORDER",
    "bell_state",
    "pauli_matrix",
    "smo_of_kind",
    "kind_of_smo",
    "paper_table_1",
    "derive_correction_table",
    "diff_tables",
    "correction_table_lines",
    "diff_lines",
    "load_correction_table",
]


class PauliKind(Enum):
    I = "I"
    X = "X"
    Z = "Z"
    IY = "iY"

    def __str__(self) -> str:
        return self.value


_PAULI_MATRICES: dict[PauliKind, np.ndarray] = {
    PauliKind.I: np.eye(2, dtype=complex),
    PauliKind.X: np.array([[0, 1], [1, 0]], dtype=complex),
    PauliKind.Z: np.array([[1, 0], [0, -1]], dtype=complex),
    PauliKind.IY: np.array([[0, 1], [-1, 0]], dtype=complex),
}


def pauli_matrix(p: PauliKind) -> np.ndarray:
    return _PAULI_MATRICES[p].copy()


@dataclass(frozen=True, order=True)
class Smo:
    """Two classical bits naming the sender's Bell outcome (phase bit, parity bit)."""

    b1: int
    b2: int

    def __post_init__(self) -> None:
        if self.b1 not in (0, 1) or self.b2 not in (0, 1):
            raise ValueError(f"bits must be 0 or 1, got ({self.b1}, {self.b2})")

    @property
    def text(self) -> str:
        return f"{self.b1}{self.b2}"

    @classmethod
    def from_text(cls, text: str) -> "Smo":
        if len(text) != 2 or any(c not in "01" for c in text):
            raise ParseError(f"not a two-bit outcome: {text!r}")
        return cls(int(text[0]), int(text[1]))


SMO_ORDER = (Smo(0, 0), Smo(0, 1), Smo(1, 0), Smo(1, 1))

_KIND_TO_SMO = {
    BellKind.PSI_PLUS: Smo(0, 0),
    BellKind.PHI_PLUS: Smo(0, 1),
    BellKind.PSI_MINUS: Smo(1, 0),
    BellKind.PHI_MINUS: Smo(1, 1),
}
_SMO_TO_KIND = {v: k for k, v in _KIND_TO_SMO.items()}


def smo_of_kind(kind: BellKind) -> Smo:
    return _KIND_TO_SMO[kind]


def kind_of_smo(smo: Smo) -> BellKind:
    return _SMO_TO_KIND[smo]


def bell_state(kind: BellKind) -> StateVector:
    return StateVector(2, BELL_TENSORS[kind].reshape(-1))


CorrectionTable = dict[tuple[BellKind, Smo], PauliKind]


def _parse_bell_label(label: str) -> BellKind:
    for kind in BellKind:
        if kind.value == label:
            return kind
    raise ParseError(f"unknown Bell state label {label!r}")


def _parse_pauli_label(label: str) -> PauliKind:
    for p in PauliKind:
        if p.value == label:
            return p
    raise ParseError(f"unknown Pauli label {label!r}")


def load_correction_table(lines: list[str]) -> CorrectionTable:
    """Parse `shared=<bell> smo=<b1b2> pauli=<I|X|Z|iY>` lines; `#` comments allowed."""
    table: CorrectionTable = {}
    for raw in lines:
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = dict(tok.split("=", 1) for tok in line.split())
        if set(fields) != {"shared", "smo", "pauli"}:
            raise ParseError(f"bad correction-table line: {raw!r}")
        key = (_parse_bell_label(fields["shared"]), Smo.from_text(fields["smo"]))
        if key in table:
            raise ParseError(f"duplicate entry for {fields['shared']} {fields['smo']}")
        table[key] = _parse_pauli_label(fields["pauli"])
    if len(table) != 16:
        raise ParseError(f"expected 16 entries, got {len(table)}")
    return table


def _read_data_lines(name: str) -> list[str]:
    text = (resources.files("bcst") / "data" / name).read_text(encoding="utf-8")
    return text.splitlines()


@lru_cache(maxsize=None)
def paper_table_1() -> CorrectionTable:
    """Reference perfect-teleportation table, loaded from the shipped data file."""
    return load_correction_table(_read_data_lines("table1.txt"))


def correction_table_lines(table: CorrectionTable) -> list[str]:
    lines = []
    for kind in BellKind:
        for smo in SMO_ORDER:
            lines.append(f"shared={kind.value} smo={smo.text} pauli={table[(kind, smo)].value}")
    return lines


def diff_tables(
    t1: CorrectionTable, t2: CorrectionTable
) -> list[tuple[tuple[BellKind, Smo], PauliKind, PauliKind]]:
    """Entries where the tables disagree, ordered by shared state then outcome."""
    out = []
    for kind in BellKind:
        for smo in SMO_ORDER:
            key = (kind, smo)
            if t1[key] is not t2[key]:
                out.append((key, t1[key], t2[key]))
    return out


def diff_lines(diff, left: str = "reference", right: str = "derived") -> list[str]:
    return [
        f"shared={kind.value} smo={smo.text} {left}={v1.value} {right}={v2.value}"
        for (kind, smo), v1, v2 in diff
    ]


def _oracle_inputs() -> list[StateVector]:
    """Fixed probe states plus seeded Haar states; three non-collinear probes
    already certify that a qubit channel is the identity."""
    rng = np.random.default_rng(17)
    fixed = [single_qubit(1, 0), single_qubit(0, 1), single_qubit(0.6, 0.8)]
    return fixed + [haar_state(1, rng) for _ in range(3)]


def teleported_state(shared: BellKind, smo: Smo, chi: StateVector) -> StateVector:
    """Receiver's (uncorrected) qubit after a teleportation round that found `smo`.

    The register is (unknown, sender half, receiver half); the sender's Bell
    measurement acts on (0, 1).
    """
    reg = tensor([chi, bell_state(shared)])
    want = kind_of_smo(smo)
    for branch in measure_bell_pair_branches(reg, 0, 1):
        if branch.outcome is want:
            return factor_subsystem(branch.state, [2])
    raise AssertionError(f"branch {want} missing for shared={shared}")


@lru_cache(maxsize=None)
def derive_correction_table() -> CorrectionTable:
    """Reconstruct the correction table from simulation alone.

    For each (shared, smo) the unique Pauli restoring every probe input (up
    to global phase) is recorded; anything but exactly one survivor raises
    NoUniqueCorrection, which would indicate a convention bug.
    """
    inputs = _oracle_inputs()
    table: CorrectionTable = {}
    for shared in BellKind:
        for smo in SMO_ORDER:
            survivors = []
            for p in PauliKind:
                mat = _PAULI_MATRICES[p]
                if all(
                    equal_up_to_global_phase(
                        apply_1q(teleported_state(shared, smo, chi), 0, mat), chi, 1e-10
                    )
                    for chi in inputs
                ):
                    survivors.append(p)
            if len(survivors) != 1:
                raise NoUniqueCorrection(
                    f"shared={shared} smo={smo.text}: candidates {survivors}"
                )
            table[(shared, smo)] = survivors[0]
    return table
