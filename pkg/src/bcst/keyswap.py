"""Entanglement-swapping key agreement under Charlie's control.

After Charlie's measurement the channel leaves Alice and Bob holding a
product of two Bell pairs |x>_12 |y>_34 (paper-style numbering 1=A1, 2=B1,
3=A2, 4=B2; Alice holds 1 and 3, Bob 2 and 4).  Alice Bell-measures (1,3)
and reads her key bits off the outcome; Bob Bell-measures (2,4) and infers
Alice's outcome through the swap correlation table for the initial product
he believes they shared.  Without Charlie's disclosure that belief is a
fixed guess (the outcome-a branch), and for most channels the two branches
induce different correlation maps, so Bob's inference breaks.

Key bits: psi+ -> 00, psi- -> 01, phi+ -> 10, phi- -> 11.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

import numpy as np

from .bell import bell_state
from .channel import ChannelSpec, build_channel_state, check_condition
from .errors import ConditionViolated, ParseError
from .qcore import (
    BellKind,
    StateVector,
    measure_bell_pair,
    measure_qubit,
    permute_qubits,
    tensor,
)

KEY_BITS: dict[BellKind, str] = {
    BellKind.PSI_PLUS: "00",
    BellKind.PSI_MINUS: "01",
    BellKind.PHI_PLUS: "10",
    BellKind.PHI_MINUS: "11",
}

# alice outcome -> (bob outcome, sign of the +/- 1/2 coefficient)
SwapRow = dict[BellKind, tuple[BellKind, int]]
SwapTable = dict[tuple[BellKind, BellKind], SwapRow]

_COEFF_TOL = 1e-9


def _two_pair_basis_vector(u: BellKind, v: BellKind) -> StateVector:
    """|u>_{13} |v>_{24} expressed in register order (1, 2, 3, 4)."""
    raw = tensor([bell_state(u), bell_state(v)])  # order (1, 3, 2, 4)
    return permute_qubits(raw, [0, 2, 1, 3])


@lru_cache(maxsize=None)
def derive_swap_table() -> SwapTable:
    """Expand each |x>_12 |y>_34 in the (1,3)(2,4) two-pair Bell basis.

    Every product has exactly four nonzero coefficients of magnitude 1/2,
    and the alice -> bob outcome map is a bijection; both facts are asserted.
    """
    table: SwapTable = {}
    for x, y in itertools.product(BellKind, repeat=2):
        state = tensor([bell_state(x), bell_state(y)])
        row: SwapRow = {}
        for u, v in itertools.product(BellKind, repeat=2):
            coeff = complex(np.vdot(_two_pair_basis_vector(u, v).amps, state.amps))
            if abs(coeff) < _COEFF_TOL:
                continue
            if abs(abs(coeff) - 0.5) > _COEFF_TOL or abs(coeff.imag) > _COEFF_TOL:
                raise AssertionError(f"unexpected coefficient {coeff} for {x},{y}")
            if u in row:
                raise AssertionError(f"duplicate alice outcome {u} for {x},{y}")
            row[u] = (v, +1 if coeff.real > 0 else -1)
        if len(row) != 4 or len({v for v, _ in row.values()}) != 4:
            raise AssertionError(f"row for {x},{y} is not a bijection: {row}")
        table[(x, y)] = row
    return table


def _parse_label(label: str) -> BellKind:
    for kind in BellKind:
        if kind.value == label:
            return kind
    raise ParseError(f"unknown Bell state label {label!r}")


def load_swap_table(lines: list[str]) -> SwapTable:
    """Parse `init=<x>,<y> alice=<u> bob=<v> sign=<+|->` lines; `#` comments allowed."""
    table: SwapTable = {}
    for raw in lines:
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = dict(tok.split("=", 1) for tok in line.split())
        if set(fields) != {"init", "alice", "bob", "sign"}:
            raise ParseError(f"bad swap-table line: {raw!r}")
        x_label, y_label = fields["init"].split(",")
        key = (_parse_label(x_label), _parse_label(y_label))
        alice = _parse_label(fields["alice"])
        if fields["sign"] not in ("+", "-"):
            raise ParseError(f"bad sign in line: {raw!r}")
        row = table.setdefault(key, {})
        if alice in row:
            raise ParseError(f"duplicate alice outcome in row {fields['init']}")
        row[alice] = (_parse_label(fields["bob"]), +1 if fields["sign"] == "+" else -1)
    if len(table) != 16 or any(len(row) != 4 for row in table.values()):
        raise ParseError("swap table must have 16 rows of 4 entries")
    return table


@lru_cache(maxsize=None)
def paper_table_4() -> SwapTable:
    """Reference swap-correlation table from the shipped data file."""
    text = (resources.files("bcst") / "data" / "table4.txt").read_text(encoding="utf-8")
    return load_swap_table(text.splitlines())


def swap_table_lines(table: SwapTable) -> list[str]:
    lines = []
    for x, y in itertools.product(BellKind, repeat=2):
        row = table[(x, y)]
        for alice in BellKind:
            bob, sign = row[alice]
            lines.append(
                f"init={x.value},{y.value} alice={alice.value} bob={bob.value} "
                f"sign={'+' if sign > 0 else '-'}"
            )
    return lines


def diff_swap_tables(
    t1: SwapTable, t2: SwapTable
) -> list[tuple[tuple[BellKind, BellKind], BellKind, tuple[BellKind, int], tuple[BellKind, int]]]:
    """Entries where the tables disagree (outcome or sign), deterministic order."""
    out = []
    for key in itertools.product(BellKind, repeat=2):
        for alice in BellKind:
            if t1[key][alice] != t2[key][alice]:
                out.append((key, alice, t1[key][alice], t2[key][alice]))
    return out


def swap_diff_lines(diff, left: str = "reference", right: str = "derived") -> list[str]:
    def fmt(entry: tuple[BellKind, int]) -> str:
        bob, sign = entry
        return f"{bob.value}/{'+' if sign > 0 else '-'}"

    return [
        f"init={x.value},{y.value} alice={alice.value} {left}={fmt(e1)} {right}={fmt(e2)}"
        for (x, y), alice, e1, e2 in diff
    ]


def infer_alice_outcome(initial: tuple[BellKind, BellKind], bob_outcome: BellKind) -> BellKind:
    """Unique preimage of Bob's outcome under the derived correlation map."""
    row = derive_swap_table()[initial]
    for alice, (bob, _) in row.items():
        if bob is bob_outcome:
            return alice
    raise AssertionError(f"no preimage for {bob_outcome} in row {initial}")


@dataclass(frozen=True)
class KeyRound:
    initial: tuple[BellKind, BellKind]
    alice_outcome: BellKind
    bob_outcome: BellKind
    alice_key: str
    bob_key: str
    disclosed: bool


def run_key_round(spec: ChannelSpec, disclose: bool, rng: np.random.Generator) -> KeyRound:
    """One sampled key round; randomness order Charlie -> Alice -> Bob."""
    if not check_condition(spec):
        raise ConditionViolated(f"{spec.quad_text} violates psi1 != psi3, psi2 != psi4")
    state = build_channel_state(spec)
    charlie = measure_qubit(state, 4, spec.charlie_basis, float(rng.random()))
    actual = (spec.psi1, spec.psi2) if charlie.outcome == "a" else (spec.psi3, spec.psi4)

    alice = measure_bell_pair(charlie.state, 0, 2, float(rng.random()))  # (A1, A2)
    bob = measure_bell_pair(alice.state, 1, 3, float(rng.random()))  # (B1, B2)

    guess = actual if disclose else (spec.psi1, spec.psi2)
    inferred = infer_alice_outcome(guess, bob.outcome)
    return KeyRound(
        initial=actual,
        alice_outcome=alice.outcome,
        bob_outcome=bob.outcome,
        alice_key=KEY_BITS[alice.outcome],
        bob_key=KEY_BITS[inferred],
        disclosed=disclose,
    )


def agreement_rate_exhaustive(spec: ChannelSpec, disclose: bool) -> float:
    """Exact key agreement rate over both Charlie branches and all Alice outcomes.

    Every (branch, outcome) pair has probability 1/8, so the rate is exact
    in binary floating point.
    """
    if not check_condition(spec):
        raise ConditionViolated(f"{spec.quad_text} violates psi1 != psi3, psi2 != psi4")
    table = derive_swap_table()
    agree = 0
    branches = (("a", (spec.psi1, spec.psi2)), ("b", (spec.psi3, spec.psi4)))
    for outcome, actual in branches:
        guess = actual if disclose else (spec.psi1, spec.psi2)
        for alice in BellKind:
            bob, _ = table[actual][alice]
            if infer_alice_outcome(guess, bob) is alice:
                agree += 1
    return agree / 8.0


def outcome_map(initial: tuple[BellKind, BellKind]) -> dict[BellKind, BellKind]:
    """Correlation map of an initial product, signs dropped."""
    return {alice: bob for alice, (bob, _) in derive_swap_table()[initial].items()}


def channel_key_secure(spec: ChannelSpec) -> bool:
    """A channel is key-secure iff its two Charlie branches induce different
    correlation maps, i.e. withholding the disclosure actually hides the key."""
    if not check_condition(spec):
        raise ConditionViolated(f"{spec.quad_text} violates psi1 != psi3, psi2 != psi4")
    return outcome_map((spec.psi1, spec.psi2)) != outcome_map((spec.psi3, spec.psi4))


def security_split(specs: list[ChannelSpec]) -> list[tuple[ChannelSpec, bool]]:
    return [(spec, channel_key_secure(spec)) for spec in specs]


def security_split_lines(specs: list[ChannelSpec]) -> list[str]:
    return [
        f"{spec.quad_text} {'secure' if secure else 'insecure'}"
        for spec, secure in security_split(specs)
    ]
