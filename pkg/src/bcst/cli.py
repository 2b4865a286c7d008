"""Command-line front end.

Grammar: `bcst <enumerate|validate|simulate|simulate-prob|keygen|tables>`.
Every command emits a single JSON document (or `--format text` key/value
lines) with the shape {schema_version, command, seed, inputs, results,
diagnostics}.  Output is byte-identical for identical arguments and seed.

Exit codes: 0 success (clean diff), 1 internal error, 2 usage or parse
error, 3 a table diff is nonempty.
"""

from __future__ import annotations

import argparse
import itertools
import json
import sys
from importlib import resources

import numpy as np

from . import bell, channel, keyswap, probabilistic, protocol
from .errors import BcstError, ParseError
from .qcore import BellKind

SCHEMA_VERSION = 1
DEFAULT_SEED = 1729  # fixed so that runs are reproducible by default


def _payload(command: str, seed: int | None, inputs: dict, results: dict, diagnostics: dict | None = None) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "seed": seed,
        "inputs": inputs,
        "results": results,
        "diagnostics": diagnostics or {},
    }


def _render_text(value, prefix: str = "") -> list[str]:
    lines: list[str] = []
    if isinstance(value, dict):
        for key in sorted(value):
            lines.extend(_render_text(value[key], f"{prefix}{key}." if prefix else f"{key}."))
    elif isinstance(value, (list, tuple)):
        for i, item in enumerate(value):
            lines.extend(_render_text(item, f"{prefix}{i}."))
    else:
        lines.append(f"{prefix.rstrip('.')}: {value}")
    return lines


def _emit(payload: dict, fmt: str) -> None:
    if fmt == "json":
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        print("\n".join(_render_text(payload)))


def _parse_bool(text: str) -> bool:
    if text == "true":
        return True
    if text == "false":
        return False
    raise ParseError(f"expected 'true' or 'false', got {text!r}")


def _parse_unknown(text: str) -> protocol.UnknownQubit:
    parts = text.split(",")
    if len(parts) != 2:
        raise ParseError(f"expected 'alpha,beta', got {text!r}")
    try:
        return protocol.UnknownQubit(complex(parts[0]), complex(parts[1]))
    except ValueError as exc:
        raise ParseError(f"bad input qubit {text!r}: {exc}") from exc


def _resolve_spec(args) -> channel.ChannelSpec:
    if getattr(args, "state", None):
        registry = channel.published_states()
        if args.state not in registry:
            raise ParseError(f"unknown named state {args.state!r}; choose from {sorted(registry)}")
        return registry[args.state].spec
    if getattr(args, "spec", None):
        return channel.parse_channel_spec(args.spec)
    raise ParseError("either --spec or --state is required")


def _parse_prob_spec(text: str) -> probabilistic.ProbChannelSpec:
    """Channel-spec grammar plus a params segment, e.g.
    `psi+,psi+,psi-,psi-;basis=0/1;sign=+;a1=0.8,b1=0.6,a2=0.8,b2=0.6`."""
    segments = [seg.strip() for seg in text.strip().split(";") if seg.strip()]
    if not segments:
        raise ParseError("empty channel spec")
    quad = channel.parse_quad(segments[0])
    basis = channel.parse_basis("+/-")
    sign = +1
    params: dict[str, float] = {}
    for seg in segments[1:]:
        if seg.startswith("basis="):
            basis = channel.parse_basis(seg[len("basis="):])
        elif seg.startswith("sign="):
            sign = channel.parse_sign(seg[len("sign="):])
        elif "=" in seg:
            for tok in seg.split(","):
                name, _, value = tok.partition("=")
                try:
                    params[name.strip()] = float(value)
                except ValueError as exc:
                    raise ParseError(f"bad parameter {tok!r}") from exc
        else:
            raise ParseError(f"unknown channel-spec segment {seg!r}")
    missing = {"a1", "b1", "a2", "b2"} - set(params)
    if missing:
        raise ParseError(f"missing pair parameters: {sorted(missing)}")

    def gen(kind: BellKind, pair: int) -> probabilistic.GenBellParams:
        family = (
            probabilistic.GenFamily.PSI
            if kind in (BellKind.PSI_PLUS, BellKind.PSI_MINUS)
            else probabilistic.GenFamily.PHI
        )
        pm = +1 if kind in (BellKind.PSI_PLUS, BellKind.PHI_PLUS) else -1
        return probabilistic.GenBellParams.normalized(
            params[f"a{pair}"], params[f"b{pair}"], family, pm
        )

    return probabilistic.ProbChannelSpec(
        gen(quad[0], 1), gen(quad[1], 2), gen(quad[2], 1), gen(quad[3], 2), basis, sign
    )


# --- commands --- #


def cmd_enumerate(args) -> int:
    basis = channel.parse_basis(args.basis)
    sign = channel.parse_sign(args.sign)
    specs = (
        channel.enumerate_invalid(basis, sign) if args.invert else channel.enumerate_valid(basis, sign)
    )
    results: dict = {
        "count": len(specs),
        "quadruples": [spec.quad_text for spec in specs],
    }
    if args.verify_table2:
        text = (resources.files("bcst") / "data" / "table2.txt").read_text(encoding="utf-8")
        rows = [
            line.strip()
            for line in text.splitlines()
            if line.strip() and not line.lstrip().startswith("#")
        ]
        have = {spec.quad_text for spec in channel.enumerate_valid(basis, sign)}
        missing = [row for row in rows if row not in have]
        results["table2"] = {"total": len(rows), "present": len(rows) - len(missing), "missing": missing}
        if missing:
            _emit(_payload("enumerate", None, _enum_inputs(args), results), args.format)
            return 1
    _emit(_payload("enumerate", None, _enum_inputs(args), results), args.format)
    return 0


def _enum_inputs(args) -> dict:
    return {"basis": args.basis, "sign": args.sign, "invert": bool(args.invert)}


def cmd_validate(args) -> int:
    if args.state:
        entry = channel.published_states().get(args.state)
        if entry is None:
            raise ParseError(f"unknown named state {args.state!r}")
        state, layout, spec = entry.state, entry.layout, entry.spec
        source = {"state": args.state}
    else:
        spec = channel.parse_channel_spec(args.spec)
        state, layout = channel.build_channel_state(spec), channel.CANONICAL_LAYOUT
        source = {"spec": args.spec}
    report = channel.control_report(state, layout)
    results = {
        "dir_ab": "controlled" if report.dir_ab_controlled else "uncontrolled",
        "dir_ba": "controlled" if report.dir_ba_controlled else "uncontrolled",
        "purity_ab": report.purity_ab,
        "purity_ba": report.purity_ba,
        "condition": channel.check_condition(spec),
    }
    _emit(_payload("validate", None, source, results), args.format)
    return 0


def cmd_simulate(args) -> int:
    spec = _resolve_spec(args)
    input_a = _parse_unknown(args.input_a)
    input_b = _parse_unknown(args.input_b)
    disclose = _parse_bool(args.disclose)
    rng = np.random.default_rng(args.seed)

    exhaustive = protocol.run_bcst_exhaustive(spec, input_a, input_b, disclose)
    runs = [protocol.run_bcst(spec, input_a, input_b, disclose, rng) for _ in range(args.trials)]
    results: dict = {
        "exhaustive": {
            "branch_count": len(exhaustive.branches),
            "total_probability": exhaustive.total_probability,
            "min_fidelity_a_to_b": exhaustive.min_fidelity_a_to_b,
            "max_fidelity_a_to_b": exhaustive.max_fidelity_a_to_b,
            "min_fidelity_b_to_a": exhaustive.min_fidelity_b_to_a,
            "max_fidelity_b_to_a": exhaustive.max_fidelity_b_to_a,
        },
        "sampled": {
            "trials": args.trials,
            "mean_fidelity_a_to_b": sum(r.fidelity_a_to_b for r in runs) / len(runs),
            "mean_fidelity_b_to_a": sum(r.fidelity_b_to_a for r in runs) / len(runs),
        },
    }
    if args.transcript:
        results["runs"] = [
            {
                "charlie_outcome": r.charlie_outcome,
                "smo_a": r.smo_a.text,
                "smo_b": r.smo_b.text,
                "fidelity_a_to_b": r.fidelity_a_to_b,
                "fidelity_b_to_a": r.fidelity_b_to_a,
                "transcript": r.transcript.as_dicts(),
            }
            for r in runs
        ]
    inputs = {
        "spec": args.spec or args.state,
        "input_a": args.input_a,
        "input_b": args.input_b,
        "disclose": disclose,
        "trials": args.trials,
    }
    _emit(_payload("simulate", args.seed, inputs, results), args.format)
    return 0


def cmd_simulate_prob(args) -> int:
    spec = _parse_prob_spec(args.spec)
    input_a = _parse_unknown(args.input_a)
    input_b = _parse_unknown(args.input_b)
    rng = np.random.default_rng(args.seed)

    prob = probabilistic.success_probability(spec)
    runs = [probabilistic.run_pbcst(spec, input_a, input_b, rng) for _ in range(args.trials)]
    succ_ab = [r.dir_ab for r in runs if r.dir_ab.success]
    succ_ba = [r.dir_ba for r in runs if r.dir_ba.success]
    results: dict = {
        "success_probability": {
            "analytic_ab": prob.analytic_ab,
            "numeric_ab": prob.numeric_ab,
            "analytic_ba": prob.analytic_ba,
            "numeric_ba": prob.numeric_ba,
        },
        "sampled": {
            "trials": args.trials,
            "success_rate_ab": len(succ_ab) / len(runs),
            "success_rate_ba": len(succ_ba) / len(runs),
            "mean_success_fidelity_ab": (
                sum(d.fidelity for d in succ_ab) / len(succ_ab) if succ_ab else None
            ),
            "mean_success_fidelity_ba": (
                sum(d.fidelity for d in succ_ba) / len(succ_ba) if succ_ba else None
            ),
        },
    }
    if args.transcript:
        results["runs"] = [
            {
                "charlie_outcome": r.charlie_outcome,
                "ab": {
                    "success": r.dir_ab.success,
                    "fidelity": r.dir_ab.fidelity,
                    "ancilla": r.dir_ab.ancilla_outcome,
                    "smo": r.dir_ab.smo.text,
                },
                "ba": {
                    "success": r.dir_ba.success,
                    "fidelity": r.dir_ba.fidelity,
                    "ancilla": r.dir_ba.ancilla_outcome,
                    "smo": r.dir_ba.smo.text,
                },
                "transcript": r.transcript.as_dicts(),
            }
            for r in runs
        ]
    inputs = {
        "spec": args.spec,
        "input_a": args.input_a,
        "input_b": args.input_b,
        "trials": args.trials,
    }
    _emit(_payload("simulate-prob", args.seed, inputs, results), args.format)
    return 0


def cmd_keygen(args) -> int:
    spec = _resolve_spec(args)
    disclose = _parse_bool(args.disclose)
    rng = np.random.default_rng(args.seed)
    rounds = [keyswap.run_key_round(spec, disclose, rng) for _ in range(args.trials)]
    agree = sum(1 for r in rounds if r.alice_key == r.bob_key)
    results: dict = {
        "agreement_rate": agree / len(rounds),
        "agreement_rate_exact": keyswap.agreement_rate_exhaustive(spec, disclose),
        "key_secure": keyswap.channel_key_secure(spec),
        "rounds": args.trials,
    }
    if args.transcript:
        results["round_log"] = [
            {
                "initial": f"{r.initial[0].value},{r.initial[1].value}",
                "alice_outcome": r.alice_outcome.value,
                "bob_outcome": r.bob_outcome.value,
                "alice_key": r.alice_key,
                "bob_key": r.bob_key,
            }
            for r in rounds
        ]
    inputs = {"spec": args.spec or args.state, "disclose": disclose, "trials": args.trials}
    _emit(_payload("keygen", args.seed, inputs, results), args.format)
    return 0


def cmd_tables(args) -> int:
    if args.which == "1":
        reference = bell.paper_table_1()
        derived = bell.derive_correction_table()
        diff = bell.diff_tables(reference, derived)
        results = {
            "reference": bell.correction_table_lines(reference),
            "derived": bell.correction_table_lines(derived),
            "diff": bell.diff_lines(diff),
        }
    elif args.which == "3":
        reference = probabilistic.paper_table_3()
        derived = probabilistic.derive_prob_correction_table()
        diff = bell.diff_tables(reference, derived)
        results = {
            "reference": bell.correction_table_lines(reference),
            "derived": bell.correction_table_lines(derived),
            "diff": bell.diff_lines(diff),
        }
    else:
        reference = keyswap.paper_table_4()
        derived = keyswap.derive_swap_table()
        diff = keyswap.diff_swap_tables(reference, derived)
        results = {
            "reference": keyswap.swap_table_lines(reference),
            "derived": keyswap.swap_table_lines(derived),
            "diff": keyswap.swap_diff_lines(diff),
        }
    results["mismatches"] = len(results["diff"])
    _emit(_payload("tables", None, {"which": args.which}, results), args.format)
    return 3 if results["diff"] else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bcst",
        description="Simulate and verify bidirectional controlled teleportation channels.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser, seeded: bool = True) -> None:
        p.add_argument("--format", choices=("json", "text"), default="json")
        if seeded:
            p.add_argument("--seed", type=int, default=DEFAULT_SEED)

    p = sub.add_parser("enumerate", help="list the usable channel quadruples")
    p.add_argument("--basis", default="+/-")
    p.add_argument("--sign", default="+")
    p.add_argument("--invert", action="store_true", help="list the invalid quadruples instead")
    p.add_argument("--verify-table2", action="store_true", dest="verify_table2")
    add_common(p, seeded=False)
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("validate", help="control analysis of a channel or named state")
    p.add_argument("--spec")
    p.add_argument("--state", help="named state: zha, zha-prime, li")
    add_common(p, seeded=False)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("simulate", help="run the perfect protocol")
    p.add_argument("--spec")
    p.add_argument("--state")
    p.add_argument("--input-a", default="0.6,0.8", dest="input_a")
    p.add_argument("--input-b", default="0.6,0.8", dest="input_b")
    p.add_argument("--disclose", default="true")
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--transcript", action="store_true")
    add_common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("simulate-prob", help="run the probabilistic protocol")
    p.add_argument("--spec", required=True)
    p.add_argument("--input-a", default="0.6,0.8", dest="input_a")
    p.add_argument("--input-b", default="0.6,0.8", dest="input_b")
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--transcript", action="store_true")
    add_common(p)
    p.set_defaults(func=cmd_simulate_prob)

    p = sub.add_parser("keygen", help="run entanglement-swapping key rounds")
    p.add_argument("--spec")
    p.add_argument("--state")
    p.add_argument("--disclose", default="true")
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--transcript", action="store_true")
    add_common(p)
    p.set_defaults(func=cmd_keygen)

    p = sub.add_parser("tables", help="derive a table and diff it against the reference")
    p.add_argument("--which", choices=("1", "3", "4"), required=True)
    add_common(p, seeded=False)
    p.set_defaults(func=cmd_tables)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"bcst: parse error: {exc}", file=sys.stderr)
        return 2
    except BcstError as exc:
        print(f"bcst: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
