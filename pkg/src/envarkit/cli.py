"""Command-line front end: schmidt, envariance, derive, finegrain, gleason.

Reports are JSON by default (``--format text`` for a flat rendering) and
fully determined by the arguments, including the seed.  Exit codes: 0 on
success, 1 when the run is valid but the verdict is negative (not
envariant, derivation incomplete, audit violation), 2 on input errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction

import numpy as np

from .derivation import ProbTerm, RuleSet, StateExpr, generate_terms, numeric_probabilities, saturate
from .envariance import ENVAR_TOL, check_envariance, oracle_best_counter, phase_transform, swap_transform
from .errors import EnvarkitError, IncompleteDerivation, ParseError
from .finegrain import RationalWeights, born_via_counting, equal_branch_derivation, fine_grain
from .gleason import AUDIT_TOL, PowerOverlapFrame, QuadraticFrame, audit
from .schmidt import DEGENERACY_TOL, is_even, schmidt
from .states import load_state


def _matrix_pairs(mat: np.ndarray) -> list:
    return [[[float(c.real), float(c.imag)] for c in row] for row in mat]


def _render(report: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(report, indent=2, ensure_ascii=False) + "\n"
    lines = []
    for key, value in report.items():
        if isinstance(value, (dict, list)):
            lines.append(f"{key}: {json.dumps(value, ensure_ascii=False)}")
        else:
            lines.append(f"{key}: {value}")
    return "\n".join(lines) + "\n"


def _parse_transform(spec: str):
    kind, _, rest = spec.partition(":")
    try:
        if kind == "swap":
            i, j = (int(x) for x in rest.split(","))
            return ("swap", i, j)
        if kind == "phase":
            return ("phase", tuple(float(x) for x in rest.split(",")))
    except ValueError as exc:
        raise ParseError(f"bad transform spec {spec!r}: {exc}") from exc
    raise ParseError(f"transform spec must be 'swap:i,j' or 'phase:b1,b2,...', got {spec!r}")


def _parse_swaps(spec: str) -> list[tuple[int, int]]:
    try:
        return [tuple(int(x) for x in pair.split(",")) for pair in spec.split(";")]
    except ValueError as exc:
        raise ParseError(f"bad swap schedule {spec!r}: {exc}") from exc


def _cmd_schmidt(args) -> tuple[dict, int]:
    state = load_state(args.state)
    dec = schmidt(state)
    tol = args.tol if args.tol is not None else DEGENERACY_TOL
    report = {
        "lambda": [float(v) for v in dec.coefficients],
        "rank": dec.rank,
        "even": is_even(dec, tol),
        "s_vecs": _matrix_pairs(dec.system_vectors.T),
        "e_vecs": _matrix_pairs(dec.env_vectors.T),
    }
    return report, 0


def _cmd_envariance(args) -> tuple[dict, int]:
    state = load_state(args.state)
    dec = schmidt(state)
    parsed = _parse_transform(args.transform)
    if parsed[0] == "swap":
        u_s = swap_transform(parsed[1], parsed[2], dec.system_vectors)
    else:
        betas = parsed[1]
        u_s = phase_transform(tuple(range(1, len(betas) + 1)), betas, dec.system_vectors)
    tol = args.tol if args.tol is not None else ENVAR_TOL
    verdict = check_envariance(state, u_s, tol=tol)
    _, oracle_residual = oracle_best_counter(state, u_s)
    report = {
        "envariant": verdict.envariant,
        "residual": verdict.residual,
        "counter": _matrix_pairs(verdict.counter.mat) if verdict.counter else None,
        "oracle_residual": oracle_residual,
    }
    return report, 0 if verdict.envariant else 1


def _rules_from_args(disabled: list[str]) -> RuleSet:
    rules = RuleSet()
    for name in disabled:
        rules = rules.without(name)
    return rules


def _derivation_report(state, swaps, rules: RuleSet) -> dict:
    term_set = generate_terms(state, swaps)
    store = saturate(term_set, rules)
    report = {
        "classes": [[str(t) for t in cls] for cls in store.classes()],
        "trace": [
            {"rule": rec.rule, "merged": [str(rec.left), str(rec.right)]}
            for rec in store.trace
        ],
    }
    try:
        probs = numeric_probabilities(store, state, rules)
        report["probabilities"] = [str(p) for _, p in probs]
        report["probabilities_float"] = [float(p) for _, p in probs]
    except IncompleteDerivation as exc:
        report["probabilities"] = None
        report["incomplete"] = str(exc)
    return report


def _cmd_derive(args) -> tuple[dict, int]:
    state = load_state(args.state)
    rank = schmidt(state).rank
    swaps = _parse_swaps(args.swaps) if args.swaps else [(k, k + 1) for k in range(1, rank)]
    rules = _rules_from_args(args.disable or [])
    report = _derivation_report(state, swaps, rules)
    if args.ablate:
        ablations = []
        left = ProbTerm("S", 1, StateExpr())
        right = ProbTerm("S", min(2, rank), StateExpr())
        for name in ("PAIRING", "ENV_LOCALITY", "SYS_LOCALITY", "STATE_FUNCTION"):
            sub_rules = rules.without(name)
            sub_store = saturate(generate_terms(state, swaps), sub_rules)
            ablations.append(
                {"disabled": name, "s1_equals_s2": sub_store.same_class(left, right)}
            )
        report["ablations"] = ablations
    return report, 0 if report["probabilities"] is not None else 1


def _cmd_finegrain(args) -> tuple[dict, int]:
    try:
        fracs = [Fraction(part) for part in args.weights.split(",")]
    except (ValueError, ZeroDivisionError) as exc:
        raise ParseError(f"bad weights {args.weights!r}: {exc}") from exc
    weights = RationalWeights.from_fractions(fracs)
    fine = fine_grain(weights, len(weights.numerators))
    probs = born_via_counting(weights)
    _, store, _ = equal_branch_derivation(weights.denominator)
    lam_sq = [float(v) ** 2 for v in schmidt(fine.state).coefficients]
    expected = sorted((float(p) for p in probs), reverse=True)
    report = {
        "weights": [str(f) for f in weights.fractions],
        "numerators": list(weights.numerators),
        "denominator": weights.denominator,
        "probabilities": [str(p) for p in probs],
        "probabilities_float": [float(p) for p in probs],
        "branch_map": [list(block) for block in fine.branch_map],
        "schmidt_check": {
            "lambda_squared": lam_sq,
            "max_abs_error": max(abs(a - b) for a, b in zip(sorted(lam_sq, reverse=True), expected)),
        },
        "trace_length": len(store.trace),
    }
    return report, 0


def _cmd_gleason(args) -> tuple[dict, int]:
    if args.kind == "quadratic":
        rng = np.random.default_rng(args.seed)
        g = rng.standard_normal((args.dim, args.dim)) + 1j * rng.standard_normal((args.dim, args.dim))
        rho = g @ g.conj().T
        frame = QuadraticFrame(rho / np.trace(rho).real)
    elif args.kind.startswith("power:"):
        try:
            alpha = float(args.kind.partition(":")[2])
        except ValueError as exc:
            raise ParseError(f"bad frame kind {args.kind!r}") from exc
        w = np.zeros(args.dim, dtype=complex)
        w[0] = 1.0
        frame = PowerOverlapFrame(w, alpha)
    else:
        raise ParseError(f"frame kind must be 'quadratic' or 'power:ALPHA', got {args.kind!r}")
    tol = args.tol if args.tol is not None else AUDIT_TOL
    report = audit(frame, args.dim, args.trials, args.seed, tol=tol).as_dict()
    report["seed"] = args.seed
    return report, 0 if report["verdict"] == "CONSISTENT" else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="envarkit",
        description="Envariance checks, probability-equality derivations, "
        "rational Born weights and frame-function audits.",
    )
    default_seed = int(os.environ.get("ENVARKIT_SEED", "0"))
    parser.add_argument("--seed", type=int, default=default_seed)
    parser.add_argument("--tol", type=float, default=None, help="override the module tolerance")
    parser.add_argument("--format", choices=("json", "text"), default="json")
    parser.add_argument("--out", default=None, help="write the report to this path")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("schmidt", help="decompose a state file")
    p.add_argument("state")

    p = sub.add_parser("envariance", help="decide envariance of a transform")
    p.add_argument("state")
    p.add_argument("transform", help="'swap:i,j' or 'phase:b1,b2,...' in the Schmidt system basis")

    p = sub.add_parser("derive", help="run the probability-equality engine")
    p.add_argument("state")
    p.add_argument("--swaps", default=None, help="schedule like '1,2;2,3' (default: adjacent)")
    p.add_argument("--disable", action="append", metavar="RULE", help="disable a rule by name")
    p.add_argument("--ablate", action="store_true", help="also report leave-one-out rule ablations")

    p = sub.add_parser("finegrain", help="count equal sub-branches for rational weights")
    p.add_argument("weights", help="comma-separated fractions like '1/3,2/3'")

    p = sub.add_parser("gleason", help="audit a frame function on random bases")
    p.add_argument("kind", help="'quadratic' or 'power:ALPHA'")
    p.add_argument("--dim", type=int, default=3)
    p.add_argument("--trials", type=int, default=1000)

    return parser


_COMMANDS = {
    "schmidt": _cmd_schmidt,
    "envariance": _cmd_envariance,
    "derive": _cmd_derive,
    "finegrain": _cmd_finegrain,
    "gleason": _cmd_gleason,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        report, code = _COMMANDS[args.command](args)
    except (EnvarkitError, OSError, ValueError) as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    text = _render(report, args.format)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
