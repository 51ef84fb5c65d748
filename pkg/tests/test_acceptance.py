"""Acceptance suite: one test per exit criterion, one PASS/FAIL line each.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the criterion
lines; every tolerance is pinned here, not deferred to fixtures.
"""

from __future__ import annotations

import itertools
import time
from contextlib import contextmanager
from fractions import Fraction

import numpy as np
import pytest

from envarkit import (
    PowerOverlapFrame,
    ProbTerm,
    QuadraticFrame,
    RationalWeights,
    RuleSet,
    StateExpr,
    audit,
    born_value,
    born_via_counting,
    check_envariance,
    degeneracy_blocks,
    equal_branch_derivation,
    equal_probabilities,
    equal_up_to_global_phase,
    fine_grain,
    generate_terms,
    make_state,
    numeric_probabilities,
    oracle_best_counter,
    phase_transform,
    premeasure,
    reconstruct,
    saturate,
    schmidt,
    swap_transform,
)
from helpers import bell_state, random_state, spectrum_state

MERGE_RULES = ("PAIRING", "ENV_LOCALITY", "SYS_LOCALITY", "STATE_FUNCTION")


@contextmanager
def criterion(name: str):
    try:
        yield
    except Exception:
        print(f"FAIL  {name}")
        raise
    print(f"PASS  {name}")


def test_phase_transforms_are_envariant():
    with criterion("phase transforms envariant on 200 random states (residual <= 1e-9, <= 10s)"):
        start = time.perf_counter()
        for case in range(200):
            dim_s = 2 + case % 5
            dim_e = 2 + (case // 5) % 5
            state = random_state(dim_s, dim_e, 10_000 + case)
            dec = schmidt(state)
            rng = np.random.default_rng(20_000 + case)
            betas = rng.uniform(-np.pi, np.pi, dec.rank)
            u = phase_transform(tuple(range(1, dec.rank + 1)), betas, dec.system_vectors)
            verdict = check_envariance(state, u)
            assert verdict.envariant, f"case {case} not envariant"
            assert verdict.residual <= 1e-9, f"case {case} residual {verdict.residual}"
        assert time.perf_counter() - start <= 10.0


def test_swap_envariance_criterion_against_oracle():
    with criterion(
        "swap envariant iff equal coefficients, oracle-confirmed on 500 cases (<= 30s)"
    ):
        start = time.perf_counter()
        disagreements = 0
        for case in range(500):
            rng = np.random.default_rng(30_000 + case)
            dim = int(rng.integers(2, 7))
            lam_sq = rng.uniform(0.05, 1.0, dim)
            if case % 2 == 0:
                lam_sq[1] = lam_sq[0]  # force a degenerate pair
            lam = np.sort(np.sqrt(lam_sq / lam_sq.sum()))[::-1]
            state = spectrum_state(lam, seed_s=40_000 + case, seed_e=50_000 + case)
            dec = schmidt(state)
            i = int(rng.integers(1, dec.rank)) if dec.rank > 1 else 1
            j = i + 1
            u = swap_transform(i, j, dec.system_vectors)
            expected = dec.coefficients[i - 1] - dec.coefficients[j - 1] <= 1e-9
            verdict = check_envariance(state, u)
            _, best = oracle_best_counter(state, u)
            if verdict.envariant != expected or verdict.envariant != (best <= 1e-7):
                disagreements += 1
        assert disagreements == 0
        assert time.perf_counter() - start <= 30.0


def test_derivation_chain_reproduction():
    with criterion("full rules on the two-branch even state: 4-rule chain and exact halves"):
        state = bell_state()
        store = saturate(generate_terms(state, [(1, 2)]), RuleSet())
        s1 = ProbTerm("S", 1, StateExpr())
        s2 = ProbTerm("S", 2, StateExpr())
        equal, chain = equal_probabilities(store, s1, s2)
        assert equal
        assert {record.rule for record in chain} == set(MERGE_RULES)
        probs = numeric_probabilities(store, state, RuleSet())
        assert probs == [(1, Fraction(1, 2)), (2, Fraction(1, 2))]


def test_assumption_necessity():
    with criterion("each of the 4 single-rule ablations breaks the branch equality (4/4)"):
        state = bell_state()
        s1 = ProbTerm("S", 1, StateExpr())
        s2 = ProbTerm("S", 2, StateExpr())
        broken = 0
        for rule in MERGE_RULES:
            store = saturate(generate_terms(state, [(1, 2)]), RuleSet().without(rule))
            if not store.same_class(s1, s2):
                broken += 1
        assert broken == 4


def _compositions(total: int, parts: int):
    for cuts in itertools.combinations(range(1, total), parts - 1):
        prev = 0
        out = []
        for cut in cuts:
            out.append(cut - prev)
            prev = cut
        out.append(total - prev)
        yield tuple(out)


def test_born_rule_at_rational_desk_scale():
    with criterion(
        "counting pipeline exact for every weight vector with M <= 32, n <= 4 (<= 60s)"
    ):
        start = time.perf_counter()
        checked = 0
        for m_total in range(1, 33):
            for n in range(1, min(4, m_total) + 1):
                for parts in _compositions(m_total, n):
                    weights = RationalWeights(parts, m_total)
                    probs = born_via_counting(weights)
                    assert probs == [Fraction(m, m_total) for m in parts]
                    assert sum(probs) == 1
                    fine = fine_grain(weights, n)
                    lam_sq = sorted(
                        (float(v) ** 2 for v in schmidt(fine.state).coefficients), reverse=True
                    )
                    expected = sorted((m / m_total for m in parts), reverse=True)
                    worst = max(abs(a - b) for a, b in zip(lam_sq, expected))
                    assert worst <= 1e-9
                    checked += 1
        assert checked == 41_448
        assert time.perf_counter() - start <= 60.0


def test_gleason_audit():
    with criterion(
        "quadratic frames pass (dims 3-6, 1e3 bases, <= 1e-9); power 1/3/4 fail (>= 0.1)"
    ):
        for dim in range(3, 7):
            rng = np.random.default_rng(dim)
            g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
            rho = g @ g.conj().T
            report = audit(QuadraticFrame(rho / np.trace(rho).real), dim, 1000, seed=0)
            assert report.verdict == "CONSISTENT" and report.max_dev <= 1e-9
        w = np.zeros(3, dtype=complex)
        w[0] = 1.0
        for alpha in (1.0, 3.0, 4.0):
            report = audit(PowerOverlapFrame(w, alpha), 3, 1000, seed=0)
            assert report.max_dev >= 0.1, f"alpha={alpha} max_dev {report.max_dev}"


def test_soundness_guard():
    with criterion("no equality class mixes terms whose squared-amplitude values differ > 1e-9"):
        runs = []
        bell = bell_state()
        runs.append((bell, [(1, 2)], RuleSet()))
        for rule in MERGE_RULES:
            runs.append((bell, [(1, 2)], RuleSet().without(rule)))
        for dim in (3, 4, 6):
            even = make_state(np.eye(dim, dtype=complex) / np.sqrt(dim))
            runs.append((even, [(k, k + 1) for k in range(1, dim)], RuleSet()))
        rotated = spectrum_state(np.full(4, 0.5), seed_s=60_000, seed_e=60_001)
        runs.append((rotated, [(1, 2), (2, 3), (3, 4)], RuleSet()))
        for state, swaps, rules in runs:
            term_set = generate_terms(state, swaps)
            store = saturate(term_set, rules)
            for cls in store.classes():
                values = [born_value(t, state, term_set.decomposition) for t in cls]
                assert max(values) - min(values) <= 1e-9
        for m_total in (2, 3, 8, 16):
            term_set, store, _ = equal_branch_derivation(m_total)
            for cls in store.classes():
                values = [
                    born_value(t, term_set.base_state, term_set.decomposition) for t in cls
                ]
                assert max(values) - min(values) <= 1e-9


def test_round_trip_and_premeasurement():
    with criterion(
        "schmidt-reconstruct residual <= 1e-10 on 100 states; memory branches match the even pair"
    ):
        for case in range(100):
            dim_s = 2 + case % 6
            dim_e = 2 + (case // 6) % 6
            state = random_state(dim_s, dim_e, 70_000 + case)
            rec = reconstruct(schmidt(state))
            equal, _ = equal_up_to_global_phase(rec, state, tol=1e-10)
            assert equal
            assert np.linalg.norm(rec.amps - state.amps) <= 1e-10
        bell = bell_state()
        dec = schmidt(bell)
        tri = premeasure(bell, dec)
        assert tri.dim_m == 3
        assert np.all(tri.amps[0] == 0)
        for k in range(2):
            branch = dec.coefficients[k] * np.outer(dec.system_vectors[:, k], dec.env_vectors[:, k])
            assert np.max(np.abs(tri.amps[k + 1] - branch)) <= 1e-12
            assert np.linalg.norm(tri.amps[k + 1]) ** 2 == pytest.approx(0.5, abs=1e-12)
        assert degeneracy_blocks(dec) == [[1, 2]]
