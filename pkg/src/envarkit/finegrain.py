"""Fine-graining rational branch weights into equal-amplitude sub-branches.

A weight vector ``(m_1/M, ..., m_n/M)`` becomes a state on an enlarged
environment where branch ``k`` spreads over ``m_k`` environment directions
of amplitude ``1/sqrt(M)`` each.  Because all M sub-branches are equal, the
equal-likelihood derivation applies, and summing ``m_k`` shares of ``1/M``
recovers the squared Schmidt coefficients in exact rational arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import lcm

import numpy as np

from .derivation import EqualityStore, RuleSet, TermSet, generate_terms, numeric_probabilities, saturate
from .errors import NoRationalFit, WeightMismatch
from .states import BipartiteState, make_state


@dataclass(frozen=True)
class RationalWeights:
    """Branch weights ``m_k / M`` with the grain M kept un-reduced."""

    numerators: tuple[int, ...]
    denominator: int

    def __post_init__(self) -> None:
        ms = tuple(int(m) for m in self.numerators)
        if not ms or any(m <= 0 for m in ms):
            raise WeightMismatch(f"numerators must be positive integers, got {self.numerators}")
        if sum(ms) != int(self.denominator):
            raise WeightMismatch(
                f"numerators sum to {sum(ms)} but denominator is {self.denominator}"
            )
        object.__setattr__(self, "numerators", ms)
        object.__setattr__(self, "denominator", int(self.denominator))

    @property
    def fractions(self) -> tuple[Fraction, ...]:
        return tuple(Fraction(m, self.denominator) for m in self.numerators)

    @classmethod
    def from_fractions(cls, fracs) -> "RationalWeights":
        fracs = [Fraction(f) for f in fracs]
        m = lcm(*(f.denominator for f in fracs)) if fracs else 1
        return cls(tuple(f.numerator * (m // f.denominator) for f in fracs), m)


@dataclass(frozen=True)
class FineGrainedState:
    """Even-amplitude state over the enlarged environment.

    ``branch_map[k-1]`` lists the 1-based environment indices carrying
    branch k; together the blocks partition ``1..M``.
    """

    state: BipartiteState
    branch_map: tuple[tuple[int, ...], ...]


def rationalize(weights, tol: float = 1e-9, max_den: int = 1000) -> RationalWeights:
    """Fit floating weights with a common denominator at most ``max_den``.

    Each weight is replaced by its best rational approximant of bounded
    denominator (continued-fraction convergents via
    ``Fraction.limit_denominator``); the approximants must share a
    denominator within the bound, reproduce every weight within ``tol``,
    and sum to one, otherwise ``NoRationalFit`` is raised.
    """
    ws = [float(w) for w in weights]
    if not ws or any(w <= 0 for w in ws):
        raise WeightMismatch(f"weights must be positive, got {weights}")
    if abs(sum(ws) - 1.0) > tol:
        raise WeightMismatch(f"weights sum to {sum(ws)!r}, not 1 within {tol}")
    fracs = [Fraction(w).limit_denominator(max_den) for w in ws]
    m = lcm(*(f.denominator for f in fracs))
    if m > max_den:
        raise NoRationalFit(f"common denominator {m} exceeds bound {max_den}")
    numerators = [f.numerator * (m // f.denominator) for f in fracs]
    if any(n <= 0 for n in numerators) or sum(numerators) != m:
        raise NoRationalFit("bounded-denominator approximants do not form a unit weight vector")
    worst = max(abs(n / m - w) for n, w in zip(numerators, ws))
    if worst > tol:
        raise NoRationalFit(f"best fit with denominator {m} misses a weight by {worst:.3g}")
    return RationalWeights(tuple(numerators), m)


def fine_grain(weights: RationalWeights, n: int) -> FineGrainedState:
    """Spread branch k of an n-branch system over ``m_k`` environment slots.

    Environment indices are allocated consecutively, so the resulting
    amplitude matrix has ``M`` entries of ``1/sqrt(M)`` and the squared
    Schmidt coefficients are exactly the weights.
    """
    if n != len(weights.numerators):
        raise WeightMismatch(f"{len(weights.numerators)} weights cannot fill {n} branches")
    m_total = weights.denominator
    amps = np.zeros((n, m_total), dtype=complex)
    branch_map: list[tuple[int, ...]] = []
    offset = 0
    for k, m_k in enumerate(weights.numerators):
        amps[k, offset : offset + m_k] = 1.0 / np.sqrt(m_total)
        branch_map.append(tuple(range(offset + 1, offset + m_k + 1)))
        offset += m_k
    return FineGrainedState(make_state(amps), tuple(branch_map))


@lru_cache(maxsize=None)
def equal_branch_derivation(
    m_total: int,
) -> tuple[TermSet, EqualityStore, tuple[Fraction, ...]]:
    """Run the equality engine on the even M-branch state, once per grain.

    The fully fine-grained pair (system refined alongside the environment)
    is the diagonal state with M equal branches; adjacent swaps plus the
    full rule set put every branch term in one class, so each sub-branch
    receives exactly ``1/M``.  Results are cached because they depend only
    on M.
    """
    state = make_state(np.eye(m_total, dtype=complex) / np.sqrt(m_total))
    swaps = tuple((k, k + 1) for k in range(1, m_total))
    term_set = generate_terms(state, swaps)
    rules = RuleSet()
    store = saturate(term_set, rules)
    probs = numeric_probabilities(store, state, rules)
    return term_set, store, tuple(p for _, p in probs)


def born_via_counting(weights: RationalWeights) -> list[Fraction]:
    """Exact branch probabilities obtained by counting equal sub-branches.

    Routes through the derivation engine's equal-branch result rather than
    reading squared coefficients: branch k aggregates the ``1/M`` shares of
    the sub-branches listed in its fine-graining block.
    """
    fine = fine_grain(weights, len(weights.numerators))
    _, _, sub_probs = equal_branch_derivation(weights.denominator)
    return [
        sum((sub_probs[j - 1] for j in block), Fraction(0))
        for block in fine.branch_map
    ]
