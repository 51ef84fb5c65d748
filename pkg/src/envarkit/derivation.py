"""Rule-based equality engine over symbolic probability terms.

Probabilities are uninterpreted symbols ``p(X:k; expr)`` naming the chance
of Schmidt branch ``k`` on side ``X`` (system or environment) when the pair
is in the state described by ``expr``, a transcript of swap/phase
transforms applied to a named base state.  The engine never evaluates a
probability; it only merges terms that the enabled assumption rules declare
equal, so each probabilistic ingredient of the equal-likelihood argument is
an explicit, switchable rule:

* ``pairing`` - branch partners in the Schmidt expansion are equally likely.
* ``env_locality`` - environment-branch probabilities are untouched by
  system-side transforms (and ``sys_locality`` symmetrically).
* ``state_function`` - probabilities depend on the composite state vector
  only, so transcripts replaying to the same state carry the same terms.
* ``normalization`` - branch probabilities of one state sum to 1; this is
  the extra step that turns an all-equal class into the number ``1/d``.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, replace
from fractions import Fraction

import numpy as np

from .envariance import phase_transform, swap_transform
from .errors import (
    IncompleteDerivation,
    IndexOutOfRange,
    UnevenCoefficients,
    UnknownTerm,
)
from .schmidt import DEGENERACY_TOL, SchmidtDecomposition, schmidt
from .states import BipartiteState, apply_env, apply_system

STATE_EQ_TOL = 1e-9
_PAIR_TOL = 1e-9

RULE_NAMES = ("PAIRING", "ENV_LOCALITY", "SYS_LOCALITY", "STATE_FUNCTION", "NORMALIZATION")


# ---------------------------------------------------------------------------
# Symbolic terms
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SystemSwap:
    i: int
    j: int

    def __str__(self) -> str:
        return f"swapS({self.i},{self.j})"


@dataclass(frozen=True)
class EnvSwap:
    i: int
    j: int

    def __str__(self) -> str:
        return f"swapE({self.i},{self.j})"


@dataclass(frozen=True)
class SystemPhase:
    indices: tuple[int, ...]
    betas: tuple[float, ...]

    def __str__(self) -> str:
        args = ",".join(f"{i}:{b:g}" for i, b in zip(self.indices, self.betas))
        return f"phaseS({args})"


@dataclass(frozen=True)
class EnvPhase:
    indices: tuple[int, ...]
    betas: tuple[float, ...]

    def __str__(self) -> str:
        args = ",".join(f"{i}:{b:g}" for i, b in zip(self.indices, self.betas))
        return f"phaseE({args})"


Transform = SystemSwap | EnvSwap | SystemPhase | EnvPhase

_SYSTEM_SIDE = (SystemSwap, SystemPhase)
_ENV_SIDE = (EnvSwap, EnvPhase)


@dataclass(frozen=True)
class StateExpr:
    """Transcript of transforms applied (in order) to a named base state."""

    transforms: tuple[Transform, ...] = ()
    base: str = "psi"

    def then(self, transform: Transform) -> "StateExpr":
        return replace(self, transforms=self.transforms + (transform,))

    def parent(self) -> "StateExpr":
        return replace(self, transforms=self.transforms[:-1])

    def __str__(self) -> str:
        parts = [str(t) for t in reversed(self.transforms)] + [self.base]
        return "·".join(parts)


@dataclass(frozen=True)
class ProbTerm:
    """Symbolic probability of Schmidt branch ``index`` on ``subsystem``."""

    subsystem: str  # "S" or "E"
    index: int      # 1-based branch label of the base state's Schmidt form
    state: StateExpr

    def __post_init__(self) -> None:
        if self.subsystem not in ("S", "E"):
            raise ValueError(f"subsystem must be 'S' or 'E', got {self.subsystem!r}")

    def __str__(self) -> str:
        return f"p({self.subsystem}:{self.index}; {self.state})"


@dataclass(frozen=True)
class RuleSet:
    """Switchable assumption rules; all merging rules default to on."""

    pairing: bool = True
    env_locality: bool = True
    sys_locality: bool = True
    state_function: bool = True
    normalization: bool = True

    def without(self, name: str) -> "RuleSet":
        field = name.lower()
        if field.upper() not in RULE_NAMES:
            raise ValueError(f"unknown rule {name!r}; expected one of {RULE_NAMES}")
        return replace(self, **{field: False})

    def enabled(self) -> tuple[str, ...]:
        return tuple(n for n in RULE_NAMES if getattr(self, n.lower()))


# ---------------------------------------------------------------------------
# Replay: transcripts to concrete states
# ---------------------------------------------------------------------------

def replay(
    expr: StateExpr,
    base_state: BipartiteState,
    decomposition: SchmidtDecomposition | None = None,
) -> BipartiteState:
    """Evaluate a transcript to a concrete state.

    Swap and phase tags are interpreted in the Schmidt bases of the *base*
    state, so branch labels keep their meaning along the whole transcript.
    """
    dec = decomposition if decomposition is not None else schmidt(base_state)
    state = base_state
    for t in expr.transforms:
        if isinstance(t, SystemSwap):
            state = apply_system(swap_transform(t.i, t.j, dec.system_vectors), state)
        elif isinstance(t, EnvSwap):
            state = apply_env(swap_transform(t.i, t.j, dec.env_vectors), state)
        elif isinstance(t, SystemPhase):
            state = apply_system(phase_transform(t.indices, t.betas, dec.system_vectors), state)
        elif isinstance(t, EnvPhase):
            state = apply_env(phase_transform(t.indices, t.betas, dec.env_vectors), state)
        else:
            raise TypeError(f"unknown transform tag {t!r}")
    return state


def born_value(
    term: ProbTerm,
    base_state: BipartiteState,
    decomposition: SchmidtDecomposition | None = None,
) -> float:
    """Squared-amplitude probability of a term's branch in its replayed state.

    This is the independent oracle used to audit the engine: terms the
    engine merges must agree on this value, though the engine itself never
    consults it.
    """
    dec = decomposition if decomposition is not None else schmidt(base_state)
    if not 1 <= term.index <= dec.rank:
        raise IndexOutOfRange(f"branch {term.index} outside 1..{dec.rank}")
    amps = replay(term.state, base_state, dec).amps
    if term.subsystem == "S":
        vec = dec.system_vectors[:, term.index - 1]
        return float(np.linalg.norm(vec.conj() @ amps) ** 2)
    vec = dec.env_vectors[:, term.index - 1]
    return float(np.linalg.norm(amps @ vec.conj()) ** 2)


# ---------------------------------------------------------------------------
# Term population
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TermSet:
    """Terms for one derivation run plus the context needed to replay them."""

    terms: tuple[ProbTerm, ...]
    exprs: tuple[StateExpr, ...]
    branches: tuple[int, ...]
    base_state: BipartiteState
    decomposition: SchmidtDecomposition

    def __iter__(self):
        return iter(self.terms)

    def __len__(self) -> int:
        return len(self.terms)


def generate_terms(state: BipartiteState, swaps) -> TermSet:
    """Emit the probability terms the swap argument talks about.

    For each swap pair ``(i, j)`` the transcript visits the base state, the
    state after the system swap, and the state after the environment
    counterswap; terms cover both subsystems and every branch at each stop.
    Swapped branches must carry equal coefficients, otherwise swapping has
    no claim to preserve the probability bookkeeping.
    """
    dec = schmidt(state)
    lam = dec.coefficients
    r = dec.rank
    exprs: list[StateExpr] = [StateExpr()]
    for i, j in swaps:
        if i == j:
            raise ValueError("swap indices must differ")
        for idx in (i, j):
            if not 1 <= idx <= r:
                raise IndexOutOfRange(f"swap index {idx} outside 1..{r}")
        gap = abs(float(lam[i - 1] - lam[j - 1]))
        if gap > DEGENERACY_TOL:
            raise UnevenCoefficients(
                f"branches {i} and {j} have coefficients differing by {gap:.3g}"
            )
        swapped = StateExpr().then(SystemSwap(i, j))
        exprs.append(swapped)
        exprs.append(swapped.then(EnvSwap(i, j)))
    branches = tuple(range(1, r + 1))
    terms = tuple(
        ProbTerm(sub, k, expr) for expr in exprs for sub in ("S", "E") for k in branches
    )
    return TermSet(terms, tuple(exprs), branches, state, dec)


# ---------------------------------------------------------------------------
# Equality store: union-find with a merge trace
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MergeRecord:
    rule: str
    left: ProbTerm
    right: ProbTerm


class EqualityStore:
    """Union-find over probability terms recording every effective merge.

    Classes only ever grow; the trace lists exactly the merges that changed
    the partition, so replaying it reproduces the partition and the merge
    graph is a forest (paths between terms are unique).
    """

    def __init__(self, terms=()) -> None:
        self._parent: dict[ProbTerm, ProbTerm] = {}
        self._order: dict[ProbTerm, int] = {}
        self.trace: list[MergeRecord] = []
        for term in terms:
            self.add(term)

    def add(self, term: ProbTerm) -> None:
        if term not in self._parent:
            self._parent[term] = term
            self._order[term] = len(self._order)

    def _require(self, term: ProbTerm) -> None:
        if term not in self._parent:
            raise UnknownTerm(str(term))

    def find(self, term: ProbTerm) -> ProbTerm:
        self._require(term)
        root = term
        while self._parent[root] is not root:
            root = self._parent[root]
        while self._parent[term] is not root:
            term, self._parent[term] = self._parent[term], root
        return root

    def merge(self, rule: str, left: ProbTerm, right: ProbTerm) -> bool:
        """Union the two classes; record and report whether anything changed."""
        ra, rb = self.find(left), self.find(right)
        if ra is rb:
            return False
        if self._order[rb] < self._order[ra]:
            ra, rb = rb, ra
        self._parent[rb] = ra
        self.trace.append(MergeRecord(rule, left, right))
        return True

    def same_class(self, left: ProbTerm, right: ProbTerm) -> bool:
        return self.find(left) is self.find(right)

    def classes(self) -> list[list[ProbTerm]]:
        grouped: dict[ProbTerm, list[ProbTerm]] = {}
        for term in self._order:
            grouped.setdefault(self.find(term), []).append(term)
        return list(grouped.values())

    def minimal_trace(self, left: ProbTerm, right: ProbTerm) -> list[MergeRecord]:
        """Shortest chain of recorded merges connecting two equal terms."""
        self._require(left)
        self._require(right)
        if left == right:
            return []
        adjacency: dict[ProbTerm, list[tuple[MergeRecord, ProbTerm]]] = {}
        for record in self.trace:
            adjacency.setdefault(record.left, []).append((record, record.right))
            adjacency.setdefault(record.right, []).append((record, record.left))
        came_from: dict[ProbTerm, tuple[ProbTerm, MergeRecord]] = {left: (left, None)}
        queue = deque([left])
        while queue:
            node = queue.popleft()
            if node == right:
                break
            for record, other in adjacency.get(node, ()):
                if other not in came_from:
                    came_from[other] = (node, record)
                    queue.append(other)
        if right not in came_from:
            raise UnknownTerm(f"no merge chain connects {left} and {right}")
        path: list[MergeRecord] = []
        node = right
        while node != left:
            node, record = came_from[node]
            path.append(record)
        path.reverse()
        return path

    @classmethod
    def from_trace(cls, terms, trace) -> "EqualityStore":
        """Rebuild a store by replaying a recorded merge trace."""
        store = cls(terms)
        for record in trace:
            store.merge(record.rule, record.left, record.right)
        return store


# ---------------------------------------------------------------------------
# Saturation
# ---------------------------------------------------------------------------

def _schmidt_frame(amps: np.ndarray, dec: SchmidtDecomposition) -> np.ndarray:
    # coefficient of |s_k>|e_l> in the base state's Schmidt bases
    return dec.system_vectors.conj().T @ amps @ np.conj(dec.env_vectors)


def saturate(term_set: TermSet, rules: RuleSet) -> EqualityStore:
    """Apply every enabled merging rule to fixpoint over the term set.

    Each rule's applicability depends only on the replayed states, never on
    the current partition, so a single deterministic sweep saturates.
    """
    store = EqualityStore(term_set.terms)
    dec = term_set.decomposition
    cache = {
        expr: replay(expr, term_set.base_state, dec).amps for expr in term_set.exprs
    }
    expr_index = set(term_set.exprs)

    if rules.pairing:
        for expr in term_set.exprs:
            frame = _schmidt_frame(cache[expr], dec)
            for k in term_set.branches:
                row = frame[k - 1]
                partner = int(np.argmax(np.abs(row)))
                off = np.sqrt(max(float(np.sum(np.abs(row) ** 2) - np.abs(row[partner]) ** 2), 0.0))
                if off <= _PAIR_TOL:
                    store.merge(
                        "PAIRING",
                        ProbTerm("S", k, expr),
                        ProbTerm("E", partner + 1, expr),
                    )

    if rules.env_locality:
        for expr in term_set.exprs:
            if expr.transforms and isinstance(expr.transforms[-1], _SYSTEM_SIDE):
                parent = expr.parent()
                if parent in expr_index:
                    for k in term_set.branches:
                        store.merge(
                            "ENV_LOCALITY",
                            ProbTerm("E", k, expr),
                            ProbTerm("E", k, parent),
                        )

    if rules.sys_locality:
        for expr in term_set.exprs:
            if expr.transforms and isinstance(expr.transforms[-1], _ENV_SIDE):
                parent = expr.parent()
                if parent in expr_index:
                    for k in term_set.branches:
                        store.merge(
                            "SYS_LOCALITY",
                            ProbTerm("S", k, expr),
                            ProbTerm("S", k, parent),
                        )

    if rules.state_function:
        exprs = term_set.exprs
        for i in range(len(exprs)):
            for j in range(i + 1, len(exprs)):
                if float(np.linalg.norm(cache[exprs[i]] - cache[exprs[j]])) <= STATE_EQ_TOL:
                    for sub in ("S", "E"):
                        for k in term_set.branches:
                            store.merge(
                                "STATE_FUNCTION",
                                ProbTerm(sub, k, exprs[j]),
                                ProbTerm(sub, k, exprs[i]),
                            )

    return store


def equal_probabilities(
    store: EqualityStore, left: ProbTerm, right: ProbTerm
) -> tuple[bool, list[MergeRecord]]:
    """Class query with the minimal merge chain connecting the two terms."""
    same = store.same_class(left, right)
    chain = store.minimal_trace(left, right) if same else []
    return same, chain


def numeric_probabilities(
    store: EqualityStore, state: BipartiteState, rules: RuleSet
) -> list[tuple[int, Fraction]]:
    """Exact branch probabilities, emitted only when the derivation closed.

    Requires every system-branch term of the base state to sit in a single
    class and the normalization rule to be enabled; each branch then gets
    exactly ``1/d``.  Anything less raises ``IncompleteDerivation`` - the
    engine never invents numbers.
    """
    if not rules.normalization:
        raise IncompleteDerivation("normalization rule is disabled; no numbers can be emitted")
    d = schmidt(state).rank
    base = StateExpr()
    branch_terms = [ProbTerm("S", k, base) for k in range(1, d + 1)]
    roots = {store.find(t) for t in branch_terms}
    if len(roots) != 1:
        raise IncompleteDerivation(
            f"{len(roots)} distinct classes cover the {d} branch terms; equality not derived"
        )
    return [(k, Fraction(1, d)) for k in range(1, d + 1)]
