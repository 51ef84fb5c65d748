"""Schmidt decomposition of bipartite pure states.

The decomposition ``amps = sum_k lambda_k s_k e_k^T`` is computed from the
eigendecomposition of the system-side reduced density matrix, with env
vectors recovered as ``e_k = amps^T conj(s_k) / lambda_k``.  Branch indices
are 1-based everywhere in the public interface.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import ParseError
from .states import BipartiteState, _fmt17, make_state, reduced_density_system

SCHMIDT_CUTOFF = 1e-12
DEGENERACY_TOL = 1e-9


@dataclass(frozen=True)
class SchmidtDecomposition:
    """Nonnegative coefficients with paired orthonormal system/env vectors.

    Coefficients are sorted descending, all above ``SCHMIDT_CUTOFF``, and
    square-sum to 1.  ``system_vectors`` and ``env_vectors`` hold one column
    per branch.
    """

    coefficients: np.ndarray
    system_vectors: np.ndarray
    env_vectors: np.ndarray

    def __post_init__(self) -> None:
        lam = np.array(self.coefficients, dtype=float)
        svecs = np.array(self.system_vectors, dtype=complex)
        evecs = np.array(self.env_vectors, dtype=complex)
        if lam.ndim != 1 or lam.size == 0:
            raise ValueError("coefficients must be a nonempty 1-d array")
        r = lam.size
        if svecs.ndim != 2 or evecs.ndim != 2 or svecs.shape[1] != r or evecs.shape[1] != r:
            raise ValueError("vector blocks must supply one column per coefficient")
        if np.any(np.diff(lam) > 0):
            raise ValueError("coefficients must be sorted descending")
        if np.any(lam <= SCHMIDT_CUTOFF):
            raise ValueError(f"coefficients must exceed the zero cutoff {SCHMIDT_CUTOFF}")
        if abs(float(np.sum(lam**2)) - 1.0) > 1e-9:
            raise ValueError("squared coefficients must sum to 1 within 1e-9")
        for name, block in (("system_vectors", svecs), ("env_vectors", evecs)):
            gram = block.conj().T @ block
            if np.max(np.abs(gram - np.eye(r))) > 1e-9:
                raise ValueError(f"{name} columns are not orthonormal within 1e-9")
        for name, arr in (("coefficients", lam), ("system_vectors", svecs), ("env_vectors", evecs)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def rank(self) -> int:
        return self.coefficients.size


def schmidt(state: BipartiteState) -> SchmidtDecomposition:
    """Compute the Schmidt form of a bipartite pure state.

    Eigenvalues of the reduced density matrix that sit within machine noise
    of zero are treated as exact zeros, so rank-deficient states come back
    with their true rank.  Each system vector is phased so its first
    largest-magnitude component is real nonnegative, with the compensating
    phase pushed into the paired environment vector; output is therefore
    deterministic up to eigensolver freedom inside degenerate blocks.
    """
    rho = reduced_density_system(state)
    evals, evecs = np.linalg.eigh(rho)
    evals = evals[::-1]
    evecs = evecs[:, ::-1]
    noise_floor = rho.shape[0] * np.finfo(float).eps * max(float(evals[0]), 0.0)
    keep = evals > max(SCHMIDT_CUTOFF**2, noise_floor)
    lam = np.sqrt(evals[keep])
    svecs = evecs[:, keep].copy()
    for k in range(lam.size):
        pivot = int(np.argmax(np.abs(svecs[:, k])))
        phase = svecs[pivot, k]
        svecs[:, k] *= np.conj(phase) / abs(phase)
    evecs_out = state.amps.T @ svecs.conj() / lam[np.newaxis, :]
    return SchmidtDecomposition(lam, svecs, evecs_out)


def reconstruct(decomposition: SchmidtDecomposition) -> BipartiteState:
    """Rebuild the state ``sum_k lambda_k s_k e_k^T`` from a decomposition."""
    amps = (decomposition.system_vectors * decomposition.coefficients) @ decomposition.env_vectors.T
    return make_state(amps, normalize=True)


def is_even(decomposition: SchmidtDecomposition, tol: float = DEGENERACY_TOL) -> bool:
    """True when all Schmidt coefficients agree within ``tol``."""
    lam = decomposition.coefficients
    return bool(lam[0] - lam[-1] <= tol)


def degeneracy_blocks(
    decomposition: SchmidtDecomposition, tol: float = DEGENERACY_TOL
) -> list[list[int]]:
    """Partition branch indices 1..rank into maximal equal-coefficient blocks.

    Within a block all coefficients lie within ``tol`` of the block's leading
    value, so members agree pairwise; blocks come out ordered by descending
    coefficient.
    """
    lam = decomposition.coefficients
    blocks: list[list[int]] = []
    current = [1]
    anchor = lam[0]
    for k in range(2, lam.size + 1):
        if anchor - lam[k - 1] <= tol:
            current.append(k)
        else:
            blocks.append(current)
            current = [k]
            anchor = lam[k - 1]
    blocks.append(current)
    return blocks


# ---------------------------------------------------------------------------
# Serialization: {"lambda": [...], "s_vecs": [...], "e_vecs": [...]} with one
# row per branch vector and the same [re, im] cell convention as state files.
# ---------------------------------------------------------------------------

def _vecs_to_json(block: np.ndarray) -> str:
    rows = []
    for k in range(block.shape[1]):
        cells = ", ".join(f"[{_fmt17(c.real)}, {_fmt17(c.imag)}]" for c in block[:, k])
        rows.append(f"[{cells}]")
    return "[%s]" % ", ".join(rows)


def decomposition_to_json(decomposition: SchmidtDecomposition) -> str:
    lam = ", ".join(_fmt17(v) for v in decomposition.coefficients)
    return '{"lambda": [%s], "s_vecs": %s, "e_vecs": %s}' % (
        lam,
        _vecs_to_json(decomposition.system_vectors),
        _vecs_to_json(decomposition.env_vectors),
    )


def decomposition_from_json(text: str) -> SchmidtDecomposition:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from exc
    try:
        lam = np.array(obj["lambda"], dtype=float)
        svecs = np.array(
            [[complex(c[0], c[1]) for c in row] for row in obj["s_vecs"]], dtype=complex
        ).T
        evecs = np.array(
            [[complex(c[0], c[1]) for c in row] for row in obj["e_vecs"]], dtype=complex
        ).T
    except (KeyError, TypeError, IndexError, ValueError) as exc:
        raise ParseError(f"malformed decomposition document: {exc}") from exc
    return SchmidtDecomposition(lam, svecs, evecs)
