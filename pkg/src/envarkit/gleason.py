"""Frame functions on unit vectors and the basis-sum audit.

A frame function assigns a nonnegative real to every unit vector; the
normalization condition demands the values over any orthonormal basis sum
to 1.  The audit samples seeded Haar-random bases and reports the worst
deviation - it is a falsifier for candidate probability assignments, not a
proof of anything.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DimensionMismatch, NonOrthonormalBasis

AUDIT_TOL = 1e-9
_BASIS_TOL = 1e-10


@dataclass(frozen=True)
class BasisSample:
    """Orthonormal basis (columns) remembered together with its seed."""

    vectors: np.ndarray
    seed: int

    def __post_init__(self) -> None:
        vecs = np.array(self.vectors, dtype=complex)
        if vecs.ndim != 2 or vecs.shape[0] != vecs.shape[1] or vecs.shape[0] < 2:
            raise ValueError(f"basis must be square with dim >= 2, got shape {vecs.shape}")
        defect = float(np.max(np.abs(vecs.conj().T @ vecs - np.eye(vecs.shape[0]))))
        if defect > _BASIS_TOL:
            raise NonOrthonormalBasis(f"basis deviates from orthonormality by {defect:.3g}")
        vecs.setflags(write=False)
        object.__setattr__(self, "vectors", vecs)

    @property
    def dim(self) -> int:
        return self.vectors.shape[0]


def random_basis(dim: int, seed: int) -> BasisSample:
    """Haar-distributed orthonormal basis from a seeded complex Gaussian.

    QR of a Ginibre matrix with the R-diagonal rephased to be positive; that
    phase convention makes the factorization (and hence the sample) unique.
    """
    if dim < 2:
        raise ValueError(f"basis dimension must be at least 2, got {dim}")
    rng = np.random.default_rng(seed)
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    diag = np.diagonal(r)
    q = q * (diag / np.abs(diag))
    return BasisSample(q, seed)


@dataclass(frozen=True)
class QuadraticFrame:
    """``p(v) = <v| rho |v>`` for a Hermitian PSD trace-1 matrix rho."""

    rho: np.ndarray

    def __post_init__(self) -> None:
        rho = np.array(self.rho, dtype=complex)
        if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
            raise ValueError(f"rho must be square, got shape {rho.shape}")
        if np.max(np.abs(rho - rho.conj().T)) > 1e-10:
            raise ValueError("rho must be Hermitian within 1e-10")
        if abs(float(np.trace(rho).real) - 1.0) > 1e-10:
            raise ValueError("rho must have unit trace within 1e-10")
        if float(np.min(np.linalg.eigvalsh(rho))) < -1e-10:
            raise ValueError("rho must be positive semidefinite within 1e-10")
        rho.setflags(write=False)
        object.__setattr__(self, "rho", rho)

    @property
    def kind(self) -> str:
        return "quadratic"

    @property
    def dim(self) -> int | None:
        return self.rho.shape[0]

    def value(self, v: np.ndarray) -> float:
        return float(np.real(np.conj(v) @ self.rho @ v))


@dataclass(frozen=True)
class PowerOverlapFrame:
    """``p(v) = |<v|w>|^alpha``; alpha = 2 is the quadratic (Born) form."""

    w: np.ndarray
    alpha: float

    def __post_init__(self) -> None:
        w = np.array(self.w, dtype=complex)
        if w.ndim != 1 or abs(float(np.linalg.norm(w)) - 1.0) > 1e-10:
            raise ValueError("w must be a unit vector")
        w.setflags(write=False)
        object.__setattr__(self, "w", w)

    @property
    def kind(self) -> str:
        return f"power:{self.alpha:g}"

    @property
    def dim(self) -> int | None:
        return self.w.shape[0]

    def value(self, v: np.ndarray) -> float:
        return float(np.abs(np.vdot(v, self.w)) ** self.alpha)


@dataclass(frozen=True)
class CustomFrame:
    """Arbitrary nonnegative evaluator on unit vectors."""

    evaluator: Callable[[np.ndarray], float]
    label: str = "custom"

    @property
    def kind(self) -> str:
        return self.label

    @property
    def dim(self) -> int | None:
        return None

    def value(self, v: np.ndarray) -> float:
        return float(self.evaluator(v))


FrameFunction = QuadraticFrame | PowerOverlapFrame | CustomFrame


def frame_sum(p: FrameFunction, basis: BasisSample) -> float:
    """Sum of ``p`` over the basis vectors."""
    if p.dim is not None and p.dim != basis.dim:
        raise DimensionMismatch(f"frame function dim {p.dim} != basis dim {basis.dim}")
    return float(sum(p.value(basis.vectors[:, i]) for i in range(basis.dim)))


@dataclass(frozen=True)
class AuditReport:
    kind: str
    dim: int
    trials: int
    max_dev: float
    mean_dev: float
    worst_basis_seed: int
    verdict: str

    def as_dict(self) -> dict:
        return {
            "kind": self.kind,
            "dim": self.dim,
            "trials": self.trials,
            "max_dev": self.max_dev,
            "mean_dev": self.mean_dev,
            "worst_basis_seed": self.worst_basis_seed,
            "verdict": self.verdict,
        }


def audit(
    p: FrameFunction, dim: int, trials: int, seed: int = 0, tol: float = AUDIT_TOL
) -> AuditReport:
    """Check the basis-sum condition over seeded Haar-random bases.

    Dimension 3 is required: the normalization condition only pins down
    quadratic forms in dimension greater than two.
    """
    if dim < 3:
        raise ValueError("frame-function audit requires dimension greater than two")
    if trials < 1:
        raise ValueError("trials must be at least 1")
    max_dev = -1.0
    total = 0.0
    worst_seed = seed
    for t in range(trials):
        basis = random_basis(dim, seed + t)
        dev = abs(frame_sum(p, basis) - 1.0)
        total += dev
        if dev > max_dev:
            max_dev = dev
            worst_seed = seed + t
    verdict = "CONSISTENT" if max_dev <= tol else "VIOLATION"
    return AuditReport(p.kind, dim, trials, max_dev, total / trials, worst_seed, verdict)
