"""Operator algebra on the truncated qubit (x) magnon Hilbert space.

Basis convention, frozen here and relied on by every downstream module:
the qubit factor comes first and the magnon Fock factor second, with the
excited qubit level at factor index 0. A product basis state |q, n> sits at

    index = q_idx * (n_max + 1) + n,   q_idx = 0 for |e>, 1 for |g>,

so for n_max = 1 the ordering is (e,0), (e,1), (g,0), (g,1). Pauli matrices
then take their textbook form, sigma_z = diag(+1, -1) with sigma_z|e> = +|e>.

All matrices are dense complex128; dimensions stay below ~100 for every
supported use, so sparse storage is deliberately not offered.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import numpy as np

from .errors import DimensionError

__all__ = [
    "SpaceDims",
    "Operator",
    "StateVector",
    "annihilation",
    "qubit_ops",
    "embed",
    "identity",
    "system_ops",
    "expectation",
    "basis_state",
]

QUBIT_EXCITED = 0
QUBIT_GROUND = 1


@dataclass(frozen=True)
class SpaceDims:
    """Dimensions of the two-level (x) truncated-Fock product space."""

    magnon_cutoff: int
    qubit_dim: int = 2

    def __post_init__(self) -> None:
        if self.qubit_dim != 2:
            raise DimensionError(f"qubit_dim must be 2, got {self.qubit_dim}")
        if self.magnon_cutoff < 1:
            raise DimensionError(
                f"magnon_cutoff must be >= 1, got {self.magnon_cutoff}"
            )

    @property
    def magnon_dim(self) -> int:
        return self.magnon_cutoff + 1

    @property
    def total_dim(self) -> int:
        return self.qubit_dim * self.magnon_dim

    def index_of(self, qubit_excited: bool, n: int) -> int:
        """Flat index of the product basis state |e/g, n>."""
        if not 0 <= n <= self.magnon_cutoff:
            raise DimensionError(f"Fock label {n} outside 0..{self.magnon_cutoff}")
        q_idx = QUBIT_EXCITED if qubit_excited else QUBIT_GROUND
        return q_idx * self.magnon_dim + n


def _freeze(arr: np.ndarray) -> np.ndarray:
    out = np.array(arr, dtype=np.complex128, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class Operator:
    """Dense operator on the full product space, immutable after creation."""

    dims: SpaceDims
    mat: np.ndarray

    def __post_init__(self) -> None:
        mat = np.asarray(self.mat)
        d = self.dims.total_dim
        if mat.shape != (d, d):
            raise DimensionError(f"expected shape {(d, d)}, got {mat.shape}")
        if not np.all(np.isfinite(mat)):
            raise ValueError("operator entries must be finite")
        object.__setattr__(self, "mat", _freeze(mat))

    def dag(self) -> "Operator":
        return Operator(self.dims, self.mat.conj().T)

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        return bool(np.max(np.abs(self.mat - self.mat.conj().T)) < tol)

    def _check(self, other: "Operator") -> None:
        if self.dims != other.dims:
            raise DimensionError("operator dimensions do not match")

    def __matmul__(self, other: "Operator") -> "Operator":
        self._check(other)
        return Operator(self.dims, self.mat @ other.mat)

    def __add__(self, other: "Operator") -> "Operator":
        self._check(other)
        return Operator(self.dims, self.mat + other.mat)

    def __sub__(self, other: "Operator") -> "Operator":
        self._check(other)
        return Operator(self.dims, self.mat - other.mat)

    def __neg__(self) -> "Operator":
        return Operator(self.dims, -self.mat)

    def __mul__(self, scalar: complex) -> "Operator":
        return Operator(self.dims, self.mat * scalar)

    __rmul__ = __mul__


@dataclass(frozen=True, eq=False)
class StateVector:
    """Pure state on the full product space."""

    dims: SpaceDims
    vec: np.ndarray

    def __post_init__(self) -> None:
        vec = np.asarray(self.vec)
        if vec.shape != (self.dims.total_dim,):
            raise DimensionError(
                f"expected length {self.dims.total_dim}, got shape {vec.shape}"
            )
        if not np.all(np.isfinite(vec)):
            raise ValueError("state entries must be finite")
        object.__setattr__(self, "vec", _freeze(vec))

    def norm(self) -> float:
        return float(np.linalg.norm(self.vec))

    def density_matrix(self) -> np.ndarray:
        v = self.vec / self.norm()
        return np.outer(v, v.conj())


def annihilation(n_max: int) -> np.ndarray:
    """Magnon-factor ladder operator on Fock levels 0..n_max.

    Entries a[n-1, n] = sqrt(n). The commutator with its adjoint equals the
    identity everywhere except the top corner (n_max, n_max), where the
    truncation leaves -n_max; callers are expected to keep population out of
    the top level (see liouville.converged_cutoff).
    """
    if n_max < 1:
        raise DimensionError(f"n_max must be >= 1, got {n_max}")
    return np.diag(np.sqrt(np.arange(1, n_max + 1, dtype=np.float64)), 1).astype(
        np.complex128
    )


def qubit_ops() -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Qubit-factor (sigma_minus, sigma_plus, sigma_z) with |e> at index 0."""
    sm = np.array([[0, 0], [1, 0]], dtype=np.complex128)
    sp = sm.conj().T
    sz = np.array([[1, 0], [0, -1]], dtype=np.complex128)
    return sm, sp, sz


def embed(factor_op: np.ndarray, which_factor: str, dims: SpaceDims) -> Operator:
    """Lift a single-factor matrix to the product space (tensor with identity)."""
    factor_op = np.asarray(factor_op, dtype=np.complex128)
    if which_factor == "qubit":
        if factor_op.shape != (2, 2):
            raise DimensionError(f"qubit factor must be 2x2, got {factor_op.shape}")
        full = np.kron(factor_op, np.eye(dims.magnon_dim))
    elif which_factor == "magnon":
        md = dims.magnon_dim
        if factor_op.shape != (md, md):
            raise DimensionError(
                f"magnon factor must be {md}x{md}, got {factor_op.shape}"
            )
        full = np.kron(np.eye(2), factor_op)
    else:
        raise ValueError(f"which_factor must be 'qubit' or 'magnon', got {which_factor!r}")
    return Operator(dims, full)


def identity(dims: SpaceDims) -> Operator:
    return Operator(dims, np.eye(dims.total_dim, dtype=np.complex128))


class SystemOps(NamedTuple):
    """Full-space operators every model builder needs."""

    m: Operator
    m_dag: Operator
    sm: Operator
    sp: Operator
    sz: Operator
    num: Operator          # m_dag @ m
    num_num_minus_1: Operator  # m_dag m_dag m m, for g2 numerators


@lru_cache(maxsize=None)
def system_ops(n_max: int) -> SystemOps:
    dims = SpaceDims(n_max)
    a = annihilation(n_max)
    sm_f, sp_f, sz_f = qubit_ops()
    m = embed(a, "magnon", dims)
    m_dag = m.dag()
    sm = embed(sm_f, "qubit", dims)
    return SystemOps(
        m=m,
        m_dag=m_dag,
        sm=sm,
        sp=sm.dag(),
        sz=embed(sz_f, "qubit", dims),
        num=m_dag @ m,
        num_num_minus_1=m_dag @ m_dag @ m @ m,
    )


def _as_matrix(x) -> np.ndarray:
    """Accept Operator, DensityMatrix, or a bare ndarray."""
    mat = getattr(x, "mat", x)
    return np.asarray(mat)


def expectation(rho, op) -> complex:
    """Tr(rho A). Both arguments may be wrapped or bare matrices."""
    r = _as_matrix(rho)
    a = _as_matrix(op)
    if r.shape != a.shape or r.ndim != 2 or r.shape[0] != r.shape[1]:
        raise DimensionError(f"incompatible shapes {r.shape} and {a.shape}")
    # Tr(rho A) without forming the product matrix
    return complex(np.sum(r.T * a))


def basis_state(dims: SpaceDims, qubit_excited: bool, n: int) -> StateVector:
    vec = np.zeros(dims.total_dim, dtype=np.complex128)
    vec[dims.index_of(qubit_excited, n)] = 1.0
    return StateVector(dims, vec)
