"""Liouvillian assembly, steady-state solve, and master-equation propagation.

Vectorization is column-stacking throughout: vec(rho) stacks the columns of
rho, so vec(A X B) = (B^T kron A) vec(X) and the master equation becomes
d vec(rho)/dt = L vec(rho) with

    L = -i (I kron H - H^T kron I)
        + sum_k [ conj(C_k) kron C_k
                  - (I kron C_k'C_k)/2 - ((C_k'C_k)^T kron I)/2 ]

where C_k are the rate-scaled collapse operators. Trace preservation shows
up as vec(I) being a left null vector of L, which the test suite asserts.

The steady state is obtained by replacing one redundant row of L with the
vectorized trace constraint and doing a direct dense solve; an SVD null-space
fallback handles the (unexpected) singular cases. Time propagation uses an
explicit adaptive Runge-Kutta integrator and serves as an independent check
on the algebraic solve.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
import scipy.linalg as sla
from scipy.integrate import solve_ivp

from .errors import (
    DimensionError,
    NoExcitationError,
    NonUniqueSteadyStateError,
    ParameterError,
    SteadyStateConvergenceError,
    StiffnessError,
    TruncationError,
)
from .hilbert import Operator, SpaceDims, _freeze, system_ops
from .model import CollapseOp, SystemParams, build_collapse_ops, build_hamiltonian

__all__ = [
    "DensityMatrix",
    "Liouvillian",
    "vec",
    "unvec",
    "build_liouvillian",
    "steady_state",
    "steady_state_for",
    "evolve",
    "converged_cutoff",
    "converged_solve",
    "trace_distance",
    "HARD_CUTOFF_CAP",
    "CUTOFF_STEP",
]

RESIDUAL_TOL = 1e-10
HARD_CUTOFF_CAP = 40
CUTOFF_STEP = 4
TOP_POPULATION_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """System density matrix on the full product space.

    residual is set by steady_state (max-norm of L vec(rho)) and left None
    for states produced any other way.
    """

    dims: SpaceDims
    mat: np.ndarray
    residual: float | None = None

    def __post_init__(self) -> None:
        mat = np.asarray(self.mat, dtype=np.complex128)
        d = self.dims.total_dim
        if mat.shape != (d, d):
            raise DimensionError(f"expected shape {(d, d)}, got {mat.shape}")
        object.__setattr__(self, "mat", _freeze(mat))

    def trace(self) -> complex:
        return complex(np.trace(self.mat))

    def purity(self) -> float:
        return float(np.real(np.trace(self.mat @ self.mat)))

    def hermiticity_defect(self) -> float:
        return float(np.max(np.abs(self.mat - self.mat.conj().T)))

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(0.5 * (self.mat + self.mat.conj().T))[0])

    def validate(
        self,
        herm_tol: float = 1e-10,
        trace_tol: float = 1e-10,
        eig_floor: float = -1e-10,
    ) -> None:
        """Raise ValueError if Hermiticity, trace, or positivity floors fail."""
        if self.hermiticity_defect() >= herm_tol:
            raise ValueError(
                f"density matrix not Hermitian: defect {self.hermiticity_defect():.3e}"
            )
        if abs(self.trace() - 1.0) >= trace_tol:
            raise ValueError(f"trace deviates from 1: {self.trace()}")
        if self.min_eigenvalue() < eig_floor:
            raise ValueError(f"negative eigenvalue {self.min_eigenvalue():.3e}")


@dataclass(frozen=True, eq=False)
class Liouvillian:
    """Matrix generator acting on column-stacked density matrices."""

    dims: SpaceDims
    mat: np.ndarray

    def __post_init__(self) -> None:
        mat = np.asarray(self.mat, dtype=np.complex128)
        d2 = self.dims.total_dim ** 2
        if mat.shape != (d2, d2):
            raise DimensionError(f"expected shape {(d2, d2)}, got {mat.shape}")
        object.__setattr__(self, "mat", _freeze(mat))


def vec(rho: np.ndarray) -> np.ndarray:
    """Column-stack a matrix."""
    return np.asarray(rho).reshape(-1, order="F")


def unvec(v: np.ndarray, d: int) -> np.ndarray:
    """Inverse of vec for a d x d matrix."""
    return np.asarray(v).reshape((d, d), order="F")


def _trace_row(d: int) -> np.ndarray:
    row = np.zeros(d * d, dtype=np.complex128)
    row[:: d + 1] = 1.0
    return row


def build_liouvillian(h: Operator, collapse_ops: list[CollapseOp]) -> Liouvillian:
    hm = h.mat
    d = hm.shape[0]
    eye = np.eye(d, dtype=np.complex128)
    # accumulate kron(a, b) terms through one scratch buffer; the 4D view of
    # the accumulator indexes as L[i1, i2, j1, j2] = sum a[i1, j1] b[i2, j2]
    lmat = np.zeros((d * d, d * d), dtype=np.complex128)
    acc = lmat.reshape(d, d, d, d)
    scratch = np.empty((d, d, d, d), dtype=np.complex128)

    def add_kron(a: np.ndarray, b: np.ndarray) -> None:
        np.multiply(a[:, None, :, None], b[None, :, None, :], out=scratch)
        acc += scratch

    add_kron(-1j * eye, hm)
    add_kron(1j * hm.T, eye)
    for c in collapse_ops:
        if c.operator.dims != h.dims:
            raise DimensionError("collapse operator dims do not match Hamiltonian")
        if c.rate == 0.0:
            continue
        cm = c.scaled()
        cdc = cm.conj().T @ cm
        add_kron(cm.conj(), cm)
        add_kron(-0.5 * eye, cdc)
        add_kron(-0.5 * cdc.T, eye)
    return Liouvillian(h.dims, lmat)


def _null_vector_by_svd(lmat: np.ndarray) -> np.ndarray:
    u, s, vh = sla.svd(lmat)
    scale = s[0] if s[0] > 0 else 1.0
    if s[-2] / scale < 1e-12:
        raise NonUniqueSteadyStateError(
            "Liouvillian null space is not one-dimensional "
            f"(two smallest singular values {s[-1]:.3e}, {s[-2]:.3e})"
        )
    return vh[-1].conj()


def steady_state(liouv: Liouvillian, residual_tol: float = RESIDUAL_TOL) -> DensityMatrix:
    """Unique steady state of the Liouvillian.

    Row 0 of L (redundant given trace preservation) is replaced by the trace
    constraint and the system solved directly. The result is hermitized,
    trace-normalized, and checked against the original L to residual_tol.
    """
    lmat = liouv.mat
    d = liouv.dims.total_dim
    a = lmat.copy()
    a[0, :] = _trace_row(d)
    b = np.zeros(d * d, dtype=np.complex128)
    b[0] = 1.0

    try:
        x = sla.solve(a, b, overwrite_a=True, overwrite_b=True, check_finite=False)
    except sla.LinAlgError:
        x = None
    if x is None or not np.all(np.isfinite(x)):
        x = _null_vector_by_svd(lmat)

    rho = unvec(x, d)
    rho = 0.5 * (rho + rho.conj().T)
    tr = np.trace(rho)
    if abs(tr) < 1e-14:
        raise SteadyStateConvergenceError("steady-state candidate has zero trace")
    rho = rho / tr

    residual = float(np.max(np.abs(lmat @ vec(rho))))
    if residual > residual_tol:
        # direct solve lost accuracy; retry once from the SVD null vector
        rho2 = unvec(_null_vector_by_svd(lmat), d)
        rho2 = 0.5 * (rho2 + rho2.conj().T)
        rho2 = rho2 / np.trace(rho2)
        residual2 = float(np.max(np.abs(lmat @ vec(rho2))))
        if residual2 > residual_tol:
            raise SteadyStateConvergenceError(
                f"steady-state residual {min(residual, residual2):.3e} "
                f"exceeds tolerance {residual_tol:.1e}"
            )
        rho, residual = rho2, residual2

    return DensityMatrix(liouv.dims, rho, residual=residual)


def steady_state_for(p: SystemParams) -> DensityMatrix:
    """Convenience: build H and collapse operators for p and solve."""
    h = build_hamiltonian(p)
    cs = build_collapse_ops(p)
    return steady_state(build_liouvillian(h, cs))


def evolve(
    rho0: DensityMatrix,
    liouv: Liouvillian,
    t_final: float,
    dt_max: float = np.inf,
    rtol: float = 1e-10,
    atol: float = 1e-10,
) -> DensityMatrix:
    """Propagate rho0 for t_final (gamma-units) with adaptive Runge-Kutta.

    Independent of the algebraic steady-state path; used to cross-validate it.
    """
    if t_final <= 0:
        raise ParameterError(f"t_final must be > 0, got {t_final}")
    if dt_max <= 0:
        raise ParameterError(f"dt_max must be > 0, got {dt_max}")
    if rho0.dims != liouv.dims:
        raise DimensionError("state and Liouvillian dimensions do not match")
    lmat = liouv.mat
    y0 = vec(rho0.mat)
    sol = solve_ivp(
        lambda t, y: lmat @ y,
        (0.0, t_final),
        y0,
        method="RK45",
        rtol=rtol,
        atol=atol,
        max_step=dt_max,
        t_eval=(t_final,),
    )
    if not sol.success:
        raise StiffnessError(f"time integration failed: {sol.message}")
    rho = unvec(sol.y[:, -1], liouv.dims.total_dim)
    return DensityMatrix(liouv.dims, rho)


def trace_distance(a: DensityMatrix, b: DensityMatrix) -> float:
    """(1/2) * trace norm of the difference."""
    if a.dims != b.dims:
        raise DimensionError("density matrix dimensions do not match")
    diff = 0.5 * ((a.mat - b.mat) + (a.mat - b.mat).conj().T)
    eigs = np.linalg.eigvalsh(diff)
    return float(0.5 * np.sum(np.abs(eigs)))


def _magnon_moments(rho: np.ndarray, n_max: int) -> tuple[float, float, float]:
    """(mean number, normally ordered second moment, top Fock population)."""
    ops = system_ops(n_max)
    n1 = float(np.real(np.sum(rho.T * ops.num.mat)))
    n2 = float(np.real(np.sum(rho.T * ops.num_num_minus_1.mat)))
    md = n_max + 1
    top = float(np.real(rho[n_max, n_max] + rho[md + n_max, md + n_max]))
    return n1, n2, top


def _g2_at_cutoff(p: SystemParams, n_max: int) -> tuple[float, float, float, DensityMatrix]:
    """Solve at a given cutoff; returns (g2, mean_n, top_population, rho)."""
    p_n = replace(p, n_max=n_max)
    rho = steady_state_for(p_n)
    n1, n2, top = _magnon_moments(rho.mat, n_max)
    if n1 <= 1e-12:
        raise NoExcitationError(
            f"steady state carries no magnon excitation (<m'm> = {n1:.3e})"
        )
    return n2 / n1**2, n1, top, rho


def converged_solve(
    p: SystemParams, g2_tol: float
) -> tuple[int, float, float, DensityMatrix]:
    """Escalate the Fock cutoff until g2 stabilizes; return the accepted solve.

    Starts from p.n_max and steps by 4; a cutoff n is accepted when the top
    Fock level holds < 1e-8 population and g2 changes by less than g2_tol
    (relative) when recomputed at n + 4. Returns (cutoff, g2, mean_n, rho).
    Raises TruncationError once candidates pass the hard cap of 40.
    """
    if g2_tol <= 0:
        raise ParameterError(f"g2_tol must be > 0, got {g2_tol}")
    n = p.n_max
    g2_n, mean_n, top_n, rho_n = _g2_at_cutoff(p, n)
    while n + CUTOFF_STEP <= HARD_CUTOFF_CAP:
        g2_next, mean_next, top_next, rho_next = _g2_at_cutoff(p, n + CUTOFF_STEP)
        rel = abs(g2_n - g2_next) / abs(g2_next)
        if rel < g2_tol and top_n < TOP_POPULATION_TOL:
            return n, g2_n, mean_n, rho_n
        n += CUTOFF_STEP
        g2_n, mean_n, top_n, rho_n = g2_next, mean_next, top_next, rho_next
    raise TruncationError(
        f"no converged cutoff <= {HARD_CUTOFF_CAP} for parameters {p} "
        f"(tolerance {g2_tol:.1e})"
    )


def converged_cutoff(p: SystemParams, g2_tol: float) -> int:
    """Smallest escalated Fock cutoff accepted by converged_solve."""
    return converged_solve(p, g2_tol)[0]
