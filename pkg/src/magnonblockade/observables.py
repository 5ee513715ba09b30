"""Magnon statistics from a density matrix: g2(0), occupation, Fock marginal.

g2(0) = <m'm'mm> / <m'm>^2 classifies the steady state: > 1 bunching
(super-Poissonian), < 1 antibunching (sub-Poissonian), and values near zero
flag blockade. The blockade flag threshold (default 1e-2) is a reporting
convenience only and never gates any physics.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, NoExcitationError, PositivityError
from .hilbert import _as_matrix, system_ops

__all__ = [
    "MagnonStats",
    "Classification",
    "g2_zero",
    "classify",
    "magnon_marginal",
    "magnon_mean_number",
    "magnon_stats",
    "OCCUPATION_FLOOR",
    "BLOCKADE_THRESHOLD",
]

OCCUPATION_FLOOR = 1e-12
BLOCKADE_THRESHOLD = 1e-2
POISSON_EPS = 1e-6


@dataclass(frozen=True)
class MagnonStats:
    g2_zero: float
    mean_number: float
    fock_populations: tuple[float, ...]
    top_level_population: float


@dataclass(frozen=True)
class Classification:
    label: str  # "bunching" | "antibunching" | "poissonian"
    blockade: bool


def _ops_for(rho: np.ndarray):
    d = rho.shape[0]
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1] or d % 2 != 0 or d < 4:
        raise DimensionError(f"not a qubit (x) magnon density matrix: shape {rho.shape}")
    return system_ops(d // 2 - 1)


def g2_zero(rho) -> float:
    """Equal-time second-order correlation of the magnon mode."""
    r = _as_matrix(rho)
    ops = _ops_for(r)
    n1c = np.sum(r.T * ops.num.mat)
    n2c = np.sum(r.T * ops.num_num_minus_1.mat)
    for name, val in (("<m'm>", n1c), ("<m'm'mm>", n2c)):
        if abs(val.imag) >= 1e-10:
            raise ValueError(f"{name} has imaginary part {val.imag:.3e}")
    n1, n2 = n1c.real, n2c.real
    if n1 <= OCCUPATION_FLOOR:
        raise NoExcitationError(
            f"magnon occupation {n1:.3e} below floor {OCCUPATION_FLOOR:.0e}; "
            "g2(0) undefined"
        )
    if n2 < -1e-12:
        raise PositivityError(f"<m'm'mm> = {n2:.3e} is negative; invalid state")
    return max(n2, 0.0) / n1**2


def classify(
    g2: float,
    eps: float = POISSON_EPS,
    blockade_threshold: float = BLOCKADE_THRESHOLD,
) -> Classification:
    """Bunching/antibunching/poissonian label plus a blockade flag."""
    if g2 < 0:
        raise ValueError(f"g2 must be >= 0, got {g2}")
    if g2 > 1.0 + eps:
        label = "bunching"
    elif g2 < 1.0 - eps:
        label = "antibunching"
    else:
        label = "poissonian"
    return Classification(label=label, blockade=g2 < blockade_threshold)


def magnon_marginal(rho) -> np.ndarray:
    """Fock populations of the magnon mode (qubit traced out)."""
    r = _as_matrix(rho)
    d = r.shape[0]
    if r.ndim != 2 or r.shape != (d, d) or d % 2 != 0 or d < 4:
        raise DimensionError(f"not a qubit (x) magnon density matrix: shape {r.shape}")
    md = d // 2
    blocks = r.reshape(2, md, 2, md)
    reduced = blocks[0, :, 0, :] + blocks[1, :, 1, :]
    pops = np.real(np.diag(reduced)).copy()
    return pops


def magnon_mean_number(rho) -> float:
    r = _as_matrix(rho)
    ops = _ops_for(r)
    return float(np.real(np.sum(r.T * ops.num.mat)))


def magnon_stats(rho) -> MagnonStats:
    pops = magnon_marginal(rho)
    return MagnonStats(
        g2_zero=g2_zero(rho),
        mean_number=magnon_mean_number(rho),
        fock_populations=tuple(float(p) for p in pops),
        top_level_population=float(pops[-1]),
    )
