"""Physical model: Hamiltonian, dissipation channels, and helper formulas.

Unit system: every rate, detuning, and coupling is expressed in units of
gamma = 2*pi x 1 MHz, and time in units of 1/gamma. The two helpers that
touch absolute units (thermal_occupation, drive_strength_from_power) do their
own conversions and return plain numbers; everything else never sees an SI
unit. This matches how the reproduced parameter maps are labelled and makes
the correlation function g2(0) scale-free.

Hamiltonian (rotating frame of the drive, beat frequency between drive and
probe fixed to zero):

    H = (1/2) delta_q sigma_z + delta_m m'm
        + g_qm (sigma_+ m + sigma_- m')
        + omega_drive (sigma_+ + sigma_-) + xi_probe (m' + m)

Dissipation: magnon decay at kappa_m (n_th + 1), magnon heating at
kappa_m n_th, and qubit decay at kappa_q, all as standard rate-k dissipators
D[C] rho = C rho C' - {C'C, rho}/2. The qubit channel carries no thermal
excitation term.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
from scipy import constants

from .errors import DimensionError, ParameterError
from .hilbert import Operator, SpaceDims, system_ops

__all__ = [
    "SystemParams",
    "CollapseOp",
    "DressedSpectrum",
    "build_hamiltonian",
    "build_collapse_ops",
    "thermal_occupation",
    "effective_coupling",
    "drive_strength_from_power",
    "drive_power_from_strength",
    "dressed_spectrum",
    "GAMMA_RAD_PER_S",
]

# gamma = 2*pi x 1 MHz as an angular frequency, used only by the unit helpers
GAMMA_RAD_PER_S = 2.0 * math.pi * 1.0e6

DEFAULT_N_MAX = 10


@dataclass(frozen=True)
class SystemParams:
    """All model parameters, in units of gamma (except n_th and n_max)."""

    delta_q: float = 21.0
    delta_m: float = 21.0
    g_qm: float = 21.0
    omega_drive: float = 0.1
    xi_probe: float = 0.001
    kappa_m: float = 1.4
    kappa_q: float = 1.2
    n_th: float = 0.0
    n_max: int = DEFAULT_N_MAX

    def __post_init__(self) -> None:
        if not self.kappa_m > 0:
            raise ParameterError(f"kappa_m must be > 0, got {self.kappa_m}")
        for name in ("g_qm", "omega_drive", "xi_probe", "kappa_q", "n_th"):
            value = getattr(self, name)
            if value < 0:
                raise ParameterError(f"{name} must be >= 0, got {value}")
        if self.n_max < 1:
            raise ParameterError(f"n_max must be >= 1, got {self.n_max}")
        for name in ("delta_q", "delta_m", "g_qm", "omega_drive", "xi_probe",
                     "kappa_m", "kappa_q", "n_th"):
            if not math.isfinite(getattr(self, name)):
                raise ParameterError(f"{name} must be finite")

    @classmethod
    def resonant(cls, delta: float = 21.0, **kwargs) -> "SystemParams":
        """Convenience constructor for the common case delta_q = delta_m."""
        return cls(delta_q=delta, delta_m=delta, **kwargs)

    def with_delta(self, delta: float) -> "SystemParams":
        return replace(self, delta_q=delta, delta_m=delta)

    @property
    def dims(self) -> SpaceDims:
        return SpaceDims(self.n_max)


@dataclass(frozen=True)
class CollapseOp:
    """A dissipation channel: bare operator plus its full rate prefactor."""

    operator: Operator
    rate: float
    label: str = field(default="", compare=False)

    def __post_init__(self) -> None:
        if self.rate < 0:
            raise ParameterError(f"collapse rate must be >= 0, got {self.rate}")

    def scaled(self) -> np.ndarray:
        """sqrt(rate) * operator, the matrix that enters the master equation."""
        return math.sqrt(self.rate) * self.operator.mat


def build_hamiltonian(p: SystemParams) -> Operator:
    """Assemble the rotating-frame Hamiltonian on the full product space."""
    ops = system_ops(p.n_max)
    h = (
        0.5 * p.delta_q * ops.sz
        + p.delta_m * ops.num
        + p.g_qm * (ops.sp @ ops.m + ops.sm @ ops.m_dag)
        + p.omega_drive * (ops.sp + ops.sm)
        + p.xi_probe * (ops.m_dag + ops.m)
    )
    return h


def build_collapse_ops(p: SystemParams) -> list[CollapseOp]:
    """The three dissipation channels, zero-rate ones included with rate 0.

    Rates come from rewriting the (k/2)(2 C rho C' - C'C rho - rho C'C)
    convention as rate-k dissipators, which is exact.
    """
    ops = system_ops(p.n_max)
    return [
        CollapseOp(ops.m, p.kappa_m * (p.n_th + 1.0), label="magnon_decay"),
        CollapseOp(ops.m_dag, p.kappa_m * p.n_th, label="magnon_heating"),
        CollapseOp(ops.sm, p.kappa_q, label="qubit_decay"),
    ]


def thermal_occupation(omega_m_hz: float, temperature_k: float) -> float:
    """Bose-Einstein occupation 1/(exp(hbar*omega/kB*T) - 1).

    omega_m_hz is an ordinary frequency in Hz (the angular frequency is
    2*pi*omega_m_hz); temperature in kelvin. CODATA constants via scipy.
    """
    if omega_m_hz <= 0:
        raise ParameterError(f"omega_m_hz must be > 0, got {omega_m_hz}")
    if temperature_k <= 0:
        raise ParameterError(f"temperature_k must be > 0, got {temperature_k}")
    x = constants.hbar * 2.0 * math.pi * omega_m_hz / (constants.k * temperature_k)
    return 1.0 / math.expm1(x)


def effective_coupling(g_q: float, g_m: float, photon_detuning: float) -> float:
    """Virtual-photon-mediated qubit-magnon coupling g_q*g_m/detuning."""
    if photon_detuning == 0:
        raise ParameterError("photon_detuning must be nonzero")
    return g_q * g_m / photon_detuning


def drive_strength_from_power(power_mw: float, k_param: float = 103.0) -> float:
    """Drive strength Omega = K*sqrt(P) in angular MHz (Mrad/s).

    K defaults to 103 MHz/mW^(1/2). The returned value is an angular
    frequency: dividing by 2*pi MHz gives Omega in units of gamma. This
    interpretation is frozen because it reproduces the documented worked
    point P = 3.7e-5 mW <-> Omega/gamma = 0.1.
    """
    if power_mw < 0:
        raise ParameterError(f"power_mw must be >= 0, got {power_mw}")
    return k_param * math.sqrt(power_mw)


def drive_power_from_strength(omega_angular_mhz: float, k_param: float = 103.0) -> float:
    """Inverse of drive_strength_from_power."""
    if omega_angular_mhz < 0:
        raise ParameterError(f"omega must be >= 0, got {omega_angular_mhz}")
    return (omega_angular_mhz / k_param) ** 2


@dataclass(frozen=True)
class DressedSpectrum:
    """Eigenvalues of the undriven Hamiltonian grouped by total excitation."""

    blocks: tuple[tuple[int, tuple[float, ...]], ...]

    def block(self, n: int) -> tuple[float, ...]:
        for label, eigs in self.blocks:
            if label == n:
                return eigs
        raise KeyError(f"no excitation block {n}")

    def splitting(self, n: int) -> float:
        eigs = self.block(n)
        return max(eigs) - min(eigs)

    @property
    def n1_splitting(self) -> float:
        return self.splitting(1)

    @property
    def n2_splitting(self) -> float:
        return self.splitting(2)


def dressed_spectrum(p: SystemParams) -> DressedSpectrum:
    """Diagonalize H with drives off, block by block.

    With omega_drive = xi_probe = 0 the total excitation number
    sigma_+ sigma_- + m'm is conserved, so H is block diagonal over the
    excitation ladder; block n holds {|e, n-1>, |g, n>} and splits by
    sqrt((delta_q - delta_m)^2 + 4 n g^2). The top block n_max + 1 contains
    only the truncated |e, n_max> level.
    """
    if p.omega_drive != 0 or p.xi_probe != 0:
        raise ParameterError(
            "dressed_spectrum requires omega_drive = xi_probe = 0 "
            f"(got {p.omega_drive}, {p.xi_probe})"
        )
    h = build_hamiltonian(p).mat
    dims = p.dims
    labels = np.empty(dims.total_dim, dtype=np.int64)
    for q_excited in (True, False):
        for n in range(dims.magnon_dim):
            idx = dims.index_of(q_excited, n)
            labels[idx] = n + (1 if q_excited else 0)
    blocks: list[tuple[int, tuple[float, ...]]] = []
    for n in range(int(labels.max()) + 1):
        sel = np.flatnonzero(labels == n)
        sub = h[np.ix_(sel, sel)]
        eigs = np.linalg.eigvalsh(sub)
        blocks.append((n, tuple(float(e) for e in eigs)))
    return DressedSpectrum(blocks=tuple(blocks))


def total_excitation_operator(dims: SpaceDims) -> Operator:
    """sigma_+ sigma_- + m'm, the conserved charge of the undriven model."""
    ops = system_ops(dims.magnon_cutoff)
    return (ops.sp @ ops.sm) + ops.num


def validate_collapse_dims(ops: Sequence[CollapseOp], dims: SpaceDims) -> None:
    """Raise if any collapse operator lives on a different space."""
    for c in ops:
        if c.operator.dims != dims:
            raise DimensionError("collapse operator dims do not match system dims")
