"""Monte Carlo wave-function (quantum-jump) unraveling of the master equation.

Each trajectory evolves a pure state under the non-Hermitian generator
H_nh = H - (i/2) sum_k C_k'C_k. A uniform variate r in (0, 1) is drawn; the
squared norm of the unnormalized state decays monotonically, and when it
crosses r a jump fires: the crossing time is located by bisection (1e-10 in
time), a channel k is selected with probability proportional to <C_k'C_k>,
the state is replaced by C_k psi (renormalized), and r is redrawn. Magnon
moments are time-averaged over a sampling window after a burn-in, and the
ensemble over trajectories estimates the steady-state g2(0) independently of
the deterministic solver.

Reproducibility: trajectory i uses the stream
numpy PCG64 seeded via SeedSequence(rng_seed, spawn_key=(i,)), so results
are bit-identical for a given (params, config) regardless of worker count or
scheduling order. The bootstrap resampler draws from its own spawned stream.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .errors import NoExcitationError, ParameterError, StiffnessError
from .hilbert import StateVector, system_ops
from .model import SystemParams, build_collapse_ops, build_hamiltonian

__all__ = [
    "TrajectoryConfig",
    "TrajectoryResult",
    "TrajectoryEstimate",
    "run_trajectory",
    "ensemble_g2",
    "RNG_ALGORITHM",
]

RNG_ALGORITHM = "numpy-PCG64/SeedSequence(rng_seed, spawn_key=(traj_index,))"
_BOOTSTRAP_SPAWN_KEY = 1 << 32
_BOOTSTRAP_RESAMPLES = 1000
_JUMP_TIME_TOL = 1e-10


@dataclass(frozen=True)
class TrajectoryConfig:
    """Monte Carlo run settings (times in gamma-units).

    t_burn_in = None resolves to 20 / min(positive decay rates), several
    relaxation times into the stationary regime.
    """

    n_trajectories: int = 500
    t_burn_in: float | None = None
    t_sample: float = 100.0
    sample_interval: float = 0.5
    rng_seed: int = 12345
    dt_max: float = 1.0

    def __post_init__(self) -> None:
        if self.n_trajectories < 1:
            raise ParameterError(f"n_trajectories must be >= 1, got {self.n_trajectories}")
        if self.t_burn_in is not None and not self.t_burn_in > 0:
            raise ParameterError(f"t_burn_in must be > 0, got {self.t_burn_in}")
        if not self.t_sample > 0:
            raise ParameterError(f"t_sample must be > 0, got {self.t_sample}")
        if not 0 < self.sample_interval <= self.t_sample:
            raise ParameterError(
                f"sample_interval must be in (0, t_sample], got {self.sample_interval}"
            )
        if not self.dt_max > 0:
            raise ParameterError(f"dt_max must be > 0, got {self.dt_max}")

    def resolve_burn_in(self, p: SystemParams) -> float:
        if self.t_burn_in is not None:
            return self.t_burn_in
        rates = [p.kappa_m]
        if p.kappa_q > 0:
            rates.append(p.kappa_q)
        return 20.0 / min(rates)


@dataclass(frozen=True)
class TrajectoryResult:
    """Single-trajectory time averages and the jump record."""

    traj_index: int
    n_avg: float
    n2_avg: float
    jumps: tuple[tuple[float, int], ...]  # (time, channel index)

    def jump_counts(self, n_channels: int) -> tuple[int, ...]:
        counts = [0] * n_channels
        for _, k in self.jumps:
            counts[k] += 1
        return tuple(counts)


@dataclass(frozen=True)
class TrajectoryEstimate:
    """Ensemble estimate of the steady-state magnon statistics."""

    g2_mean: float
    g2_stderr: float
    n_mean: float
    n_stderr: float
    jump_counts: tuple[int, ...]
    n_trajectories: int
    rng_algorithm: str = RNG_ALGORITHM


class _Propagator:
    """Applies exp(A t) for the fixed non-Hermitian generator A = -i H_nh.

    Uses the eigendecomposition of A when it reconstructs A accurately,
    falling back to a dense matrix exponential per call otherwise.
    """

    def __init__(self, a: np.ndarray):
        self._a = a
        self._eig_ok = False
        try:
            w, v = np.linalg.eig(a)
            vinv = np.linalg.inv(v)
            err = np.max(np.abs(v @ (w[:, None] * vinv) - a))
            scale = max(float(np.max(np.abs(a))), 1.0)
            if err / scale < 1e-12:
                self._w, self._v, self._vinv = w, v, vinv
                self._eig_ok = True
        except np.linalg.LinAlgError:
            pass

    def apply(self, psi: np.ndarray, dt: float) -> np.ndarray:
        if self._eig_ok:
            return self._v @ (np.exp(self._w * dt) * (self._vinv @ psi))
        return sla.expm(self._a * dt) @ psi


class _Engine:
    """Shared precomputation for all trajectories of one parameter point."""

    def __init__(self, p: SystemParams, cfg: TrajectoryConfig):
        self.params = p
        self.cfg = cfg
        ops = system_ops(p.n_max)
        h = build_hamiltonian(p).mat
        self.channels = [c.scaled() for c in build_collapse_ops(p)]
        h_nh = h.astype(np.complex128)
        for cm in self.channels:
            h_nh = h_nh - 0.5j * (cm.conj().T @ cm)
        self.propagator = _Propagator(-1j * h_nh)
        self.num = ops.num.mat
        self.num2 = ops.num_num_minus_1.mat
        self.dims = p.dims
        self.t_burn = cfg.resolve_burn_in(p)
        self.n_samples = int(math.floor(cfg.t_sample / cfg.sample_interval)) + 1
        self.vacuum = np.zeros(self.dims.total_dim, dtype=np.complex128)
        self.vacuum[self.dims.index_of(False, 0)] = 1.0

    def _draw_r(self, rng: np.random.Generator) -> float:
        r = float(rng.random())
        while r == 0.0:
            r = float(rng.random())
        return r

    def run(self, traj_index: int, initial_state: np.ndarray | None = None) -> TrajectoryResult:
        cfg = self.cfg
        rng = np.random.default_rng(
            np.random.SeedSequence(cfg.rng_seed, spawn_key=(traj_index,))
        )
        psi = (self.vacuum if initial_state is None else initial_state).astype(
            np.complex128, copy=True
        )
        nrm = np.linalg.norm(psi)
        if nrm == 0:
            raise ParameterError("initial state has zero norm")
        psi /= nrm

        prop = self.propagator
        r = self._draw_r(rng)
        t = 0.0
        jumps: list[tuple[float, int]] = []
        n_sum = 0.0
        n2_sum = 0.0

        for k_sample in range(self.n_samples):
            t_target = self.t_burn + k_sample * cfg.sample_interval
            while t < t_target:
                rem = t_target - t
                if rem <= 1e-12:
                    t = t_target
                    break
                stride = min(cfg.dt_max, rem)
                trial = prop.apply(psi, stride)
                nn = float(np.real(np.vdot(trial, trial)))
                if nn > r:
                    psi = trial
                    t += stride
                    continue
                # jump inside (t, t + stride]: bisect the norm crossing
                lo, hi = 0.0, stride
                while hi - lo > _JUMP_TIME_TOL:
                    mid = 0.5 * (lo + hi)
                    cand = prop.apply(psi, mid)
                    if float(np.real(np.vdot(cand, cand))) > r:
                        lo = mid
                    else:
                        hi = mid
                tau = 0.5 * (lo + hi)
                at_jump = prop.apply(psi, tau)
                weights = np.array(
                    [float(np.real(np.vdot(cm @ at_jump, cm @ at_jump))) for cm in self.channels]
                )
                total = weights.sum()
                if not total > 0:
                    raise StiffnessError(
                        f"norm crossed jump threshold at t={t + tau:.6g} but all "
                        "channel weights vanish"
                    )
                k = int(rng.choice(len(self.channels), p=weights / total))
                psi = self.channels[k] @ at_jump
                psi /= np.linalg.norm(psi)
                t += tau
                jumps.append((t, k))
                r = self._draw_r(rng)
            denom = float(np.real(np.vdot(psi, psi)))
            n_sum += float(np.real(np.vdot(psi, self.num @ psi))) / denom
            n2_sum += float(np.real(np.vdot(psi, self.num2 @ psi))) / denom

        return TrajectoryResult(
            traj_index=traj_index,
            n_avg=n_sum / self.n_samples,
            n2_avg=n2_sum / self.n_samples,
            jumps=tuple(jumps),
        )


def run_trajectory(
    p: SystemParams,
    cfg: TrajectoryConfig,
    traj_index: int,
    initial_state: StateVector | np.ndarray | None = None,
) -> TrajectoryResult:
    """Run one quantum-jump trajectory; deterministic in (p, cfg, traj_index)."""
    engine = _Engine(p, cfg)
    init = initial_state.vec if isinstance(initial_state, StateVector) else initial_state
    return engine.run(traj_index, init)


def _run_chunk(args: tuple[SystemParams, TrajectoryConfig, list[int]]) -> list[TrajectoryResult]:
    p, cfg, indices = args
    engine = _Engine(p, cfg)
    return [engine.run(i) for i in indices]


def _collect(p: SystemParams, cfg: TrajectoryConfig, workers: int) -> list[TrajectoryResult]:
    indices = list(range(cfg.n_trajectories))
    if workers <= 1 or cfg.n_trajectories == 1:
        engine = _Engine(p, cfg)
        return [engine.run(i) for i in indices]
    n_chunks = min(len(indices), workers * 4)
    chunks = [list(c) for c in np.array_split(indices, n_chunks)]
    args = [(p, cfg, chunk) for chunk in chunks if chunk]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(_run_chunk, args))
    return [res for part in parts for res in part]


def ensemble_g2(
    p: SystemParams, cfg: TrajectoryConfig, workers: int = 1
) -> TrajectoryEstimate:
    """Ensemble estimate g2 = E[<m'm'mm>] / E[<m'm>]^2 with bootstrap errors."""
    results = _collect(p, cfg, workers)
    n1 = np.array([res.n_avg for res in results])
    n2 = np.array([res.n2_avg for res in results])
    n = len(results)

    mean_n1 = float(n1.mean())
    if mean_n1 <= 1e-12:
        raise NoExcitationError(
            f"ensemble magnon occupation {mean_n1:.3e} below 1e-12; g2 undefined"
        )
    g2_mean = float(n2.mean() / mean_n1**2)

    if n == 1:
        g2_stderr = math.inf
        n_stderr = math.inf
    else:
        rng = np.random.default_rng(
            np.random.SeedSequence(cfg.rng_seed, spawn_key=(_BOOTSTRAP_SPAWN_KEY,))
        )
        idx = rng.integers(0, n, size=(_BOOTSTRAP_RESAMPLES, n))
        with np.errstate(divide="ignore", invalid="ignore"):
            g2_boot = n2[idx].mean(axis=1) / n1[idx].mean(axis=1) ** 2
        finite = g2_boot[np.isfinite(g2_boot)]
        g2_stderr = float(finite.std(ddof=1)) if finite.size > 1 else math.inf
        n_stderr = float(n1.std(ddof=1) / math.sqrt(n))

    n_channels = len(build_collapse_ops(p))
    totals = np.zeros(n_channels, dtype=np.int64)
    for res in results:
        totals += np.array(res.jump_counts(n_channels), dtype=np.int64)

    return TrajectoryEstimate(
        g2_mean=g2_mean,
        g2_stderr=g2_stderr,
        n_mean=mean_n1,
        n_stderr=n_stderr,
        jump_counts=tuple(int(c) for c in totals),
        n_trajectories=n,
    )
