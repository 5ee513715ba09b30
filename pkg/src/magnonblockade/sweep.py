"""Parameter-grid sweeps of g2(0) and the bundled figure presets.

A sweep evaluates the steady-state (or trajectory-ensemble) g2 at every node
of a 1D or 2D grid. Points are independent, run in parallel across worker
processes, and assemble deterministically by grid index: permuting the
evaluation order cannot change any output value. Failures at individual
points (no excitation, truncation cap) are recorded in-band as a per-point
status and never abort the sweep.

The preset catalogue (fig2a .. fig5_inset) binds the parameter values of the
reproduced datasets; axis ranges the captions leave open default to the
documented project choices and are recorded in the emitted provenance so a
result is reconstructible from its sidecar alone.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from concurrent.futures import ProcessPoolExecutor
from typing import Iterator

import numpy as np

from ._version import __version__
from .errors import NoExcitationError, ParameterError, TruncationError
from .liouville import converged_solve, steady_state_for
from .model import SystemParams
from .observables import magnon_stats
from .trajectory import TrajectoryConfig, ensemble_g2

__all__ = [
    "AxisSpec",
    "CutoffPolicy",
    "SweepSpec",
    "PointRecord",
    "SweepResult",
    "run_sweep",
    "evaluate_point",
    "figure_preset",
    "FIGURE_NAMES",
    "AXIS_FIELDS",
]

AXIS_FIELDS = ("delta", "g_qm", "omega_drive", "xi_probe", "n_th")

STATUS_OK = "ok"
STATUS_NO_EXCITATION = "no-excitation"
STATUS_TRUNCATION = "truncation-failed"

_POINT_SEED_SPACE = 1 << 33


@dataclass(frozen=True)
class AxisSpec:
    """One grid axis over a model parameter."""

    name: str
    min: float
    max: float
    count: int
    spacing: str = "linear"  # "linear" | "log"

    def __post_init__(self) -> None:
        if self.name not in AXIS_FIELDS:
            raise ParameterError(f"unknown axis {self.name!r}; choose from {AXIS_FIELDS}")
        if self.count < 2:
            raise ParameterError(f"axis count must be >= 2, got {self.count}")
        if not self.min < self.max:
            raise ParameterError(f"axis needs min < max, got [{self.min}, {self.max}]")
        if self.spacing not in ("linear", "log"):
            raise ParameterError(f"spacing must be linear or log, got {self.spacing!r}")
        if self.spacing == "log" and self.min <= 0:
            raise ParameterError("log spacing requires min > 0")

    def grid(self) -> np.ndarray:
        if self.spacing == "log":
            return np.geomspace(self.min, self.max, self.count)
        return np.linspace(self.min, self.max, self.count)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "min": self.min,
            "max": self.max,
            "count": self.count,
            "spacing": self.spacing,
        }


@dataclass(frozen=True)
class CutoffPolicy:
    """Fock-cutoff handling per point: fixed n_max or auto escalation."""

    mode: str  # "auto" | "fixed"
    g2_tol: float = 1e-3
    n_max: int | None = None

    def __post_init__(self) -> None:
        if self.mode == "auto":
            if self.g2_tol <= 0:
                raise ParameterError(f"g2_tol must be > 0, got {self.g2_tol}")
        elif self.mode == "fixed":
            if self.n_max is None or self.n_max < 1:
                raise ParameterError("fixed cutoff policy needs n_max >= 1")
        else:
            raise ParameterError(f"cutoff mode must be auto or fixed, got {self.mode!r}")

    @classmethod
    def auto(cls, g2_tol: float = 1e-3) -> "CutoffPolicy":
        return cls(mode="auto", g2_tol=g2_tol)

    @classmethod
    def fixed(cls, n_max: int) -> "CutoffPolicy":
        return cls(mode="fixed", n_max=n_max)

    def to_dict(self) -> dict:
        if self.mode == "fixed":
            return {"mode": "fixed", "n_max": self.n_max}
        return {"mode": "auto", "g2_tol": self.g2_tol}


@dataclass(frozen=True)
class SweepSpec:
    """Everything needed to (re)run one sweep."""

    base: SystemParams
    axes: tuple[AxisSpec, ...]
    solver: str = "deterministic"  # "deterministic" | "trajectory"
    cutoff: CutoffPolicy = field(default_factory=CutoffPolicy.auto)
    trajectory: TrajectoryConfig | None = None

    def __post_init__(self) -> None:
        if len(self.axes) not in (1, 2):
            raise ParameterError(f"sweeps take 1 or 2 axes, got {len(self.axes)}")
        names = [a.name for a in self.axes]
        if len(set(names)) != len(names):
            raise ParameterError(f"duplicate axis {names}")
        if self.solver not in ("deterministic", "trajectory"):
            raise ParameterError(
                f"solver must be deterministic or trajectory, got {self.solver!r}"
            )
        if self.solver == "trajectory" and self.trajectory is None:
            object.__setattr__(self, "trajectory", TrajectoryConfig())

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(a.count for a in self.axes)

    def grids(self) -> tuple[np.ndarray, ...]:
        return tuple(a.grid() for a in self.axes)

    def params_at(self, values: tuple[float, ...]) -> SystemParams:
        p = self.base
        for axis, value in zip(self.axes, values):
            if axis.name == "delta":
                p = p.with_delta(float(value))
            else:
                p = replace(p, **{axis.name: float(value)})
        return p

    def to_dict(self) -> dict:
        d: dict = {
            "base": {
                "delta_q": self.base.delta_q,
                "delta_m": self.base.delta_m,
                "g_qm": self.base.g_qm,
                "omega_drive": self.base.omega_drive,
                "xi_probe": self.base.xi_probe,
                "kappa_m": self.base.kappa_m,
                "kappa_q": self.base.kappa_q,
                "n_th": self.base.n_th,
                "n_max": self.base.n_max,
            },
            "axes": [a.to_dict() for a in self.axes],
            "solver": self.solver,
            "cutoff": self.cutoff.to_dict(),
        }
        if self.trajectory is not None:
            d["trajectory"] = {
                "n_trajectories": self.trajectory.n_trajectories,
                "t_burn_in": self.trajectory.t_burn_in,
                "t_sample": self.trajectory.t_sample,
                "sample_interval": self.trajectory.sample_interval,
                "rng_seed": self.trajectory.rng_seed,
                "dt_max": self.trajectory.dt_max,
            }
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SweepSpec":
        base = SystemParams(**d["base"])
        axes = tuple(AxisSpec(**a) for a in d["axes"])
        cutoff = CutoffPolicy(**d["cutoff"])
        traj = TrajectoryConfig(**d["trajectory"]) if d.get("trajectory") else None
        return cls(base=base, axes=axes, solver=d.get("solver", "deterministic"),
                   cutoff=cutoff, trajectory=traj)

    def spec_hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()


@dataclass(frozen=True)
class PointRecord:
    """Outcome at one grid node."""

    index: int
    values: tuple[float, ...]
    status: str
    g2: float | None = None
    mean_number: float | None = None
    cutoff_used: int | None = None
    residual: float | None = None
    stderr: float | None = None


def evaluate_point(
    params: SystemParams,
    policy: CutoffPolicy,
    solver: str = "deterministic",
    trajectory_cfg: TrajectoryConfig | None = None,
) -> PointRecord:
    """Evaluate one parameter point; failures are returned as status records."""
    try:
        if policy.mode == "fixed":
            p = replace(params, n_max=policy.n_max)
            cutoff = policy.n_max
        else:
            cutoff, _, _, _ = converged_solve(params, policy.g2_tol)
            p = replace(params, n_max=cutoff)
        if solver == "trajectory":
            cfg = trajectory_cfg if trajectory_cfg is not None else TrajectoryConfig()
            est = ensemble_g2(p, cfg, workers=1)
            return PointRecord(
                index=-1, values=(), status=STATUS_OK,
                g2=est.g2_mean, mean_number=est.n_mean,
                cutoff_used=cutoff, stderr=est.g2_stderr,
            )
        rho = steady_state_for(p)
        stats = magnon_stats(rho)
        return PointRecord(
            index=-1, values=(), status=STATUS_OK,
            g2=stats.g2_zero, mean_number=stats.mean_number,
            cutoff_used=cutoff, residual=rho.residual,
        )
    except NoExcitationError:
        return PointRecord(index=-1, values=(), status=STATUS_NO_EXCITATION)
    except TruncationError:
        return PointRecord(index=-1, values=(), status=STATUS_TRUNCATION)


def _point_seed(base_seed: int, index: int) -> int:
    seq = np.random.SeedSequence(base_seed, spawn_key=(_POINT_SEED_SPACE, index))
    return int(seq.generate_state(1, dtype=np.uint64)[0])


def _eval_chunk(args: tuple[SweepSpec, list[tuple[int, tuple[float, ...]]]]) -> list[PointRecord]:
    spec, points = args
    out = []
    for index, values in points:
        params = spec.params_at(values)
        cfg = spec.trajectory
        if spec.solver == "trajectory" and cfg is not None:
            cfg = replace(cfg, rng_seed=_point_seed(cfg.rng_seed, index))
        rec = evaluate_point(params, spec.cutoff, spec.solver, cfg)
        out.append(replace(rec, index=index, values=values))
    return out


@dataclass(frozen=True)
class SweepResult:
    """Grid echo plus per-point observables, statuses, and provenance."""

    spec: SweepSpec
    axis_values: tuple[np.ndarray, ...]
    g2: np.ndarray
    mean_number: np.ndarray
    cutoff_used: np.ndarray
    residual: np.ndarray
    stderr: np.ndarray
    status: np.ndarray
    provenance: dict

    @property
    def shape(self) -> tuple[int, ...]:
        return self.g2.shape

    def rows(self) -> Iterator[dict]:
        """Row-major iteration, one dict per grid node."""
        axis_names = [a.name for a in self.spec.axes]
        for flat, idx in enumerate(np.ndindex(self.shape)):
            row: dict = {}
            for ax_i, name in enumerate(axis_names):
                row[name] = float(self.axis_values[ax_i][idx[ax_i]])
            row["g2"] = None if np.isnan(self.g2[idx]) else float(self.g2[idx])
            row["mean_number"] = (
                None if np.isnan(self.mean_number[idx]) else float(self.mean_number[idx])
            )
            cu = int(self.cutoff_used[idx])
            row["cutoff_used"] = None if cu < 0 else cu
            row["status"] = str(self.status[idx])
            row["index"] = flat
            yield row


def run_sweep(spec: SweepSpec, workers: int = 1) -> SweepResult:
    """Evaluate g2 over the grid; per-point failures land in status."""
    grids = spec.grids()
    shape = spec.shape
    points: list[tuple[int, tuple[float, ...]]] = []
    for flat, idx in enumerate(np.ndindex(shape)):
        values = tuple(float(grids[d][idx[d]]) for d in range(len(shape)))
        points.append((flat, values))

    if workers <= 1 or len(points) == 1:
        records = _eval_chunk((spec, points))
    else:
        n_chunks = min(len(points), workers * 4)
        chunks = [list(c) for c in np.array_split(np.arange(len(points)), n_chunks)]
        args = [(spec, [points[i] for i in chunk]) for chunk in chunks if len(chunk)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_eval_chunk, args))
        records = [rec for part in parts for rec in part]
    records.sort(key=lambda r: r.index)

    g2 = np.full(shape, np.nan)
    mean_number = np.full(shape, np.nan)
    cutoff_used = np.full(shape, -1, dtype=np.int64)
    residual = np.full(shape, np.nan)
    stderr = np.full(shape, np.nan)
    status = np.full(shape, STATUS_OK, dtype=object)
    for rec in records:
        idx = np.unravel_index(rec.index, shape)
        status[idx] = rec.status
        if rec.g2 is not None:
            g2[idx] = rec.g2
        if rec.mean_number is not None:
            mean_number[idx] = rec.mean_number
        if rec.cutoff_used is not None:
            cutoff_used[idx] = rec.cutoff_used
        if rec.residual is not None:
            residual[idx] = rec.residual
        if rec.stderr is not None:
            stderr[idx] = rec.stderr

    provenance = {
        "spec": spec.to_dict(),
        "spec_hash": spec.spec_hash(),
        "code_version": __version__,
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "seed": spec.trajectory.rng_seed if spec.trajectory is not None else None,
        "solver": spec.solver,
    }
    return SweepResult(
        spec=spec,
        axis_values=grids,
        g2=g2,
        mean_number=mean_number,
        cutoff_used=cutoff_used,
        residual=residual,
        stderr=stderr,
        status=status,
        provenance=provenance,
    )


# ---------------------------------------------------------------------------
# Figure presets

DEFAULT_AXES = {
    "delta": AxisSpec("delta", -30.0, 30.0, 241),
    "g_qm": AxisSpec("g_qm", 0.0, 30.0, 121),
    "omega_drive": AxisSpec("omega_drive", 0.01, 20.0, 81, spacing="log"),
    "xi_probe": AxisSpec("xi_probe", 1e-4, 2.0, 81, spacing="log"),
    "n_th": AxisSpec("n_th", 1e-9, 1e-1, 49, spacing="log"),
}

_BASE = SystemParams()  # delta 21, g 21, omega 0.1, xi 0.001, kappas 1.4/1.2, n_th 0

FIGURE_NAMES = (
    "fig2a", "fig2b", "fig4a", "fig4b", "fig4c", "fig4d", "fig5", "fig5_inset",
)


@dataclass(frozen=True)
class FigurePreset:
    name: str
    curves: tuple[tuple[str, SweepSpec], ...]


def figure_preset(name: str) -> FigurePreset:
    """Sweep specs behind each bundled dataset, one per curve or map."""
    ax = DEFAULT_AXES
    if name == "fig2a":
        spec = SweepSpec(base=_BASE, axes=(ax["delta"], ax["g_qm"]))
        return FigurePreset(name, (("map", spec),))
    if name == "fig2b":
        spec = SweepSpec(base=_BASE, axes=(ax["omega_drive"], ax["xi_probe"]))
        return FigurePreset(name, (("map", spec),))
    if name == "fig4a":
        curves = tuple(
            (f"omega_drive-{om:g}",
             SweepSpec(base=replace(_BASE, omega_drive=om), axes=(ax["delta"],)))
            for om in (0.1, 2.0, 10.0)
        )
        return FigurePreset(name, curves)
    if name == "fig4b":
        curves = tuple(
            (f"delta-{d:g}",
             SweepSpec(base=_BASE.with_delta(d), axes=(ax["omega_drive"],)))
            for d in (14.8, 0.0, 21.0)
        )
        return FigurePreset(name, curves)
    if name == "fig4c":
        curves = tuple(
            (f"xi_probe-{xi:g}",
             SweepSpec(base=replace(_BASE, xi_probe=xi), axes=(ax["delta"],)))
            for xi in (0.033, 0.06, 1.0)
        )
        return FigurePreset(name, curves)
    if name == "fig4d":
        curves = tuple(
            (f"delta-{d:g}",
             SweepSpec(base=_BASE.with_delta(d), axes=(ax["xi_probe"],)))
            for d in (14.8, 0.0, 21.0)
        )
        return FigurePreset(name, curves)
    if name == "fig5":
        curves = tuple(
            (f"n_th-{nth:g}",
             SweepSpec(base=replace(_BASE, n_th=nth), axes=(ax["g_qm"],)))
            for nth in (0.0, 1e-4, 1e-3)
        )
        return FigurePreset(name, curves)
    if name == "fig5_inset":
        spec = SweepSpec(base=_BASE, axes=(ax["n_th"],))
        return FigurePreset(name, (("curve", spec),))
    raise ParameterError(f"unknown figure {name!r}; choose from {FIGURE_NAMES}")
