"""Atom-by-atom evolution, interaction-time sweeps and saturation detection."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Optional

import numpy as np

from .errors import InvalidParameterError
from .fock import DEFAULT_TAIL_TOL, DensityMatrix, dephased_coherent_state, diagnostics, fock_state, thermal_state
from .kick import AtomPreparation, InteractionParams, apply_kick

INITIAL_STATES = ("thermal", "dephased_coherent", "fock")

# detect_saturation settings used to fill EvolutionRecord.saturation_atom
SATURATION_WINDOW = 20
SATURATION_TOL = 0.005
#: default interaction-time grid for sweeps: 0, 0.1, ..., 20
DEFAULT_SWEEP = tuple(round(0.1 * k, 10) for k in range(201))


@dataclass(frozen=True)
class ExperimentConfig:
    """One micromaser run.  Defaults are the reference parameter set."""

    initial_state: str = "thermal"
    mean_n: float = 10.0
    fock_n: int = 0
    atom: AtomPreparation = field(default_factory=AtomPreparation.equal_superposition)
    params: InteractionParams = field(default_factory=InteractionParams)
    n_atoms: int = 200
    snapshot_every: Optional[int] = None
    tail_tol: float = DEFAULT_TAIL_TOL

    def __post_init__(self):
        if self.initial_state not in INITIAL_STATES:
            raise InvalidParameterError(f"initial_state must be one of {INITIAL_STATES}, got {self.initial_state!r}")
        if self.n_atoms < 0:
            raise InvalidParameterError(f"n_atoms must be non-negative, got {self.n_atoms}")
        if self.snapshot_every is not None and self.snapshot_every < 1:
            raise InvalidParameterError("snapshot_every must be a positive integer")
        if self.fock_n < 0:
            raise InvalidParameterError("fock_n must be non-negative")

    def initial_density_matrix(self) -> DensityMatrix:
        if self.initial_state == "thermal":
            return thermal_state(self.mean_n, self.tail_tol)
        if self.initial_state == "dephased_coherent":
            return dephased_coherent_state(self.mean_n, self.tail_tol)
        return fock_state(self.fock_n, self.fock_n + 3, self.tail_tol)

    def replace(self, **changes) -> "ExperimentConfig":
        kw = {f: getattr(self, f) for f in self.__dataclass_fields__}
        kw.update(changes)
        return ExperimentConfig(**kw)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["atom"] = asdict(self.atom)
        d["params"] = asdict(self.params)
        return d


@dataclass(frozen=True)
class EvolutionRecord:
    """Per-atom diagnostics; row ``N`` is the field after ``N`` atoms.

    ``mandel_q`` entries are NaN where undefined (vacuum).
    """

    n: np.ndarray
    zeta: np.ndarray
    mean_n: np.ndarray
    mandel_q: np.ndarray
    snapshots: dict = field(default_factory=dict)
    final_state: Optional[DensityMatrix] = field(default=None, repr=False, compare=False)
    saturation_atom: Optional[int] = None

    def rows(self):
        return list(zip(self.n.tolist(), self.zeta.tolist(), self.mean_n.tolist(), self.mandel_q.tolist()))


def evolve_and_record(cfg: ExperimentConfig, rho: Optional[DensityMatrix] = None) -> EvolutionRecord:
    """Inject ``cfg.n_atoms`` identical atoms, recording diagnostics after each.

    ``rho`` overrides the configured initial state.
    """
    if rho is None:
        rho = cfg.initial_density_matrix()
    count = cfg.n_atoms + 1
    zeta = np.empty(count)
    mean = np.empty(count)
    q = np.empty(count)
    snaps = {}
    for k in range(count):
        if k:
            rho = apply_kick(rho, cfg.atom, cfg.params)
        dg = diagnostics(rho)
        zeta[k], mean[k] = dg.purity_deficit, dg.mean_n
        q[k] = np.nan if dg.mandel_q is None else dg.mandel_q
        if cfg.snapshot_every and k and k % cfg.snapshot_every == 0:
            snaps[k] = rho.populations
    rec = EvolutionRecord(np.arange(count), zeta, mean, q, snaps, rho)
    return replace(rec, saturation_atom=detect_saturation(rec, SATURATION_WINDOW, SATURATION_TOL))


@dataclass(frozen=True)
class SweepRow:
    lambda_t: float
    zeta_final: float
    mean_n_final: float


def _sweep_point(args):
    cfg, lt = args
    rec = evolve_and_record(cfg.replace(params=cfg.params.with_time(lt), snapshot_every=None))
    return SweepRow(lt, float(rec.zeta[-1]), float(rec.mean_n[-1]))


def sweep_interaction_time(cfg: ExperimentConfig, lambda_t_values, workers: int = 1) -> list[SweepRow]:
    """Final diagnostics after ``cfg.n_atoms`` atoms for each transit time.

    Duplicate times are evaluated once; rows come back sorted by time.
    """
    values = sorted({float(v) for v in lambda_t_values})
    if any(v < 0 or not math.isfinite(v) for v in values):
        raise InvalidParameterError("interaction times must be finite and non-negative")
    jobs = [(cfg, v) for v in values]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_sweep_point, jobs))
    return [_sweep_point(j) for j in jobs]


def find_optimum_time(
    cfg: ExperimentConfig,
    lambda_t_values=None,
    energy_floor: Optional[float] = None,
    *,
    table: Optional[list[SweepRow]] = None,
    workers: int = 1,
) -> Optional[tuple[float, float]]:
    """Transit time with the smallest final zeta whose final mean photon number
    stays at or above ``energy_floor`` (default: the initial mean).

    Pass a precomputed ``table`` to skip the sweep.  Returns ``None`` when no
    candidate meets the floor; ties go to the shorter time.
    """
    if table is None:
        if not lambda_t_values:
            raise InvalidParameterError("need at least one candidate time")
        table = sweep_interaction_time(cfg, lambda_t_values, workers)
    if energy_floor is None:
        energy_floor = diagnostics(cfg.initial_density_matrix()).mean_n
    feasible = [r for r in table if r.mean_n_final >= energy_floor]
    if not feasible:
        return None
    best = min(feasible, key=lambda r: (r.zeta_final, r.lambda_t))
    return best.lambda_t, best.zeta_final


def detect_saturation(record: EvolutionRecord, window: int, tol: float) -> Optional[int]:
    """First atom count N at which zeta over atoms N-window+1..N spans at most ``tol``."""
    if window < 2:
        raise InvalidParameterError(f"window must be at least 2, got {window}")
    z = record.zeta
    for n in range(window, len(z)):
        seg = z[n - window + 1 : n + 1]
        if seg.max() - seg.min() <= tol:
            return int(n)
    return None
