"""Single runs, steady-state statistics and neuron sweeps."""

from __future__ import annotations

import csv
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .config import ExperimentConfig
from .filter import run_filter
from .sim import generate_run
from .so3 import rotations_to_euler

log = logging.getLogger(__name__)

RUN_HEADER = ("t", "phi", "theta", "psi", "phi_hat", "theta_hat", "psi_hat", "err_RI", "w_frob", "cx", "cy", "cz", "wmx", "wmy", "wmz")
SWEEP_HEADER = ("q", "trial", "seed", "mean_err", "std_err", "window_start", "window_end")


def _fmt(x):
    return format(float(x), ".17g")


@dataclass
class RunRecord:
    """Per-sample time series of one experiment.

    `err_RI` is the normalized distance between the true attitude and the
    estimate, ``Tr(I - R^T R_hat) / 4``. The filter's own, measurement-based
    distance is kept in `err_meas`, and the psi coefficients in `psi`
    (both in memory only, not part of the CSV).
    """

    t: np.ndarray
    euler: np.ndarray
    euler_hat: np.ndarray
    err_RI: np.ndarray
    w_frob: np.ndarray
    C: np.ndarray
    omega_m: np.ndarray
    err_meas: np.ndarray | None = None
    psi: np.ndarray | None = None
    R: np.ndarray | None = None
    R_hat: np.ndarray | None = None

    def __len__(self):
        return len(self.t)

    @classmethod
    def empty(cls):
        z1, z3 = np.empty(0), np.empty((0, 3))
        return cls(z1, z3, z3, z1, z1, z3, z3)

    def table(self):
        """Rows in CSV column order, shape ``(n, 15)``."""
        cols = [self.t, self.euler, self.euler_hat, self.err_RI, self.w_frob, self.C, self.omega_m]
        # + 0.0 turns -0.0 into 0.0 so the text output has a single zero
        return np.column_stack(cols).reshape(len(self.t), len(RUN_HEADER)) + 0.0


@dataclass
class MetricsReport:
    """Steady-state statistics of `err_RI` over a time window."""

    window: tuple
    mean_err: float
    std_err: float
    q: int | None = None
    seeds: list = field(default_factory=list)
    per_seed_means: list = field(default_factory=list)
    n_samples: int = 0
    std_kind: str = "population"
    trial: int | None = None


def run_experiment(config=None, seed=None):
    """Simulate, filter and score one run.

    Returns ``(RunRecord, MetricsReport)``; identical inputs give identical
    outputs bit for bit.
    """
    config = config or ExperimentConfig()
    sim = config.sim if seed is None else config.sim.with_seed(seed)
    run = generate_run(sim)
    fr = run_filter(
        run.omega_m, run.y, sim.r, config.params, sim.dt, config.R_hat0, weights=sim.weights, quaternion=config.quaternion
    )
    err = 0.25 * (3.0 - np.einsum("nij,nij->n", run.R, fr.R_hat))
    record = RunRecord(
        t=run.t,
        euler=rotations_to_euler(run.R),
        euler_hat=rotations_to_euler(fr.R_hat),
        err_RI=err,
        w_frob=fr.W_frob,
        C=fr.C,
        omega_m=run.omega_m,
        err_meas=fr.err_RI,
        psi=np.column_stack([fr.psi1, fr.psi2]),
        R=run.R,
        R_hat=fr.R_hat,
    )
    report = compute_steady_state_stats(record, config.window, config.sample_std)
    report.q = config.q
    report.seeds = [sim.noise.seed]
    report.per_seed_means = [report.mean_err]
    return record, report


def compute_steady_state_stats(record, window=(5.0, 29.0), sample_std=False):
    """Mean and standard deviation of `err_RI` for samples with t in `window`.

    The window is closed; a relative slack of 1e-9 absorbs the rounding of
    ``k * dt`` time stamps. Population std by default.
    """
    t0, t1 = window
    if t0 > t1:
        raise ValueError(f"empty window {window}")
    t = np.asarray(record.t)
    slack = 1e-9 * max(1.0, abs(t0), abs(t1))
    mask = (t >= t0 - slack) & (t <= t1 + slack)
    n = int(mask.sum())
    if n == 0 or (sample_std and n < 2):
        raise ValueError(f"no samples in window {window}")
    vals = np.asarray(record.err_RI)[mask]
    return MetricsReport(
        window=(float(t0), float(t1)),
        mean_err=float(vals.mean()),
        std_err=float(vals.std(ddof=1 if sample_std else 0)),
        n_samples=n,
        std_kind="sample" if sample_std else "population",
    )


@dataclass(frozen=True)
class SweepSpec:
    """Neuron counts, trials per count and the shared base setup.

    Trial ``k`` uses noise seed ``base_seed + k`` for every neuron count, so
    all counts see the same sensor streams.
    """

    neuron_counts: tuple = (3, 10, 50)
    trials: int = 20
    base_seed: int = 0
    config: ExperimentConfig = field(default_factory=ExperimentConfig)

    def __post_init__(self):
        counts = tuple(int(q) for q in self.neuron_counts)
        if not counts or any(q < 3 for q in counts):
            raise ValueError("neuron counts must all be >= 3")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.base_seed < 0:
            raise ValueError("base seed must be >= 0")
        object.__setattr__(self, "neuron_counts", counts)

    def seed(self, trial):
        return self.base_seed + trial


@dataclass
class SweepResult:
    """Per-trial reports plus per-q aggregates."""

    reports: list
    summary: dict

    def rows(self):
        for rep in self.reports:
            yield (rep.q, rep.trial, rep.seeds[0], rep.mean_err, rep.std_err, rep.window[0], rep.window[1])


def _sweep_job(args):
    config, q, trial, seed = args
    _, rep = run_experiment(config.with_neurons(q), seed)
    rep.trial = trial
    return rep


def sweep_neurons(spec, jobs=1):
    """Run every (q, trial) pair and aggregate per q.

    `jobs > 1` fans the runs out to worker processes; results are sorted by
    ``(q, trial)`` so the output does not depend on completion order.
    """
    tasks = [(spec.config, q, k, spec.seed(k)) for q in spec.neuron_counts for k in range(spec.trials)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            reports = list(pool.map(_sweep_job, tasks))
    else:
        reports = []
        for task in tasks:
            reports.append(_sweep_job(task))
            log.debug("q=%d trial=%d mean_err=%.3e", task[1], task[2], reports[-1].mean_err)
    reports.sort(key=lambda r: (r.q, r.trial))

    summary = {}
    for q in spec.neuron_counts:
        reps = [r for r in reports if r.q == q]
        means = [r.mean_err for r in reps]
        summary[q] = MetricsReport(
            window=reps[0].window,
            mean_err=float(np.mean(means)),
            std_err=float(np.mean([r.std_err for r in reps])),
            q=q,
            seeds=[r.seeds[0] for r in reps],
            per_seed_means=means,
            n_samples=sum(r.n_samples for r in reps),
            std_kind=reps[0].std_kind,
        )
    return SweepResult(reports, summary)


def emit_csv(record, path):
    """Write a run record with 17 significant digits and LF line endings."""
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(RUN_HEADER) + "\n")
        for row in record.table():
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def read_run_csv(path):
    """Load a run CSV written by :func:`emit_csv` back into a :class:`RunRecord`."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = tuple(next(reader, ()))
        if header != RUN_HEADER:
            raise ValueError(f"{path}: not a run CSV (header {header!r})")
        rows = [[float(v) for v in row] for row in reader if row]
    if not rows:
        return RunRecord.empty()
    a = np.array(rows)
    return RunRecord(a[:, 0], a[:, 1:4], a[:, 4:7], a[:, 7], a[:, 8], a[:, 9:12], a[:, 12:15])


def emit_sweep_csv(result, path):
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(SWEEP_HEADER) + "\n")
        for q, trial, seed, mean, std, w0, w1 in result.rows():
            fh.write(f"{q},{trial},{seed},{_fmt(mean)},{_fmt(std)},{_fmt(w0)},{_fmt(w1)}\n")


def with_noise_model(config, model):
    """Copy of `config` using the given gyro noise model."""
    sim = replace(config.sim, noise=replace(config.sim.noise, model=model))
    return replace(config, sim=sim)
