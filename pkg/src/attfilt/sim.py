"""Ground-truth rigid-body rotation and noisy IMU-style sensor streams.

Truth follows ``R_dot = R [omega]_x`` integrated with the exact exponential
map per step, so it never leaves SO(3). The gyro reports ``omega + n`` and
each vector sensor reports ``R^T r_i + n_i``.

Randomness comes from one integer seed. The gyro and each vector sensor get
their own child stream of ``numpy.random.SeedSequence(seed)``, so adding a
sensor never perturbs the gyro noise and runs are bit-reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Iterator, NamedTuple

import numpy as np

from .so3 import check_rotation, exp_map, project_to_so3
from .wahba import Reconstructor

DEFAULT_R1 = (1.0, -1.0, 1.0)
DEFAULT_R2 = (0.0, 0.0, 1.0)

NOISE_MODELS = ("brownian", "persample")


@dataclass(frozen=True)
class NoiseSpec:
    """Sensor noise levels and the seed that realizes them.

    ``model="persample"`` adds ``N(0, gyro_std^2)`` to every gyro sample.
    ``model="brownian"`` treats `gyro_std` as the intensity of the Brownian
    motion driving the rate noise: the noise integrated over one step has
    standard deviation ``gyro_std * sqrt(dt)``, so each sample carries
    ``N(0, gyro_std^2 / dt)``. Vector-sensor noise is always per sample.
    """

    gyro_std: float = 0.11
    vec_std: float = 0.1
    seed: int = 0
    model: str = "brownian"

    def __post_init__(self):
        if not (self.gyro_std >= 0 and self.vec_std >= 0):
            raise ValueError("noise standard deviations must be >= 0")
        if self.model not in NOISE_MODELS:
            raise ValueError(f"noise model must be one of {NOISE_MODELS}, got {self.model!r}")

    def gyro_scale(self, dt):
        """Per-sample standard deviation of the gyro noise at step `dt`."""
        if self.model == "brownian":
            return self.gyro_std / math.sqrt(dt)
        return self.gyro_std


@dataclass(frozen=True)
class OmegaProfile:
    """True body rate as a function of time.

    ``paper_default``: ``0.6 [sin(0.4t), sin(0.7t + pi/4), 0.4 cos(0.3t)]``.
    ``constant``: `constant` for all t.
    ``custom``: ``amplitude * sin(frequency * t + phase)`` per axis.
    """

    kind: str = "paper_default"
    constant: tuple = (0.0, 0.0, 0.0)
    amplitude: tuple = (0.0, 0.0, 0.0)
    frequency: tuple = (0.0, 0.0, 0.0)
    phase: tuple = (0.0, 0.0, 0.0)

    def __post_init__(self):
        if self.kind not in ("paper_default", "constant", "custom"):
            raise ValueError(f"unknown omega profile {self.kind!r}")
        for name in ("constant", "amplitude", "frequency", "phase"):
            v = tuple(float(x) for x in getattr(self, name))
            if len(v) != 3 or not all(math.isfinite(x) for x in v):
                raise ValueError(f"omega profile {name} must be 3 finite numbers")
            object.__setattr__(self, name, v)

    def __call__(self, t):
        """Rate at time(s) `t`; scalar `t` gives ``(3,)``, arrays ``(n, 3)``."""
        t = np.asarray(t, dtype=float)
        if self.kind == "paper_default":
            out = 0.6 * np.stack([np.sin(0.4 * t), np.sin(0.7 * t + np.pi / 4), 0.4 * np.cos(0.3 * t)], axis=-1)
        elif self.kind == "constant":
            out = np.broadcast_to(np.array(self.constant), t.shape + (3,)).copy()
        else:
            a, f, p = (np.array(v) for v in (self.amplitude, self.frequency, self.phase))
            out = a * np.sin(t[..., None] * f + p)
        return out


def true_angular_velocity(t, profile=None):
    """Body rate of `profile` (default: the reference trajectory) at time `t`."""
    if t < 0:
        raise ValueError("time must be non-negative")
    return (profile or OmegaProfile())(t)


def default_initial_estimate():
    """The large-error initial attitude estimate used in the experiments.

    The four-digit entries are off SO(3) by ~1e-4, so they are
    projected onto the group before use.
    """
    M = np.array([[-0.9214, -0.0103, 0.3884], [0.2753, -0.7227, 0.634], [0.2742, 0.6911, 0.6687]])
    return project_to_so3(M)


@dataclass(frozen=True)
class SimConfig:
    """Everything needed to generate one truth trajectory and its sensors."""

    dt: float = 0.01
    t_end: float = 30.0
    noise: NoiseSpec = field(default_factory=NoiseSpec)
    r: np.ndarray = field(default_factory=lambda: np.array([DEFAULT_R1, DEFAULT_R2]))
    weights: np.ndarray | None = None
    R0: np.ndarray = field(default_factory=lambda: np.eye(3))
    omega_profile: OmegaProfile = field(default_factory=OmegaProfile)

    def __post_init__(self):
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise ValueError("sim.dt must be positive")
        if not (self.t_end > self.dt and math.isfinite(self.t_end)):
            raise ValueError("sim.t_end must exceed sim.dt")
        r = np.atleast_2d(np.asarray(self.r, dtype=float))
        if r.ndim != 2 or r.shape[1] != 3 or r.shape[0] < 2:
            raise ValueError("need at least two 3-vector observations")
        Reconstructor(r, self.weights)  # validates geometry and weights
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "R0", check_rotation(self.R0, name="sim.R0"))

    @property
    def n_steps(self):
        return int(math.ceil(self.t_end / self.dt - 1e-9))

    def with_seed(self, seed):
        return replace(self, noise=replace(self.noise, seed=int(seed)))


class TruthState(NamedTuple):
    t: float
    R: np.ndarray
    omega: np.ndarray


class SensorFrame(NamedTuple):
    t: float
    omega_m: np.ndarray
    y: np.ndarray


def propagate_truth(state, dt, profile=None):
    """Advance the true attitude one step: ``R <- R exp(omega(t) dt)``."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    profile = profile or OmegaProfile()
    R = state.R @ exp_map(state.omega * dt)
    t = state.t + dt
    return TruthState(t, R, profile(t))


def sensor_rngs(seed, n_vectors):
    """Independent generators for the gyro and each vector sensor."""
    children = np.random.SeedSequence(int(seed)).spawn(1 + n_vectors)
    return [np.random.Generator(np.random.PCG64(c)) for c in children]


def gyro_measure(omega, noise, rng, dt=None):
    """One gyro sample ``omega + n``.

    `dt` is only needed for the Brownian noise model.
    """
    if noise.model == "brownian":
        if dt is None:
            raise ValueError("the brownian noise model needs dt")
        scale = noise.gyro_scale(dt)
    else:
        scale = noise.gyro_std
    omega = np.asarray(omega, dtype=float)
    if scale == 0.0:
        return omega.copy()
    return omega + scale * rng.standard_normal(3)


def vector_measure(R, r_list, noise, rngs):
    """Body-frame measurements ``R^T r_i + n_i``, one generator per sensor.

    A single generator may be given instead of a list; it is then shared.
    """
    r_list = np.atleast_2d(np.asarray(r_list, dtype=float))
    y = r_list @ np.asarray(R)  # row i = (R^T r_i)^T
    if noise.vec_std == 0.0:
        return y
    if isinstance(rngs, np.random.Generator):
        rngs = [rngs] * len(r_list)
    return y + noise.vec_std * np.array([g.standard_normal(3) for g in rngs])


@dataclass
class SimRun:
    """Time-aligned truth and sensor arrays for one simulated run.

    Row ``k`` holds the state at ``t[k] = k * dt``: the true attitude
    ``R[k]``, the true rate ``omega[k]`` applied over ``[t_k, t_k + dt)``,
    the gyro sample ``omega_m[k]`` and the vector measurements ``y[k]``.
    """

    config: SimConfig
    t: np.ndarray
    R: np.ndarray
    omega: np.ndarray
    omega_m: np.ndarray
    y: np.ndarray

    def __len__(self):
        return len(self.t)

    def frames(self) -> Iterator[tuple[TruthState, SensorFrame]]:
        for k in range(len(self.t)):
            t = float(self.t[k])
            yield TruthState(t, self.R[k], self.omega[k]), SensorFrame(t, self.omega_m[k], self.y[k])

    def sensor_array(self):
        """Sensor samples as an ``(n, 3 + 3N)`` array ``[omega_m, y_1, ..., y_N]``."""
        return np.hstack([self.omega_m, self.y.reshape(len(self.t), -1)])


def generate_run(config):
    """Simulate ``ceil(t_end / dt)`` samples of truth and sensor data."""
    n = config.n_steps
    dt = config.dt
    nvec = len(config.r)
    t = np.arange(n) * dt
    omega = config.omega_profile(t)

    R = np.empty((n, 3, 3))
    R[0] = config.R0
    for k in range(n - 1):
        R[k + 1] = R[k] @ exp_map(omega[k] * dt)

    rngs = sensor_rngs(config.noise.seed, nvec)
    gscale = config.noise.gyro_scale(dt)
    omega_m = omega + gscale * rngs[0].standard_normal((n, 3)) if gscale > 0 else omega.copy()

    y = np.einsum("ij,njk->nik", config.r, R)
    if config.noise.vec_std > 0:
        for i in range(nvec):
            y[:, i, :] += config.noise.vec_std * rngs[1 + i].standard_normal((n, 3))
    return SimRun(config, t, R, omega, omega_m, y)


def export_sensor_csv(run, path):
    """Write the raw sensor stream as CSV with 17 significant digits."""
    nvec = run.y.shape[1]
    header = ["t", "wx", "wy", "wz"] + [f"y{i + 1}{a}" for i in range(nvec) for a in "xyz"]
    data = np.column_stack([run.t, run.sensor_array()])
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in data:
            fh.write(",".join(format(v, ".17g") for v in row) + "\n")
