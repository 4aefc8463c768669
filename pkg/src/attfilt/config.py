"""Flat ``key = value`` experiment configuration.

One setting per line, dotted keys, ``#`` starts a comment::

    sim.dt = 0.01
    noise.gyro_std = 0.11
    obs.r = 1,-1,1; 0,0,1
    filter.q = 10
    filter.feature_seed = 7

Every key is optional; missing keys take the defaults of the reference
experiment. See ``KEYS`` for the full list.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np

from .filter import WEIGHT_LAWS, FilterParams
from .sim import NOISE_MODELS, DEFAULT_R1, DEFAULT_R2, NoiseSpec, OmegaProfile, SimConfig, default_initial_estimate
from .so3 import check_rotation


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending key."""

    def __init__(self, key, message):
        super().__init__(f"{key}: {message}")
        self.key = key


KEYS = {
    "sim.dt": "sample period in seconds (0.01)",
    "sim.t_end": "run length in seconds (30)",
    "sim.R0": "true initial attitude: 'identity' or 9 row-major numbers",
    "sim.omega_profile": "paper_default | constant | custom",
    "sim.omega_constant": "3 numbers, rad/s, for the constant profile",
    "sim.omega_amplitude": "3 numbers for the custom profile a*sin(f*t + p)",
    "sim.omega_frequency": "3 numbers, rad/s",
    "sim.omega_phase": "3 numbers, rad",
    "noise.gyro_std": "gyro noise level, rad/s (0.11)",
    "noise.vec_std": "vector-sensor noise std per axis (0.1)",
    "noise.model": "brownian | persample (brownian)",
    "noise.seed": "default seed when --seed is not given (0)",
    "obs.r": "inertial directions, ';'-separated triples (1,-1,1; 0,0,1)",
    "obs.weights": "sensor confidence weights, renormalized to sum 1 (equal)",
    "filter.q": "number of neurons, >= 3 (3)",
    "filter.gamma_c": "correction gain scale (2)",
    "filter.gamma_sigma": "adaptation gain, Gamma_sigma = gamma_sigma * I (2)",
    "filter.k_sigma": "weight leakage (1)",
    "filter.feature_seed": "seed of the feature projection; required when q > 3",
    "filter.weight_law": "discrete | continuous (discrete)",
    "filter.R_hat0": "initial estimate: 'default', 'identity' or 9 numbers (default)",
    "filter.representation": "so3 | quaternion (so3)",
    "metrics.window_start": "steady-state window start, s (5)",
    "metrics.window_end": "steady-state window end, s (29)",
    "metrics.sample_std": "true for n-1 standard deviation (false)",
}


DEFAULT_FEATURE_SEED = 0


@dataclass(frozen=True)
class ExperimentConfig:
    """A validated simulation, filter and metrics setup.

    Filter gains are kept as scalars so the same setup can be re-targeted
    to another neuron count with :meth:`with_neurons`.
    """

    sim: SimConfig = field(default_factory=SimConfig)
    q: int = 3
    gamma_c: float = 2.0
    gamma_sigma: float = 2.0
    k_sigma: float = 1.0
    feature_seed: int | None = None
    weight_law: str = "discrete"
    R_hat0: np.ndarray = field(default_factory=default_initial_estimate)
    quaternion: bool = False
    window: tuple = (5.0, 29.0)
    sample_std: bool = False

    @cached_property
    def params(self):
        return FilterParams.default(
            self.q, self.gamma_c, self.gamma_sigma, self.k_sigma, self.feature_seed, self.weight_law
        )

    def with_neurons(self, q):
        """Same setup with `q` neurons; q > 3 falls back to the default feature seed."""
        seed = self.feature_seed
        if q != 3 and seed is None:
            seed = DEFAULT_FEATURE_SEED
        return replace(self, q=int(q), feature_seed=seed)


def _read_pairs(text):
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}", f"expected 'key = value', got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in KEYS:
            raise ConfigError(key, "unknown key")
        if key in out:
            raise ConfigError(key, "given twice")
        out[key] = value
    return out


def _float(key, value):
    try:
        x = float(value)
    except ValueError:
        raise ConfigError(key, f"expected a number, got {value!r}") from None
    if not math.isfinite(x):
        raise ConfigError(key, "must be finite")
    return x


def _int(key, value):
    try:
        return int(value)
    except ValueError:
        raise ConfigError(key, f"expected an integer, got {value!r}") from None


def _floats(key, value, n=None):
    xs = [_float(key, v) for v in value.replace(",", " ").split()]
    if n is not None and len(xs) != n:
        raise ConfigError(key, f"expected {n} numbers, got {len(xs)}")
    return xs


def _bool(key, value):
    v = value.lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ConfigError(key, f"expected true/false, got {value!r}")


def _choice(key, value, choices):
    if value not in choices:
        raise ConfigError(key, f"must be one of {', '.join(choices)}; got {value!r}")
    return value


def _rotation(key, value, named):
    if value in named:
        return named[value]()
    M = np.array(_floats(key, value, 9)).reshape(3, 3)
    try:
        return check_rotation(M, tol=1e-6, name=key)
    except ValueError as exc:
        raise ConfigError(key, str(exc)) from None


def build_config(pairs):
    """Validate a ``{dotted key: string value}`` mapping."""
    for key in pairs:
        if key not in KEYS:
            raise ConfigError(key, "unknown key")
    g = pairs.get

    dt = _float("sim.dt", g("sim.dt", "0.01"))
    if dt <= 0:
        raise ConfigError("sim.dt", "must be positive")
    t_end = _float("sim.t_end", g("sim.t_end", "30"))
    if t_end <= dt:
        raise ConfigError("sim.t_end", "must exceed sim.dt")
    R0 = _rotation("sim.R0", g("sim.R0", "identity"), {"identity": lambda: np.eye(3)})

    kind = _choice("sim.omega_profile", g("sim.omega_profile", "paper_default"), ("paper_default", "constant", "custom"))
    prof = {"kind": kind}
    for name in ("constant", "amplitude", "frequency", "phase"):
        key = f"sim.omega_{name}"
        if key in pairs:
            prof[name] = tuple(_floats(key, pairs[key], 3))
    profile = OmegaProfile(**prof)

    gyro_std = _float("noise.gyro_std", g("noise.gyro_std", "0.11"))
    vec_std = _float("noise.vec_std", g("noise.vec_std", "0.1"))
    for key, v in (("noise.gyro_std", gyro_std), ("noise.vec_std", vec_std)):
        if v < 0:
            raise ConfigError(key, "must be >= 0")
    model = _choice("noise.model", g("noise.model", "brownian"), NOISE_MODELS)
    seed = _int("noise.seed", g("noise.seed", "0"))
    if seed < 0:
        raise ConfigError("noise.seed", "must be >= 0")
    noise = NoiseSpec(gyro_std, vec_std, seed, model)

    if "obs.r" in pairs:
        r = np.array([_floats("obs.r", chunk, 3) for chunk in pairs["obs.r"].split(";") if chunk.strip()])
    else:
        r = np.array([DEFAULT_R1, DEFAULT_R2])
    weights = np.array(_floats("obs.weights", pairs["obs.weights"], len(r))) if "obs.weights" in pairs else None
    try:
        sim = SimConfig(dt, t_end, noise, r, weights, R0, profile)
    except ValueError as exc:
        key = "obs.weights" if "weight" in str(exc) else "obs.r"
        raise ConfigError(key, str(exc)) from None

    q = _int("filter.q", g("filter.q", "3"))
    if q < 3:
        raise ConfigError("filter.q", "must be >= 3")
    feature_seed = None
    if "filter.feature_seed" in pairs:
        feature_seed = _int("filter.feature_seed", pairs["filter.feature_seed"])
    elif q != 3:
        raise ConfigError("filter.feature_seed", f"required when filter.q = {q} (> 3)")
    gains = {}
    for name, default in (("gamma_c", "2"), ("gamma_sigma", "2"), ("k_sigma", "1")):
        key = f"filter.{name}"
        gains[name] = _float(key, g(key, default))
        if gains[name] <= 0:
            raise ConfigError(key, "must be positive")
    law = _choice("filter.weight_law", g("filter.weight_law", "discrete"), WEIGHT_LAWS)
    R_hat0 = _rotation(
        "filter.R_hat0", g("filter.R_hat0", "default"), {"default": default_initial_estimate, "identity": lambda: np.eye(3)}
    )
    rep = _choice("filter.representation", g("filter.representation", "so3"), ("so3", "quaternion"))

    w0 = _float("metrics.window_start", g("metrics.window_start", "5"))
    w1 = _float("metrics.window_end", g("metrics.window_end", "29"))
    if not 0 <= w0 <= w1:
        raise ConfigError("metrics.window_start", "window must satisfy 0 <= start <= end")
    if w1 > t_end:
        raise ConfigError("metrics.window_end", f"exceeds sim.t_end = {t_end}")
    sample_std = _bool("metrics.sample_std", g("metrics.sample_std", "false"))
    return ExperimentConfig(
        sim,
        q,
        feature_seed=feature_seed,
        weight_law=law,
        R_hat0=R_hat0,
        quaternion=rep == "quaternion",
        window=(w0, w1),
        sample_std=sample_std,
        **gains,
    )


def parse_config(path):
    """Read and validate a configuration file (an empty file gives defaults)."""
    with open(path) as fh:
        return build_config(_read_pairs(fh.read()))


def parse_config_text(text):
    return build_config(_read_pairs(text))
