"""Neural-adaptive stochastic attitude filter on SO(3) and on unit quaternions.

Each step takes a gyro sample and the vector measurements:

1. reconstruct the measured attitude ``R_y`` (SVD),
2. form the error ``R~ = R_y^T R_hat`` and its innovation ``Upsilon(R~)``,
3. lift the innovation through the tanh feature map ``phi``,
4. adapt the weight matrix ``W_hat`` (q x q),
5. build the correction ``C`` from ``phi``, ``W_hat`` and the gains,
6. integrate ``R_hat <- R_hat exp((omega_m - C) dt)``.

The distance-dependent coefficients ``psi1 = (1 + e) exp(e) / 2`` and
``psi2 = (2 + e) exp(e) / 2`` with ``e = ||R~||_I`` scale the weight update
and the adaptive part of the correction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .so3 import (
    check_rotation,
    euclidean_distance,
    exp_map,
    quat_exp,
    quat_inverse,
    quat_product,
    quat_to_rotation,
    rotation_to_quat,
    upsilon,
)
from .wahba import Reconstructor

WEIGHT_LAWS = ("discrete", "continuous")


class NumericalFailure(ArithmeticError):
    """The filter state became non-finite or left the rotation group."""


def tight_frame(q, seed, iters=500, tol=1e-13):
    """Seeded ``(q, 3)`` matrix with unit rows and ``P^T P = (q / 3) I``.

    Starts from Gaussian rows and alternates between the nearest tight frame
    (symmetric orthogonalization) and row normalization until both hold.
    """
    if q < 3:
        raise ValueError("a frame for R^3 needs q >= 3")
    P = np.random.default_rng(seed).standard_normal((q, 3))
    P /= np.linalg.norm(P, axis=1, keepdims=True)
    target = q / 3.0
    for _ in range(iters):
        w, V = np.linalg.eigh(P.T @ P)
        P = P @ (V * np.sqrt(target / w)) @ V.T
        P /= np.linalg.norm(P, axis=1, keepdims=True)
        if np.abs(P.T @ P - target * np.eye(3)).max() < tol * q:
            break
    return P


@dataclass(frozen=True)
class FeatureMap:
    """Lift of the 3-vector innovation into ``q`` features, ``tanh(P v)``.

    ``kind="identity"`` is the plain element-wise tanh (``q = 3``).
    ``kind="fixed_projection"`` uses the seeded unit-norm tight frame from
    :func:`tight_frame`, so every direction of the innovation is excited
    equally.
    """

    kind: str = "identity"
    P: np.ndarray = field(default_factory=lambda: np.eye(3))

    @classmethod
    def for_neurons(cls, q, seed=None):
        if q == 3 and seed is None:
            return cls()
        if seed is None:
            raise ValueError(f"q={q} needs a feature seed for its projection")
        return cls("fixed_projection", tight_frame(q, seed))

    def __post_init__(self):
        P = np.asarray(self.P, dtype=float)
        if P.ndim != 2 or P.shape[1] != 3:
            raise ValueError("projection must be (q, 3)")
        if self.kind == "identity":
            if P.shape != (3, 3) or not np.array_equal(P, np.eye(3)):
                raise ValueError("identity feature map requires q = 3 and P = I")
        elif self.kind == "fixed_projection":
            if not np.allclose(np.linalg.norm(P, axis=1), 1.0, atol=1e-12):
                raise ValueError("projection rows must have unit norm")
        else:
            raise ValueError(f"unknown feature map kind {self.kind!r}")
        object.__setattr__(self, "P", P)

    @property
    def q(self):
        return self.P.shape[0]


def activation(v):
    """Element-wise hyperbolic tangent."""
    return np.tanh(v)


def feature(ups, fmap):
    """Feature vector ``phi`` for an innovation ``ups``."""
    ups = np.asarray(ups, dtype=float)
    if ups.shape != (3,):
        raise ValueError(f"innovation must be a 3-vector, got shape {ups.shape}")
    if fmap.kind == "identity":
        return np.tanh(ups)
    return np.tanh(fmap.P @ ups)


@dataclass(frozen=True)
class FilterParams:
    """Gains of the neural-adaptive filter.

    Parameters
    ----------
    Gamma_c : (q, 3) array
        Correction gain; ``Gamma_c^T Gamma_c`` must be positive definite.
    Gamma_sigma : (q, q) array
        Positive diagonal adaptation gain.
    k_sigma : float
        Weight leakage (> 0).
    feature_map : FeatureMap
    weight_law : {"discrete", "continuous"}
        Coefficient on ``phi phi^T`` in the weight update: ``psi2`` for the
        discrete recursion, ``psi2 / 2`` for the continuous-time law.
    """

    Gamma_c: np.ndarray
    Gamma_sigma: np.ndarray
    k_sigma: float = 1.0
    feature_map: FeatureMap = field(default_factory=FeatureMap)
    weight_law: str = "discrete"

    def __post_init__(self):
        Gc = np.asarray(self.Gamma_c, dtype=float)
        Gs = np.asarray(self.Gamma_sigma, dtype=float)
        q = self.feature_map.q
        if Gc.shape != (q, 3):
            raise ValueError(f"Gamma_c must be ({q}, 3), got {Gc.shape}")
        if Gs.shape != (q, q):
            raise ValueError(f"Gamma_sigma must be ({q}, {q}), got {Gs.shape}")
        if np.any(Gs - np.diag(np.diag(Gs))) or np.any(np.diag(Gs) <= 0):
            raise ValueError("Gamma_sigma must be diagonal with positive entries")
        if not self.k_sigma > 0:
            raise ValueError("k_sigma must be positive")
        if self.weight_law not in WEIGHT_LAWS:
            raise ValueError(f"weight_law must be one of {WEIGHT_LAWS}")
        GtG = Gc.T @ Gc
        k_c = np.linalg.eigvalsh(GtG)[0]
        if not k_c > 1e-12:
            raise ValueError("Gamma_c^T Gamma_c must be positive definite")
        object.__setattr__(self, "Gamma_c", Gc)
        object.__setattr__(self, "Gamma_sigma", Gs)
        object.__setattr__(self, "k_c", float(k_c))
        # (Gamma_c^T Gamma_c)^-1 Gamma_c^T, used every step
        object.__setattr__(self, "_pinv", np.linalg.solve(GtG, Gc.T))
        object.__setattr__(self, "_gs_diag", np.diag(Gs).copy())

    @property
    def q(self):
        return self.feature_map.q

    @classmethod
    def default(cls, q=3, gamma_c=2.0, gamma_sigma=2.0, k_sigma=1.0, feature_seed=None, weight_law="discrete"):
        """Scalar-gain construction used by the experiments.

        ``Gamma_sigma = gamma_sigma I_q`` and ``Gamma_c = gamma_c sqrt(3/q) P``,
        which keeps ``Gamma_c^T Gamma_c = gamma_c^2 I_3`` for every ``q``
        (and reduces to ``gamma_c I_3`` for ``q = 3``).
        """
        fmap = FeatureMap.for_neurons(q, feature_seed)
        Gc = gamma_c * math.sqrt(3.0 / q) * fmap.P
        return cls(Gc, gamma_sigma * np.eye(q), k_sigma, fmap, weight_law)


class FilterState(NamedTuple):
    """Attitude estimate (matrix or quaternion), weights and time."""

    R_hat: np.ndarray
    W_hat: np.ndarray
    t: float = 0.0
    Q_hat: np.ndarray | None = None


class StepDiagnostics(NamedTuple):
    err_RI: float
    upsilon: np.ndarray
    psi1: float
    psi2: float
    C: np.ndarray
    W_frob: float
    lyapunov: float


def initial_state(R_hat0, q, quaternion=False, W0=None):
    R_hat0 = check_rotation(R_hat0, tol=1e-6, name="R_hat0")
    W0 = np.zeros((q, q)) if W0 is None else np.array(W0, dtype=float)
    if W0.shape != (q, q):
        raise ValueError(f"initial weights must be ({q}, {q})")
    Q = rotation_to_quat(R_hat0) if quaternion else None
    return FilterState(R_hat0, W0, 0.0, Q)


def psi_coeffs(err_RI):
    """``(psi1, psi2)`` for a normalized distance in ``[0, 1]``."""
    if not (-1e-12 <= err_RI <= 1.0 + 1e-12):
        raise ValueError(f"normalized distance must lie in [0, 1], got {err_RI}")
    e = min(1.0, max(0.0, err_RI))
    x = math.exp(e)
    return 0.5 * (1.0 + e) * x, 0.5 * (2.0 + e) * x


def weight_update(W_prev, phi, psi2, params, dt):
    """One Euler step of the weight adaptation law.

    ``W + dt Gamma_sigma (c phi phi^T - k_sigma W)`` with ``c = psi2`` for
    the discrete law or ``psi2 / 2`` for the continuous one.
    """
    c = psi2 if params.weight_law == "discrete" else 0.5 * psi2
    inc = c * np.outer(phi, phi) - params.k_sigma * W_prev
    return W_prev + dt * params._gs_diag[:, None] * inc


def correction(phi, W_hat, psi1, psi2, params):
    """Correction ``(Gamma_c^T + psi2/(2 psi1) (Gamma_c^T Gamma_c)^-1 Gamma_c^T W) phi``."""
    return params.Gamma_c.T @ phi + (psi2 / (2.0 * psi1)) * (params._pinv @ (W_hat @ phi))


def lyapunov_diagnostic(err_RI, W_hat, params):
    """Monitoring value ``2 e exp(e) + Tr(W^T Gamma_sigma^-1 W) / 2``.

    The true weight error is unknowable online, so the weight estimate
    stands in for it.
    """
    if not (-1e-12 <= err_RI <= 1.0 + 1e-12):
        raise ValueError(f"normalized distance must lie in [0, 1], got {err_RI}")
    e = min(1.0, max(0.0, err_RI))
    W_hat = np.asarray(W_hat)
    return 2.0 * e * math.exp(e) + 0.5 * float(np.sum(W_hat * W_hat / params._gs_diag[:, None]))


def _adapt(Rt_ups, err, state, params, dt):
    """Shared steps 3-6 given the innovation and measured distance."""
    e = min(1.0, max(0.0, err))
    x = math.exp(e)
    psi1 = 0.5 * (1.0 + e) * x
    psi2 = 0.5 * (2.0 + e) * x
    fmap = params.feature_map
    phi = np.tanh(Rt_ups) if fmap.kind == "identity" else np.tanh(fmap.P @ Rt_ups)
    W = weight_update(state.W_hat, phi, psi2, params, dt)
    C = correction(phi, W, psi1, psi2, params)
    return e, psi1, psi2, W, C


def _diagnostics(e, ups, psi1, psi2, C, W, params):
    W_frob = math.sqrt(float(np.sum(W * W)))
    lyap = 2.0 * e * math.exp(e) + 0.5 * float(np.sum(W * W / params._gs_diag[:, None]))
    return StepDiagnostics(e, ups, psi1, psi2, C, W_frob, lyap)


def filter_step_so3(state, omega_m, R_y, params, dt):
    """Advance the matrix-form filter by one sample.

    Parameters
    ----------
    state : FilterState
    omega_m : (3,) array
        Gyro sample.
    R_y : (3, 3) array
        Attitude reconstructed from this sample's vector measurements.
    params : FilterParams
    dt : float

    Returns
    -------
    (FilterState, StepDiagnostics)
    """
    Rt = R_y.T @ state.R_hat
    ups = upsilon(Rt)
    err = euclidean_distance(Rt)
    e, psi1, psi2, W, C = _adapt(ups, err, state, params, dt)
    R_hat = state.R_hat @ exp_map((omega_m - C) * dt)
    return FilterState(R_hat, W, state.t + dt), _diagnostics(e, ups, psi1, psi2, C, W, params)


def filter_step_quat(state, omega_m, Q_y, params, dt):
    """Advance the quaternion-form filter by one sample.

    The error quaternion ``Q~ = Q_y^-1 (.) Q_hat`` gives the innovation
    ``2 q~0 q~`` and distance ``1 - q~0^2``. The estimate obeys
    ``Q_hat_dot = Phi(u) Q_hat / 2`` with ``u = omega_m - C``; for ``u``
    held over the step this integrates exactly to right-multiplication by
    the quaternion of the rotation vector ``u dt``.
    """
    Qt = quat_product(quat_inverse(Q_y), state.Q_hat)
    ups = 2.0 * Qt[0] * Qt[1:]
    err = 1.0 - Qt[0] * Qt[0]
    e, psi1, psi2, W, C = _adapt(ups, err, state, params, dt)
    Q_hat = quat_product(state.Q_hat, quat_exp((omega_m - C) * dt))
    R_hat = quat_to_rotation(Q_hat)
    return FilterState(R_hat, W, state.t + dt, Q_hat), _diagnostics(e, ups, psi1, psi2, C, W, params)


def quat_rate_matrix(u):
    """The ``4 x 4`` generator ``[[0, -u^T], [u, -[u]_x]]``."""
    u1, u2, u3 = u
    return np.array(
        [
            [0.0, -u1, -u2, -u3],
            [u1, 0.0, u3, -u2],
            [u2, -u3, 0.0, u1],
            [u3, u2, -u1, 0.0],
        ]
    )


@dataclass
class FilterRun:
    """Per-sample filter output for a whole sensor stream.

    Row ``k`` refers to the estimate held at sample ``k`` (before that
    sample's correction is applied) and the diagnostics computed from it.
    """

    R_hat: np.ndarray
    err_RI: np.ndarray
    upsilon: np.ndarray
    psi1: np.ndarray
    psi2: np.ndarray
    C: np.ndarray
    W_frob: np.ndarray
    lyapunov: np.ndarray
    final_state: FilterState
    Q_hat: np.ndarray | None = None


def run_filter(omega_m, y, r, params, dt, R_hat0, weights=None, quaternion=False, W0=None, state=None):
    """Run the filter over a whole sensor stream.

    Parameters
    ----------
    omega_m : (n, 3) array
        Gyro samples.
    y : (n, N, 3) array
        Body-frame vector measurements.
    r : (N, 3) array
        Inertial reference directions.
    params : FilterParams
    dt : float
    R_hat0 : (3, 3) array
        Initial attitude estimate (ignored when `state` is given).
    weights : (N,) array, optional
        Sensor confidence weights; default equal.
    quaternion : bool
        Propagate the estimate as a unit quaternion.
    state : FilterState, optional
        Resume from this state instead of ``(R_hat0, W0)``.
    """
    omega_m = np.asarray(omega_m, dtype=float)
    y = np.asarray(y, dtype=float)
    n = len(omega_m)
    recon = Reconstructor(r, weights)
    if state is None:
        state = initial_state(R_hat0, params.q, quaternion, W0)
    elif quaternion and state.Q_hat is None:
        state = state._replace(Q_hat=rotation_to_quat(state.R_hat))

    R_hat = np.empty((n, 3, 3))
    Q_hat = np.empty((n, 4)) if quaternion else None
    cols = {k: np.empty(n) for k in ("err_RI", "psi1", "psi2", "W_frob", "lyapunov")}
    ups = np.empty((n, 3))
    C = np.empty((n, 3))
    if not (np.all(np.isfinite(omega_m)) and np.all(np.isfinite(y))):
        raise NumericalFailure("sensor stream contains non-finite values")
    R_y = recon(y) if n else np.empty((0, 3, 3))
    for k in range(n):
        R_hat[k] = state.R_hat
        try:
            if quaternion:
                Q_hat[k] = state.Q_hat
                state, d = filter_step_quat(state, omega_m[k], rotation_to_quat(R_y[k]), params, dt)
            else:
                state, d = filter_step_so3(state, omega_m[k], R_y[k], params, dt)
        except (ValueError, OverflowError) as exc:
            # a blown-up state surfaces as a math domain or range error
            raise NumericalFailure(f"step {k}: {exc}") from exc
        cols["err_RI"][k], cols["psi1"][k], cols["psi2"][k] = d.err_RI, d.psi1, d.psi2
        cols["W_frob"][k], cols["lyapunov"][k] = d.W_frob, d.lyapunov
        ups[k], C[k] = d.upsilon, d.C
    if not (np.all(np.isfinite(state.R_hat)) and np.all(np.isfinite(state.W_hat))):
        raise NumericalFailure("filter state became non-finite")
    if np.linalg.norm(state.R_hat.T @ state.R_hat - np.eye(3)) > 1e-6:
        raise NumericalFailure("attitude estimate drifted off SO(3)")
    return FilterRun(R_hat=R_hat, upsilon=ups, C=C, final_state=state, Q_hat=Q_hat, **cols)
