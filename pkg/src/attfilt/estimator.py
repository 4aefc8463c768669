"""scikit-learn style front end for the neural-adaptive attitude filter.

Sensor data is a 2-D array with one row per sample and columns
``[wx, wy, wz, y1x, y1y, y1z, ..., yNx, yNy, yNz]``: the gyro reading
followed by the body-frame vector measurements. Fitting runs the filter
over the stream, adapting the neural weights; the fitted attitude and
weights are kept so later calls can continue from them.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .filter import FilterParams, initial_state, run_filter
from .sim import DEFAULT_R1, DEFAULT_R2, default_initial_estimate
from .so3 import check_rotation, rotations_to_euler
from .wahba import Reconstructor


def check_sensor_array(X, n_vectors=None):
    """Validate sensor rows and return them as a float array.

    The column count must be ``3 + 3 N`` with ``N >= 2`` (or exactly
    ``3 + 3 n_vectors`` when given). NaN and inf are rejected.
    """
    X = check_array(X, dtype=np.float64, ensure_min_samples=1)
    ncol = X.shape[1]
    if ncol < 9 or (ncol - 3) % 3:
        raise ValueError(f"sensor rows need 3 gyro columns plus 3 per vector sensor (>= 2 sensors); got {ncol} columns")
    if n_vectors is not None and ncol != 3 + 3 * n_vectors:
        raise ValueError(f"expected {3 + 3 * n_vectors} columns for {n_vectors} vector sensors, got {ncol}")
    return X


def split_sensor_array(X):
    """``(omega_m, y)`` views of a validated sensor array."""
    return X[:, :3], X[:, 3:].reshape(len(X), -1, 3)


class NeuralAdaptiveAttitudeFilter(TransformerMixin, BaseEstimator):
    """Neural-adaptive stochastic attitude estimator.

    Parameters
    ----------
    n_neurons : int, default=3
        Number of neurons ``q``; values above 3 use a seeded projection.
    gamma_c : float, default=2.0
        Correction gain scale.
    gamma_sigma : float, default=2.0
        Adaptation gain.
    k_sigma : float, default=1.0
        Weight leakage.
    feature_seed : int, default=0
        Seed of the feature projection (ignored for ``n_neurons=3``).
    weight_law : {"discrete", "continuous"}, default="discrete"
    dt : float, default=0.01
        Sample period in seconds.
    reference_vectors : array-like of shape (N, 3), optional
        Inertial directions matching the measurement columns; default is
        the two-sensor pair ``[1, -1, 1]``, ``[0, 0, 1]``.
    sensor_weights : array-like of shape (N,), optional
    initial_attitude : array-like of shape (3, 3) or "default", default="default"
    representation : {"so3", "quaternion"}, default="so3"

    Attributes
    ----------
    attitudes_ : ndarray of shape (n_samples, 3, 3)
        Estimate held at each sample of the last ``fit``/``partial_fit``.
    R_hat_ : ndarray of shape (3, 3)
        Estimate after the last processed sample.
    W_hat_ : ndarray of shape (q, q)
        Adapted neural weights.
    diagnostics_ : dict of ndarray
        Per-sample ``err_RI`` (measured), ``psi1``, ``psi2``, ``C``,
        ``W_frob`` and ``lyapunov``.
    n_features_in_ : int
    """

    def __init__(
        self,
        n_neurons=3,
        gamma_c=2.0,
        gamma_sigma=2.0,
        k_sigma=1.0,
        feature_seed=0,
        weight_law="discrete",
        dt=0.01,
        reference_vectors=None,
        sensor_weights=None,
        initial_attitude="default",
        representation="so3",
    ):
        self.n_neurons = n_neurons
        self.gamma_c = gamma_c
        self.gamma_sigma = gamma_sigma
        self.k_sigma = k_sigma
        self.feature_seed = feature_seed
        self.weight_law = weight_law
        self.dt = dt
        self.reference_vectors = reference_vectors
        self.sensor_weights = sensor_weights
        self.initial_attitude = initial_attitude
        self.representation = representation

    def _setup(self):
        if not (isinstance(self.n_neurons, (int, np.integer)) and self.n_neurons >= 3):
            raise ValueError(f"n_neurons must be an integer >= 3, got {self.n_neurons!r}")
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.representation not in ("so3", "quaternion"):
            raise ValueError("representation must be 'so3' or 'quaternion'")
        seed = None if self.n_neurons == 3 else self.feature_seed
        params = FilterParams.default(
            int(self.n_neurons), self.gamma_c, self.gamma_sigma, self.k_sigma, seed, self.weight_law
        )
        r = np.array([DEFAULT_R1, DEFAULT_R2]) if self.reference_vectors is None else np.asarray(self.reference_vectors, float)
        Reconstructor(r, self.sensor_weights)
        if isinstance(self.initial_attitude, str):
            if self.initial_attitude != "default":
                raise ValueError(f"unknown initial attitude {self.initial_attitude!r}")
            R0 = default_initial_estimate()
        else:
            R0 = check_rotation(self.initial_attitude, tol=1e-6, name="initial_attitude")
        return params, r, R0

    def _run(self, X, state):
        params, r, R0 = self._setup()
        X = check_sensor_array(X, len(r))
        omega_m, y = split_sensor_array(X)
        quat = self.representation == "quaternion"
        out = run_filter(omega_m, y, r, params, self.dt, R0, self.sensor_weights, quaternion=quat, state=state)
        return X, out

    def _store(self, X, out):
        self.n_features_in_ = X.shape[1]
        self.attitudes_ = out.R_hat
        self.state_ = out.final_state
        self.R_hat_ = out.final_state.R_hat
        self.W_hat_ = out.final_state.W_hat
        self.diagnostics_ = {
            "err_RI": out.err_RI,
            "psi1": out.psi1,
            "psi2": out.psi2,
            "C": out.C,
            "W_frob": out.W_frob,
            "lyapunov": out.lyapunov,
        }
        return self

    def fit(self, X, y=None):
        """Run the filter over `X` from the initial state."""
        X, out = self._run(X, None)
        return self._store(X, out)

    def partial_fit(self, X, y=None):
        """Continue filtering from the last fitted state (or start fresh)."""
        state = getattr(self, "state_", None)
        X, out = self._run(X, state)
        return self._store(X, out)

    def transform(self, X):
        """Attitude estimates for `X`, continuing from the fitted state.

        The fitted state is left untouched. Returns an ``(n_samples, 9)``
        array of row-major rotation matrices; reshape with
        ``reshape(-1, 3, 3)``.
        """
        check_is_fitted(self, "state_")
        _, out = self._run(X, self.state_)
        return out.R_hat.reshape(len(out.R_hat), 9)

    def fit_transform(self, X, y=None, **fit_params):
        """Fit on `X` and return the estimates produced while fitting."""
        return self.fit(X).attitudes_.reshape(-1, 9)

    def euler_angles(self):
        """Roll, pitch, yaw of the fitted trajectory, shape ``(n, 3)``."""
        check_is_fitted(self, "attitudes_")
        return rotations_to_euler(self.attitudes_)

    def initial_state(self):
        params, _, R0 = self._setup()
        return initial_state(R0, params.q, self.representation == "quaternion")
