"""Attitude reconstruction from weighted vector observations (Wahba's problem).

Body-frame measurements ``y_i ~ R^T r_i`` of known inertial directions
``r_i`` are combined into ``B = sum_i s_i y_i r_i^T``; the SVD of ``B`` with
determinant-corrected factors gives the rotation ``R_y`` that best aligns
the pairs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

TOL_COLLINEAR = 1e-6
TOL_RANK = 1e-10


class DegenerateGeometryError(ValueError):
    """The observation set does not pin down a unique attitude."""


@dataclass(frozen=True)
class ObservationSet:
    """Paired inertial directions `r`, body measurements `y` and weights `s`.

    Arrays are ``(N, 3)``, ``(N, 3)`` and ``(N,)``. Weights default to
    ``1/N``. Construction only checks shapes; call :func:`normalize_pairs`
    to enforce unit vectors and weights summing to one.
    """

    r: np.ndarray
    y: np.ndarray
    s: np.ndarray | None = None

    def __post_init__(self):
        r = np.atleast_2d(np.asarray(self.r, dtype=float))
        y = np.atleast_2d(np.asarray(self.y, dtype=float))
        if r.ndim != 2 or r.shape[1] != 3 or r.shape != y.shape:
            raise ValueError(f"r and y must both be (N, 3), got {r.shape} and {y.shape}")
        if r.shape[0] < 2:
            raise DegenerateGeometryError("need at least two observation pairs")
        s = np.full(r.shape[0], 1.0 / r.shape[0]) if self.s is None else np.asarray(self.s, dtype=float)
        if s.shape != (r.shape[0],):
            raise ValueError(f"expected {r.shape[0]} weights, got shape {s.shape}")
        if np.any(s < 0) or not np.all(np.isfinite(s)) or s.sum() <= 0:
            raise ValueError("weights must be finite, non-negative and not all zero")
        if not (np.all(np.isfinite(r)) and np.all(np.isfinite(y))):
            raise ValueError("observation vectors must be finite")
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "s", s)

    def __len__(self):
        return self.r.shape[0]


def _unit_rows(v, what):
    n = np.linalg.norm(v, axis=1)
    if np.any(n == 0.0):
        raise ValueError(f"zero-norm {what} vector cannot be normalized")
    return v / n[:, None]


def normalize_pairs(obs):
    """Scale every `r` and `y` to unit length and the weights to sum one."""
    return ObservationSet(_unit_rows(obs.r, "r"), _unit_rows(obs.y, "y"), obs.s / obs.s.sum())


def augment_cross(obs):
    """Complete a two-pair set with ``r3 = r2 x r1`` and ``y3 = y2 x y1``.

    The new pair gets the mean weight of the first two before all weights
    are renormalized, so the default equal weighting stays equal.
    """
    if len(obs) != 2:
        raise ValueError(f"augment_cross() needs exactly 2 pairs, got {len(obs)}")
    obs = normalize_pairs(obs)
    r3 = np.cross(obs.r[1], obs.r[0])
    if np.linalg.norm(r3) <= TOL_COLLINEAR:
        raise DegenerateGeometryError("inertial observations are collinear")
    y3 = np.cross(obs.y[1], obs.y[0])
    if np.linalg.norm(y3) <= TOL_COLLINEAR:
        raise DegenerateGeometryError("body measurements are collinear")
    s = np.append(obs.s, obs.s.mean())
    return normalize_pairs(ObservationSet(np.vstack([obs.r, r3]), np.vstack([obs.y, y3]), s))


def svd_attitude(B):
    """Rotation ``V+ U+^T`` from the SVD ``B = U S V^T``.

    ``U+ = U diag(1, 1, det U)`` and likewise for ``V``, which forces the
    result to have determinant +1 whatever the noise. `B` may also be a
    stack of shape ``(n, 3, 3)``.
    """
    U, sv, Vt = np.linalg.svd(B)
    bad = sv[..., 1] <= TOL_RANK * np.maximum(sv[..., 0], 1e-300)
    if np.any(bad):
        raise DegenerateGeometryError("attitude profile matrix has rank < 2")
    V = np.swapaxes(Vt, -1, -2)
    U[..., 2] *= np.linalg.det(U)[..., None]
    V[..., 2] *= np.linalg.det(V)[..., None]
    return V @ np.swapaxes(U, -1, -2)


def reconstruct_svd(obs):
    """Measured attitude ``R_y`` from an observation set.

    Two-pair sets are completed with :func:`augment_cross` first; larger
    sets are used as given after normalization.
    """
    obs = augment_cross(obs) if len(obs) == 2 else normalize_pairs(obs)
    if len(obs) > 2 and np.linalg.matrix_rank(obs.r, tol=TOL_COLLINEAR) < 2:
        raise DegenerateGeometryError("inertial observations are collinear")
    B = np.einsum("i,ij,ik->jk", obs.s, obs.y, obs.r)
    return svd_attitude(B)


def attitude_error(R_y, R_hat):
    """Estimation error ``R_y^T R_hat`` (identity when the two agree)."""
    return np.asarray(R_y).T @ np.asarray(R_hat)


class Reconstructor:
    """Precomputed reconstruction for a fixed set of inertial directions.

    The filter calls this once per sample with fresh body measurements, so
    the inertial side (normalization, cross-product completion, weights) is
    prepared once here. Results match :func:`reconstruct_svd`.
    """

    def __init__(self, r, s=None):
        obs = ObservationSet(r, r, s)
        obs = augment_cross(obs) if len(obs) == 2 else normalize_pairs(obs)
        if np.linalg.matrix_rank(obs.r, tol=TOL_COLLINEAR) < 2:
            raise DegenerateGeometryError("inertial observations are collinear")
        self.n_pairs = len(r)
        self._augment = self.n_pairs == 2
        self._sr = obs.s[:, None] * obs.r

    def __call__(self, y):
        """``R_y`` for one ``(N, 3)`` measurement set or a ``(n, N, 3)`` stack."""
        y = np.asarray(y, dtype=float)
        if y.shape[-2:] != (self.n_pairs, 3):
            raise ValueError(f"expected measurements of shape (..., {self.n_pairs}, 3), got {y.shape}")
        n = np.sqrt(np.einsum("...ij,...ij->...i", y, y))
        if np.any(n == 0.0):
            raise ValueError("zero-norm y vector cannot be normalized")
        y = y / n[..., None]
        if self._augment:
            y3 = np.cross(y[..., 1, :], y[..., 0, :])
            n3 = np.sqrt(np.einsum("...i,...i->...", y3, y3))
            if np.any(n3 <= TOL_COLLINEAR):
                raise DegenerateGeometryError("body measurements are collinear")
            y = np.concatenate([y, (y3 / n3[..., None])[..., None, :]], axis=-2)
        return svd_attitude(np.swapaxes(y, -1, -2) @ self._sr)
