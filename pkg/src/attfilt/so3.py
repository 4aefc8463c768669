"""Rotation-group and unit-quaternion primitives.

Rotations are plain ``(3, 3)`` float arrays and quaternions are ``(4,)``
arrays ordered ``[q0, qx, qy, qz]`` (scalar first, Hamilton product).
Functions that accept a rotation from the outside validate it with
:func:`check_rotation`; the hot paths of the filter skip validation.
"""

from __future__ import annotations

import math
import warnings

import numpy as np

TOL_ORTH = 1e-9
TOL_ANTISYM = 1e-6
SMALL_ANGLE = 1e-10
GIMBAL_TOL = 1e-7

_EYE3 = np.eye(3)
_EYE3.setflags(write=False)


class GimbalLockWarning(RuntimeWarning):
    """Pitch is within numerical reach of +/- pi/2; roll and yaw are coupled."""


def check_rotation(R, tol=TOL_ORTH, name="R"):
    """Return ``R`` as a float array after checking it lies on SO(3).

    Raises
    ------
    ValueError
        If the shape is wrong, an entry is not finite, ``R^T R`` deviates
        from identity by more than `tol` (Frobenius), or ``det(R) != +1``.
    """
    R = np.asarray(R, dtype=float)
    if R.shape != (3, 3):
        raise ValueError(f"{name} must have shape (3, 3), got {R.shape}")
    if not np.all(np.isfinite(R)):
        raise ValueError(f"{name} has non-finite entries")
    orth = np.linalg.norm(R.T @ R - _EYE3)
    if orth > tol:
        raise ValueError(f"{name} is not orthogonal: ||R^T R - I||_F = {orth:.3e}")
    det = np.linalg.det(R)
    if abs(det - 1.0) > tol:
        raise ValueError(f"{name} must have det +1, got {det:.12f}")
    return R


def skew(a):
    """Map a 3-vector to its cross-product matrix ``[a]_x``."""
    a1, a2, a3 = a
    return np.array([[0.0, -a3, a2], [a3, 0.0, -a1], [-a2, a1, 0.0]])


def vex(S, tol=TOL_ANTISYM):
    """Inverse of :func:`skew`.

    The symmetric part of `S` must be negligible; anything else means the
    caller passed the wrong matrix.
    """
    S = np.asarray(S, dtype=float)
    sym = np.linalg.norm(0.5 * (S + S.T))
    if sym > tol:
        raise ValueError(f"vex() needs an anti-symmetric matrix, symmetric part norm {sym:.3e}")
    return np.array([S[2, 1], S[0, 2], S[1, 0]])


def antisym_project(M):
    """Anti-symmetric part ``(M - M^T) / 2``."""
    M = np.asarray(M, dtype=float)
    return 0.5 * (M - M.T)


def upsilon(M):
    """``vex`` of the anti-symmetric part of `M`.

    For a rotation by angle ``theta`` about unit ``axis`` this equals
    ``sin(theta) * axis``.
    """
    return 0.5 * np.array([M[2, 1] - M[1, 2], M[0, 2] - M[2, 0], M[1, 0] - M[0, 1]])


def euclidean_distance(R):
    """Normalized distance ``Tr(I - R) / 4`` of a rotation from identity.

    Ranges over ``[0, 1]``: 0 at the identity, 1 for any half-turn.
    """
    return 0.25 * (3.0 - (R[0, 0] + R[1, 1] + R[2, 2]))


def exp_map(rho):
    """Rodrigues formula: rotation vector to rotation matrix.

    Below ``|rho| < 1e-10`` the second-order series ``I + K + K^2/2`` is used,
    where the axis ``rho / |rho|`` is numerically meaningless.
    """
    x, y, z = rho
    mu = math.sqrt(x * x + y * y + z * z)
    if mu < SMALL_ANGLE:
        K = np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])
        return _EYE3 + K + 0.5 * (K @ K)
    x, y, z = x / mu, y / mu, z / mu
    s, c = math.sin(mu), 1.0 - math.cos(mu)
    return np.array(
        [
            [1.0 - c * (y * y + z * z), -s * z + c * x * y, s * y + c * x * z],
            [s * z + c * x * y, 1.0 - c * (x * x + z * z), -s * x + c * y * z],
            [-s * y + c * x * z, s * x + c * y * z, 1.0 - c * (x * x + y * y)],
        ]
    )


def log_map(R):
    """Rotation vector of `R` (inverse of :func:`exp_map` for angles < pi)."""
    R = np.asarray(R, dtype=float)
    cos_theta = min(1.0, max(-1.0, 0.5 * (np.trace(R) - 1.0)))
    theta = math.acos(cos_theta)
    if theta < 1e-8:
        return upsilon(R)
    if math.pi - theta < 1e-6:
        # sin(theta) ~ 0: recover the axis from the symmetric part
        B = 0.5 * (R + _EYE3)
        axis = B[np.argmax(np.diag(B))]
        axis = axis / np.linalg.norm(axis)
        if np.dot(upsilon(R), axis) < 0:
            axis = -axis
        return theta * axis
    return theta / math.sin(theta) * upsilon(R)


def geodesic_angle(R1, R2):
    """Angle in radians of the relative rotation ``R1^T R2``."""
    c = 0.5 * (np.trace(np.asarray(R1).T @ np.asarray(R2)) - 1.0)
    return math.acos(min(1.0, max(-1.0, c)))


def project_to_so3(M):
    """Nearest rotation to `M` in the Frobenius norm.

    Uses the SVD with a determinant correction on the last singular
    direction. Matrices with ``det <= 0`` or rank below 3 are rejected.
    """
    M = np.asarray(M, dtype=float)
    if M.shape != (3, 3) or not np.all(np.isfinite(M)):
        raise ValueError("project_to_so3() needs a finite (3, 3) matrix")
    U, s, Vt = np.linalg.svd(M)
    if s[-1] <= 1e-12 * max(s[0], 1e-300):
        raise ValueError("project_to_so3() got a rank-deficient matrix")
    if np.linalg.det(M) <= 0.0:
        raise ValueError("project_to_so3() needs det(M) > 0")
    d = np.linalg.det(U) * np.linalg.det(Vt)
    return (U * np.array([1.0, 1.0, d])) @ Vt


def rotation_to_euler(R):
    """Roll, pitch, yaw (rad) for the intrinsic ZYX convention.

    ``R = Rz(yaw) @ Ry(pitch) @ Rx(roll)``. Emits :class:`GimbalLockWarning`
    when ``|cos(pitch)| < 1e-7``; yaw is then pinned to zero and roll absorbs
    the remaining rotation about the vertical.
    """
    R = np.asarray(R, dtype=float)
    sp = -R[2, 0]
    sp = min(1.0, max(-1.0, sp))
    pitch = math.asin(sp)
    if math.cos(pitch) < GIMBAL_TOL:
        warnings.warn("pitch near +/-pi/2; roll and yaw are not separable", GimbalLockWarning, stacklevel=2)
        yaw = 0.0
        roll = math.atan2(-R[1, 2], R[1, 1])
        return roll, pitch, yaw
    roll = math.atan2(R[2, 1], R[2, 2])
    yaw = math.atan2(R[1, 0], R[0, 0])
    return roll, pitch, yaw


def euler_to_rotation(roll, pitch, yaw):
    """Inverse of :func:`rotation_to_euler`."""
    cr, sr = math.cos(roll), math.sin(roll)
    cp, sp = math.cos(pitch), math.sin(pitch)
    cy, sy = math.cos(yaw), math.sin(yaw)
    return np.array(
        [
            [cy * cp, cy * sp * sr - sy * cr, cy * sp * cr + sy * sr],
            [sy * cp, sy * sp * sr + cy * cr, sy * sp * cr - cy * sr],
            [-sp, cp * sr, cp * cr],
        ]
    )


def rotations_to_euler(Rs):
    """Vectorized :func:`rotation_to_euler` over an ``(n, 3, 3)`` stack.

    Returns an ``(n, 3)`` array of roll, pitch, yaw. No gimbal warning.
    """
    Rs = np.asarray(Rs, dtype=float).reshape(-1, 3, 3)
    pitch = np.arcsin(np.clip(-Rs[:, 2, 0], -1.0, 1.0))
    roll = np.arctan2(Rs[:, 2, 1], Rs[:, 2, 2])
    yaw = np.arctan2(Rs[:, 1, 0], Rs[:, 0, 0])
    return np.column_stack([roll, pitch, yaw])


# ---------------------------------------------------------------- quaternions


def quat_canonical(Q):
    """Unit-normalize `Q` and flip its sign so that ``q0 >= 0``."""
    Q = np.asarray(Q, dtype=float)
    n = np.linalg.norm(Q)
    if Q.shape != (4,) or not np.isfinite(n) or n == 0.0:
        raise ValueError("quaternion must be a finite non-zero 4-vector")
    Q = Q / n
    return -Q if Q[0] < 0.0 else Q


def quat_product(Q1, Q2):
    """Hamilton product ``Q1 (.) Q2``, re-normalized and canonicalized."""
    a0, a1, a2, a3 = Q1
    b0, b1, b2, b3 = Q2
    out = np.array(
        [
            a0 * b0 - a1 * b1 - a2 * b2 - a3 * b3,
            a0 * b1 + b0 * a1 + a2 * b3 - a3 * b2,
            a0 * b2 + b0 * a2 + a3 * b1 - a1 * b3,
            a0 * b3 + b0 * a3 + a1 * b2 - a2 * b1,
        ]
    )
    out /= math.sqrt(out @ out)
    return -out if out[0] < 0.0 else out


def quat_inverse(Q):
    """Conjugate of a unit quaternion."""
    return np.array([Q[0], -Q[1], -Q[2], -Q[3]], dtype=float)


def quat_to_rotation(Q):
    """Rotation matrix ``(q0^2 - |q|^2) I + 2 q q^T + 2 q0 [q]_x``."""
    q0 = Q[0]
    q = np.asarray(Q[1:], dtype=float)
    return (q0 * q0 - q @ q) * _EYE3 + 2.0 * np.outer(q, q) + 2.0 * q0 * skew(q)


def rotation_to_quat(R):
    """Unit quaternion (``q0 >= 0``) for a rotation matrix.

    Shepperd's method: pivot on the largest of ``q0^2, qx^2, qy^2, qz^2`` so
    the square root argument never approaches zero.
    """
    R = np.asarray(R, dtype=float)
    tr = R[0, 0] + R[1, 1] + R[2, 2]
    pivots = (tr, R[0, 0], R[1, 1], R[2, 2])
    i = max(range(4), key=pivots.__getitem__)
    if i == 0:
        s = 2.0 * math.sqrt(1.0 + tr)
        Q = [0.25 * s, (R[2, 1] - R[1, 2]) / s, (R[0, 2] - R[2, 0]) / s, (R[1, 0] - R[0, 1]) / s]
    elif i == 1:
        s = 2.0 * math.sqrt(1.0 + R[0, 0] - R[1, 1] - R[2, 2])
        Q = [(R[2, 1] - R[1, 2]) / s, 0.25 * s, (R[0, 1] + R[1, 0]) / s, (R[0, 2] + R[2, 0]) / s]
    elif i == 2:
        s = 2.0 * math.sqrt(1.0 + R[1, 1] - R[0, 0] - R[2, 2])
        Q = [(R[0, 2] - R[2, 0]) / s, (R[0, 1] + R[1, 0]) / s, 0.25 * s, (R[1, 2] + R[2, 1]) / s]
    else:
        s = 2.0 * math.sqrt(1.0 + R[2, 2] - R[0, 0] - R[1, 1])
        Q = [(R[1, 0] - R[0, 1]) / s, (R[0, 2] + R[2, 0]) / s, (R[1, 2] + R[2, 1]) / s, 0.25 * s]
    return quat_canonical(np.array(Q))


def quat_exp(rho):
    """Unit quaternion of the rotation vector `rho` (half-angle form)."""
    x, y, z = rho
    mu = math.sqrt(x * x + y * y + z * z)
    if mu < SMALL_ANGLE:
        return quat_canonical(np.array([1.0, 0.5 * x, 0.5 * y, 0.5 * z]))
    k = math.sin(0.5 * mu) / mu
    return np.array([math.cos(0.5 * mu), k * x, k * y, k * z])


def random_rotations(n, rng):
    """`n` rotations drawn uniformly (Haar) on SO(3), shape ``(n, 3, 3)``."""
    Q = rng.standard_normal((n, 4))
    Q /= np.linalg.norm(Q, axis=1, keepdims=True)
    q0 = Q[:, 0]
    q = Q[:, 1:]
    out = (q0**2 - np.einsum("ij,ij->i", q, q))[:, None, None] * _EYE3
    out = out + 2.0 * np.einsum("ni,nj->nij", q, q)
    S = np.zeros((n, 3, 3))
    S[:, 0, 1], S[:, 0, 2], S[:, 1, 2] = -q[:, 2], q[:, 1], -q[:, 0]
    S[:, 1, 0], S[:, 2, 0], S[:, 2, 1] = q[:, 2], -q[:, 1], q[:, 0]
    return out + 2.0 * q0[:, None, None] * S
