"""Standalone SVG figures of a run: gyro, Euler angles, error, weights."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .sim import OmegaProfile  # noqa: E402

KINDS = ("gyro", "euler", "error", "weights")


def emit_plot(record, kind, path, log_scale=None, true_omega=None):
    """Render `record` as an SVG figure of the given `kind`.

    Parameters
    ----------
    record : RunRecord
    kind : {"gyro", "euler", "error", "weights"}
    path : str or path-like
    log_scale : bool, optional
        Logarithmic y axis; defaults to on for ``kind="error"``.
    true_omega : OmegaProfile or (n, 3) array, optional
        Overlay the true rate on the gyro plot.
    """
    if kind not in KINDS:
        raise ValueError(f"unknown plot kind {kind!r}; choose from {', '.join(KINDS)}")
    if log_scale is None:
        log_scale = kind == "error"
    t = np.asarray(record.t)
    axis_names = ("x", "y", "z")

    with plt.rc_context({"svg.hashsalt": "attfilt", "svg.fonttype": "none"}):
        if kind == "euler":
            fig, axes = plt.subplots(3, 1, sharex=True, figsize=(7, 6))
            labels = (("roll", "phi"), ("pitch", "theta"), ("yaw", "psi"))
            for i, ax in enumerate(axes):
                name, sym = labels[i]
                ax.plot(t, np.degrees(record.euler[:, i]), "g-", label=f"{sym} true")
                ax.plot(t, np.degrees(record.euler_hat[:, i]), "b--", label=f"{sym} estimated")
                ax.set_ylabel(f"{name} [deg]")
                ax.legend(loc="upper right")
            axes[-1].set_xlabel("time [s]")
            ax = axes[0]
        else:
            fig, ax = plt.subplots(figsize=(7, 4))
            if kind == "gyro":
                for i in range(3):
                    ax.plot(t, record.omega_m[:, i], lw=0.6, label=f"measured w{axis_names[i]}")
                if true_omega is not None and len(t):
                    om = true_omega(t) if isinstance(true_omega, OmegaProfile) else np.asarray(true_omega)
                    for i in range(3):
                        ax.plot(t, om[:, i], "k-", lw=1.2, label="true" if i == 0 else None)
                ax.set_ylabel("angular rate [rad/s]")
            elif kind == "error":
                ax.plot(t, record.err_RI, "r-", label="||R~||_I")
                ax.set_ylabel("normalized Euclidean error")
            else:
                ax.plot(t, record.w_frob, "m-", label="||W_hat||_F")
                ax.set_ylabel("Frobenius norm of weights")
            ax.set_xlabel("time [s]")
            if log_scale and len(t) and np.any(np.asarray(ax.lines[0].get_ydata()) > 0):
                ax.set_yscale("log")
            ax.legend(loc="upper right")
        ax.set_title({"gyro": "Rate gyro", "euler": "Euler angles", "error": "Estimation error", "weights": "Neural weights"}[kind])
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
