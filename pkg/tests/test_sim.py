import numpy as np
import pytest

from attfilt.sim import (
    DEFAULT_R1,
    DEFAULT_R2,
    NoiseSpec,
    OmegaProfile,
    SimConfig,
    TruthState,
    export_sensor_csv,
    generate_run,
    gyro_measure,
    propagate_truth,
    sensor_rngs,
    true_angular_velocity,
    vector_measure,
)
from attfilt.so3 import euclidean_distance, exp_map, random_rotations, upsilon

QUIET = NoiseSpec(0.0, 0.0)


def test_true_rate_examples():
    assert np.allclose(true_angular_velocity(0.0), [0, 0.6 * np.sin(np.pi / 4), 0.24], atol=1e-15)
    c = (0.1, -0.2, 0.3)
    prof = OmegaProfile("constant", constant=c)
    assert np.allclose(prof(np.linspace(0, 10, 7)), np.tile(c, (7, 1)))
    t = np.linspace(0, 200, 20001)
    assert np.linalg.norm(OmegaProfile()(t), axis=1).max() <= 0.6 * np.sqrt(2.16)


def test_propagate_zero_rate():
    s = TruthState(0.0, np.eye(3), np.zeros(3))
    out = propagate_truth(s, 0.01, OmegaProfile("constant", constant=(0, 0, 0)))
    assert np.array_equal(out.R, np.eye(3)) and out.t == 0.01


def test_propagate_constant_rate():
    w, dt, n = 0.7, 0.01, 500
    prof = OmegaProfile("constant", constant=(0, 0, w))
    s = TruthState(0.0, np.eye(3), prof(0.0))
    for _ in range(n):
        s = propagate_truth(s, dt, prof)
    assert np.allclose(s.R, exp_map([0, 0, w * n * dt]), atol=1e-12)


def test_truth_stays_on_group():
    run = generate_run(SimConfig(noise=QUIET))
    assert len(run) == 3000
    RtR = np.swapaxes(run.R, 1, 2) @ run.R
    assert np.linalg.norm(RtR - np.eye(3), axis=(1, 2)).max() < 1e-9


def test_distance_rate_oracle():
    # d||R||_I/dt = Upsilon(R)^T Omega / 2 along a noiseless trajectory
    rels = []
    for dt in (0.02, 0.01, 0.005):
        run = generate_run(SimConfig(dt=dt, t_end=6.0, noise=QUIET, R0=exp_map([0.3, -1.0, 0.5])))
        e = np.array([euclidean_distance(R) for R in run.R])
        fd = np.diff(e) / dt
        an = np.array([0.5 * upsilon(R) @ w for R, w in zip(run.R[:-1], run.omega[:-1])])
        rels.append(np.abs(fd - an).max() / np.abs(an).max())
        # the factor-two reading is far off
        assert np.abs(fd - 4 * an).max() > 10 * np.abs(fd - an).max()
    assert rels[0] / rels[1] == pytest.approx(2, rel=0.1)
    assert rels[1] / rels[2] == pytest.approx(2, rel=0.1)


def test_gyro_examples():
    w = np.array([0.1, 0.2, 0.3])
    assert np.array_equal(gyro_measure(w, NoiseSpec(0.0, 0.1, model="persample"), None), w)
    noise = NoiseSpec(0.11, 0.1, model="persample")
    g = sensor_rngs(7, 2)[0]
    d = np.array([gyro_measure(np.zeros(3), noise, g) for _ in range(100_000)])
    assert np.all(np.abs(d.mean(axis=0)) < 3 * 0.11 / np.sqrt(1e5))
    assert np.allclose(d.std(axis=0), 0.11, rtol=0.02)
    a = [gyro_measure(w, noise, sensor_rngs(3, 2)[0]) for _ in range(2)]
    assert np.array_equal(a[0], a[1])


def test_gyro_brownian_scale():
    noise = NoiseSpec(0.11, 0.1)
    assert noise.gyro_scale(0.01) == pytest.approx(1.1)
    with pytest.raises(ValueError):
        gyro_measure(np.zeros(3), noise, sensor_rngs(0, 2)[0])
    run = generate_run(SimConfig(t_end=400.0, noise=noise))
    n = run.omega_m - run.omega
    assert np.allclose(n.std(axis=0), 1.1, rtol=0.02)
    # the integrated noise grows like a Brownian motion with intensity 0.11
    incr = n.reshape(-1, 100, 3).sum(axis=1) * 0.01
    assert np.allclose(incr.std(axis=0), 0.11, rtol=0.1)


def test_vector_examples(rng):
    r = np.array([DEFAULT_R1, DEFAULT_R2], float)
    assert np.array_equal(vector_measure(np.eye(3), r, QUIET, None), r)
    R = random_rotations(1, rng)[0]
    y = vector_measure(R, r, QUIET, None)
    assert np.allclose(np.linalg.norm(y, axis=1), np.linalg.norm(r, axis=1), atol=1e-12)
    assert np.allclose(y, (R.T @ r.T).T, atol=1e-15)
    gens = sensor_rngs(11, 2)[1:]
    noise = NoiseSpec(0.11, 0.1)
    ys = np.array([vector_measure(np.eye(3), r, noise, gens) for _ in range(100_000)]) - r
    assert np.all(np.abs(ys.reshape(-1, 6).std(axis=0) / 0.1 - 1) < 0.05)


def test_noise_streams_independent():
    cfg = SimConfig(t_end=1000.0, noise=NoiseSpec(0.11, 0.1, seed=5))
    run = generate_run(cfg)
    streams = np.column_stack([run.omega_m - run.omega, (run.y - np.einsum("ij,njk->nik", cfg.r, run.R)).reshape(len(run), -1)])
    assert len(run) == 100_000
    C = np.corrcoef(streams.T)
    off = C[~np.eye(len(C), dtype=bool)]
    assert np.abs(off).max() < 0.02


def test_generate_run_examples(tmp_path):
    run = generate_run(SimConfig())
    assert len(run) == 3000 and run.y.shape == (3000, 2, 3)
    assert np.allclose(np.diff(run.t), 0.01)
    q = generate_run(SimConfig(noise=QUIET))
    assert np.allclose(q.y[0], [DEFAULT_R1, DEFAULT_R2])
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    export_sensor_csv(generate_run(SimConfig().with_seed(9)), a)
    export_sensor_csv(generate_run(SimConfig().with_seed(9)), b)
    assert a.read_bytes() == b.read_bytes()
    lines = a.read_text().splitlines()
    assert lines[0] == "t,wx,wy,wz,y1x,y1y,y1z,y2x,y2y,y2z" and len(lines) == 3001
    export_sensor_csv(generate_run(SimConfig().with_seed(10)), b)
    assert a.read_bytes() != b.read_bytes()


def test_bulk_matches_per_frame_draws():
    cfg = SimConfig(t_end=0.5, noise=NoiseSpec(0.11, 0.1, seed=4, model="persample"))
    run = generate_run(cfg)
    gens = sensor_rngs(4, 2)
    w = np.array([gyro_measure(o, cfg.noise, gens[0]) for o in run.omega])
    assert np.array_equal(w, run.omega_m)
    y = np.array([vector_measure(R, cfg.r, cfg.noise, gens[1:]) for R in run.R])
    assert np.array_equal(y, run.y)


def test_config_validation():
    with pytest.raises(ValueError):
        SimConfig(dt=-1)
    with pytest.raises(ValueError):
        SimConfig(t_end=0.001)
    with pytest.raises(ValueError):
        SimConfig(r=[[1, 0, 0], [2, 0, 0]])
    with pytest.raises(ValueError):
        NoiseSpec(model="pink")
    assert SimConfig(t_end=0.035).n_steps == 4
