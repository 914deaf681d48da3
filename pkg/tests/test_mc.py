import numpy as np
import pytest

from kolmo import kernel as kern
from kolmo import mc
from kolmo.coefficients import ConstantField
from kolmo.errors import NotSPD


def test_config_validation():
    with pytest.raises(ValueError):
        mc.McConfig(paths=0, dt=1e-3, seed=0)
    with pytest.raises(ValueError):
        mc.McConfig(paths=10, dt=1e-3, seed=0, scheme="milstein")


def test_moments_match_kernel(proto, proto_coeffs):
    x0 = np.array([0.3, -0.1])
    tau = 0.4
    cfg = mc.McConfig(paths=200_000, dt=1e-3, seed=5, lam=2.0)
    ens = mc.simulate(proto_coeffs, proto, x0, 0.0, tau, cfg)
    mean_exact = proto.exp_drift(tau) @ x0
    cov_exact = 2.0 * kern.covariance_matrix(tau, proto.B, np.eye(1))
    z = (ens.weighted_mean() - mean_exact) / ens.mean_se()
    assert np.all(np.abs(z) < 4.0)
    assert np.allclose(ens.weighted_cov(), cov_exact, rtol=0.02)


def test_determinism_and_thread_independence(proto, proto_coeffs):
    x0 = np.zeros(2)
    kw = dict(paths=50_000, dt=5e-3, seed=17, lam=2.0)
    a = mc.simulate(proto_coeffs, proto, x0, 0.0, 0.2,
                    mc.McConfig(**kw, threads=1))
    b = mc.simulate(proto_coeffs, proto, x0, 0.0, 0.2,
                    mc.McConfig(**kw, threads=1))
    c = mc.simulate(proto_coeffs, proto, x0, 0.0, 0.2,
                    mc.McConfig(**kw, threads=4))
    assert np.array_equal(a.final, b.final)
    assert np.array_equal(a.final, c.final)


def test_feynman_kac_weights(proto, proto_coeffs):
    coeffs = dict(proto_coeffs)
    coeffs["c"] = ConstantField(np.array(-0.5), dim=2)
    cfg = mc.McConfig(paths=1000, dt=1e-2, seed=0)
    ens = mc.simulate(coeffs, proto, np.zeros(2), 0.0, 0.3, cfg)
    # constant c: deterministic weight exp(c * tau)
    assert np.allclose(ens.weights, np.exp(-0.5 * 0.3), rtol=1e-12)


def test_not_spd_diffusion(proto):
    coeffs = {"A0": ConstantField(np.array([[-1.0]]), dim=2)}
    cfg = mc.McConfig(paths=100, dt=1e-2, seed=0)
    with pytest.raises(NotSPD):
        mc.simulate(coeffs, proto, np.zeros(2), 0.0, 0.1, cfg)


def test_density_estimate_normalization(proto, proto_coeffs):
    cfg = mc.McConfig(paths=100_000, dt=2e-3, seed=2)
    ens = mc.simulate(proto_coeffs, proto, np.zeros(2), 0.0, 0.3, cfg)
    d = mc.density_estimate(ens, [(-3, 3), (-1.5, 1.5)], [30, 30])
    total = d["density"].sum() * d["bin_volume"]
    assert abs(total - 1.0) < 0.01
    assert np.all(d["se"][d["density"] > 0] > 0.0)


def test_mass_in_DR_matches_gaussian_oracle(proto, proto_coeffs):
    tau = 0.3
    cfg = mc.McConfig(paths=100_000, dt=1e-3, seed=9)
    ens = mc.simulate(proto_coeffs, proto, np.zeros(2), 0.0, tau, cfg)
    m = mc.mass_in_DR(ens, np.zeros(2), 1.0, proto)
    # oracle: X ~ N(0, 2 C(tau)); u = -delta_{1/sqrt tau} e^{tau B} X
    E = proto.exp_drift(-tau)
    D = np.diag(1.0 / np.sqrt(tau) ** np.asarray(proto.structure.alpha,
                                                 dtype=float))
    S = D @ E @ (2.0 * kern.covariance_matrix(tau, proto.B, np.eye(1))) \
        @ E.T @ D.T
    rng = np.random.default_rng(0)
    zz = rng.standard_normal((400_000, 2)) @ np.linalg.cholesky(S).T
    oracle = float(np.mean(np.sum(zz * zz, axis=1) <= 1.0))
    assert abs(m["mass"] - oracle) < 4.0 * (m["se"] + 1e-3)


def test_measure_DR_exact_volume(proto):
    # the affine image of the R-ball has volume tau^{Q/2} R^N omega_N
    tau, R = 0.7, 1.3
    m = mc.measure_DR(np.array([0.2, -0.1]), tau, R, proto, n=400_000,
                      seed=4)
    exact = tau ** (proto.structure.Q / 2.0) * R ** 2 * np.pi
    assert abs(m["measure"] - exact) < 4.0 * m["se"]


def test_measure_scaling_slope(proto):
    res = mc.measure_scaling_slope(np.array([0.2, 0.1]), 1.0, proto,
                                   taus=[0.05, 0.1, 0.2, 0.4, 0.8],
                                   n=100_000, seed=3)
    assert abs(res["slope"] - proto.structure.Q / 2.0) < 0.05
