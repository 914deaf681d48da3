"""Monte Carlo simulation of the degenerate diffusion attached to the
operator: dX = (-B X + b(X, t)) dt + sigma(X, t) dW with noise acting on the
first m0 coordinates only, sigma sigma^T = lam A0, and Feynman-Kac weights
exp(int c dt).

Reproducibility: paths are generated in fixed-size chunks, each drawn from
its own child stream of the master seed, so results are byte-identical
regardless of how many worker threads consume the chunks.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import NonFinite, NotSPD
from .group import Geometry

CHUNK = 1 << 14


@dataclass(frozen=True)
class McConfig:
    paths: int
    dt: float
    seed: int
    lam: float = 2.0
    threads: int = 1
    scheme: str = "euler"

    def __post_init__(self):
        if self.scheme != "euler":
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.paths <= 0 or self.dt <= 0.0 or self.lam <= 0.0:
            raise ValueError("paths, dt and lam must be positive")


@dataclass
class PathEnsemble:
    """Terminal states of the simulated paths with Feynman-Kac weights."""

    final: np.ndarray      # (paths, N)
    weights: np.ndarray    # (paths,)
    t0: float
    t1: float
    x0: np.ndarray
    config: McConfig
    provenance: dict = field(default_factory=dict)

    @property
    def paths(self):
        return self.final.shape[0]

    def weighted_mean(self):
        return np.average(self.final, axis=0, weights=self.weights)

    def weighted_cov(self):
        mu = self.weighted_mean()
        d = self.final - mu
        w = self.weights / self.weights.sum()
        return (d.T * w) @ d

    def mean_se(self):
        """Per-coordinate standard error of the weighted mean."""
        mu = self.weighted_mean()
        w = self.weights / self.weights.sum()
        var = ((self.final - mu) ** 2 * w[:, None]).sum(axis=0)
        neff = 1.0 / np.sum(w ** 2)
        return np.sqrt(var / neff)


def _sigma_chunk(A0_vals, lam):
    """Cholesky factors of lam * A0 for a chunk of states."""
    A = lam * np.atleast_3d(A0_vals)
    try:
        return np.linalg.cholesky(A)
    except np.linalg.LinAlgError as e:
        raise NotSPD(f"diffusion matrix not SPD along a path: {e}") from e


def simulate(coeffs, geometry: Geometry, x0, t0, t1, config: McConfig):
    """Euler-Maruyama from the deterministic point x0 at time t0 to t1."""
    N = geometry.N
    m0 = geometry.structure.m0
    B = geometry.B
    x0 = np.broadcast_to(np.asarray(x0, dtype=float), (N,))
    nsteps = max(1, int(round((t1 - t0) / config.dt)))
    dt = (t1 - t0) / nsteps
    sqdt = np.sqrt(dt)

    A0f = coeffs.get("A0")
    bf = coeffs.get("b")
    cf = coeffs.get("c")
    const_sigma = None
    if A0f is not None and getattr(A0f, "value", None) is not None:
        try:
            const_sigma = np.linalg.cholesky(
                config.lam * np.atleast_2d(A0f.value))
        except np.linalg.LinAlgError as e:
            raise NotSPD(f"constant diffusion matrix not SPD: {e}") from e
    elif A0f is None:
        const_sigma = np.sqrt(config.lam) * np.eye(m0)

    nchunks = -(-config.paths // CHUNK)
    final = np.empty((config.paths, N))
    logw = np.zeros(config.paths)

    def run_chunk(ci):
        lo = ci * CHUNK
        hi = min(lo + CHUNK, config.paths)
        n = hi - lo
        rng = np.random.default_rng(
            np.random.SeedSequence(entropy=config.seed, spawn_key=(ci,)))
        X = np.tile(x0, (n, 1))
        lw = np.zeros(n)
        t = t0
        for _ in range(nsteps):
            dW = rng.standard_normal((n, m0)) * sqdt
            drift = -X @ B.T
            if bf is not None:
                drift[:, :m0] += np.atleast_2d(bf.many(X, t))
            if const_sigma is not None:
                noise = dW @ const_sigma.T
            else:
                sig = _sigma_chunk(A0f.many(X, t), config.lam)
                noise = np.einsum("kij,kj->ki", sig, dW)
            if cf is not None:
                lw += dt * np.asarray(cf.many(X, t)).reshape(n)
            X[:, :m0] += noise
            X += drift * dt
            t += dt
        if not np.all(np.isfinite(X)):
            raise NonFinite("non-finite state in Euler-Maruyama chunk")
        final[lo:hi] = X
        logw[lo:hi] = lw

    if config.threads > 1:
        with ThreadPoolExecutor(max_workers=config.threads) as ex:
            list(ex.map(run_chunk, range(nchunks)))
    else:
        for ci in range(nchunks):
            run_chunk(ci)

    weights = np.exp(logw)
    prov = {"seed": config.seed, "chunk": CHUNK, "nchunks": nchunks,
            "nsteps": nsteps, "dt": dt, "lam": config.lam,
            "scheme": config.scheme}
    return PathEnsemble(final=final, weights=weights, t0=t0, t1=t1,
                        x0=np.array(x0), config=config, provenance=prov)


def density_estimate(ensemble: PathEnsemble, box, bins):
    """Weighted histogram density on the box with per-bin standard errors."""
    box = np.asarray(box, dtype=float)
    N = ensemble.final.shape[1]
    if np.isscalar(bins):
        bins = [int(bins)] * N
    edges = [np.linspace(lo, hi, b + 1) for (lo, hi), b in zip(box, bins)]
    vol = np.prod([e[1] - e[0] for e in edges])
    n = ensemble.paths
    w = ensemble.weights
    hist, _ = np.histogramdd(ensemble.final, bins=edges, weights=w)
    hist2, _ = np.histogramdd(ensemble.final, bins=edges, weights=w * w)
    dens = hist / (n * vol)
    # SE of (1/n) sum w_k 1_bin per unit volume
    var = (hist2 / n - (hist / n) ** 2) / n
    se = np.sqrt(np.maximum(var, 0.0)) / vol
    return {"edges": edges, "density": dens, "se": se, "bin_volume": vol}


def standardized_offset(Y, y, tau, geometry: Geometry):
    """u = delta^0_{1/sqrt(tau)} (y - e^{tau B} Y) for rows Y."""
    E = geometry.exp_drift(-tau)          # e^{tau B}
    d = np.atleast_1d(y)[None, :] - np.atleast_2d(Y) @ E.T
    alpha = np.asarray(geometry.structure.alpha, dtype=float)
    return d / np.sqrt(tau) ** alpha


def mass_in_DR(ensemble: PathEnsemble, y, R, geometry: Geometry, tau=None):
    """Weighted fraction of paths landing in D_R(y, tau), the set where the
    standardized offset has Euclidean norm at most R."""
    if tau is None:
        tau = ensemble.t1 - ensemble.t0
    u = standardized_offset(ensemble.final, y, tau, geometry)
    inside = np.sum(u * u, axis=1) <= R * R
    w = ensemble.weights
    frac = float(np.sum(w[inside]) / ensemble.paths)
    se = float(np.std(w * inside) / np.sqrt(ensemble.paths))
    return {"mass": frac, "se": se, "tau": tau, "R": R,
            "count": int(np.count_nonzero(inside))}


def measure_DR(y, tau, R, geometry: Geometry, n=200000, seed=0):
    """Lebesgue measure of D_R(y, tau) by rejection sampling over the
    bounding box of the affine image of the R-ball.

    D_R is the image of {|u| <= R} under xi(u) = e^{-tau B}(y - delta^0_{sqrt
    tau} u); the box is computed from the parallelotope spanned by the
    column images.
    """
    N = geometry.N
    alpha = np.asarray(geometry.structure.alpha, dtype=float)
    Einv = geometry.exp_drift(tau)        # e^{-tau B}
    scale = np.sqrt(tau) ** alpha
    M = Einv * scale[None, :]             # xi = center - M u
    center = Einv @ np.atleast_1d(y)
    half = R * np.sum(np.abs(M), axis=1)
    lo, hi = center - half, center + half
    rng = np.random.default_rng(seed)
    pts = rng.uniform(lo, hi, size=(n, N))
    u = standardized_offset(pts, y, tau, geometry)
    frac = np.mean(np.sum(u * u, axis=1) <= R * R)
    box_vol = float(np.prod(hi - lo))
    meas = box_vol * float(frac)
    se = box_vol * float(np.sqrt(frac * (1.0 - frac) / n))
    return {"measure": meas, "se": se, "box_volume": box_vol}


def measure_scaling_slope(y, R, geometry: Geometry, taus, n=200000, seed=0):
    """Least-squares slope of log measure(D_R) against log tau; the graded
    dilations make the exact value Q/2."""
    logs = []
    for k, tau in enumerate(taus):
        m = measure_DR(y, tau, R, geometry, n=n, seed=seed + k)
        logs.append(np.log(m["measure"]))
    slope = np.polyfit(np.log(np.asarray(taus, dtype=float)), logs, 1)[0]
    return {"slope": float(slope), "taus": list(taus), "log_measures": logs}
