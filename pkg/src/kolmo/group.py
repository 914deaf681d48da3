"""Translation group on R^{N+1}, anisotropic dilations, homogeneous norm,
quasi-distance, cylinders and cones.

Points are numpy arrays z = [x_1, ..., x_N, t]; the spatial part is split
into blocks according to a BlockStructure.
"""

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .structure import BlockStructure


def point(x, t):
    """Pack spatial vector and time into a single array."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    return np.concatenate([x, [float(t)]])


def split(z):
    z = np.asarray(z, dtype=float)
    return z[:-1], z[-1]


def exp_drift(s, B, nilpotent_terms=None):
    """E(s) = exp(-s B).

    For canonical (nilpotent) B the power series terminates; passing
    nilpotent_terms = kappa + 1 makes the truncated series exact.  Without it
    the series is summed until numerical stagnation, which also terminates
    for nilpotent B.
    """
    B = np.asarray(B, dtype=float)
    N = B.shape[0]
    M = -s * B
    E = np.eye(N)
    term = np.eye(N)
    kmax = nilpotent_terms if nilpotent_terms is not None else N
    for k in range(1, kmax + 1):
        term = term @ M / k
        if not term.any():
            break
        E = E + term
    return E


@dataclass(frozen=True)
class Cylinder:
    """Slanted cylinder Q_r(z0) = z0 o delta_r(Q_1)."""

    center: np.ndarray
    radius: float


@dataclass(frozen=True)
class Cone:
    """Cone P_{beta,r,R}(z0) = z0 o {delta_rho(xi, beta) : |xi|<r, 0<rho<=R}."""

    vertex: np.ndarray
    beta: float
    r: float
    R: float


class Geometry:
    """Group operations for a fixed block structure and drift matrix B."""

    def __init__(self, structure: BlockStructure, B):
        self.structure = structure
        self.B = np.asarray(B, dtype=float)
        if self.B.shape != (structure.N, structure.N):
            raise ValueError("B shape does not match structure")
        self.N = structure.N
        self.alpha = np.asarray(structure.alpha, dtype=int)
        self._slices = structure.block_slices()

    # -- group operations ---------------------------------------------------

    def exp_drift(self, s):
        return exp_drift(s, self.B, nilpotent_terms=self.structure.kappa + 1)

    def compose(self, z, w):
        """(x,t) o (xi,tau) = (xi + E(tau) x, t + tau)."""
        x, t = split(z)
        xi, tau = split(w)
        return point(xi + self.exp_drift(tau) @ x, t + tau)

    def inverse(self, z):
        """(x,t)^{-1} = (-E(-t) x, -t)."""
        x, t = split(z)
        return point(-self.exp_drift(-t) @ x, -t)

    def dilate(self, r, z):
        """Coordinate i scaled by r^alpha_i, time by r^2."""
        x, t = split(z)
        return point(x * self._rpow(r), t * r * r)

    def dilate_space(self, r, x):
        """delta_r^0 acting on the spatial part only."""
        return np.asarray(x, dtype=float) * self._rpow(r)

    def _rpow(self, r):
        # integer exponents: exact powers via repeated multiplication
        return np.array([r ** int(a) for a in self.alpha])

    # -- norm and distance --------------------------------------------------

    def hom_norm(self, z):
        """Unique r>0 with sum x_i^2 / r^{2 alpha_i} + t^2 / r^4 = 1."""
        x, t = split(z)
        exps = np.concatenate([2 * self.alpha, [4]])
        sq = np.concatenate([x, [t]]) ** 2
        mask = sq > 0.0
        if not mask.any():
            return 0.0
        sq, exps = sq[mask], exps[mask]

        # r0 = max |x_i|^{1/alpha_i} (incl. sqrt|t|) brackets the root:
        # g(r0/(n+1)) > 0 > g(r0*(n+1)) for the decreasing residual g
        r0 = np.max(sq ** (1.0 / exps))
        n = len(sq)

        def g(r):
            return np.sum(sq * r ** (-exps.astype(float))) - 1.0

        lo, hi = r0 / (n + 1.0), r0 * (n + 1.0)
        while g(lo) <= 0.0:
            lo *= 0.5
        while g(hi) >= 0.0:
            hi *= 2.0
        root = brentq(g, lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps)
        return float(root)

    def distance(self, z, w):
        """Quasi-distance d(z,w) = ||z^{-1} o w||."""
        return self.hom_norm(self.compose(self.inverse(z), w))

    # -- regions ------------------------------------------------------------

    def in_unit_cylinder(self, z):
        """Q_1 = B_1 x ... x B_1 x (-1, 0): open spatial balls per block."""
        x, t = split(z)
        if not -1.0 < t < 0.0:
            return False
        return all(np.linalg.norm(x[sl]) < 1.0 for sl in self._slices)

    def cylinder_contains(self, c: Cylinder, z):
        zeta = self.dilate(1.0 / c.radius,
                           self.compose(self.inverse(c.center), z))
        return self.in_unit_cylinder(zeta)

    def cone_contains(self, p: Cone, z):
        zeta = self.compose(self.inverse(p.vertex), z)
        xi_img, tau = split(zeta)
        if tau >= 0.0:
            return False
        rho = np.sqrt(-tau / p.beta)
        if rho > p.R:
            return False
        xi = self.dilate_space(1.0 / rho, xi_img)
        return np.linalg.norm(xi) < p.r


def prototype_geometry():
    """The 1934 kinetic prototype: N=2, blocks (1,1), B = [[0,0],[1,0]]."""
    return Geometry(BlockStructure((1, 1)), np.array([[0.0, 0.0], [1.0, 0.0]]))
