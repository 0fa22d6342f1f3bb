"""q-exponential, q-Gaussian densities, the gamma-SUP weight and gamma-divergence.

The q-Gaussian with ``q < 1`` has compact support, which is what gives the
clustering weight an exact zero beyond a finite radius.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.special import gammaln

from .constants import Q_ONE_EPS


def _is_one(q: float) -> bool:
    return abs(q - 1.0) < Q_ONE_EPS


def q_exp(u, q: float):
    """Deformed exponential ``{1 + (1-q) u}_+ ** (1/(1-q))``.

    Falls back to ``exp(u)`` when ``|q - 1| < 1e-12``. For ``q > 1`` the base
    reaching zero is a pole, reported as ``inf``.
    """
    u = np.asarray(u, dtype=float)
    if _is_one(q):
        out = np.exp(u)
    else:
        base = 1.0 + (1.0 - q) * u
        out = np.zeros_like(base)
        pos = base > 0
        out[pos] = base[pos] ** (1.0 / (1.0 - q))
        if q > 1:
            out[~pos] = np.inf
    return out[()] if out.ndim == 0 else out


def q_gaussian_normalizer(p: int, q: float) -> float:
    """Constant ``c_{p,q}`` making the q-Gaussian integrate to one."""
    if p < 1:
        raise ValueError(f"dimension must be >= 1, got {p}")
    if q >= 1.0 + 2.0 / p:
        raise ValueError(f"q={q} outside the admissible range q < 1 + 2/p = {1 + 2 / p}")
    if _is_one(q):
        return 1.0
    if q < 1:
        a = 1.0 / (1.0 - q)
        return float(np.exp(0.5 * p * np.log1p(-q) + gammaln(1 + p / 2 + a) - gammaln(1 + a)))
    a = 1.0 / (q - 1.0)
    return float(np.exp(0.5 * p * np.log(q - 1.0) + gammaln(a) - gammaln(a - p / 2)))


@dataclass(frozen=True)
class QGaussian:
    """Isotropic q-Gaussian ``G_q(mu, sigma2 * I)``."""

    q: float
    mu: np.ndarray
    sigma2: float = 1.0

    def __post_init__(self):
        mu = np.atleast_1d(np.asarray(self.mu, dtype=float))
        if mu.ndim != 1:
            raise ValueError("mu must be a vector")
        object.__setattr__(self, "mu", mu)
        if not self.sigma2 > 0:
            raise ValueError(f"sigma2 must be positive, got {self.sigma2}")
        if self.q >= 1.0 + 2.0 / self.p:
            raise ValueError(f"q={self.q} requires q < 1 + 2/p = {1 + 2 / self.p}")

    @property
    def p(self) -> int:
        return self.mu.shape[0]

    @property
    def support_radius2(self) -> float:
        """Squared radius of the support ball (``inf`` when q >= 1)."""
        if self.q < 1 and not _is_one(self.q):
            return 2.0 * self.sigma2 / (1.0 - self.q)
        return np.inf

    def covariance_factor(self) -> float:
        """``cov(X) = factor * sigma2 * I``; needs ``q < 1 + 2/(p+2)``."""
        if self.q >= 1.0 + 2.0 / (self.p + 2):
            raise ValueError("covariance does not exist for this q")
        return 2.0 / (2.0 + (self.p + 2) * (1.0 - self.q))


def q_gaussian_pdf(x, g: QGaussian):
    """Density of ``g`` at ``x``; ``x`` has shape ``(p,)`` or ``(m, p)``."""
    x = np.asarray(x, dtype=float)
    if x.shape[-1:] != (g.p,):
        raise ValueError(f"point dimension {x.shape[-1:]} does not match p={g.p}")
    r2 = np.sum((x - g.mu) ** 2, axis=-1)
    const = q_gaussian_normalizer(g.p, g.q) / ((2 * np.pi * g.sigma2) ** (g.p / 2))
    return const * q_exp(-r2 / (2 * g.sigma2), g.q)


@dataclass(frozen=True)
class TuningParams:
    """gamma-SUP tuning pair: model parameter ``s`` and scale ``tau``."""

    s: float
    tau: float

    def __post_init__(self):
        if not (np.isfinite(self.s) and self.s > 0):
            raise ValueError(f"s must be positive, got {self.s}")
        if not (np.isfinite(self.tau) and self.tau > 0):
            raise ValueError(f"tau must be positive, got {self.tau}")

    @property
    def influence_radius(self) -> float:
        """Distance beyond which the weight is exactly zero (``tau/sqrt(s)``)."""
        return self.tau / np.sqrt(self.s)


def weight(dist2, params: TuningParams):
    """``exp_{1-s}(-dist2/tau^2) = {1 - s dist2/tau^2}_+ ** (1/s)``."""
    d = np.asarray(dist2, dtype=float)
    base = 1.0 - params.s * (d / params.tau**2)
    out = np.zeros_like(base)
    np.power(base, 1.0 / params.s, out=out, where=base > 0)
    return out[()] if out.ndim == 0 else out


def to_tuning(gamma: float, q: float, sigma: float) -> TuningParams:
    """Map ``(gamma, q, sigma)`` to ``(s, tau)``."""
    if not q < 1:
        raise ValueError(f"q must be < 1, got {q}")
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    excess = gamma - (1.0 - q)
    if not excess > 0:
        # gamma = 1 - q gives constant weights: the plain sample mean
        raise ValueError(f"gamma must exceed 1 - q = {1 - q}, got {gamma}")
    return TuningParams(s=(1.0 - q) / excess, tau=sigma * np.sqrt(2.0 / excess))


def from_tuning(params: TuningParams, q: float) -> tuple[float, float]:
    """Inverse of :func:`to_tuning` for a fixed ``q``; returns ``(gamma, sigma)``."""
    if not q < 1:
        raise ValueError(f"q must be < 1, got {q}")
    excess = (1.0 - q) / params.s
    return (1.0 - q) + excess, params.tau * np.sqrt(excess / 2.0)


@dataclass(frozen=True)
class DiscreteDensity:
    """Point masses on distinct support points."""

    support: np.ndarray
    masses: np.ndarray = field(repr=False)

    def __post_init__(self):
        support = np.asarray(self.support, dtype=float)
        if support.ndim == 1:
            support = support[:, None]
        masses = np.asarray(self.masses, dtype=float)
        if masses.shape != (support.shape[0],):
            raise ValueError("one mass per support point required")
        if np.any(masses < 0) or abs(masses.sum() - 1.0) > 1e-12:
            raise ValueError("masses must be nonnegative and sum to 1")
        if np.unique(support, axis=0).shape[0] != support.shape[0]:
            raise ValueError("duplicate support points")
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "masses", masses)

    @classmethod
    def from_density(cls, density: Callable, nodes: np.ndarray, weights: np.ndarray) -> "DiscreteDensity":
        """Discretise ``density`` on a quadrature rule, dropping zero-mass nodes."""
        m = np.asarray(weights) * density(nodes)
        keep = m > 0
        m = m[keep]
        return cls(np.asarray(nodes)[keep], m / m.sum())


def tensor_grid(bounds, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Midpoint quadrature on a 1-D interval or 2-D box.

    ``bounds`` is ``[(lo, hi)]`` or ``[(lo, hi), (lo, hi)]``; returns nodes of
    shape ``(m, d)`` and weights of shape ``(m,)``.
    """
    bounds = np.atleast_2d(np.asarray(bounds, dtype=float))
    if bounds.shape[0] not in (1, 2):
        raise ValueError("only 1-D and 2-D grids are supported")
    axes = []
    h = []
    for lo, hi in bounds:
        step = (hi - lo) / n
        axes.append(lo + step * (np.arange(n) + 0.5))
        h.append(step)
    mesh = np.meshgrid(*axes, indexing="ij")
    nodes = np.stack([a.ravel() for a in mesh], axis=1)
    return nodes, np.full(nodes.shape[0], float(np.prod(h)))


def _power_norm(g_eval: Callable, quad, order: float) -> float:
    nodes, w = quad
    return float(np.sum(w * g_eval(nodes) ** order) ** (1.0 / order))


def gamma_cross_entropy(f: DiscreteDensity, g_eval: Callable, gamma: float, quad) -> float:
    """``C_gamma(f || g) = -1/(gamma(gamma+1)) sum_i f_i g(x_i)^gamma / ||g||_{gamma+1}^gamma``.

    ``quad`` is a ``(nodes, weights)`` rule used for ``||g||_{gamma+1}``.
    """
    if not gamma > 0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    gx = g_eval(f.support)
    if np.any(gx[f.masses > 0] <= 0):
        raise ValueError("g must be positive on the support of f")
    norm = _power_norm(g_eval, quad, gamma + 1.0)
    return float(-np.sum(f.masses * gx**gamma) / (gamma * (gamma + 1.0) * norm**gamma))


def gamma_divergence(f: DiscreteDensity, f_eval: Callable, g_eval: Callable, gamma: float, quad) -> float:
    """``D_gamma(f || g) = C_gamma(f || g) - C_gamma(f || f)``.

    ``f_eval`` is the density that ``f`` discretises; with ``f`` built by
    :meth:`DiscreteDensity.from_density` on the same rule the result is >= 0.
    """
    return gamma_cross_entropy(f, g_eval, gamma, quad) - gamma_cross_entropy(f, f_eval, gamma, quad)


def make_rng(seed: int) -> np.random.Generator:
    """Counter-based (Philox) generator; the seed fully determines the stream."""
    return np.random.Generator(np.random.Philox(seed))


def q_gaussian_sample(g: QGaussian, n: int, seed: int) -> np.ndarray:
    """Draw ``n`` points from ``g`` (``q <= 1``).

    For ``q < 1`` uses rejection from the uniform law on the support ball.
    """
    if g.q >= 1.0 + 2.0 / (g.p + 2):
        raise ValueError("covariance condition q < 1 + 2/(p+2) violated")
    if g.q > 1 and not _is_one(g.q):
        raise ValueError("sampling the heavy-tailed branch (q > 1) is not supported")
    rng = make_rng(seed)
    sigma = np.sqrt(g.sigma2)
    if _is_one(g.q):
        return g.mu + sigma * rng.standard_normal((n, g.p))
    radius = np.sqrt(g.support_radius2)
    out = np.empty((n, g.p))
    filled = 0
    while filled < n:
        batch = max(2 * (n - filled), 64)
        z = rng.standard_normal((batch, g.p))
        z /= np.linalg.norm(z, axis=1, keepdims=True)
        r = radius * rng.random(batch) ** (1.0 / g.p)
        # envelope is the density at the centre, where exp_q(0) = 1
        accept = rng.random(batch) < q_exp(-(r**2) / (2 * g.sigma2), g.q)
        pts = z[accept] * r[accept, None]
        take = min(len(pts), n - filled)
        out[filled : filled + take] = pts[:take]
        filled += take
    return g.mu + out
