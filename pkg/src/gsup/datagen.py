"""Seeded synthetic data: the 4-component normal mixture, the 40-point toy set, noisy images.

All generators draw from :func:`gsup.qcore.make_rng`, so a seed fixes the
output bit for bit.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from . import constants as C
from .qcore import make_rng


@dataclass(frozen=True)
class MixtureSpec:
    """``pi0 N(0, I) + sum_k (1-pi0)/3 N(mu_k, I)`` with ``mu = (c,c), (c,-2c), (-c,0)``.

    ``pi0 = 1`` is accepted as the degenerate single-component case.
    """

    c: float = 4.0
    pi0: float = 0.8
    n: int = 100
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.pi0 <= 1:
            raise ValueError(f"pi0 must lie in (0, 1], got {self.pi0}")
        if self.n < 1:
            raise ValueError("n must be >= 1")

    @property
    def means(self) -> np.ndarray:
        c = self.c
        return np.array([[0.0, 0.0], [c, c], [c, -2 * c], [-c, 0.0]])

    @property
    def weights(self) -> np.ndarray:
        rest = (1 - self.pi0) / 3
        return np.array([self.pi0, rest, rest, rest])


def gen_mixture(spec: MixtureSpec) -> tuple[np.ndarray, np.ndarray]:
    """``n`` points in the plane and their component labels ``0..3``."""
    rng = make_rng(spec.seed)
    labels = rng.choice(4, size=spec.n, p=spec.weights)
    x = spec.means[labels] + rng.standard_normal((spec.n, 2))
    return x, labels


def gen_toy(seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Two 10-point unit Gaussian clusters plus 20 noise points on a surrounding annulus.

    Labels: 1 and 2 for the clusters centred at ``TOY_CENTERS``, 0 for noise.
    Noise is uniform by area on radii ``TOY_NOISE_RADII`` around the
    midpoint of the two centers.
    """
    rng = make_rng(seed)
    centers = np.array(C.TOY_CENTERS)
    blobs = [centers[k] + rng.standard_normal((10, 2)) for k in range(2)]
    r_in, r_out = C.TOY_NOISE_RADII
    radius = np.sqrt(rng.uniform(r_in**2, r_out**2, 20))
    angle = rng.uniform(0.0, 2 * np.pi, 20)
    noise = centers.mean(axis=0) + radius[:, None] * np.column_stack([np.cos(angle), np.sin(angle)])
    x = np.concatenate(blobs + [noise])
    labels = np.repeat([1, 2, 0], [10, 10, 20])
    return x, labels


@dataclass(frozen=True)
class ImageSimSpec:
    n_templates: int = 16
    image_side: int = 16
    n_images: int = 800
    sigma_eps: float = 40.0
    misalign_frac: float = 0.1
    rotation_angles: tuple[float, ...] = C.ROTATION_ANGLES
    seed: int = 0

    def __post_init__(self):
        if self.n_templates < 1 or self.n_images < 1:
            raise ValueError("n_templates and n_images must be >= 1")
        if self.image_side < 4:
            raise ValueError("image_side must be >= 4")
        if not self.sigma_eps > 0:
            raise ValueError("sigma_eps must be positive")
        if not 0 <= self.misalign_frac < 1:
            raise ValueError("misalign_frac must lie in [0, 1)")
        if self.misalign_frac > 0 and len(self.rotation_angles) == 0:
            raise ValueError("rotation_angles must be non-empty when misalign_frac > 0")


@dataclass
class ImageSet:
    """Simulated image stack.

    ``labels`` give aligned images their template id ``0..T-1`` and each
    misaligned image its own class ``T, T+1, ...``.
    """

    images: np.ndarray
    labels: np.ndarray
    misaligned: np.ndarray
    template_ids: np.ndarray
    angles: np.ndarray
    snr: float
    templates: np.ndarray = field(repr=False)

    @property
    def data(self) -> np.ndarray:
        return self.images.reshape(len(self.images), -1)


def _polar_grid(side: int) -> tuple[np.ndarray, np.ndarray]:
    c = (side - 1) / 2
    yy, xx = np.mgrid[0:side, 0:side]
    x, y = xx - c, c - yy
    return np.hypot(x, y), np.arctan2(y, x)


# Angular orders of the rosette basis on a 16-pixel image. Chosen so that
# every allowed rotation leaves little of a pattern's self-correlation: the
# rotation acts on order m as a phase shift m*theta, and with these orders
# the mean of cos(m*theta) stays within 0.03 of zero (or negative) at all
# six angles. Contiguous orders leave a floor near 0.45 at 28.8 degrees.
ROSETTE_ORDERS = (6, 9, 10, 12, 13, 14, 17, 18)
ROSETTE_RADIUS = 6.0 / 16  # as a fraction of the side
ROSETTE_WIDTH = 0.9 / 16
# A class pulls a stray image with the weight of all its members, a lone
# rotated view with weight one; resemblance between two rotated views is
# therefore tolerated up to this much more than resemblance to a template.
DESIGN_ROT_SLACK = 0.1


def rosette_basis(side: int, theta_deg: float = 0.0) -> np.ndarray:
    """Pixel basis ``(side*side, 2*len(ROSETTE_ORDERS))``, rotated clockwise by ``theta_deg``.

    Rotation is exact within the span: rendering at a rotated angle equals
    a fixed linear map of the unrotated basis.
    """
    r, phi = _polar_grid(side)
    phi = phi + np.deg2rad(theta_deg)
    g = np.exp(-((r - ROSETTE_RADIUS * side) ** 2) / (2 * (ROSETTE_WIDTH * side) ** 2))
    cols = []
    for m in ROSETTE_ORDERS:
        cols += [g * np.cos(m * phi), g * np.sin(m * phi)]
    return np.stack([c.ravel() for c in cols], axis=1)


def _orthonormal_frame(side: int, angles) -> tuple[np.ndarray, list[np.ndarray]]:
    """Whitened basis ``E`` (orthonormal columns) and rotation operators in its coordinates.

    A pattern with coordinates ``v`` is the image ``E v``; rotated by the
    j-th angle it is ``E ops[j] v``.
    """
    b = rosette_basis(side)
    vals, vecs = np.linalg.eigh(b.T @ b)
    half = vecs @ np.diag(vals**0.5) @ vecs.T
    inv_half = vecs @ np.diag(vals**-0.5) @ vecs.T
    e = b @ inv_half
    ops = []
    for th in angles:
        # exact linear map between the rotated and unrotated basis
        m = np.linalg.lstsq(b, rosette_basis(side, th), rcond=None)[0]
        ops.append(half @ m @ inv_half)
    return e, ops


def _skew(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a - a.T)


def _design(q: np.ndarray, ops: list[np.ndarray], betas=(10.0, 30.0, 80.0), steps: int = 150, rot_slack: float = DESIGN_ROT_SLACK) -> np.ndarray:
    """Rotate orthonormal rows ``q`` to lower the largest correlation among all views.

    Views are the patterns ``q_a`` and their rotations ``op q_a``. The
    smooth maximum of pairwise correlations is reduced by descent on the
    orthogonal group with backtracking, so ``q`` stays orthonormal.
    """
    mats = [np.eye(q.shape[1])] + ops
    n = len(q)
    # pairs of rotated views only compete against a lowered bar
    offset = np.zeros((n * len(mats), n * len(mats)))
    offset[n:, n:] = rot_slack

    def value_grad(qm, beta):
        s = np.concatenate([qm @ k.T for k in mats])
        norm = np.linalg.norm(s, axis=1)
        u = s / norm[:, None]
        g = u @ u.T - offset
        np.fill_diagonal(g, -np.inf)
        top = g.max()
        w = np.exp(beta * (g - top))
        total = w.sum()
        f = top + np.log(total) / beta
        w /= total
        du = 2.0 * w @ u
        ds = (du - np.sum(du * u, axis=1, keepdims=True) * u) / norm[:, None]
        grad = sum(ds[j * n : (j + 1) * n] @ k for j, k in enumerate(mats))
        return f, grad

    for beta in betas:
        f, grad = value_grad(q, beta)
        step = 1.0
        for _ in range(steps):
            omega = _skew(q.T @ grad)
            while step > 1e-8:
                trial = q @ expm(-step * omega)
                f_new, grad_new = value_grad(trial, beta)
                if f_new < f:
                    q, f, grad = trial, f_new, grad_new
                    step *= 1.5
                    break
                step *= 0.5
            else:
                break
    return q


@dataclass
class TemplateBank:
    """Unit-norm pattern coordinates ``coef`` in the orthonormal image frame ``frame``.

    ``ops[j]`` rotates coordinates by the j-th allowed angle.
    """

    coef: np.ndarray
    frame: np.ndarray
    ops: list[np.ndarray]

    def render(self, k: int, angle_index: int | None = None) -> np.ndarray:
        v = self.coef[k] if angle_index is None else self.ops[angle_index] @ self.coef[k]
        return self.frame @ v


def template_bank(n_templates: int, side: int, angles, rng: np.random.Generator) -> TemplateBank:
    """Rosette patterns for ``n_templates`` views.

    While the basis is large enough the patterns are orthonormal, and their
    coefficients are tuned so that no rotated view closely resembles any
    template or any other rotated view.
    """
    frame, ops = _orthonormal_frame(side, angles)
    d = frame.shape[1]
    if n_templates <= d:
        coef = np.linalg.qr(rng.standard_normal((d, d)))[0][:n_templates]
        if ops:
            coef = _design(coef, ops)
    else:
        coef = rng.standard_normal((n_templates, d))
        coef /= np.linalg.norm(coef, axis=1, keepdims=True)
    return TemplateBank(coef, frame, ops)


def gen_images(spec: ImageSimSpec) -> ImageSet:
    """Noisy views of a template bank, a fraction of them rotated.

    Exactly ``round(misalign_frac * n_images)`` images are misaligned; each
    is rendered at an angle from ``rotation_angles`` before noise is added.
    Misaligned images take distinct (view, angle) pairs while any remain,
    so no two of them share a signal. ``snr`` is the variance of the
    noise-free stack over ``sigma_eps**2``.
    """
    rng = make_rng(spec.seed)
    side = spec.image_side
    angles_allowed = np.asarray(spec.rotation_angles, dtype=float)
    bank = template_bank(spec.n_templates, side, angles_allowed, rng)
    base = (bank.coef @ bank.frame.T).reshape(-1, side, side)
    scale = float(np.sqrt(C.TEMPLATE_SIGNAL_VAR / base.var()))
    templates = scale * base

    tid = rng.integers(spec.n_templates, size=spec.n_images)
    n_mis = int(round(spec.misalign_frac * spec.n_images))
    mis_idx = np.sort(rng.choice(spec.n_images, size=n_mis, replace=False))
    mask = np.zeros(spec.n_images, dtype=bool)
    mask[mis_idx] = True
    angles = np.zeros(spec.n_images)
    signal = templates[tid]
    if n_mis:
        n_combo = spec.n_templates * len(angles_allowed)
        picks = np.concatenate([rng.permutation(n_combo) for _ in range(-(-n_mis // n_combo))])[:n_mis]
        tid[mis_idx] = picks // len(angles_allowed)
        which = picks % len(angles_allowed)
        angles[mis_idx] = angles_allowed[which]
        signal = templates[tid]
        for i, j in zip(mis_idx, which):
            signal[i] = scale * bank.render(tid[i], j).reshape(side, side)
    images = signal + spec.sigma_eps * rng.standard_normal(signal.shape)
    labels = tid.copy()
    labels[mis_idx] = spec.n_templates + np.arange(n_mis)
    snr = float(signal.var() / spec.sigma_eps**2)
    return ImageSet(images, labels, mask, tid, angles, snr, templates)
