"""Pure-numpy implementations of the hot kernels.

Drop-in fallback for the compiled extension dropletlab._kernels: same
function names, signatures, and (up to floating-point reduction order at the
documented chunk granularity) the same results.  All functions are
deterministic for fixed inputs.
"""
from __future__ import annotations

import numpy as np

BACKEND_NAME = "python"


def inv_dist_sums(a: np.ndarray, b: np.ndarray, min_dist: float) -> tuple[float, float, int]:
    """Sum and sum-of-squares of 1/|a_i - b_i|, skipping pairs closer than min_dist.

    Returns (sum, sum_of_squares, n_skipped).  Skipped pairs contribute
    nothing; callers redraw them.
    """
    d = np.sqrt(((a - b) ** 2).sum(axis=1))
    good = d >= min_dist
    r = 1.0 / d[good]
    return float(r.sum()), float((r * r).sum()), int(d.shape[0] - good.sum())


def inv_dist_bad_mask(a: np.ndarray, b: np.ndarray, min_dist: float) -> np.ndarray:
    d2 = ((a - b) ** 2).sum(axis=1)
    return d2 < min_dist * min_dist


def poly_radial(
    parents: np.ndarray,
    axes: np.ndarray,
    mono_coeffs: np.ndarray,
    constant: float,
    dirs: np.ndarray,
) -> np.ndarray:
    """Evaluate constant + polynomial(dirs) via the monomial parent table."""
    dirs = np.atleast_2d(dirs)
    n = dirs.shape[0]
    out = np.full(n, constant + mono_coeffs[0])
    vals = np.empty((n, parents.shape[0]))
    vals[:, 0] = 1.0
    for i in range(1, parents.shape[0]):
        vals[:, i] = vals[:, parents[i]] * dirs[:, axes[i]]
        if mono_coeffs[i] != 0.0:
            out += mono_coeffs[i] * vals[:, i]
    return out


def star_first_exit(
    origins: np.ndarray,
    dirs: np.ndarray,
    center: np.ndarray,
    parents: np.ndarray,
    axes: np.ndarray,
    mono_coeffs: np.ndarray,
    constant: float,
    t_max: float,
    step: float,
    tol: float,
) -> np.ndarray:
    """First-exit parameter of rays from inside a star-shaped body.

    g(t) = |p + t d - c| - rho(direction of p + t d - c); the first sign
    change of g along the ray is bracketed by a forward scan of stride
    `step`, then bisected to absolute tolerance `tol`.  Rays with no sign
    change by t_max (should not happen for interior origins) return t_max.
    """
    origins = np.atleast_2d(origins)
    dirs = np.atleast_2d(dirs)
    n = origins.shape[0]

    def g(t):
        p = origins + t[:, None] * dirs - center
        r = np.sqrt((p * p).sum(axis=1))
        r_safe = np.where(r < 1e-300, 1.0, r)
        u = p / r_safe[:, None]
        return r - poly_radial(parents, axes, mono_coeffs, constant, u)

    lo = np.zeros(n)
    hi = np.full(n, step)
    done = np.zeros(n, dtype=bool)
    t = np.full(n, step)
    while True:
        gv = g(np.where(done, lo, t))
        newly = (~done) & (gv > 0.0)
        hi[newly] = t[newly]
        done |= newly
        if done.all():
            break
        lo[~done] = t[~done]
        t = np.where(done, t, t + step)
        if (t[~done] > t_max).all():
            hi[~done] = t_max
            break

    for _ in range(200):
        if float((hi - lo).max()) <= tol:
            break
        mid = 0.5 * (lo + hi)
        inside = g(mid) <= 0.0
        lo = np.where(inside, mid, lo)
        hi = np.where(inside, hi, mid)
    return 0.5 * (lo + hi)
