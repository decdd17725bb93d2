"""Newtonian potential v(x) = integral over the body of 1/|x - y| dy.

Closed forms for balls and two-ball unions (shell theorem), and a
deterministic quadrature engine for radial bodies: the radial integral of
s^2/|x - c - s w| has an explicit antiderivative, leaving one integral over
directions w.  Its integrand concentrates logarithmically toward the
direction from the center to x, so the direction grid is a polar-graded
rule rotated to put its pole exactly there.

The Coulomb energy of a radial body follows without a volume integral from
the dilation identity

    D = (1/5) * surface integral of v(x) <x - c, n> dA = (1/5) int v rho^3 dw,

and the surface interaction is int v rho sqrt(rho^2 + |grad rho|^2) dw.
"""
from __future__ import annotations

import numpy as np

from . import quadrature
from .shapes import Ball, Measured, RadialBody, TwoBalls

_POINT_CHUNK = 64


# ---------------------------------------------------------------------------
# closed forms


def ball_potential(radius: float, dist) -> np.ndarray:
    """Potential of a ball of the given radius at distance dist from its center."""
    d = np.asarray(dist, dtype=np.float64)
    inside = 2.0 * np.pi / 3.0 * (3.0 * radius**2 - d**2)
    with np.errstate(divide="ignore"):
        outside = 4.0 * np.pi * radius**3 / (3.0 * np.maximum(d, 1e-300))
    return np.where(d <= radius, inside, outside)


def ball_coulomb(radius: float) -> float:
    return 16.0 * np.pi**2 * radius**5 / 15.0


def ball_boundary_interaction(radius: float) -> float:
    return 16.0 * np.pi**2 * radius**4 / 3.0


def twoballs_coulomb(body: TwoBalls) -> float:
    r1, r2, d = body.radius1, body.radius2, body.separation
    self_terms = ball_coulomb(r1) + ball_coulomb(r2)
    cross = (4.0 * np.pi / 3.0) ** 2 * r1**3 * r2**3 / d
    return self_terms + cross


def twoballs_boundary_interaction(body: TwoBalls) -> float:
    r1, r2, d = body.radius1, body.radius2, body.separation
    own = ball_boundary_interaction(r1) + ball_boundary_interaction(r2)
    cross = 16.0 * np.pi**2 / 3.0 * (r1**2 * r2**3 + r2**2 * r1**3) / d
    return own + cross


def closed_form_potential(body, points) -> np.ndarray | None:
    """Exact potential for bodies that admit one, else None."""
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    if isinstance(body, Ball):
        d = np.sqrt(((pts - body.center) ** 2).sum(axis=1))
        return ball_potential(body.radius, d)
    if isinstance(body, TwoBalls):
        d1 = np.sqrt(((pts - body.center1) ** 2).sum(axis=1))
        d2 = np.sqrt(((pts - body.center2) ** 2).sum(axis=1))
        return ball_potential(body.radius1, d1) + ball_potential(body.radius2, d2)
    return None


# ---------------------------------------------------------------------------
# quadrature engine for radial bodies


def _radial_primitive(rho: np.ndarray, b: np.ndarray, a: np.ndarray) -> np.ndarray:
    """int_0^rho s^2 / sqrt(s^2 - 2 b s + a^2) ds, stable for all sign cases.

    a = |x - c|, b = <x - c, w>.  The logarithm is evaluated in a form with
    no 0/0 cancellation at b -> +-a; the only true blow-up (interior points,
    w toward x) is integrable and resolved by the graded grid.
    """
    u = rho - b
    k2 = np.maximum(a * a - b * b, 0.0)
    sq = np.sqrt(u * u + k2)
    apb = a + b
    pos = u > 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(
            pos,
            apb * (u + sq) / np.where(k2 > 0.0, k2, 1e-300),
            apb / np.maximum(sq - u, 1e-300),
        )
        log_term = np.log(np.maximum(ratio, 1e-300))
    return 0.5 * (rho + 3.0 * b) * sq - 1.5 * a * b + 0.5 * (3.0 * b * b - a * a) * log_term


def potential_quadrature(body: RadialBody, points, grid=None) -> np.ndarray:
    """Deterministic v(x) for a radial body at arbitrary points."""
    if grid is None:
        grid = quadrature.graded_polar_grid()
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    n = pts.shape[0]
    out = np.empty(n)
    base_dirs = grid.dirs
    w = grid.weights
    scale = max(body.diameter(), 1e-300)
    rel = pts - body.center
    dist = np.sqrt((rel * rel).sum(axis=1))

    central = dist < 1e-12 * scale
    if central.any():
        rho_c = body.radial(base_dirs)
        out[central] = float(w @ (rho_c**2 / 2.0))

    idx = np.flatnonzero(~central)
    for lo in range(0, idx.shape[0], _POINT_CHUNK):
        sel = idx[lo : lo + _POINT_CHUNK]
        d = rel[sel]
        a = dist[sel]
        dirs_hat = d / a[:, None]
        rots = quadrature.rotations_to(dirs_hat)
        dirs = np.einsum("nij,dj->ndi", rots, base_dirs)
        flat = np.ascontiguousarray(dirs.reshape(-1, 3))
        rho = body.radial(flat).reshape(len(sel), -1)
        b = np.einsum("ndi,ni->nd", dirs, d)
        g = _radial_primitive(rho, b, a[:, None])
        out[sel] = g @ w
    return out


def _surface_fields(body: RadialBody, n_theta: int, n_phi: int):
    grid = quadrature.gauss_sphere_grid(n_theta, n_phi)
    rho, area_density, _ = body._surface_density(grid.dirs)
    pts = body.center + rho[:, None] * grid.dirs
    return grid, rho, area_density, pts


def coulomb_quadrature(body: RadialBody, n_theta: int = 32, n_phi: int = 64,
                       potential_grid=None) -> Measured:
    """Coulomb energy via the dilation identity, with a refinement error bound."""
    fine = _coulomb_on(body, n_theta, n_phi, potential_grid)
    coarse = _coulomb_on(body, (2 * n_theta) // 3, (2 * n_phi) // 3,
                         quadrature.graded_polar_grid(16, 16, 14))
    return Measured(fine, 4.0 * abs(fine - coarse) + 1e-12 * abs(fine))


def _coulomb_on(body, n_theta, n_phi, potential_grid) -> float:
    grid, rho, _, pts = _surface_fields(body, n_theta, n_phi)
    v = potential_quadrature(body, pts, grid=potential_grid)
    return float(grid.weights @ (v * rho**3)) / 5.0


def boundary_interaction_quadrature(body: RadialBody, n_theta: int = 32,
                                    n_phi: int = 64, potential_grid=None) -> Measured:
    fine = _boundary_on(body, n_theta, n_phi, potential_grid)
    coarse = _boundary_on(body, (2 * n_theta) // 3, (2 * n_phi) // 3,
                          quadrature.graded_polar_grid(16, 16, 14))
    return Measured(fine, 4.0 * abs(fine - coarse) + 1e-12 * abs(fine))


def _boundary_on(body, n_theta, n_phi, potential_grid) -> float:
    grid, _, area_density, pts = _surface_fields(body, n_theta, n_phi)
    v = potential_quadrature(body, pts, grid=potential_grid)
    return float(grid.weights @ (v * area_density))
