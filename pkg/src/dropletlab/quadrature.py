"""Sphere quadrature grids.

Product rules (Gauss-Legendre in the polar cosine, trapezoid in azimuth)
never place nodes at the poles and are exact for band-limited integrands.
The graded polar grid refines geometrically toward the pole; the Newtonian
potential code rotates it so its pole tracks the evaluation point, where the
angular integrand has an integrable logarithmic concentration.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np


@dataclass(frozen=True)
class SphereGrid:
    dirs: np.ndarray     # (n, 3) unit vectors
    weights: np.ndarray  # (n,), sum = 4 pi

    def __len__(self) -> int:
        return self.dirs.shape[0]

    def integrate(self, values: np.ndarray) -> float:
        return float(self.weights @ values)


def _dirs_from_angles(cos_t: np.ndarray, phi: np.ndarray) -> np.ndarray:
    """Outer product of polar cosines and azimuths into unit vectors."""
    sin_t = np.sqrt(np.maximum(0.0, 1.0 - cos_t**2))
    x = np.outer(sin_t, np.cos(phi))
    y = np.outer(sin_t, np.sin(phi))
    z = np.outer(cos_t, np.ones_like(phi))
    return np.stack([x.ravel(), y.ravel(), z.ravel()], axis=1)


@lru_cache(maxsize=32)
def gauss_sphere_grid(n_theta: int = 48, n_phi: int = 96) -> SphereGrid:
    nodes, w = np.polynomial.legendre.leggauss(n_theta)
    phi = 2.0 * np.pi * np.arange(n_phi) / n_phi
    dirs = _dirs_from_angles(nodes, phi)
    weights = np.repeat(w, n_phi) * (2.0 * np.pi / n_phi)
    return SphereGrid(dirs, weights)


@lru_cache(maxsize=8)
def graded_polar_grid(n_phi: int = 24, n_main: int = 24, levels: int = 14,
                      cap: float = 0.5, panel_nodes: int = 8) -> SphereGrid:
    """Polar-graded sphere grid with geometric panels toward theta = 0.

    Panels [cap/2^(j+1), cap/2^j] in theta each carry a panel_nodes-point
    Gauss rule; the remainder [cap, pi] carries an n_main-node rule.
    Azimuth is a trapezoid with n_phi nodes.  Integrands with a log(theta)
    concentration at the pole are handled to quadrature accuracy: per-panel
    Gauss error on the log factor is scale-invariant, so the panel order
    (not the number of levels) sets the floor.
    """
    theta_nodes = []
    theta_weights = []
    edges = [cap * 0.5**j for j in range(levels + 1)]
    glp_x, glp_w = np.polynomial.legendre.leggauss(panel_nodes)
    for j in range(levels):
        a, b = edges[j + 1], edges[j]
        theta_nodes.append(0.5 * (b - a) * glp_x + 0.5 * (a + b))
        theta_weights.append(0.5 * (b - a) * glp_w)
    # innermost panel [0, edges[-1]] still gets one small rule
    a, b = 0.0, edges[-1]
    theta_nodes.append(0.5 * (b - a) * glp_x + 0.5 * (a + b))
    theta_weights.append(0.5 * (b - a) * glp_w)
    glm_x, glm_w = np.polynomial.legendre.leggauss(n_main)
    a, b = cap, np.pi
    theta_nodes.append(0.5 * (b - a) * glm_x + 0.5 * (a + b))
    theta_weights.append(0.5 * (b - a) * glm_w)

    theta = np.concatenate(theta_nodes)
    wt = np.concatenate(theta_weights) * np.sin(theta)
    phi = 2.0 * np.pi * np.arange(n_phi) / n_phi
    dirs = _dirs_from_angles(np.cos(theta), phi)
    weights = np.repeat(wt, n_phi) * (2.0 * np.pi / n_phi)
    return SphereGrid(dirs, weights)


def rotations_to(targets: np.ndarray) -> np.ndarray:
    """Rotation matrices R with R @ e_z = target, batched, stable near -e_z.

    Rodrigues construction about the axis e_z x target; for targets within
    1e-12 of -e_z a fixed 180-degree rotation about e_x is substituted.
    """
    t = np.atleast_2d(targets)
    n = t.shape[0]
    z = t[:, 2]
    out = np.empty((n, 3, 3))
    v1, v2 = -t[:, 1], t[:, 0]  # e_z x t
    s2 = v1 * v1 + v2 * v2
    safe = 1.0 + z > 1e-12
    k = np.where(s2 > 0, (1.0 - z) / np.where(s2 > 0, s2, 1.0), 0.0)
    out[:, 0, 0] = 1.0 - k * v2 * v2
    out[:, 0, 1] = k * v1 * v2
    out[:, 0, 2] = v2
    out[:, 1, 0] = k * v1 * v2
    out[:, 1, 1] = 1.0 - k * v1 * v1
    out[:, 1, 2] = -v1
    out[:, 2, 0] = -v2
    out[:, 2, 1] = v1
    out[:, 2, 2] = z
    flip = ~safe
    if flip.any():
        out[flip] = np.diag([1.0, -1.0, -1.0])
    return out
