"""Bounded 3D bodies: geometry, sampling, and I/O.

Five body types share one interface: closed-form balls and two-ball unions,
radial graphs over the sphere (ellipsoids and spherical-harmonic star
shapes), and triangle meshes.  Geometric quantities return Measured pairs
(value, error bound); the error is zero for closed forms, a refinement
difference for quadrature, and exact-mesh quantities are exact for the mesh
itself.

Radial bodies are handled through the graph x(w) = center + rho(w) w over
unit directions w.  Area element rho * sqrt(rho^2 + |grad rho|^2), outward
normal along rho w - grad_S rho, and the parametric second fundamental form
(via a tangent-plane chart, pole-free) give perimeter, normals, and the sum
of principal curvatures, positive for a ball.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import harmonics, quadrature, sampling
from ._backend import get_backend

FINE_GRID = (48, 96)
COARSE_GRID = (32, 64)


class Measured(NamedTuple):
    """A scalar with an error bound (stderr for Monte Carlo, 0 if exact)."""

    value: float
    error: float


@dataclass
class BoundarySamples:
    """Boundary point batch: weights turn sums into surface integrals.

    normals point inward.  mean_curvature is the sum of principal
    curvatures (2/R on a sphere of radius R).  triangle carries the source
    triangle index for mesh samples (None otherwise).  excluded counts
    samples dropped by grazing-ray retries.
    """

    points: np.ndarray
    normals: np.ndarray
    weights: np.ndarray
    mean_curvature: np.ndarray
    triangle: np.ndarray | None = None
    excluded: int = 0

    def __len__(self) -> int:
        return self.points.shape[0]


def _as_points(x) -> tuple[np.ndarray, bool]:
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim == 1:
        return arr[None, :], True
    return arr, False


def _norms(v: np.ndarray) -> np.ndarray:
    return np.sqrt((v * v).sum(axis=1))


class Body:
    """Common interface of all bodies."""

    center: np.ndarray

    def volume(self) -> Measured:
        raise NotImplementedError

    def perimeter(self) -> Measured:
        raise NotImplementedError

    def contains(self, points) -> np.ndarray:
        raise NotImplementedError

    def ray_exit_length(self, points, dirs) -> np.ndarray:
        """First-exit length: sup{t : segment [x, x + t d] stays in the body}."""
        raise NotImplementedError

    def mean_curvature_at(self, points) -> np.ndarray:
        raise NotImplementedError

    def sample_boundary(self, count: int, seed: int, workers: int = 1) -> BoundarySamples:
        raise NotImplementedError

    def bounding_box(self) -> tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError

    def surface_project(self, points, hints=None) -> np.ndarray:
        """Map near-surface points back onto the boundary."""
        raise NotImplementedError

    def scaled(self, t: float) -> "Body":
        """Image under x -> t x (about the origin)."""
        raise NotImplementedError

    def translated(self, shift) -> "Body":
        raise NotImplementedError

    def diameter(self) -> float:
        lo, hi = self.bounding_box()
        return float(np.sqrt(((hi - lo) ** 2).sum()))

    def _require_inside(self, points: np.ndarray) -> None:
        rel = self.diameter()
        if not self.contains_with_slack(points, 1e-9 * rel).all():
            raise ValueError("exterior origin: ray start point lies outside the body")

    def contains_with_slack(self, points, slack: float) -> np.ndarray:
        return self.contains(points)


# ---------------------------------------------------------------------------
# radial bodies


class RadialBody(Body):
    """Body star-shaped about its center, given by rho(w) on unit directions."""

    def radial(self, dirs: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _radial_full(self, dirs: np.ndarray):
        """(rho, cartesian gradient, cartesian hessian) of a smooth extension."""
        raise NotImplementedError

    # -- measures ----------------------------------------------------------

    def _surface_density(self, dirs: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """rho, area element a(w), and unnormalized outward normal rho*w - grad_S rho."""
        rho, g, _ = self._radial_full(dirs)
        gs = g - (g * dirs).sum(axis=1)[:, None] * dirs
        nvec = rho[:, None] * dirs - gs
        a = rho * _norms(nvec)
        return rho, a, nvec

    def volume(self) -> Measured:
        fine = self._volume_on(quadrature.gauss_sphere_grid(*FINE_GRID))
        coarse = self._volume_on(quadrature.gauss_sphere_grid(*COARSE_GRID))
        return Measured(fine, abs(fine - coarse))

    def _volume_on(self, grid) -> float:
        rho = self.radial(grid.dirs)
        return grid.integrate(rho**3 / 3.0)

    def perimeter(self) -> Measured:
        fine = self._perimeter_on(quadrature.gauss_sphere_grid(*FINE_GRID))
        coarse = self._perimeter_on(quadrature.gauss_sphere_grid(*COARSE_GRID))
        return Measured(fine, abs(fine - coarse))

    def _perimeter_on(self, grid) -> float:
        _, a, _ = self._surface_density(grid.dirs)
        return grid.integrate(a)

    # -- point queries ------------------------------------------------------

    def contains(self, points) -> np.ndarray:
        return self.contains_with_slack(points, 0.0)

    def contains_with_slack(self, points, slack: float) -> np.ndarray:
        pts, _ = _as_points(points)
        rel = pts - self.center
        r = _norms(rel)
        out = np.empty(pts.shape[0], dtype=bool)
        at_center = r < 1e-300
        out[at_center] = True
        ok = ~at_center
        if ok.any():
            dirs = rel[ok] / r[ok, None]
            out[ok] = r[ok] <= self.radial(dirs) + slack
        return out

    def surface_point(self, dirs: np.ndarray) -> np.ndarray:
        dirs = np.atleast_2d(dirs)
        return self.center + self.radial(dirs)[:, None] * dirs

    def surface_project(self, points, hints=None) -> np.ndarray:
        pts, single = _as_points(points)
        rel = pts - self.center
        r = _norms(rel)
        if (r < 1e-300).any():
            raise ValueError("cannot project the center to the surface")
        dirs = rel / r[:, None]
        out = self.surface_point(dirs)
        return out[0] if single else out

    def inward_normal_at(self, points) -> np.ndarray:
        pts, single = _as_points(points)
        rel = pts - self.center
        dirs = rel / _norms(rel)[:, None]
        _, _, nvec = self._surface_density(dirs)
        out = -nvec / _norms(nvec)[:, None]
        return out[0] if single else out

    def mean_curvature_at(self, points) -> np.ndarray:
        pts, single = _as_points(points)
        rel = pts - self.center
        r = _norms(rel)
        dirs = rel / r[:, None]
        h = self._curvature_dirs(dirs)
        return h[0] if single else h

    def _curvature_dirs(self, dirs: np.ndarray) -> np.ndarray:
        """Sum of principal curvatures via a tangent-plane chart at each direction.

        With w(s, t) = normalize(w0 + s e1 + t e2) the chart derivatives at
        the origin are d_s w = e1, d_ss w = d_tt w = -w0, d_st w = 0, so the
        fundamental forms need only the Cartesian gradient/Hessian of the
        radial extension.
        """
        dirs = np.atleast_2d(dirs)
        rho, g, hess = self._radial_full(dirs)
        e1, e2 = sampling.tangent_frame(dirs)
        g_w = (g * dirs).sum(axis=1)
        r_s = (g * e1).sum(axis=1)
        r_t = (g * e2).sum(axis=1)
        he1 = np.einsum("nij,nj->ni", hess, e1)
        he2 = np.einsum("nij,nj->ni", hess, e2)
        r_ss = (he1 * e1).sum(axis=1) - g_w
        r_st = (he1 * e2).sum(axis=1)
        r_tt = (he2 * e2).sum(axis=1) - g_w

        x_s = r_s[:, None] * dirs + rho[:, None] * e1
        x_t = r_t[:, None] * dirs + rho[:, None] * e2
        x_ss = r_ss[:, None] * dirs + 2.0 * r_s[:, None] * e1 - rho[:, None] * dirs
        x_st = r_st[:, None] * dirs + r_s[:, None] * e2 + r_t[:, None] * e1
        x_tt = r_tt[:, None] * dirs + 2.0 * r_t[:, None] * e2 - rho[:, None] * dirs

        E = (x_s * x_s).sum(axis=1)
        F = (x_s * x_t).sum(axis=1)
        G = (x_t * x_t).sum(axis=1)
        nvec = np.cross(x_s, x_t)  # = rho (rho w - grad_S rho), outward
        nhat = nvec / _norms(nvec)[:, None]
        L = (x_ss * nhat).sum(axis=1)
        M = (x_st * nhat).sum(axis=1)
        N = (x_tt * nhat).sum(axis=1)
        return -(E * N - 2.0 * F * M + G * L) / (E * G - F * F)

    def sample_boundary(self, count: int, seed: int, workers: int = 1) -> BoundarySamples:
        def one_chunk(index: int, size: int):
            rng = sampling.rng_for(seed, sampling.STREAM_BOUNDARY, index)
            dirs = sampling.uniform_sphere(rng, size)
            rho, a, nvec = self._surface_density(dirs)
            pts = self.center + rho[:, None] * dirs
            normals = -nvec / _norms(nvec)[:, None]
            h = self._curvature_dirs(dirs)
            return pts, normals, a, h

        parts = sampling.map_chunks(one_chunk, count, workers)
        pts = np.concatenate([p[0] for p in parts])
        normals = np.concatenate([p[1] for p in parts])
        weights = np.concatenate([p[2] for p in parts]) * (4.0 * np.pi / count)
        curv = np.concatenate([p[3] for p in parts])
        return BoundarySamples(pts, normals, weights, curv)


class Ball(RadialBody):
    """Round ball; all geometric quantities in closed form."""

    def __init__(self, radius: float, center=(0.0, 0.0, 0.0)):
        if radius <= 0:
            raise ValueError("radius must be positive")
        self.radius = float(radius)
        self.center = np.asarray(center, dtype=np.float64)

    def __repr__(self) -> str:
        return f"Ball(radius={self.radius}, center={self.center.tolist()})"

    def radial(self, dirs: np.ndarray) -> np.ndarray:
        return np.full(np.atleast_2d(dirs).shape[0], self.radius)

    def _radial_full(self, dirs: np.ndarray):
        dirs = np.atleast_2d(dirs)
        n = dirs.shape[0]
        return (
            np.full(n, self.radius),
            np.zeros((n, 3)),
            np.zeros((n, 3, 3)),
        )

    def volume(self) -> Measured:
        return Measured(4.0 * np.pi * self.radius**3 / 3.0, 0.0)

    def perimeter(self) -> Measured:
        return Measured(4.0 * np.pi * self.radius**2, 0.0)

    def mean_curvature_at(self, points) -> np.ndarray:
        pts, single = _as_points(points)
        h = np.full(pts.shape[0], 2.0 / self.radius)
        return h[0] if single else h

    def _curvature_dirs(self, dirs: np.ndarray) -> np.ndarray:
        return np.full(np.atleast_2d(dirs).shape[0], 2.0 / self.radius)

    def ray_exit_length(self, points, dirs) -> np.ndarray:
        pts, single = _as_points(points)
        d, _ = _as_points(dirs)
        self._require_inside(pts)
        rel = pts - self.center
        pd = (rel * d).sum(axis=1)
        disc = pd * pd + self.radius**2 - (rel * rel).sum(axis=1)
        t = -pd + np.sqrt(np.maximum(disc, 0.0))
        return t[0] if single else t

    def bounding_box(self):
        r = self.radius
        return self.center - r, self.center + r

    def scaled(self, t: float) -> "Ball":
        return Ball(self.radius * t, self.center * t)

    def translated(self, shift) -> "Ball":
        return Ball(self.radius, self.center + np.asarray(shift, dtype=np.float64))


class Ellipsoid(RadialBody):
    """Solid ellipsoid with semi-axes (a, b, c) aligned to the coordinate axes."""

    def __init__(self, semi_axes, center=(0.0, 0.0, 0.0)):
        axes = np.asarray(semi_axes, dtype=np.float64)
        if axes.shape != (3,) or (axes <= 0).any():
            raise ValueError("semi_axes must be three positive numbers")
        self.semi_axes = axes
        self.center = np.asarray(center, dtype=np.float64)
        self._a_diag = 1.0 / axes**2

    def __repr__(self) -> str:
        return f"Ellipsoid(semi_axes={self.semi_axes.tolist()}, center={self.center.tolist()})"

    def radial(self, dirs: np.ndarray) -> np.ndarray:
        dirs = np.atleast_2d(dirs)
        q = (dirs * dirs * self._a_diag).sum(axis=1)
        return 1.0 / np.sqrt(q)

    def _radial_full(self, dirs: np.ndarray):
        # extension f(p) = (p^T A p)^(-1/2), smooth away from the origin
        dirs = np.atleast_2d(dirs)
        ap = dirs * self._a_diag
        q = (dirs * ap).sum(axis=1)
        rho = q**-0.5
        g = -(q**-1.5)[:, None] * ap
        hess = 3.0 * (q**-2.5)[:, None, None] * ap[:, :, None] * ap[:, None, :]
        hess -= (q**-1.5)[:, None, None] * np.diag(self._a_diag)[None, :, :]
        return rho, g, hess

    def volume(self) -> Measured:
        return Measured(4.0 * np.pi / 3.0 * float(np.prod(self.semi_axes)), 0.0)

    def contains_with_slack(self, points, slack: float) -> np.ndarray:
        pts, _ = _as_points(points)
        rel = (pts - self.center) / self.semi_axes
        scale = float(self.semi_axes.min())
        return (rel * rel).sum(axis=1) <= (1.0 + slack / scale) ** 2

    def ray_exit_length(self, points, dirs) -> np.ndarray:
        pts, single = _as_points(points)
        d, _ = _as_points(dirs)
        self._require_inside(pts)
        rel = pts - self.center
        qdd = (d * d * self._a_diag).sum(axis=1)
        qpd = (rel * d * self._a_diag).sum(axis=1)
        qpp = (rel * rel * self._a_diag).sum(axis=1)
        disc = qpd * qpd - qdd * (qpp - 1.0)
        t = (-qpd + np.sqrt(np.maximum(disc, 0.0))) / qdd
        return t[0] if single else t

    def bounding_box(self):
        return self.center - self.semi_axes, self.center + self.semi_axes

    def scaled(self, t: float) -> "Ellipsoid":
        return Ellipsoid(self.semi_axes * t, self.center * t)

    def translated(self, shift) -> "Ellipsoid":
        return Ellipsoid(self.semi_axes, self.center + np.asarray(shift, dtype=np.float64))


class StarShape(RadialBody):
    """Radial graph rho(w) = R (1 + sum c_lm Y_lm(w)) over the unit sphere.

    Coefficients are a mapping {(l, m): c}.  The radial map must stay
    positive; this is validated on a dense quadrature grid at construction.
    """

    def __init__(self, base_radius: float, coeffs: dict | None = None,
                 center=(0.0, 0.0, 0.0), lmax: int | None = None):
        if base_radius <= 0:
            raise ValueError("base radius must be positive")
        self.base_radius = float(base_radius)
        self.center = np.asarray(center, dtype=np.float64)
        coeffs = dict(coeffs or {})
        max_l = max((l for (l, _m) in coeffs), default=0)
        self.lmax = int(lmax) if lmax is not None else max(max_l, 2)
        if max_l > self.lmax:
            raise ValueError("coefficient degree exceeds lmax")
        self.basis = harmonics.basis(self.lmax)
        self.coeffs = np.zeros(self.basis.size)
        for (l, m), c in coeffs.items():
            self.coeffs[self.basis.flat_index(l, m)] = float(c)
        self._poly = self.basis.combine(self.base_radius * self.coeffs)
        self._poly.add_constant(self.base_radius)

        grid = quadrature.gauss_sphere_grid(*FINE_GRID)
        rho = self.radial(grid.dirs)
        self.rho_min = float(rho.min())
        self.rho_max = float(rho.max())
        if self.rho_min <= 0.0:
            raise ValueError("radial degeneracy: rho(w) <= 0 on the validation grid")

    def __repr__(self) -> str:
        nz = int(np.count_nonzero(self.coeffs))
        return (
            f"StarShape(base_radius={self.base_radius}, modes={nz}, lmax={self.lmax})"
        )

    def coeff_dict(self) -> dict[tuple[int, int], float]:
        out = {}
        for k, c in enumerate(self.coeffs):
            if c != 0.0:
                out[self.basis.mode_of(k)] = float(c)
        return out

    def radial(self, dirs: np.ndarray) -> np.ndarray:
        return self._poly.value(np.atleast_2d(dirs))

    def _radial_full(self, dirs: np.ndarray):
        dirs = np.atleast_2d(dirs)
        return (
            self._poly.value(dirs),
            self._poly.gradient(dirs),
            self._poly.hessian(dirs),
        )

    def ray_exit_length(self, points, dirs) -> np.ndarray:
        pts, single = _as_points(points)
        d, _ = _as_points(dirs)
        self._require_inside(pts)
        kern = get_backend()
        space = self.basis.space
        t = kern.star_first_exit(
            np.ascontiguousarray(pts),
            np.ascontiguousarray(d),
            np.ascontiguousarray(self.center),
            space.parents,
            space.axes,
            np.ascontiguousarray(self._poly.mono_value_coeffs()),
            0.0,
            2.5 * self.rho_max,
            self.base_radius / 64.0,
            1e-10 * self.base_radius,
        )
        return t[0] if single else t

    def bounding_box(self):
        r = self.rho_max
        return self.center - r, self.center + r

    def scaled(self, t: float) -> "StarShape":
        return StarShape(
            self.base_radius * t, self.coeff_dict(), self.center * t, lmax=self.lmax
        )

    def translated(self, shift) -> "StarShape":
        return StarShape(
            self.base_radius,
            self.coeff_dict(),
            self.center + np.asarray(shift, dtype=np.float64),
            lmax=self.lmax,
        )

    def to_json(self, path) -> None:
        data = {
            "R": self.base_radius,
            "center": self.center.tolist(),
            "coeffs": [
                {"l": l, "m": m, "c": c} for (l, m), c in sorted(self.coeff_dict().items())
            ],
        }
        with open(path, "w") as fh:
            json.dump(data, fh, indent=2)
            fh.write("\n")

    @classmethod
    def from_json(cls, path) -> "StarShape":
        with open(path) as fh:
            data = json.load(fh)
        coeffs = {(int(e["l"]), int(e["m"])): float(e["c"]) for e in data.get("coeffs", [])}
        return cls(float(data["R"]), coeffs, center=data.get("center", (0.0, 0.0, 0.0)))


class TwoBalls(Body):
    """Disjoint union of two balls with centers `separation` apart on `axis`."""

    def __init__(self, radius1: float, radius2: float, separation: float,
                 center=(0.0, 0.0, 0.0), axis=(0.0, 0.0, 1.0)):
        if radius1 <= 0 or radius2 <= 0:
            raise ValueError("radii must be positive")
        if separation < radius1 + radius2:
            raise ValueError("separation must be at least the sum of the radii")
        self.radius1 = float(radius1)
        self.radius2 = float(radius2)
        self.separation = float(separation)
        self.center = np.asarray(center, dtype=np.float64)
        ax = np.asarray(axis, dtype=np.float64)
        self.axis = ax / np.sqrt((ax * ax).sum())
        self.center1 = self.center - 0.5 * self.separation * self.axis
        self.center2 = self.center + 0.5 * self.separation * self.axis
        self._balls = (
            Ball(self.radius1, self.center1),
            Ball(self.radius2, self.center2),
        )

    def __repr__(self) -> str:
        return (
            f"TwoBalls(radius1={self.radius1}, radius2={self.radius2}, "
            f"separation={self.separation})"
        )

    def volume(self) -> Measured:
        return Measured(4.0 * np.pi / 3.0 * (self.radius1**3 + self.radius2**3), 0.0)

    def perimeter(self) -> Measured:
        return Measured(4.0 * np.pi * (self.radius1**2 + self.radius2**2), 0.0)

    def contains(self, points) -> np.ndarray:
        return self.contains_with_slack(points, 0.0)

    def contains_with_slack(self, points, slack: float) -> np.ndarray:
        a = self._balls[0].contains_with_slack(points, slack)
        b = self._balls[1].contains_with_slack(points, slack)
        return a | b

    def _owner(self, points: np.ndarray) -> np.ndarray:
        """0 or 1 for the ball owning each point (nearest if in neither)."""
        pts, _ = _as_points(points)
        d1 = _norms(pts - self.center1) - self.radius1
        d2 = _norms(pts - self.center2) - self.radius2
        return (d2 < d1).astype(np.int64)

    def ray_exit_length(self, points, dirs) -> np.ndarray:
        pts, single = _as_points(points)
        d, _ = _as_points(dirs)
        self._require_inside(pts)
        owner = self._owner(pts)
        t = np.empty(pts.shape[0])
        for i, ball in enumerate(self._balls):
            mask = owner == i
            if mask.any():
                t[mask] = ball.ray_exit_length(pts[mask], d[mask])
        return t[0] if single else t

    def mean_curvature_at(self, points) -> np.ndarray:
        pts, single = _as_points(points)
        radii = np.array([self.radius1, self.radius2])
        h = 2.0 / radii[self._owner(pts)]
        return h[0] if single else h

    def inward_normal_at(self, points) -> np.ndarray:
        pts, single = _as_points(points)
        owner = self._owner(pts)
        centers = np.stack([self.center1, self.center2])
        rel = pts - centers[owner]
        out = -rel / _norms(rel)[:, None]
        return out[0] if single else out

    def surface_project(self, points, hints=None) -> np.ndarray:
        pts, single = _as_points(points)
        owner = self._owner(pts)
        out = np.empty_like(pts)
        for i, ball in enumerate(self._balls):
            mask = owner == i
            if mask.any():
                out[mask] = ball.surface_project(pts[mask])
        return out[0] if single else out

    def sample_boundary(self, count: int, seed: int, workers: int = 1) -> BoundarySamples:
        a1 = 4.0 * np.pi * self.radius1**2
        a2 = 4.0 * np.pi * self.radius2**2
        n1 = int(round(count * a1 / (a1 + a2)))
        n1 = min(max(n1, 1), count - 1) if count >= 2 else count

        def one_chunk(index: int, size: int):
            rng = sampling.rng_for(seed, sampling.STREAM_BOUNDARY, index)
            return sampling.uniform_sphere(rng, size)

        dirs = np.concatenate(sampling.map_chunks(one_chunk, count, workers))
        pts = np.empty((count, 3))
        weights = np.empty(count)
        curv = np.empty(count)
        pts[:n1] = self.center1 + self.radius1 * dirs[:n1]
        weights[:n1] = a1 / max(n1, 1)
        curv[:n1] = 2.0 / self.radius1
        pts[n1:] = self.center2 + self.radius2 * dirs[n1:]
        weights[n1:] = a2 / max(count - n1, 1)
        curv[n1:] = 2.0 / self.radius2
        return BoundarySamples(pts, -dirs, weights, curv)

    def bounding_box(self):
        lo1, hi1 = self._balls[0].bounding_box()
        lo2, hi2 = self._balls[1].bounding_box()
        return np.minimum(lo1, lo2), np.maximum(hi1, hi2)

    def scaled(self, t: float) -> "TwoBalls":
        return TwoBalls(
            self.radius1 * t, self.radius2 * t, self.separation * t,
            self.center * t, self.axis,
        )

    def translated(self, shift) -> "TwoBalls":
        return TwoBalls(
            self.radius1, self.radius2, self.separation,
            self.center + np.asarray(shift, dtype=np.float64), self.axis,
        )


# ---------------------------------------------------------------------------
# triangle meshes


_JITTER_BASIS = np.array(
    [
        [0.8017837257372732, 0.5345224838248488, 0.2672612419124244],
        [-0.3713906763541037, 0.9284766908852593, 0.0],
        [0.2672612419124244, -0.5345224838248488, 0.8017837257372732],
    ]
)
_PARITY_DIR = np.array([0.5773502691896258, 0.5773502691896258, 0.5773502691896258])


class Mesh(Body):
    """Closed, consistently oriented triangle mesh.

    Construction validates closedness (every undirected edge in exactly two
    triangles) and orientability (every directed edge exactly once), then
    orients the surface outward by the sign of the divergence-theorem
    volume.  Volume and area are exact for the mesh.  Mean curvature is the
    cotangent-Laplacian estimate at vertices with one-third triangle-area
    lumping, interpolated barycentrically at sampled points.
    """

    def __init__(self, vertices, triangles):
        v = np.asarray(vertices, dtype=np.float64)
        t = np.asarray(triangles, dtype=np.int64)
        if v.ndim != 2 or v.shape[1] != 3 or t.ndim != 2 or t.shape[1] != 3:
            raise ValueError("vertices must be (n, 3) floats and triangles (m, 3) indices")
        if t.min(initial=0) < 0 or t.max(initial=-1) >= v.shape[0]:
            raise ValueError("triangle index out of range")
        self.vertices = v
        self.triangles = t
        self._validate_topology()
        if self._signed_volume() < 0.0:
            self.triangles = self.triangles[:, [0, 2, 1]]
        self._setup_geometry()
        self.center = self.vertices.mean(axis=0)

    def _validate_topology(self) -> None:
        tri = self.triangles
        directed = np.concatenate([tri[:, [0, 1]], tri[:, [1, 2]], tri[:, [2, 0]]])
        keys = directed[:, 0] * self.vertices.shape[0] + directed[:, 1]
        if np.unique(keys).shape[0] != keys.shape[0]:
            raise ValueError("mesh is not consistently orientable (repeated directed edge)")
        und = np.sort(directed, axis=1)
        ukeys = und[:, 0] * self.vertices.shape[0] + und[:, 1]
        _, counts = np.unique(ukeys, return_counts=True)
        if not (counts == 2).all():
            raise ValueError("mesh is not closed (edge not shared by exactly two triangles)")

    def _signed_volume(self) -> float:
        a, b, c = (self.vertices[self.triangles[:, i]] for i in range(3))
        return float(np.einsum("ij,ij->i", a, np.cross(b, c)).sum()) / 6.0

    def _setup_geometry(self) -> None:
        a, b, c = (self.vertices[self.triangles[:, i]] for i in range(3))
        cr = np.cross(b - a, c - a)
        two_areas = _norms(cr)
        if (two_areas < 1e-300).any():
            raise ValueError("degenerate triangle with zero area")
        self.tri_normals = cr / two_areas[:, None]
        self.tri_areas = 0.5 * two_areas
        self._area = float(self.tri_areas.sum())
        self._volume = self._signed_volume()
        self._vertex_curvature = None

    # -- measures ------------------------------------------------------------

    def volume(self) -> Measured:
        return Measured(self._volume, 0.0)

    def perimeter(self) -> Measured:
        return Measured(self._area, 0.0)

    # -- curvature -----------------------------------------------------------

    def vertex_areas(self) -> np.ndarray:
        """One third of incident triangle area per vertex; sums to the area."""
        nv = self.vertices.shape[0]
        area = np.zeros(nv)
        np.add.at(area, self.triangles.ravel(),
                  np.repeat(self.tri_areas / 3.0, 3))
        return area

    def vertex_mean_curvature(self) -> np.ndarray:
        """Sum-of-principal-curvatures estimate per vertex (cotangent formula)."""
        if self._vertex_curvature is not None:
            return self._vertex_curvature
        nv = self.vertices.shape[0]
        area = self.vertex_areas()
        if (area < 1e-300).any():
            raise ValueError("degenerate vertex: zero-area vertex link")

        kvec = np.zeros((nv, 3))
        vnormal = np.zeros((nv, 3))
        tri = self.triangles
        pts = self.vertices
        for k in range(3):
            i = tri[:, k]
            j = tri[:, (k + 1) % 3]
            o = tri[:, (k + 2) % 3]
            u = pts[i] - pts[o]
            w = pts[j] - pts[o]
            cos = (u * w).sum(axis=1)
            sin = _norms(np.cross(u, w))
            cot = cos / np.maximum(sin, 1e-300)
            edge = pts[i] - pts[j]
            contrib = cot[:, None] * edge
            np.add.at(kvec, i, contrib)
            np.add.at(kvec, j, -contrib)
        for k in range(3):
            np.add.at(vnormal, tri[:, k], self.tri_normals * self.tri_areas[:, None])

        kvec /= (2.0 * area)[:, None]
        sign = np.sign((kvec * vnormal).sum(axis=1))
        sign[sign == 0.0] = 1.0
        self._vertex_curvature = sign * _norms(kvec)
        return self._vertex_curvature

    def mean_curvature_at(self, points) -> np.ndarray:
        from scipy.spatial import cKDTree

        pts, single = _as_points(points)
        h = self.vertex_mean_curvature()
        _, idx = cKDTree(self.vertices).query(pts)
        out = h[idx]
        return out[0] if single else out

    # -- ray casting ---------------------------------------------------------

    def _cast(self, origins: np.ndarray, dirs: np.ndarray, eps_t: float):
        """All-hit Moller-Trumbore over ray batches.

        Returns (hit count with t > eps_t, nearest such t, grazing flag).
        A ray is flagged grazing when any candidate intersection is nearly
        parallel to a triangle or lands within 1e-9 of a triangle edge, in
        which case parity and nearest-hit answers are unreliable and callers
        re-cast with jittered directions.
        """
        n = origins.shape[0]
        a = self.vertices[self.triangles[:, 0]]
        e1 = self.vertices[self.triangles[:, 1]] - a
        e2 = self.vertices[self.triangles[:, 2]] - a
        nearest = np.full(n, np.inf)
        count = np.zeros(n, dtype=np.int64)
        grazing = np.zeros(n, dtype=bool)
        edge_tol = 1e-9
        chunk = max(1, int(4_000_000 // max(self.triangles.shape[0], 1)))
        for lo in range(0, n, chunk):
            o = origins[lo : lo + chunk]
            d = dirs[lo : lo + chunk]
            pvec = np.cross(d[:, None, :], e2[None, :, :])
            det = np.einsum("tj,ntj->nt", e1, pvec)
            near_parallel = np.abs(det) < 1e-12
            inv = 1.0 / np.where(near_parallel, 1.0, det)
            tvec = o[:, None, :] - a[None, :, :]
            u = np.einsum("ntj,ntj->nt", tvec, pvec) * inv
            qvec = np.cross(tvec, e1[None, :, :])
            v = np.einsum("nj,ntj->nt", d, qvec) * inv
            t = np.einsum("tj,ntj->nt", e2, qvec) * inv
            inside = (u >= -edge_tol) & (v >= -edge_tol) & (u + v <= 1.0 + edge_tol)
            hit = inside & ~near_parallel & (t > eps_t)
            on_edge = inside & (
                (np.abs(u) < edge_tol)
                | (np.abs(v) < edge_tol)
                | (np.abs(1.0 - u - v) < edge_tol)
            )
            graze = (hit & on_edge) | (inside & near_parallel & (t > 0))
            sl = slice(lo, lo + o.shape[0])
            count[sl] = hit.sum(axis=1)
            tt = np.where(hit, t, np.inf)
            nearest[sl] = tt.min(axis=1)
            grazing[sl] = graze.any(axis=1)
        return count, nearest, grazing

    def _jittered(self, dirs: np.ndarray, attempt: int) -> np.ndarray:
        d = dirs + 1e-7 * attempt * _JITTER_BASIS[(attempt - 1) % 3]
        return d / _norms(d)[:, None]

    def contains(self, points) -> np.ndarray:
        return self.contains_with_slack(points, 0.0)

    def contains_with_slack(self, points, slack: float) -> np.ndarray:
        pts, single = _as_points(points)
        n = pts.shape[0]
        dirs = np.broadcast_to(_PARITY_DIR, (n, 3)).copy()
        out = np.zeros(n, dtype=bool)
        todo = np.ones(n, dtype=bool)
        for attempt in range(4):
            count, _, grazing = self._cast(pts[todo], dirs[todo], 0.0)
            idx = np.flatnonzero(todo)
            out[idx] = count % 2 == 1
            still = idx[grazing]
            todo[:] = False
            todo[still] = True
            if not todo.any():
                break
            dirs[todo] = self._jittered(dirs[todo], attempt + 1)
        if slack > 0.0:
            # points within slack of the surface count as inside; this also
            # settles parity ambiguities for points lying on a face
            near = ~out
            if near.any():
                out[near] |= self.surface_distance(pts[near]) <= slack
        return out[0] if single else out

    def surface_distance(self, points) -> np.ndarray:
        """Unsigned distance to the triangulated surface."""
        pts, single = _as_points(points)
        a = self.vertices[self.triangles[:, 0]]
        b = self.vertices[self.triangles[:, 1]]
        c = self.vertices[self.triangles[:, 2]]
        e0 = b - a
        e1 = c - a
        best = np.full(pts.shape[0], np.inf)
        chunk = max(1, int(2_000_000 // max(self.triangles.shape[0], 1)))
        for lo in range(0, pts.shape[0], chunk):
            p = pts[lo : lo + chunk]
            d = p[:, None, :] - a[None, :, :]
            # barycentric coordinates of the in-plane foot
            d00 = (e0 * e0).sum(axis=1)
            d01 = (e0 * e1).sum(axis=1)
            d11 = (e1 * e1).sum(axis=1)
            denom = d00 * d11 - d01 * d01
            pd0 = np.einsum("ntj,tj->nt", d, e0)
            pd1 = np.einsum("ntj,tj->nt", d, e1)
            v = (d11 * pd0 - d01 * pd1) / denom
            w = (d00 * pd1 - d01 * pd0) / denom
            inside = (v >= 0.0) & (w >= 0.0) & (v + w <= 1.0)
            plane_dist = np.abs(np.einsum("ntj,tj->nt", d, self.tri_normals))
            dist = np.where(inside, plane_dist, np.inf)
            # edge distances cover feet outside the triangle
            for s0, sv in ((a, e0), (a, e1), (b, c - b)):
                rel = p[:, None, :] - s0[None, :, :]
                seg_len2 = np.maximum((sv * sv).sum(axis=1), 1e-300)
                t = np.clip(np.einsum("ntj,tj->nt", rel, sv) / seg_len2, 0.0, 1.0)
                foot = s0[None, :, :] + t[:, :, None] * sv[None, :, :]
                seg_d = np.sqrt(((p[:, None, :] - foot) ** 2).sum(axis=2))
                dist = np.minimum(dist, seg_d)
            best[lo : lo + p.shape[0]] = dist.min(axis=1)
        return best[0] if single else best

    def ray_exit_length(self, points, dirs) -> np.ndarray:
        pts, single = _as_points(points)
        d, _ = _as_points(dirs)
        self._require_inside(pts)
        eps_t = 1e-12 * self.diameter()
        n = pts.shape[0]
        t_out = np.full(n, np.nan)
        cur = d.copy()
        todo = np.ones(n, dtype=bool)
        for attempt in range(4):
            _, nearest, grazing = self._cast(pts[todo], cur[todo], eps_t)
            ok = ~grazing & np.isfinite(nearest)
            idx = np.flatnonzero(todo)
            t_out[idx[ok]] = nearest[ok]
            still = idx[~ok]
            todo[:] = False
            todo[still] = True
            if not todo.any():
                break
            cur[todo] = self._jittered(cur[todo], attempt + 1)
        return t_out[0] if single else t_out

    def surface_project(self, points, hints=None) -> np.ndarray:
        """Project onto the plane of the hinted triangle (hints required)."""
        pts, single = _as_points(points)
        if hints is None:
            raise ValueError("mesh surface projection needs triangle hints")
        hints = np.atleast_1d(np.asarray(hints, dtype=np.int64))
        nrm = self.tri_normals[hints]
        base = self.vertices[self.triangles[hints, 0]]
        dist = ((pts - base) * nrm).sum(axis=1)
        out = pts - dist[:, None] * nrm
        return out[0] if single else out

    def sample_boundary(self, count: int, seed: int, workers: int = 1) -> BoundarySamples:
        cum = np.cumsum(self.tri_areas)
        total = cum[-1]
        hcurv = self.vertex_mean_curvature()

        def one_chunk(index: int, size: int):
            rng = sampling.rng_for(seed, sampling.STREAM_BOUNDARY, index)
            pick = np.searchsorted(cum, rng.random(size) * total)
            pick = np.minimum(pick, cum.shape[0] - 1)
            r1 = np.sqrt(rng.random(size))
            r2 = rng.random(size)
            w0 = 1.0 - r1
            w1 = r1 * (1.0 - r2)
            w2 = r1 * r2
            tri = self.triangles[pick]
            pts = (
                self.vertices[tri[:, 0]] * w0[:, None]
                + self.vertices[tri[:, 1]] * w1[:, None]
                + self.vertices[tri[:, 2]] * w2[:, None]
            )
            h = hcurv[tri[:, 0]] * w0 + hcurv[tri[:, 1]] * w1 + hcurv[tri[:, 2]] * w2
            return pts, -self.tri_normals[pick], h, pick

        parts = sampling.map_chunks(one_chunk, count, workers)
        pts = np.concatenate([p[0] for p in parts])
        normals = np.concatenate([p[1] for p in parts])
        curv = np.concatenate([p[2] for p in parts])
        tri_idx = np.concatenate([p[3] for p in parts])
        weights = np.full(count, total / count)
        return BoundarySamples(pts, normals, weights, curv, triangle=tri_idx)

    def bounding_box(self):
        return self.vertices.min(axis=0), self.vertices.max(axis=0)

    def scaled(self, t: float) -> "Mesh":
        return Mesh(self.vertices * t, self.triangles)

    def translated(self, shift) -> "Mesh":
        return Mesh(self.vertices + np.asarray(shift, dtype=np.float64), self.triangles)


# ---------------------------------------------------------------------------
# mesh factories and file I/O


def load_off(path) -> Mesh:
    """Read a triangle mesh from an ASCII OFF file."""
    tokens: list[str] = []
    with open(path) as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if line:
                tokens.extend(line.split())
    if not tokens or tokens[0].upper() != "OFF":
        raise ValueError("not an OFF file (missing OFF header)")
    pos = 1
    nv, nf = int(tokens[pos]), int(tokens[pos + 1])
    pos += 3  # vertex, face, edge counts
    verts = np.array(tokens[pos : pos + 3 * nv], dtype=np.float64).reshape(nv, 3)
    pos += 3 * nv
    tris = np.empty((nf, 3), dtype=np.int64)
    for i in range(nf):
        k = int(tokens[pos])
        if k != 3:
            raise ValueError("only triangle faces are supported")
        tris[i] = [int(tokens[pos + 1]), int(tokens[pos + 2]), int(tokens[pos + 3])]
        pos += 4
    return Mesh(verts, tris)


def save_off(mesh: Mesh, path) -> None:
    with open(path, "w") as fh:
        fh.write("OFF\n")
        fh.write(f"{mesh.vertices.shape[0]} {mesh.triangles.shape[0]} 0\n")
        for v in mesh.vertices:
            fh.write(f"{v[0]:.17g} {v[1]:.17g} {v[2]:.17g}\n")
        for t in mesh.triangles:
            fh.write(f"3 {t[0]} {t[1]} {t[2]}\n")


def cube_mesh(side: float = 1.0, center=(0.0, 0.0, 0.0)) -> Mesh:
    """Axis-aligned cube of the given side, split into 12 triangles."""
    h = side / 2.0
    c = np.asarray(center, dtype=np.float64)
    corners = np.array(
        [[x, y, z] for x in (-h, h) for y in (-h, h) for z in (-h, h)]
    ) + c
    # index bits: x*4 + y*2 + z
    faces = [
        (0, 1, 3, 2),  # x = -h
        (4, 6, 7, 5),  # x = +h
        (0, 4, 5, 1),  # y = -h
        (2, 3, 7, 6),  # y = +h
        (0, 2, 6, 4),  # z = -h
        (1, 5, 7, 3),  # z = +h
    ]
    tris = []
    for a, b, cc, d in faces:
        tris.append((a, b, cc))
        tris.append((a, cc, d))
    return Mesh(corners, np.array(tris, dtype=np.int64))


def icosphere(radius: float = 1.0, subdivisions: int = 3,
              center=(0.0, 0.0, 0.0)) -> Mesh:
    """Geodesic sphere mesh from a subdivided icosahedron."""
    g = (1.0 + math.sqrt(5.0)) / 2.0
    verts = np.array(
        [
            (-1, g, 0), (1, g, 0), (-1, -g, 0), (1, -g, 0),
            (0, -1, g), (0, 1, g), (0, -1, -g), (0, 1, -g),
            (g, 0, -1), (g, 0, 1), (-g, 0, -1), (-g, 0, 1),
        ],
        dtype=np.float64,
    )
    verts /= _norms(verts)[:, None]
    tris = [
        (0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
        (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
        (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
        (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1),
    ]
    verts = [tuple(v) for v in verts]
    for _ in range(subdivisions):
        cache: dict[tuple[int, int], int] = {}
        new_tris = []

        def midpoint(i, j):
            key = (min(i, j), max(i, j))
            if key not in cache:
                m = np.array(verts[i]) + np.array(verts[j])
                m /= math.sqrt((m * m).sum())
                verts.append(tuple(m))
                cache[key] = len(verts) - 1
            return cache[key]

        for a, b, c in tris:
            ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
            new_tris += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
        tris = new_tris
    v = np.array(verts) * radius + np.asarray(center, dtype=np.float64)
    return Mesh(v, np.array(tris, dtype=np.int64))
