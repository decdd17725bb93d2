"""Chord bundles over the boundary and their integral identities.

A bundle point is (x, sigma) with x on the boundary and sigma an inward
direction; its chord length ell(x, sigma) is the first exit of the ray.
Sample weights are importance weights: sum of w * F over a bundle estimates
the integral of F over the inward hemisphere bundle (d sigma dA).  Two
direction laws are available: "uniform" (density 1/2pi per hemisphere) and
"cosine" (density cos/pi), the right choice for integrands carrying a
cosine factor.

Identities and bounds checked here, with a body of volume V, perimeter P,
Coulomb energy D, and surface interaction D_b:

    (1/(a+1)) int ell^(a+1) cos  =  int_{body x sphere} ell^a          (moments)
    (1/4pi)   int ell cos        =  V                                  (volume)
    int ell^3 cos <= 12 D,   int ell^2 <= 2 D_b                        (bounds)
    V^3 < (3/16pi) P^2 D,    V^2 <= (1/12pi) P D_b  (= iff ball)       (main)

plus a finite-difference check that the bundle-to-space change of variables
(x, sigma, t) -> (x + t sigma, sigma) has Jacobian cos u.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass

import numpy as np

from . import energy, sampling
from .shapes import Body, Measured, Mesh

_EQUALITY_REL = 0.01


@dataclass
class BundleSamples:
    """Weighted (x, sigma) samples over the inward hemisphere bundle."""

    points: np.ndarray
    dirs: np.ndarray
    cosines: np.ndarray
    lengths: np.ndarray
    weights: np.ndarray
    law: str
    triangle: np.ndarray | None = None
    excluded: int = 0

    def __len__(self) -> int:
        return self.points.shape[0]

    def weighted_sum(self, values: np.ndarray) -> Measured:
        """Estimate of the bundle integral of the given per-sample values."""
        n = len(self)
        terms = n * self.weights * values
        mean = float(terms.mean())
        stderr = float(terms.std(ddof=0) / np.sqrt(n))
        return Measured(mean, stderr)


def sample_bundle(body: Body, count: int, seed: int, law: str = "cosine",
                  workers: int = 1) -> BundleSamples:
    if law not in ("cosine", "uniform"):
        raise ValueError(f"unknown direction law {law!r}")
    bnd = body.sample_boundary(count, seed, workers)

    def one_chunk(index: int, size: int):
        lo = index * sampling.CHUNK
        rng = sampling.rng_for(seed, sampling.STREAM_HEMISPHERE, index)
        normals = bnd.normals[lo : lo + size]
        dirs, cos = sampling.hemisphere_dirs(rng, normals, law)
        return dirs, cos

    parts = sampling.map_chunks(one_chunk, count, workers)
    dirs = np.concatenate([p[0] for p in parts])
    cos = np.concatenate([p[1] for p in parts])
    factor = np.pi / cos if law == "cosine" else np.full(count, 2.0 * np.pi)
    weights = bnd.weights * factor

    lengths = body.ray_exit_length(bnd.points, dirs)
    good = np.isfinite(lengths)
    excluded = int(count - good.sum())
    tri = bnd.triangle[good] if bnd.triangle is not None else None
    return BundleSamples(
        points=bnd.points[good],
        dirs=dirs[good],
        cosines=cos[good],
        lengths=lengths[good],
        weights=weights[good],
        law=law,
        triangle=tri,
        excluded=excluded,
    )


# ---------------------------------------------------------------------------
# identities


@dataclass
class MomentCheck:
    """Interior average of ell^alpha against the boundary-pencil form."""

    alpha: float
    lhs: float
    lhs_err: float
    rhs: float
    rhs_err: float
    diff: float
    sigma: float
    ok: bool

    def to_dict(self) -> dict:
        return asdict(self)


def interior_chord_moment(body: Body, alpha: float, count: int, seed: int,
                          workers: int = 1) -> Measured:
    """Integral over (body x directions) of ell^alpha: 4 pi V E[ell^alpha]."""
    vol, vol_err = body.volume()

    def one_chunk(index: int, size: int):
        rng_x = sampling.rng_for(seed, sampling.STREAM_INTERIOR_A, index)
        lo, hi = body.bounding_box()
        xs = energy._rejection_draw(body, rng_x, size, lo, hi - lo)
        rng_d = sampling.rng_for(seed, sampling.STREAM_HEMISPHERE, index)
        dirs = sampling.uniform_sphere(rng_d, size)
        ell = body.ray_exit_length(xs, dirs)
        good = np.isfinite(ell)
        vals = ell[good] ** alpha
        return float(vals.sum()), float((vals * vals).sum()), int(good.sum())

    mean, stderr, _ = sampling.combine_mean(
        sampling.map_chunks(one_chunk, count, workers)
    )
    value = 4.0 * np.pi * vol * mean
    err = 4.0 * np.pi * float(np.hypot(vol * stderr, mean * vol_err))
    return Measured(value, err)


def chord_moment_identity(body: Body, alpha: float, count: int, seed: int,
                          workers: int = 1,
                          bundle: BundleSamples | None = None) -> MomentCheck:
    if alpha <= -1.0:
        raise ValueError("alpha must exceed -1 for an integrable chord moment")
    lhs = interior_chord_moment(body, alpha, count, seed, workers)
    if bundle is None:
        bundle = sample_bundle(body, count, seed, law="cosine", workers=workers)
    rhs_raw = bundle.weighted_sum(bundle.lengths ** (alpha + 1.0) * bundle.cosines)
    rhs = Measured(rhs_raw.value / (alpha + 1.0), rhs_raw.error / (alpha + 1.0))
    diff = lhs.value - rhs.value
    sigma = float(np.hypot(lhs.error, rhs.error))
    scale = max(abs(lhs.value), abs(rhs.value), 1e-300)
    ok = abs(diff) <= 3.0 * sigma + 1e-12 * scale
    return MomentCheck(alpha, lhs.value, lhs.error, rhs.value, rhs.error,
                       diff, sigma, ok)


def santalo_volume(body: Body, count: int, seed: int, workers: int = 1,
                   bundle: BundleSamples | None = None) -> Measured:
    """Volume recovered from boundary chords: (1/4pi) int ell cos."""
    if bundle is None:
        bundle = sample_bundle(body, count, seed, law="cosine", workers=workers)
    est = bundle.weighted_sum(bundle.lengths * bundle.cosines)
    return Measured(est.value / (4.0 * np.pi), est.error / (4.0 * np.pi))


# ---------------------------------------------------------------------------
# inequalities


@dataclass
class InequalityReport:
    """lhs <= rhs with slack = rhs - lhs and a combined error bound."""

    name: str
    lhs: float
    lhs_err: float
    rhs: float
    rhs_err: float
    slack: float
    slack_err: float
    satisfied: bool
    equality: bool
    sigma_level: float

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2)
            fh.write("\n")


def _make_inequality(name: str, lhs: Measured, rhs: Measured) -> InequalityReport:
    slack = rhs.value - lhs.value
    sigma = float(np.hypot(lhs.error, rhs.error))
    scale = max(abs(lhs.value), abs(rhs.value), 1e-300)
    cushion = 3.0 * sigma + 64.0 * np.finfo(float).eps * scale
    satisfied = slack >= -cushion
    equality = abs(slack) <= cushion and abs(slack) <= _EQUALITY_REL * scale
    sigma_level = slack / sigma if sigma > 0 else float("inf") * np.sign(slack or 1.0)
    return InequalityReport(
        name=name, lhs=lhs.value, lhs_err=lhs.error, rhs=rhs.value,
        rhs_err=rhs.error, slack=slack, slack_err=sigma,
        satisfied=bool(satisfied), equality=bool(equality),
        sigma_level=float(sigma_level),
    )


@dataclass
class ChordBoundsReport:
    """Chord moments against their Coulomb majorants."""

    cubed: InequalityReport    # int ell^3 cos <= 12 D
    squared: InequalityReport  # int ell^2     <= 2 D_b

    def to_dict(self) -> dict:
        return {"cubed": self.cubed.to_dict(), "squared": self.squared.to_dict()}


def chord_coulomb_bounds(body: Body, count: int, seed: int,
                         pair_samples: int | None = None,
                         method: str = "auto",
                         workers: int = 1) -> ChordBoundsReport:
    if pair_samples is None:
        pair_samples = count
    cosine = sample_bundle(body, count, seed, law="cosine", workers=workers)
    uniform = sample_bundle(body, count, seed, law="uniform", workers=workers)
    m3 = cosine.weighted_sum(cosine.lengths**3 * cosine.cosines)
    m2 = uniform.weighted_sum(uniform.lengths**2)
    d = energy.coulomb_energy(body, pair_samples, seed, method, workers)
    db = energy.boundary_interaction(body, pair_samples, seed, method, workers)
    cubed = _make_inequality("chord_cubed_vs_coulomb", m3,
                             Measured(12.0 * d.value, 12.0 * d.error))
    squared = _make_inequality("chord_squared_vs_surface", m2,
                               Measured(2.0 * db.value, 2.0 * db.error))
    return ChordBoundsReport(cubed, squared)


def verify_main_inequalities(body: Body, samples: int = 200_000, seed: int = 0,
                             method: str = "auto",
                             workers: int = 1) -> list[InequalityReport]:
    """The two isoperimetric-type inequalities for the drop energy.

    volume_cubed:   V^3  <  (3/16pi) P^2 D       (strict for every body)
    volume_squared: V^2  <= (1/12pi) P D_b       (equality exactly for balls)
    """
    vol = body.volume()
    per = body.perimeter()
    d = energy.coulomb_energy(body, samples, seed, method, workers)
    db = energy.boundary_interaction(body, samples, seed, method, workers)

    lhs1 = Measured(vol.value**3, 3.0 * vol.value**2 * vol.error)
    c1 = 3.0 / (16.0 * np.pi)
    rhs1_val = c1 * per.value**2 * d.value
    rhs1_err = c1 * float(np.hypot(
        2.0 * per.value * d.value * per.error, per.value**2 * d.error
    ))
    first = _make_inequality("volume_cubed", lhs1, Measured(rhs1_val, rhs1_err))

    lhs2 = Measured(vol.value**2, 2.0 * vol.value * vol.error)
    c2 = 1.0 / (12.0 * np.pi)
    rhs2_val = c2 * per.value * db.value
    rhs2_err = c2 * float(np.hypot(db.value * per.error, per.value * db.error))
    second = _make_inequality("volume_squared", lhs2, Measured(rhs2_val, rhs2_err))
    return [first, second]


# ---------------------------------------------------------------------------
# change-of-variables spot check


@dataclass
class JacobianReport:
    max_rel_dev: float
    mean_rel_dev: float
    used: int
    excluded_tangential: int
    excluded_edge: int

    def to_dict(self) -> dict:
        return asdict(self)


def _mesh_edge_distance(mesh: Mesh, points: np.ndarray, tri_idx: np.ndarray) -> np.ndarray:
    """Distance from each point to the nearest edge of its source triangle."""
    tri = mesh.triangles[tri_idx]
    out = np.full(points.shape[0], np.inf)
    for k in range(3):
        a = mesh.vertices[tri[:, k]]
        b = mesh.vertices[tri[:, (k + 1) % 3]]
        ab = b - a
        denom = (ab * ab).sum(axis=1)
        t = ((points - a) * ab).sum(axis=1) / np.maximum(denom, 1e-300)
        t = np.clip(t, 0.0, 1.0)
        foot = a + t[:, None] * ab
        d = np.sqrt(((points - foot) ** 2).sum(axis=1))
        out = np.minimum(out, d)
    return out


def jacobian_check(body: Body, count: int, seed: int, rel_step: float = 1e-5,
                   cos_min: float = 0.01, workers: int = 1) -> JacobianReport:
    """Central-difference check that the bundle map has Jacobian cos u.

    Along five curves through a sampled (x, sigma, t) — two surface
    directions, two great-circle rotations of sigma, and the ray parameter —
    the differential of (x, sigma, t) -> (x + t sigma, sigma) is assembled
    in orthonormal image coordinates and its determinant compared with the
    Gram-normalized domain volume.  Near-tangential samples (cos u below
    cos_min) are excluded, as are mesh samples too close to a triangle edge
    for the in-plane surface curves to stay on the face.
    """
    bundle = sample_bundle(body, count, seed, law="uniform", workers=workers)
    h = rel_step * body.diameter()

    keep = bundle.cosines >= cos_min
    excluded_tangential = int((~keep).sum())
    excluded_edge = 0
    if isinstance(body, Mesh):
        edge_d = _mesh_edge_distance(body, bundle.points, bundle.triangle)
        edge_ok = edge_d >= 10.0 * h
        excluded_edge = int((keep & ~edge_ok).sum())
        keep &= edge_ok

    x = bundle.points[keep]
    sig = bundle.dirs[keep]
    cos = bundle.cosines[keep]
    ell = bundle.lengths[keep]
    tri = bundle.triangle[keep] if bundle.triangle is not None else None
    n = x.shape[0]
    if n == 0:
        raise ValueError("no usable bundle samples after filtering")

    rng = sampling.rng_for(seed, sampling.STREAM_PARAM, 0)
    t_par = rng.random(n) * ell

    # inward normals at x give the surface tangent frame
    if isinstance(body, Mesh):
        nu = -body.tri_normals[tri]
    else:
        nu = body.inward_normal_at(x)

    t1, t2 = sampling.tangent_frame(nu)
    w1, w2 = sampling.tangent_frame(sig)

    def surf(points, hints):
        return body.surface_project(points, hints)

    cols = np.zeros((n, 5, 5))
    gram = np.zeros((n, 5, 5))

    # surface curves
    for j, tv in enumerate((t1, t2)):
        gp = surf(x + h * tv, tri)
        gm = surf(x - h * tv, tri)
        d_space = (gp - gm) / (2.0 * h)
        cols[:, 0:3, j] = d_space
        if j == 0:
            du1 = d_space
        else:
            du2 = d_space
    gram[:, 0, 0] = (du1 * du1).sum(axis=1)
    gram[:, 0, 1] = gram[:, 1, 0] = (du1 * du2).sum(axis=1)
    gram[:, 1, 1] = (du2 * du2).sum(axis=1)

    # direction curves: geodesics sigma(s) = cos(s) sigma + sin(s) w
    for j, wv in enumerate((w1, w2)):
        sp = np.cos(h) * sig + np.sin(h) * wv
        sm = np.cos(h) * sig - np.sin(h) * wv
        d_space = t_par[:, None] * (sp - sm) / (2.0 * h)
        d_sphere1 = ((sp - sm) * w1).sum(axis=1) / (2.0 * h)
        d_sphere2 = ((sp - sm) * w2).sum(axis=1) / (2.0 * h)
        cols[:, 0:3, 2 + j] = d_space
        cols[:, 3, 2 + j] = d_sphere1
        cols[:, 4, 2 + j] = d_sphere2
        dv = (sp - sm) / (2.0 * h)
        if j == 0:
            dv1 = dv
        else:
            dv2 = dv
    gram[:, 2, 2] = (dv1 * dv1).sum(axis=1)
    gram[:, 2, 3] = gram[:, 3, 2] = (dv1 * dv2).sum(axis=1)
    gram[:, 3, 3] = (dv2 * dv2).sum(axis=1)

    # ray parameter
    cols[:, 0:3, 4] = sig
    gram[:, 4, 4] = 1.0

    det_m = np.abs(np.linalg.det(cols))
    det_g = np.linalg.det(gram)
    jac = det_m / np.sqrt(np.maximum(det_g, 1e-300))
    rel_dev = np.abs(jac - cos) / cos
    return JacobianReport(
        max_rel_dev=float(rel_dev.max()),
        mean_rel_dev=float(rel_dev.mean()),
        used=n,
        excluded_tangential=excluded_tangential,
        excluded_edge=excluded_edge,
    )
