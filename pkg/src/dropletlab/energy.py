"""Liquid drop energy E = perimeter + Coulomb self-interaction.

Monte Carlo estimators return (value, stderr) pairs and are deterministic
for a fixed seed: draws happen in fixed-size chunks keyed by
(seed, stream, chunk index) and are merged in index order, so results do
not depend on the worker count.  Closed forms short-circuit sampling for
Ball and TwoBalls; method="mc" forces sampling, method="quadrature" uses
the deterministic radial-body engine.

Pair estimators:
    coulomb:  D = (1/2) V^2 E[1/|X - Y|],  X, Y uniform in the body
    surface:  D_b = P-weighted boundary X against uniform interior Y
    potential: v(x) = V E[1/|x - Y|]
"""
from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass

import numpy as np

from . import potential, sampling
from ._backend import get_backend
from .shapes import Ball, Body, Measured, RadialBody, TwoBalls

MIN_PAIR_DIST = 1e-12
_REDRAW_ROUNDS = 8


def describe(body: Body) -> str:
    return repr(body)


# ---------------------------------------------------------------------------
# chunked pair machinery


def _rejection_draw(body: Body, rng: np.random.Generator, count: int,
                    lo: np.ndarray, span: np.ndarray) -> np.ndarray:
    got: list[np.ndarray] = []
    need = count
    for _ in range(4096):
        if need == 0:
            break
        u = rng.random((max(2 * need, 256), 3))
        cand = lo + u * span
        acc = cand[body.contains(cand)]
        if acc.shape[0] >= need:
            got.append(acc[:need])
            need = 0
            break
        got.append(acc)
        need -= acc.shape[0]
    if need:
        raise RuntimeError("interior rejection sampling failed to converge")
    return np.concatenate(got, axis=0) if len(got) != 1 else got[0]


def _pair_chunk_sums(body, seed, index, size, min_dist, boundary=None,
                     total: int | None = None):
    """(sum, sum_sq, n) of the pair integrand over one chunk, with redraws.

    For boundary pairs the per-sample term is total * w_i / r_i, so the mean
    over all samples estimates the surface integral of V E[1/r] = v.
    """
    kern = get_backend()
    lo, hi = body.bounding_box()
    span = hi - lo
    rng_b = sampling.rng_for(seed, sampling.STREAM_INTERIOR_B, index)
    ys = _rejection_draw(body, rng_b, size, lo, span)
    if boundary is None:
        rng_a = sampling.rng_for(seed, sampling.STREAM_INTERIOR_A, index)
        xs = _rejection_draw(body, rng_a, size, lo, span)
        weights = None
    else:
        xs, weights = boundary
        xs = np.ascontiguousarray(xs)

    for round_ in range(_REDRAW_ROUNDS + 1):
        bad = kern.inv_dist_bad_mask(xs, ys, min_dist)
        nbad = int(bad.sum())
        if nbad == 0:
            break
        if round_ == _REDRAW_ROUNDS:
            raise RuntimeError("pair redraw failed to separate coincident samples")
        ys[bad] = _rejection_draw(body, rng_b, nbad, lo, span)

    d = np.sqrt(((xs - ys) ** 2).sum(axis=1))
    inv = 1.0 / d
    if weights is not None:
        inv = inv * (weights * total)
    return float(inv.sum()), float((inv * inv).sum()), size


def coulomb_mc(body: Body, samples: int, seed: int, workers: int = 1) -> Measured:
    """D estimate from `samples` independent uniform interior pairs."""
    vol, vol_err = body.volume()

    def one_chunk(index: int, size: int):
        return _pair_chunk_sums(body, seed, index, size, MIN_PAIR_DIST)

    mean, stderr, _ = sampling.combine_mean(
        sampling.map_chunks(one_chunk, samples, workers)
    )
    value = 0.5 * vol * vol * mean
    err = np.hypot(0.5 * vol * vol * stderr, vol * mean * vol_err)
    return Measured(value, float(err))


def boundary_interaction_mc(body: Body, samples: int, seed: int,
                            workers: int = 1) -> Measured:
    """Surface integral of the potential, from boundary-interior pairs."""
    vol, vol_err = body.volume()
    bnd = body.sample_boundary(samples, seed)

    def one_chunk(index: int, size: int):
        lo = index * sampling.CHUNK
        piece = (bnd.points[lo : lo + size], bnd.weights[lo : lo + size])
        return _pair_chunk_sums(body, seed, index, size, MIN_PAIR_DIST,
                                boundary=piece, total=samples)

    mean, stderr, _ = sampling.combine_mean(
        sampling.map_chunks(one_chunk, samples, workers)
    )
    value = vol * mean
    err = np.hypot(vol * stderr, mean * vol_err)
    return Measured(value, float(err))


def potential_mc(body: Body, points, samples: int, seed: int,
                 workers: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """v at each point, one independent interior sample set per point."""
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    vol, vol_err = body.volume()
    lo, hi = body.bounding_box()
    span = hi - lo
    kern = get_backend()

    def one_point(j: int, _size: int):
        rng = sampling.rng_for(seed, sampling.STREAM_INTERIOR_B, j)
        ys = _rejection_draw(body, rng, samples, lo, span)
        x = np.ascontiguousarray(np.broadcast_to(pts[j], (samples, 3)))
        for round_ in range(_REDRAW_ROUNDS + 1):
            bad = kern.inv_dist_bad_mask(x, ys, MIN_PAIR_DIST)
            nbad = int(bad.sum())
            if nbad == 0:
                break
            if round_ == _REDRAW_ROUNDS:
                raise RuntimeError("pair redraw failed to separate coincident samples")
            ys[bad] = _rejection_draw(body, rng, nbad, lo, span)
        inv = 1.0 / np.sqrt(((pts[j] - ys) ** 2).sum(axis=1))
        m = float(inv.mean())
        sd = float(inv.std(ddof=0)) / np.sqrt(samples)
        return vol * m, float(np.hypot(vol * sd, m * vol_err))

    # one stream per evaluation point keeps the estimates independent
    if workers > 1 and pts.shape[0] > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda j: one_point(j, 0), range(pts.shape[0])))
    else:
        results = [one_point(j, 0) for j in range(pts.shape[0])]
    values = np.array([r[0] for r in results])
    errs = np.array([r[1] for r in results])
    return values, errs


# ---------------------------------------------------------------------------
# public operations


def coulomb_energy(body: Body, samples: int = 200_000, seed: int = 0,
                   method: str = "auto", workers: int = 1) -> Measured:
    if method not in ("auto", "mc", "quadrature", "closed"):
        raise ValueError(f"unknown method {method!r}")
    if method in ("auto", "closed"):
        if isinstance(body, Ball):
            return Measured(potential.ball_coulomb(body.radius), 0.0)
        if isinstance(body, TwoBalls):
            return Measured(potential.twoballs_coulomb(body), 0.0)
        if method == "closed":
            raise ValueError("no closed-form Coulomb energy for this body")
    if method == "quadrature":
        if not isinstance(body, RadialBody):
            raise ValueError("quadrature Coulomb energy needs a radial body")
        return potential.coulomb_quadrature(body)
    return coulomb_mc(body, samples, seed, workers)


def boundary_interaction(body: Body, samples: int = 200_000, seed: int = 0,
                         method: str = "auto", workers: int = 1) -> Measured:
    if method not in ("auto", "mc", "quadrature", "closed"):
        raise ValueError(f"unknown method {method!r}")
    if method in ("auto", "closed"):
        if isinstance(body, Ball):
            return Measured(potential.ball_boundary_interaction(body.radius), 0.0)
        if isinstance(body, TwoBalls):
            return Measured(potential.twoballs_boundary_interaction(body), 0.0)
        if method == "closed":
            raise ValueError("no closed-form surface interaction for this body")
    if method == "quadrature":
        if not isinstance(body, RadialBody):
            raise ValueError("quadrature surface interaction needs a radial body")
        return potential.boundary_interaction_quadrature(body)
    return boundary_interaction_mc(body, samples, seed, workers)


def newtonian_potential(body: Body, points, samples: int = 50_000, seed: int = 0,
                        method: str = "auto", workers: int = 1):
    """Potential at the given points; returns (values, error bounds)."""
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    single = np.asarray(points).ndim == 1
    if method not in ("auto", "mc", "quadrature", "closed"):
        raise ValueError(f"unknown method {method!r}")
    if method in ("auto", "closed"):
        closed = potential.closed_form_potential(body, pts)
        if closed is not None:
            errs = np.zeros_like(closed)
            return (closed[0], 0.0) if single else (closed, errs)
        if method == "closed":
            raise ValueError("no closed-form potential for this body")
    if method == "quadrature" or (method == "auto" and isinstance(body, RadialBody)):
        if not isinstance(body, RadialBody):
            raise ValueError("quadrature potential needs a radial body")
        vals = potential.potential_quadrature(body, pts)
        errs = np.full_like(vals, 1e-9 * np.abs(vals).max())
        return (vals[0], errs[0]) if single else (vals, errs)
    vals, errs = potential_mc(body, pts, samples, seed, workers)
    return (vals[0], errs[0]) if single else (vals, errs)


@dataclass
class EnergyReport:
    """Full energy decomposition of one body."""

    body: str
    samples: int
    seed: int
    method: str
    volume: float
    volume_err: float
    perimeter: float
    perimeter_err: float
    coulomb: float
    coulomb_err: float
    boundary_interaction: float
    boundary_interaction_err: float
    total: float
    total_err: float

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2)
            fh.write("\n")

    @staticmethod
    def csv_fields() -> list[str]:
        return [
            "body", "samples", "seed", "method",
            "volume", "volume_err", "perimeter", "perimeter_err",
            "coulomb", "coulomb_err",
            "boundary_interaction", "boundary_interaction_err",
            "total", "total_err",
        ]

    def to_csv_row(self) -> list:
        d = self.to_dict()
        return [d[k] for k in self.csv_fields()]

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(self.csv_fields())
            w.writerow(self.to_csv_row())


def total_energy(body: Body, samples: int = 200_000, seed: int = 0,
                 method: str = "auto", workers: int = 1) -> EnergyReport:
    vol = body.volume()
    per = body.perimeter()
    cou = coulomb_energy(body, samples, seed, method, workers)
    bnd = boundary_interaction(body, samples, seed, method, workers)
    total = per.value + cou.value
    total_err = float(np.hypot(per.error, cou.error))
    return EnergyReport(
        body=describe(body), samples=samples, seed=seed, method=method,
        volume=vol.value, volume_err=vol.error,
        perimeter=per.value, perimeter_err=per.error,
        coulomb=cou.value, coulomb_err=cou.error,
        boundary_interaction=bnd.value, boundary_interaction_err=bnd.error,
        total=total, total_err=total_err,
    )


# ---------------------------------------------------------------------------
# the ball energy profile


def ball_radius_for_volume(volume: float) -> float:
    return (3.0 * volume / (4.0 * np.pi)) ** (1.0 / 3.0)


def ball_profile(volume: float) -> float:
    """Energy of the round ball of the given volume.

    E_B(V) = a V^(2/3) + b V^(5/3) with a = (36 pi)^(1/3) and
    b = (16 pi^2 / 15)(3 / 4 pi)^(5/3).
    """
    if volume <= 0:
        raise ValueError("volume must be positive")
    a = (36.0 * np.pi) ** (1.0 / 3.0)
    b = (16.0 * np.pi**2 / 15.0) * (3.0 / (4.0 * np.pi)) ** (5.0 / 3.0)
    return a * volume ** (2.0 / 3.0) + b * volume ** (5.0 / 3.0)


def splitting_threshold() -> float:
    """Volume above which two half-volume balls beat one ball.

    Solving E_B(V) = 2 E_B(V/2) gives V = 5 (2 - 2^(2/3)) / (2^(2/3) - 1).
    """
    c = 2.0 ** (2.0 / 3.0)
    return 5.0 * (2.0 - c) / (c - 1.0)
