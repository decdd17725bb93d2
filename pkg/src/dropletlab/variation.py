"""First-variation diagnostics for the perimeter-plus-Coulomb energy.

A volume-constrained critical body satisfies H + v = lambda on its boundary,
with the multiplier fixed by scaling:

    lambda = (2 P + 5 D) / (3 V).

This module evaluates the multiplier, the pointwise stationarity residual
H(x) + v(x) - lambda over boundary samples, the Minkowski deficit
int_boundary H dA - sqrt(16 pi P), and a mean-convexity certificate built
from the perimeter/volume bound chain

    2P/(3V) + 80 pi V^2 / (9 P^2) >= 2 (10 pi / 3)^(1/3),

which pins the curvature of critical bodies from below for small volumes.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from . import quadrature
from .energy import EnergyReport, describe, newtonian_potential, total_energy
from .shapes import (
    COARSE_GRID,
    FINE_GRID,
    Ball,
    Body,
    Measured,
    Mesh,
    RadialBody,
    TwoBalls,
)

MIN_BOUNDARY_SAMPLES = 100


def mean_convexity_threshold() -> float:
    """Largest volume for which the curvature certificate applies."""
    return (4.0 / 3.0) * math.sqrt(10.0 / 3.0)


def mean_convexity_radius_threshold() -> float:
    """Ball radius matching :func:`mean_convexity_threshold`."""
    return (10.0 / (3.0 * math.pi**2)) ** (1.0 / 6.0)


def chain_floor() -> float:
    """AM-GM floor of 2P/(3V) + 80 pi V^2/(9 P^2) over all bodies."""
    return 2.0 * (10.0 * math.pi / 3.0) ** (1.0 / 3.0)


# ---------------------------------------------------------------------------
# Lagrange multiplier
# ---------------------------------------------------------------------------


def lagrange_from_report(report: EnergyReport) -> Measured:
    """Multiplier (2P + 5D)/(3V) recomputed from an energy report."""
    vol, per, cou = report.volume, report.perimeter, report.coulomb
    lam = (2.0 * per + 5.0 * cou) / (3.0 * vol)
    err = math.hypot(
        math.hypot(
            2.0 / (3.0 * vol) * report.perimeter_err,
            5.0 / (3.0 * vol) * report.coulomb_err,
        ),
        lam / vol * report.volume_err,
    )
    return Measured(lam, err)


def lagrange_multiplier(body: Body, samples: int = 200_000, seed: int = 0,
                        method: str = "auto", workers: int = 1) -> Measured:
    """Volume-constraint multiplier (2P + 5D)/(3V) with propagated error."""
    report = total_energy(body, samples=samples, seed=seed, method=method,
                          workers=workers)
    return lagrange_from_report(report)


def ball_multiplier(radius: float) -> float:
    """Closed form of the multiplier on a ball: 2/R + 4 pi R^2 / 3."""
    return 2.0 / radius + 4.0 * math.pi * radius**2 / 3.0


# ---------------------------------------------------------------------------
# Total mean curvature and the Minkowski deficit
# ---------------------------------------------------------------------------


def total_mean_curvature(body: Body) -> Measured:
    """int_boundary H dA for the supported body families."""
    if isinstance(body, Ball):
        return Measured(8.0 * math.pi * body.radius, 0.0)
    if isinstance(body, TwoBalls):
        return Measured(8.0 * math.pi * (body.radius1 + body.radius2), 0.0)
    if isinstance(body, RadialBody):
        fine = _total_curvature_on(body, quadrature.gauss_sphere_grid(*FINE_GRID))
        coarse = _total_curvature_on(body, quadrature.gauss_sphere_grid(*COARSE_GRID))
        return Measured(fine, abs(fine - coarse) + 1e-13 * abs(fine))
    if isinstance(body, Mesh):
        val = float((body.vertex_mean_curvature() * body.vertex_areas()).sum())
        return Measured(val, 0.0)
    raise TypeError(f"total mean curvature not implemented for {type(body).__name__}")


def _total_curvature_on(body: RadialBody, grid) -> float:
    _, a, _ = body._surface_density(grid.dirs)
    h = body._curvature_dirs(grid.dirs)
    return grid.integrate(h * a)


def minkowski_deficit(body: Body) -> Measured:
    """int H dA - sqrt(16 pi P); zero exactly on balls, >= 0 when convex."""
    if isinstance(body, Ball):
        return Measured(0.0, 0.0)
    curv = total_mean_curvature(body)
    per = body.perimeter()
    root = math.sqrt(16.0 * math.pi * per.value)
    droot = 8.0 * math.pi / max(root, 1e-300) * per.error
    return Measured(curv.value - root, math.hypot(curv.error, droot))


# ---------------------------------------------------------------------------
# Stationarity residual
# ---------------------------------------------------------------------------


@dataclass
class StationarityReport:
    """Residual statistics of H + v - lambda over boundary samples."""

    body: str
    seed: int
    samples: int
    boundary_count: int
    potential_method: str
    lam: float
    lam_err: float
    residual_mean: float
    residual_max: float
    residual_std: float
    residual_err: float
    min_mean_curvature: float
    minkowski_deficit: float
    minkowski_deficit_err: float

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")


def stationarity_residual(body: Body, samples: int = 200_000, seed: int = 0,
                          boundary_count: int = 256,
                          potential_method: str = "auto",
                          workers: int = 1) -> StationarityReport:
    """Evaluate H(x) + v(x) - lambda at sampled boundary points.

    The multiplier comes from the same seed and sample budget; a critical
    body leaves residuals at estimator-noise level while a non-critical one
    shows spread far beyond the propagated errors.
    """
    if boundary_count < MIN_BOUNDARY_SAMPLES:
        raise ValueError(
            f"boundary_count must be at least {MIN_BOUNDARY_SAMPLES}")
    bnd = body.sample_boundary(boundary_count, seed, workers=workers)
    values, errors = newtonian_potential(
        body, bnd.points, samples=samples, seed=seed,
        method=potential_method, workers=workers)
    values = np.atleast_1d(values)
    errors = np.atleast_1d(errors)
    lam = lagrange_multiplier(body, samples=samples, seed=seed, workers=workers)
    residual = bnd.mean_curvature + values - lam.value
    deficit = minkowski_deficit(body)
    per_point = np.hypot(errors, lam.error)
    return StationarityReport(
        body=describe(body),
        seed=seed,
        samples=samples,
        boundary_count=boundary_count,
        potential_method=potential_method,
        lam=lam.value,
        lam_err=lam.error,
        residual_mean=float(residual.mean()),
        residual_max=float(np.abs(residual).max()),
        residual_std=float(residual.std(ddof=1)),
        residual_err=float(per_point.max()),
        min_mean_curvature=float(bnd.mean_curvature.min()),
        minkowski_deficit=deficit.value,
        minkowski_deficit_err=deficit.error,
    )


# ---------------------------------------------------------------------------
# Mean convexity certificate
# ---------------------------------------------------------------------------


@dataclass
class MeanConvexityReport:
    """Sampled curvature positivity plus the AM-GM certificate chain."""

    body: str
    seed: int
    boundary_count: int
    volume: float
    volume_threshold: float
    within_volume_threshold: bool
    min_mean_curvature: float
    mean_convex: bool
    chain_value: float
    chain_value_err: float
    chain_floor: float
    chain_margin: float
    curvature_lower_bound: float

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")


def mean_convexity_certificate(body: Body, seed: int = 0,
                               boundary_count: int = 512,
                               workers: int = 1) -> MeanConvexityReport:
    """Check min H > 0 on samples and evaluate the certificate chain.

    ``chain_value`` is 2P/(3V) + 80 pi V^2/(9 P^2); AM-GM keeps it above
    ``chain_floor`` for every body.  For a critical body of ball-equivalent
    radius R the boundary curvature exceeds ``chain_floor`` - 2 pi R^2,
    which is positive up to :func:`mean_convexity_threshold`.
    """
    if boundary_count < MIN_BOUNDARY_SAMPLES:
        raise ValueError(
            f"boundary_count must be at least {MIN_BOUNDARY_SAMPLES}")
    vol = body.volume()
    per = body.perimeter()
    bnd = body.sample_boundary(boundary_count, seed, workers=workers)
    min_h = float(bnd.mean_curvature.min())

    chain = 2.0 * per.value / (3.0 * vol.value) \
        + 80.0 * math.pi * vol.value**2 / (9.0 * per.value**2)
    d_per = 2.0 / (3.0 * vol.value) \
        - 160.0 * math.pi * vol.value**2 / (9.0 * per.value**3)
    d_vol = -2.0 * per.value / (3.0 * vol.value**2) \
        + 160.0 * math.pi * vol.value / (9.0 * per.value**2)
    chain_err = math.hypot(d_per * per.error, d_vol * vol.error)

    radius = (3.0 * vol.value / (4.0 * math.pi)) ** (1.0 / 3.0)
    floor = chain_floor()
    return MeanConvexityReport(
        body=describe(body),
        seed=seed,
        boundary_count=boundary_count,
        volume=vol.value,
        volume_threshold=mean_convexity_threshold(),
        within_volume_threshold=vol.value <= mean_convexity_threshold(),
        min_mean_curvature=min_h,
        mean_convex=min_h > 0.0,
        chain_value=chain,
        chain_value_err=chain_err,
        chain_floor=floor,
        chain_margin=chain - floor,
        curvature_lower_bound=floor - 2.0 * math.pi * radius**2,
    )
