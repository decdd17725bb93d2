"""Coulomb and surface energies: closed forms, estimators, determinism."""

from __future__ import annotations

import math

import numpy as np
import pytest

from dropletlab import energy
from dropletlab.shapes import Ball, TwoBalls

# Frozen reference values (independent of the implementation):
#   D(B_R)      = 16 pi^2 R^5 / 15
#   D^d(B_R)    = 16 pi^2 R^4 / 3
#   E_ball(1)   = (36 pi)^(1/3) + (16 pi^2 / 15)(3 / 4 pi)^(5/3)
BALL_COULOMB_1 = 16.0 * math.pi**2 / 15.0           # 10.527578...
BALL_BOUNDARY_1 = 16.0 * math.pi**2 / 3.0           # 52.637890...
BALL_PROFILE_1 = 5.803171034459291
SPLITTING_THRESHOLD = 3.512071919596578
BALL_RADIUS_V1 = 0.6203504908994001


@pytest.mark.parametrize("radius", [0.5, 1.0, 2.0])
def test_ball_coulomb_closed_form(radius):
    d = energy.coulomb_energy(Ball(radius), method="closed")
    assert d.error == 0.0
    np.testing.assert_allclose(d.value, BALL_COULOMB_1 * radius**5, rtol=1e-14)


@pytest.mark.parametrize("radius", [0.5, 1.0, 2.0])
def test_ball_boundary_interaction_closed_form(radius):
    db = energy.boundary_interaction(Ball(radius), method="closed")
    assert db.error == 0.0
    np.testing.assert_allclose(db.value, BALL_BOUNDARY_1 * radius**4,
                               rtol=1e-14)


def test_two_balls_closed_form_is_shell_theorem(two_balls):
    # self-energies plus the monopole interaction V1*V2/separation
    d = energy.coulomb_energy(two_balls, method="closed")
    v1 = 4.0 * math.pi / 3.0
    v2 = 4.0 * math.pi / 3.0 * 0.8**3
    expect = (BALL_COULOMB_1 * (1.0 + 0.8**5) + v1 * v2 / 3.0)
    np.testing.assert_allclose(d.value, expect, rtol=1e-14)


def test_two_balls_mc_agrees_with_closed_form(two_balls):
    closed = energy.coulomb_energy(two_balls, method="closed")
    mc = energy.coulomb_energy(two_balls, samples=150_000, seed=11,
                               method="mc")
    assert mc.error > 0
    assert abs(mc.value - closed.value) <= 3.0 * mc.error
    assert mc.error < 0.02 * closed.value


def test_ball_mc_within_three_sigma(unit_ball):
    mc = energy.coulomb_energy(unit_ball, samples=200_000, seed=1,
                               method="mc")
    assert abs(mc.value - BALL_COULOMB_1) <= 3.0 * mc.error
    assert abs(mc.value - BALL_COULOMB_1) <= 0.01 * BALL_COULOMB_1


def test_mc_error_shrinks_like_root_n(unit_ball):
    small = energy.coulomb_energy(unit_ball, samples=40_000, seed=2,
                                  method="mc")
    big = energy.coulomb_energy(unit_ball, samples=160_000, seed=2,
                                method="mc")
    ratio = big.error / small.error
    # fourfold samples: expect about 1/2, allow statistical wiggle
    assert 0.3 < ratio < 0.75


def test_mc_deterministic_and_worker_invariant(unit_ball):
    a = energy.coulomb_energy(unit_ball, samples=60_000, seed=7, method="mc")
    b = energy.coulomb_energy(unit_ball, samples=60_000, seed=7, method="mc")
    c = energy.coulomb_energy(unit_ball, samples=60_000, seed=7, method="mc",
                              workers=3)
    assert a == b
    assert a == c
    different = energy.coulomb_energy(unit_ball, samples=60_000, seed=8,
                                      method="mc")
    assert different.value != a.value


def test_quadrature_route_matches_closed_form(bumpy_star):
    ball_star = Ball(1.0)
    quad = energy.coulomb_energy(ball_star, method="quadrature")
    np.testing.assert_allclose(quad.value, BALL_COULOMB_1, rtol=1e-8)
    # independent cross-check on a genuinely non-spherical body
    quad_star = energy.coulomb_energy(bumpy_star, method="quadrature")
    mc_star = energy.coulomb_energy(bumpy_star, samples=200_000, seed=3,
                                    method="mc")
    assert abs(quad_star.value - mc_star.value) <= 3.0 * mc_star.error


def test_total_energy_report_consistency(unit_ball):
    rep = energy.total_energy(unit_ball, samples=20_000, seed=0)
    assert rep.total == rep.perimeter + rep.coulomb
    np.testing.assert_allclose(rep.total, 4.0 * math.pi + BALL_COULOMB_1,
                               rtol=1e-12)
    d = rep.to_dict()
    assert d["seed"] == 0 and d["samples"] == 20_000


def test_report_csv_round_trip(tmp_path, unit_ball):
    rep = energy.total_energy(unit_ball, samples=10_000, seed=4)
    path = tmp_path / "report.csv"
    rep.write_csv(path)
    lines = path.read_text().strip().splitlines()
    assert lines[0].split(",") == energy.EnergyReport.csv_fields()
    assert len(lines) == 2


def test_ball_profile_values():
    np.testing.assert_allclose(energy.ball_profile(1.0), BALL_PROFILE_1,
                               rtol=1e-12)
    r = 2.0 ** (1.0 / 3.0) * BALL_RADIUS_V1
    expect = 4.0 * math.pi * r**2 + BALL_COULOMB_1 * r**5
    np.testing.assert_allclose(energy.ball_profile(2.0), expect, rtol=1e-12)


def test_ball_radius_for_volume():
    np.testing.assert_allclose(energy.ball_radius_for_volume(1.0),
                               BALL_RADIUS_V1, rtol=1e-14)
    np.testing.assert_allclose(
        energy.ball_radius_for_volume(4.0 * math.pi / 3.0), 1.0, rtol=1e-14)


def test_splitting_threshold_value():
    np.testing.assert_allclose(energy.splitting_threshold(),
                               SPLITTING_THRESHOLD, rtol=1e-12)
    # defining property: equal volume split becomes favorable above it
    v = SPLITTING_THRESHOLD
    np.testing.assert_allclose(energy.ball_profile(v),
                               2.0 * energy.ball_profile(v / 2.0), rtol=1e-9)
    assert energy.ball_profile(3.0) < 2.0 * energy.ball_profile(1.5)
    assert energy.ball_profile(4.0) > 2.0 * energy.ball_profile(2.0)


def test_scaling_law_for_coulomb(bumpy_star):
    # D scales like t^5 under dilation
    d1 = energy.coulomb_energy(bumpy_star, method="quadrature")
    d2 = energy.coulomb_energy(bumpy_star.scaled(2.0), method="quadrature")
    np.testing.assert_allclose(d2.value, 32.0 * d1.value, rtol=1e-7)


def test_newtonian_potential_ball_closed(unit_ball):
    pts = np.array([[0.0, 0.0, 0.0], [0.5, 0.0, 0.0],
                    [0.0, 1.0, 0.0], [0.0, 0.0, 2.0]])
    vals, errs = energy.newtonian_potential(unit_ball, pts, method="closed")
    r = np.array([0.0, 0.5, 1.0, 2.0])
    inside = 2.0 * math.pi / 3.0 * (3.0 - r**2)
    outside = 4.0 * math.pi / (3.0 * np.maximum(r, 1e-300))
    expect = np.where(r <= 1.0, inside, outside)
    np.testing.assert_allclose(vals, expect, rtol=1e-13)
    assert np.all(errs == 0.0)


def test_newtonian_potential_mc_three_sigma(prolate):
    pts = np.array([[0.0, 0.0, 0.0], [0.0, 0.0, 1.5]])
    q_vals, _q_errs = energy.newtonian_potential(prolate, pts,
                                                  method="quadrature")
    mc_vals, mc_errs = energy.newtonian_potential(prolate, pts,
                                                  samples=80_000, seed=5,
                                                  method="mc")
    np.testing.assert_array_less(np.abs(mc_vals - q_vals), 3.0 * mc_errs)


def test_describe_names_the_body(unit_ball, two_balls):
    assert "Ball" in energy.describe(unit_ball)
    assert "TwoBalls" in energy.describe(two_balls)
