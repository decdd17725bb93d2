"""Chord identities, energy inequalities, and the bundle Jacobian check."""

from __future__ import annotations

import math

import numpy as np
import pytest

from dropletlab import santalo
from dropletlab.shapes import Ball, StarShape

# Ball(1) closed references:
#   second chord moment, both routes: 64 pi^2 / 15
#   volume_cubed slack: (48/15) pi^3 - (4 pi / 3)^3
BALL_MOMENT_2 = 64.0 * math.pi**2 / 15.0
VOLUME_CUBED_SLACK = (48.0 / 15.0) * math.pi**3 - (4.0 * math.pi / 3.0) ** 3

DUMBBELL = {(2, 0): 1.2}


def test_bundle_sampling_basics(unit_ball):
    bundle = santalo.sample_bundle(unit_ball, 5000, seed=1)
    assert len(bundle) <= 5000
    assert bundle.excluded < 50
    assert (bundle.lengths > 0).all()
    assert (bundle.cosines > 0).all() and (bundle.cosines <= 1.0).all()
    # inward directions: positive inner product with inward normals
    # equals the stored cosine for a sphere
    radial = -bundle.points / np.linalg.norm(bundle.points, axis=1,
                                             keepdims=True)
    np.testing.assert_allclose((bundle.dirs * radial).sum(axis=1),
                               bundle.cosines, atol=1e-9)


def test_bundle_deterministic(unit_ball):
    a = santalo.sample_bundle(unit_ball, 2000, seed=3)
    b = santalo.sample_bundle(unit_ball, 2000, seed=3)
    np.testing.assert_array_equal(a.points, b.points)
    np.testing.assert_array_equal(a.lengths, b.lengths)
    c = santalo.sample_bundle(unit_ball, 2000, seed=4)
    assert not np.array_equal(a.points, c.points)


def test_ball_chords_have_length_two_cos(unit_ball):
    # chord through a unit sphere: ell = 2 cos u
    bundle = santalo.sample_bundle(unit_ball, 3000, seed=5)
    np.testing.assert_allclose(bundle.lengths, 2.0 * bundle.cosines,
                               rtol=1e-8)


@pytest.mark.parametrize("alpha", [0.0, 1.0, 2.0])
def test_moment_identity_on_ball(unit_ball, alpha):
    check = santalo.chord_moment_identity(unit_ball, alpha, 100_000, seed=2)
    assert check.ok, (check.diff, check.sigma)


def test_ball_second_moment_matches_closed_value(unit_ball):
    check = santalo.chord_moment_identity(unit_ball, 2.0, 200_000, seed=6)
    assert abs(check.lhs - BALL_MOMENT_2) <= 3.0 * check.lhs_err
    assert abs(check.rhs - BALL_MOMENT_2) <= 3.0 * check.rhs_err


@pytest.mark.parametrize("fixture", ["prolate", "cube"])
def test_moment_identity_on_other_bodies(fixture, request):
    body = request.getfixturevalue(fixture)
    for alpha in (0.0, 1.0, 2.0):
        check = santalo.chord_moment_identity(body, alpha, 120_000, seed=7)
        assert check.ok, (fixture, alpha, check.diff, check.sigma)


def test_identity_rejects_non_integrable_alpha(unit_ball):
    with pytest.raises(ValueError):
        santalo.chord_moment_identity(unit_ball, -1.0, 1000, seed=0)


def test_santalo_volume_recovery(prolate):
    est = santalo.santalo_volume(prolate, 200_000, seed=8)
    ref = prolate.volume().value
    assert abs(est.value - ref) <= 3.0 * est.error
    assert est.error < 0.02 * ref


def test_main_inequalities_ball_dichotomy(unit_ball):
    first, second = santalo.verify_main_inequalities(unit_ball, 100_000,
                                                     seed=9)
    assert first.name == "volume_cubed"
    assert first.satisfied and not first.equality
    np.testing.assert_allclose(first.slack, VOLUME_CUBED_SLACK, rtol=1e-9)
    assert second.name == "volume_squared"
    assert second.satisfied and second.equality


def test_main_inequalities_ellipsoid_strict(prolate):
    for rep in santalo.verify_main_inequalities(prolate, 150_000, seed=10):
        assert rep.satisfied
        assert not rep.equality
        assert rep.slack > 5.0 * max(rep.slack_err, 1e-12)


def test_chord_bounds_saturate_on_ball(unit_ball):
    bounds = santalo.chord_coulomb_bounds(unit_ball, 150_000, seed=11)
    for rep in (bounds.cubed, bounds.squared):
        assert rep.satisfied
        assert abs(rep.slack) <= 3.0 * max(rep.slack_err, 1e-12 * abs(rep.rhs))


def test_chord_cubed_strict_on_dumbbell():
    body = StarShape(1.0, DUMBBELL)
    bounds = santalo.chord_coulomb_bounds(body, 200_000, seed=12)
    assert bounds.cubed.satisfied
    # non-convexity shows up as genuinely missing chord mass
    assert bounds.cubed.slack > 3.0 * bounds.cubed.slack_err


def test_jacobian_check_ball(unit_ball):
    rep = santalo.jacobian_check(unit_ball, 400, seed=13)
    assert rep.used > 300
    assert rep.max_rel_dev < 1e-4


def test_jacobian_check_cube(cube):
    rep = santalo.jacobian_check(cube, 400, seed=14)
    assert rep.used > 200
    assert rep.max_rel_dev < 1e-4


def test_jacobian_check_mesh_ball(ball_mesh):
    rep = santalo.jacobian_check(ball_mesh, 300, seed=15)
    assert rep.max_rel_dev < 1e-4


def test_bundle_rejects_unknown_law(unit_ball):
    with pytest.raises(ValueError):
        santalo.sample_bundle(unit_ball, 100, seed=0, law="isotropic")
