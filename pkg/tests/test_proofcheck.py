"""Exact-arithmetic proof chains and their reference constants."""

from __future__ import annotations

import json
import math
import random
from fractions import Fraction

import numpy as np
import pytest

from dropletlab import proofcheck
from dropletlab.energy import splitting_threshold

V_STAR = 3.512071919596578  # 5 (2 - 2^(2/3)) / (2^(2/3) - 1)


# ---------------------------------------------------------------------------
# outer-minimality chain


@pytest.mark.parametrize("volume", [0.1, 0.5, 1.0])
def test_outer_min_chain_passes_in_range(volume):
    rep = proofcheck.outer_min_chain(volume=volume)
    assert rep.verdict == "pass"
    assert rep.passed
    assert all(c.passed for c in rep.checkpoints)


def test_outer_min_exact_anchor_values():
    rep = proofcheck.outer_min_chain(volume=1.0)
    by_claim = {c.claim: c for c in rep.checkpoints}
    f1 = by_claim["f(1) = -1"]
    assert f1.value == -1.0 and f1.exact
    g1 = by_claim["g(1) = 39"]
    assert g1.value == 39.0 and g1.exact
    # the coefficient inequality 20/V >= 20 is tight exactly at V = 1
    coeff = by_claim["15/(pi R^3) = 20/V >= 20"]
    assert coeff.value == 20.0 and coeff.margin == 0.0 and coeff.exact


def test_outer_min_margin_grows_below_unit_volume():
    small = proofcheck.outer_min_chain(volume=0.5)
    coeff = [c for c in small.checkpoints if "20/V" in c.claim][0]
    assert coeff.margin == 20.0  # 20 / 0.5 - 20, exact rational


def test_outer_min_range_exceeded():
    rep = proofcheck.outer_min_chain(volume=1.5)
    assert rep.verdict == "range exceeded"
    assert not rep.passed
    assert not rep.checkpoints[0].passed
    assert any("V <= 1" in note for note in rep.notes)


def test_outer_min_radius_and_volume_paths_agree():
    radius = 0.55
    volume = 4.0 * math.pi / 3.0 * radius**3
    by_r = proofcheck.outer_min_chain(radius=radius)
    by_v = proofcheck.outer_min_chain(volume=volume)
    assert by_r.verdict == by_v.verdict == "pass"
    assert len(by_r.checkpoints) == len(by_v.checkpoints)


def test_outer_min_requires_exactly_one_argument():
    with pytest.raises(ValueError):
        proofcheck.outer_min_chain()
    with pytest.raises(ValueError):
        proofcheck.outer_min_chain(radius=1.0, volume=1.0)


def test_outer_min_random_rational_volumes():
    rng = random.Random(2026)
    for _ in range(25):
        v = Fraction(rng.randint(1, 1000), 1000)
        rep = proofcheck.outer_min_chain(volume=v)
        assert rep.verdict == "pass", v


def test_bernoulli_cube_certificate_is_positive():
    # (1+u)^5 - (1 + 5u/3)^3 expands with positive coefficients; the helper
    # evaluates that expansion exactly
    for u in (Fraction(1, 7), Fraction(3, 2), Fraction(10)):
        assert proofcheck._bernoulli_cubed_margin(u) > 0
    assert proofcheck._bernoulli_cubed_margin(Fraction(0)) == 0


def test_quintic_and_cubic_anchors():
    assert proofcheck._f_quintic(Fraction(1)) == Fraction(-1)
    assert proofcheck._g_cubic(Fraction(1)) == Fraction(39)
    # tail dominance: f(a) <= a^3 (29 - 10 a^2) < 0 from a = 1.75 on
    a = Fraction(7, 4)
    assert proofcheck._f_quintic(a) < 0
    assert proofcheck._g_cubic(a) > 0


# ---------------------------------------------------------------------------
# roundness polynomial chain


@pytest.mark.parametrize("radius", [0.3, 0.6203504908994001, 1.0])
def test_roundness_chain_passes(radius):
    rep = proofcheck.roundness_polynomial_chain(radius)
    assert rep.verdict == "pass", rep.render()


def test_roundness_slope_sign_flips_at_unit_volume():
    r_unit = (3.0 / (4.0 * math.pi)) ** (1.0 / 3.0)
    assert proofcheck.roundness_slope(0.99 * r_unit) < 0
    assert proofcheck.roundness_slope(1.01 * r_unit) > 0
    assert abs(proofcheck.roundness_slope(r_unit)) < 1e-12
    with pytest.raises(ValueError):
        proofcheck.roundness_slope(-1.0)


def test_roundness_root_volume_is_one():
    assert abs(proofcheck.roundness_root_volume() - 1.0) < 1e-6


# ---------------------------------------------------------------------------
# binding-energy bounds


def test_binding_bounds_constants_and_typo_flag():
    rep = proofcheck.binding_energy_bounds()
    assert rep.verdict == "pass"
    values = [c.value for c in rep.checkpoints]
    np.testing.assert_allclose(values[0], (243.0 * math.pi / 16.0) ** (1 / 3),
                               rtol=1e-12)
    np.testing.assert_allclose(values[1], (36.0 * math.pi) ** (1 / 3),
                               rtol=1e-12)
    np.testing.assert_allclose(values[3], 3.0 * (9.0 * math.pi / 5.0) ** (1 / 3),
                               rtol=1e-12)
    # the flagged printed value is recorded verbatim, far from the derived one
    flagged = [c for c in rep.checkpoints if "3.836" in c.claim][0]
    assert flagged.passed
    assert flagged.value == proofcheck.PRINTED_LOWER_BOUND
    assert any("4.8360" in n for n in rep.notes)


def test_binding_helper_constants():
    np.testing.assert_allclose(proofcheck.kmn_lower_bound(), 3.626981896537057,
                               rtol=1e-14)
    np.testing.assert_allclose(proofcheck.chain_lower_bound(),
                               4.835975862049409, rtol=1e-14)
    np.testing.assert_allclose(proofcheck.ball_upper_bound(),
                               5.3447662207363855, rtol=1e-14)
    # the two lower bounds sandwich correctly below the ball value
    assert proofcheck.kmn_lower_bound() < proofcheck.chain_lower_bound() \
        < proofcheck.ball_upper_bound()


# ---------------------------------------------------------------------------
# two-ball comparison and the splitting crossover


def test_two_ball_tie_at_threshold():
    rep = proofcheck.two_ball_comparison(V_STAR)
    assert rep.verdict == "pass"
    tie = rep.checkpoints[0]
    assert "tie" in tie.claim or abs(tie.value) < 1e-9


@pytest.mark.parametrize("volume,expect", [(2.0, "single"), (8.0, "split")])
def test_two_ball_ordering_away_from_threshold(volume, expect):
    rep = proofcheck.two_ball_comparison(volume)
    assert rep.verdict == "pass"
    sign = rep.checkpoints[0].value
    if expect == "single":
        assert sign > 0  # 2 E(V/2) - E(V) > 0: splitting costs energy
    else:
        assert sign < 0


def test_splitting_crossover_localizes_threshold():
    crossover = proofcheck.splitting_crossover()
    assert abs(crossover - V_STAR) < 1e-6
    assert abs(crossover - splitting_threshold()) < 1e-6


# ---------------------------------------------------------------------------
# report plumbing


def test_report_serialization_round_trip(tmp_path):
    rep = proofcheck.outer_min_chain(volume=0.25)
    path = tmp_path / "chain.json"
    rep.to_json(path)
    data = json.loads(path.read_text())
    assert data["chain"] == rep.chain
    assert data["verdict"] == "pass"
    assert len(data["checkpoints"]) == len(rep.checkpoints)
    text = rep.render()
    assert "verdict: pass" in text
    assert text.count("[  ok]") == len(rep.checkpoints)


def test_full_proofcheck_runtime_budget():
    import time
    t0 = time.perf_counter()
    proofcheck.outer_min_chain(volume=1.0)
    proofcheck.roundness_polynomial_chain(1.0)
    proofcheck.binding_energy_bounds()
    proofcheck.two_ball_comparison(2.0)
    assert time.perf_counter() - t0 < 5.0
