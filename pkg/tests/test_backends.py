"""Parity and selection tests for the kernel backends.

The pure-numpy kernels are the reference; the compiled extension must
reproduce them to tight tolerances on identical inputs.
"""
from __future__ import annotations

import numpy as np
import pytest

from conftest import random_rng
from dropletlab._backend import available_backends, backend_name, get_backend
from dropletlab.shapes import StarShape

HAVE_COMPILED = "compiled" in available_backends()

needs_compiled = pytest.mark.skipif(
    not HAVE_COMPILED, reason="compiled extension not built"
)


def _both():
    return get_backend("python"), get_backend("compiled")


def _star_kernel_inputs(n_dirs: int, rng):
    star = StarShape(1.0, {(2, 0): 0.1, (3, 1): 0.05, (4, 0): 0.02})
    dirs = rng.standard_normal((n_dirs, 3))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    space = star.basis.space
    coeffs = np.ascontiguousarray(star._poly.mono_value_coeffs())
    return star, dirs, space, coeffs


def test_selection_by_name():
    py = get_backend("python")
    assert py.BACKEND_NAME == "python"
    with pytest.raises(ValueError):
        get_backend("fortran")


@needs_compiled
def test_selection_compiled_and_auto():
    comp = get_backend("compiled")
    assert comp.BACKEND_NAME == "compiled"
    # auto prefers the compiled extension when it is importable
    assert get_backend("auto").BACKEND_NAME == "compiled"


def test_env_override(monkeypatch):
    monkeypatch.setenv("DROPLETLAB_BACKEND", "python")
    assert get_backend().BACKEND_NAME == "python"
    assert backend_name() == "python"
    monkeypatch.setenv("DROPLETLAB_BACKEND", "nonsense")
    with pytest.raises(ValueError):
        get_backend()


@needs_compiled
def test_inv_dist_parity():
    rng = random_rng(70)
    a = rng.standard_normal((50_000, 3))
    b = rng.standard_normal((50_000, 3))
    # plant a handful of near-coincident pairs so the skip path is exercised
    b[::9973] = a[::9973] + 1e-12
    py, comp = _both()
    s_py = py.inv_dist_sums(a, b, 1e-9)
    s_c = comp.inv_dist_sums(a, b, 1e-9)
    np.testing.assert_allclose(s_c[0], s_py[0], rtol=1e-9)
    np.testing.assert_allclose(s_c[1], s_py[1], rtol=1e-9)
    assert s_c[2] == s_py[2]
    assert s_py[2] == len(a[::9973])


@needs_compiled
def test_inv_dist_bad_mask_parity():
    rng = random_rng(71)
    a = rng.standard_normal((10_000, 3))
    b = rng.standard_normal((10_000, 3))
    b[::617] = a[::617]
    py, comp = _both()
    m_py = np.asarray(py.inv_dist_bad_mask(a, b, 1e-6), dtype=bool)
    m_c = np.asarray(comp.inv_dist_bad_mask(a, b, 1e-6), dtype=bool)
    assert (m_py == m_c).all()
    assert m_py.sum() == len(a[::617])


@needs_compiled
def test_poly_radial_parity():
    rng = random_rng(72)
    star, dirs, space, coeffs = _star_kernel_inputs(20_000, rng)
    py, comp = _both()
    r_py = np.asarray(py.poly_radial(space.parents, space.axes, coeffs, 0.0, dirs))
    r_c = np.asarray(comp.poly_radial(space.parents, space.axes, coeffs, 0.0, dirs))
    np.testing.assert_allclose(r_c, r_py, rtol=1e-12)
    # and both match the shape's own radial profile
    np.testing.assert_allclose(r_py, star.radial(dirs), rtol=1e-12)


@needs_compiled
def test_star_first_exit_parity():
    rng = random_rng(73)
    star, dirs, space, coeffs = _star_kernel_inputs(3_000, rng)
    origins = 0.2 * rng.standard_normal((3_000, 3))
    args = (
        origins, dirs, np.ascontiguousarray(star.center),
        space.parents, space.axes, coeffs, 0.0,
        2.5 * star.rho_max, star.base_radius / 64.0, 1e-10,
    )
    py, comp = _both()
    t_py = np.asarray(py.star_first_exit(*args))
    t_c = np.asarray(comp.star_first_exit(*args))
    np.testing.assert_allclose(t_c, t_py, atol=1e-9)
    # exits land on the boundary: |p + t d| == radial(direction)
    hits = origins + t_py[:, None] * dirs
    radii = np.linalg.norm(hits, axis=1)
    np.testing.assert_allclose(radii, star.radial(hits / radii[:, None]), atol=1e-9)
