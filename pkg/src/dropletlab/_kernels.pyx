# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels.

Same signatures and semantics as dropletlab._kernels_py: pairwise inverse
distance reductions (Kahan compensated), monomial-table polynomial
evaluation, and star-shape first-exit bisection.  The bisection iterates
each ray until its bracket width reaches the tolerance, matching the
lock-step fallback because all brackets start with the same width.
"""
import numpy as np

cimport numpy as cnp
from libc.math cimport sqrt

cnp.import_array()

BACKEND_NAME = "compiled"


def inv_dist_sums(double[:, ::1] a, double[:, ::1] b, double min_dist):
    cdef Py_ssize_t i, n = a.shape[0]
    cdef double s = 0.0, comp = 0.0, s2 = 0.0, comp2 = 0.0
    cdef double dx, dy, dz, d, r, y, t
    cdef long nbad = 0
    for i in range(n):
        dx = a[i, 0] - b[i, 0]
        dy = a[i, 1] - b[i, 1]
        dz = a[i, 2] - b[i, 2]
        d = sqrt((dx * dx + dy * dy) + dz * dz)
        if d < min_dist:
            nbad += 1
            continue
        r = 1.0 / d
        y = r - comp
        t = s + y
        comp = (t - s) - y
        s = t
        y = r * r - comp2
        t = s2 + y
        comp2 = (t - s2) - y
        s2 = t
    return s, s2, nbad


def inv_dist_bad_mask(double[:, ::1] a, double[:, ::1] b, double min_dist):
    cdef Py_ssize_t i, n = a.shape[0]
    cdef double dx, dy, dz, m2 = min_dist * min_dist
    out = np.zeros(n, dtype=bool)
    cdef cnp.uint8_t[::1] ov = out.view(np.uint8)
    for i in range(n):
        dx = a[i, 0] - b[i, 0]
        dy = a[i, 1] - b[i, 1]
        dz = a[i, 2] - b[i, 2]
        if (dx * dx + dy * dy) + dz * dz < m2:
            ov[i] = 1
    return out


cdef inline double _poly_at(
    const cnp.int32_t* parents,
    const cnp.int32_t* axes,
    const double* coeffs,
    double constant,
    Py_ssize_t m,
    double x, double y, double z,
    double* mono,
) noexcept nogil:
    cdef Py_ssize_t k
    cdef double acc = constant + coeffs[0]
    cdef double coord
    mono[0] = 1.0
    for k in range(1, m):
        if axes[k] == 0:
            coord = x
        elif axes[k] == 1:
            coord = y
        else:
            coord = z
        mono[k] = mono[parents[k]] * coord
        acc += coeffs[k] * mono[k]
    return acc


def poly_radial(
    cnp.int32_t[::1] parents,
    cnp.int32_t[::1] axes,
    double[::1] mono_coeffs,
    double constant,
    double[:, ::1] dirs,
):
    cdef Py_ssize_t i, n = dirs.shape[0], m = parents.shape[0]
    out = np.empty(n)
    cdef double[::1] ov = out
    scratch = np.empty(m)
    cdef double[::1] mono = scratch
    for i in range(n):
        ov[i] = _poly_at(
            &parents[0], &axes[0], &mono_coeffs[0], constant, m,
            dirs[i, 0], dirs[i, 1], dirs[i, 2], &mono[0],
        )
    return out


cdef inline double _gap(
    double px, double py, double pz,
    double dx, double dy, double dz,
    double cx, double cy, double cz,
    double t,
    const cnp.int32_t* parents,
    const cnp.int32_t* axes,
    const double* coeffs,
    double constant,
    Py_ssize_t m,
    double* mono,
) noexcept nogil:
    """g(t) = |p + t d - c| - rho(unit(p + t d - c)); negative inside."""
    cdef double qx = px + t * dx - cx
    cdef double qy = py + t * dy - cy
    cdef double qz = pz + t * dz - cz
    cdef double r = sqrt((qx * qx + qy * qy) + qz * qz)
    if r < 1e-300:
        return r - _poly_at(parents, axes, coeffs, constant, m, 0.0, 0.0, 1.0, mono)
    return r - _poly_at(parents, axes, coeffs, constant, m,
                        qx / r, qy / r, qz / r, mono)


def star_first_exit(
    double[:, ::1] origins,
    double[:, ::1] dirs,
    double[::1] center,
    cnp.int32_t[::1] parents,
    cnp.int32_t[::1] axes,
    double[::1] mono_coeffs,
    double constant,
    double t_max,
    double step,
    double tol,
):
    cdef Py_ssize_t i, n = origins.shape[0], m = parents.shape[0]
    out = np.empty(n)
    cdef double[::1] ov = out
    scratch = np.empty(m)
    cdef double[::1] mono = scratch
    cdef double cx = center[0], cy = center[1], cz = center[2]
    cdef double lo, hi, t, mid, g
    cdef bint found
    cdef const cnp.int32_t* pp = &parents[0]
    cdef const cnp.int32_t* pa = &axes[0]
    cdef const double* pc = &mono_coeffs[0]
    for i in range(n):
        lo = 0.0
        t = step
        found = False
        while t <= t_max:
            g = _gap(
                origins[i, 0], origins[i, 1], origins[i, 2],
                dirs[i, 0], dirs[i, 1], dirs[i, 2],
                cx, cy, cz, t, pp, pa, pc, constant, m, &mono[0],
            )
            if g > 0.0:
                hi = t
                found = True
                break
            lo = t
            t = t + step
        if not found:
            hi = t_max
        while hi - lo > tol:
            mid = 0.5 * (lo + hi)
            g = _gap(
                origins[i, 0], origins[i, 1], origins[i, 2],
                dirs[i, 0], dirs[i, 1], dirs[i, 2],
                cx, cy, cz, mid, pp, pa, pc, constant, m, &mono[0],
            )
            if g <= 0.0:
                lo = mid
            else:
                hi = mid
        ov[i] = 0.5 * (lo + hi)
    return out
