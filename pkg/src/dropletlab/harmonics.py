"""Real spherical harmonics as exact Cartesian polynomials.

Each basis function Y_lm is represented by the polynomial B_lm(x, y, z) that
agrees with it on the unit sphere:

    B_lm = N_lm * Q_lm(z) * Re_or_Im((x + iy)^|m|),   Q_lm = d^|m| P_l / dz^|m|

with P_l the Legendre polynomial and N_lm the orthonormalization constant.
No Condon-Shortley phase.  Coefficients are built with Fraction arithmetic
and floated once, so values and first/second Cartesian derivatives are exact
polynomial evaluations: no (theta, phi) charts, hence no pole singularities.
Tangential derivatives on the sphere follow by chain rule through any curve
that stays on the sphere, which is how the curvature code uses them.

Basis ordering is (l, m) with l = 0..lmax and m = -l..l, flattened as
k = l*(l+1) + m.
"""
from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache

import numpy as np

_CHUNK = 16384


def _legendre_coeffs(lmax: int) -> list[list[Fraction]]:
    """Coefficient lists (index = power of z) of P_0 .. P_lmax, exact."""
    polys = [[Fraction(1)], [Fraction(0), Fraction(1)]]
    for l in range(1, lmax):
        prev, cur = polys[l - 1], polys[l]
        nxt = [Fraction(0)] * (l + 2)
        for k, c in enumerate(cur):
            nxt[k + 1] += Fraction(2 * l + 1, l + 1) * c
        for k, c in enumerate(prev):
            nxt[k] -= Fraction(l, l + 1) * c
        polys.append(nxt)
    return polys[: lmax + 1]


def _derive(coeffs: list[Fraction], order: int) -> list[Fraction]:
    out = list(coeffs)
    for _ in range(order):
        out = [k * c for k, c in enumerate(out)][1:] or [Fraction(0)]
    return out


def _circular_parts(m: int) -> tuple[dict, dict]:
    """Monomial dicts over (a, b) for Re((x+iy)^m) and Im((x+iy)^m)."""
    re: dict[tuple[int, int], Fraction] = {}
    im: dict[tuple[int, int], Fraction] = {}
    for j in range(m + 1):
        c = Fraction(math.comb(m, j))
        if j % 2 == 0:
            re[(m - j, j)] = c * (-1) ** (j // 2)
        else:
            im[(m - j, j)] = c * (-1) ** ((j - 1) // 2)
    return re, im


class MonomialSpace:
    """All monomials x^a y^b z^c with a+b+c <= degree, in a fixed order.

    Provides the dense value matrix for point batches and parent/axis
    arrays that let kernels build monomial values incrementally
    (mono[i] = mono[parent[i]] * coord[axis[i]]).
    """

    def __init__(self, degree: int):
        self.degree = degree
        exps = [(0, 0, 0)]
        for d in range(1, degree + 1):
            for a in range(d, -1, -1):
                for b in range(d - a, -1, -1):
                    exps.append((a, b, d - a - b))
        self.exponents = exps
        self.index = {e: i for i, e in enumerate(exps)}
        parents = np.zeros(len(exps), dtype=np.int32)
        axes = np.zeros(len(exps), dtype=np.int32)
        for i, (a, b, c) in enumerate(exps[1:], start=1):
            if a > 0:
                axes[i], parents[i] = 0, self.index[(a - 1, b, c)]
            elif b > 0:
                axes[i], parents[i] = 1, self.index[(a, b - 1, c)]
            else:
                axes[i], parents[i] = 2, self.index[(a, b, c - 1)]
        self.parents = parents
        self.axes = axes

    def __len__(self) -> int:
        return len(self.exponents)

    def matrix(self, points: np.ndarray) -> np.ndarray:
        """Monomial value matrix, shape (n_points, n_monomials)."""
        pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
        out = np.empty((pts.shape[0], len(self.exponents)))
        out[:, 0] = 1.0
        for i in range(1, len(self.exponents)):
            out[:, i] = out[:, self.parents[i]] * pts[:, self.axes[i]]
        return out


def _poly_dict(l: int, m: int, legendre: list[list[Fraction]]) -> dict:
    """Fraction monomial dict for B_lm without the normalization factor."""
    q = _derive(legendre[l], abs(m))
    re, im = _circular_parts(abs(m))
    angular = re if m >= 0 else im
    out: dict[tuple[int, int, int], Fraction] = {}
    for k, cz in enumerate(q):
        if cz == 0:
            continue
        for (a, b), cxy in angular.items():
            key = (a, b, k)
            out[key] = out.get(key, Fraction(0)) + cz * cxy
    return out


def _normalization(l: int, m: int) -> float:
    n2 = Fraction(2 * l + 1, 4) * Fraction(
        math.factorial(l - abs(m)), math.factorial(l + abs(m))
    )
    if m != 0:
        n2 *= 2
    return math.sqrt(n2.numerator / n2.denominator / math.pi)


def _diff_dict(d: dict, axis: int) -> dict:
    out: dict[tuple[int, int, int], Fraction] = {}
    for exp, c in d.items():
        if exp[axis] == 0:
            continue
        new = list(exp)
        new[axis] -= 1
        out[tuple(new)] = out.get(tuple(new), Fraction(0)) + exp[axis] * c
    return out


class RealHarmonicBasis:
    """Orthonormal real spherical harmonics up to degree lmax."""

    def __init__(self, lmax: int):
        if lmax < 0:
            raise ValueError("lmax must be nonnegative")
        self.lmax = lmax
        self.size = (lmax + 1) ** 2
        self.space = MonomialSpace(lmax)
        legendre = _legendre_coeffs(lmax)

        nmono = len(self.space)
        self.coeff = np.zeros((self.size, nmono))
        self.grad_coeff = np.zeros((3, self.size, nmono))
        self.hess_coeff = np.zeros((3, 3, self.size, nmono))
        for l in range(lmax + 1):
            for m in range(-l, l + 1):
                k = self.flat_index(l, m)
                base = _poly_dict(l, m, legendre)
                scale = _normalization(l, m)
                for exp, c in base.items():
                    self.coeff[k, self.space.index[exp]] = float(c) * scale
                for i in range(3):
                    di = _diff_dict(base, i)
                    for exp, c in di.items():
                        self.grad_coeff[i, k, self.space.index[exp]] = float(c) * scale
                    for j in range(i, 3):
                        dij = _diff_dict(di, j)
                        for exp, c in dij.items():
                            v = float(c) * scale
                            self.hess_coeff[i, j, k, self.space.index[exp]] = v
                            if i != j:
                                self.hess_coeff[j, i, k, self.space.index[exp]] = v

    @staticmethod
    def flat_index(l: int, m: int) -> int:
        if abs(m) > l:
            raise ValueError(f"invalid mode (l={l}, m={m})")
        return l * (l + 1) + m

    @staticmethod
    def mode_of(k: int) -> tuple[int, int]:
        l = int(math.isqrt(k))
        return l, k - l * (l + 1)

    def values(self, dirs: np.ndarray) -> np.ndarray:
        """Y_lm at unit vectors, shape (n, size)."""
        dirs = np.atleast_2d(np.asarray(dirs, dtype=np.float64))
        out = np.empty((dirs.shape[0], self.size))
        for lo in range(0, dirs.shape[0], _CHUNK):
            chunk = dirs[lo : lo + _CHUNK]
            out[lo : lo + chunk.shape[0]] = self.space.matrix(chunk) @ self.coeff.T
        return out

    def combine(self, coeffs: np.ndarray) -> "PolyOnSphere":
        """Collapse a coefficient vector into one evaluable polynomial."""
        c = np.asarray(coeffs, dtype=np.float64)
        if c.shape != (self.size,):
            raise ValueError(f"expected coefficient vector of length {self.size}")
        return PolyOnSphere(
            self.space,
            self.coeff.T @ c,
            np.stack([self.grad_coeff[i].T @ c for i in range(3)], axis=1),
            np.einsum("ijkm,k->mij", self.hess_coeff, c),
        )


class PolyOnSphere:
    """A polynomial on R^3 with cached gradient/Hessian monomial vectors.

    Restriction to the unit sphere is smooth everywhere; callers chain-rule
    through sphere curves to get tangential derivatives.
    """

    def __init__(self, space, v0, v1, v2):
        self.space = space
        self._v0 = v0  # (M,)
        self._v1 = v1  # (M, 3)
        self._v2 = v2  # (M, 3, 3)

    def add_constant(self, c: float) -> None:
        self._v0[0] += c

    def mono_value_coeffs(self) -> np.ndarray:
        """Monomial coefficient vector of the value polynomial (kernel input)."""
        return self._v0

    def value(self, points: np.ndarray) -> np.ndarray:
        return self._eval(points, self._v0)

    def gradient(self, points: np.ndarray) -> np.ndarray:
        return self._eval(points, self._v1)

    def hessian(self, points: np.ndarray) -> np.ndarray:
        return self._eval(points, self._v2)

    def _eval(self, points: np.ndarray, table: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
        out = np.empty((pts.shape[0],) + table.shape[1:])
        flat = table.reshape(table.shape[0], -1)
        for lo in range(0, pts.shape[0], _CHUNK):
            chunk = pts[lo : lo + _CHUNK]
            vals = self.space.matrix(chunk) @ flat
            out[lo : lo + chunk.shape[0]] = vals.reshape((chunk.shape[0],) + table.shape[1:])
        return out


@lru_cache(maxsize=8)
def basis(lmax: int) -> RealHarmonicBasis:
    return RealHarmonicBasis(lmax)
