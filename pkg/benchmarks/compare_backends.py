"""Time the compiled kernels against the pure-numpy fallback.

Runs the three hot kernels (pairwise inverse distances, polynomial radius
evaluation, star-shape ray exits) on identical inputs through both
backends, checks that the outputs agree, and prints a timing table.

Usage::

    python3 benchmarks/compare_backends.py [--size N] [--repeat K]
"""

from __future__ import annotations

import argparse
import sys
import time

import numpy as np

from dropletlab._backend import available_backends, get_backend
from dropletlab.shapes import StarShape


def _best_of(repeat: int, fn, *args):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, out


def _bench_inv_dist(backends, size: int, repeat: int, rng):
    a = rng.standard_normal((size, 3))
    b = rng.standard_normal((size, 3))
    rows = {}
    for name, kern in backends.items():
        rows[name] = _best_of(repeat, kern.inv_dist_sums, a, b, 1e-9)
    ref = rows["python"][1]
    for name, (_t, out) in rows.items():
        np.testing.assert_allclose(out[0], ref[0], rtol=1e-9)
        np.testing.assert_allclose(out[1], ref[1], rtol=1e-9)
        assert out[2] == ref[2]
    return {name: t for name, (t, _o) in rows.items()}


def _star_inputs(size: int, rng):
    star = StarShape(1.0, {(2, 0): 0.1, (3, 1): 0.05, (4, 0): 0.02})
    dirs = rng.standard_normal((size, 3))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    space = star.basis.space
    coeffs = np.ascontiguousarray(star._poly.mono_value_coeffs())
    return star, dirs, space, coeffs


def _bench_poly_radial(backends, size: int, repeat: int, rng):
    _star, dirs, space, coeffs = _star_inputs(size, rng)
    rows = {}
    for name, kern in backends.items():
        rows[name] = _best_of(repeat, kern.poly_radial,
                              space.parents, space.axes, coeffs, 0.0, dirs)
    ref = rows["python"][1]
    for _name, (_t, out) in rows.items():
        np.testing.assert_allclose(out, ref, rtol=1e-12)
    return {name: t for name, (t, _o) in rows.items()}


def _bench_star_exit(backends, size: int, repeat: int, rng):
    star, dirs, space, coeffs = _star_inputs(size, rng)
    origins = 0.2 * star.base_radius * rng.standard_normal((size, 3))
    rows = {}
    for name, kern in backends.items():
        rows[name] = _best_of(
            repeat, kern.star_first_exit, origins, dirs,
            np.ascontiguousarray(star.center), space.parents, space.axes,
            coeffs, 0.0, 2.5 * star.rho_max, star.base_radius / 64.0,
            1e-10 * star.base_radius)
    ref = rows["python"][1]
    for _name, (_t, out) in rows.items():
        np.testing.assert_allclose(out, ref, atol=1e-9)
    return {name: t for name, (t, _o) in rows.items()}


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--size", type=int, default=400_000,
                        help="points per kernel call")
    parser.add_argument("--repeat", type=int, default=5,
                        help="take the best of this many timed calls")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    names = available_backends()
    backends = {name: get_backend(name) for name in names}
    if "compiled" not in backends:
        print("compiled backend not built; timing the python fallback only")

    rng = np.random.default_rng(args.seed)
    benches = [
        ("inv_dist_sums", args.size, _bench_inv_dist),
        ("poly_radial", args.size, _bench_poly_radial),
        ("star_first_exit", max(args.size // 20, 1), _bench_star_exit),
    ]

    print(f"{'kernel':<18} {'size':>9} " +
          " ".join(f"{n + ' [s]':>14}" for n in names) +
          ("  speedup" if len(names) > 1 else ""))
    for label, size, fn in benches:
        times = fn(backends, size, args.repeat, rng)
        line = f"{label:<18} {size:>9} " + \
            " ".join(f"{times[n]:>14.4f}" for n in names)
        if "compiled" in times and times["compiled"] > 0:
            line += f"  {times['python'] / times['compiled']:>6.1f}x"
        print(line)
    return 0


if __name__ == "__main__":
    sys.exit(main())
