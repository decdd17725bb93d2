"""Deterministic chunked Monte Carlo sampling.

Every random quantity is drawn from a generator seeded by
(seed, stream, chunk_index) with a fixed chunk size, and chunk results are
combined in index order.  Estimates are therefore bit-identical for equal
seeds regardless of how many worker threads execute the chunks.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

import numpy as np

CHUNK = 1 << 16

# Stream tags keep independent roles of one logical run decorrelated.
STREAM_INTERIOR_A = 0
STREAM_INTERIOR_B = 1
STREAM_BOUNDARY = 2
STREAM_HEMISPHERE = 3
STREAM_PARAM = 4
STREAM_REDRAW = 5


def rng_for(seed: int, stream: int, chunk: int) -> np.random.Generator:
    return np.random.default_rng((int(seed), int(stream), int(chunk)))


def chunk_sizes(count: int) -> list[int]:
    sizes = [CHUNK] * (count // CHUNK)
    if count % CHUNK:
        sizes.append(count % CHUNK)
    return sizes


def map_chunks(fn, count: int, workers: int = 1) -> list:
    """Run fn(chunk_index, chunk_size) for every chunk; results in index order."""
    sizes = chunk_sizes(count)
    if workers <= 1 or len(sizes) <= 1:
        return [fn(i, s) for i, s in enumerate(sizes)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, range(len(sizes)), sizes))


def interior_points(body, count: int, seed: int, stream: int = STREAM_INTERIOR_A,
                    workers: int = 1) -> np.ndarray:
    """Uniform points in the body via box rejection, deterministic per seed.

    Proposals are drawn as lo + u * (hi - lo) from the body's bounding box,
    so translated or scaled copies of a body see identical accept/reject
    patterns under the same seed.
    """
    lo, hi = body.bounding_box()
    span = hi - lo

    def one_chunk(index: int, size: int) -> np.ndarray:
        rng = rng_for(seed, stream, index)
        got: list[np.ndarray] = []
        need = size
        for _ in range(4096):
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
        return np.concatenate(got, axis=0)

    return np.concatenate(map_chunks(one_chunk, count, workers), axis=0)


def uniform_sphere(rng: np.random.Generator, n: int) -> np.ndarray:
    v = rng.normal(size=(n, 3))
    norm = np.sqrt((v * v).sum(axis=1))
    bad = norm < 1e-12
    if bad.any():
        v[bad] = np.array([1.0, 0.0, 0.0])
        norm[bad] = 1.0
    return v / norm[:, None]


def tangent_frame(normals: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Deterministic orthonormal tangent pairs for unit normals, vectorized."""
    n = np.atleast_2d(normals)
    helper = np.where(
        (np.abs(n[:, 0]) < 0.9)[:, None],
        np.broadcast_to([1.0, 0.0, 0.0], n.shape),
        np.broadcast_to([0.0, 1.0, 0.0], n.shape),
    )
    t1 = np.cross(n, helper)
    t1 /= np.sqrt((t1 * t1).sum(axis=1))[:, None]
    t2 = np.cross(n, t1)
    return t1, t2


def hemisphere_dirs(rng: np.random.Generator, normals: np.ndarray,
                    law: str) -> tuple[np.ndarray, np.ndarray]:
    """Directions in the hemisphere around each normal, plus their cosines.

    law "uniform": density 1/(2 pi) on the hemisphere.
    law "cosine":  density cos/pi (importance sampling for cos-weighted
    integrands).
    """
    n = np.atleast_2d(normals)
    count = n.shape[0]
    u1 = rng.random(count)
    u2 = rng.random(count)
    if law == "uniform":
        z = u1
    elif law == "cosine":
        z = np.sqrt(u1)
    else:
        raise ValueError(f"unknown hemisphere law {law!r}")
    z = np.clip(z, 1e-12, 1.0)
    s = np.sqrt(np.maximum(0.0, 1.0 - z * z))
    phi = 2.0 * np.pi * u2
    t1, t2 = tangent_frame(n)
    dirs = (
        t1 * (s * np.cos(phi))[:, None]
        + t2 * (s * np.sin(phi))[:, None]
        + n * z[:, None]
    )
    return dirs, z


def combine_mean(sums: list[tuple[float, float, int]]) -> tuple[float, float, int]:
    """Merge per-chunk (sum, sum_sq, n) in chunk order into (mean, stderr, n)."""
    total = 0.0
    total_sq = 0.0
    n = 0
    for s, s2, m in sums:
        total += s
        total_sq += s2
        n += m
    if n == 0:
        raise ValueError("no samples")
    mean = total / n
    var = max(0.0, total_sq / n - mean * mean)
    stderr = np.sqrt(var / n) if n > 1 else float("inf")
    return mean, float(stderr), n
