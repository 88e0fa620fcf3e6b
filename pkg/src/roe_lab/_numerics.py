"""Finite-difference stencils and local cubic interpolation on uniform lattices.

Invalid lattice nodes are encoded as NaN. Every operation here propagates NaN,
so a stencil or interpolation that touches an invalid node yields NaN and the
caller can mask the result with ``np.isfinite``.
"""

from __future__ import annotations

import itertools

import numpy as np


def shifted(a: np.ndarray, k: int, axis: int) -> np.ndarray:
    """Return ``b`` with ``b[i] = a[i + k]`` along ``axis``; NaN where undefined."""
    out = np.full_like(a, np.nan)
    n = a.shape[axis]
    if abs(k) >= n:
        return out
    src = [slice(None)] * a.ndim
    dst = [slice(None)] * a.ndim
    if k >= 0:
        src[axis] = slice(k, n)
        dst[axis] = slice(0, n - k)
    else:
        src[axis] = slice(0, n + k)
        dst[axis] = slice(-k, n)
    out[tuple(dst)] = a[tuple(src)]
    return out


def d1(a: np.ndarray, h: float, axis: int) -> np.ndarray:
    """Fourth-order central first derivative."""
    return (
        -shifted(a, 2, axis) + 8.0 * shifted(a, 1, axis)
        - 8.0 * shifted(a, -1, axis) + shifted(a, -2, axis)
    ) / (12.0 * h)


def d2(a: np.ndarray, h: float, axis: int) -> np.ndarray:
    """Fourth-order central second derivative."""
    return (
        -shifted(a, 2, axis) + 16.0 * shifted(a, 1, axis) - 30.0 * a
        + 16.0 * shifted(a, -1, axis) - shifted(a, -2, axis)
    ) / (12.0 * h * h)


def _lagrange4(f: np.ndarray) -> np.ndarray:
    # nodes at -1, 0, 1, 2 relative to floor(t)
    return np.stack(
        [
            -f * (f - 1.0) * (f - 2.0) / 6.0,
            (f + 1.0) * (f - 1.0) * (f - 2.0) / 2.0,
            -(f + 1.0) * f * (f - 2.0) / 2.0,
            (f + 1.0) * f * (f - 1.0) / 6.0,
        ],
        axis=-1,
    )


def cubic_interpolate(values, lower, step, points) -> np.ndarray:
    """Tensor-product four-point Lagrange interpolation.

    Args:
        values: array of shape ``(N_1, ..., N_d)``; NaN marks invalid nodes.
        lower: coordinate of node 0 along each axis.
        step: lattice spacing along each axis.
        points: query coordinates, shape ``(M, d)``.

    Returns:
        Interpolated values of shape ``(M,)``. Queries whose 4^d stencil leaves
        the array or touches a NaN node return NaN.
    """
    values = np.asarray(values)
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    d = values.ndim
    lower = np.broadcast_to(np.asarray(lower, dtype=float), (d,))
    step = np.broadcast_to(np.asarray(step, dtype=float), (d,))

    t = (pts - lower) / step
    base = np.floor(t).astype(np.int64)
    weights = _lagrange4(t - base)  # (M, d, 4)
    start = base - 1
    bad = np.zeros(len(pts), dtype=bool)
    for ax in range(d):
        bad |= (start[:, ax] < 0) | (start[:, ax] + 3 >= values.shape[ax])
    start = np.where(bad[:, None], 0, start)

    dtype = np.result_type(values.dtype, np.float64)
    out = np.zeros(len(pts), dtype=dtype)
    for offs in itertools.product(range(4), repeat=d):
        idx = tuple(start[:, ax] + offs[ax] for ax in range(d))
        w = np.ones(len(pts))
        for ax in range(d):
            w = w * weights[:, ax, offs[ax]]
        out += w * values[idx]
    out[bad] = np.nan
    return out


def simpson_weights(num_points: int, h: float) -> np.ndarray:
    """Composite Simpson weights on a uniform grid.

    For an even number of intervals this is the classical 1-4-2-...-4-1 rule;
    for an odd number the last three intervals use Simpson's 3/8 rule.
    """
    if num_points < 3:
        raise ValueError("Simpson's rule needs at least three nodes")
    w = np.zeros(num_points)
    intervals = num_points - 1
    m = intervals if intervals % 2 == 0 else intervals - 3
    if m > 0:
        w[0 : m + 1 : 2] += 2.0
        w[1:m:2] += 4.0
        w[0] -= 1.0
        w[m] -= 1.0
        w[: m + 1] *= h / 3.0
    if intervals % 2 == 1:
        w[m : m + 4] += 3.0 * h / 8.0 * np.array([1.0, 3.0, 3.0, 1.0])
    return w
