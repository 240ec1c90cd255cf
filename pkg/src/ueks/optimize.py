"""One-dimensional optimisation: golden-section search and scan-and-refine."""

import math

import numpy as np

from .errors import OptimizationError

INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def golden_section(f, lo, hi, tol=1e-10, maximize=False, max_iter=500):
    """Golden-section search for a local extremum of a scalar function.

    Returns ``(x, f(x))``. The search never evaluates ``f`` outside
    ``[lo, hi]``; the endpoints themselves are compared at the end so a
    monotone function returns the better endpoint.
    """
    if not hi > lo:
        raise OptimizationError(f"empty bracket [{lo}, {hi}]")
    sign = -1.0 if maximize else 1.0

    def g(x):
        return sign * f(x)

    a, b = float(lo), float(hi)
    c = b - INVPHI * (b - a)
    d = a + INVPHI * (b - a)
    fc, fd = g(c), g(d)
    it = 0
    while b - a > tol and it < max_iter:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - INVPHI * (b - a)
            fc = g(c)
        else:
            a, c, fc = c, d, fd
            d = a + INVPHI * (b - a)
            fd = g(d)
        it += 1
    if not (math.isfinite(fc) and math.isfinite(fd)):
        raise OptimizationError("objective is not finite inside the bracket")
    x, fx = (c, fc) if fc < fd else (d, fd)
    for end in (float(lo), float(hi)):
        fe = g(end)
        if fe < fx:
            x, fx = end, fe
    return x, sign * fx


def polish_vertex(f, x0, h, lo, hi):
    """Refine a smooth interior maximum by a least-squares parabola.

    Golden-section search stalls at ``sqrt(eps)`` relative accuracy in the
    argument because the objective is flat at the top; a parabola through
    points spaced ``h`` apart recovers the vertex to near machine precision.
    Returns ``x0`` unchanged when the fit is not a concave parabola centred
    near ``x0``; otherwise the vertex, with the larger of the two values.
    """
    if x0 - 2 * h < lo or x0 + 2 * h > hi:
        return x0, f(x0)
    offs = np.array([-2.0, -1.0, 0.0, 1.0, 2.0]) * h
    ys = np.array([f(x0 + o) for o in offs])
    c2, c1, _ = np.polyfit(offs / h, ys - ys[2], 2)
    if not c2 < 0:
        return x0, ys[2]
    shift = -c1 / (2 * c2)
    if abs(shift) > 1.0:
        return x0, ys[2]
    # near the top, values differ by less than their rounding error, so the
    # fitted vertex is trusted over a direct comparison of f(x1) with f(x0)
    x1 = x0 + shift * h
    return x1, max(f(x1), ys[2])


def scan_maximize(f_vec, lo, hi, f_scalar=None, n_scan=1001, tol=1e-10,
                  polish=True, tie_tol=1e-9, max_peaks=20):
    """Global maximum of a function on ``[lo, hi]`` by scan plus refinement.

    ``f_vec`` evaluates an array of points. Every grid-local maximum
    (endpoints included) is refined by golden-section search inside its
    neighbouring grid cells, then optionally polished. Only the ``max_peaks``
    highest grid peaks are refined, which matters when the objective is
    rounding noise around zero and nearly every grid point is a peak. Among candidates whose
    values agree within ``tie_tol`` the one with the smallest ``|x|`` wins,
    and between ``x`` and ``-x`` the positive one.

    Returns
    -------
    (x, value, candidates) where candidates is a list of ``(x, value)``.
    """
    if f_scalar is None:
        def f_scalar(x):
            return float(f_vec(np.array([x]))[0])
    grid = np.linspace(lo, hi, n_scan)
    vals = np.asarray(f_vec(grid), dtype=float)
    if not np.all(np.isfinite(vals)):
        raise OptimizationError("objective not finite on the scan grid")
    left = np.concatenate([[-np.inf], vals[:-1]])
    right = np.concatenate([vals[1:], [-np.inf]])
    peaks = np.flatnonzero((vals >= left) & (vals >= right))
    if peaks.shape[0] > max_peaks:
        peaks = np.sort(peaks[np.argsort(-vals[peaks], kind="stable")[:max_peaks]])
    cands = []
    for i in peaks:
        a = grid[max(i - 1, 0)]
        b = grid[min(i + 1, n_scan - 1)]
        if i in (0, n_scan - 1):
            x, v = grid[i], vals[i]
            if b > a:
                xr, vr = golden_section(f_scalar, a, b, tol=tol, maximize=True)
                if vr > v:
                    x, v = xr, vr
        else:
            x, v = golden_section(f_scalar, a, b, tol=tol, maximize=True)
            if polish:
                # the second, finer pass removes most of the cubic bias of the first
                for h in (1e-4 * (hi - lo), 1e-5 * min(1.0, hi - lo)):
                    x, v = polish_vertex(f_scalar, x, h, lo, hi)
        cands.append((float(x), float(v)))
    best = max(v for _, v in cands)
    tied = [(x, v) for x, v in cands if v >= best - tie_tol * max(1.0, abs(best))]
    x, v = min(tied, key=lambda c: (abs(c[0]), -c[0]))
    return x, v, cands
