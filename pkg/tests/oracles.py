"""Slow, independent re-implementations used to cross-check the library.

Everything here is written from the definitions with plain loops and
bisection so that agreement with the package is meaningful.
"""

import bisect

import numpy as np


def bisect_root(func, lo, hi, tol=5e-15, itmax=300):
    """Root of an increasing function by pure bisection."""
    f_lo, f_hi = func(lo), func(hi)
    if f_lo > 0.0 or f_hi < 0.0:
        raise ValueError(f"no sign change on [{lo}, {hi}]: {f_lo}, {f_hi}")
    for _ in range(itmax):
        mid = 0.5 * (lo + hi)
        f_mid = func(mid)
        if abs(f_mid) <= tol or hi - lo <= tol * max(1.0, abs(mid)):
            return mid
        if f_mid < 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def adaptive_simpson(func, a, b, tol=1e-12, max_depth=40):
    """Recursive adaptive Simpson quadrature of a scalar function."""

    def simpson(x0, x2, f0, f1, f2):
        return (x2 - x0) / 6.0 * (f0 + 4.0 * f1 + f2)

    def recurse(x0, x2, f0, f1, f2, whole, eps, depth):
        x1 = 0.5 * (x0 + x2)
        xl, xr = 0.5 * (x0 + x1), 0.5 * (x1 + x2)
        fl, fr = func(xl), func(xr)
        left = simpson(x0, x1, f0, fl, f1)
        right = simpson(x1, x2, f1, fr, f2)
        if depth >= max_depth or abs(left + right - whole) <= 15.0 * eps:
            return left + right + (left + right - whole) / 15.0
        return recurse(x0, x1, f0, fl, f1, left, 0.5 * eps, depth + 1) + recurse(
            x1, x2, f1, fr, f2, right, 0.5 * eps, depth + 1
        )

    fa, fb = func(a), func(b)
    fm = func(0.5 * (a + b))
    return recurse(a, b, fa, fm, fb, simpson(a, b, fa, fm, fb), tol, 0)


def exact_step_average(breakpoints, values, edges):
    """Exact cell means of a step function over the given cell edges."""
    breakpoints = [float(x) for x in breakpoints]
    values = [float(v) for v in values]
    out = []
    for a, b in zip(edges[:-1], edges[1:]):
        cuts = [a] + [x for x in breakpoints if a < x < b] + [b]
        total = 0.0
        for c0, c1 in zip(cuts[:-1], cuts[1:]):
            piece = bisect.bisect_right(breakpoints, 0.5 * (c0 + c1))
            total += (c1 - c0) * values[piece]
        out.append(total / (b - a))
    return np.asarray(out)


def reference_step(u, lam, fluxes, interface_cells, brackets):
    """One update transcribed from its definition with plain loops.

    Subdomain interiors first (each with its own law and the old left
    neighbour), the boundary cell kept, then every interface cell from its
    freshly updated left neighbour through flux continuity.  ``brackets``
    bounds the root search of each inversion.
    """
    u = [float(v) for v in u]
    n = len(u)
    bounds = [0, *interface_cells, n]
    new = list(u)
    for i, f in enumerate(fluxes):
        for j in range(bounds[i] + 1, bounds[i + 1]):
            new[j] = u[j] - lam * (f(u[j]) - f(u[j - 1]))
    for i, p in enumerate(interface_cells):
        w = fluxes[i](new[p - 1])
        lo, hi = brackets
        new[p] = bisect_root(lambda v: fluxes[i + 1](v) - w, lo, hi)
    return np.asarray(new)
