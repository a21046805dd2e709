"""Flux models for conservation laws that switch flux across fixed interfaces.

A model is a sorted list of interface positions together with one flux law per
subdomain (one more law than interfaces).  Every law must be strictly
increasing in the conserved quantity: the positive lower bound ``alpha`` on
the derivative is what makes single-sided differencing stable and the
interface coupling (flux continuity) uniquely invertible.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from .errors import DivergentRangeError, FluxRangeError, InterfaceAmbiguityError

# Number of samples used when validating or bounding a user-supplied flux.
_N_SAMPLES = 4097

# Relative residual at which numerical inversion stops.
_INVERT_RTOL = 1e-12


# {{{ flux segments


@dataclass(frozen=True)
class FluxSegment:
    """One strictly increasing flux law on a single subdomain.

    ``func`` and ``deriv`` accept floats or numpy arrays.  ``alpha`` is a
    positive lower bound for ``deriv`` on ``interval``, the interval the
    segment was validated on at construction time.  ``kind`` is one of
    ``"linear"``, ``"quadratic"`` or ``"custom"`` and selects analytic
    shortcuts for inversion and derivative bounds where they exist.
    """

    func: Callable
    deriv: Callable
    alpha: float
    interval: tuple[float, float]
    kind: str = "custom"
    params: tuple = ()

    def __call__(self, u):
        return self.func(u)

    def deriv_bounds(self, lo: float, hi: float) -> tuple[float, float]:
        """Infimum and supremum of the derivative over ``[lo, hi]``.

        Exact for the builtin kinds (the derivative is constant or monotone);
        sampled on a dense grid for custom laws.
        """
        if hi < lo:
            raise ValueError(f"empty interval [{lo}, {hi}]")
        if self.kind == "linear":
            a = self.params[0]
            return a, a
        if self.kind == "quadratic":
            d_lo, d_hi = float(self.deriv(lo)), float(self.deriv(hi))
            return min(d_lo, d_hi), max(d_lo, d_hi)
        u = np.linspace(lo, hi, _N_SAMPLES)
        d = np.asarray(self.deriv(u), dtype=float)
        return float(d.min()), float(d.max())


def linear_flux(a: float, b: float = 0.0) -> FluxSegment:
    """Flux ``f(u) = a*u + b`` with slope ``a > 0``."""
    a, b = float(a), float(b)
    if not (math.isfinite(a) and math.isfinite(b)):
        raise ValueError("linear flux coefficients must be finite")
    if a <= 0.0:
        raise ValueError(f"linear flux needs a positive slope, got a={a}")
    return FluxSegment(
        func=lambda u: a * u + b,
        deriv=lambda u: np.full_like(np.asarray(u, dtype=float), a),
        alpha=a,
        interval=(-math.inf, math.inf),
        kind="linear",
        params=(a, b),
    )


def quadratic_flux(a: float, b: float = 0.0, *, interval: tuple[float, float]) -> FluxSegment:
    """Flux ``f(u) = a*u**2/2 + b*u``, increasing on the given interval.

    The derivative ``a*u + b`` is affine, so monotonicity on ``interval`` is
    checked exactly at the endpoints.
    """
    a, b = float(a), float(b)
    lo, hi = _checked_interval(interval)
    if not (math.isfinite(a) and math.isfinite(b)) or a == 0.0:
        raise ValueError("quadratic flux needs finite coefficients and a != 0")
    alpha = min(a * lo + b, a * hi + b)
    if alpha <= 0.0:
        raise ValueError(
            f"quadratic flux is not increasing on [{lo}, {hi}]: "
            f"min derivative {alpha}"
        )
    return FluxSegment(
        func=lambda u: 0.5 * a * np.square(u) + b * u if isinstance(u, np.ndarray)
        else 0.5 * a * u * u + b * u,
        deriv=lambda u: a * np.asarray(u, dtype=float) + b,
        alpha=alpha,
        interval=(lo, hi),
        kind="quadratic",
        params=(a, b),
    )


def custom_flux(func: Callable, deriv: Callable, *, interval: tuple[float, float]) -> FluxSegment:
    """Wrap a user-supplied flux and its derivative after sampling checks.

    The pair is sampled densely on ``interval``: the derivative must stay
    strictly positive and must agree with a central difference of ``func``.
    Behaviour outside the sampled interval is the caller's responsibility.
    """
    lo, hi = _checked_interval(interval)
    u = np.linspace(lo, hi, _N_SAMPLES)
    fu = np.asarray(func(u), dtype=float)
    du = np.asarray(deriv(u), dtype=float)
    if fu.shape != u.shape or du.shape != u.shape:
        raise ValueError("flux and derivative must evaluate elementwise on arrays")
    if not (np.all(np.isfinite(fu)) and np.all(np.isfinite(du))):
        raise ValueError(f"flux or derivative is not finite on [{lo}, {hi}]")
    dmin = float(du.min())
    if dmin <= 0.0:
        worst = float(u[np.argmin(du)])
        raise ValueError(
            f"flux is not strictly increasing on [{lo}, {hi}]: "
            f"derivative {dmin} at u={worst}"
        )
    # consistency of deriv with func on a coarser subsample
    uc = u[16:-16:16]
    h = 1e-6 * np.maximum(1.0, np.abs(uc))
    fd = (np.asarray(func(uc + h), dtype=float) - np.asarray(func(uc - h), dtype=float)) / (2.0 * h)
    dc = np.asarray(deriv(uc), dtype=float)
    mismatch = np.abs(fd - dc) / np.maximum(1.0, np.abs(dc))
    if float(mismatch.max()) > 1e-4:
        worst = float(uc[np.argmax(mismatch)])
        raise ValueError(
            f"derivative disagrees with a finite difference of the flux "
            f"near u={worst} (relative mismatch {float(mismatch.max()):.2e})"
        )
    # sampling may straddle the true minimum, keep a safety margin
    return FluxSegment(
        func=func,
        deriv=deriv,
        alpha=0.999 * dmin,
        interval=(lo, hi),
        kind="custom",
        params=(),
    )


def _checked_interval(interval) -> tuple[float, float]:
    lo, hi = float(interval[0]), float(interval[1])
    if not (math.isfinite(lo) and math.isfinite(hi)) or lo >= hi:
        raise ValueError(f"need a finite interval with lo < hi, got [{lo}, {hi}]")
    return lo, hi


# }}}


# {{{ piecewise model


@dataclass(frozen=True)
class PiecewiseFlux:
    """Interface positions ``x_1 < ... < x_N`` and N+1 flux laws, left to right.

    ``segments[i]`` governs the subdomain between ``interfaces[i-1]`` and
    ``interfaces[i]`` (unbounded at the ends).  ``N == 0`` is allowed and
    means a single law everywhere.
    """

    interfaces: tuple[float, ...]
    segments: tuple[FluxSegment, ...]

    def __post_init__(self):
        object.__setattr__(self, "interfaces", tuple(float(x) for x in self.interfaces))
        object.__setattr__(self, "segments", tuple(self.segments))
        if len(self.segments) != len(self.interfaces) + 1:
            raise ValueError(
                f"{len(self.interfaces)} interfaces need "
                f"{len(self.interfaces) + 1} flux laws, got {len(self.segments)}"
            )
        if any(not math.isfinite(x) for x in self.interfaces):
            raise ValueError("interface positions must be finite")
        if any(b <= a for a, b in zip(self.interfaces, self.interfaces[1:])):
            raise ValueError(f"interfaces must be strictly increasing: {self.interfaces}")

    @property
    def n_interfaces(self) -> int:
        return len(self.interfaces)


def segment_at(model: PiecewiseFlux, x: float) -> FluxSegment:
    """The flux law governing position ``x``.

    Raises :class:`InterfaceAmbiguityError` when ``x`` sits exactly on an
    interface, where two laws meet and the question has no single answer.
    """
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"position must be finite, got {x}")
    if x in model.interfaces:
        raise InterfaceAmbiguityError(f"x={x} lies on a flux interface")
    return model.segments[bisect_right(model.interfaces, x)]


def max_wave_speed(model: PiecewiseFlux, interval: tuple[float, float]) -> float:
    """Largest derivative any law attains on ``interval`` (sets the CFL limit)."""
    lo, hi = float(interval[0]), float(interval[1])
    if not (math.isfinite(lo) and math.isfinite(hi)) or hi < lo:
        raise ValueError(f"need a finite interval with lo <= hi, got [{lo}, {hi}]")
    return max(seg.deriv_bounds(lo, hi)[1] for seg in model.segments)


# }}}


# {{{ inversion


def invert(seg: FluxSegment, w: float, bracket: tuple[float, float]) -> float:
    """Solve ``seg(u) == w`` for ``u`` within ``bracket``.

    Closed-form for the builtin kinds, bisection to a relative residual of
    1e-12 otherwise.  Raises :class:`FluxRangeError` when ``w`` is not in the
    image of the bracket (up to a small slack absorbing roundoff).
    """
    lo, hi = float(bracket[0]), float(bracket[1])
    w = float(w)
    if not (math.isfinite(lo) and math.isfinite(hi) and math.isfinite(w)) or hi < lo:
        raise ValueError(f"bad inversion request: w={w}, bracket=[{lo}, {hi}]")
    f_lo, f_hi = float(seg(lo)), float(seg(hi))
    slack = 1e-9 * max(1.0, abs(f_lo), abs(f_hi))
    if w < f_lo - slack or w > f_hi + slack:
        raise FluxRangeError(
            f"w={w} is outside the flux image [{f_lo}, {f_hi}] "
            f"of the bracket [{lo}, {hi}]"
        )
    w = min(max(w, f_lo), f_hi)

    if seg.kind == "linear":
        a, b = seg.params
        return (w - b) / a
    if seg.kind == "quadratic":
        a, b = seg.params
        s = math.sqrt(max(b * b + 2.0 * a * w, 0.0))
        # the root on the increasing branch; avoid cancellation when b > 0
        return 2.0 * w / (b + s) if b > 0.0 else (s - b) / a

    tol = _INVERT_RTOL * max(1.0, abs(w))
    u_lo, u_hi = lo, hi
    u = 0.5 * (u_lo + u_hi)
    for _ in range(200):
        fu = float(seg(u))
        if abs(fu - w) <= tol:
            return u
        if fu < w:
            u_lo = u
        else:
            u_hi = u
        u = 0.5 * (u_lo + u_hi)
        if u_hi - u_lo <= 4.0 * np.finfo(float).eps * max(1.0, abs(u_lo), abs(u_hi)):
            return u
    return u


def invert_near(seg: FluxSegment, w: float, seed: tuple[float, float]) -> float:
    """Like :func:`invert`, but grows the bracket outward from ``seed``.

    Used when only a rough idea of where the root lives is available.  Raises
    :class:`FluxRangeError` if doubling the bracket 200 times never captures
    ``w`` (the flux image is bounded away from it).
    """
    lo, hi = float(seed[0]), float(seed[1])
    if hi < lo:
        lo, hi = hi, lo
    width = max(hi - lo, 1e-6 * max(1.0, abs(lo), abs(hi)))
    for _ in range(200):
        f_lo, f_hi = float(seg(lo)), float(seg(hi))
        slack = 1e-9 * max(1.0, abs(f_lo), abs(f_hi))
        if f_lo - slack <= w <= f_hi + slack:
            return invert(seg, w, (lo, hi))
        if w < f_lo:
            lo -= width
        if w > f_hi:
            hi += width
        width *= 2.0
    raise FluxRangeError(
        f"could not bracket w={w}: flux image still [{float(seg(lo))}, "
        f"{float(seg(hi))}] after growing the bracket to [{lo}, {hi}]"
    )


# }}}


# {{{ invariant interval


def invariant_interval(model: PiecewiseFlux, data_range: tuple[float, float]) -> tuple[float, float]:
    """Smallest interval containing the data that the interface maps cannot leave.

    Values in subdomain ``i`` come either from the data or through the
    coupling map ``u -> segments[i]^{-1}(segments[i-1](u))`` applied to values
    of subdomain ``i-1``.  Propagating the data range left to right and
    closing under those maps yields one range per subdomain; the hull of all
    of them is returned.  The sweep is repeated until nothing changes (below
    1e-12); a model whose maps keep amplifying raises
    :class:`DivergentRangeError`.
    """
    lo, hi = float(data_range[0]), float(data_range[1])
    if not (math.isfinite(lo) and math.isfinite(hi)) or hi < lo:
        raise ValueError(f"need a finite range with lo <= hi, got [{lo}, {hi}]")
    segs = model.segments
    n = model.n_interfaces
    if n == 0:
        return lo, hi

    ranges = [(lo, hi)] * (n + 1)
    for _sweep in range(100):
        change = 0.0
        swept = [ranges[0]]
        for i in range(1, n + 1):
            p_lo, p_hi = swept[i - 1]
            try:
                m_lo = invert_near(segs[i], float(segs[i - 1](p_lo)), ranges[i])
                m_hi = invert_near(segs[i], float(segs[i - 1](p_hi)), ranges[i])
            except FluxRangeError as exc:
                raise DivergentRangeError(
                    f"interface map {i} pushes the range outside the flux image: {exc}"
                ) from exc
            r_lo, r_hi = min(lo, m_lo), max(hi, m_hi)
            if not (math.isfinite(r_lo) and math.isfinite(r_hi)):
                raise DivergentRangeError(
                    f"interface map {i} produced a non-finite range [{r_lo}, {r_hi}]"
                )
            change = max(change, abs(r_lo - ranges[i][0]), abs(r_hi - ranges[i][1]))
            swept.append((r_lo, r_hi))
        ranges = swept
        if change < 1e-12:
            break
    else:
        raise DivergentRangeError(
            f"interface maps kept widening the range for 100 sweeps "
            f"(last change {change:.3e})"
        )
    return min(r[0] for r in ranges), max(r[1] for r in ranges)


# }}}
