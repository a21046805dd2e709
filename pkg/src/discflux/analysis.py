"""Error norms, convergence rates, and the discrete inequalities the march obeys.

The diagnostics here are measurements, not proofs: total variation per
subdomain, per-cell temporal variation, a discrete space-Lipschitz quotient of
the flux, and the cellwise entropy residual with subdomain-adapted constants.
Each should stay bounded (or nonpositive) on any valid run, and the tests pin
that down with explicit tolerances.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.spatial.distance import pdist

from .errors import (
    MissingDataError,
    ProjectionError,
    SequencingError,
    ValidityError,
)
from .exact import ExactSolution
from .fluxes import PiecewiseFlux, invert_near
from .grid import Grid
from .solver import State, Trajectory

# nodes/weights for the oracle cell-average quadrature
_GL16_NODES, _GL16_WEIGHTS = np.polynomial.legendre.leggauss(16)


@dataclass(frozen=True)
class ErrorReport:
    """A convergence table: (n, l1_error, rate) rows plus provenance."""

    rows: tuple[tuple[int, float, Optional[float]], ...]
    reference: str
    config_digest: str


@dataclass(frozen=True)
class EntropyResidualReport:
    """Largest discrete entropy residual and where it occurred."""

    max_residual: float
    argmax: tuple[int, int, float]  # (cell, step, base constant)
    sampled_c: tuple[float, ...]


# {{{ errors and rates


def l1_error(coarse: State, coarse_grid: Grid, fine: State, fine_grid: Grid) -> float:
    """L1 distance after projecting the fine state onto the coarse grid.

    Each group of fine cells is averaged onto the coarse cell it tiles, so the
    fine grid must be a whole-number refinement of the coarse one over the
    same domain, at the same time.
    """
    scale = max(1.0, abs(coarse_grid.xmin), abs(coarse_grid.xmax))
    if (
        abs(coarse_grid.xmin - fine_grid.xmin) > 1e-12 * scale
        or abs(coarse_grid.xmax - fine_grid.xmax) > 1e-12 * scale
    ):
        raise ProjectionError(
            f"grids cover different domains: [{coarse_grid.xmin}, {coarse_grid.xmax}] "
            f"vs [{fine_grid.xmin}, {fine_grid.xmax}]"
        )
    if fine_grid.n % coarse_grid.n != 0:
        raise ProjectionError(
            f"fine n={fine_grid.n} is not a multiple of coarse n={coarse_grid.n}"
        )
    if abs(coarse.t - fine.t) > 1e-12 * max(1.0, abs(coarse.t), abs(fine.t)):
        raise ProjectionError(f"states live at different times: {coarse.t} vs {fine.t}")
    ratio = fine_grid.n // coarse_grid.n
    projected = fine.u.reshape(coarse_grid.n, ratio).mean(axis=1)
    return float(np.sum(np.abs(coarse.u - projected)) * coarse_grid.dx)


def l1_error_vs_oracle(state: State, grid: Grid, exact: ExactSolution, t: float = None) -> float:
    """L1 distance between the state and per-cell averages of a closed form.

    The closed-form solution is averaged with 16-point quadrature per cell,
    accurate far below scheme error for piecewise-smooth profiles.  Raises
    :class:`ValidityError` through the oracle when ``t`` is out of window.
    """
    t = state.t if t is None else float(t)
    x = grid.centers[:, None] + (0.5 * grid.dx) * _GL16_NODES[None, :]
    vals = exact(x.ravel(), t).reshape(x.shape)
    averages = vals @ _GL16_WEIGHTS / 2.0
    return float(np.sum(np.abs(state.u - averages)) * grid.dx)


def ooc(errors: Sequence[tuple[int, float]]) -> list[float]:
    """Observed orders of convergence from (n, error) pairs under doubling."""
    rows = [(int(n), float(e)) for n, e in errors]
    if len(rows) < 2:
        return []
    for (n_prev, _), (n_next, _) in zip(rows, rows[1:]):
        if n_next != 2 * n_prev:
            raise SequencingError(
                f"resolutions must double between rows, got {n_prev} -> {n_next}"
            )
    if any(e <= 0.0 for _, e in rows):
        raise ValueError("errors must be positive to take rates")
    return [math.log2(e_prev / e_next) for (_, e_prev), (_, e_next) in zip(rows, rows[1:])]


# }}}


# {{{ variation diagnostics


def spatial_tv(
    state: State,
    grid: Grid,
    subdomain: Optional[int] = None,
    split_at_interfaces: bool = False,
) -> float:
    """Total variation of the cell values.

    ``subdomain=i`` restricts to that subdomain's cells; with
    ``split_at_interfaces`` the whole-domain sum drops the pairs straddling an
    interface (the interface cell may move against its left neighbour without
    meaning anything for either law).
    """
    slices = grid.subdomain_slices()
    if subdomain is not None:
        block = state.u[slices[subdomain]]
        return float(np.sum(np.abs(np.diff(block))))
    if split_at_interfaces:
        return float(sum(np.sum(np.abs(np.diff(state.u[sl]))) for sl in slices))
    return float(np.sum(np.abs(np.diff(state.u))))


def temporal_tv(trajectory: Trajectory, cell: int) -> float:
    """Accumulated per-cell level-to-level variation sum_n |u_j^{n+1} - u_j^n|."""
    if trajectory.temporal_increments is None:
        raise MissingDataError(
            "run did not accumulate increments; pass record_increments=True"
        )
    return float(trajectory.temporal_increments[int(cell)])


def flux_lipschitz_in_space(trajectory: Trajectory, grid: Grid, model: PiecewiseFlux) -> float:
    """Largest discrete space-Lipschitz quotient of the flux within a subdomain.

    For every cell pair (j, j') sharing a law, computes
    ``sum_n dt_n |f(u_j^n) - f(u_j'^n)| / |x_j - x_j'|`` over the retained
    levels and returns the maximum.  Boundedness of this quotient under
    refinement is the testable statement; there is no exact constant to hit.
    """
    levels = _require_levels(trajectory)
    times = np.asarray([lv.t for lv in levels])
    dts = np.diff(times)
    centers = grid.centers
    worst = 0.0
    for seg, sl in zip(model.segments, grid.subdomain_slices()):
        m = sl.stop - sl.start
        if m < 2:
            continue
        values = np.stack([lv.u[sl] for lv in levels])  # (levels, m)
        fluxes = np.asarray(seg(values), dtype=float)
        weighted = fluxes[:-1] * dts[:, None]
        pair_sums = pdist(weighted.T, metric="cityblock")
        pair_dist = pdist(centers[sl, None], metric="cityblock")
        worst = max(worst, float(np.max(pair_sums / pair_dist)))
    return worst


# }}}


# {{{ entropy residual


def entropy_residual(
    trajectory: Trajectory,
    grid: Grid,
    model: PiecewiseFlux,
    c_samples: Sequence[float],
) -> EntropyResidualReport:
    """Largest discrete entropy residual over cells, steps, and constants.

    For each base constant c the entropy pair |u - c_i|, |f(u) - f(c_i)| uses
    the constant adapted to each subdomain: c_0 = c and every interface maps
    c_{i} through flux continuity, which keeps f^(i)(c_i) the same number in
    every subdomain.  The residual

        (|u^{n+1} - c_i| - |u^n - c_i|)/dt + (q_j^n - q_{j-1}^n)/dx

    is evaluated at every cell whose left neighbour shares its law (this keeps
    out the boundary cell and the interface cells, which are not produced by
    the conservative update), and should be nonpositive up to roundoff on any
    stable run.
    """
    levels = _require_levels(trajectory)
    u_all = np.stack([lv.u for lv in levels])  # (L, n)
    times = np.asarray([lv.t for lv in levels])
    dts = np.diff(times)
    if np.any(dts <= 0.0):
        raise ValueError("trajectory levels must be strictly increasing in time")
    slices = grid.subdomain_slices()

    flux_all = np.empty_like(u_all)
    for seg, sl in zip(model.segments, slices):
        flux_all[:, sl] = seg(u_all[:, sl])

    # cells eligible for the conservative-update inequality
    same_law = grid.subdomain_of_cell[1:] == grid.subdomain_of_cell[:-1]
    if not np.any(same_law):
        raise ValueError("no interior cell has an in-law left neighbour")

    seed = (float(u_all.min()), float(u_all.max()))
    best = -math.inf
    best_where = (0, 0, 0.0)
    constants = tuple(float(c) for c in c_samples)
    for c in constants:
        adapted = _adapted_constants(model, c, seed)
        c_cell = adapted[grid.subdomain_of_cell]
        fc = float(model.segments[0](adapted[0]))
        eta = np.abs(u_all - c_cell)
        q = np.abs(flux_all - fc)
        rate = (eta[1:, 1:] - eta[:-1, 1:]) / dts[:, None]
        div = (q[:-1, 1:] - q[:-1, :-1]) / grid.dx
        residual = (rate + div)[:, same_law]
        idx = int(np.argmax(residual))
        value = float(residual.flat[idx])
        if value > best:
            step_i, col = np.unravel_index(idx, residual.shape)
            cell = int(np.nonzero(same_law)[0][col]) + 1
            best = value
            best_where = (cell, int(step_i), c)
    return EntropyResidualReport(max_residual=best, argmax=best_where, sampled_c=constants)


def _adapted_constants(model: PiecewiseFlux, c: float, seed: tuple[float, float]) -> np.ndarray:
    """Per-subdomain constants chained through flux continuity."""
    out = [float(c)]
    for i in range(model.n_interfaces):
        w = float(model.segments[i](out[-1]))
        out.append(invert_near(model.segments[i + 1], w, seed))
    return np.asarray(out)


def _require_levels(trajectory: Trajectory) -> list:
    if not trajectory.levels or len(trajectory.levels) < 2:
        raise MissingDataError(
            "run did not retain time levels; pass retain_levels=True"
        )
    return trajectory.levels


# }}}
