import numpy as np
import pytest

from discflux import (
    DivergentRangeError,
    FluxRangeError,
    InterfaceAmbiguityError,
    PiecewiseFlux,
    custom_flux,
    invariant_interval,
    invert,
    invert_near,
    linear_flux,
    max_wave_speed,
    quadratic_flux,
)
from oracles import bisect_root


def make_two_law_model():
    """Linear transport on the left, convex law on the right, split at 0."""
    return PiecewiseFlux(
        (0.0,), (linear_flux(1.0), quadratic_flux(1.0, interval=(0.25, 3.0)))
    )


def test_linear_flux_values_and_bounds():
    seg = linear_flux(2.0, -1.0)
    assert seg(3.0) == 5.0
    u = np.array([-1.0, 0.0, 4.0])
    assert np.array_equal(seg(u), 2.0 * u - 1.0)
    assert seg.deriv_bounds(-10.0, 10.0) == (2.0, 2.0)
    assert seg.alpha == 2.0


def test_linear_flux_rejects_nonpositive_slope():
    with pytest.raises(ValueError, match="positive slope"):
        linear_flux(0.0)
    with pytest.raises(ValueError, match="positive slope"):
        linear_flux(-1.0)


def test_quadratic_flux_matches_formula():
    seg = quadratic_flux(2.0, 0.5, interval=(0.0, 4.0))
    rng = np.random.default_rng(3)
    u = rng.uniform(0.0, 4.0, size=50)
    assert np.allclose(seg(u), u * u + 0.5 * u, rtol=0.0, atol=1e-14)
    assert np.allclose(seg.deriv(u), 2.0 * u + 0.5)
    # derivative is affine, so the bounds are the endpoint values exactly
    assert seg.deriv_bounds(1.0, 3.0) == (2.5, 6.5)


def test_quadratic_flux_rejects_nonincreasing_interval():
    with pytest.raises(ValueError, match="not increasing"):
        quadratic_flux(1.0, 0.0, interval=(-1.0, 1.0))
    with pytest.raises(ValueError, match="a != 0"):
        quadratic_flux(0.0, 1.0, interval=(0.0, 1.0))


def test_custom_flux_accepts_monotone_pair():
    seg = custom_flux(
        lambda u: np.exp(u), lambda u: np.exp(u), interval=(-1.0, 1.0)
    )
    assert seg.kind == "custom"
    assert 0.0 < seg.alpha <= np.exp(-1.0)
    lo, hi = seg.deriv_bounds(-0.5, 0.5)
    assert lo == pytest.approx(np.exp(-0.5), rel=1e-6)
    assert hi == pytest.approx(np.exp(0.5), rel=1e-6)


def test_custom_flux_rejects_decreasing():
    with pytest.raises(ValueError, match="not strictly increasing"):
        custom_flux(lambda u: -u, lambda u: -np.ones_like(u), interval=(0.0, 1.0))
    # sign change inside the interval is also caught
    with pytest.raises(ValueError, match="not strictly increasing"):
        custom_flux(lambda u: u**3 / 3.0, lambda u: u**2, interval=(-1.0, 1.0))


def test_custom_flux_rejects_inconsistent_derivative():
    with pytest.raises(ValueError, match="finite difference"):
        custom_flux(lambda u: u * u, lambda u: 2.1 * u + 0.3, interval=(1.0, 2.0))


def test_piecewise_model_validation():
    with pytest.raises(ValueError, match="flux laws"):
        PiecewiseFlux((0.0,), (linear_flux(1.0),))
    with pytest.raises(ValueError, match="strictly increasing"):
        PiecewiseFlux((1.0, 1.0), (linear_flux(1.0),) * 3)


def test_segment_at():
    from discflux.fluxes import segment_at

    model = make_two_law_model()
    assert segment_at(model, -0.3) is model.segments[0]
    assert segment_at(model, 0.7) is model.segments[1]
    with pytest.raises(InterfaceAmbiguityError):
        segment_at(model, 0.0)


def test_max_wave_speed():
    model = make_two_law_model()
    # linear law contributes 1, quadratic law contributes max(u) on the range
    assert max_wave_speed(model, (0.5, 2.0)) == 2.0
    assert max_wave_speed(model, (0.25, 0.75)) == 1.0


@pytest.mark.parametrize(
    "seg, bracket",
    [
        (linear_flux(3.0, -2.0), (-5.0, 5.0)),
        (quadratic_flux(1.0, 0.0, interval=(0.5, 3.0)), (0.5, 3.0)),
        (quadratic_flux(2.0, 1.0, interval=(0.0, 2.0)), (0.0, 2.0)),
    ],
)
def test_invert_round_trip(seg, bracket):
    rng = np.random.default_rng(11)
    for u in rng.uniform(bracket[0], bracket[1], size=20):
        w = float(seg(u))
        assert invert(seg, w, bracket) == pytest.approx(u, rel=1e-12, abs=1e-12)


def test_invert_custom_matches_bisection_oracle():
    seg = custom_flux(lambda u: np.sinh(u), lambda u: np.cosh(u), interval=(0.0, 3.0))
    for w in (0.1, 1.0, 5.0):
        got = invert(seg, w, (0.0, 3.0))
        expected = bisect_root(lambda v: np.sinh(v) - w, 0.0, 3.0)
        assert got == pytest.approx(expected, abs=1e-11)


def test_invert_quadratic_avoids_cancellation():
    # huge linear part: the naive (sqrt(b^2 + 2aw) - b)/a root loses all digits
    seg = quadratic_flux(1.0, 1e8, interval=(0.0, 10.0))
    u = 1e-4
    w = float(seg(u))
    assert invert(seg, w, (0.0, 10.0)) == pytest.approx(u, rel=1e-12)


def test_invert_outside_image():
    seg = quadratic_flux(1.0, 0.0, interval=(1.0, 2.0))
    with pytest.raises(FluxRangeError, match="outside the flux image"):
        invert(seg, 10.0, (1.0, 2.0))
    # values inside the roundoff slack are clamped instead
    top = float(seg(2.0))
    assert invert(seg, top + 1e-13, (1.0, 2.0)) == pytest.approx(2.0)


def test_invert_near_grows_bracket():
    seg = quadratic_flux(1.0, 0.0, interval=(0.1, 50.0))
    w = float(seg(40.0))
    assert invert_near(seg, w, (1.0, 2.0)) == pytest.approx(40.0, rel=1e-12)


def test_invert_near_gives_up_on_bounded_image():
    seg = custom_flux(
        np.arctan, lambda u: 1.0 / (1.0 + u * u), interval=(-50.0, 50.0)
    )
    with pytest.raises(FluxRangeError, match="could not bracket"):
        invert_near(seg, 2.0, (0.0, 1.0))


def test_invariant_interval_single_law():
    model = PiecewiseFlux((), (linear_flux(1.0),))
    assert invariant_interval(model, (0.5, 2.0)) == (0.5, 2.0)


def test_invariant_interval_expands_through_interface():
    # left law u^2/2, right law u: the coupling maps u to u^2/2, so data in
    # [2, 3] feeds values up to 4.5 into the right subdomain
    model = PiecewiseFlux(
        (0.0,), (quadratic_flux(1.0, interval=(1.0, 6.0)), linear_flux(1.0))
    )
    lo, hi = invariant_interval(model, (2.0, 3.0))
    assert lo == 2.0
    assert hi == pytest.approx(4.5, abs=1e-12)


def test_invariant_interval_contracting_map():
    # left law u, right law u^2/2 on positive states: the map is sqrt(2u),
    # which keeps [0.5, 2] inside itself
    model = PiecewiseFlux(
        (0.0,), (linear_flux(1.0), quadratic_flux(1.0, interval=(0.25, 3.0)))
    )
    lo, hi = invariant_interval(model, (0.5, 2.0))
    assert (lo, hi) == (0.5, 2.0)


def test_invariant_interval_three_subdomains_chains():
    # two interfaces: data [2, 3] maps to [2, 4.5] in the middle subdomain,
    # whose range then maps through u/2 into the third, reaching down to 1
    model = PiecewiseFlux(
        (-0.5, 0.5),
        (
            quadratic_flux(1.0, interval=(1.0, 8.0)),
            linear_flux(1.0),
            linear_flux(2.0),
        ),
    )
    lo, hi = invariant_interval(model, (2.0, 3.0))
    assert lo == pytest.approx(1.0, abs=1e-12)
    assert hi == pytest.approx(4.5, abs=1e-12)


def test_invariant_interval_divergent_when_image_runs_out():
    # the right law's image is bounded by pi/2, so transporting data at 2
    # through the interface has no solution
    model = PiecewiseFlux(
        (0.0,),
        (
            linear_flux(1.0),
            custom_flux(np.arctan, lambda u: 1.0 / (1.0 + u * u), interval=(-50.0, 50.0)),
        ),
    )
    with pytest.raises(DivergentRangeError, match="outside the flux image"):
        invariant_interval(model, (1.5, 2.0))
