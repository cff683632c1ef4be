"""Cadlag path, path function and interpolation tests.

The single-jump interpolation literals below were derived by hand: a unit
jump at t = 1/2 on [0, 1] with delta = 1/2 and base ratio 1/2 gets a window
of length 1/4, the stretched horizon is 5/4, and the affine rescale maps the
knots to 0, 0.4, 0.5, 0.6, 1.  The quarter-circle oracle computes the area of
a custom traversal with the shoelace formula.
"""

import io

import numpy as np
import pytest

from cadlag_rough import cadlag
from cadlag_rough.cadlag import (CadlagPath, TimeChange, apply_time_change,
                                 custom_phi, hoff_phi, interpolate, linear_phi,
                                 loglinear_phi, read_path_csv, value_at,
                                 write_path_csv)


def unit_jump_path():
    return CadlagPath(np.array([0.0, 0.5, 1.0]),
                      np.array([[0.0], [1.0], [1.0]]))


def shoelace_area(points):
    """Signed area oracle: 0.5 * sum cross(p_k, p_{k+1} - p_k) in 2-d."""
    acc = 0.0
    for k in range(len(points) - 1):
        x0, y0 = points[k]
        x1, y1 = points[k + 1]
        acc += 0.5 * (x0 * (y1 - y0) - y0 * (x1 - x0))
    return acc


# ---------------------------------------------------------------- paths

def test_default_mask_marks_changes_as_jumps():
    p = unit_jump_path()
    np.testing.assert_array_equal(p.jump_mask, [False, True, False])
    assert list(p.jump_indices()) == [1]


def test_value_at_step_semantics():
    p = unit_jump_path()
    assert value_at(p, 0.49)[0] == 0.0
    assert value_at(p, 0.5)[0] == 1.0
    assert value_at(p, 0.75)[0] == 1.0
    assert value_at(p, 2.0)[0] == 1.0


def test_value_at_chord_semantics():
    p = CadlagPath(np.array([0.0, 1.0]), np.array([[0.0], [2.0]]),
                   jump_mask=np.array([False, False]))
    assert value_at(p, 0.25)[0] == pytest.approx(0.5)


def test_path_validation():
    with pytest.raises(ValueError, match="strictly increasing"):
        CadlagPath(np.array([0.0, 0.0]), np.zeros((2, 1)))
    with pytest.raises(ValueError, match="length"):
        CadlagPath(np.array([0.0, 1.0]), np.zeros((3, 1)))
    with pytest.raises(ValueError, match="jump_mask"):
        CadlagPath(np.array([0.0, 1.0]), np.zeros((2, 1)),
                   jump_mask=np.array([True]))


# ---------------------------------------------------------------- path functions

def test_linear_sample_is_chord():
    phi = linear_phi()
    x, y = np.array([0.0, 0.0]), np.array([2.0, 4.0])
    np.testing.assert_allclose(phi.sample(x, y, 0.25), [0.5, 1.0], atol=0)
    np.testing.assert_allclose(phi.sample(x, y, 0.0), x, atol=0)
    np.testing.assert_allclose(phi.sample(x, y, 1.0), y, atol=0)
    np.testing.assert_allclose(phi.area_map(y - x), np.zeros((2, 2)), atol=0)


def test_loglinear_on_vectors_equals_linear():
    phi_l, phi_g = linear_phi(), loglinear_phi()
    x, y = np.array([1.0, -1.0]), np.array([0.5, 3.0])
    for s in (0.0, 0.3, 0.7, 1.0):
        np.testing.assert_allclose(phi_g.sample(x, y, s), phi_l.sample(x, y, s))


def test_hoff_sample_matches_axis_traversal():
    # first half moves coordinate 1, second half coordinate 2
    phi = hoff_phi()
    x = np.array([0.0, 0.0])
    y = np.array([2.0, 4.0])
    np.testing.assert_allclose(phi.sample(x, y, 0.25), [1.0, 0.0])
    np.testing.assert_allclose(phi.sample(x, y, 0.5), [2.0, 0.0])
    np.testing.assert_allclose(phi.sample(x, y, 0.75), [2.0, 2.0])
    np.testing.assert_allclose(phi.sample(x, y, 1.0), y)
    assert phi.breakpoints(2) == (0.5,)


def test_hoff_order_swaps_traversal():
    phi = hoff_phi(order=(1, 0))
    x = np.array([0.0, 0.0])
    y = np.array([2.0, 4.0])
    np.testing.assert_allclose(phi.sample(x, y, 0.5), [0.0, 4.0])


def test_hoff_area_half_product():
    # one-cell area of the axis traversal is half the coordinate product
    phi = hoff_phi()
    a = phi.area_map(np.array([3.0, 5.0]))
    np.testing.assert_allclose(a, [[0.0, 7.5], [-7.5, 0.0]], atol=0)
    # reversed order flips the sign
    a_rev = hoff_phi(order=(1, 0)).area_map(np.array([3.0, 5.0]))
    np.testing.assert_allclose(a_rev, [[0.0, -7.5], [7.5, 0.0]], atol=0)


def test_hoff_area_matches_sampled_traversal():
    rng = np.random.default_rng(21)
    for d in (2, 3, 4):
        phi = hoff_phi()
        dx = rng.standard_normal(d)
        direct = phi.area_map(dx)
        sampled = cadlag._sampled_area(phi, dx)
        np.testing.assert_allclose(direct, sampled, atol=1e-12)
        np.testing.assert_allclose(direct + direct.T, 0.0, atol=0)


def test_custom_phi_quarter_circle_area():
    # quarter circle from (1,0) to (0,1): area against the shoelace oracle
    def sample(x, y, s):
        ang = 0.5 * np.pi * s
        return np.array([np.cos(ang), np.sin(ang)])

    phi = custom_phi(sample)
    dx = np.array([-1.0, 1.0])
    a = phi.area_map(dx)
    params = np.linspace(0.0, 1.0, 257)
    pts = [sample(None, None, s) for s in params]
    # shoelace gives the full signed sweep relative to the start point
    pts0 = [p - pts[0] for p in pts]
    expected = shoelace_area(pts0)
    assert a[0, 1] == pytest.approx(expected, abs=1e-12)
    # closed form: half of integral (1 - cos) over the quarter turn
    assert abs(a[0, 1] - (np.pi / 4 - 0.5)) < 1e-4


def test_custom_phi_domain_guard():
    phi = custom_phi(lambda x, y, s: x + s * (y - x),
                     domain_fn=lambda x, y: bool(np.all(y >= x)))
    p = CadlagPath(np.array([0.0, 0.5, 1.0]),
                   np.array([[0.0], [-1.0], [-1.0]]))
    with pytest.raises(ValueError, match="domain"):
        interpolate(p, phi, delta=0.5)


# ---------------------------------------------------------------- interpolation

def test_single_jump_interpolation_frozen():
    p = unit_jump_path()
    cont, tc = interpolate(p, linear_phi(), delta=0.5, n_samples=2)
    np.testing.assert_allclose(cont.times, [0.0, 0.4, 0.5, 0.6, 1.0],
                               atol=1e-15)
    np.testing.assert_allclose(cont.values[:, 0], [0.0, 0.0, 0.5, 1.0, 1.0],
                               atol=0)
    assert not cont.jump_mask.any()
    np.testing.assert_allclose(tc.source, [0.0, 0.5, 0.5, 1.0], atol=0)
    np.testing.assert_allclose(tc.target, [0.0, 0.4, 0.6, 1.0], atol=1e-15)
    assert tc.sup_deviation() == pytest.approx(0.1, abs=1e-15)


def test_continuous_path_unchanged():
    rng = np.random.default_rng(22)
    times = np.linspace(0.0, 1.0, 17)
    vals = rng.standard_normal((17, 2)).cumsum(axis=0)
    p = CadlagPath(times, vals, jump_mask=np.zeros(17, dtype=bool))
    cont, tc = interpolate(p, linear_phi(), delta=0.5)
    np.testing.assert_allclose(cont.times, times, atol=0)
    np.testing.assert_allclose(cont.values, vals, atol=0)
    assert tc.sup_deviation() == 0.0


def test_two_jump_window_ordering():
    # larger jump gets the rank-1 window delta/2, smaller gets delta/4
    p = CadlagPath(np.array([0.0, 0.3, 0.6, 1.0]),
                   np.array([[0.0], [2.0], [3.0], [3.0]]))
    cont, tc = interpolate(p, linear_phi(), delta=1.0, n_samples=2,
                           rescale=False)
    # stretched windows: [0.3, 0.8] for the size-2 jump, [1.1, 1.35] for size-1
    src, tgt = tc.source, tc.target
    np.testing.assert_allclose(src, [0.0, 0.3, 0.3, 0.6, 0.6, 1.0], atol=0)
    np.testing.assert_allclose(tgt, [0.0, 0.3, 0.8, 1.1, 1.35, 1.75],
                               atol=1e-15)


def test_equal_jump_sizes_tie_to_earlier_time():
    p = CadlagPath(np.array([0.0, 0.3, 0.6, 1.0]),
                   np.array([[0.0], [1.0], [2.0], [2.0]]))
    _, tc = interpolate(p, linear_phi(), delta=1.0, n_samples=2, rescale=False)
    # earlier jump takes rank 1: window length 1/2, later one 1/4
    widths = np.diff(tc.target)[np.diff(tc.source) == 0.0]
    np.testing.assert_allclose(widths, [0.5, 0.25], atol=1e-15)


def test_recovery_through_time_change():
    rng = np.random.default_rng(23)
    from util import random_jump_path
    for _ in range(10):
        p = random_jump_path(rng, 2, 6)
        cont, tc = interpolate(p, linear_phi(), delta=0.7, n_samples=3)
        rec = apply_time_change(cont, tc, "forward")
        np.testing.assert_allclose(rec.times, p.times, atol=1e-9)
        np.testing.assert_allclose(rec.values, p.values, atol=1e-9)
        # clock deviation stays below the total inserted window length
        assert tc.sup_deviation() <= 0.7 * sum(
            0.5 ** k for k in range(1, len(p.jump_indices()) + 1)) + 1e-15


def test_hoff_window_contains_corner():
    p = CadlagPath(np.array([0.0, 0.5, 1.0]),
                   np.array([[0.0, 0.0], [1.0, 1.0], [1.0, 1.0]]))
    cont, _ = interpolate(p, hoff_phi(), delta=1.0, n_samples=4)
    corner = np.array([1.0, 0.0])
    hit = np.any(np.all(np.abs(cont.values - corner) < 1e-14, axis=1))
    assert hit


def test_jump_at_final_time():
    p = CadlagPath(np.array([0.0, 1.0]), np.array([[0.0], [1.0]]))
    cont, tc = interpolate(p, linear_phi(), delta=0.5, n_samples=2)
    rec = apply_time_change(cont, tc, "forward")
    np.testing.assert_allclose(rec.values[:, 0], [0.0, 1.0], atol=1e-12)
    assert cont.times[-1] == pytest.approx(1.0)


def test_interpolate_guards():
    p = unit_jump_path()
    with pytest.raises(ValueError, match="delta"):
        interpolate(p, linear_phi(), delta=0.0)
    with pytest.raises(ValueError, match="r_base"):
        interpolate(p, linear_phi(), delta=0.5, r_base=1.0)
    with pytest.raises(ValueError, match="samples"):
        interpolate(p, linear_phi(), delta=0.5, n_samples=1)


# ---------------------------------------------------------------- time changes

def test_time_change_identity():
    tc = TimeChange.identity(2.0)
    assert tc.forward(0.7) == pytest.approx(0.7)
    assert tc.inverse(0.7) == pytest.approx(0.7)
    assert tc.sup_deviation() == 0.0
    assert not tc.has_jumps()


def test_time_change_round_trip():
    rng = np.random.default_rng(24)
    knots = np.concatenate([[0.0], np.sort(rng.uniform(0.1, 0.9, 5)), [1.0]])
    warped = np.concatenate([[0.0], np.sort(rng.uniform(0.1, 0.9, 5)), [1.0]])
    tc = TimeChange(knots, warped)
    ts = rng.uniform(0.0, 1.0, 50)
    np.testing.assert_allclose(tc.inverse(tc.forward(ts)), ts, atol=1e-12)

    p = CadlagPath(np.linspace(0, 1, 20), rng.standard_normal((20, 2)),
                   jump_mask=np.zeros(20, dtype=bool))
    fwd = apply_time_change(p, tc, "forward")
    back = apply_time_change(fwd, tc, "inverse")
    np.testing.assert_allclose(
        np.asarray([value_at(back, t) for t in p.times]),
        np.asarray([value_at(p, tc.inverse(tc.forward(t))) for t in p.times]),
        atol=1e-12)


def test_time_change_validation():
    with pytest.raises(ValueError, match="strictly increasing"):
        TimeChange(np.array([0.0, 1.0]), np.array([1.0, 1.0]))
    with pytest.raises(ValueError, match="non-decreasing"):
        TimeChange(np.array([1.0, 0.0]), np.array([0.0, 1.0]))


# ---------------------------------------------------------------- csv

def test_csv_round_trip_exact():
    rng = np.random.default_rng(25)
    from util import random_jump_path
    p = random_jump_path(rng, 3, 5)
    buf = io.StringIO()
    write_path_csv(p, buf)
    buf.seek(0)
    q = read_path_csv(buf)
    np.testing.assert_array_equal(q.times, p.times)
    np.testing.assert_array_equal(q.values, p.values)
    np.testing.assert_array_equal(q.jump_mask, p.jump_mask)
