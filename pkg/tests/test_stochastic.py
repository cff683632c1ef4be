import numpy as np
import pytest

from cadlag_rough.cadlag import CadlagPath, hoff_phi, linear_phi
from cadlag_rough.lift import log_increments, marcus_lift
from cadlag_rough.stochastic import (BrownianMotion, LevyFinite,
                                     MartingaleCLT, NullArray, RandomWalk,
                                     approximate, bracket, bracket_final,
                                     dyadic_partition, jump_truncate,
                                     null_array_check, simulate, stream,
                                     ucv_surrogate)

CP = LevyFinite(lam=5.0, jump_law={"kind": "normal", "scale": 1.0}, T=1.0)


# --------------------------------------------------------------------------
# simulation
# --------------------------------------------------------------------------

def test_seed_determinism_bit_identical():
    for model in (BrownianMotion(d=2), CP, RandomWalk(d=2),
                  NullArray(LevyFinite(drift=0.5, diffusion=1.0, lam=2.0,
                                       jump_law={"kind": "uniform"})),
                  MartingaleCLT(d=2)):
        a = simulate(model, 64, seed=7, index=3)
        b = simulate(model, 64, seed=7, index=3)
        assert np.array_equal(a.times, b.times)
        assert np.array_equal(a.values, b.values)
        assert np.array_equal(a.jump_mask, b.jump_mask)
        c = simulate(model, 64, seed=7, index=4)
        assert not np.array_equal(a.values, c.values)


def test_zero_volatility_brownian_is_zero_path():
    sp = simulate(BrownianMotion(sigma=0.0, d=3), 16, seed=1)
    assert np.array_equal(sp.values, np.zeros((16, 3)))
    assert not sp.jump_mask.any()


def test_pure_drift_levy_is_straight_line():
    model = LevyFinite(drift=[1.0, 0.0], diffusion=0.0, lam=0.0, d=2, T=1.0)
    sp = simulate(model, 11, seed=2)
    assert np.allclose(sp.values, np.outer(sp.times, [1.0, 0.0]), atol=1e-12)
    assert np.allclose(sp.values[-1], [1.0, 0.0], atol=1e-12)
    assert not sp.jump_mask.any()


def test_compound_poisson_jump_count_mean():
    # mean jump count over many streams obeys the Poisson law
    counts = [simulate(CP, 2, seed=11, index=k).jump_mask.sum()
              for k in range(10_000)]
    mean = np.mean(counts)
    assert abs(mean - 5.0) <= 3.0 * np.sqrt(5.0 / 10_000)


def test_levy_jump_increments_are_pure():
    # zero-size jumps keep the stream layout, so the masked increments must
    # vanish and the regular rows must match the jump-free simulation
    kw = dict(drift=0.3, diffusion=0.5, T=1.0)
    with_stubs = simulate(LevyFinite(lam=6.0,
                                     jump_law={"kind": "normal", "scale": 0.0},
                                     **kw), 33, seed=5)
    plain = simulate(LevyFinite(lam=0.0, **kw), 33, seed=5)
    assert with_stubs.jump_mask.sum() > 0
    inserted = with_stubs.times[with_stubs.jump_mask]
    assert not np.isin(np.round(inserted / 1e-9),
                       np.round(with_stubs.grid / 1e-9)).any()
    dv = np.diff(with_stubs.values, axis=0)
    assert np.array_equal(dv[with_stubs.jump_mask[1:]],
                          np.zeros((with_stubs.jump_mask.sum(), 1)))
    assert np.array_equal(with_stubs.values[~with_stubs.jump_mask],
                          plain.values)


def test_levy_path_means_match_drift():
    model = LevyFinite(drift=0.7, diffusion=0.4, lam=3.0,
                       jump_law={"kind": "uniform", "scale": 0.5}, T=2.0)
    ends = [simulate(model, 16, seed=21, index=k).values[-1, 0]
            for k in range(4000)]
    # E X_T = (drift + lam * E[jump]) * T, uniform jumps have mean 0
    se = np.std(ends) / np.sqrt(len(ends))
    assert abs(np.mean(ends) - 1.4) <= 3.5 * se


def test_brownian_mixing_matrix_correlates_coordinates():
    L = np.linalg.cholesky([[1.0, 0.8], [0.8, 1.0]])
    model = BrownianMotion(sigma=L, d=2, T=1.0)
    acc = np.zeros((2, 2))
    n_mc = 600
    for k in range(n_mc):
        sp = simulate(model, 128, seed=31, index=k)
        acc += bracket_final(sp)
    acc /= n_mc
    assert abs(acc[0, 1] - 0.8) < 0.05
    assert abs(acc[0, 0] - 1.0) < 0.05


def test_donsker_steps_have_exact_variance():
    sp = simulate(RandomWalk(law="rademacher"), 65, seed=3)
    dv = np.diff(sp.values, axis=0)
    assert np.allclose(dv ** 2, 1.0 / 64, atol=1e-15)
    assert sp.jump_mask[1:].all()


def test_martingale_clt_bracket_tends_to_identity():
    model = MartingaleCLT(d=2)
    sp = simulate(model, 2049, seed=4)
    B = bracket_final(sp)
    assert abs(B[0, 0] - 1.0) < 1e-12
    assert abs(B[1, 1] - 1.0) < 1e-12
    assert abs(B[0, 1]) < 0.1


def test_model_validation_errors():
    with pytest.raises(ValueError):
        simulate(LevyFinite(diffusion=[[1.0, 2.0], [2.0, 1.0]], d=2), 8, 0)
    with pytest.raises(ValueError):
        simulate(LevyFinite(lam=-1.0), 8, 0)
    with pytest.raises(ValueError):
        simulate(LevyFinite(lam=1.0), 8, 0)
    with pytest.raises(ValueError):
        simulate(BrownianMotion(), 1, 0)
    with pytest.raises(TypeError):
        simulate(object(), 8, 0)


def test_stream_is_order_free():
    a = stream(9, 2).normal(size=4)
    stream(9, 1).normal(size=100)
    b = stream(9, 2).normal(size=4)
    assert np.array_equal(a, b)


# --------------------------------------------------------------------------
# bracket
# --------------------------------------------------------------------------

def test_bracket_of_line_vanishes_like_one_over_n():
    v = np.array([2.0, -1.0])
    traces = []
    for n in (11, 101, 1001):
        p = CadlagPath(np.linspace(0, 1, n), np.outer(np.linspace(0, 1, n), v),
                       jump_mask=np.zeros(n, bool))
        traces.append(np.trace(bracket_final(p)))
    assert abs(traces[0] - 0.5) < 1e-12
    assert abs(traces[1] * 100 / 10 - traces[0]) < 1e-9
    assert traces[2] < traces[1] < traces[0]


def test_bracket_single_jump_exact():
    J = np.array([3.0, -4.0])
    p = CadlagPath([0.0, 0.5, 1.0], [[0.0, 0.0], J, J])
    assert np.array_equal(bracket_final(p), np.outer(J, J))
    run = bracket(p)
    assert run.d == 4
    assert np.array_equal(run.values[-1].reshape(2, 2), np.outer(J, J))
    assert np.array_equal(run.values[0], np.zeros(4))


def test_bracket_of_brownian_is_identity_in_mean():
    model = BrownianMotion(d=2)
    samples = np.array([np.diag(bracket_final(simulate(model, 128, 41, k)))
                        for k in range(500)])
    mean = samples.mean(axis=0)
    se = samples.std(axis=0) / np.sqrt(samples.shape[0])
    assert np.all(np.abs(mean - 1.0) <= 3.0 * se)


# --------------------------------------------------------------------------
# jump truncation
# --------------------------------------------------------------------------

def test_truncate_small_jumps_unchanged():
    sp = simulate(CP, 32, seed=6)
    out = jump_truncate(sp, 1e6)
    assert np.array_equal(out.values, sp.values)
    tiny = jump_truncate(sp, 1e-9)
    dv = np.diff(tiny.values, axis=0)
    sz = np.linalg.norm(dv[tiny.jump_mask[1:]], axis=1)
    assert np.all(sz <= 1e-9 + 1e-15)


def test_truncate_caps_magnitude_keeps_direction():
    J = np.array([2.0, 0.0])
    p = CadlagPath([0.0, 0.5, 1.0], [[0.0, 0.0], J, J + [0.0, 0.1]],
                   jump_mask=[False, True, False])
    out = jump_truncate(p, 1.0)
    dv = np.diff(out.values, axis=0)
    assert np.allclose(dv[0], [1.0, 0.0], atol=1e-14)
    # chord increments pass through untouched
    assert np.allclose(dv[1], [0.0, 0.1], atol=1e-14)
    assert np.allclose(out.values[-1], [1.0, 0.1], atol=1e-14)


def test_truncate_preserves_untouched_jumps_exactly():
    sp = simulate(LevyFinite(lam=8.0, jump_law={"kind": "normal"}, T=1.0),
                  16, seed=7)
    dv = np.diff(sp.values, axis=0)
    sizes = np.linalg.norm(dv[sp.jump_mask[1:]], axis=1)
    delta = float(np.median(sizes))
    out = jump_truncate(sp, delta)
    dv2 = np.diff(out.values, axis=0)
    jr = np.nonzero(sp.jump_mask[1:])[0]
    for r in jr:
        if np.linalg.norm(dv[r]) <= delta:
            assert np.allclose(dv2[r], dv[r], atol=1e-14)
        else:
            assert abs(np.linalg.norm(dv2[r]) - delta) < 1e-12
            cross = np.cross(dv[r], dv2[r]) if sp.d == 2 else 0.0
            assert abs(cross) < 1e-12


def test_truncate_rejects_bad_delta():
    p = CadlagPath([0.0, 1.0], [[0.0], [1.0]])
    with pytest.raises(ValueError):
        jump_truncate(p, 0.0)


# --------------------------------------------------------------------------
# approximation schemes
# --------------------------------------------------------------------------

def test_piecewise_constant_full_grid_is_identity():
    sp = simulate(CP, 16, seed=8)
    out = approximate(sp, sp.times, "piecewise_constant")
    assert np.array_equal(out.times, sp.times)
    assert np.array_equal(out.values, sp.values)
    assert out.jump_mask[1:].all()


def test_two_point_partition_of_line_is_single_chord():
    p = CadlagPath(np.linspace(0, 1, 9), np.linspace(0, 2, 9),
                   jump_mask=np.zeros(9, bool))
    out = approximate(p, [0.0, 1.0], "phi_interp", phi=linear_phi())
    assert out.times.shape == (2,)
    assert np.allclose(out.values[:, 0], [0.0, 2.0])
    assert not out.jump_mask.any()


def test_hoff_cell_has_half_area():
    p = CadlagPath([0.0, 1.0], [[0.0, 0.0], [1.0, 1.0]])
    out = approximate(p, [0.0, 1.0], "phi_interp", phi=hoff_phi())
    assert out.times.shape == (3,)
    assert np.allclose(out.values, [[0, 0], [1, 0], [1, 1]], atol=1e-15)
    end = marcus_lift(out).point(2)
    area = 0.5 * (end.mat - end.mat.T)
    assert abs(area[0, 1] - 0.5) < 1e-12


def test_hoff_axis_order_flips_area_sign():
    p = CadlagPath([0.0, 1.0], [[0.0, 0.0], [1.0, 1.0]])
    out = approximate(p, [0.0, 1.0], "phi_interp", phi=hoff_phi(order=(1, 0)))
    end = marcus_lift(out).point(2)
    assert abs(0.5 * (end.mat - end.mat.T)[0, 1] + 0.5) < 1e-12


def test_partition_off_grid_rejected():
    sp = simulate(BrownianMotion(), 9, seed=9)
    with pytest.raises(ValueError):
        approximate(sp, [0.0, 0.123456, 1.0])
    with pytest.raises(ValueError):
        approximate(sp, [0.0])
    with pytest.raises(ValueError):
        approximate(sp, sp.times, "nope")


def test_piecewise_constant_coarsening_keeps_partition_values():
    sp = simulate(CP, 33, seed=10)
    D = dyadic_partition(sp, 2)
    out = approximate(sp, D, "piecewise_constant")
    assert np.array_equal(out.times, D)
    for t, v in zip(out.times, out.values):
        i = np.searchsorted(sp.times, t)
        assert np.allclose(v, sp.values[min(i, sp.times.size - 1)])


def test_dyadic_partition_shapes_and_errors():
    sp = simulate(BrownianMotion(), 65, seed=11)
    assert dyadic_partition(sp, 0).shape == (2,)
    assert dyadic_partition(sp, 6).shape == (65,)
    with pytest.raises(ValueError):
        dyadic_partition(sp, 7)


# --------------------------------------------------------------------------
# diagnostics
# --------------------------------------------------------------------------

def test_ucv_surrogate_bounded_for_brownian():
    rep = ucv_surrogate(BrownianMotion(d=2), [32, 64, 128], 40, seed=12)
    vals = list(rep["per_n"].values())
    assert rep["sup"] == max(vals)
    # E trace[X]_T = d * T for unit volatility, invariant across meshes
    assert all(abs(v - 2.0) < 0.5 for v in vals)


def test_ucv_surrogate_includes_drift_variation():
    model = LevyFinite(drift=[2.0], diffusion=0.0, lam=0.0, T=1.0)
    rep = ucv_surrogate(model, [8], 3, seed=13)
    # drift variation 2 plus the residual grid bracket m * (2/m)^2
    assert abs(rep["sup"] - (2.0 + 4.0 / 7.0)) < 1e-9


def test_null_array_smallness_decays():
    model = NullArray(LevyFinite(drift=0.2, diffusion=1.0, lam=4.0,
                                 jump_law={"kind": "normal", "scale": 0.5}))
    vals = null_array_check(model, [8, 64, 512], 30, seed=14)
    assert vals[0] > vals[1] > vals[2]
    assert vals[2] < 0.1
