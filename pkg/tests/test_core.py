import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lpsum import core
from lpsum.core import GridFn, MeanParams


def test_ms_mean_arithmetic():
    assert core.ms_mean(MeanParams(1, 0.5, 0.5), 2, 4) == pytest.approx(3.0)


def test_ms_mean_geometric():
    assert core.ms_mean(MeanParams(0, 0.5, 0.5), 4, 9) == pytest.approx(6.0)


def test_ms_mean_zero_annihilates_at_negative_s():
    assert core.ms_mean(MeanParams(-2, 1, 1), 5, 0) == 0.0


def test_ms_mean_zero_annihilates_at_every_s():
    for s in (-np.inf, -1, 0, 0.5, 2, np.inf):
        assert core.ms_mean(MeanParams(s, 0.5, 0.5), 0, 7) == 0.0


def test_ms_mean_min_max_cases():
    assert core.ms_mean(MeanParams(-np.inf, 0.2, 0.9), 3, 7) == 3.0
    assert core.ms_mean(MeanParams(np.inf, 0.2, 0.9), 3, 7) == 7.0


def test_ms_mean_small_s_matches_geometric():
    p0 = core.ms_mean(MeanParams(0, 0.3, 0.7), 4, 9)
    p8 = core.ms_mean(MeanParams(1e-8, 0.3, 0.7), 4, 9)
    assert abs(p8 - p0) <= 1e-6 * p0


def test_ms_mean_vectorized():
    a = np.array([2.0, 0.0, 4.0])
    b = np.array([4.0, 5.0, 16.0])
    out = core.ms_mean(MeanParams(1, 0.5, 0.5), a, b)
    assert np.allclose(out, [3.0, 0.0, 10.0])


@settings(max_examples=200)
@given(s=st.sampled_from([-np.inf, -2.0, -0.5, 0.0, 0.5, 1.0, 3.0, np.inf]),
       a=st.floats(0.01, 50), b=st.floats(0.01, 50),
       da=st.floats(0, 5), db=st.floats(0, 5))
def test_ms_mean_monotone(s, a, b, da, db):
    params = MeanParams(s, 0.4, 0.6)
    assert core.ms_mean(params, a + da, b + db) >= core.ms_mean(params, a, b) - 1e-12


@settings(max_examples=200)
@given(s=st.sampled_from([-np.inf, -2.0, -0.5, 0.5, 1.0, 3.0, np.inf]),
       a=st.floats(0.01, 50), b=st.floats(0.01, 50),
       c=st.floats(0.1, 10), w=st.floats(0.01, 0.99))
def test_ms_mean_homogeneous(s, a, b, c, w):
    params = MeanParams(s, w, 1 - w)
    lhs = core.ms_mean(params, c * a, c * b)
    rhs = c * core.ms_mean(params, a, b)
    assert lhs == pytest.approx(rhs, rel=1e-10)


def test_generalized_holder_inequality():
    # M_a1(u1,v1) * M_a2(u2,v2) >= M_a0(u1 u2, v1 v2) with a shared
    # sub-probability coefficient pair and 1/a0 = 1/a1 + 1/a2.
    rng = np.random.default_rng(42)
    for _ in range(1000):
        a1 = rng.uniform(0.2, 3.0)
        a2 = rng.uniform(max(0.1 - a1, -a1 + 0.1), 3.0)
        if a1 + a2 <= 0 or abs(a2) < 1e-3:
            continue
        inv0 = 1 / a1 + 1 / a2
        if abs(inv0) < 1e-2:
            continue
        a0 = 1 / inv0
        C, D = core.lp_coeffs(rng.uniform(1, 4), rng.uniform(0.1, 0.9),
                              rng.uniform(0.1, 0.9))
        u1, u2, v1, v2 = rng.uniform(0.01, 10, size=4)
        lhs = (core.ms_mean(MeanParams(a1, C, D), u1, v1)
               * core.ms_mean(MeanParams(a2, C, D), u2, v2))
        rhs = core.ms_mean(MeanParams(a0, C, D), u1 * u2, v1 * v2)
        assert lhs - rhs >= -1e-12 * max(1.0, rhs)


def test_lp_coeffs_quarter_powers():
    C, D = core.lp_coeffs(2, 0.5, 0.5)
    assert (C, D) == pytest.approx((0.5, 0.5))


def test_lp_coeffs_p1():
    assert core.lp_coeffs(1, 0.3, 0.7) == pytest.approx((0.7, 0.3))


def test_lp_coeffs_t_zero():
    C, D = core.lp_coeffs(2, 0.0, 0.5)
    assert C == pytest.approx(np.sqrt(0.5))
    assert D == 0.0


def test_lp_coeffs_singular_endpoint():
    with pytest.raises(ValueError):
        core.lp_coeffs(0.5, 0.5, 0.0)
    with pytest.raises(ValueError):
        core.lp_coeffs(0.5, 0.5, 1.0)


@settings(max_examples=300)
@given(p=st.floats(1.0, 6.0), t=st.floats(0.01, 0.99), lam=st.floats(0.01, 0.99))
def test_coeff_sum_at_most_one_for_p_ge_1(p, t, lam):
    C, D = core.lp_coeffs(p, t, lam)
    assert C + D <= 1 + 1e-12


@settings(max_examples=300)
@given(p=st.floats(0.05, 0.95), t=st.floats(0.01, 0.99), lam=st.floats(0.01, 0.99))
def test_coeff_sum_at_least_one_for_p_below_1(p, t, lam):
    C, D = core.lp_coeffs(p, t, lam)
    assert C + D >= 1 - 1e-12


def test_extremal_combination_examples():
    assert core.extremal_coeff_combination(2, 0.5, 1, 1, "sup") == pytest.approx(1.0, abs=1e-9)
    assert core.extremal_coeff_combination(0.5, 0.5, 1, 1, "inf") == pytest.approx(1.0, abs=1e-9)
    assert core.extremal_coeff_combination(3, 0.0, 4, 9, "sup") == pytest.approx(4.0, abs=1e-9)


def test_extremal_combination_matches_power_mean():
    # 1000 random draws per regime against the closed form.
    rng = np.random.default_rng(7)
    regimes = [(lambda: rng.uniform(1, 5), "sup"),
               (lambda: -rng.uniform(0.1, 5), "sup"),
               (lambda: rng.uniform(0.03, 0.97), "inf")]
    for draw_p, mode in regimes:
        for _ in range(1000):
            p = draw_p()
            t = rng.uniform(0.02, 0.98)
            a = rng.uniform(0.05, 20)
            b = rng.uniform(0.05, 20)
            got = core.extremal_coeff_combination(p, t, a, b, mode)
            closed = ((1 - t) * a ** p + t * b ** p) ** (1 / p)
            assert abs(got - closed) <= 1e-9


def test_extremal_combination_mode_validation():
    with pytest.raises(ValueError):
        core.extremal_coeff_combination(2, 0.5, 1, 1, "inf")
    with pytest.raises(ValueError):
        core.extremal_coeff_combination(0.5, 0.5, 1, 1, "sup")
    with pytest.raises(ValueError):
        core.extremal_coeff_combination(-1, 0.0, 1, 1, "sup")


def test_lp_coeffs_bundle():
    c = core.LpCoeffs(2, 0.5, 0.5)
    assert (c.C, c.D) == pytest.approx((0.5, 0.5))
    assert c.q == 2


def test_gridfn_validation():
    with pytest.raises(ValueError):
        GridFn([0.0], [0.0], np.zeros(4))
    with pytest.raises(ValueError):
        GridFn([0.0], [1.0], np.array([0.0, np.nan]))
    with pytest.raises(ValueError):
        GridFn([0.0], [1.0], np.array([np.inf, np.inf]), "base")
    with pytest.raises(ValueError):
        GridFn([0.0], [1.0], np.array([0.0, np.inf]), "density")
    with pytest.raises(ValueError):
        GridFn([0.0], [1.0], np.array([0.0, -1.0]), "density")
    with pytest.raises(ValueError):
        GridFn([0.0], [1.0], np.array([0.0, -np.inf]), "base")


def test_grid_eval_node_and_midpoint():
    f = GridFn([0.0], [1.0], np.array([1.0, 3.0, 5.0]))
    assert core.grid_eval(f, [1.0]) == 3.0
    assert core.grid_eval(f, [0.5]) == 2.0
    assert core.grid_eval(f, [7.0]) == 0.0


def test_grid_eval_base_outside_and_inf_corner():
    f = GridFn([0.0], [1.0], np.array([0.0, 1.0, np.inf]), "base")
    assert core.grid_eval(f, [-1.0]) == np.inf
    assert core.grid_eval(f, [1.5]) == np.inf
    assert core.grid_eval(f, [1.0]) == 1.0


def test_grid_eval_2d_bilinear():
    f = core.grid_from_callable(lambda x, y: 2 * x + 3 * y,
                                [0.0, 0.0], [1.0, 1.0], (3, 3))
    assert core.grid_eval(f, [0.5, 0.5]) == pytest.approx(2.5)
    assert core.grid_eval(f, [1.25, 0.75]) == pytest.approx(2 * 1.25 + 3 * 0.75)


def test_total_mass_indicator():
    h = 4.0 / 4096
    f = core.grid_from_callable(
        lambda x: ((x >= 0) & (x <= 1)).astype(float), [-2.0], [h], (4097,))
    assert abs(core.total_mass(f) - 1.0) <= 2 * h


def test_total_mass_gaussian():
    # exp(-pi x^2) integrates to 1; tails beyond |x|=6 are below 1e-15.
    f = core.grid_from_callable(lambda x: np.exp(-np.pi * x ** 2),
                                [-6.0], [12.0 / 4096], (4097,))
    assert abs(core.total_mass(f) - 1.0) <= 1e-6


def test_total_mass_zeros_and_kind_guard():
    z = GridFn([0.0], [1.0], np.zeros(8))
    assert core.total_mass(z) == 0.0
    with pytest.raises(ValueError):
        core.total_mass(GridFn([0.0], [1.0], np.zeros(8), "base"))


def test_total_mass_2d_product():
    h = 12.0 / 512
    f = core.grid_from_callable(
        lambda x, y: np.exp(-np.pi * (x ** 2 + y ** 2)),
        [-6.0, -6.0], [h, h], (513, 513))
    assert abs(core.total_mass(f) - 1.0) <= 1e-5


def test_resample_identity_bitwise():
    f = core.grid_from_callable(lambda x: np.exp(-x ** 2), [-2.0], [0.25], (17,))
    g = core.resample(f, f.origin, f.spacing, f.shape)
    assert np.array_equal(f.values, g.values)


def test_resample_linear_exact():
    f = core.grid_from_callable(lambda x: 3 * x + 1, [-2.0], [0.5], (9,), "base")
    fine = core.resample(f, [-2.0], [0.25], (17,))
    back = core.resample(fine, [-2.0], [0.5], (9,))
    assert np.allclose(back.values, f.values, atol=1e-12)


def test_resample_gaussian_second_order():
    h = 16.0 / 128
    f = core.grid_from_callable(lambda x: np.exp(-x ** 2), [-8.0], [h], (129,))
    fine = core.resample(f, [-8.0], [h / 2], (257,))
    exact = np.exp(-fine.axes()[0] ** 2)
    assert np.max(np.abs(fine.values - exact)) <= 0.5 * h ** 2


def test_text_roundtrip():
    f = GridFn([0.0, -1.0], [0.5, 0.25], np.array([[0.0, np.inf], [2.5, 1e-300]]),
               "base", {"s": 0.5})
    g = core.grid_fn_from_text(core.grid_fn_to_text(f))
    assert np.array_equal(f.values, g.values)
    assert np.array_equal(f.origin, g.origin)
    assert np.array_equal(f.spacing, g.spacing)
    assert g.kind == "base"
    assert g.meta == {"s": 0.5}


def test_text_rejects_mismatched_count():
    f = GridFn([0.0], [1.0], np.arange(4.0))
    text = core.grid_fn_to_text(f).replace("shape 4", "shape 5")
    with pytest.raises(ValueError):
        core.grid_fn_from_text(text)


def test_text_rejects_missing_field():
    f = GridFn([0.0], [1.0], np.arange(4.0))
    text = "\n".join(line for line in core.grid_fn_to_text(f).splitlines()
                     if not line.startswith("kind"))
    with pytest.raises(ValueError):
        core.grid_fn_from_text(text)


def test_golden_section_quadratic():
    # The argmin is only pinned to the flat plateau of the quadratic
    # (width ~1e-8); the minimum value itself is machine exact.
    x, v = core.golden_section(lambda x: (x - 0.3) ** 2 + 1, 0.0, 1.0)
    assert x == pytest.approx(0.3, abs=1e-6)
    assert v == pytest.approx(1.0, abs=1e-15)


def test_default_box():
    origin, spacing, shape = core.default_box(2)
    assert shape == (257, 257)
    assert origin[0] == -4.0
    assert origin[0] + spacing[0] * (shape[0] - 1) == pytest.approx(4.0)
