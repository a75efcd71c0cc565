import math
import time

import numpy as np
import pytest
import sympy as sp
from hypothesis import given
from hypothesis import strategies as st
from scipy.optimize import brentq

from oracles import condition_b_direct, dense_roots, imag_part, real_part
from platoon_headway import ControllerGains, Mode, QuasiPolyParams, RootList, certify_internal, condition_b
from platoon_headway.internal_stability import (
    RESIDUAL_TOL,
    BracketError,
    bound_checks,
    condition_b_curve,
    find_roots_imag,
    find_roots_real,
    first_pair_bound,
    imag_brackets,
    interlacing_check,
    quasipoly_parts,
    real_brackets,
    root_count_window,
    window_counts,
)
from platoon_headway.synthesis import gain_region, min_headway, sample_feasible_gains, to_effective

PI = math.pi


@pytest.fixture
def params(cacc_gains):
    return QuasiPolyParams.from_gains(cacc_gains)


def test_normalised_parameters(params):
    assert round(params.kp_bar, 4) == 0.0150
    assert round(params.gamma_bar, 4) == 0.3710
    assert params.tau == 0.5


def test_parameters_must_be_positive():
    with pytest.raises(ValueError):
        QuasiPolyParams(gamma_bar=0.0, kp_bar=0.01, tau=0.5)
    with pytest.raises(ValueError):
        QuasiPolyParams(gamma_bar=0.1, kp_bar=-0.01, tau=0.5)


def test_caccplus_parameters_use_scaled_gains(caccplus_gains):
    p = QuasiPolyParams.from_gains(caccplus_gains)
    assert p.kp_bar == pytest.approx(0.25 * 0.03)
    assert p.gamma_bar == pytest.approx(0.5 * (0.618 + 0.64 * 0.03))


def test_quasipoly_parts_reference_points(params):
    assert quasipoly_parts(params, 0.0) == (params.kp_bar, 0.0)
    dr, di = quasipoly_parts(params, PI)
    assert dr == pytest.approx(params.kp_bar + PI**2, rel=1e-15)
    assert di == pytest.approx(params.gamma_bar * PI, abs=1e-14)
    dr, di = quasipoly_parts(params, PI / 2)
    assert dr == pytest.approx(params.kp_bar, abs=1e-15)
    assert di == pytest.approx(params.gamma_bar * PI / 2 - PI**2 / 4, rel=1e-15)
    arr = quasipoly_parts(params, np.array([0.0, 1.0]))
    assert arr[0].shape == (2,)


def test_bound_checks(params):
    assert bound_checks(params) == (True, True)
    assert bound_checks(QuasiPolyParams(gamma_bar=0.3, kp_bar=4 / 27, tau=1.0)) == (False, True)
    assert bound_checks(QuasiPolyParams(gamma_bar=0.5, kp_bar=0.01, tau=1.0)) == (True, True)
    # gamma on the upper edge of the first half-plane with k_a = -> 1.2/(2 tau0) gives gamma_bar = 0.6
    g = ControllerGains(k_a=0.0, k_v=1.0, k_p=0.2, h_w=1.0, tau0=0.5)
    assert bound_checks(QuasiPolyParams.from_gains(g)) == (True, False)


def test_brackets_layout():
    real = real_brackets(1)
    assert [(lo, hi) for lo, hi, *_ in real] == pytest.approx([(0, PI / 4), (PI / 4, PI / 2), (3 * PI / 2, 7 * PI / 4)])
    imag = imag_brackets(1)
    assert [(lo, hi) for lo, hi, *_ in imag] == pytest.approx([(0, PI / 4), (3 * PI / 4, PI), (2 * PI, 2 * PI + PI / 4)])
    assert len(real_brackets(3)) == len(imag_brackets(3)) == 7


def test_first_roots_match_bisection_oracle(params):
    real = find_roots_real(params, 3)
    imag = find_roots_imag(params, 3)
    r1 = brentq(lambda t: params.kp_bar - t**2 * math.cos(t), 1e-6, PI / 4, xtol=1e-15)
    i2 = brentq(lambda t: params.gamma_bar - t * math.sin(t), 1e-6, PI / 4, xtol=1e-15)
    assert real[0] == pytest.approx(r1, abs=1e-12)
    assert round(real[0], 4) == 0.1229
    assert imag[0] == 0.0
    assert imag[1] == pytest.approx(i2, abs=1e-12)
    assert round(imag[1], 4) == 0.6299
    assert PI / 4 < real[1] < PI / 2
    assert 3 * PI / 4 < imag[2] < PI


def test_roots_match_dense_scan(params):
    real = find_roots_real(params, 3)
    imag = find_roots_imag(params, 3)
    hi = 6 * PI + PI / 4
    ref_real = dense_roots(lambda t: real_part(params.kp_bar, t), 1e-9, hi)
    ref_imag = dense_roots(lambda t: imag_part(params.gamma_bar, t) / np.maximum(t, 1e-300), 1e-9, hi)
    assert real == pytest.approx(ref_real, abs=1e-11)
    assert imag[1:] == pytest.approx(ref_imag, abs=1e-11)


@pytest.mark.parametrize("l_max", [1, 2, 3, 5])
def test_roots_inside_brackets_with_small_residual(params, l_max):
    real = find_roots_real(params, l_max)
    imag = find_roots_imag(params, l_max)
    assert len(real) == 2 * l_max + 1
    assert len(imag) == 2 * l_max + 2
    for root, (lo, hi, *_) in zip(real, real_brackets(l_max)):
        assert lo < root < hi
        assert abs(quasipoly_parts(params, root)[0]) < RESIDUAL_TOL
    for root, (lo, hi, *_) in zip(imag[1:], imag_brackets(l_max)):
        assert lo < root < hi
        assert abs(quasipoly_parts(params, root)[1]) < RESIDUAL_TOL


def test_bracket_error_outside_regime():
    wild = QuasiPolyParams(gamma_bar=3.0, kp_bar=2.0, tau=1.0)
    with pytest.raises(BracketError) as info:
        find_roots_real(wild, 1)
    assert info.value.part == "real-part"
    with pytest.raises(BracketError):
        find_roots_imag(wild, 1)


def test_interlacing(params):
    rl = RootList(find_roots_real(params, 3), find_roots_imag(params, 3), 3)
    assert interlacing_check(rl)
    swapped_real = [rl.imag[1]] + rl.real[1:]
    swapped_imag = [0.0, rl.real[0]] + rl.imag[2:]
    assert not interlacing_check(RootList(swapped_real, swapped_imag, 3))
    assert not interlacing_check(RootList([], [0.0], 0))
    assert not interlacing_check(RootList(rl.real, rl.imag[1:], 3))


def test_first_pair_bound(params):
    r_hat, i_hat = first_pair_bound(params)
    assert round(1 - math.sqrt(1 - 2 * params.kp_bar), 4) == 0.0151
    assert 1 - math.sqrt(1 - 2 * params.kp_bar) < params.gamma_bar
    real = find_roots_real(params, 1)
    imag = find_roots_imag(params, 1)
    assert real[0] < r_hat
    assert imag[1] > i_hat


def test_window_counts(params):
    rl = RootList(find_roots_real(params, 3), find_roots_imag(params, 3), 3)
    assert window_counts(rl, 0)[0] == 2
    assert window_counts(rl, 1) == (6, 6)
    assert window_counts(rl, 2) == (10, 10)
    assert window_counts(rl, 3) == (14, 14)
    assert all(root_count_window(rl, l) for l in (1, 2, 3))
    with pytest.raises(ValueError):
        root_count_window(rl, 0)
    with pytest.raises(ValueError):
        root_count_window(rl, 4)
    short = RootList(rl.real[:-1], rl.imag, 3)
    assert not root_count_window(short, 3)


def test_condition_b_matches_symbolic_derivative():
    w, tau, gamma, kp = sp.symbols("omega tau gamma k_p", positive=True)
    theta = tau * w
    dr = tau**2 * kp - theta**2 * sp.cos(theta)
    di = tau * gamma * theta - theta**2 * sp.sin(theta)
    expr = sp.diff(di, w) * dr - di * sp.diff(dr, w)
    g = ControllerGains(k_a=0.5, k_v=0.7, k_p=0.06, h_w=0.7, tau0=0.5)
    f = sp.lambdify((w, tau, gamma, kp), expr, "math")
    for omega in (0.0, 0.3, 1.7, 5.0, 19.0):
        for t in (0.1, 0.5):
            expected = f(omega, t, g.gamma, g.k_p)
            assert condition_b(g, t, omega) == pytest.approx(expected, rel=1e-9, abs=1e-15)
            assert condition_b(g, t, omega) == pytest.approx(
                t**4 * condition_b_direct(g.gamma, g.k_p, t, omega), rel=1e-9, abs=1e-15
            )


def test_condition_b_at_zero(cacc_gains):
    value = condition_b(cacc_gains, 0.5, 0.0)
    assert value == 0.5**4 * cacc_gains.gamma * cacc_gains.k_p
    assert value == pytest.approx(0.0625 * 0.742 * 0.06, rel=1e-14)
    assert round(value, 6) == pytest.approx(2.783e-3, abs=1e-6)


def test_condition_b_formula_vanishes_without_gamma():
    # gamma = 0 is outside the gain invariants, so evaluate the expression directly
    assert condition_b_direct(0.0, 0.06, 0.5, 0.0) == 0.0


def test_condition_b_curve_positive(cacc_gains):
    curve = condition_b_curve(cacc_gains, 0.5, omega_max=20.0, n=4001)
    assert curve.omega[0] == 0.0 and curve.omega[-1] == 20.0
    assert curve.min_value > 0


def test_certify_reference_gains(cacc_gains, caccplus_gains, acc_gains):
    for g in (cacc_gains, caccplus_gains, acc_gains):
        report = certify_internal(g, 0.5, 3)
        assert report.stable and report.verdict == "stable"
        assert report.interlaced and report.count_check and report.kp_ok and report.gamma_ok
        assert report.condition_b_value > 0
        assert report.first_pair_margin > 0
        doc = report.to_dict()
        assert doc["verdict"] == "stable" and len(doc["real_roots"]) == 7


def test_certify_outside_regime_is_not_certified():
    g = ControllerGains(k_a=0.0, k_v=1.0, k_p=0.2, h_w=1.0, tau0=0.5)
    report = certify_internal(g)
    assert report.verdict == "not-certified"
    assert not report.stable
    assert report.roots is None
    assert report.notes


def test_certify_defaults_to_design_delay(cacc_gains):
    assert certify_internal(cacc_gains).params.tau == 0.5
    assert certify_internal(cacc_gains, tau=0.2).params.tau == 0.2


def test_certify_runtime(cacc_gains):
    start = time.perf_counter()
    certify_internal(cacc_gains, 0.5, 3)
    assert time.perf_counter() - start < 1.0


@given(
    k_a=st.sampled_from([0.0, 0.2, 0.5, 0.8]),
    r=st.sampled_from([1, 1, 2, 3]),
    factor=st.floats(1.02, 2.5),
    tau0=st.floats(0.05, 1.5),
    seed=st.integers(0, 2**31),
    tau_frac=st.floats(0.05, 1.0),
)
def test_feasible_gains_certify_stable(k_a, r, factor, tau0, seed, tau_frac):
    if r > 1:
        k_a = k_a / (r + 1)
    mode = Mode.CACC_PLUS if r > 1 else (Mode.ACC if k_a == 0 else Mode.CACC)
    g = ControllerGains(k_a=k_a, k_v=1, k_p=1, h_w=min_headway(mode, k_a, r, tau0) * factor, tau0=tau0, r=r)
    for kv, kp in sample_feasible_gains(gain_region(g), 2, seed):
        trial = g.replace(k_v=kv, k_p=kp)
        for tau in (tau0, tau0 * tau_frac):
            report = certify_internal(trial, tau, 3)
            assert report.kp_ok and report.gamma_ok
            assert report.stable, report.to_dict()
            r_hat, i_hat = first_pair_bound(report.params)
            # the gap to the first estimate is O(kp_bar^2) relative, so allow for rounding in the root itself
            assert report.roots.real[0] < r_hat * (1 + 1e-12)
            assert report.roots.imag[1] > i_hat
            eff = to_effective(trial)
            assert report.condition_b_value == tau**4 * eff.gamma * eff.k_p
