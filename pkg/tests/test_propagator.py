import numpy as np
import pytest

from pseudodyn import (KernelConvention, PoleResolutionError,
                       feynman_kernel_closed, feynman_kernel_quadrature,
                       richardson_kernel, truncation_tail)


def test_closed_form_frozen_values():
    assert feynman_kernel_closed(1.0, 0.0) == pytest.approx(-0.5j)
    assert feynman_kernel_closed(2.0, 0.0) == pytest.approx(-0.25j)
    # -(i/2) e^{-2i}
    assert feynman_kernel_closed(1.0, 2.0) == pytest.approx(
        -0.45464871341284085 + 0.20807341827357119j)


def test_closed_form_matches_quadrature_oracle():
    # each closed value is certified by the regularized integral,
    # extrapolated in eps
    for omega, tau in [(1.0, 0.0), (2.0, 0.0), (1.0, 2.0)]:
        oracle = richardson_kernel(omega, tau, (1e-2, 1e-3, 1e-4), 1e3 * omega)
        closed = feynman_kernel_closed(omega, tau)
        assert abs(oracle - closed) / abs(closed) < 1e-5


def test_tau_sign_symmetry_exact():
    for omega in (0.5, 1.0, 3.7):
        for tau in (0.3, 1.0, 12.0):
            assert feynman_kernel_closed(omega, tau) == feynman_kernel_closed(omega, -tau)


def test_unimodular_scale():
    rng = np.random.default_rng(1)
    for omega, tau in zip(rng.uniform(0.2, 5, 16), rng.uniform(-9, 9, 16)):
        assert abs(feynman_kernel_closed(omega, tau)) == pytest.approx(1 / (2 * omega))


def test_sigma_has_no_effect_on_closed_form():
    plus = feynman_kernel_closed(1.3, 0.7, KernelConvention(sigma=1))
    minus = feynman_kernel_closed(1.3, 0.7, KernelConvention(sigma=-1))
    assert plus == minus


def test_omega_must_be_positive():
    with pytest.raises(ValueError):
        feynman_kernel_closed(0.0, 1.0)
    with pytest.raises(ValueError):
        feynman_kernel_closed(-1.0, 1.0)


def test_invalid_sigma_rejected():
    with pytest.raises(ValueError):
        KernelConvention(sigma=2)


def test_quadrature_small_cutoff_example():
    # at E_cut = 200 the truncated integral carries a ~1.6e-3 tail of its
    # own; the estimate is within 1e-3 of the closed form once that
    # self-reported truncation is accounted for
    q = feynman_kernel_quadrature(1.0, 0.0, 1e-3, 200.0)
    tail = truncation_tail(1.0, 0.0, 200.0)
    assert abs(q + tail - (-0.5j)) < 1e-3
    assert abs(q - (-0.5j)) < abs(tail) + 1e-3


def test_quadrature_matches_closed_at_acceptance_settings():
    for omega in (0.5, 1.0, 2.0):
        closed = feynman_kernel_closed(omega, 0.7)
        q = feynman_kernel_quadrature(omega, 0.7, 1e-4, 1e3 * omega)
        assert abs(q - closed) / abs(closed) < 1e-3


def test_eps_refinement_monotone_against_truncated_reference():
    # compare against closed form plus the (eps-independent) truncation
    # remainder, so only the eps bias is being refined
    reference = feynman_kernel_closed(1.0, 0.0) - truncation_tail(1.0, 0.0, 1000.0)
    errs = [abs(feynman_kernel_quadrature(1.0, 0.0, eps, 1000.0) - reference)
            for eps in (1e-2, 1e-3, 1e-4)]
    assert errs[0] > errs[1] > errs[2]


def test_under_resolved_grid_raises():
    with pytest.raises(PoleResolutionError):
        feynman_kernel_quadrature(1.0, 0.0, 1e-3, 200.0, n_points=1000)


def test_richardson_needs_two_eps():
    with pytest.raises(ValueError):
        richardson_kernel(1.0, 0.0, eps_values=(1e-3,))


def test_e_cut_validated():
    with pytest.raises(ValueError):
        feynman_kernel_quadrature(1.0, 0.0, 1e-3, 5.0)
