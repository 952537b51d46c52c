import numpy as np
import pytest

from pseudodyn import (ConventionCalibration, ModeVector, advance,
                       build_mode_space, calibrate, delta_pair_source,
                       evolution_functional, raw_pair_coefficients,
                       z_exponent)


@pytest.fixture
def ms():
    return build_mode_space(16, 2 * np.pi, 1.0)


def unit_random(space, seed):
    vec = ModeVector.random(space, np.random.default_rng(seed))
    return ModeVector(space, vec.values / np.linalg.norm(vec.values))


def test_raw_pairing_is_quarter_inverse_omega(ms):
    a_raw = raw_pair_coefficients(ms)
    assert np.allclose(a_raw * ms.frequencies, -0.25, rtol=1e-14)


def test_calibration_solves_lambda(ms):
    calib = calibrate(ms)
    # lambda^2 = -2 at h = 1, principal root i*sqrt(2)
    assert complex(calib.lambda_) == pytest.approx(1j * np.sqrt(2.0))
    assert calib.c1 == 1.0 and calib.c2 == 1.0


def test_calibration_lambda_scales_with_hbar():
    ms2 = build_mode_space(8, 2 * np.pi, 1.0, hbar=3.0)
    calib = calibrate(ms2)
    assert complex(calib.lambda_) ** 2 == pytest.approx(-6.0)


def test_forced_identity_lambda_records_gap(ms):
    calib = calibrate(ms, force_lambda=1.0)
    assert complex(calib.lambda_) == 1.0
    assert complex(calib.c2) == pytest.approx(-0.5)
    assert calib.c1 == 1.0


def test_zero_initial_layer(ms):
    calib = calibrate(ms)
    st0 = evolution_functional(ms, ModeVector.zeros(ms), 0.3, calibration=calib)
    st1 = evolution_functional(ms, ModeVector.zeros(ms), 7.0, calibration=calib)
    assert np.allclose(st0.coeffs.b, 0.0)
    assert np.array_equal(st0.coeffs.a, st1.coeffs.a)
    assert st0.coeffs.c == st1.coeffs.c == 0.0


def test_t_zero_matches_direct_substitution(ms):
    v = unit_random(ms, 1)
    st = evolution_functional(ms, v, 0.0)
    zx = z_exponent(ms, delta_pair_source(ms, ModeVector.zeros(ms), v, 0.0, 0.0))
    g = zx.gaussian_in_u(v)
    assert np.array_equal(st.coeffs.a, g.a)
    assert np.array_equal(st.coeffs.b, g.b)
    assert st.coeffs.c == g.c


def test_b_phase_law(ms):
    calib = calibrate(ms)
    v = ModeVector.basis(ms, 2, 1.0)
    st0 = evolution_functional(ms, v, 0.0, calibration=calib)
    t = 2.7
    st = evolution_functional(ms, v, t, calibration=calib)
    idx = np.flatnonzero(st0.coeffs.b)
    assert idx.size == 1  # basis layer excites the paired mode only
    ratio = st.coeffs.b[idx[0]] / st0.coeffs.b[idx[0]]
    omega = ms.frequencies[idx[0]]
    assert ratio == pytest.approx(np.exp(-1j * omega * t), rel=1e-14)


def test_a_pairing_support_and_constancy(ms):
    calib = calibrate(ms)
    st = evolution_functional(ms, unit_random(ms, 2), 1.0, calibration=calib)
    a = st.coeffs.a
    mask = np.zeros_like(a, dtype=bool)
    mask[np.arange(ms.num_modes), ms.negation] = True
    assert np.all(a[~mask] == 0.0)
    pair = a[np.arange(ms.num_modes), ms.negation]
    assert np.allclose(2.0 * pair * ms.frequencies, 1.0, atol=1e-14)


def test_negative_time_rejected(ms):
    with pytest.raises(ValueError):
        evolution_functional(ms, ModeVector.zeros(ms), -0.1)


def test_advance_identity_and_phase(ms):
    calib = calibrate(ms)
    st = evolution_functional(ms, unit_random(ms, 3), 0.5, calibration=calib)
    same = advance(st, 0.0)
    assert np.array_equal(same.coeffs.b, st.coeffs.b)
    stepped = advance(st, 0.5)
    k = ms.index_of(0)  # omega = 1 mode
    factor = stepped.coeffs.b[k] / st.coeffs.b[k]
    assert factor == pytest.approx(np.cos(0.5) - 1j * np.sin(0.5), rel=1e-14)


def test_advance_composes_additively(ms):
    calib = calibrate(ms)
    st = evolution_functional(ms, unit_random(ms, 4), 0.0, calibration=calib)
    two_step = advance(advance(st, 0.75), 1.5)
    one_step = advance(st, 2.25)
    assert np.max(np.abs(two_step.coeffs.b - one_step.coeffs.b)) < 1e-15
    assert two_step.t == pytest.approx(one_step.t)


def test_advance_rejects_backward(ms):
    st = evolution_functional(ms, ModeVector.zeros(ms), 1.0)
    with pytest.raises(ValueError):
        advance(st, -0.5)


def test_calibration_validation():
    with pytest.raises(ValueError):
        ConventionCalibration(lambda_=0.0)
    with pytest.raises(ValueError):
        ConventionCalibration(lambda_=1.0, sigma=3)


def test_state_record_serialization(ms):
    calib = calibrate(ms)
    st = evolution_functional(ms, unit_random(ms, 5), 1.25, calibration=calib)
    rec = st.to_record()
    assert rec["t"] == 1.25
    assert rec["calib"]["lambda_im"] == pytest.approx(np.sqrt(2.0))
    assert rec["calib"]["sigma"] == 1
    assert len(rec["b_re"]) == ms.num_modes
