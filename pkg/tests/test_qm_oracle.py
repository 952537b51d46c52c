import numpy as np
import pytest

from pseudodyn import (BoundaryFactors, QMGrid, compare_kernels,
                       cross_coefficient_genfunc, cross_coefficient_solver,
                       genfunc_kernel_value, ground_state,
                       kernel_matrix_genfunc, kernel_matrix_solver,
                       propagate_driven)
from pseudodyn.qm_oracle import qm_drive_from_csv


@pytest.fixture(scope="module")
def grid():
    return QMGrid(q_min=-12.0, q_max=12.0, n_points=512, dt=1e-3, omega=1.0)


@pytest.fixture(scope="module")
def vacuum(grid):
    return ground_state(grid)


@pytest.fixture(scope="module")
def boundary(grid, vacuum):
    return BoundaryFactors(left=vacuum, right=vacuum.copy())


def test_grid_validation():
    with pytest.raises(ValueError):
        QMGrid(1.0, -1.0, 512, 1e-3, 1.0)
    with pytest.raises(ValueError):
        QMGrid(-1.0, 1.0, 512, 1e-3, -1.0)
    with pytest.raises(ValueError):
        QMGrid(-1.0, 1.0, 512, 0.5, 1.0)  # dt > 0.01/omega


def test_ground_state_value_at_origin(grid, vacuum):
    at0 = vacuum[np.argmin(np.abs(grid.q))]
    assert at0 == pytest.approx(np.pi**-0.25, abs=1e-9)


def test_ground_state_second_moment(grid, vacuum):
    q2 = np.sum(np.abs(vacuum)**2 * grid.q**2) * grid.dq
    assert q2 == pytest.approx(0.5, abs=1e-9)


def test_ground_state_normalized(grid, vacuum):
    assert grid.norm(vacuum) == pytest.approx(1.0, abs=1e-12)


def test_free_evolution_eigenphase(grid, vacuum):
    psi = propagate_driven(vacuum.astype(complex), grid, 0.0, 1.0)
    assert np.max(np.abs(psi - np.exp(-0.5j) * vacuum)) < 1e-6


def test_unitarity_with_drive(grid, vacuum):
    tt = np.linspace(0.0, 1.0, 1001)
    psi = propagate_driven(vacuum.astype(complex), grid, 0.0, 1.0,
                           0.7 * np.sin(3.0 * tt))
    assert grid.norm(psi) == pytest.approx(1.0, abs=1e-10)


def test_dt_refinement_second_order(vacuum):
    errs = []
    for dt in (4e-3, 2e-3):
        g = QMGrid(-12.0, 12.0, 512, dt, 1.0)
        psi = propagate_driven(vacuum.astype(complex), g, 0.0, 1.0)
        errs.append(np.max(np.abs(psi - np.exp(-0.5j) * vacuum)))
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.3)


def test_adiabatic_constant_drive_displacement():
    f = 0.5
    g = QMGrid(-10.0, 10.0, 512, 5e-3, 1.0)
    psi0 = ground_state(g).astype(complex)
    t_ramp, t_end = 20.0, 30.0
    tt = np.linspace(0.0, t_end, 6001)
    drive = f * np.where(tt < t_ramp, np.sin(0.5 * np.pi * tt / t_ramp)**2, 1.0)
    psi = propagate_driven(psi0, g, 0.0, t_end, drive)
    q_mean = np.sum(np.abs(psi)**2 * g.q) * g.dq
    assert q_mean == pytest.approx(f / 1.0**2, abs=1e-2)


def test_boundary_leak_detected():
    g = QMGrid(-4.0, 4.0, 256, 1e-3, 1.0)
    psi0 = ground_state(g) * np.exp(-3j * g.q)  # kicked hard, swings to q ~ 3
    with pytest.raises(RuntimeError, match="boundary leak"):
        propagate_driven(psi0, g, 0.0, 2.0)


def test_drive_sampled_finer_than_dt_rejected(grid, vacuum):
    # dt must not exceed the drive sample step
    with pytest.raises(ValueError):
        propagate_driven(vacuum.astype(complex), grid, 0.0, 1.0, np.zeros(10001))


def test_single_sample_drive_rejected(grid, vacuum):
    with pytest.raises(ValueError):
        propagate_driven(vacuum.astype(complex), grid, 0.0, 1.0, np.ones(1))


def test_coincident_kernel_matches_analytic_gaussian(grid, boundary):
    p0s = np.linspace(-2.0, 2.0, 16)
    ps = np.linspace(-2.0, 2.0, 16)
    lhs = kernel_matrix_solver(grid, boundary, p0s, ps, 0.0, 0.0)
    analytic = np.exp(-(ps[None, :] - p0s[:, None])**2 / 4.0)
    assert np.max(np.abs(lhs - analytic)) < 1e-6


def test_coincident_genfunc_equals_gaussian():
    for p0 in (-1.0, 0.0, 0.7):
        for p in (-0.3, 0.0, 1.2):
            val = genfunc_kernel_value(p0, p, 1.0, 1.0, 0.0, 0.0)
            assert val == pytest.approx(np.exp(-(p - p0)**2 / 4.0), rel=1e-12)
    assert genfunc_kernel_value(0.0, 0.0, 1.0, 1.0, 0.0, 0.0) == pytest.approx(1.0)


def test_coincident_diagonal_constant(grid, boundary):
    ps = np.linspace(-2.0, 2.0, 11)
    m = kernel_matrix_solver(grid, boundary, ps, ps, 0.0, 0.0)
    diag = np.diag(m)
    assert np.max(np.abs(diag - diag.mean())) < 1e-8


def test_empty_momentum_grids(grid, boundary):
    m = kernel_matrix_solver(grid, boundary, [], [], 0.0, 1.0)
    assert m.shape == (0, 0)


def test_band_limit_enforced(grid, boundary):
    with pytest.raises(ValueError):
        kernel_matrix_solver(grid, boundary, [grid.p_band_limit * 1.5], [0.0],
                             0.0, 0.0)


def test_kernel_identity_drive_free_gap(grid, boundary):
    p0s = np.linspace(-2.5, 2.5, 12)
    ps = np.linspace(-2.5, 2.5, 12)
    lhs = kernel_matrix_solver(grid, boundary, p0s, ps, 0.0, 1.0)
    rhs = kernel_matrix_genfunc(p0s, ps, 1.0, 1.0, 0.0, 1.0)
    report = compare_kernels(lhs, rhs, 1e-2)
    assert report.passed
    assert report.numeric_spread < 1e-4
    # the up-to-constant factor is the vacuum phase over the window
    assert report.params["mean_ratio"] == pytest.approx(np.exp(-0.5j), rel=1e-4)


def test_kernel_identity_with_drive(grid, boundary):
    p0s = np.linspace(-2.0, 2.0, 8)
    ps = np.linspace(-2.0, 2.0, 8)
    tt = np.linspace(0.0, 2.0, 2001)
    drive = np.sin(tt)
    lhs = kernel_matrix_solver(grid, boundary, p0s, ps, 0.0, 2.0, drive)
    rhs = kernel_matrix_genfunc(p0s, ps, 1.0, 1.0, 0.0, 2.0, drive)
    report = compare_kernels(lhs, rhs, 1e-2)
    assert report.passed


def test_compare_kernels_mismatched_omega_fails(grid, boundary):
    p0s = np.linspace(-2.0, 2.0, 8)
    ps = np.linspace(-2.0, 2.0, 8)
    lhs = kernel_matrix_solver(grid, boundary, p0s, ps, 0.0, 0.0)
    rhs = kernel_matrix_genfunc(p0s, ps, 1.3, 1.0, 0.0, 0.0)
    report = compare_kernels(lhs, rhs, 1e-3)
    assert not report.passed
    assert report.numeric_spread > 1e-2


def test_compare_kernels_inconclusive_when_all_excluded():
    lhs = np.full((3, 3), 1e-12 + 0j)
    rhs = np.ones((3, 3), dtype=complex)
    report = compare_kernels(lhs, rhs, 1e-3)
    assert report.verdict == "inconclusive"
    assert not report.passed


def test_compare_kernels_shape_mismatch():
    with pytest.raises(ValueError):
        compare_kernels(np.ones((2, 2)), np.ones((2, 3)), 1e-3)


def test_cross_coefficient_matches_closed_form(grid, boundary):
    got = cross_coefficient_solver(grid, boundary, 1.0, 1.0, 0.0, 0.8)
    want = cross_coefficient_genfunc(1.0, 1.0, 1.0, 1.0, 0.0, 0.8)
    assert got == pytest.approx(want, abs=1e-7)


def test_cross_phase_ratio_between_horizons(grid, boundary):
    c_a = cross_coefficient_solver(grid, boundary, 1.0, 1.0, 0.0, 0.5)
    c_b = cross_coefficient_solver(grid, boundary, 1.0, 1.0, 0.0, 1.0)
    assert c_b / c_a == pytest.approx(np.exp(-0.5j), abs=1e-6)


def test_qm_drive_csv(tmp_path):
    path = tmp_path / "drive.csv"
    path.write_text("t,value\n0.0,0.0\n0.5,0.25\n1.0,0.5\n")
    t, vals = qm_drive_from_csv(path)
    assert np.allclose(t, [0.0, 0.5, 1.0])
    assert np.allclose(vals, [0.0, 0.25, 0.5])
    bad = tmp_path / "bad.csv"
    bad.write_text("t,value\n0.0,0.0\n0.3,0.25\n1.0,0.5\n")
    with pytest.raises(ValueError):
        qm_drive_from_csv(bad)
