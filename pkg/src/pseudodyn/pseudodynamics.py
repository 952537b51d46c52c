"""Evolution functionals from delta-pair sources, and convention calibration.

Substituting the two-layer source (final layer u at time T, initial layer
-v at time 0) into the free generating functional and reading the result
as a functional of u gives a complex Gaussian

    Phi(T, u) = exp( u^T A u + b(T).u + c ),

whose coefficients obey two exact laws: A is independent of T with
A_{k,-k} * omega_k constant across modes, and b_k(T) = b_k(0) e^{-i omega_k T}.
Advancing T is therefore a pure phase rotation of b (a semigroup).

The raw kernel normalization does not satisfy the target first-order
evolution equation

    i dPhi/dT = sum_k u_k ( omega_k d/du_k - u_{-k} ) Phi

as written; a single global rescaling u -> lambda*u closes the gap.
``calibrate`` solves for lambda algebraically from the raw coefficients
(lambda^2 * 2 omega_k A_{k,-k} = 1, mode-independent by the 1/omega law) and
records the constants (c1, c2) actually achieved in
i dPhi/dT = sum_k u_k (c1 omega_k d/du_k - c2 u_{-k}) Phi.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .gaussian import GaussianCoefficients, rescale
from .modespace import ModeSpace, ModeVector
from .propagator import DEFAULT_CONVENTION, KernelConvention
from .sources import delta_pair_source, z_exponent

__all__ = ["ConventionCalibration", "EvolutionState", "evolution_functional",
           "advance", "calibrate", "raw_pair_coefficients"]


@dataclass(frozen=True)
class ConventionCalibration:
    """Global rescaling lambda and transform sign, with the achieved constants.

    (c1, c2) = (1, 1) after a successful calibration; a forced lambda records
    whatever constants the first-order equation then actually carries.
    """

    lambda_: complex
    sigma: int = 1
    c1: complex = 1.0
    c2: complex = 1.0

    def __post_init__(self):
        if self.lambda_ == 0:
            raise ValueError("lambda must be nonzero")
        if self.sigma not in (1, -1):
            raise ValueError("sigma must be +1 or -1")

    def to_record(self) -> dict:
        return {
            "lambda_re": complex(self.lambda_).real,
            "lambda_im": complex(self.lambda_).imag,
            "sigma": self.sigma,
            "c1": complex(self.c1).real if complex(self.c1).imag == 0 else
                  [complex(self.c1).real, complex(self.c1).imag],
            "c2": complex(self.c2).real if complex(self.c2).imag == 0 else
                  [complex(self.c2).real, complex(self.c2).imag],
        }


@dataclass(frozen=True)
class EvolutionState:
    """Gaussian coefficients of Phi(T, .) together with their provenance."""

    space: ModeSpace
    t: float
    v_hat: ModeVector
    coeffs: GaussianCoefficients
    calibration: ConventionCalibration

    def to_record(self) -> dict:
        rec = self.coeffs.to_record()
        rec["t"] = self.t
        rec["calib"] = self.calibration.to_record()
        return rec


def raw_pair_coefficients(space: ModeSpace,
                          conv: KernelConvention = DEFAULT_CONVENTION) -> np.ndarray:
    """Uncalibrated u-u pairing coefficients a_k (proportional to 1/omega_k)."""
    zero = ModeVector.zeros(space)
    zx = z_exponent(space, delta_pair_source(space, zero, zero, 0.0, 0.0), conv)
    return zx.uu


def evolution_functional(space: ModeSpace, v_hat: ModeVector, t: float,
                         conv: KernelConvention = DEFAULT_CONVENTION,
                         calibration: ConventionCalibration | None = None) -> EvolutionState:
    """Build Phi(T, .) from the initial layer data v at T0 = 0.

    Negative T is rejected: the kernel's |tau| would silently fold it onto
    +|T|, and the two boundary weights are not orientation-symmetric.
    """
    if t < 0:
        raise ValueError("t must be >= 0; backward construction is not supported")
    if calibration is None:
        calibration = ConventionCalibration(lambda_=1.0, sigma=conv.sigma,
                                            c1=1.0, c2=-1.0 / (2.0 * space.hbar))
    if calibration.sigma != conv.sigma:
        raise ValueError("calibration and kernel convention disagree on sigma")
    zx = z_exponent(space, delta_pair_source(space, ModeVector.zeros(space),
                                             v_hat, t, 0.0), conv)
    g = rescale(zx.gaussian_in_u(v_hat), calibration.lambda_)
    return EvolutionState(space, float(t), v_hat, g, calibration)


def advance(state: EvolutionState, dt: float) -> EvolutionState:
    """Rotate b by e^{-i omega dt}; A and c are exact invariants of T."""
    if dt < 0:
        raise ValueError("dt must be >= 0; backward evolution is not supported")
    phase = np.exp(-1j * state.space.frequencies * dt)
    g = GaussianCoefficients(state.coeffs.a, phase * state.coeffs.b, state.coeffs.c)
    return EvolutionState(state.space, state.t + dt, state.v_hat, g, state.calibration)


def calibrate(space: ModeSpace, conv: KernelConvention = DEFAULT_CONVENTION,
              force_lambda: complex | None = None,
              spread_tol: float = 1e-12) -> ConventionCalibration:
    """Solve for the global rescaling closing the first-order equation.

    Per mode the requirement is 2 (lambda^2 a_k) omega_k = 1 with a_k the raw
    pairing coefficient; a_k * omega_k must be mode-independent, so a spread
    beyond spread_tol indicates a kernel bug and raises.  The principal root
    of lambda^2 is taken.  With force_lambda the achieved constants are
    recorded instead of enforced.
    """
    a_raw = raw_pair_coefficients(space, conv)
    w = space.frequencies
    lam2 = 1.0 / (2.0 * a_raw * w)
    center = lam2.mean()
    spread = float(np.max(np.abs(lam2 - center))) / abs(center)
    if spread > spread_tol:
        raise RuntimeError(
            f"lambda^2 is mode-dependent (relative spread {spread:.3e}); "
            "a_k * omega_k should be constant"
        )
    if force_lambda is not None:
        lam = complex(force_lambda)
        if lam == 0:
            raise ValueError("forced lambda must be nonzero")
    else:
        lam = complex(np.sqrt(center))
    # achieved constants: c1 is structural (i db/dT = omega b holds for any
    # lambda); c2 is the calibrated quadratic coefficient 2 omega lambda^2 a.
    c2_modes = 2.0 * w * (lam * lam) * a_raw
    c2 = complex(c2_modes.mean())
    calib = ConventionCalibration(lambda_=lam, sigma=conv.sigma, c1=1.0, c2=c2)
    if force_lambda is None:
        resid = float(np.max(np.abs(c2_modes - 1.0)))
        if resid > spread_tol:
            raise RuntimeError(
                f"calibration failed to close the quadratic law (residual {resid:.3e})"
            )
        calib = ConventionCalibration(lambda_=lam, sigma=conv.sigma, c1=1.0, c2=1.0)
    return calib
