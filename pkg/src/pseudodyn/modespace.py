"""Momentum-lattice discretization of a free scalar field in a periodic box.

In one spatial dimension with box length L the field factorizes over the
lattice momenta

    p_k = 2*pi*k / L,    k in {-N/2 + 1, ..., N/2},

each mode being an independent harmonic degree of freedom with frequency
omega_k = sqrt(p_k^2 + m^2).  Negation k -> -k maps the index set onto
itself except for the Nyquist-like mode k = N/2, which (as in the usual
discrete-transform convention) is identified with its own negative; k = 0
is likewise self-paired.  Vectors carrying a real spatial profile satisfy
amplitude(-k) = conj(amplitude(k)), which forces the two self-paired
amplitudes to be real.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

__all__ = ["ModeSpace", "ModeVector", "build_mode_space", "mode_frequency"]


@dataclass(frozen=True)
class ModeSpace:
    """Finite set of spatial momentum modes with their frequencies.

    A strictly positive mass is required: the massless zero mode would make
    omega = 0 and every 1/omega kernel singular.  Instances are immutable
    (derived arrays are read-only) and safe to share between threads.
    """

    num_modes: int
    box_length: float
    mass: float
    hbar: float = 1.0

    def __post_init__(self):
        n = self.num_modes
        if not isinstance(n, (int, np.integer)) or n < 2 or n % 2 != 0:
            raise ValueError(f"num_modes must be a positive even integer >= 2, got {n!r}")
        if self.box_length <= 0:
            raise ValueError(f"box_length must be positive, got {self.box_length}")
        if self.mass <= 0:
            raise ValueError(f"mass must be strictly positive, got {self.mass}")
        if self.hbar <= 0:
            raise ValueError(f"hbar must be positive, got {self.hbar}")

    @cached_property
    def mode_indices(self) -> np.ndarray:
        """Integer mode indices k, ascending from -N/2 + 1 to N/2."""
        half = self.num_modes // 2
        ks = np.arange(-half + 1, half + 1)
        ks.setflags(write=False)
        return ks

    @cached_property
    def momenta(self) -> np.ndarray:
        p = 2.0 * np.pi * self.mode_indices / self.box_length
        p.setflags(write=False)
        return p

    @cached_property
    def frequencies(self) -> np.ndarray:
        w = np.sqrt(self.momenta**2 + self.mass**2)
        w.setflags(write=False)
        return w

    @cached_property
    def negation(self) -> np.ndarray:
        """Position permutation implementing k -> -k (Nyquist self-paired)."""
        half = self.num_modes // 2
        ks = self.mode_indices
        neg = np.where(ks < half, -ks + half - 1, self.num_modes - 1)
        neg.setflags(write=False)
        return neg

    @cached_property
    def self_paired(self) -> np.ndarray:
        """Boolean mask of the modes identified with their own negative."""
        mask = self.negation == np.arange(self.num_modes)
        mask.setflags(write=False)
        return mask

    def index_of(self, k: int) -> int:
        """Array position of mode index k."""
        half = self.num_modes // 2
        if not -half + 1 <= k <= half:
            raise IndexError(f"mode index {k} outside {{-{half - 1}, ..., {half}}}")
        return int(k + half - 1)

    def frequency(self, k: int) -> float:
        return float(self.frequencies[self.index_of(k)])

    def to_config(self) -> dict:
        return {
            "num_modes": self.num_modes,
            "box_length": self.box_length,
            "mass": self.mass,
            "hbar": self.hbar,
        }

    @classmethod
    def from_config(cls, record: dict) -> "ModeSpace":
        return cls(
            num_modes=int(record["num_modes"]),
            box_length=float(record["box_length"]),
            mass=float(record["mass"]),
            hbar=float(record.get("hbar", 1.0)),
        )


def build_mode_space(num_modes: int, box_length: float, mass: float,
                     hbar: float = 1.0) -> ModeSpace:
    """Construct a validated ModeSpace (momenta and frequencies populated)."""
    return ModeSpace(num_modes=num_modes, box_length=box_length, mass=mass, hbar=hbar)


def mode_frequency(space: ModeSpace, k: int) -> float:
    """sqrt(p_k^2 + m^2) for an in-range mode index k."""
    return space.frequency(k)


@dataclass(frozen=True)
class ModeVector:
    """One complex amplitude per lattice mode.

    With ``real_field=True`` the vector represents the transform of a real
    spatial profile; the pairing amplitude(-k) = conj(amplitude(k)) is then
    required to hold exactly and is checked at construction.
    """

    space: ModeSpace
    values: np.ndarray
    real_field: bool = False

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=complex)
        if vals.shape != (self.space.num_modes,):
            raise ValueError(
                f"expected {self.space.num_modes} amplitudes, got shape {vals.shape}"
            )
        vals = vals.copy()
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        if self.real_field:
            neg = self.space.negation
            if not np.array_equal(vals[neg], np.conj(vals)):
                raise ValueError(
                    "real_field vector must satisfy amplitude(-k) == conj(amplitude(k)) "
                    "exactly (self-paired modes real)"
                )

    def amplitude(self, k: int) -> complex:
        return complex(self.values[self.space.index_of(k)])

    @classmethod
    def zeros(cls, space: ModeSpace) -> "ModeVector":
        return cls(space, np.zeros(space.num_modes, dtype=complex), real_field=True)

    @classmethod
    def basis(cls, space: ModeSpace, k: int, amplitude: complex = 1.0) -> "ModeVector":
        vals = np.zeros(space.num_modes, dtype=complex)
        vals[space.index_of(k)] = amplitude
        return cls(space, vals)

    @classmethod
    def from_components(cls, space: ModeSpace, components: dict,
                        real_field: bool = False) -> "ModeVector":
        vals = np.zeros(space.num_modes, dtype=complex)
        for k, amp in components.items():
            vals[space.index_of(int(k))] = amp
        return cls(space, vals, real_field=real_field)

    @classmethod
    def random(cls, space: ModeSpace, rng: np.random.Generator,
               scale: float = 1.0, real_field: bool = False) -> "ModeVector":
        """Amplitudes with real and imaginary parts uniform in [-scale, scale]."""
        n = space.num_modes
        raw = rng.uniform(-scale, scale, n) + 1j * rng.uniform(-scale, scale, n)
        if real_field:
            # symmetrizing with the conjugate partner keeps the pairing exact
            raw = 0.5 * (raw + np.conj(raw[space.negation]))
        return cls(space, raw, real_field=real_field)
