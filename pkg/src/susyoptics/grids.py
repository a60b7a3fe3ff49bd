"""Uniform 1D grids, sampled wavefunctions, and the unitary Fourier transform.

Everything downstream (operator algebra, split-step evolution, the optical
bench) works on a periodic uniform grid.  Positions are measured in units of
the oscillator length x0 and momenta in 1/x0; the transform convention is the
unitary one,

    psi_tilde(p) = (2*pi)**-0.5 * integral psi(x) exp(-i p x) dx,

discretized so that the round trip and Parseval's identity hold to machine
precision.  Momentum-space arrays are stored in FFT-native order; consumers
must address momenta through ``Grid1D.p`` and never through raw indices.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import sqrt, tau as two_pi

import numpy as np

from .errors import (
    ConfigurationError,
    ContractError,
    DegenerateStateError,
    SamplingError,
)

POSITION = "position"
MOMENTUM = "momentum"

_SQRT_2PI = sqrt(two_pi)


@dataclass(frozen=True, eq=True)
class Grid1D:
    """Uniform periodic grid on [x_min, x_max) with n samples.

    The right endpoint is excluded: x_i = x_min + i*dx with dx = (x_max -
    x_min)/n, which is the sampling an FFT expects.  ``p`` holds the conjugate
    momenta 2*pi*j/(n*dx) for j in [-n/2, n/2), in FFT-native storage order.
    """

    n: int
    x_min: float
    x_max: float

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / self.n

    @property
    def dp(self) -> float:
        return two_pi / (self.n * self.dx)

    @property
    def x(self) -> np.ndarray:
        xs = self.x_min + self.dx * np.arange(self.n)
        xs.setflags(write=False)
        return xs

    @property
    def p(self) -> np.ndarray:
        ps = two_pi * np.fft.fftfreq(self.n, d=self.dx)
        ps.setflags(write=False)
        return ps

    def weight(self, representation: str) -> float:
        """Quadrature weight of the given representation (dx or dp)."""
        return self.dx if representation == POSITION else self.dp


def make_grid(n: int, x_min: float, x_max: float) -> Grid1D:
    """Build a grid, rejecting non-positive extent or fewer than 2 points.

    A power-of-two ``n`` is recommended (the transforms are plain FFTs) but
    not required.
    """
    problems = []
    if not isinstance(n, (int, np.integer)) or isinstance(n, bool):
        problems.append(f"n must be an integer, got {n!r}")
    elif n < 2:
        problems.append(f"n must be at least 2, got {n}")
    if not (np.isfinite(x_min) and np.isfinite(x_max)):
        problems.append(f"domain bounds must be finite, got [{x_min}, {x_max}]")
    elif not x_max > x_min:
        problems.append(f"domain extent must be positive, got [{x_min}, {x_max}]")
    if problems:
        raise ConfigurationError("; ".join(problems))
    return Grid1D(int(n), float(x_min), float(x_max))


@dataclass(frozen=True)
class WaveFunction:
    """Complex field sampled on a grid, tagged with its representation.

    Values are never mutated in place; every operation returns a new
    instance.  Norms need not be 1 (operators like B-dagger produce
    unnormalized output on purpose).
    """

    grid: Grid1D
    values: np.ndarray = field(compare=False)
    representation: str = POSITION

    def __post_init__(self):
        if self.representation not in (POSITION, MOMENTUM):
            raise ContractError(
                f"unknown representation {self.representation!r}")
        vals = np.asarray(self.values, dtype=np.complex128)
        if vals.shape != (self.grid.n,):
            raise ContractError(
                f"values shape {vals.shape} does not match grid size {self.grid.n}")
        vals = vals.copy()
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def with_values(self, values: np.ndarray) -> "WaveFunction":
        return WaveFunction(self.grid, values, self.representation)


def sample(grid: Grid1D, f) -> WaveFunction:
    """Sample a callable on the grid as a position-space wavefunction.

    ``f`` is called once with the full coordinate array and must return a
    (broadcastable) array of values.  Non-finite samples are rejected with
    the offending coordinate named.
    """
    vals = np.asarray(f(grid.x), dtype=np.complex128)
    if vals.shape == ():
        vals = np.full(grid.n, complex(vals))
    if vals.shape != (grid.n,):
        raise SamplingError(
            f"sampled values have shape {vals.shape}, expected ({grid.n},)")
    bad = ~np.isfinite(vals)
    if np.any(bad):
        i = int(np.argmax(bad))
        raise SamplingError(
            f"non-finite value {vals[i]} sampled at x = {grid.x[i]}")
    return WaveFunction(grid, vals, POSITION)


def _check_compatible(a: WaveFunction, b: WaveFunction) -> None:
    if a.grid != b.grid:
        raise ContractError(
            f"grid mismatch: {a.grid} vs {b.grid}")
    if a.representation != b.representation:
        raise ContractError(
            f"representation mismatch: {a.representation} vs {b.representation}")


def inner(a: WaveFunction, b: WaveFunction) -> complex:
    """Sesquilinear inner product <a|b> with the representation's weight."""
    _check_compatible(a, b)
    return complex(np.vdot(a.values, b.values) * a.grid.weight(a.representation))


def norm(a: WaveFunction) -> float:
    """L2 norm under the grid quadrature."""
    w = a.grid.weight(a.representation)
    return float(np.sqrt(np.sum(np.abs(a.values) ** 2) * w))


def normalized(a: WaveFunction) -> WaveFunction:
    """Rescale to unit norm.  A zero field cannot be normalized."""
    n = norm(a)
    if n == 0.0 or not np.isfinite(n):
        raise DegenerateStateError(f"cannot normalize field with norm {n}")
    return a.with_values(a.values / n)


def fidelity(a: WaveFunction, b: WaveFunction, convention: str = "modulus") -> float:
    """Overlap |<a|b>| / (||a|| ||b||), or its square.

    ``convention`` selects "modulus" (default) or "modulus_squared".  Both
    are insensitive to global phase and to the input norms.
    """
    if convention not in ("modulus", "modulus_squared"):
        raise ConfigurationError(
            f"unknown fidelity convention {convention!r}; "
            "use 'modulus' or 'modulus_squared'")
    na, nb = norm(a), norm(b)
    if na == 0.0 or nb == 0.0:
        raise DegenerateStateError("fidelity of a zero-norm field is undefined")
    f = abs(inner(a, b)) / (na * nb)
    # clip the rounding overshoot so downstream 1 - F stays signed correctly
    f = min(f, 1.0)
    return f * f if convention == "modulus_squared" else f


def to_momentum(psi: WaveFunction) -> WaveFunction:
    """Unitary transform to the momentum representation.

    The phase factor exp(-i p x_min) anchors the transform to the physical
    origin rather than to array index 0, so analytic identities (Gaussian
    self-duality, the shift theorem) hold on the nose.
    """
    if psi.representation == MOMENTUM:
        raise ContractError("state is already in the momentum representation")
    g = psi.grid
    vals = (g.dx / _SQRT_2PI) * np.exp(-1j * g.p * g.x_min) * np.fft.fft(psi.values)
    return WaveFunction(g, vals, MOMENTUM)


def to_position(psi: WaveFunction) -> WaveFunction:
    """Inverse of :func:`to_momentum`; round trips are exact to rounding."""
    if psi.representation == POSITION:
        raise ContractError("state is already in the position representation")
    g = psi.grid
    vals = (_SQRT_2PI / g.dx) * np.fft.ifft(np.exp(1j * g.p * g.x_min) * psi.values)
    return WaveFunction(g, vals, POSITION)


def spectral_derivative(psi: WaveFunction) -> WaveFunction:
    """d/dx via multiplication by i*p in momentum space.

    Exponentially accurate for states that decay inside the domain; this is
    what makes B and B-dagger faithful to their continuum definitions.
    """
    if psi.representation != POSITION:
        raise ContractError("spectral_derivative expects a position-space state")
    g = psi.grid
    vals = np.fft.ifft(1j * g.p * np.fft.fft(psi.values))
    return psi.with_values(vals)


def gaussian_packet(grid: Grid1D, center: float = 0.0, width: float = 1.0,
                    momentum: float = 0.0) -> WaveFunction:
    """Normalized Gaussian (pi w^2)^-1/4 exp(-(x-c)^2 / 2w^2) exp(i q x)."""
    if width <= 0 or not np.isfinite(width):
        raise ConfigurationError(f"width must be positive, got {width}")
    x = grid.x
    vals = (np.pi * width**2) ** -0.25 * np.exp(
        -((x - center) ** 2) / (2 * width**2) + 1j * momentum * x)
    return WaveFunction(grid, vals, POSITION)
