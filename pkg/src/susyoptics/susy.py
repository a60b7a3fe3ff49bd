"""Partner-potential machinery: superpotential, ladder operators, spectra.

The generating object is a superpotential W(x).  From it, in natural units
(hbar = m = 1):

    B  = (d/dx + W)/sqrt(2)        B+ = (-d/dx + W)/sqrt(2)
    H1 = B B+  with  V1 = (W^2 + W')/2
    H2 = B+ B  with  V2 = (W^2 - W')/2

H1 and H2 share every eigenvalue except the zero-energy ground state of H2,
which exists whenever exp(-integral W) is normalizable (the trap term of the
family below guarantees that).  B+ maps the n-th state of H1 onto the
(n+1)-th state of H2 and intertwines the two propagators, which is what the
dynamics experiments verify.

Two eigensolvers are provided.  `hamiltonian_matrix` is the classic
central-difference tridiagonal discretization; its eigenvalues carry O(dx^2)
dispersion error (~1e-4 on the default grid).  `bound_spectrum` defaults to
a dense Hamiltonian whose kinetic block is spectral (exact on the grid's
band limit), because partner-degeneracy holds at the 1e-6 level only for a
discretization that the split-step propagator and the ladder operators
actually share.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg as sla
from scipy.integrate import cumulative_trapezoid
from scipy.special import erf

from .errors import ConfigurationError, ContractError, NumericalError
from .grids import (
    POSITION,
    Grid1D,
    WaveFunction,
    normalized,
    spectral_derivative,
)

_SQRT2 = math.sqrt(2.0)

# low-lying states only: the harmonic confinement keeps these far from the
# discretization-corrupted top of the spectrum
MAX_BOUND_LEVELS = 16


@dataclass(frozen=True)
class Superpotential:
    """Trap-plus-barrier superpotential with analytic derivative.

        W(x) = sqrt(omega) * (x/x0 + A * exp(-x^2/(4 sigma^2)))

    with oscillator length x0 = 1/sqrt(omega).  A Gaussian bump of width
    sigma rides on the linear trap term; sigma defaults to x0/2, the width
    for which the eta-family construction below is available.  A = 0 is the
    plain harmonic superpotential.
    """

    omega: float = 1.0
    amplitude: float = math.sqrt(26.0)
    sigma: float | None = None

    def __post_init__(self):
        if not (np.isfinite(self.omega) and self.omega > 0):
            raise ConfigurationError(f"omega must be positive, got {self.omega}")
        if not np.isfinite(self.amplitude):
            raise ConfigurationError(
                f"barrier amplitude must be finite, got {self.amplitude}")
        if self.sigma is None:
            object.__setattr__(self, "sigma", 0.5 * self.x0)
        if not (np.isfinite(self.sigma) and self.sigma > 0):
            raise ConfigurationError(f"sigma must be positive, got {self.sigma}")

    @property
    def x0(self) -> float:
        """Oscillator length 1/sqrt(omega)."""
        return 1.0 / math.sqrt(self.omega)

    def value(self, x):
        root_w = math.sqrt(self.omega)
        bump = self.amplitude * np.exp(-(x * x) / (4.0 * self.sigma**2))
        return root_w * (x / self.x0 + bump)

    def derivative(self, x):
        root_w = math.sqrt(self.omega)
        bump = self.amplitude * np.exp(-(x * x) / (4.0 * self.sigma**2))
        return root_w * (1.0 / self.x0 - x / (2.0 * self.sigma**2) * bump)

    def __call__(self, x):
        return self.value(x)


class TabulatedSuperpotential:
    """Superpotential given as samples of W and W' on a grid.

    Construction cross-checks the supplied derivative against centered
    finite differences of the W samples; disagreement beyond `fd_rel_tol`
    (relative to the derivative's scale) means the tabulation is too coarse
    or inconsistent, and it is rejected.  Evaluation between nodes is
    linear interpolation; outside the tabulated domain it is an error.
    """

    def __init__(self, grid: Grid1D, w_values, w_prime_values, fd_rel_tol: float = 1e-6):
        w = np.asarray(w_values, dtype=float)
        wp = np.asarray(w_prime_values, dtype=float)
        if w.shape != (grid.n,) or wp.shape != (grid.n,):
            raise ConfigurationError(
                f"sample shapes {w.shape}, {wp.shape} do not match grid size {grid.n}")
        if not (np.all(np.isfinite(w)) and np.all(np.isfinite(wp))):
            raise ConfigurationError("tabulated superpotential has non-finite samples")
        fd = (w[2:] - w[:-2]) / (2.0 * grid.dx)
        scale = max(float(np.max(np.abs(wp))), 1e-300)
        mismatch = float(np.max(np.abs(fd - wp[1:-1]))) / scale
        if mismatch > fd_rel_tol:
            raise ConfigurationError(
                "tabulated W' disagrees with centered differences of W: "
                f"relative mismatch {mismatch:.3e} exceeds {fd_rel_tol:.1e} "
                "(tabulate on a finer grid or loosen fd_rel_tol)")
        self.grid = grid
        self._w = w
        self._wp = wp
        self._w.setflags(write=False)
        self._wp.setflags(write=False)

    def _interp(self, x, table):
        xs = np.asarray(x, dtype=float)
        lo, hi = float(self.grid.x[0]), float(self.grid.x[-1])
        if np.any(xs < lo) or np.any(xs > hi):
            raise ContractError(
                f"evaluation outside the tabulated domain [{lo}, {hi}]")
        out = np.interp(xs, self.grid.x, table)
        return out if out.shape else float(out)

    def value(self, x):
        return self._interp(x, self._w)

    def derivative(self, x):
        return self._interp(x, self._wp)

    def __call__(self, x):
        return self.value(x)


@dataclass(frozen=True)
class PotentialField:
    """Real potential sampled on a grid."""

    grid: Grid1D
    values: np.ndarray = field(compare=False)
    label: str = "custom"

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != (self.grid.n,):
            raise ContractError(
                f"potential shape {vals.shape} does not match grid size {self.grid.n}")
        if not np.all(np.isfinite(vals)):
            raise ContractError(f"potential {self.label!r} has non-finite values")
        vals = vals.copy()
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)


def partner_potential(W, which: int, grid: Grid1D) -> PotentialField:
    """Partner potential V1 = (W^2 + W')/2 or V2 = (W^2 - W')/2 on the grid.

    V1 belongs to H1 = B B+ and V2 to H2 = B+ B; their pointwise difference
    is exactly W'.
    """
    if which not in (1, 2):
        raise ConfigurationError(f"which must be 1 or 2, got {which!r}")
    w = np.asarray(W.value(grid.x), dtype=float)
    wp = np.asarray(W.derivative(grid.x), dtype=float)
    sign = 1.0 if which == 1 else -1.0
    return PotentialField(grid, 0.5 * (w * w + sign * wp), label=f"V{which}")


def eta_potential(W: Superpotential, eta: float, grid: Grid1D) -> PotentialField:
    """Member of the one-parameter family interpolating between V1 and V2.

        V_eta = (omega^2 x^2)/2 + (omega A^2/2) e^{-2 x^2/x0^2}
                + 2 eta omega A (x/x0) e^{-x^2/x0^2}

    eta scales the odd barrier term: eta = 0 gives V1 - omega/2 and eta = 1
    gives V2 + omega/2 (the same dynamics as the partners, shifted by a
    constant).  The construction collapses to this closed form only for
    sigma = x0/2, so other widths are rejected.
    """
    if not isinstance(W, Superpotential):
        raise ConfigurationError(
            "the eta family is defined for the analytic trap-plus-barrier "
            "superpotential, not tabulated data")
    if abs(W.sigma - 0.5 * W.x0) > 1e-12 * W.x0:
        raise ConfigurationError(
            f"eta family requires sigma = x0/2; got sigma = {W.sigma} "
            f"with x0/2 = {0.5 * W.x0}")
    om, amp, x0 = W.omega, W.amplitude, W.x0
    u = grid.x / x0
    g = np.exp(-u * u)
    vals = 0.5 * om**2 * grid.x**2 + 0.5 * om * amp**2 * g * g \
        + 2.0 * eta * om * amp * u * g
    return PotentialField(grid, vals, label=f"eta({eta:g})")


def _apply_ladder(psi: WaveFunction, W, derivative_sign: float) -> WaveFunction:
    if psi.representation != POSITION:
        raise ContractError("ladder operators act on position-space states")
    w = np.asarray(W.value(psi.grid.x), dtype=float)
    dpsi = spectral_derivative(psi).values
    return psi.with_values((derivative_sign * dpsi + w * psi.values) / _SQRT2)


def apply_B(psi: WaveFunction, W) -> WaveFunction:
    """B psi = (psi' + W psi)/sqrt(2).  Output is not normalized."""
    return _apply_ladder(psi, W, +1.0)


def apply_B_dag(psi: WaveFunction, W) -> WaveFunction:
    """B+ psi = (-psi' + W psi)/sqrt(2).  Output is not normalized."""
    return _apply_ladder(psi, W, -1.0)


def hamiltonian_matrix(V: PotentialField) -> np.ndarray:
    """Dense symmetric tridiagonal H = -(1/2) d2/dx2 + V, central differences.

    Dirichlet boundaries: the field is pinned to zero outside the domain,
    which is appropriate for bound states that decay well inside it.
    """
    n, dx = V.grid.n, V.grid.dx
    h = np.zeros((n, n))
    idx = np.arange(n)
    h[idx, idx] = 1.0 / dx**2 + V.values
    h[idx[:-1], idx[:-1] + 1] = -0.5 / dx**2
    h[idx[:-1] + 1, idx[:-1]] = -0.5 / dx**2
    return h


def dense_hamiltonian(V: PotentialField) -> np.ndarray:
    """Dense H whose kinetic block is the spectral operator p^2/2.

    The kinetic block is the circulant with symbol p^2/2 on the grid's
    momentum samples: exact for band-limited fields, periodic boundaries.
    This is the discretization the split-step propagator actually evolves
    under, so its eigenpairs are the right oracle for Trotter-error and
    partner-degeneracy statements at tolerances far below the reach of a
    second-order stencil.
    """
    g = V.grid
    kernel = np.fft.ifft(0.5 * g.p**2)
    kin = sla.circulant(np.real(kernel))  # imaginary part is rounding noise
    h = kin + np.diag(V.values)
    return 0.5 * (h + h.T)


@dataclass(frozen=True)
class SpectrumResult:
    """Lowest eigenpairs of a discretized Hamiltonian."""

    grid: Grid1D
    energies: np.ndarray
    states: tuple
    residuals: np.ndarray
    method: str
    label: str = ""


def bound_spectrum(V: PotentialField, k: int, method: str = "spectral",
                   residual_tol: float = 1e-8) -> SpectrumResult:
    """k lowest bound states of -(1/2) d2/dx2 + V.

    method "spectral" (default) diagonalizes `dense_hamiltonian`;
    method "fd" solves the tridiagonal stencil of `hamiltonian_matrix`.
    Eigenstates come back quadrature-normalized with a deterministic sign.
    Residuals ||H v - E v|| are checked against `residual_tol`.
    """
    if not isinstance(k, (int, np.integer)) or not 1 <= k <= MAX_BOUND_LEVELS:
        raise ConfigurationError(
            f"k must be an integer in [1, {MAX_BOUND_LEVELS}], got {k!r} "
            "(solver is scoped to low-lying bound states)")
    grid = V.grid
    if k >= grid.n:
        raise ConfigurationError(f"k = {k} requires a grid larger than {grid.n} points")
    try:
        if method == "spectral":
            h = dense_hamiltonian(V)
            energies, vecs = sla.eigh(h, subset_by_index=(0, k - 1))
            resid = np.linalg.norm(h @ vecs - vecs * energies, axis=0)
        elif method == "fd":
            n, dx = grid.n, grid.dx
            diag = 1.0 / dx**2 + V.values
            off = np.full(n - 1, -0.5 / dx**2)
            energies, vecs = sla.eigh_tridiagonal(
                diag, off, select="i", select_range=(0, k - 1))
            hv = diag[:, None] * vecs
            hv[:-1] += off[:, None] * vecs[1:]
            hv[1:] += off[:, None] * vecs[:-1]
            resid = np.linalg.norm(hv - vecs * energies, axis=0)
        else:
            raise ConfigurationError(
                f"unknown eigensolver method {method!r}; use 'spectral' or 'fd'")
    except np.linalg.LinAlgError as exc:
        raise NumericalError(
            f"eigensolver ({method}) failed on {V.label!r}: {exc}") from exc
    worst = float(resid.max())
    if worst > residual_tol:
        raise NumericalError(
            f"eigensolver ({method}) residual {worst:.3e} exceeds "
            f"{residual_tol:.1e} on {V.label!r}")
    # deterministic sign: largest-magnitude component made positive
    lead = np.argmax(np.abs(vecs), axis=0)
    vecs = vecs * np.sign(vecs[lead, np.arange(vecs.shape[1])])
    states = tuple(
        WaveFunction(grid, vecs[:, j] / math.sqrt(grid.dx)) for j in range(k))
    return SpectrumResult(grid, energies, states, resid, method, V.label)


@dataclass(frozen=True)
class DegeneracyReport:
    """Offset pairing of two partner spectra: E1_n against E2_(n+1)."""

    pair_count: int
    gaps: np.ndarray
    unpaired_ground: float
    tol: float
    passed: bool

    @property
    def max_gap(self) -> float:
        return float(self.gaps.max()) if self.pair_count else 0.0


def check_degeneracy(s1: SpectrumResult, s2: SpectrumResult, tol: float) -> DegeneracyReport:
    """Pair E1_n with E2_(n+1), leaving the ground state of spectrum 2 alone.

    Passes iff every paired gap is at most tol.  The unpaired ground energy
    is reported, not gated here.
    """
    if s1.grid != s2.grid:
        raise ContractError("spectra were computed on different grids")
    m = max(min(len(s1.energies), len(s2.energies) - 1), 0)
    gaps = np.abs(s1.energies[:m] - s2.energies[1:m + 1])
    passed = bool(np.all(gaps <= tol))
    return DegeneracyReport(m, gaps, float(s2.energies[0]), float(tol), passed)


def zero_mode(W, grid: Grid1D) -> WaveFunction:
    """Normalized zero-energy ground state of H2, proportional to exp(-int W).

    Annihilated by B.  It is normalizable because the linear trap term of W
    dominates the bounded barrier term at large |x|.  The antiderivative is
    analytic for the trap-plus-barrier form and trapezoid quadrature for
    tabulated superpotentials.
    """
    if isinstance(W, Superpotential):
        s = W.sigma
        anti = math.sqrt(W.omega) * (
            grid.x**2 / (2.0 * W.x0)
            + W.amplitude * s * math.sqrt(math.pi) * erf(grid.x / (2.0 * s)))
    else:
        w = np.asarray(W.value(grid.x), dtype=float)
        anti = cumulative_trapezoid(w, grid.x, initial=0.0)
    anti = anti - anti.min()  # exp argument <= 0: no overflow, underflow is harmless
    return normalized(WaveFunction(grid, np.exp(-anti)))
