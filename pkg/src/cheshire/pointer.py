"""Von Neumann meter model on a discretized pointer line.

An observable A couples impulsively to a Gaussian pointer through
exp(-i g A x p): each eigenspace of A translates the pointer wavepacket by g
times its eigenvalue. Translations are realized spectrally, as FFT phase
ramps, which is exact for the band-limited wavepackets used here and costs
O(dim x points log points) instead of exponentiating on the joint space.

After postselecting the system, the surviving pointer distribution carries the
weak value: its position mean is g Re(A_w) to second order in g, and for a
Gaussian of spread sigma the momentum mean is g Im(A_w) / (2 sigma^2).
Position statistics use grid quadrature; momentum statistics use discrete
Fourier differentiation.

MeterState values are immutable. Monte Carlo sampling is seed-driven and
parallelizes across disjoint streams; the scenario runner derives per-worker
seeds as base_seed + worker_index.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .errors import (
    GridTooCoarse,
    NotHermitian,
    NotNormalized,
    PostselectionImpossible,
    ShiftExceedsGrid,
    ZeroCoupling,
)
from .qcore import HERMITIAN_ATOL, HilbertLayout, LinearOperator, QuantumState

# Eigenvalues this close to {-1, 0, 1} are snapped, avoiding spurious
# micro-shifts from floating-point eigensolver noise.
_EIGENVALUE_SNAP = 1e-9
_JOINT_NORM_ATOL = 1e-8
_MIN_POSTSELECTION_PROBABILITY = 1e-14


@dataclass(frozen=True)
class PointerGrid:
    """Uniform grid on [-half_width, half_width] holding a Gaussian of spread sigma.

    The tail constraint half_width >= 6 sigma keeps the truncated probability
    mass below 1e-8.
    """

    half_width: float = 8.0
    points: int = 1024
    sigma: float = 1.0

    def __post_init__(self):
        if self.sigma <= 0.0:
            raise ValueError("sigma must be positive")
        if self.points < 64:
            raise GridTooCoarse(f"{self.points} grid points; at least 64 required")
        if self.half_width < 6.0 * self.sigma:
            raise GridTooCoarse(
                f"half_width {self.half_width} < 6 sigma = {6.0 * self.sigma}; "
                "truncated tail mass would exceed 1e-8"
            )

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_width / (self.points - 1)

    def positions(self) -> np.ndarray:
        return np.linspace(-self.half_width, self.half_width, self.points)

    def wavenumbers(self) -> np.ndarray:
        return 2.0 * np.pi * np.fft.fftfreq(self.points, d=self.spacing)

    def initial_wavefunction(self) -> np.ndarray:
        """Unit-norm Gaussian samples centered at zero."""
        x = self.positions()
        raw = np.exp(-(x**2) / (4.0 * self.sigma**2)).astype(np.complex128)
        mass = float(np.sum(np.abs(raw) ** 2) * self.spacing)
        exact = self.sigma * math.sqrt(2.0 * math.pi)
        if abs(mass / exact - 1.0) > 1e-6:
            raise GridTooCoarse(
                f"discretized Gaussian norm off by {abs(mass / exact - 1.0):.2e}"
            )
        return raw / math.sqrt(mass)


@dataclass(frozen=True)
class MeterState:
    """Joint system (x) pointer amplitudes, shape (system dim, grid points)."""

    system_layout: HilbertLayout
    grid: PointerGrid
    joint: np.ndarray
    g: float = 0.0

    def __post_init__(self):
        arr = np.asarray(self.joint, dtype=np.complex128)
        expected = (self.system_layout.dim, self.grid.points)
        if arr.shape != expected:
            raise ValueError(f"joint amplitudes have shape {arr.shape}, expected {expected}")
        if self.g < 0.0:
            raise ValueError("coupling g must be nonnegative")
        total = float(np.sum(np.abs(arr) ** 2) * self.grid.spacing)
        if abs(total - 1.0) > _JOINT_NORM_ATOL:
            raise NotNormalized(f"joint norm deviates from 1 by {abs(total - 1.0):.2e}")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "joint", arr)


@dataclass(frozen=True)
class PointerWavefunction:
    """Normalized pointer wavefunction on a grid (the system already contracted)."""

    grid: PointerGrid
    values: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=np.complex128)
        if arr.shape != (self.grid.points,):
            raise ValueError("wavefunction length does not match grid")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    def density(self) -> np.ndarray:
        return np.abs(self.values) ** 2


@dataclass(frozen=True)
class PointerStatistics:
    mean: float
    variance: float
    momentum_mean: float


def attach_pointer(s: QuantumState, grid: PointerGrid) -> MeterState:
    """Product of a unit system state with the grid's initial Gaussian."""
    if not s.is_normalized():
        raise NotNormalized("attach_pointer needs a unit system state")
    phi = grid.initial_wavefunction()
    joint = np.outer(s.amplitudes, phi)
    return MeterState(s.layout, grid, joint, g=0.0)


def _translate_rows(rows: np.ndarray, grid: PointerGrid, shifts: np.ndarray) -> np.ndarray:
    """Translate each row by its own distance via Fourier phase ramps."""
    spectra = np.fft.fft(rows, axis=1)
    phases = np.exp(-1j * np.outer(shifts, grid.wavenumbers()))
    return np.fft.ifft(spectra * phases, axis=1)


def weak_couple(m: MeterState, A: LinearOperator, g: float) -> MeterState:
    """Apply the impulsive coupling exp(-i g A x p) to the joint state.

    Implemented per eigenspace of A: the component in eigenspace lambda has
    its pointer translated by g lambda. Norm is preserved exactly up to grid
    truncation.
    """
    if A.layout != m.system_layout:
        raise NotHermitian("observable layout does not match the meter's system layout")
    matrix = A.matrix
    if not A.hermitian and not np.allclose(matrix, matrix.conj().T, rtol=0.0, atol=HERMITIAN_ATOL):
        raise NotHermitian("weak coupling requires a Hermitian observable")
    if g == 0.0:
        return m

    eigvals, eigvecs = np.linalg.eigh(matrix)
    for target in (-1.0, 0.0, 1.0):
        near = np.abs(eigvals - target) <= _EIGENVALUE_SNAP
        eigvals[near] = target

    max_shift = g * float(np.max(np.abs(eigvals))) if eigvals.size else 0.0
    if max_shift > m.grid.half_width / 2.0:
        raise ShiftExceedsGrid(
            f"shift {max_shift:.3g} exceeds half the grid half-width "
            f"({m.grid.half_width / 2.0:.3g})"
        )

    coeffs = eigvecs.conj().T @ m.joint
    coeffs = _translate_rows(coeffs, m.grid, g * eigvals)
    joint = eigvecs @ coeffs
    return replace(m, joint=joint, g=float(g))


def postselect_pointer(
    m: MeterState, post: QuantumState
) -> tuple[PointerWavefunction, float]:
    """Contract the system against a postselected state.

    Returns the renormalized surviving pointer wavefunction and the success
    probability (squared norm before renormalization).
    """
    if post.layout != m.system_layout:
        raise NotNormalized("postselection state layout does not match the meter")
    if not post.is_normalized():
        raise NotNormalized("postselection state must be normalized")
    w = post.amplitudes.conj() @ m.joint
    probability = float(np.sum(np.abs(w) ** 2) * m.grid.spacing)
    if probability < _MIN_POSTSELECTION_PROBABILITY:
        raise PostselectionImpossible(
            f"postselection probability {probability:.3e} below 1e-14"
        )
    return PointerWavefunction(m.grid, w / math.sqrt(probability)), probability


def pointer_distribution(m: MeterState) -> np.ndarray:
    """Marginal pointer probability density over the grid (no postselection)."""
    return np.sum(np.abs(m.joint) ** 2, axis=0)


def system_marginal(m: MeterState) -> np.ndarray:
    """Reduced system density matrix of the joint state."""
    return (m.joint * m.grid.spacing) @ m.joint.conj().T


def pointer_statistics(w: PointerWavefunction) -> PointerStatistics:
    """Position mean and variance by quadrature, momentum mean by FFT derivative."""
    x = w.grid.positions()
    dx = w.grid.spacing
    density = w.density()
    mass = float(np.sum(density) * dx)
    mean = float(np.sum(x * density) * dx / mass)
    variance = float(np.sum((x - mean) ** 2 * density) * dx / mass)
    momentum_operand = np.fft.ifft(w.grid.wavenumbers() * np.fft.fft(w.values))
    momentum_mean = float(np.real(np.sum(w.values.conj() * momentum_operand)) * dx / mass)
    return PointerStatistics(mean=mean, variance=variance, momentum_mean=momentum_mean)


def sample_readings(
    w: PointerWavefunction, n: int, seed: int | np.random.Generator
) -> np.ndarray:
    """Draw n pointer readings by inverse-CDF with linear interpolation.

    Deterministic for a fixed integer seed; pass a Generator to continue an
    existing stream.
    """
    if n < 0:
        raise ValueError("sample count must be nonnegative")
    x = w.grid.positions()
    density = w.density()
    steps = 0.5 * (density[1:] + density[:-1]) * w.grid.spacing
    cdf = np.concatenate(([0.0], np.cumsum(steps)))
    cdf = cdf / cdf[-1]
    rng = np.random.default_rng(seed)
    return np.interp(rng.random(n), cdf, x)


def estimate_weak_value(samples: Sequence[float], g: float) -> tuple[float, float]:
    """Weak-value estimate mean/g with its standard error."""
    if g <= 0.0:
        raise ZeroCoupling("estimation needs a strictly positive coupling g")
    arr = np.asarray(samples, dtype=float)
    if arr.size == 0:
        raise ValueError("samples must be nonempty")
    estimate = float(arr.mean() / g)
    spread = float(arr.std(ddof=1)) if arr.size > 1 else 0.0
    std_error = spread / (g * math.sqrt(arr.size))
    return estimate, std_error
