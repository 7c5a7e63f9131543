"""Dense state and operator algebra over labelled tensor-product mode layouts.

A layout is an ordered list of named two-level modes (interferometer paths,
polarizations). Amplitude vectors are indexed big-endian in mode-list order:
the first mode varies slowest. Basis order within a mode follows its label
tuple, (L, R) for paths and (H, V) for polarizations by default.

Every value is immutable once constructed; operations return new values, so
states and operators are safe to share between concurrent tasks. Randomness
enters only through explicit seeds.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    BasisNotOrthonormal,
    DimensionMismatch,
    DuplicateModeName,
    LayoutMismatch,
    NotHermitian,
    NotNormalized,
    NotUnitary,
    UnknownMode,
)

# 1e-10 for "is normalized / is unitary" checks, 1e-12 for algebraic
# identities; double precision leaves ample headroom below both.
NORM_ATOL = 1e-10
HERMITIAN_ATOL = 1e-12
UNITARY_ATOL = 1e-10

PATH = "path"
POLARIZATION = "polarization"

_DEFAULT_LABELS = {PATH: ("L", "R"), POLARIZATION: ("H", "V")}


def _frozen(values, dtype=np.complex128) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Mode:
    """One tensor factor: a named path or polarization degree of freedom."""

    name: str
    kind: str
    dim: int = 2
    labels: tuple[str, ...] = ()

    def __post_init__(self):
        if self.kind not in (PATH, POLARIZATION):
            raise ValueError(f"unknown mode kind {self.kind!r}")
        if self.dim < 2:
            raise ValueError("mode dimension must be at least 2")
        if not self.labels:
            if self.dim == 2:
                labels = _DEFAULT_LABELS[self.kind]
            else:
                labels = tuple(str(k) for k in range(self.dim))
            object.__setattr__(self, "labels", labels)
        else:
            object.__setattr__(self, "labels", tuple(self.labels))
        if len(self.labels) != self.dim or len(set(self.labels)) != self.dim:
            raise ValueError(f"mode {self.name!r} needs {self.dim} distinct labels")

    def label_index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise UnknownMode(f"mode {self.name!r} has no basis label {label!r}") from None


@dataclass(frozen=True)
class HilbertLayout:
    """Ordered collection of modes fixing tensor-index order."""

    modes: tuple[Mode, ...]

    def __post_init__(self):
        object.__setattr__(self, "modes", tuple(self.modes))
        if not self.modes:
            raise ValueError("a layout needs at least one mode")
        names = [m.name for m in self.modes]
        if len(set(names)) != len(names):
            dupes = sorted({n for n in names if names.count(n) > 1})
            raise DuplicateModeName(f"duplicate mode name(s): {', '.join(dupes)}")

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(m.dim for m in self.modes)

    @property
    def dim(self) -> int:
        d = 1
        for m in self.modes:
            d *= m.dim
        return d

    def mode_position(self, name: str) -> int:
        for k, m in enumerate(self.modes):
            if m.name == name:
                return k
        raise UnknownMode(f"layout has no mode named {name!r}")

    def mode(self, name: str) -> Mode:
        return self.modes[self.mode_position(name)]

    def locate_label(self, label: str) -> tuple[int, int]:
        """Find a basis label across all modes; returns (mode position, index)."""
        hits = [
            (pos, mode.labels.index(label))
            for pos, mode in enumerate(self.modes)
            if label in mode.labels
        ]
        if not hits:
            raise UnknownMode(f"no mode carries basis label {label!r}")
        if len(hits) > 1:
            raise UnknownMode(f"basis label {label!r} is ambiguous across modes")
        return hits[0]

    def sublayout(self, names: Sequence[str]) -> "HilbertLayout":
        return HilbertLayout(tuple(self.mode(n) for n in names))


@dataclass(frozen=True)
class QuantumState:
    """Complex amplitude vector over a layout."""

    layout: HilbertLayout
    amplitudes: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.amplitudes, dtype=np.complex128)
        if arr.shape != (self.layout.dim,):
            raise DimensionMismatch(
                f"state has {arr.size} amplitudes, layout dimension is {self.layout.dim}"
            )
        object.__setattr__(self, "amplitudes", _frozen(arr))

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self) -> "QuantumState":
        n = self.norm()
        if n < 1e-300:
            raise ValueError("cannot normalize a zero ket")
        return QuantumState(self.layout, self.amplitudes / n)

    def is_normalized(self, atol: float = NORM_ATOL) -> bool:
        return abs(self.norm() - 1.0) <= atol

    def allclose(self, other: "QuantumState", atol: float = 1e-12) -> bool:
        return self.layout == other.layout and bool(
            np.allclose(self.amplitudes, other.amplitudes, rtol=0.0, atol=atol)
        )

    # Small linear-combination conveniences; layouts must agree.
    def __add__(self, other: "QuantumState") -> "QuantumState":
        _require_same_layout(self, other)
        return QuantumState(self.layout, self.amplitudes + other.amplitudes)

    def __sub__(self, other: "QuantumState") -> "QuantumState":
        _require_same_layout(self, other)
        return QuantumState(self.layout, self.amplitudes - other.amplitudes)

    def __mul__(self, scalar) -> "QuantumState":
        return QuantumState(self.layout, self.amplitudes * complex(scalar))

    __rmul__ = __mul__

    def __truediv__(self, scalar) -> "QuantumState":
        return QuantumState(self.layout, self.amplitudes / complex(scalar))

    def __neg__(self) -> "QuantumState":
        return QuantumState(self.layout, -self.amplitudes)


@dataclass(frozen=True)
class LinearOperator:
    """Complex square matrix over a layout.

    Operators marked ``hermitian`` or ``unitary`` are verified on
    construction (1e-12 and 1e-10 respectively) so the flags can be trusted
    downstream.
    """

    layout: HilbertLayout
    matrix: np.ndarray
    hermitian: bool = False
    unitary: bool = False

    def __post_init__(self):
        arr = np.asarray(self.matrix, dtype=np.complex128)
        d = self.layout.dim
        if arr.shape != (d, d):
            raise DimensionMismatch(f"operator shape {arr.shape} does not match layout dimension {d}")
        if self.hermitian and not np.allclose(arr, arr.conj().T, rtol=0.0, atol=HERMITIAN_ATOL):
            raise NotHermitian("operator marked Hermitian fails A = A† within 1e-12")
        if self.unitary and not np.allclose(
            arr.conj().T @ arr, np.eye(d), rtol=0.0, atol=UNITARY_ATOL
        ):
            raise NotUnitary("operator marked unitary fails U†U = I within 1e-10")
        object.__setattr__(self, "matrix", _frozen(arr))

    def adjoint(self) -> "LinearOperator":
        return LinearOperator(
            self.layout, self.matrix.conj().T, hermitian=self.hermitian, unitary=self.unitary
        )

    def allclose(self, other: "LinearOperator", atol: float = 1e-12) -> bool:
        return self.layout == other.layout and bool(
            np.allclose(self.matrix, other.matrix, rtol=0.0, atol=atol)
        )

    def __matmul__(self, other):
        if isinstance(other, LinearOperator):
            _require_same_layout(self, other)
            return LinearOperator(
                self.layout,
                self.matrix @ other.matrix,
                unitary=self.unitary and other.unitary,
            )
        if isinstance(other, QuantumState):
            return apply_operator(self, other)
        return NotImplemented

    def __add__(self, other: "LinearOperator") -> "LinearOperator":
        _require_same_layout(self, other)
        return LinearOperator(
            self.layout, self.matrix + other.matrix, hermitian=self.hermitian and other.hermitian
        )

    def __sub__(self, other: "LinearOperator") -> "LinearOperator":
        _require_same_layout(self, other)
        return LinearOperator(
            self.layout, self.matrix - other.matrix, hermitian=self.hermitian and other.hermitian
        )

    def __mul__(self, scalar) -> "LinearOperator":
        z = complex(scalar)
        return LinearOperator(
            self.layout, self.matrix * z, hermitian=self.hermitian and z.imag == 0.0
        )

    __rmul__ = __mul__


def _require_same_layout(a, b) -> None:
    if a.layout != b.layout:
        raise LayoutMismatch("operands live on different layouts")


# --- constructors ------------------------------------------------------------


def basis_ket(layout: HilbertLayout, which: Sequence[str | int]) -> QuantumState:
    """Basis ket selected per mode by label (or bare index), e.g. ("L", "H")."""
    if len(which) != len(layout.modes):
        raise DimensionMismatch(
            f"expected {len(layout.modes)} labels, got {len(which)}"
        )
    index = 0
    for mode, sel in zip(layout.modes, which):
        idx = sel if isinstance(sel, int) else mode.label_index(sel)
        if not 0 <= idx < mode.dim:
            raise DimensionMismatch(f"basis index {idx} out of range for mode {mode.name!r}")
        index = index * mode.dim + idx
    amps = np.zeros(layout.dim, dtype=np.complex128)
    amps[index] = 1.0
    return QuantumState(layout, amps)


def identity_operator(layout: HilbertLayout) -> LinearOperator:
    return LinearOperator(layout, np.eye(layout.dim), hermitian=True, unitary=True)


# --- operations ---------------------------------------------------------------


def tensor_product(a: QuantumState, b: QuantumState) -> QuantumState:
    """Kronecker product of two states; a's modes precede b's in the result."""
    layout = HilbertLayout(a.layout.modes + b.layout.modes)  # DuplicateModeName on collision
    return QuantumState(layout, np.kron(a.amplitudes, b.amplitudes))


def inner_product(a: QuantumState, b: QuantumState) -> complex:
    """<a|b>, conjugate-linear in the first argument."""
    _require_same_layout(a, b)
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def apply_operator(op: LinearOperator, s: QuantumState) -> QuantumState:
    """Matrix-vector product; does not renormalize."""
    _require_same_layout(op, s)
    return QuantumState(s.layout, op.matrix @ s.amplitudes)


def embed_operator(
    op: LinearOperator, targets: Sequence[str], layout: HilbertLayout
) -> LinearOperator:
    """Extend ``op`` (acting on the named target modes, in order) by identity.

    The result acts on ``layout`` with the target axes permuted into place, so
    targets need not be adjacent nor in layout order. Hermiticity and
    unitarity survive tensoring with identity, so the flags carry over.
    """
    positions = [layout.mode_position(name) for name in targets]
    if len(set(positions)) != len(positions):
        raise UnknownMode("target modes must be distinct")
    target_dims = tuple(layout.modes[p].dim for p in positions)
    if tuple(op.layout.dims) != target_dims:
        raise DimensionMismatch(
            f"operator dims {op.layout.dims} do not match target dims {target_dims}"
        )

    dims = layout.dims
    rest = [k for k in range(len(dims)) if k not in positions]
    rest_dim = 1
    for k in rest:
        rest_dim *= dims[k]

    big = np.kron(op.matrix, np.eye(rest_dim))
    order = positions + rest  # axis k of `big` is layout mode order[k]
    tdims = [dims[k] for k in order]
    tensor = big.reshape(tdims + tdims)
    inv = np.argsort(order)
    n = len(dims)
    tensor = tensor.transpose(list(inv) + [n + k for k in inv])
    return LinearOperator(
        layout,
        tensor.reshape(layout.dim, layout.dim),
        hermitian=op.hermitian,
        unitary=op.unitary,
    )


def projector(s: QuantumState) -> LinearOperator:
    """Rank-one projector |s><s| for a normalized state."""
    if not s.is_normalized():
        raise NotNormalized(f"projector needs a unit state, norm deviates by {abs(s.norm() - 1.0):.2e}")
    return LinearOperator(s.layout, np.outer(s.amplitudes, s.amplitudes.conj()), hermitian=True)


def partial_trace(s: QuantumState, keep: Sequence[str]) -> np.ndarray:
    """Reduced density matrix over the kept modes (in layout order).

    The result has unit trace, is Hermitian and positive semidefinite by
    construction.
    """
    if not keep:
        raise UnknownMode("keep list must not be empty")
    positions = sorted(s.layout.mode_position(name) for name in keep)
    if len(set(positions)) != len(positions):
        raise UnknownMode("kept modes must be distinct")
    dims = s.layout.dims
    rest = [k for k in range(len(dims)) if k not in positions]
    psi = s.amplitudes.reshape(dims)
    psi = psi.transpose(positions + rest)
    d_keep = 1
    for k in positions:
        d_keep *= dims[k]
    block = psi.reshape(d_keep, -1)
    rho = block @ block.conj().T
    norm2 = float(np.linalg.norm(s.amplitudes)) ** 2
    return rho / norm2


def born_sample(
    s: QuantumState,
    basis: Sequence[QuantumState],
    seed: int | np.random.Generator,
    size: int | None = None,
):
    """Sample outcome indices with Born probabilities |<a_i|s>|^2.

    The basis must be orthonormal (within 1e-10) and span the space. A fixed
    seed yields an identical outcome sequence across runs; a Generator may be
    passed to continue an existing stream.
    """
    if len(basis) != s.layout.dim:
        raise BasisNotOrthonormal(
            f"basis has {len(basis)} states, needs {s.layout.dim} to span the space"
        )
    for b in basis:
        _require_same_layout(b, s)
    mat = np.array([b.amplitudes for b in basis])
    gram = mat.conj() @ mat.T
    if not np.allclose(gram, np.eye(len(basis)), rtol=0.0, atol=NORM_ATOL):
        raise BasisNotOrthonormal("basis states are not mutually orthonormal within 1e-10")
    probs = np.abs(mat.conj() @ s.amplitudes) ** 2
    probs = probs / probs.sum()
    rng = np.random.default_rng(seed)
    out = rng.choice(len(basis), size=size, p=probs)
    return int(out) if size is None else out
