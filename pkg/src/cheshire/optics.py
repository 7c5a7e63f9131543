"""Idealized optical-element unitaries and routing-constraint synthesis.

Conventions baked in here:

* Beam splitters use the symmetric 50:50 form ``[[sqrt(t), i sqrt(r)],
  [i sqrt(r), sqrt(t)]]`` on the (L, R) port basis: every reflection picks up
  the phase ``i``.
* Mirrors redirect geometry only and act as the identity on amplitudes; compose
  with a :func:`phase_shifter` if a reflection phase is wanted.
* A polarizing beam splitter transmits H (path label kept) and reflects V
  (path label swapped); the path mode doubles as the output-port label.

Elements built from routing behaviour alone go through
:func:`complete_partial_isometry`, which extends the constrained action to a
full unitary deterministically (Gram-Schmidt over the canonical basis in index
order), so synthesized detector networks are reproducible bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import (
    ConstraintsNotIsometric,
    LayoutMismatch,
    WrongModeKind,
)
from .qcore import (
    PATH,
    POLARIZATION,
    HilbertLayout,
    LinearOperator,
    QuantumState,
    embed_operator,
)

_GRAM_ATOL = 1e-10
_ISOMETRY_ATOL = 1e-8
_COMPLETION_TOL = 1e-8  # near-dependent candidates are skipped below this


def _require_kind(layout: HilbertLayout, name: str, kind: str) -> None:
    mode = layout.mode(name)
    if mode.kind != kind:
        raise WrongModeKind(f"mode {name!r} is {mode.kind}, expected {kind}")
    if mode.dim != 2:
        raise WrongModeKind(f"mode {name!r} must be two-dimensional")


def _embedded(layout, targets, matrix, unitary=True) -> LinearOperator:
    sub = layout.sublayout(targets)
    op = LinearOperator(sub, matrix, unitary=unitary)
    return embed_operator(op, targets, layout)


def beam_splitter(
    layout: HilbertLayout, path_mode: str, reflectivity: float = 0.5
) -> LinearOperator:
    """Two-port beam splitter on a path mode; reflections pick up phase i.

    Only the 50:50 default is exercised by the shipped scenarios, but the
    reflectivity is a free parameter.
    """
    _require_kind(layout, path_mode, PATH)
    if not 0.0 < reflectivity < 1.0:
        raise ValueError("reflectivity must lie strictly between 0 and 1")
    r = math.sqrt(reflectivity)
    t = math.sqrt(1.0 - reflectivity)
    matrix = np.array([[t, 1j * r], [1j * r, t]])
    return _embedded(layout, [path_mode], matrix)


def half_wave_plate(layout: HilbertLayout, pol_mode: str) -> LinearOperator:
    """Exchanges H and V on a polarization mode."""
    _require_kind(layout, pol_mode, POLARIZATION)
    return _embedded(layout, [pol_mode], np.array([[0.0, 1.0], [1.0, 0.0]]))


def phase_shifter(layout: HilbertLayout, path_mode: str, port: str | int) -> LinearOperator:
    """Multiplies the selected port's amplitude by i, identity elsewhere."""
    _require_kind(layout, path_mode, PATH)
    mode = layout.mode(path_mode)
    idx = port if isinstance(port, int) else mode.label_index(port)
    if not 0 <= idx < mode.dim:
        raise WrongModeKind(f"port index {idx} out of range for mode {path_mode!r}")
    diag = np.ones(mode.dim, dtype=np.complex128)
    diag[idx] = 1j
    return _embedded(layout, [path_mode], np.diag(diag))


def polarizing_beam_splitter(
    layout: HilbertLayout, path_mode: str, pol_mode: str
) -> LinearOperator:
    """Transmit H (path label kept), reflect V (path label swapped).

    On the joint (path, polarization) space this is the permutation
    |x,H> -> |x,H>, |x,V> -> |x_bar,V>; it squares to the identity.
    """
    _require_kind(layout, path_mode, PATH)
    _require_kind(layout, pol_mode, POLARIZATION)
    matrix = np.zeros((4, 4))
    for x in (0, 1):
        matrix[2 * x + 0, 2 * x + 0] = 1.0  # H transmitted
        matrix[2 * (1 - x) + 1, 2 * x + 1] = 1.0  # V reflected to the other port
    return _embedded(layout, [path_mode, pol_mode], matrix)


def mirror(layout: HilbertLayout, mode_name: str) -> LinearOperator:
    """Geometric redirection only; identity on amplitudes."""
    mode = layout.mode(mode_name)
    return _embedded(layout, [mode_name], np.eye(mode.dim))


@dataclass(frozen=True)
class RoutingConstraint:
    """One input->output pair an element must realize exactly."""

    input: QuantumState
    output: QuantumState

    def __post_init__(self):
        if self.input.layout != self.output.layout:
            raise LayoutMismatch("constraint input and output live on different layouts")


@dataclass(frozen=True)
class OpticalElement:
    """Declarative element: kind, target mode names, kind-specific parameters.

    ``params`` meaning per kind: beam_splitter -> (reflectivity,),
    phase_shifter -> (port index,), others empty.
    """

    kind: str
    targets: tuple[str, ...]
    params: tuple[float, ...] = ()

    _KINDS = ("beam_splitter", "half_wave_plate", "phase_shifter", "polarizing_beam_splitter", "mirror")

    def __post_init__(self):
        if self.kind not in self._KINDS:
            raise ValueError(f"unknown element kind {self.kind!r}")
        object.__setattr__(self, "targets", tuple(self.targets))
        object.__setattr__(self, "params", tuple(float(p) for p in self.params))

    def realize(self, layout: HilbertLayout) -> LinearOperator:
        if self.kind == "beam_splitter":
            refl = self.params[0] if self.params else 0.5
            return beam_splitter(layout, self.targets[0], refl)
        if self.kind == "half_wave_plate":
            return half_wave_plate(layout, self.targets[0])
        if self.kind == "phase_shifter":
            return phase_shifter(layout, self.targets[0], int(self.params[0]))
        if self.kind == "polarizing_beam_splitter":
            return polarizing_beam_splitter(layout, self.targets[0], self.targets[1])
        return mirror(layout, self.targets[0])


def _orthonormal_extension(seed_vectors: list[np.ndarray], dim: int) -> list[np.ndarray]:
    """Extend a set of orthonormal vectors to a full basis, deterministically.

    Canonical basis vectors are swept in index order; candidates that are
    nearly dependent on the running set (residual below 1e-8) are skipped.
    Two projection passes keep the result orthonormal to machine precision.
    """
    basis = [v.copy() for v in seed_vectors]
    added = []
    for j in range(dim):
        v = np.zeros(dim, dtype=np.complex128)
        v[j] = 1.0
        for _ in range(2):
            for b in basis:
                v = v - b * np.vdot(b, v)
        norm = np.linalg.norm(v)
        if norm > _COMPLETION_TOL:
            v = v / norm
            basis.append(v)
            added.append(v)
        if len(basis) == dim:
            break
    return added


def complete_partial_isometry(
    constraints: Sequence[RoutingConstraint | tuple[QuantumState, QuantumState]],
    layout: HilbertLayout | None = None,
) -> LinearOperator:
    """Synthesize a unitary from routing constraints.

    The constraints fix the action on the span of their inputs; the orthogonal
    complement is completed by pairing the Gram-Schmidt extensions of the
    input and output sets. With no constraints the identity on ``layout`` is
    returned.
    """
    pairs = [c if isinstance(c, RoutingConstraint) else RoutingConstraint(*c) for c in constraints]
    if not pairs:
        if layout is None:
            raise ValueError("layout is required when the constraint list is empty")
        return LinearOperator(layout, np.eye(layout.dim), hermitian=True, unitary=True)

    layout = layout or pairs[0].input.layout
    for c in pairs:
        if c.input.layout != layout:
            raise LayoutMismatch("all constraints must share one layout")

    ins = np.array([c.input.amplitudes for c in pairs])
    outs = np.array([c.output.amplitudes for c in pairs])
    gram_in = ins.conj() @ ins.T
    gram_out = outs.conj() @ outs.T
    eye = np.eye(len(pairs))
    if not np.allclose(gram_in, eye, rtol=0.0, atol=_GRAM_ATOL):
        raise ConstraintsNotIsometric("constraint inputs are not mutually orthonormal")
    if not np.allclose(gram_out, eye, rtol=0.0, atol=_GRAM_ATOL):
        raise ConstraintsNotIsometric("constraint outputs are not mutually orthonormal")
    if np.max(np.abs(gram_in - gram_out)) > _ISOMETRY_ATOL:
        raise ConstraintsNotIsometric("constraints do not preserve pairwise inner products")

    dim = layout.dim
    matrix = np.zeros((dim, dim), dtype=np.complex128)
    for c in pairs:
        matrix += np.outer(c.output.amplitudes, c.input.amplitudes.conj())
    extra_in = _orthonormal_extension([c.input.amplitudes for c in pairs], dim)
    extra_out = _orthonormal_extension([c.output.amplitudes for c in pairs], dim)
    for vin, vout in zip(extra_in, extra_out):
        matrix += np.outer(vout, vin.conj())
    return LinearOperator(layout, matrix, unitary=True)
