"""Exact weak values for pre/postselected systems, and the standard observables.

The weak value of an observable A between a preselected state and a
postselected one is <post|A|pre> / <post|pre>. It is complex in general and
not confined to the eigenvalue range of A; near-orthogonal selections make it
arbitrarily large, which is why the overlap floor below is configurable rather
than hard-wired.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import OrthogonalSelection, UnknownMode
from .qcore import (
    PATH,
    POLARIZATION,
    HilbertLayout,
    LinearOperator,
    QuantumState,
    apply_operator,
    embed_operator,
    inner_product,
)

# Below this overlap a selection counts as orthogonal and the weak value is
# undefined. Anomalously large values near orthogonality are legitimate
# physics; lower the floor per call to opt in.
DEFAULT_OVERLAP_FLOOR = 1e-12


def weak_value(
    A: LinearOperator,
    pre: QuantumState,
    post: QuantumState,
    overlap_floor: float = DEFAULT_OVERLAP_FLOOR,
) -> complex:
    """<post|A|pre> / <post|pre>; raises OrthogonalSelection below the floor."""
    denom = inner_product(post, pre)
    if abs(denom) <= overlap_floor:
        raise OrthogonalSelection(
            f"|<post|pre>| = {abs(denom):.3e} is at or below the floor {overlap_floor:.1e}"
        )
    return inner_product(post, apply_operator(A, pre)) / denom


def postselection_probability(pre: QuantumState, post: QuantumState) -> float:
    """|<post|pre>|^2 for normalized states."""
    return abs(inner_product(post, pre)) ** 2


def circular_sigma_z() -> np.ndarray:
    """Circular-polarization observable |+><+| - |-><-| in the (H, V) basis.

    Built explicitly from the circular kets (|H> +- i|V>)/sqrt(2) rather than
    hard-coded, so the matrix stays traceable to the basis definition.
    """
    plus = np.array([1.0, 1j]) / np.sqrt(2.0)
    minus = np.array([1.0, -1j]) / np.sqrt(2.0)
    return np.outer(plus, plus.conj()) - np.outer(minus, minus.conj())


def _path_mode_for_label(layout: HilbertLayout, arm_label: str):
    pos, idx = layout.locate_label(arm_label)
    mode = layout.modes[pos]
    if mode.kind != PATH:
        raise UnknownMode(f"basis label {arm_label!r} belongs to a {mode.kind} mode, not a path")
    return pos, idx, mode


def position_projector(arm_label: str, layout: HilbertLayout) -> LinearOperator:
    """Projector onto one arm: |x><x| on the path mode carrying the label."""
    pos, idx, mode = _path_mode_for_label(layout, arm_label)
    small = np.zeros((mode.dim, mode.dim))
    small[idx, idx] = 1.0
    op = LinearOperator(HilbertLayout((mode,)), small, hermitian=True)
    return embed_operator(op, [mode.name], layout)


def paired_polarization_mode(layout: HilbertLayout, path_position: int):
    """The polarization mode read out alongside a path mode.

    Pairing rule: the first polarization mode following the path mode in
    layout order, before any further path mode.
    """
    for mode in layout.modes[path_position + 1 :]:
        if mode.kind == POLARIZATION:
            return mode
        if mode.kind == PATH:
            break
    raise UnknownMode(
        f"no polarization mode is paired with path mode "
        f"{layout.modes[path_position].name!r}"
    )


def polarization_observable(arm_label: str, layout: HilbertLayout) -> LinearOperator:
    """Arm-resolved circular polarization: arm projector times sigma_z.

    Acting on the path mode carrying ``arm_label`` and its paired polarization
    mode; Hermitian with eigenvalues {-1, 0, +1}.
    """
    pos, idx, path_mode = _path_mode_for_label(layout, arm_label)
    pol_mode = paired_polarization_mode(layout, pos)
    proj = np.zeros((path_mode.dim, path_mode.dim))
    proj[idx, idx] = 1.0
    joint = np.kron(proj, circular_sigma_z())
    sub = HilbertLayout((path_mode, pol_mode))
    op = LinearOperator(sub, joint, hermitian=True)
    return embed_operator(op, [path_mode.name, pol_mode.name], layout)


@dataclass(frozen=True)
class WeakValueReport:
    """All requested weak values for one pre/post pair, plus the selection data."""

    entries: tuple[tuple[str, complex], ...]
    postselection_amplitude: complex
    postselection_probability: float

    def value(self, name: str) -> complex:
        for key, val in self.entries:
            if key == name:
                return val
        raise KeyError(name)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(key for key, _ in self.entries)


def weak_value_report(
    pre: QuantumState,
    post: QuantumState,
    observables: Sequence[tuple[str, LinearOperator]],
    overlap_floor: float = DEFAULT_OVERLAP_FLOOR,
) -> WeakValueReport:
    """Evaluate a named observable list against one selection."""
    amplitude = inner_product(post, pre)
    entries = []
    for name, op in observables:
        try:
            entries.append((name, weak_value(op, pre, post, overlap_floor)))
        except OrthogonalSelection as exc:
            raise OrthogonalSelection(f"observable {name!r}: {exc}") from None
    return WeakValueReport(
        entries=tuple(entries),
        postselection_amplitude=amplitude,
        postselection_probability=abs(amplitude) ** 2,
    )


def _bloch_states(steps_angle: int, steps_phase: int) -> list[np.ndarray]:
    kets = []
    for a in range(steps_angle):
        theta = np.pi * (a + 0.5) / steps_angle  # avoid exact poles
        for p in range(steps_phase):
            phi = 2.0 * np.pi * p / steps_phase
            kets.append(np.array([np.cos(theta / 2.0), np.exp(1j * phi) * np.sin(theta / 2.0)]))
    return kets


def anomalous_postselection_search(
    A: LinearOperator,
    pre: QuantumState,
    steps_angle: int = 8,
    steps_phase: int = 4,
    overlap_floor: float = 1e-6,
) -> tuple[QuantumState, complex]:
    """Brute-force search for a postselection with a large real weak value.

    Sweeps product postselections over a coarse per-mode Bloch grid and
    returns the one maximizing Re of the weak value. Grid size grows as
    (steps_angle * steps_phase) ** n_modes; intended for small layouts.
    Selections with overlap at or below ``overlap_floor`` are skipped, so the
    reported value is a finite, attainable one.
    """
    layout = pre.layout
    per_mode = _bloch_states(steps_angle, steps_phase)
    a_pre = apply_operator(A, pre).amplitudes
    best_val = None
    best_post = None
    for combo in itertools.product(per_mode, repeat=len(layout.modes)):
        post = combo[0]
        for ket in combo[1:]:
            post = np.kron(post, ket)
        denom = np.vdot(post, pre.amplitudes)
        if abs(denom) <= overlap_floor:
            continue
        val = np.vdot(post, a_pre) / denom
        if best_val is None or val.real > best_val.real:
            best_val = val
            best_post = post
    if best_val is None:
        raise OrthogonalSelection("every grid postselection was orthogonal to the preselection")
    return QuantumState(layout, best_post), complex(best_val)
