"""Scenario definitions: built-in setups, the ``.qcc`` text format, and runners.

Format reference
----------------
A scenario document is UTF-8 text, one section per line; ``#`` starts a
comment. Sections ``modes``, ``pre``, ``post`` and ``observables`` are
required, ``elements`` and ``pointer`` optional. Unknown or repeated sections
are hard errors: silent misconfiguration would corrupt physics results.

    modes:       path=path(L,R) pol=polarization(H,V)
    pre:         (i|L,H> + |R,H>) / sqrt(2)
    post:        (|L,H> + |R,V>) / sqrt(2)
    elements:    bs(path) ps(path,R) hwp(pol) pbs(path,pol) mirror(path)
    observables: Pi_L=proj(L) Pi_R=proj(R) sigma_z_L=polz(L) sigma_z_R=polz(R)
    pointer:     g=0.01 sigma=1 points=1024 half_width=8

Ket expressions are complex-coefficient linear combinations of labeled basis
kets with ``i``, ``sqrt()``, rationals and parentheses; one label per mode, in
mode order. Basis order inside a mode follows its label list: (L, R) for
paths, (H, V) for polarizations. Labels must be unique across the layout.
``proj(x)`` projects onto arm ``x``; ``polz(x)`` reads the circular
polarization travelling in arm ``x`` (the projector times sigma_z on the path
mode's paired polarization mode). States are normalized during load.

Scenarios are immutable after parsing; independent runs are safe to execute
concurrently. Monte Carlo runs derive one seed per observable as
``base_seed + observable_index``, so results are reproducible for a fixed
base seed regardless of scheduling.
"""

from __future__ import annotations

import cmath
import importlib.resources
import re
from dataclasses import dataclass, field
from typing import Callable, Iterator, Sequence

import numpy as np

from . import optics, pointer, weakval
from .errors import (
    CheshireError,
    ParseError,
    PostselectionImpossible,
    UnknownMode,
    ValidationError,
    ZeroCoupling,
)
from .optics import OpticalElement, RoutingConstraint, complete_partial_isometry
from .pointer import PointerGrid
from .qcore import (
    PATH,
    POLARIZATION,
    HilbertLayout,
    LinearOperator,
    Mode,
    QuantumState,
    apply_operator,
    basis_ket,
    embed_operator,
    inner_product,
    projector,
    tensor_product,
)
from .weakval import WeakValueReport, weak_value_report

AMPLITUDE_ATOL = 1e-12


@dataclass(frozen=True)
class PointerSettings:
    g: float = 0.01
    grid: PointerGrid = field(default_factory=PointerGrid)


@dataclass(frozen=True)
class ObservableSpec:
    """A named observable plus the recipe it was built from (for serialization)."""

    name: str
    family: str  # "proj" | "polz"
    arm: str
    operator: LinearOperator


@dataclass(frozen=True)
class Scenario:
    """One complete pre/postselected setup with its observables."""

    name: str
    layout: HilbertLayout
    preselection: QuantumState
    postselection: QuantumState
    observables: tuple[ObservableSpec, ...]
    elements: tuple[OpticalElement, ...] = ()
    pointer: PointerSettings = field(default_factory=PointerSettings)

    def operator_items(self) -> tuple[tuple[str, LinearOperator], ...]:
        return tuple((o.name, o.operator) for o in self.observables)

    def observable(self, name: str) -> LinearOperator:
        for spec in self.observables:
            if spec.name == name:
                return spec.operator
        raise UnknownMode(f"scenario has no observable named {name!r}")


def scenarios_equivalent(a: Scenario, b: Scenario, atol: float = AMPLITUDE_ATOL) -> bool:
    """Physics-content equality up to amplitude tolerance (names ignored)."""
    if a.layout != b.layout or a.elements != b.elements or a.pointer != b.pointer:
        return False
    if not a.preselection.allclose(b.preselection, atol=atol):
        return False
    if not a.postselection.allclose(b.postselection, atol=atol):
        return False
    if len(a.observables) != len(b.observables):
        return False
    for oa, ob in zip(a.observables, b.observables):
        if (oa.name, oa.family, oa.arm) != (ob.name, ob.family, ob.arm):
            return False
        if not oa.operator.allclose(ob.operator, atol=atol):
            return False
    return True


# --- built-in scenarios -------------------------------------------------------


def _observable_set(layout: HilbertLayout, arms: Sequence[str]) -> tuple[ObservableSpec, ...]:
    specs = []
    for arm in arms:
        specs.append(
            ObservableSpec(f"Pi_{arm}", "proj", arm, weakval.position_projector(arm, layout))
        )
    for arm in arms:
        pos, _ = layout.locate_label(arm)
        prime = "'" if layout.modes[pos].name.endswith("'") else ""
        specs.append(
            ObservableSpec(
                f"sigma_z{prime}_{arm}",
                "polz",
                arm,
                weakval.polarization_observable(arm, layout),
            )
        )
    return tuple(specs)


def builtin_single_cat() -> Scenario:
    """Single photon in a two-arm interferometer, polarization read per arm.

    The photon enters horizontally polarized, picks up the reflection phase i
    in the left arm, and is postselected on the path/polarization-entangled
    state (|L,H> + |R,V>)/sqrt(2). Position weak values then place the photon
    in the left arm while its circular polarization registers in the right.
    """
    layout = HilbertLayout((Mode("path", PATH), Mode("pol", POLARIZATION)))
    pre = (1j * basis_ket(layout, ("L", "H")) + basis_ket(layout, ("R", "H"))).normalized()
    post = (basis_ket(layout, ("L", "H")) + basis_ket(layout, ("R", "V"))).normalized()
    return Scenario(
        name="single-cat",
        layout=layout,
        preselection=pre,
        postselection=post,
        observables=_observable_set(layout, ("L", "R")),
    )


def builtin_grin_swap() -> Scenario:
    """Two overlapping interferometers whose circular polarizations swap owners.

    Each photon separates from its polarization as in the single-cat setup;
    postselecting on a four-qubit cluster state recombines each photon with
    the other one's polarization. The postselection is represented directly as
    the projector onto that state (its detector cascade reduces to exactly
    this projection).
    """
    unprimed = HilbertLayout((Mode("path", PATH), Mode("pol", POLARIZATION)))
    primed = HilbertLayout(
        (
            Mode("path'", PATH, labels=("L'", "R'")),
            Mode("pol'", POLARIZATION, labels=("H'", "V'")),
        )
    )
    pre_left = (
        1j * basis_ket(unprimed, ("L", "H")) + basis_ket(unprimed, ("R", "H"))
    ).normalized()
    pre_right = (
        basis_ket(primed, ("L'", "H'")) + 1j * basis_ket(primed, ("R'", "H'"))
    ).normalized()
    pre = tensor_product(pre_left, pre_right)
    layout = pre.layout

    post = (
        basis_ket(layout, ("L", "H", "R'", "H'"))
        + basis_ket(layout, ("R", "V", "R'", "H'"))
        + basis_ket(layout, ("L", "H", "L'", "V'"))
        - basis_ket(layout, ("R", "V", "L'", "V'"))
    ).normalized()
    return Scenario(
        name="grin-swap",
        layout=layout,
        preselection=pre,
        postselection=post,
        observables=_observable_set(layout, ("L", "R", "L'", "R'")),
    )


BUILTIN_SCENARIOS: dict[str, Callable[[], Scenario]] = {
    "single-cat": builtin_single_cat,
    "single_cat": builtin_single_cat,
    "grin-swap": builtin_grin_swap,
    "grin_swap": builtin_grin_swap,
}


def load_builtin(name: str) -> Scenario:
    try:
        return BUILTIN_SCENARIOS[name]()
    except KeyError:
        raise UnknownMode(f"no built-in scenario named {name!r}") from None


def fixture_text(name: str) -> str:
    """Raw text of a shipped ``.qcc`` fixture ('single_cat' or 'grin_swap')."""
    resource = importlib.resources.files("cheshire") / "scenarios" / f"{name}.qcc"
    return resource.read_text(encoding="utf-8")


# --- ket expression parsing -----------------------------------------------------

_TOKEN_RE = re.compile(
    r"""
    (?P<number>\d+(?:\.\d*)?(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<ket>\|[^|>]*>)
  | (?P<op>[-+*/()])
  | (?P<space>\s+)
  | (?P<bad>.)
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Token:
    kind: str  # number | name | ket | op | end
    text: str
    column: int


def _tokenize(text: str, line: int, offset: int) -> list[_Token]:
    tokens = []
    for match in _TOKEN_RE.finditer(text):
        kind = match.lastgroup
        column = offset + match.start() + 1
        if kind == "space":
            continue
        if kind == "bad":
            raise ParseError(f"unexpected character {match.group()!r}", line, column)
        tokens.append(_Token(kind, match.group(), column))
    tokens.append(_Token("end", "", offset + len(text) + 1))
    return tokens


class _KetExpressionParser:
    """Recursive-descent parser for ket expressions.

    Values are either complex scalars or amplitude vectors; juxtaposition
    multiplies (so ``2i|L,H>`` needs no ``*``).
    """

    def __init__(self, tokens: list[_Token], layout: HilbertLayout, line: int):
        self.tokens = tokens
        self.layout = layout
        self.line = line
        self.pos = 0

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def fail(self, message: str, token: _Token | None = None):
        tok = token or self.peek()
        raise ParseError(message, self.line, tok.column)

    def parse(self) -> np.ndarray:
        value = self.expression()
        if self.peek().kind != "end":
            self.fail(f"unexpected trailing input {self.peek().text!r}")
        if np.isscalar(value):
            self.fail("expected a ket expression, found a bare scalar")
        return value

    def expression(self):
        value = self.term()
        while self.peek().kind == "op" and self.peek().text in "+-":
            op = self.advance()
            rhs = self.term()
            if np.isscalar(value) != np.isscalar(rhs):
                self.fail("cannot add a scalar and a ket", op)
            value = value + rhs if op.text == "+" else value - rhs
        return value

    _STARTERS = {"number", "name", "ket"}

    def term(self):
        value = self.unary()
        while True:
            tok = self.peek()
            if tok.kind == "op" and tok.text in "*/":
                self.advance()
                rhs = self.unary()
                value = self._combine(value, rhs, tok)
            elif tok.kind in self._STARTERS or (tok.kind == "op" and tok.text == "("):
                rhs = self.unary()
                value = self._combine(value, rhs, tok)
            else:
                return value

    def _combine(self, lhs, rhs, tok: _Token):
        if tok.text == "/":
            if not np.isscalar(rhs):
                self.fail("can only divide by a scalar", tok)
            if rhs == 0:
                self.fail("division by zero", tok)
            return lhs / rhs
        if not np.isscalar(lhs) and not np.isscalar(rhs):
            self.fail("cannot multiply two kets", tok)
        return lhs * rhs

    def unary(self):
        if self.peek().kind == "op" and self.peek().text == "-":
            self.advance()
            return -self.unary()
        if self.peek().kind == "op" and self.peek().text == "+":
            self.advance()
            return self.unary()
        return self.atom()

    def atom(self):
        tok = self.advance()
        if tok.kind == "number":
            return complex(float(tok.text))
        if tok.kind == "name":
            if tok.text == "i":
                return 1j
            if tok.text == "sqrt":
                self._expect_open_paren()
                arg = self.expression()
                self._expect_close_paren()
                if not np.isscalar(arg):
                    self.fail("sqrt() takes a scalar", tok)
                return cmath.sqrt(arg)
            self.fail(f"unknown symbol {tok.text!r} (only 'i' and 'sqrt' are allowed)", tok)
        if tok.kind == "ket":
            return self._ket(tok)
        if tok.kind == "op" and tok.text == "(":
            value = self.expression()
            self._expect_close_paren()
            return value
        self.fail("expected a number, 'i', 'sqrt', '(' or a ket", tok)

    def _expect_open_paren(self):
        tok = self.advance()
        if not (tok.kind == "op" and tok.text == "("):
            self.fail("expected '('", tok)

    def _expect_close_paren(self):
        tok = self.advance()
        if not (tok.kind == "op" and tok.text == ")"):
            self.fail("expected ')'", tok)

    def _ket(self, tok: _Token) -> np.ndarray:
        inner = tok.text[1:-1]
        labels = [part.strip() for part in inner.split(",")]
        if labels == [""]:
            self.fail("empty ket", tok)
        if len(labels) != len(self.layout.modes):
            self.fail(
                f"ket {tok.text!r} has {len(labels)} labels, layout has "
                f"{len(self.layout.modes)} modes",
                tok,
            )
        for mode, label in zip(self.layout.modes, labels):
            if label not in mode.labels:
                self.fail(
                    f"unknown basis label {label!r} for mode {mode.name!r} "
                    f"(expected one of {', '.join(mode.labels)})",
                    tok,
                )
        return basis_ket(self.layout, tuple(labels)).amplitudes


def parse_ket_expression(
    text: str, layout: HilbertLayout, line: int = 1, offset: int = 0
) -> QuantumState:
    tokens = _tokenize(text, line, offset)
    amplitudes = _KetExpressionParser(tokens, layout, line).parse()
    return QuantumState(layout, amplitudes)


# --- scenario document parsing ---------------------------------------------------

_REQUIRED_SECTIONS = ("modes", "pre", "post", "observables")
_ALL_SECTIONS = ("modes", "pre", "post", "elements", "observables", "pointer")

_MODE_ENTRY_RE = re.compile(
    r"^(?P<name>[A-Za-z_][\w']*)=(?P<kind>path|polarization)"
    r"\((?P<labels>[^()]*)\)$"
)
_OBSERVABLE_ENTRY_RE = re.compile(
    r"^(?P<name>[A-Za-z_][\w'^]*)=(?P<family>proj|polz)\((?P<arm>[^()]+)\)$"
)
_ELEMENT_ENTRY_RE = re.compile(r"^(?P<kind>[a-z_]+)\((?P<args>[^()]*)\)$")
_POINTER_ENTRY_RE = re.compile(r"^(?P<key>[a-z_]+)=(?P<value>[-+.\deE]+)$")

_ELEMENT_KINDS = {
    "bs": "beam_splitter",
    "hwp": "half_wave_plate",
    "ps": "phase_shifter",
    "pbs": "polarizing_beam_splitter",
    "mirror": "mirror",
}


def _split_entries(content: str, line: int, offset: int) -> Iterator[tuple[str, int]]:
    """Whitespace-separated entries with their absolute column positions."""
    for match in re.finditer(r"\S+", content):
        yield match.group(), offset + match.start() + 1


def _collect_sections(text: str) -> dict[str, tuple[str, int, int]]:
    sections: dict[str, tuple[str, int, int]] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.split("#", 1)[0].rstrip()
        if not stripped.strip():
            continue
        match = re.match(r"^(\w+)\s*:\s*", stripped)
        if not match:
            raise ParseError("expected 'section: content'", lineno, 1)
        name = match.group(1)
        if name not in _ALL_SECTIONS:
            raise ParseError(
                f"unknown section {name!r} (expected one of {', '.join(_ALL_SECTIONS)})",
                lineno,
                1,
            )
        if name in sections:
            raise ParseError(f"duplicate section {name!r}", lineno, 1)
        sections[name] = (stripped[match.end():], lineno, match.end())
    for name in _REQUIRED_SECTIONS:
        if name not in sections:
            raise ParseError(f"missing required section {name!r}")
    return sections


def _parse_modes(content: str, line: int, offset: int) -> HilbertLayout:
    modes = []
    seen_labels: set[str] = set()
    for entry, column in _split_entries(content, line, offset):
        match = _MODE_ENTRY_RE.match(entry)
        if not match:
            raise ParseError(
                f"bad mode entry {entry!r}; expected name=path(l1,l2) or "
                "name=polarization(l1,l2)",
                line,
                column,
            )
        labels = tuple(lab.strip() for lab in match.group("labels").split(","))
        if len(labels) != 2 or not all(labels):
            raise ParseError(f"mode {match.group('name')!r} needs exactly two labels", line, column)
        overlap = seen_labels.intersection(labels)
        if overlap:
            raise ParseError(
                f"basis label {sorted(overlap)[0]!r} is used by more than one mode", line, column
            )
        seen_labels.update(labels)
        try:
            modes.append(Mode(match.group("name"), match.group("kind"), 2, labels))
        except (ValueError, CheshireError) as exc:
            raise ParseError(str(exc), line, column) from None
    if not modes:
        raise ParseError("modes section is empty", line, offset + 1)
    try:
        return HilbertLayout(tuple(modes))
    except CheshireError as exc:
        raise ParseError(str(exc), line, offset + 1) from None


def _parse_state(
    content: str, line: int, offset: int, layout: HilbertLayout, which: str
) -> QuantumState:
    state = parse_ket_expression(content, layout, line, offset)
    if state.norm() < 1e-12:
        raise ValidationError(f"{which} state is the zero ket and cannot be normalized")
    return state.normalized()


def _parse_observables(
    content: str, line: int, offset: int, layout: HilbertLayout
) -> tuple[ObservableSpec, ...]:
    specs = []
    names = set()
    for entry, column in _split_entries(content, line, offset):
        match = _OBSERVABLE_ENTRY_RE.match(entry)
        if not match:
            raise ParseError(
                f"bad observable entry {entry!r}; expected Name=proj(arm) or Name=polz(arm)",
                line,
                column,
            )
        name, family, arm = match.group("name"), match.group("family"), match.group("arm").strip()
        if name in names:
            raise ParseError(f"observable {name!r} defined twice", line, column)
        names.add(name)
        try:
            if family == "proj":
                op = weakval.position_projector(arm, layout)
            else:
                op = weakval.polarization_observable(arm, layout)
        except UnknownMode as exc:
            raise ParseError(str(exc), line, column) from None
        specs.append(ObservableSpec(name, family, arm, op))
    if not specs:
        raise ParseError("observables section is empty", line, offset + 1)
    return tuple(specs)


def _parse_elements(
    content: str, line: int, offset: int, layout: HilbertLayout
) -> tuple[OpticalElement, ...]:
    elements = []
    for entry, column in _split_entries(content, line, offset):
        match = _ELEMENT_ENTRY_RE.match(entry)
        if not match or match.group("kind") not in _ELEMENT_KINDS:
            raise ParseError(
                f"bad element entry {entry!r}; expected one of "
                f"{', '.join(sorted(_ELEMENT_KINDS))}(...)",
                line,
                column,
            )
        kind = _ELEMENT_KINDS[match.group("kind")]
        args = [a.strip() for a in match.group("args").split(",") if a.strip()]
        try:
            element = _element_from_args(kind, args, layout)
            element.realize(layout)  # validate targets eagerly
        except (CheshireError, ValueError, IndexError) as exc:
            raise ParseError(f"element {entry!r}: {exc}", line, column) from None
        elements.append(element)
    return tuple(elements)


def _element_from_args(kind: str, args: list[str], layout: HilbertLayout) -> OpticalElement:
    if kind == "phase_shifter":
        mode_name, port_label = args
        port = layout.mode(mode_name).label_index(port_label)
        return OpticalElement(kind, (mode_name,), (float(port),))
    if kind == "polarizing_beam_splitter":
        return OpticalElement(kind, (args[0], args[1]))
    if kind == "beam_splitter" and len(args) == 2:
        return OpticalElement(kind, (args[0],), (float(args[1]),))
    return OpticalElement(kind, (args[0],))


def _parse_pointer(content: str, line: int, offset: int) -> PointerSettings:
    values: dict[str, float] = {}
    for entry, column in _split_entries(content, line, offset):
        match = _POINTER_ENTRY_RE.match(entry)
        if not match:
            raise ParseError(f"bad pointer entry {entry!r}; expected key=value", line, column)
        key = match.group("key")
        if key not in ("g", "sigma", "points", "half_width"):
            raise ParseError(f"unknown pointer parameter {key!r}", line, column)
        if key in values:
            raise ParseError(f"pointer parameter {key!r} given twice", line, column)
        values[key] = float(match.group("value"))
    points = values.get("points", 1024.0)
    if points != int(points):
        raise ParseError("points must be an integer", line, offset + 1)
    try:
        grid = PointerGrid(
            half_width=values.get("half_width", 8.0),
            points=int(points),
            sigma=values.get("sigma", 1.0),
        )
    except CheshireError as exc:
        raise ValidationError(f"pointer configuration: {exc}") from exc
    g = values.get("g", 0.01)
    if g < 0.0:
        raise ValidationError("pointer coupling g must be nonnegative")
    return PointerSettings(g=g, grid=grid)


def parse_scenario(text: str, name: str = "scenario") -> Scenario:
    """Parse and validate a scenario document.

    Raises ParseError (with line/column) for grammar violations and
    ValidationError for documents that parse but describe an unusable setup
    (orthogonal selection, zero kets, bad pointer configuration).
    """
    sections = _collect_sections(text)
    layout = _parse_modes(*sections["modes"])
    pre = _parse_state(*sections["pre"], layout=layout, which="pre")
    post = _parse_state(*sections["post"], layout=layout, which="post")
    observables = _parse_observables(*sections["observables"], layout=layout)

    elements: tuple[OpticalElement, ...] = ()
    if "elements" in sections:
        elements = _parse_elements(*sections["elements"], layout=layout)
    settings = PointerSettings()
    if "pointer" in sections:
        settings = _parse_pointer(*sections["pointer"])

    if abs(inner_product(post, pre)) <= weakval.DEFAULT_OVERLAP_FLOOR:
        raise ValidationError(
            "pre- and postselection are orthogonal: every weak value is undefined"
        )
    return Scenario(
        name=name,
        layout=layout,
        preselection=pre,
        postselection=post,
        observables=observables,
        elements=elements,
        pointer=settings,
    )


def _format_amplitude(z: complex) -> str:
    def fmt(x: float) -> str:
        return f"{x:.17g}"

    re_part, im_part = z.real, z.imag
    if im_part == 0.0:
        return fmt(re_part)
    if re_part == 0.0:
        return f"{fmt(im_part)}i"
    sign = "+" if im_part >= 0 else "-"
    return f"({fmt(re_part)}{sign}{fmt(abs(im_part))}i)"


def serialize_scenario(scenario: Scenario) -> str:
    """Render a scenario back to document text; parse() of it round-trips."""
    mode_entries = " ".join(
        f"{m.name}={m.kind}({','.join(m.labels)})" for m in scenario.layout.modes
    )
    lines = [f"modes: {mode_entries}"]
    for section, state in (("pre", scenario.preselection), ("post", scenario.postselection)):
        terms = []
        for index, amp in enumerate(state.amplitudes):
            if abs(amp) < AMPLITUDE_ATOL / 10.0:
                continue
            labels = _index_labels(scenario.layout, index)
            coeff = _format_amplitude(complex(amp))
            terms.append(f"{coeff}|{','.join(labels)}>")
        lines.append(f"{section}: " + " + ".join(terms))
    if scenario.elements:
        reverse = {v: k for k, v in _ELEMENT_KINDS.items()}
        entries = []
        for el in scenario.elements:
            short = reverse[el.kind]
            if el.kind == "phase_shifter":
                mode = scenario.layout.mode(el.targets[0])
                entries.append(f"{short}({el.targets[0]},{mode.labels[int(el.params[0])]})")
            elif el.params:
                entries.append(f"{short}({','.join(el.targets)},{el.params[0]:g})")
            else:
                entries.append(f"{short}({','.join(el.targets)})")
        lines.append("elements: " + " ".join(entries))
    obs_entries = " ".join(f"{o.name}={o.family}({o.arm})" for o in scenario.observables)
    lines.append(f"observables: {obs_entries}")
    grid = scenario.pointer.grid
    lines.append(
        f"pointer: g={scenario.pointer.g:.17g} sigma={grid.sigma:.17g} "
        f"points={grid.points} half_width={grid.half_width:.17g}"
    )
    return "\n".join(lines) + "\n"


def _index_labels(layout: HilbertLayout, index: int) -> list[str]:
    labels = []
    for dim in reversed(layout.dims):
        labels.append(index % dim)
        index //= dim
    return [mode.labels[k] for mode, k in zip(layout.modes, reversed(labels))]


# --- the postselection block as concrete optics ----------------------------------


@dataclass(frozen=True)
class DetectorNetwork:
    """Concrete unitaries for the single-cat postselection block, plus ports.

    Stages apply in order: an arm-local half-wave plate (right arm), the
    phase shifter on the right arm, the recombining beam splitter, and the
    polarizing beam splitter. Ports are named projectors on the output space;
    their probabilities are Born probabilities.
    """

    layout: HilbertLayout
    stages: tuple[tuple[str, LinearOperator], ...]
    ports: tuple[tuple[str, LinearOperator], ...]

    def stage_names(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.stages)

    def propagate(self, state: QuantumState, from_stage: str | None = None) -> QuantumState:
        """Send a state through the block, optionally entering at a later stage.

        ``from_stage="BS2"`` models a photon incident directly on the
        recombining beam splitter.
        """
        names = self.stage_names()
        start = 0 if from_stage is None else names.index(from_stage)
        for _, op in self.stages[start:]:
            state = apply_operator(op, state)
        return state

    def port_probabilities(
        self, state: QuantumState, from_stage: str | None = None
    ) -> dict[str, float]:
        out = self.propagate(state, from_stage)
        return {
            name: float(np.real(np.vdot(out.amplitudes, proj.matrix @ out.amplitudes)))
            for name, proj in self.ports
        }


def single_cat_detector_network() -> DetectorNetwork:
    """Build the single-cat postselection block from routing behaviour.

    The recombining beam splitter is synthesized from its defining constraint:
    a photon arriving in the path state (|L> + i|R>)/sqrt(2) always continues
    toward the polarizing beam splitter, never to the D2 port. After the
    block, exactly the postselected state lands on D1 with certainty, so
    P(D1) equals the postselection probability for every input.
    """
    scenario = builtin_single_cat()
    layout = scenario.layout

    # Half-wave plate in the right arm only: flips H<->V where the phase
    # shifter will act, leaving the left arm untouched.
    hwp_matrix = np.zeros((4, 4))
    hwp_matrix[0, 0] = hwp_matrix[1, 1] = 1.0  # (L,H), (L,V) pass
    hwp_matrix[2, 3] = hwp_matrix[3, 2] = 1.0  # (R,H) <-> (R,V)
    hwp_right = LinearOperator(layout, hwp_matrix, unitary=True)

    ps_right = optics.phase_shifter(layout, "path", "R")

    path_layout = layout.sublayout(["path"])
    toward_pbs = basis_ket(path_layout, ("L",))  # output label 0 reads "toward PBS"
    keep_going = (basis_ket(path_layout, ("L",)) + 1j * basis_ket(path_layout, ("R",))).normalized()
    bs2_small = complete_partial_isometry([RoutingConstraint(keep_going, toward_pbs)])
    bs2 = embed_operator(bs2_small, ["path"], layout)

    pbs = optics.polarizing_beam_splitter(layout, "path", "pol")

    # Output basis after the full block: (0,H) is the PBS-transmitted beam
    # (D1); (1,V) is the PBS-reflected beam (D3); the D2 beam bypasses the
    # PBS and occupies the remaining two basis states.
    d1 = projector(basis_ket(layout, (0, 0)))
    d3 = projector(basis_ket(layout, (1, 1)))
    d2 = projector(basis_ket(layout, (1, 0))) + projector(basis_ket(layout, (0, 1)))

    return DetectorNetwork(
        layout=layout,
        stages=(("HWP", hwp_right), ("PS", ps_right), ("BS2", bs2), ("PBS", pbs)),
        ports=(("D1", d1), ("D2", d2), ("D3", d3)),
    )


# --- running scenarios ------------------------------------------------------------


@dataclass(frozen=True)
class ObservableOutcome:
    """Per-observable result of a pointer or Monte Carlo run."""

    name: str
    exact: complex
    estimate: float | None = None
    std_error: float | None = None
    success_probability: float | None = None
    acceptance_rate: float | None = None
    n_accepted: int | None = None


@dataclass(frozen=True)
class ScenarioResult:
    scenario: str
    mode: str
    report: WeakValueReport
    outcomes: tuple[ObservableOutcome, ...]
    g: float | None = None
    seed: int | None = None
    samples: int | None = None

    def outcome(self, name: str) -> ObservableOutcome:
        for out in self.outcomes:
            if out.name == name:
                return out
        raise KeyError(name)


MODES = ("exact", "pointer", "montecarlo")


def run_scenario(
    scenario: Scenario,
    mode: str = "exact",
    g: float | None = None,
    seed: int = 0,
    samples: int | None = None,
    grid: PointerGrid | None = None,
) -> ScenarioResult:
    """Evaluate every observable of a scenario in the requested mode.

    exact       weak values from the defining expression only.
    pointer     full coupling/postselection pipeline; estimate = pointer mean / g.
    montecarlo  adds per-trial postselection and sampled readings; needs a
                sample count, and derives per-observable seeds as
                seed + observable index.
    """
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}")
    report = weak_value_report(
        scenario.preselection, scenario.postselection, scenario.operator_items()
    )
    if mode == "exact":
        outcomes = tuple(ObservableOutcome(name, report.value(name)) for name, _ in report.entries)
        return ScenarioResult(scenario.name, mode, report, outcomes)

    g = scenario.pointer.g if g is None else g
    grid = scenario.pointer.grid if grid is None else grid
    if g <= 0.0:
        raise ZeroCoupling("pointer and montecarlo modes need g > 0")
    if mode == "montecarlo" and (samples is None or samples < 1):
        raise ValueError("montecarlo mode needs a positive sample count")

    outcomes = []
    for index, (name, op) in enumerate(scenario.operator_items()):
        try:
            meter = pointer.attach_pointer(scenario.preselection, grid)
            coupled = pointer.weak_couple(meter, op, g)
            wavefn, probability = pointer.postselect_pointer(coupled, scenario.postselection)
        except CheshireError as exc:
            raise type(exc)(f"scenario {scenario.name!r}, observable {name!r}: {exc}") from exc
        if mode == "pointer":
            stats = pointer.pointer_statistics(wavefn)
            outcomes.append(
                ObservableOutcome(
                    name,
                    report.value(name),
                    estimate=stats.mean / g,
                    success_probability=probability,
                )
            )
            continue
        rng = np.random.default_rng(seed + index)
        accepted = int(rng.binomial(samples, probability))
        if accepted == 0:
            raise PostselectionImpossible(
                f"scenario {scenario.name!r}, observable {name!r}: "
                f"no trial passed postselection out of {samples}"
            )
        readings = pointer.sample_readings(wavefn, accepted, rng)
        estimate, std_error = pointer.estimate_weak_value(readings, g)
        outcomes.append(
            ObservableOutcome(
                name,
                report.value(name),
                estimate=estimate,
                std_error=std_error,
                success_probability=probability,
                acceptance_rate=accepted / samples,
                n_accepted=accepted,
            )
        )
    return ScenarioResult(
        scenario.name,
        mode,
        report,
        tuple(outcomes),
        g=g,
        seed=seed if mode == "montecarlo" else None,
        samples=samples if mode == "montecarlo" else None,
    )
