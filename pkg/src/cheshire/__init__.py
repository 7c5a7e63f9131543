"""Weak-value simulation toolkit for pre/postselected interferometry.

Exact weak values, idealized optical elements, a von Neumann pointer model
with Monte Carlo readout, and a small text format for scenario files. Ships
the single-cat and grin-swap interferometer setups as built-ins.
"""

from .errors import (
    BasisNotOrthonormal,
    CheshireError,
    ConstraintsNotIsometric,
    DimensionMismatch,
    DuplicateModeName,
    GridTooCoarse,
    LayoutMismatch,
    NotHermitian,
    NotNormalized,
    NotUnitary,
    OrthogonalSelection,
    ParseError,
    PostselectionImpossible,
    ShiftExceedsGrid,
    UnknownMode,
    ValidationError,
    WrongModeKind,
    ZeroCoupling,
)
from .optics import (
    OpticalElement,
    RoutingConstraint,
    beam_splitter,
    complete_partial_isometry,
    half_wave_plate,
    mirror,
    phase_shifter,
    polarizing_beam_splitter,
)
from .pointer import (
    MeterState,
    PointerGrid,
    PointerStatistics,
    PointerWavefunction,
    attach_pointer,
    estimate_weak_value,
    pointer_distribution,
    pointer_statistics,
    postselect_pointer,
    sample_readings,
    system_marginal,
    weak_couple,
)
from .qcore import (
    PATH,
    POLARIZATION,
    HilbertLayout,
    LinearOperator,
    Mode,
    QuantumState,
    apply_operator,
    basis_ket,
    born_sample,
    embed_operator,
    identity_operator,
    inner_product,
    partial_trace,
    projector,
    tensor_product,
)
from .scenario import (
    DetectorNetwork,
    ObservableOutcome,
    ObservableSpec,
    PointerSettings,
    Scenario,
    ScenarioResult,
    builtin_grin_swap,
    builtin_single_cat,
    fixture_text,
    load_builtin,
    parse_scenario,
    run_scenario,
    scenarios_equivalent,
    serialize_scenario,
    single_cat_detector_network,
)
from .weakval import (
    WeakValueReport,
    anomalous_postselection_search,
    circular_sigma_z,
    polarization_observable,
    position_projector,
    postselection_probability,
    weak_value,
    weak_value_report,
)

__version__ = "0.1.0"
