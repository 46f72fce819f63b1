"""Entanglement-witness toolkit for coherent one-way (COW) QKD links.

The heart of the package is the two-parameter operator family

    W(a, b) = I(x)I + a Z(x)Z + b |x+><x+|(x)X

on the effective early/late time-bin qubit pair.  The pieces:

* :mod:`cowitness.operators` builds W and its spectrum (closed form and
  an independent Jacobi route);
* :mod:`cowitness.validity` classifies (a, b) points: positive
  semidefinite, negative on some separable state, or a valid witness
  (branches I / II / Boundary);
* :mod:`cowitness.stats` renormalizes click tallies into conditional
  tables and evaluates <W> = 1 + a zz + b v on them;
* :mod:`cowitness.simulate` is a deterministic Monte Carlo model of the
  prepare-and-measure link (threshold detectors, dark counts, loss,
  interferometer visibility);
* :mod:`cowitness.documents` reads and writes counts documents (JSON)
  and link configs (TOML), and carries a bundled measured 14 dB table;
* :mod:`cowitness.cli` exposes all of it as the ``cowitness`` command.
"""

from .operators import (
    BASIS_LABELS,
    BlochVector,
    InvalidParameterError,
    InvalidStateError,
    WitnessParams,
    build_witness,
    eigenvalues_sym4,
    min_eigenvalue_closed_form,
    min_eigenvalue_numeric,
    pauli_zz,
    product_state_expectation,
    xplus_proj_x,
)
from .validity import (
    WitnessBranch,
    WitnessClass,
    WitnessKind,
    classify,
    is_non_psd,
    region_scan,
    separable_min_bruteforce,
    separable_min_closed_form,
)
from .stats import (
    DataLineCounts,
    InsufficientDataError,
    MonitorCounts,
    RawCounts,
    RenormalizedTable,
    WitnessEvaluation,
    find_detecting_region,
    renormalize,
    witness_expectation,
    x_visibility,
    zz_correlation,
)
from .simulate import (
    ChannelConfig,
    ClickProbabilities,
    ConfigError,
    LinkConfig,
    PatternDistribution,
    ReceiverConfig,
    SourceConfig,
    click_probabilities,
    loss_sweep,
    simulate,
)
from .documents import (
    CountsDocument,
    DocumentError,
    bundled_dataset_path,
    load_bundled_dataset,
    load_counts_document,
    load_link_config,
    save_counts_document,
)

__version__ = "0.1.0"

__all__ = [
    "BASIS_LABELS",
    "BlochVector",
    "ChannelConfig",
    "ClickProbabilities",
    "ConfigError",
    "CountsDocument",
    "DataLineCounts",
    "DocumentError",
    "InsufficientDataError",
    "InvalidParameterError",
    "InvalidStateError",
    "LinkConfig",
    "MonitorCounts",
    "PatternDistribution",
    "RawCounts",
    "ReceiverConfig",
    "RenormalizedTable",
    "SourceConfig",
    "WitnessBranch",
    "WitnessClass",
    "WitnessEvaluation",
    "WitnessKind",
    "WitnessParams",
    "build_witness",
    "bundled_dataset_path",
    "classify",
    "click_probabilities",
    "eigenvalues_sym4",
    "find_detecting_region",
    "is_non_psd",
    "load_bundled_dataset",
    "load_counts_document",
    "load_link_config",
    "loss_sweep",
    "min_eigenvalue_closed_form",
    "min_eigenvalue_numeric",
    "pauli_zz",
    "product_state_expectation",
    "region_scan",
    "renormalize",
    "save_counts_document",
    "separable_min_bruteforce",
    "separable_min_closed_form",
    "simulate",
    "witness_expectation",
    "x_visibility",
    "xplus_proj_x",
    "zz_correlation",
    "__version__",
]
