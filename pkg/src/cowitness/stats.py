"""Click statistics: raw tallies, renormalization, witness evaluation.

Bob's data line times arrivals (early/late slot detectors behind the
transmission port); his monitoring line interferes adjacent slots and
feeds two ports m1/m2.  Per transmitted round exactly one of four
patterns is tallied for the relevant line: only the first detector, only
the second, both, or neither.  Renormalization post-selects the two
conclusive single-detector patterns of each preparation group and
divides by their sum, giving the conditional table G.

Slot convention used throughout: ``|z+>`` is the preparation with the
pulse in the early slot (written ``alpha0``), so the correlated pairings
are alpha0 <-> early and 0alpha <-> late.
"""

from __future__ import annotations

import operator
from dataclasses import dataclass, fields

from .operators import WitnessParams
from .validity import WitnessKind, classify, region_scan


class InsufficientDataError(ValueError):
    """A preparation group has zero conclusive events, so G is undefined.

    The offending group name is available as ``.group``.
    """

    def __init__(self, group: str):
        self.group = group
        super().__init__(f"no conclusive counts in group '{group}'")


def _validate_counts(record) -> None:
    for field in fields(record):
        value = getattr(record, field.name)
        try:
            count = int(operator.index(value))  # ints of any stripe, never floats
        except TypeError:
            raise ValueError(
                f"{field.name} must be an integer, got {value!r}"
            ) from None
        if count < 0:
            raise ValueError(f"{field.name} must be non-negative, got {count}")
        object.__setattr__(record, field.name, count)


@dataclass(frozen=True)
class DataLineCounts:
    """Click-pattern tallies on the data line for one signal preparation."""

    early_only: int
    late_only: int
    both: int
    none: int

    def __post_init__(self):
        _validate_counts(self)

    @property
    def conclusive(self) -> int:
        return self.early_only + self.late_only

    @property
    def total(self) -> int:
        return self.early_only + self.late_only + self.both + self.none


@dataclass(frozen=True)
class MonitorCounts:
    """Click-pattern tallies on the monitoring line for the decoy preparation."""

    m1_only: int
    m2_only: int
    both: int
    none: int

    def __post_init__(self):
        _validate_counts(self)

    @property
    def conclusive(self) -> int:
        return self.m1_only + self.m2_only

    @property
    def total(self) -> int:
        return self.m1_only + self.m2_only + self.both + self.none


@dataclass(frozen=True)
class RawCounts:
    """Complete tally of one run: both signal groups plus the decoy group."""

    sent_alpha0: DataLineCounts
    sent_0alpha: DataLineCounts
    sent_alphaalpha: MonitorCounts

    def __post_init__(self):
        for name in ("sent_alpha0", "sent_0alpha"):
            if not isinstance(getattr(self, name), DataLineCounts):
                raise ValueError(f"{name} must be a DataLineCounts record")
        if not isinstance(self.sent_alphaalpha, MonitorCounts):
            raise ValueError("sent_alphaalpha must be a MonitorCounts record")

    @property
    def total_rounds(self) -> int:
        return (
            self.sent_alpha0.total
            + self.sent_0alpha.total
            + self.sent_alphaalpha.total
        )


_TABLE_FIELDS = (
    "g_alpha0_early",
    "g_alpha0_late",
    "g_0alpha_early",
    "g_0alpha_late",
    "g_aa_m1",
    "g_aa_m2",
)


@dataclass(frozen=True)
class RenormalizedTable:
    """Conditional click table G: one row per preparation, post-selected.

    Tables produced by :func:`renormalize` have complementary pairs
    (early + late = 1 for each signal group, m1 + m2 = 1) up to rounding.
    Externally supplied tables are accepted whenever every entry is a
    probability: the bundled 14 dB measurement itself has a 0alpha pair
    summing to 0.8964847, and the correlation formulas below are well
    defined either way, so pair complementarity is deliberately not a
    hard invariant.
    """

    g_alpha0_early: float
    g_alpha0_late: float
    g_0alpha_early: float
    g_0alpha_late: float
    g_aa_m1: float
    g_aa_m2: float

    def __post_init__(self):
        for name in _TABLE_FIELDS:
            raw_value = getattr(self, name)
            try:
                value = float(raw_value)
            except (TypeError, ValueError):
                raise ValueError(f"{name} must be a number, got {raw_value!r}") from None
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {raw_value!r}")
            object.__setattr__(self, name, value)

    @classmethod
    def uniform(cls) -> "RenormalizedTable":
        """Every conclusive outcome equally likely: carries no correlations."""
        return cls(0.5, 0.5, 0.5, 0.5, 0.5, 0.5)

    @classmethod
    def ideal(cls) -> "RenormalizedTable":
        """Perfect correlations and perfect visibility."""
        return cls(1.0, 0.0, 0.0, 1.0, 1.0, 0.0)

    def mix(self, other: "RenormalizedTable", weight: float) -> "RenormalizedTable":
        """Entrywise convex combination ``(1 - weight) self + weight other``.

        With ``other = uniform()`` this is the dark-count / noise
        degradation path; every witness expectation is affine along it.
        """
        if not 0.0 <= weight <= 1.0:
            raise ValueError(f"weight must lie in [0, 1], got {weight}")
        return RenormalizedTable(
            *(
                (1.0 - weight) * getattr(self, name) + weight * getattr(other, name)
                for name in _TABLE_FIELDS
            )
        )


def renormalize(raw: RawCounts) -> RenormalizedTable:
    """Post-select conclusive single-detector events and normalize per group.

    Double-click and no-click rounds are discarded; each conclusive count
    is divided by its group's conclusive total.  Python integer division
    makes the result exactly invariant under scaling all counts by a
    common factor.

    Raises
    ------
    InsufficientDataError
        If any group has zero conclusive events; ``.group`` names it.
    """

    def pair(c1: int, c2: int, group: str) -> tuple[float, float]:
        total = c1 + c2
        if total == 0:
            raise InsufficientDataError(group)
        return c1 / total, c2 / total

    a0_early, a0_late = pair(
        raw.sent_alpha0.early_only, raw.sent_alpha0.late_only, "sent_alpha0"
    )
    z0_early, z0_late = pair(
        raw.sent_0alpha.early_only, raw.sent_0alpha.late_only, "sent_0alpha"
    )
    m1, m2 = pair(
        raw.sent_alphaalpha.m1_only, raw.sent_alphaalpha.m2_only, "sent_alphaalpha"
    )
    return RenormalizedTable(a0_early, a0_late, z0_early, z0_late, m1, m2)


def zz_correlation(table: RenormalizedTable) -> float:
    """Reconstructed tr(rho Z(x)Z) under a uniform signal marginal.

    Each signal preparation contributes weight 1/2; within a group the
    correlated detector adds and the anticorrelated one subtracts:

        ((g_alpha0_early - g_alpha0_late) + (g_0alpha_late - g_0alpha_early)) / 2.

    Lies in [-1, 1] for any table with entries in [0, 1].
    """
    return 0.5 * (
        (table.g_alpha0_early - table.g_alpha0_late)
        + (table.g_0alpha_late - table.g_0alpha_early)
    )


def x_visibility(table: RenormalizedTable) -> float:
    """Monitoring-line visibility ``g_aa_m1 - g_aa_m2``.

    Conditioned on the decoy preparation; used as the reconstruction of
    tr(rho |x+><x+|(x)X).  Lies in [-1, 1].
    """
    return table.g_aa_m1 - table.g_aa_m2


@dataclass(frozen=True)
class WitnessEvaluation:
    """Witness reading on one renormalized table."""

    params: WitnessParams
    zz_corr: float
    x_vis: float
    expectation: float
    valid_witness: bool
    entangled: bool


def witness_expectation(params: WitnessParams, table: RenormalizedTable) -> WitnessEvaluation:
    """Evaluate <W(a, b)> = 1 + a zz + b v on a renormalized table.

    ``entangled`` is asserted only when the expectation is negative AND
    (a, b) classifies as a valid witness; a negative reading of a
    non-witness operator certifies nothing.
    """
    zz = zz_correlation(table)
    vis = x_visibility(table)
    expectation = 1.0 + params.a * zz + params.b * vis
    valid = classify(params).kind is WitnessKind.VALID_WITNESS
    return WitnessEvaluation(
        params=params,
        zz_corr=zz,
        x_vis=vis,
        expectation=expectation,
        valid_witness=valid,
        entangled=bool(valid and expectation < 0.0),
    )


def find_detecting_region(table: RenormalizedTable, a_range, b_range, steps: int):
    """Grid points that are valid witnesses and read negative on the table.

    Returns
    -------
    list of (a, b, expectation)
        Row-major subset of the region_scan grid; empty when the table
        carries too little correlation for any member of the family.
    """
    zz = zz_correlation(table)
    vis = x_visibility(table)
    out = []
    for a, b, cls in region_scan(a_range, b_range, steps):
        if cls.kind is not WitnessKind.VALID_WITNESS:
            continue
        expectation = 1.0 + a * zz + b * vis
        if expectation < 0.0:
            out.append((a, b, expectation))
    return out
