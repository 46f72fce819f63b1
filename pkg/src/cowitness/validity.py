"""Classification of (a, b) into valid-witness and non-witness regions.

W(a, b) is a usable entanglement witness when it is indefinite (some
entangled state could be caught) yet non-negative on every separable
state.  Both conditions reduce to closed forms here:

* indefinite  <=>  1 - |b| < a^2;
* the minimum of <W> over product states is

      1 - |b|                          if a^2 <= b^2 / 2,
      1 - a^2 / sqrt(a^2 - b^2 / 4)    if a^2 >  b^2 / 2,

  and convexity extends the product-state minimum to all separable
  states.

The valid region therefore splits into two branches (the two closed
forms above, meeting on the seam a^2 = b^2/2 where both give 1 - |b|),
with a boundary where the separable minimum is exactly 0: |b| = 1 on the
first branch, 4 a^4 - 4 a^2 + b^2 = 0 on the second.  Boundary points
are valid witnesses.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.optimize import minimize_scalar

from .operators import WitnessParams, min_eigenvalue_closed_form

ZERO_TOL = 1e-9  # absolute tolerance deciding "equals zero" in classification


class WitnessKind(Enum):
    """Outcome of classifying one (a, b) point."""

    VALID_WITNESS = "ValidWitness"
    NOT_A_WITNESS_PSD = "NotAWitness_PSD"
    NOT_A_WITNESS_NEGATIVE_ON_SEPARABLE = "NotAWitness_NegativeOnSeparable"


class WitnessBranch(Enum):
    """Which closed-form branch of the valid region a point sits on."""

    I = "I"
    II = "II"
    BOUNDARY = "Boundary"


@dataclass(frozen=True)
class WitnessClass:
    """Classification record for one parameter point."""

    kind: WitnessKind
    branch: WitnessBranch | None
    lambda_min: float
    separable_min: float

    @property
    def is_valid(self) -> bool:
        return self.kind is WitnessKind.VALID_WITNESS


def is_non_psd(params: WitnessParams) -> bool:
    """True iff W(a, b) has a negative eigenvalue, i.e. ``1 - |b| < a^2``."""
    return 1.0 - abs(params.b) < params.a * params.a


def separable_min_closed_form(params: WitnessParams) -> float:
    """Minimum of <W(a, b)> over separable states, in closed form.

    On the seam ``a^2 == b^2/2`` the two branch expressions agree at
    ``1 - |b|``, so the comparison can be exact; on the second branch the
    radicand satisfies ``a^2 - b^2/4 > a^2/2 > 0``, so there is no
    singularity anywhere.  (0, 0) gives 1, the identity's expectation.
    """
    a_sq = params.a * params.a
    b_sq = params.b * params.b
    if a_sq <= 0.5 * b_sq:
        return 1.0 - abs(params.b)
    return 1.0 - a_sq / math.sqrt(a_sq - 0.25 * b_sq)


def separable_min_bruteforce(params: WitnessParams, grid_n: int = 20000) -> float:
    """Minimum of <W(a, b)> over product states by direct search.

    Writing <W> = 1 + u . v with u = (b (1 + x1) / 2, a z1) and
    v = (x2, z2), the minimum over the Bob disk is 1 - |u|, and |u|^2 is
    convex in (x1, z1), so its maximum sits on the circle x1 = cos(t),
    z1 = sin(t).  A dense t grid plus a bounded 1-D refinement around the
    best grid point pins the minimum; the interior stationary candidate
    u = 0 (expectation exactly 1) is kept as a clamp.  Independent of the
    closed form by construction: this is the oracle route.

    Parameters
    ----------
    params : WitnessParams
    grid_n : int
        Number of grid points over [0, 2 pi); at least 100.
    """
    if grid_n < 100:
        raise ValueError(f"grid_n must be at least 100, got {grid_n}")
    a, b = params.a, params.b
    theta = np.linspace(0.0, 2.0 * np.pi, grid_n, endpoint=False)
    radius = np.hypot(a * np.sin(theta), 0.5 * b * (1.0 + np.cos(theta)))
    k = int(np.argmax(radius))
    step = 2.0 * np.pi / grid_n

    def objective(t: float) -> float:
        return 1.0 - math.hypot(a * math.sin(t), 0.5 * b * (1.0 + math.cos(t)))

    refined = minimize_scalar(
        objective,
        bounds=(theta[k] - step, theta[k] + step),
        method="bounded",
        options={"xatol": 1e-12},
    )
    return min(1.0 - float(radius[k]), float(refined.fun), 1.0)


def classify(params: WitnessParams) -> WitnessClass:
    """Classify one (a, b) point.

    Decision order, with ZERO_TOL = 1e-9 deciding ties against zero:

    1. lambda_min >= 0: positive semidefinite, detects nothing.
    2. separable minimum < 0: indefinite but negative on some separable
       state, so a negative reading certifies nothing.
    3. otherwise a valid witness; branch is Boundary when the separable
       minimum is 0 within tolerance, else I where a^2 <= b^2/2 and II
       where a^2 > b^2/2 (the seam itself is labeled I; both branch
       formulas coincide there).
    """
    lam = min_eigenvalue_closed_form(params)
    sep = separable_min_closed_form(params)
    if lam >= -ZERO_TOL:
        return WitnessClass(WitnessKind.NOT_A_WITNESS_PSD, None, lam, sep)
    if sep < -ZERO_TOL:
        return WitnessClass(
            WitnessKind.NOT_A_WITNESS_NEGATIVE_ON_SEPARABLE, None, lam, sep
        )
    if sep <= ZERO_TOL:
        branch = WitnessBranch.BOUNDARY
    elif params.a * params.a <= 0.5 * params.b * params.b:
        branch = WitnessBranch.I
    else:
        branch = WitnessBranch.II
    return WitnessClass(WitnessKind.VALID_WITNESS, branch, lam, sep)


def region_scan(a_range, b_range, steps: int):
    """Classify every point of a uniform grid over a_range x b_range.

    Parameters
    ----------
    a_range, b_range : (low, high) pairs
        Finite interval endpoints, low <= high; a degenerate interval
        (low == high) pins that coordinate.
    steps : int
        Points per axis, at least 2; the grid is steps x steps.

    Returns
    -------
    list of (a, b, WitnessClass)
        Row-major: a varies slowest, b fastest.  Deterministic ordering
        regardless of how the cells are evaluated.
    """
    if steps < 2:
        raise ValueError(f"steps must be at least 2, got {steps}")
    ranges = []
    for name, pair in (("a_range", a_range), ("b_range", b_range)):
        low, high = (float(pair[0]), float(pair[1]))
        if not (math.isfinite(low) and math.isfinite(high)):
            raise ValueError(f"{name} endpoints must be finite, got {pair!r}")
        if low > high:
            raise ValueError(f"{name} is inverted: {low} > {high}")
        ranges.append((low, high))
    a_values = np.linspace(ranges[0][0], ranges[0][1], steps)
    b_values = np.linspace(ranges[1][0], ranges[1][1], steps)
    out = []
    for a in a_values:
        a = float(a)
        for b in b_values:
            b = float(b)
            out.append((a, b, classify(WitnessParams(a, b))))
    return out
