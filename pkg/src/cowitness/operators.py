"""Witness-family operators on the effective time-bin qubit pair.

A single photon confined to one of two adjacent time slots carries a
qubit: ``|z+>`` for the early slot, ``|z->`` for the late slot.  Alice's
effective preparation and Bob's received mode together span a two-qubit
space, and the witness family

    W(a, b) = I(x)I + a Z(x)Z + b |x+><x+|(x)X

is real-symmetric on it.  Everything here works in the fixed product
basis ``(|z+ z+>, |z+ z->, |z- z+>, |z- z->)``, so 4x4 real matrices are
the whole story; vacuum and multi-photon components never contribute to
these operators.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

BASIS_LABELS = ("z+z+", "z+z-", "z-z+", "z-z-")

_JACOBI_OFFDIAG_TOL = 1e-12
_JACOBI_MAX_SWEEPS = 100
_BLOCH_NORM_SLACK = 1e-12


class InvalidParameterError(ValueError):
    """Raised when a witness parameter is not a finite real number."""


class InvalidStateError(ValueError):
    """Raised when a Bloch vector lies outside the unit ball."""


@dataclass(frozen=True)
class WitnessParams:
    """The pair (a, b) selecting one member of the witness family."""

    a: float
    b: float

    def __post_init__(self):
        if not (math.isfinite(self.a) and math.isfinite(self.b)):
            raise InvalidParameterError(
                f"witness parameters must be finite, got a={self.a!r}, b={self.b!r}"
            )


@dataclass(frozen=True)
class BlochVector:
    """A point of the Bloch ball, ``x^2 + y^2 + z^2 <= 1``.

    The y component is carried for completeness but never enters any
    witness expectation: W(a, b) has no Y part.
    """

    x: float
    y: float
    z: float

    def __post_init__(self):
        norm_sq = self.x * self.x + self.y * self.y + self.z * self.z
        # comparison is False for NaN components, so they are rejected too
        if not norm_sq <= 1.0 + _BLOCH_NORM_SLACK:
            raise InvalidStateError(
                f"Bloch vector ({self.x}, {self.y}, {self.z}) has squared norm "
                f"{norm_sq}, outside the unit ball"
            )


def pauli_zz() -> np.ndarray:
    """Z(x)Z: diagonal, +1 on slot-correlated basis states, -1 otherwise."""
    z = np.diag([1.0, -1.0])
    return np.kron(z, z)


def xplus_proj_x() -> np.ndarray:
    """|x+><x+|(x)X.

    ``<alpha|x+><x+|alpha'> = 1/2`` for every pair of slot labels, so the
    matrix has 1/2 on exactly the entries whose Bob-side labels differ and
    0 everywhere else.
    """
    xplus_proj = np.full((2, 2), 0.5)
    pauli_x = np.array([[0.0, 1.0], [1.0, 0.0]])
    return np.kron(xplus_proj, pauli_x)


def build_witness(params: WitnessParams) -> np.ndarray:
    """Assemble W(a, b) as a real-symmetric 4x4 matrix.

    Parameters
    ----------
    params : WitnessParams
        Finite coefficients (a, b).

    Returns
    -------
    numpy.ndarray
        ``I + a Z(x)Z + b |x+><x+|(x)X`` in the fixed slot basis; exactly
        symmetric, trace exactly 4 (both traceless parts have zero
        diagonal sum).
    """
    return np.eye(4) + params.a * pauli_zz() + params.b * xplus_proj_x()


def min_eigenvalue_closed_form(params: WitnessParams) -> float:
    """Smallest eigenvalue of W(a, b) in closed form.

    The spectrum splits into two 2x2 blocks whose extreme eigenvalue is

        lambda_min = (2 - |b| - sqrt(4 a^2 + b^2)) / 2

    so W has a negative eigenvalue exactly when ``1 - |b| < a^2``.
    """
    a, b = params.a, params.b
    return 0.5 * (2.0 - abs(b) - math.sqrt(4.0 * a * a + b * b))


def eigenvalues_sym4(matrix) -> np.ndarray:
    """All four eigenvalues of a symmetric 4x4 matrix, ascending.

    Cyclic Jacobi rotations on plain floats: sweep the six upper-triangle
    pivots in fixed order, annihilating each with a symmetric Schur
    rotation, until the off-diagonal Frobenius norm drops below 1e-12.
    Independent of any closed-form spectrum knowledge, which is the point:
    this is the cross-check route.

    Parameters
    ----------
    matrix : array_like
        Real 4x4, exactly symmetric (``matrix[i, j] == matrix[j, i]``).

    Returns
    -------
    numpy.ndarray
        Eigenvalues sorted ascending.

    Raises
    ------
    ValueError
        If the input is not 4x4 or not exactly symmetric.
    RuntimeError
        If 100 sweeps do not converge (unreachable for symmetric input;
        Jacobi convergence is quadratic).
    """
    m = np.asarray(matrix, dtype=float)
    if m.shape != (4, 4):
        raise ValueError(f"expected a 4x4 matrix, got shape {m.shape}")
    if not np.array_equal(m, m.T):
        raise ValueError("matrix is not symmetric")

    a = [[float(m[i, j]) for j in range(4)] for i in range(4)]
    for sweep in range(_JACOBI_MAX_SWEEPS + 1):
        off_sq = 0.0
        for i in range(4):
            for j in range(4):
                if i != j:
                    off_sq += a[i][j] * a[i][j]
        if math.sqrt(off_sq) < _JACOBI_OFFDIAG_TOL:
            break
        if sweep == _JACOBI_MAX_SWEEPS:
            raise RuntimeError("Jacobi diagonalization did not converge in 100 sweeps")
        for p in range(3):
            for q in range(p + 1, 4):
                apq = a[p][q]
                if apq == 0.0:
                    continue
                tau = (a[q][q] - a[p][p]) / (2.0 * apq)
                t = math.copysign(1.0, tau) / (abs(tau) + math.sqrt(1.0 + tau * tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                for k in range(4):  # A <- A J, columns p and q
                    akp = a[k][p]
                    akq = a[k][q]
                    a[k][p] = c * akp - s * akq
                    a[k][q] = s * akp + c * akq
                for k in range(4):  # A <- J^T A, rows p and q
                    apk = a[p][k]
                    aqk = a[q][k]
                    a[p][k] = c * apk - s * aqk
                    a[q][k] = s * apk + c * aqk
    return np.sort(np.array([a[0][0], a[1][1], a[2][2], a[3][3]]))


def min_eigenvalue_numeric(params: WitnessParams) -> float:
    """Smallest eigenvalue of W(a, b) via the Jacobi route."""
    return float(eigenvalues_sym4(build_witness(params))[0])


def product_state_expectation(params: WitnessParams, r1, r2) -> float:
    """<W(a, b)> on the product state with Bloch vectors r1 (Alice), r2 (Bob).

    Tracing W against ``rho(r1) (x) rho(r2)`` with
    ``rho(r) = (I + x X + y Y + z Z)/2`` gives

        1 + a z1 z2 + (b/2) (1 + x1) x2.

    The y components drop out identically.

    Parameters
    ----------
    params : WitnessParams
    r1, r2 : BlochVector or (x, y, z) sequence
        Sequences are validated through BlochVector, so a norm above
        ``1 + 1e-12`` raises InvalidStateError.
    """
    if not isinstance(r1, BlochVector):
        r1 = BlochVector(*r1)
    if not isinstance(r2, BlochVector):
        r2 = BlochVector(*r2)
    return 1.0 + params.a * r1.z * r2.z + 0.5 * params.b * (1.0 + r1.x) * r2.x
