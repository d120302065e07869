"""Closed-form expressions for the qubit model and the qutrit families.

The qutrit reference states have the form::

    rho0 = 1/3 [[ v1,        -i sqrt(u1),  i sqrt(u2)],
                [ i sqrt(u1),  v2,        -i sqrt(u3)],
                [-i sqrt(u2),  i sqrt(u3),  v3       ]]

with ``v1 + v2 + v3 = 3``.  Setting every ``v`` to 1 and every ``u`` to a
common value gives the one-parameter family used by :class:`FamilyParams`.

The polynomial helpers accept ``fractions.Fraction`` arguments and then
evaluate exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import DegenerateGeometry, DomainError, NonRegularModel, PositivityViolation
from .linalg import eigh_batch
from .qfi import DensityMatrix, FisherPair, UnitaryModel

ONE3 = np.ones(3)
THIRD = Fraction(1, 3)
POSITIVITY_TOL = 1e-14
PAULI = (
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


def _vec3(a, name: str) -> np.ndarray:
    v = np.asarray(a, dtype=float)
    if v.shape != (3,) or not np.all(np.isfinite(v)):
        raise ValueError(f"{name} must be a finite real 3-vector, got {a!r}")
    return v


# -- qubit -------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class QubitModel:
    """Bloch vector ``s0`` and generators ``X = x0 I + x.sigma``, ``Y = y0 I + y.sigma``."""

    s0: np.ndarray
    x: np.ndarray
    y: np.ndarray
    x0: float = 0.0
    y0: float = 0.0

    def __post_init__(self):
        for name in ("s0", "x", "y"):
            object.__setattr__(self, name, _vec3(getattr(self, name), name))
        if not np.linalg.norm(self.s0) < 1.0:
            raise DomainError(f"|s0| = {np.linalg.norm(self.s0)!r} must be < 1")

    def density_matrix(self) -> np.ndarray:
        return (np.eye(2) + sum(c * p for c, p in zip(self.s0, PAULI))) / 2

    def generators(self) -> tuple[np.ndarray, np.ndarray]:
        X = self.x0 * np.eye(2) + sum(c * p for c, p in zip(self.x, PAULI))
        Y = self.y0 * np.eye(2) + sum(c * p for c, p in zip(self.y, PAULI))
        return X, Y

    def to_model(self) -> UnitaryModel:
        return UnitaryModel.from_arrays(self.density_matrix(), *self.generators())


def qubit_det_sld(q: QubitModel) -> float:
    """``det J_S = 16 |s0|^2 [s0 . (x cross y)]^2``."""
    s = q.s0
    return float(16.0 * (s @ s) * (s @ np.cross(q.x, q.y)) ** 2)


def _check_qubit_regular(q: QubitModel) -> float:
    det = qubit_det_sld(q)
    s2 = q.s0 @ q.s0
    # normalise by the largest value det could take for these vector lengths
    ref = 16.0 * s2 * (np.sqrt(s2) * np.linalg.norm(q.x) * np.linalg.norm(q.y)) ** 2
    if not det > 1e-14 * ref:
        raise NonRegularModel(
            "det J_S vanishes: x and y are parallel, s0 is orthogonal to x cross y, or s0 = 0"
        )
    return det


def qubit_fisher_inverses(q: QubitModel) -> FisherPair:
    """Fisher pair of a qubit model from the Bloch-vector closed forms."""
    det = _check_qubit_regular(q)
    s = q.s0
    xs = np.cross(q.x, s)
    ys = np.cross(q.y, s)
    S_inv = (4.0 / det) * np.array([[ys @ ys, -(xs @ ys)], [-(xs @ ys), xs @ xs]])
    im = (4.0 / det) * (s @ s) * (s @ np.cross(q.x, q.y))
    R_inv = S_inv + np.array([[0.0, -1j * im], [1j * im, 0.0]])
    return FisherPair(np.linalg.inv(S_inv), np.linalg.inv(R_inv), S_inv, R_inv)


def qubit_bound_rhs(q: QubitModel) -> tuple[float, float]:
    """Right-hand sides ``(1/det J_S, |s0|^2/det J_S)`` of the Nagaoka and RLD products."""
    det = _check_qubit_regular(q)
    return 1.0 / det, float(q.s0 @ q.s0) / det


# -- qutrit --------------------------------------------------------------------


def qutrit_delta_closed(rho0, x, y) -> complex:
    """Antisymmetric RLD part for diagonal generators ``diag(x)``, ``diag(y)``.

    ``(det rho0)^-1 (r12 r23 r31 - r21 r32 r13) [(y cross x) . (1,1,1)]``.
    """
    rho = rho0 if isinstance(rho0, DensityMatrix) else DensityMatrix.from_array(rho0)
    if rho.dim != 3:
        raise ValueError("qutrit closed form needs a 3x3 state")
    # raises RankDeficient on a singular state
    rho.inverse()
    r = rho.matrix
    cyc = r[0, 1] * r[1, 2] * r[2, 0] - r[1, 0] * r[2, 1] * r[0, 2]
    geom = np.cross(_vec3(y, "y"), _vec3(x, "x")) @ ONE3
    return complex(cyc * geom / np.prod(rho.eigenvalues))


@dataclass(frozen=True)
class ReferenceStateParams:
    v1: float
    v2: float
    v3: float
    u1: float
    u2: float
    u3: float

    @property
    def v(self) -> tuple[float, float, float]:
        return (self.v1, self.v2, self.v3)

    @property
    def u(self) -> tuple[float, float, float]:
        return (self.u1, self.u2, self.u3)

    @property
    def u_max(self) -> float:
        return max(self.u)


def reference_matrix(v, u) -> np.ndarray:
    """Reference-state matrix for arrays ``v`` and ``u`` of shape ``(..., 3)``.

    No validation; see :func:`build_reference_state` for the checked version.
    """
    v = np.asarray(v, dtype=float)
    s = np.sqrt(np.asarray(u, dtype=float))
    shape = np.broadcast_shapes(v.shape, s.shape)[:-1]
    m = np.zeros(shape + (3, 3), dtype=complex)
    for k in range(3):
        m[..., k, k] = v[..., k]
    m[..., 0, 1] = -1j * s[..., 0]
    m[..., 1, 0] = 1j * s[..., 0]
    m[..., 0, 2] = 1j * s[..., 1]
    m[..., 2, 0] = -1j * s[..., 1]
    m[..., 1, 2] = -1j * s[..., 2]
    m[..., 2, 1] = 1j * s[..., 2]
    return m / 3.0


def build_reference_state(p: ReferenceStateParams) -> DensityMatrix:
    vals = p.v + p.u
    if any(not np.isfinite(t) or t < 0 for t in vals):
        raise DomainError(f"reference state parameters must be finite and non-negative: {p}")
    if abs(sum(p.v) - 3.0) > 1e-12:
        raise DomainError(f"v1 + v2 + v3 = {sum(p.v)!r}, expected 3")
    m = reference_matrix(p.v, p.u)
    w, _ = eigh_batch(m)
    # eigenvalues within rounding of zero count as non-positive
    if w[0] <= POSITIVITY_TOL:
        raise PositivityViolation(f"reference state has eigenvalue {w[0]:.3g} <= 0")
    return DensityMatrix.from_array(m)


def single_u_state(u: float) -> np.ndarray:
    """``I/3 + sqrt(u)/3 * A`` where ``A`` carries the +-i off-diagonal pattern."""
    return reference_matrix((1.0, 1.0, 1.0), (u, u, u))


# -- one-parameter family ------------------------------------------------------


def zeta(x, y) -> float:
    """``[1.(x cross y)]^2 / (|1 cross x|^2 |1 cross y|^2)``, which lies in ``[0, 1/3]``."""
    x = _vec3(x, "x")
    y = _vec3(y, "y")
    xi = np.cross(ONE3, x)
    eta = np.cross(ONE3, y)
    xi2 = xi @ xi
    eta2 = eta @ eta
    if xi2 <= 1e-24 * max(x @ x, 1e-300) or eta2 <= 1e-24 * max(y @ y, 1e-300):
        raise DegenerateGeometry("a generator is proportional to (1, 1, 1)")
    return float((ONE3 @ np.cross(x, y)) ** 2 / (xi2 * eta2))


def _check_domain(z, u):
    if not 0 < z <= THIRD + 1e-12:
        raise DomainError(f"zeta = {z!r} outside (0, 1/3]")
    ua = np.asarray(u)
    if not (np.all(ua >= 0) and np.all(ua <= THIRD)):
        raise DomainError(f"u = {u!r} outside [0, 1/3]")


def f_zeta(z, u):
    """``16 z (3u^2 - 7u + 2)^2 - u (3u^2 - 9u + 8)^2``."""
    _check_domain(z, u)
    return 16 * z * (3 * u**2 - 7 * u + 2) ** 2 - u * (3 * u**2 - 9 * u + 8) ** 2


def f_zeta_derivative(n: int, z, u):
    """``n``-th derivative of :func:`f_zeta` in ``u`` for ``n`` in 1..4."""
    _check_domain(z, u)
    if n == 1:
        return (
            -45 * u**4
            - 64 * (1 + 7 * z)
            + 72 * u**3 * (3 + 8 * z)
            + 32 * u * (9 + 61 * z)
            - 9 * u**2 * (43 + 224 * z)
        )
    if n == 2:
        return 2 * (
            -90 * u**3 + 108 * u**2 * (3 + 8 * z) + 16 * (9 + 61 * z) - 9 * u * (43 + 224 * z)
        )
    if n == 3:
        return -18 * (43 + 30 * u**2 + 224 * z - 24 * u * (3 + 8 * z))
    if n == 4:
        return -216 * (-6 + 5 * u - 16 * z)
    raise ValueError(f"derivative order {n!r} not supported (expected 1..4)")


def third_derivative_peak(z):
    """Root of the fourth derivative, where the third derivative peaks: ``2/5 (8 z + 3)``."""
    return Fraction(2, 5) * (8 * z + 3) if isinstance(z, Fraction) else 0.4 * (8 * z + 3)


@dataclass(frozen=True, eq=False)
class FamilyParams:
    """Single-``u`` qutrit family with diagonal generators ``diag(x)``, ``diag(y)``."""

    u: float
    x: np.ndarray
    y: np.ndarray
    zeta: float = field(init=False)
    xi_sq: float = field(init=False)
    eta_sq: float = field(init=False)

    def __post_init__(self):
        x = _vec3(self.x, "x")
        y = _vec3(self.y, "y")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        if not 0 < self.u < 1 / 3:
            raise DomainError(f"u = {self.u!r} outside (0, 1/3)")
        z = zeta(x, y)
        if z <= 0:
            raise DegenerateGeometry("zeta = 0: (y cross x) . (1,1,1) vanishes")
        xi = np.cross(ONE3, x)
        eta = np.cross(ONE3, y)
        object.__setattr__(self, "zeta", min(z, 1 / 3))
        object.__setattr__(self, "xi_sq", float(xi @ xi))
        object.__setattr__(self, "eta_sq", float(eta @ eta))

    @property
    def sin_theta_sq(self) -> float:
        return 3.0 * self.zeta

    def to_model(self) -> UnitaryModel:
        return UnitaryModel.from_arrays(single_u_state(self.u), np.diag(self.x), np.diag(self.y))


def family_fisher_quantities(p: FamilyParams) -> tuple[float, float, float]:
    """``(Delta, Delta1, Delta2)`` for the single-``u`` family in closed form.

    With ``F = f_zeta(zeta, u)``, ``q = u^2 - 7u + 4`` and ``r = 3u^2 - 9u + 8``::

        Delta  = 9 F / (16 zeta^2 |xi|^2 |eta|^2 (2 - u)^2 u q^2)
        Delta1 = Delta / (J_S^22 - J_R^22) = 3 F / (4 zeta |xi|^2  u (2 - u) q r)
        Delta2 = Delta / (J_S^11 - J_R^11) = 3 F / (4 zeta |eta|^2 u (2 - u) q r)

    where ``xi = (1,1,1) x x`` and ``eta = (1,1,1) x y``.  All three carry the
    sign of ``F`` on ``0 < u < 1/3``.
    """
    u, z = p.u, p.zeta
    F = f_zeta(z, u)
    q = u * u - 7 * u + 4
    r = 3 * u * u - 9 * u + 8
    cap = 9 * F / (16 * z * z * p.xi_sq * p.eta_sq * (2 - u) ** 2 * u * q * q)
    k = 3 * F / (4 * z * u * (2 - u) * q * r)
    return float(cap), float(k / p.xi_sq), float(k / p.eta_sq)


def root_u0(z: float, tol: float = 1e-14) -> float:
    """Unique zero of ``f_zeta(z, .)`` on ``(0, 1/3)`` by bisection.

    ``f_zeta(z, 0) = 64 z > 0`` and ``f_zeta(z, 1/3) = -256/27 < 0`` with
    strict decrease in between, so the bracket always holds.
    """
    if tol < 1e-14:
        raise ValueError(f"tol = {tol!r} is below the supported 1e-14")
    _check_domain(z, 0.0)
    lo, hi = 0.0, 1.0 / 3.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        fm = f_zeta(z, mid)
        if fm == 0:
            return mid
        if fm > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
