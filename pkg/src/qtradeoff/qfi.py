"""SLD and RLD Fisher information for two-parameter unitary models.

A model is a reference state ``rho0`` together with Hermitian generators
``X`` and ``Y``; the family is ``rho(t1, t2) = U rho0 U^dagger`` with
``U = exp(-i X t1 - i Y t2)``.  The Fisher matrices of such a family do not
depend on the parameter, so everything is evaluated at the origin where
``d_i rho = -i [X_i, rho0]``.

The private ``_*`` helpers broadcast over leading batch axes and are shared
with :mod:`qtradeoff.sampler`; the public functions take a single model.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import NoIntersection, NonRegularModel, RankDeficient
from .linalg import (
    RANK_FLOOR,
    commutator,
    dagger,
    decode_matrix,
    eig_hermitian,
    encode_matrix,
    hermitian,
)

TRACE_TOL = 1e-10
NEG_EIG_TOL = 1e-12
SLD_DENOM_FLOOR = 1e-12
DELTA_ZERO = 1e-10
REGULARITY_TOL = 1e-10
DINV_TOL = 1e-9
GAP_FLOOR = 1e-12


class Classification(str, enum.Enum):
    NO_TRADEOFF = "NO_TRADEOFF"
    SLD_DOMINANT = "SLD_DOMINANT"
    RLD_DOMINANT = "RLD_DOMINANT"
    INTERSECTING = "INTERSECTING"


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Unit-trace positive semidefinite matrix with its cached eigensystem."""

    matrix: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @classmethod
    def from_array(cls, a) -> "DensityMatrix":
        m = hermitian(a)
        if m.ndim != 2:
            raise ValueError(f"expected a single matrix, got shape {m.shape}")
        tr = np.trace(m).real
        if abs(tr - 1.0) > TRACE_TOL:
            raise ValueError(f"trace is {tr!r}, expected 1")
        w, v = eig_hermitian(m)
        if w[0] < -NEG_EIG_TOL:
            raise ValueError(f"matrix has negative eigenvalue {w[0]:.3g}")
        return cls(m, w, v)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def full_rank(self) -> bool:
        return bool(self.eigenvalues[0] > RANK_FLOOR)

    def inverse(self) -> np.ndarray:
        if not self.full_rank:
            raise RankDeficient(
                f"reference state has eigenvalue {self.eigenvalues[0]:.3g} <= {RANK_FLOOR:g}"
            )
        return _inverse_from_eig(self.eigenvalues, self.eigenvectors)


@dataclass(frozen=True, eq=False)
class UnitaryModel:
    """Full-rank reference state plus the two generators."""

    rho0: DensityMatrix
    X: np.ndarray
    Y: np.ndarray

    def __post_init__(self):
        d = self.rho0.dim
        for name in ("X", "Y"):
            g = hermitian(getattr(self, name))
            if g.shape != (d, d):
                raise ValueError(f"{name} has shape {g.shape}, expected {(d, d)}")
            object.__setattr__(self, name, g)
        if not self.rho0.full_rank:
            raise RankDeficient(
                f"reference state has eigenvalue {self.rho0.eigenvalues[0]:.3g} <= {RANK_FLOOR:g}"
            )

    @classmethod
    def from_arrays(cls, rho0, X, Y) -> "UnitaryModel":
        return cls(DensityMatrix.from_array(rho0), X, Y)

    @property
    def dim(self) -> int:
        return self.rho0.dim

    @property
    def commutation_residual(self) -> float:
        return float(np.max(np.abs(commutator(self.X, self.Y))))

    def to_json(self) -> dict:
        return {
            "rho0": encode_matrix(self.rho0.matrix),
            "X": encode_matrix(self.X),
            "Y": encode_matrix(self.Y),
        }

    @classmethod
    def from_json(cls, obj) -> "UnitaryModel":
        if not isinstance(obj, dict):
            raise ValueError("model must be a JSON object")
        missing = {"rho0", "X", "Y"} - obj.keys()
        if missing:
            raise ValueError(f"model is missing {sorted(missing)}")
        return cls.from_arrays(*(decode_matrix(obj[k]) for k in ("rho0", "X", "Y")))


@dataclass(frozen=True, eq=False)
class FisherPair:
    J_S: np.ndarray
    J_R: np.ndarray
    J_S_inv: np.ndarray
    J_R_inv: np.ndarray

    @property
    def im12(self) -> float:
        """Imaginary part of the (1, 2) entry of the inverse RLD matrix."""
        return float(self.J_R_inv[0, 1].imag)

    @property
    def rld_delta(self) -> complex:
        return complex(self.J_R[0, 1] - self.J_R[1, 0])

    def lowner_gap(self) -> float:
        """Smallest eigenvalue of ``J_S^-1 - Re J_R^-1`` (non-negative in theory)."""
        return float(np.linalg.eigvalsh(self.J_S_inv - self.J_R_inv.real)[0])


@dataclass(frozen=True, eq=False)
class TradeoffReport:
    delta: complex
    capital_delta: float
    condition1: bool
    condition2: bool
    d_invariant: bool
    classification: Classification
    intersections: list = field(default_factory=list)
    delta1: Optional[float] = None
    delta2: Optional[float] = None
    fisher: Optional[FisherPair] = None

    def to_dict(self) -> dict:
        out = {
            "classification": self.classification.value,
            "delta": {"re": self.delta.real, "im": self.delta.imag},
            "capital_delta": self.capital_delta,
            "delta1": self.delta1,
            "delta2": self.delta2,
            "condition1": self.condition1,
            "condition2": self.condition2,
            "d_invariant": self.d_invariant,
            "intersections": [list(p) for p in self.intersections],
        }
        if self.fisher is not None:
            fp = self.fisher
            out["fisher"] = {
                "J_S": fp.J_S.tolist(),
                "J_S_inv": fp.J_S_inv.tolist(),
                "J_R": _complex_rows(fp.J_R),
                "J_R_inv": _complex_rows(fp.J_R_inv),
            }
        return out

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def _complex_rows(m: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


# -- batched kernels -------------------------------------------------------


def _inverse_from_eig(w: np.ndarray, v: np.ndarray) -> np.ndarray:
    inv = (v / w[..., None, :]) @ dagger(v)
    return (inv + dagger(inv)) / 2


def _derivatives(rho: np.ndarray, X: np.ndarray, Y: np.ndarray):
    return -1j * commutator(X, rho), -1j * commutator(Y, rho)


def _sld(drho: np.ndarray, w: np.ndarray, v: np.ndarray) -> np.ndarray:
    denom = w[..., :, None] + w[..., None, :]
    if np.min(denom) < SLD_DENOM_FLOOR:
        raise RankDeficient(f"eigenvalue pair sum {np.min(denom):.3g} below {SLD_DENOM_FLOOR:g}")
    vh = dagger(v)
    lb = 2.0 * (vh @ drho @ v) / denom
    L = v @ lb @ vh
    return (L + dagger(L)) / 2


def _trace_prod(*mats) -> np.ndarray:
    """``tr(M1 M2 ... Mk)`` over leading batch axes."""
    prod = mats[0]
    for m in mats[1:]:
        prod = prod @ m
    return np.trace(prod, axis1=-2, axis2=-1)


def _sld_fisher(rho: np.ndarray, L1: np.ndarray, L2: np.ndarray) -> np.ndarray:
    Ls = (L1, L2)
    batch = np.broadcast_shapes(rho.shape[:-2], L1.shape[:-2], L2.shape[:-2])
    J = np.empty(batch + (2, 2))
    for i in range(2):
        for j in range(i, 2):
            anti = Ls[i] @ Ls[j] + Ls[j] @ Ls[i]
            val = _trace_prod(rho, anti) / 2
            scale = np.maximum(1.0, np.abs(val))
            if np.any(np.abs(val.imag) > 1e-10 * scale):
                raise ArithmeticError("SLD Fisher entry has a non-negligible imaginary part")
            J[..., i, j] = val.real
            J[..., j, i] = val.real
    return J


def _rld_fisher(d1: np.ndarray, d2: np.ndarray, rho_inv: np.ndarray) -> np.ndarray:
    ds = (d1, d2)
    batch = np.broadcast_shapes(d1.shape[:-2], d2.shape[:-2], rho_inv.shape[:-2])
    J = np.empty(batch + (2, 2), dtype=complex)
    for i in range(2):
        for j in range(2):
            J[..., i, j] = _trace_prod(ds[j], ds[i], rho_inv)
    # enforce exact Hermiticity of the 2x2 result
    J = (J + dagger(J)) / 2
    return J


def _delta(rho: np.ndarray, X: np.ndarray, Y: np.ndarray, rho_inv: np.ndarray) -> np.ndarray:
    cx = commutator(X, rho)
    cy = commutator(Y, rho)
    return _trace_prod(commutator(cx, cy), rho_inv)


def _inv2(J: np.ndarray) -> np.ndarray:
    a, b = J[..., 0, 0], J[..., 0, 1]
    c, d = J[..., 1, 0], J[..., 1, 1]
    det = a * d - b * c
    out = np.empty_like(J)
    out[..., 0, 0] = d / det
    out[..., 0, 1] = -b / det
    out[..., 1, 0] = -c / det
    out[..., 1, 1] = a / det
    return out


def _regular_mask(JS: np.ndarray, scale) -> np.ndarray:
    tr = JS[..., 0, 0] + JS[..., 1, 1]
    det = JS[..., 0, 0] * JS[..., 1, 1] - JS[..., 0, 1] * JS[..., 1, 0]
    return (tr > 1e-14 * scale) & (det > REGULARITY_TOL * tr * tr)


def _capital_delta(S_inv: np.ndarray, R_inv: np.ndarray) -> np.ndarray:
    im12 = R_inv[..., 0, 1].imag
    return im12**2 - (R_inv[..., 0, 0].real - S_inv[..., 0, 0]) * (
        R_inv[..., 1, 1].real - S_inv[..., 1, 1]
    )


def _d_invariant(S_inv: np.ndarray, R_inv: np.ndarray, tol: float) -> np.ndarray:
    diff = np.max(np.abs(S_inv - R_inv.real), axis=(-2, -1))
    scale = np.maximum(1.0, np.max(np.abs(S_inv), axis=(-2, -1)))
    return diff < tol * scale


def _generator_scale(X: np.ndarray, Y: np.ndarray) -> float:
    def spread(g):
        w = eig_hermitian(g).eigenvalues
        return float(w[-1] - w[0])

    return max(spread(X) ** 2 + spread(Y) ** 2, 1e-300)


# -- public single-model API ----------------------------------------------


def derivatives(model: UnitaryModel) -> tuple[np.ndarray, np.ndarray]:
    """``(-i[X, rho0], -i[Y, rho0])``, the parameter derivatives at the origin."""
    d1, d2 = _derivatives(model.rho0.matrix, model.X, model.Y)
    return hermitian(d1, tol=1e-12), hermitian(d2, tol=1e-12)


def sld_operators(rho0: DensityMatrix, drho) -> tuple[np.ndarray, np.ndarray]:
    """Solve ``d_i rho = (L_i rho + rho L_i) / 2`` in the eigenbasis of ``rho0``."""
    d1, d2 = drho
    w, v = rho0.eigenvalues, rho0.eigenvectors
    return _sld(np.asarray(d1, dtype=complex), w, v), _sld(np.asarray(d2, dtype=complex), w, v)


def sld_fisher(rho0: DensityMatrix, L1, L2) -> np.ndarray:
    """``J_S[i, j] = tr(rho0 {L_i, L_j} / 2)``, a real symmetric 2x2 matrix."""
    return _sld_fisher(rho0.matrix, np.asarray(L1), np.asarray(L2))


def rld_fisher(model: UnitaryModel) -> np.ndarray:
    """``J_R[i, j] = -tr([X_j, rho0][X_i, rho0] rho0^-1) = tr(d_j rho d_i rho rho0^-1)``."""
    d1, d2 = derivatives(model)
    return _rld_fisher(d1, d2, model.rho0.inverse())


def delta(model: UnitaryModel) -> complex:
    """``tr([[X, rho0], [Y, rho0]] rho0^-1)``, equal to ``J_R[0,1] - J_R[1,0]``."""
    rho = model.rho0.matrix
    return complex(_delta(rho, model.X, model.Y, model.rho0.inverse()))


def fisher_pair(model: UnitaryModel) -> FisherPair:
    """SLD and RLD Fisher matrices and their inverses.

    Raises :class:`NonRegularModel` when the SLD matrix is singular.
    """
    drho = derivatives(model)
    L1, L2 = sld_operators(model.rho0, drho)
    JS = sld_fisher(model.rho0, L1, L2)
    JR = _rld_fisher(drho[0], drho[1], model.rho0.inverse())
    if not _regular_mask(JS, _generator_scale(model.X, model.Y)):
        raise NonRegularModel(
            f"SLD Fisher matrix is singular (det {np.linalg.det(JS):.3g}, trace {np.trace(JS):.3g})"
        )
    S_inv = _inv2(JS)
    S_inv = (S_inv + S_inv.T) / 2
    R_inv = _inv2(JR)
    R_inv = (R_inv + dagger(R_inv)) / 2
    return FisherPair(JS, JR, S_inv, R_inv)


def capital_delta(fp: FisherPair) -> float:
    """``|Im J_R^12|^2 - (J_R^11 - J_S^11)(J_R^22 - J_S^22)`` on the inverse matrices."""
    return float(_capital_delta(fp.J_S_inv, fp.J_R_inv))


def d_invariance_check(fp: FisherPair, tol: float = DINV_TOL) -> bool:
    """True when ``J_S^-1`` and ``Re J_R^-1`` agree entrywise.

    The tolerance is relative to ``max(1, max|J_S^-1|)``, which reduces to an
    absolute bound for well-conditioned models.
    """
    return bool(_d_invariant(fp.J_S_inv, fp.J_R_inv, tol))


def _sld_gaps(fp: FisherPair) -> tuple[float, float]:
    return (
        float(fp.J_S_inv[0, 0] - fp.J_R_inv[0, 0].real),
        float(fp.J_S_inv[1, 1] - fp.J_R_inv[1, 1].real),
    )


def bound_intersections(fp: FisherPair) -> list[tuple[float, float]]:
    """The two points where the SLD lines meet the RLD hyperbola.

    ``P1`` lies on ``V11 = J_S^11`` and ``P2`` on ``V22 = J_S^22``.
    """
    if abs(fp.rld_delta) < DELTA_ZERO:
        raise NoIntersection("Im J_R^12 vanishes, the RLD bound gives no trade-off")
    if d_invariance_check(fp):
        raise NoIntersection("model is D-invariant, the RLD bound dominates the SLD bound")
    if not capital_delta(fp) > 0:
        raise NoIntersection("Delta <= 0, the SLD bound dominates")
    g11, g22 = _sld_gaps(fp)
    if g11 <= GAP_FLOOR or g22 <= GAP_FLOOR:
        raise NoIntersection("SLD and RLD diagonals coincide")
    im2 = fp.im12**2
    p1 = (float(fp.J_S_inv[0, 0]), float(fp.J_R_inv[1, 1].real + im2 / g11))
    p2 = (float(fp.J_R_inv[0, 0].real + im2 / g22), float(fp.J_S_inv[1, 1]))
    return [p1, p2]


def rld_hyperbola(fp: FisherPair, v11) -> np.ndarray:
    """``V22`` on the RLD boundary for each ``V11 > J_R^11``."""
    v11 = np.asarray(v11, dtype=float)
    r11 = fp.J_R_inv[0, 0].real
    if np.any(v11 <= r11):
        raise ValueError(f"V11 must exceed J_R^11 = {r11!r}")
    return fp.J_R_inv[1, 1].real + fp.im12**2 / (v11 - r11)


def classify(model: UnitaryModel) -> TradeoffReport:
    fp = fisher_pair(model)
    dlt = delta(model)
    cap = capital_delta(fp)
    cond1 = abs(dlt) >= DELTA_ZERO
    dinv = d_invariance_check(fp)
    if not cond1:
        cls = Classification.NO_TRADEOFF
    elif dinv:
        cls = Classification.RLD_DOMINANT
    elif cap > 0:
        cls = Classification.INTERSECTING
    else:
        cls = Classification.SLD_DOMINANT
    g11, g22 = _sld_gaps(fp)
    return TradeoffReport(
        delta=dlt,
        capital_delta=cap,
        condition1=cond1,
        condition2=cap > 0,
        d_invariant=dinv,
        classification=cls,
        intersections=bound_intersections(fp) if cls is Classification.INTERSECTING else [],
        delta1=cap / g22 if g22 > GAP_FLOOR else None,
        delta2=cap / g11 if g11 > GAP_FLOOR else None,
        fisher=fp,
    )


def pure_state_delta(psi0, X, Y) -> complex:
    """``4 <psi0|[Y, X]|psi0>``, the antisymmetric part of the generalised RLD matrix."""
    psi = np.asarray(psi0, dtype=complex).ravel()
    norm = np.linalg.norm(psi)
    if abs(norm - 1.0) > 1e-10:
        raise ValueError(f"state vector has norm {norm!r}, expected 1")
    X = hermitian(X)
    Y = hermitian(Y)
    if X.shape != (psi.size, psi.size) or Y.shape != X.shape:
        raise ValueError("generator dimensions do not match the state vector")
    return complex(4.0 * np.vdot(psi, commutator(Y, X) @ psi))


def unitary(X, Y, theta) -> np.ndarray:
    """``exp(-i X t1 - i Y t2)`` via diagonalisation of ``X t1 + Y t2``."""
    t1, t2 = theta
    w, v = eig_hermitian(np.asarray(X) * t1 + np.asarray(Y) * t2)
    return (v * np.exp(-1j * w)) @ dagger(v)


def _shifted_model(model: UnitaryModel, theta) -> UnitaryModel:
    scale = 1.0 + float(np.max(np.abs(model.X))) * float(np.max(np.abs(model.Y)))
    if model.commutation_residual > 1e-9 * scale:
        raise ValueError("parameter shifts of non-commuting generators are not supported")
    U = unitary(model.X, model.Y, theta)
    rho_t = DensityMatrix.from_array(U @ model.rho0.matrix @ dagger(U))
    return UnitaryModel(rho_t, model.X, model.Y)


def fisher_matrices_at(model: UnitaryModel, theta) -> tuple[np.ndarray, np.ndarray]:
    """``(J_S, J_R)`` evaluated at ``rho_theta`` rather than at the origin.

    Only meaningful for commuting generators, where ``d_i rho_theta =
    -i [X_i, rho_theta]``; raises ``ValueError`` otherwise.  Unlike
    :func:`fisher_theta_invariance` no inverse is taken, so non-regular models
    are fine here.
    """
    shifted = _shifted_model(model, theta)
    drho = derivatives(shifted)
    JS = sld_fisher(shifted.rho0, *sld_operators(shifted.rho0, drho))
    JR = _rld_fisher(drho[0], drho[1], shifted.rho0.inverse())
    return JS, JR


def fisher_theta_invariance(model: UnitaryModel, theta) -> FisherPair:
    """Fisher pair of the model recomputed at ``theta``; equals the origin pair."""
    return fisher_pair(_shifted_model(model, theta))
