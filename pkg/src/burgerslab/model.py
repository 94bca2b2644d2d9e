"""Parameters, vector field and equilibrium structure of the stationary system.

The stationary profiles of

    u_t = u_xx - u u_x + u|u|^(p-1) - lambda u

are orbits of the planar system

    u' = v
    v' = u v - u|u|^(p-1) + lambda u      (p > 1)

and, in the limiting exponent p = 1,

    u' = v
    v' = u (v + lambda - 1).

Everything in this module is a pure function of (point, params).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ContractError, DomainError, PreconditionError

__all__ = [
    "ModelParams",
    "PhasePoint",
    "EquilibriumInfo",
    "vector_field",
    "vector_field_p1",
    "field_callable",
    "jacobian",
    "slope",
    "nullcline",
    "curvature",
    "classify_equilibria",
    "SADDLE",
    "VORTEX_REPULSIVE",
    "VORTEX_ATTRACTIVE",
    "NODE_UNSTABLE",
    "NODE_STABLE",
    "DEGENERATE_NODE",
    "CENTER",
    "CONTINUUM_MEMBER",
]

SADDLE = "saddle"
VORTEX_REPULSIVE = "vortex-repulsive"
VORTEX_ATTRACTIVE = "vortex-attractive"
NODE_UNSTABLE = "node-unstable"
NODE_STABLE = "node-stable"
DEGENERATE_NODE = "degenerate-node"
CENTER = "center"
CONTINUUM_MEMBER = "continuum-member"

#: |D| below this is reported as a degenerate node.
DEGENERACY_TOL = 1e-12


def _abs_pow(u: float, q: float) -> float:
    """|u|**q without ever raising a negative base to a fractional power."""
    return abs(u) ** q


@dataclass(frozen=True)
class ModelParams:
    """The parameter pair (p, lambda).

    p >= 1 is the reaction exponent; lam is the linear reaction coefficient.
    p = 1 is admitted only for the limiting-case operations.
    """

    p: float
    lam: float

    def __post_init__(self):
        if not (math.isfinite(self.p) and math.isfinite(self.lam)):
            raise DomainError("p and lambda must be finite")
        if self.p < 1.0:
            raise DomainError(f"p must be >= 1, got {self.p}")

    @property
    def root(self) -> float:
        """Positive equilibrium abscissa lambda**(1/(p-1)); requires lam > 0, p > 1."""
        if self.p <= 1.0:
            raise PreconditionError("root requires p > 1")
        if self.lam <= 0.0:
            raise PreconditionError("root requires lambda > 0")
        return self.lam ** (1.0 / (self.p - 1.0))

    @property
    def discriminant(self) -> float:
        """1 - 4(p-1) lambda**((p-3)/(p-1)) classifying the off-origin equilibria.

        At p = 3 the exponent vanishes and the limit convention lambda**0 = 1
        is used for every lambda > 0.
        """
        if self.p <= 1.0:
            raise PreconditionError("discriminant requires p > 1")
        if self.lam <= 0.0:
            raise PreconditionError("discriminant requires lambda > 0")
        expo = (self.p - 3.0) / (self.p - 1.0)
        return 1.0 - 4.0 * (self.p - 1.0) * self.lam**expo


@dataclass(frozen=True)
class PhasePoint:
    """A point (u, v) of the phase plane; v is the spatial derivative u'."""

    u: float
    v: float

    def __post_init__(self):
        if not (math.isfinite(self.u) and math.isfinite(self.v)):
            raise DomainError(f"non-finite phase point ({self.u}, {self.v})")

    def as_array(self) -> np.ndarray:
        return np.array([self.u, self.v], dtype=float)


@dataclass(frozen=True)
class EquilibriumInfo:
    """Location, type and linearization data of one equilibrium."""

    location: PhasePoint
    kind: str
    eigenvalues: tuple[complex, complex]
    discriminant: float | None = None
    detail: str | None = None
    continuum: bool = field(default=False)


def vector_field(s: PhasePoint, m: ModelParams) -> tuple[float, float]:
    """(u', v') = (v, u v - u|u|^(p-1) + lambda u); requires p > 1."""
    if m.p <= 1.0:
        raise ContractError("vector_field requires p > 1; use vector_field_p1 for p = 1")
    u, v = s.u, s.v
    return v, u * v - u * _abs_pow(u, m.p - 1.0) + m.lam * u


def vector_field_p1(s: PhasePoint, m: ModelParams) -> tuple[float, float]:
    """(u', v') = (v, u (v + lambda - 1)) for the limiting exponent p = 1."""
    if m.p != 1.0:
        raise ContractError(f"vector_field_p1 requires p = 1, got p = {m.p}")
    u, v = s.u, s.v
    return v, u * (v + m.lam - 1.0)


def field_callable(m: ModelParams, reverse: bool = False):
    """Array-valued right-hand side f(s, y) for the integrator.

    `reverse` negates the field, which traces the same orbit support
    backwards.
    """
    p, lam = m.p, m.lam
    sign = -1.0 if reverse else 1.0
    if p == 1.0:

        def f(s, y):
            u, v = y
            return np.array([sign * v, sign * (u * (v + lam - 1.0))])

    else:
        q = p - 1.0

        def f(s, y):
            u, v = y
            return np.array([sign * v, sign * (u * v - u * abs(u) ** q + lam * u)])

    return f


def jacobian(s: PhasePoint, m: ModelParams) -> np.ndarray:
    """Jacobian of the (forward) vector field at s."""
    u, v = s.u, s.v
    if m.p == 1.0:
        return np.array([[0.0, 1.0], [v + m.lam - 1.0, u]])
    dvu = v - m.p * _abs_pow(u, m.p - 1.0) + m.lam
    return np.array([[0.0, 1.0], [dvu, u]])


def slope(s: PhasePoint, m: ModelParams) -> float | None:
    """dv/du = (u/v) (v - |u|^(p-1) + lambda) along an orbit.

    Returns a signed infinity where the orbit crosses the u-axis away from
    an equilibrium (the sign is that of v' there), and None at an
    equilibrium where 0/0 is indeterminate.
    """
    if m.p <= 1.0:
        raise ContractError("slope requires p > 1")
    u, v = s.u, s.v
    g = v - _abs_pow(u, m.p - 1.0) + m.lam
    if v == 0.0:
        vertical = u * (m.lam - _abs_pow(u, m.p - 1.0))
        if vertical == 0.0:
            return None
        return math.inf if vertical > 0.0 else -math.inf
    return (u / v) * g


def nullcline(u: float, m: ModelParams) -> float:
    """The curve v = |u|^(p-1) - lambda on which dv/du vanishes (u != 0)."""
    if m.p <= 1.0:
        raise ContractError("nullcline requires p > 1")
    return _abs_pow(u, m.p - 1.0) - m.lam


def curvature(s: PhasePoint, m: ModelParams) -> float | None:
    """d2v/du2 of an orbit graph v = f(u), where defined.

    For p > 1 this is

        1 + [ (lambda - p|u|^(p-1)) v - u (lambda - |u|^(p-1)) dv/du ] / v^2

    and the p = 1 value is obtained by differentiating
    dv/du = u + u(lambda - 1)/v, which the same expression specializes to.
    Returns None where v = 0 (vertical tangent or equilibrium).
    """
    u, v = s.u, s.v
    if v == 0.0:
        return None
    if m.p == 1.0:
        dv = u + u * (m.lam - 1.0) / v
        return 1.0 + (m.lam - 1.0) * (v - u * dv) / v**2
    dv = slope(s, m)
    a = _abs_pow(u, m.p - 1.0)
    return 1.0 + ((m.lam - m.p * a) * v - u * (m.lam - a) * dv) / v**2


def _eigs_at(u0: float, m: ModelParams) -> tuple[complex, complex]:
    """Closed-form eigenvalues of the linearization at an equilibrium (u0, 0)."""
    J = jacobian(PhasePoint(u0, 0.0), m)
    tr = float(J[1, 1])
    det = -float(J[1, 0])
    sq = complex(tr * tr - 4.0 * det) ** 0.5
    return (complex((tr + sq) / 2.0), complex((tr - sq) / 2.0))


def classify_equilibria(m: ModelParams) -> list[EquilibriumInfo]:
    """All equilibria of the stationary system with their linearized type.

    lambda > 0, p > 1 gives the saddle at the origin plus the pair at
    (+-lambda**(1/(p-1)), 0) whose type is decided by the discriminant;
    lambda <= 0, p > 1 gives the single center at the origin.  For p = 1
    the critical value moves to lambda = 1, where the whole u-axis is a
    continuum of equilibria.
    """
    if m.p == 1.0:
        if m.lam == 1.0:
            return [
                EquilibriumInfo(
                    location=PhasePoint(0.0, 0.0),
                    kind=CONTINUUM_MEMBER,
                    eigenvalues=(0j, 0j),
                    discriminant=None,
                    detail="the whole axis {v=0} consists of equilibria",
                    continuum=True,
                )
            ]
        eigs = _eigs_at(0.0, m)
        kind = SADDLE if m.lam > 1.0 else CENTER
        return [EquilibriumInfo(PhasePoint(0.0, 0.0), kind, eigs, None)]

    if m.lam <= 0.0:
        eigs = _eigs_at(0.0, m)
        return [EquilibriumInfo(PhasePoint(0.0, 0.0), CENTER, eigs, None)]

    r = m.root
    D = m.discriminant
    out = [EquilibriumInfo(PhasePoint(0.0, 0.0), SADDLE, _eigs_at(0.0, m), None)]
    for u0, spiral_kind, node_kind in (
        (r, VORTEX_REPULSIVE, NODE_UNSTABLE),
        (-r, VORTEX_ATTRACTIVE, NODE_STABLE),
    ):
        detail = None
        if abs(D) <= DEGENERACY_TOL:
            kind = DEGENERATE_NODE
            detail = f"degenerate-node (within tolerance {DEGENERACY_TOL:g})"
        elif D < 0.0:
            kind = spiral_kind
        else:
            kind = node_kind
        out.append(EquilibriumInfo(PhasePoint(u0, 0.0), kind, _eigs_at(u0, m), D, detail))
    return out
