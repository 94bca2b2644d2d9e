"""Explicit super-solutions of the parabolic problem and their certification.

Catalog:

  constant-root    v = lambda**(1/(p-1))                      (lambda > 0)
  exp-growth       v = A exp(a x + (t + t0)**n)               (n >= 2 integer)
  gaussian-decay   v = A (t+1)**(-g) exp(-(x+y)^2 / (4t+4))   (lambda = 0, p > 3)

A spec is certified by evaluating the residual

    v_t - v_xx + v v_x - v|v|^(p-1) + lambda v

from hand-derived closed-form partial derivatives on a space-time grid,
together with the boundary inequality of the requested condition.  The
residual is assembled in its factored form (so analytic zeros stay zeros)
and normalized by the local term magnitude; certification requires the
normalized minimum >= -1e-12, which is scale-free where the raw values grow
like v^2.  A finite-difference probe at 16 seeded points cross-checks the
hand-derived derivatives to 1e-6 relative.

Admissibility of the Gaussian entry uses A^(p-1) <= (1 - 2 g)/2; the factor
two comes from writing -v^p = -(v / (2(t+1))) * 2(t+1) v^(p-1) in the
factored residual, and the weaker constraint without it fails certification.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import PreconditionError, RegimeError
from .model import ModelParams
from .parabolic import (
    BC_DIRICHLET,
    BC_DYNAMICAL,
    BC_NEUMANN,
    BC_ROBIN,
    BoundaryCondition,
    EvolutionResult,
    Grid,
    synthetic_result,
)

__all__ = [
    "CONSTANT_ROOT",
    "EXP_GROWTH",
    "GAUSSIAN_DECAY",
    "SuperSolutionSpec",
    "ValidationReport",
    "build",
    "evaluate",
    "partials",
    "interior_residual",
    "boundary_margin",
    "dynamical_margin_with_sigma",
    "validate",
    "as_evolution",
    "validation_json",
]

CONSTANT_ROOT = "constant-root"
EXP_GROWTH = "exp-growth"
GAUSSIAN_DECAY = "gaussian-decay"

DOMAIN_RIGHT = "right-halfline"  # (0, inf), finite boundary at x = 0, outward normal -x
DOMAIN_LEFT = "left-halfline"  # (-inf, 0), finite boundary at x = 0, outward normal +x
DOMAIN_REAL = "real-line"
DOMAIN_ANY = "any"

_CERT_TOL = 1e-12


@dataclass(frozen=True)
class SuperSolutionSpec:
    kind: str
    m: ModelParams
    domain: str
    bc: BoundaryCondition
    params: dict = field(default_factory=dict)


@dataclass
class ValidationReport:
    kind: str
    constraints: list[dict]
    min_interior_residual: float  # normalized
    min_interior_residual_raw: float
    min_boundary_margin: float  # normalized
    fd_crosscheck_max_relerr: float
    certified: bool


# ---------------------------------------------------------------------------
# construction


def build(
    kind: str,
    m: ModelParams,
    bc: BoundaryCondition,
    phi_sup: float,
    *,
    domain: str | None = None,
    a_exp: float = 1.0,
    n_pow: int = 2,
    A: float | None = None,
) -> SuperSolutionSpec:
    """Assemble a catalog entry with every constraint satisfied and the
    amplitude large enough to dominate initial data with the given bound.

    phi_sup means: sup of phi (constant-root and exp-growth on the right
    half-line); the growth constant C of phi <= C e^(a x) (exp-growth on the
    left half-line or the whole line); the weighted sup of
    phi(x) e^((x+y)^2/4) (gaussian-decay).

    Raises RegimeError naming the violated constraint otherwise.
    """
    if phi_sup < 0.0:
        raise PreconditionError("phi_sup must be nonnegative")

    if kind == CONSTANT_ROOT:
        if m.lam <= 0.0 or m.p <= 1.0:
            raise RegimeError("constant-root requires lambda > 0 and p > 1")
        value = m.root
        if phi_sup > value:
            raise RegimeError(
                f"constant-root dominates only initial data <= lambda**(1/(p-1)) = {value:g}"
            )
        return SuperSolutionSpec(kind, m, domain or DOMAIN_ANY, bc, {"value": value})

    if kind == EXP_GROWTH:
        dom = domain or DOMAIN_RIGHT
        if n_pow < 2 or int(n_pow) != n_pow:
            raise RegimeError("exp-growth exponent n must be an integer >= 2")
        if a_exp <= 0.0:
            raise RegimeError("exp-growth requires a_exp > 0")
        if dom == DOMAIN_RIGHT:
            if not (1.0 < m.p <= 2.0):
                raise RegimeError("exp-growth on (0, inf) requires p in (1, 2]")
            if bc.kind not in (BC_DIRICHLET, BC_DYNAMICAL):
                raise RegimeError("exp-growth on (0, inf) covers Dirichlet or dynamical ends")
            if bc.kind == BC_DYNAMICAL and bc.sigma <= 0.0:
                raise RegimeError("the dynamical end needs sigma > 0 here")
        elif dom in (DOMAIN_LEFT, DOMAIN_REAL):
            if m.p != 2.0:
                raise RegimeError("exp-growth on (-inf, 0) or R requires p = 2")
            if dom == DOMAIN_LEFT and bc.kind not in (BC_DIRICHLET, BC_NEUMANN, BC_DYNAMICAL):
                raise RegimeError("exp-growth on (-inf, 0) covers Dirichlet, Neumann or dynamical")
        else:
            raise RegimeError(f"exp-growth is not defined on domain {dom!r}")
        if m.p == 2.0 and a_exp < 1.0:
            raise RegimeError("p = 2 needs a_exp >= 1 so that a_exp - v^(p-2) >= 0")

        t0 = 0.0
        if a_exp * a_exp > m.lam:
            t0 = ((a_exp * a_exp - m.lam) / n_pow) ** (1.0 / (n_pow - 1.0))
        if bc.kind == BC_DYNAMICAL and dom == DOMAIN_RIGHT:
            t0 = max(t0, (a_exp / (n_pow * bc.sigma)) ** (1.0 / (n_pow - 1.0)))

        a_min = 1.0 if m.p == 2.0 else a_exp ** (1.0 / (m.p - 2.0))
        amp = max(phi_sup, a_min) if A is None else A
        if m.p < 2.0 and amp ** (m.p - 2.0) > a_exp * (1.0 + 1e-12):
            raise RegimeError(f"amplitude violates A^(p-2) <= a_exp (A = {amp:g})")
        if amp < phi_sup:
            raise RegimeError("amplitude too small to dominate the initial data")
        return SuperSolutionSpec(
            kind, m, dom, bc, {"A": amp, "a_exp": a_exp, "t0": t0, "n_pow": int(n_pow)}
        )

    if kind == GAUSSIAN_DECAY:
        dom = domain or DOMAIN_LEFT
        if m.lam != 0.0:
            raise RegimeError("gaussian-decay requires lambda = 0")
        if m.p <= 3.0:
            raise RegimeError("gaussian-decay requires p > 3")
        if dom != DOMAIN_LEFT:
            raise RegimeError("gaussian-decay lives on (-inf, 0)")
        if bc.kind not in (BC_DIRICHLET, BC_NEUMANN, BC_DYNAMICAL):
            raise RegimeError("gaussian-decay covers Dirichlet, Neumann or dynamical ends")
        gamma = 1.0 / (m.p - 1.0)
        sigma = bc.sigma if bc.kind == BC_DYNAMICAL else 0.0
        y = -2.0 * sigma * gamma
        a_max = ((1.0 - 2.0 * gamma) / 2.0) ** (1.0 / (m.p - 1.0))
        amp = min(phi_sup, a_max) if phi_sup > 0.0 else a_max
        amp = amp if A is None else A
        if amp ** (m.p - 1.0) > (1.0 - 2.0 * gamma) / 2.0 * (1.0 + 1e-12):
            raise RegimeError(
                f"amplitude violates A^(p-1) <= (1 - 2 gamma)/2 (max A = {a_max:g})"
            )
        if amp < phi_sup:
            raise RegimeError(
                f"initial data too large for the gaussian entry (weighted sup {phi_sup:g} "
                f"> admissible amplitude {a_max:g})"
            )
        return SuperSolutionSpec(
            kind, m, dom, bc, {"A": amp, "gamma": gamma, "y": y, "sigma": sigma}
        )

    raise PreconditionError(f"unknown super-solution kind {kind!r}")


# ---------------------------------------------------------------------------
# evaluation and hand-derived partials


def evaluate(spec: SuperSolutionSpec, x, t):
    """Pointwise value; accepts scalars or arrays."""
    x = np.asarray(x, dtype=float)
    t = np.asarray(t, dtype=float)
    par = spec.params
    if spec.kind == CONSTANT_ROOT:
        return np.broadcast_to(par["value"], np.broadcast(x, t).shape).copy()
    if spec.kind == EXP_GROWTH:
        return par["A"] * np.exp(par["a_exp"] * x + (t + par["t0"]) ** par["n_pow"])
    if spec.kind == GAUSSIAN_DECAY:
        tau = t + 1.0
        z = x + par["y"]
        return par["A"] * tau ** (-par["gamma"]) * np.exp(-(z * z) / (4.0 * tau))
    raise PreconditionError(f"unknown kind {spec.kind!r}")


def partials(spec: SuperSolutionSpec, x, t):
    """(v, v_t, v_x, v_xx) from hand-derived closed forms."""
    x = np.asarray(x, dtype=float)
    t = np.asarray(t, dtype=float)
    v = evaluate(spec, x, t)
    par = spec.params
    if spec.kind == CONSTANT_ROOT:
        zero = np.zeros_like(v)
        return v, zero, zero.copy(), zero.copy()
    if spec.kind == EXP_GROWTH:
        a, t0, n = par["a_exp"], par["t0"], par["n_pow"]
        vt = n * (t + t0) ** (n - 1) * v
        vx = a * v
        vxx = a * a * v
        return v, vt, vx, vxx
    # gaussian
    g, y = par["gamma"], par["y"]
    tau = t + 1.0
    z = x + y
    vt = v * (-g / tau + z * z / (4.0 * tau * tau))
    vx = -v * z / (2.0 * tau)
    vxx = v * (z * z / (4.0 * tau * tau) - 1.0 / (2.0 * tau))
    return v, vt, vx, vxx


def interior_residual(spec: SuperSolutionSpec, x, t):
    """(raw, normalized) residual of v_t - v_xx + v v_x - v|v|^(p-1) + lam v,
    assembled in factored form so analytic zeros are computed as zeros."""
    x = np.asarray(x, dtype=float)
    t = np.asarray(t, dtype=float)
    m = spec.m
    par = spec.params
    if spec.kind == CONSTANT_ROOT:
        c = par["value"]
        raw = np.broadcast_to(m.lam * c - c * c ** (m.p - 1.0), np.broadcast(x, t).shape)
        scale = max(1.0, m.lam * c)
        return raw, raw / scale
    if spec.kind == EXP_GROWTH:
        a, t0, n = par["a_exp"], par["t0"], par["n_pow"]
        v = evaluate(spec, x, t)
        b1 = n * (t + t0) ** (n - 1) - a * a + m.lam
        b2 = a - v ** (m.p - 2.0)
        raw = v * b1 + v * v * b2
        scale = np.maximum(
            1.0, np.abs(v) * (np.abs(b1) + 2.0 * a * a + 2.0 * abs(m.lam)) + v * v * (a + v ** (m.p - 2.0))
        )
        return raw, raw / scale
    # gaussian
    g, y = par["gamma"], par["y"]
    v = evaluate(spec, x, t)
    tau = t + 1.0
    z = x + y
    w = v / (2.0 * tau)
    bracket = (1.0 - 2.0 * g) - z * v - 2.0 * tau * v ** (m.p - 1.0)
    raw = w * bracket
    scale = np.maximum(1.0, w * (1.0 + np.abs(z) * v + 2.0 * tau * v ** (m.p - 1.0)))
    return raw, raw / scale


def _nu_sign(domain: str) -> float:
    if domain == DOMAIN_RIGHT:
        return -1.0  # boundary x = 0, outward normal -x
    if domain == DOMAIN_LEFT:
        return +1.0
    raise PreconditionError(f"domain {domain!r} has no finite boundary")


def boundary_margin(spec: SuperSolutionSpec, t, x_boundary: float = 0.0):
    """(raw, normalized) boundary inequality at the finite end:
    Dirichlet v >= 0; Neumann d_nu v >= 0; Robin d_nu v + a v >= 0;
    dynamical sigma v_t + d_nu v >= 0."""
    t = np.asarray(t, dtype=float)
    bc = spec.bc
    v, vt, vx, _ = partials(spec, x_boundary, t)
    if spec.domain in (DOMAIN_REAL, DOMAIN_ANY):
        raw = np.zeros_like(t)
        return raw, raw
    nu = _nu_sign(spec.domain)
    dnu = nu * vx
    if bc.kind == BC_DIRICHLET:
        raw = v
        scale = np.maximum(1.0, np.abs(v))
    elif bc.kind == BC_NEUMANN:
        raw = dnu
        scale = np.maximum(1.0, np.abs(vx))
    elif bc.kind == BC_ROBIN:
        raw = dnu + bc.a * v
        scale = np.maximum(1.0, np.abs(vx) + bc.a * np.abs(v))
    elif bc.kind == BC_DYNAMICAL:
        if spec.kind == GAUSSIAN_DECAY:
            # exact factored form: sigma vt + vx = v sigma y^2 / (4 tau^2)
            g, y, sig = spec.params["gamma"], spec.params["y"], spec.params["sigma"]
            tau = t + 1.0
            raw = v * sig * y * y / (4.0 * tau * tau)
        elif spec.kind == EXP_GROWTH:
            a, t0, n = spec.params["a_exp"], spec.params["t0"], spec.params["n_pow"]
            raw = v * (bc.sigma * n * (t + t0) ** (n - 1) + nu * a)
        else:
            raw = bc.sigma * vt + dnu
        scale = np.maximum(1.0, bc.sigma * np.abs(vt) + np.abs(vx))
    else:
        raise PreconditionError(f"boundary kind {bc.kind!r} not covered")
    return raw, raw / scale


def dynamical_margin_with_sigma(spec: SuperSolutionSpec, sigma_fn, t):
    """sigma(t) v_t + d_nu v at the finite end for a time-varying coefficient;
    the exp-growth entry stays admissible whenever
    sigma(t) >= a_exp / (n (t + t0)^(n-1))."""
    t = np.asarray(t, dtype=float)
    v, vt, vx, _ = partials(spec, 0.0, t)
    nu = _nu_sign(spec.domain)
    return np.asarray(sigma_fn(t), dtype=float) * vt + nu * vx


# ---------------------------------------------------------------------------
# certification


def _constraints(spec: SuperSolutionSpec) -> list[dict]:
    m, par, bc = spec.m, spec.params, spec.bc
    out = []

    def add(name: str, margin: float):
        out.append({"name": name, "satisfied": bool(margin >= -1e-12), "margin": float(margin)})

    if spec.kind == CONSTANT_ROOT:
        add("lambda > 0", m.lam)
        add("p > 1", m.p - 1.0)
    elif spec.kind == EXP_GROWTH:
        a, t0, n, A = par["a_exp"], par["t0"], par["n_pow"], par["A"]
        add("t0 >= ((a^2 - lambda)/n)^(1/(n-1))",
            t0 - (max(a * a - m.lam, 0.0) / n) ** (1.0 / (n - 1.0)))
        add("t0 >= 0", t0)
        if m.p < 2.0:
            add("A^(p-2) <= a_exp", a - A ** (m.p - 2.0))
        else:
            add("a_exp >= 1 (p = 2)", a - 1.0)
        if bc.kind == BC_DYNAMICAL and spec.domain == DOMAIN_RIGHT:
            add("t0 >= (a/(n sigma))^(1/(n-1))",
                t0 - (a / (n * bc.sigma)) ** (1.0 / (n - 1.0)))
    elif spec.kind == GAUSSIAN_DECAY:
        g, y, A = par["gamma"], par["y"], par["A"]
        add("lambda = 0", -abs(m.lam))
        add("p > 3", m.p - 3.0)
        add("gamma = 1/(p-1)", -abs(g - 1.0 / (m.p - 1.0)))
        add("y = -2 sigma gamma", -abs(y + 2.0 * par["sigma"] * g))
        add("A^(p-1) <= (1-2 gamma)/2", (1.0 - 2.0 * g) / 2.0 - A ** (m.p - 1.0))
    return out


def _default_box(spec: SuperSolutionSpec) -> tuple[float, float]:
    if spec.domain == DOMAIN_RIGHT:
        return 0.0, 5.0
    if spec.domain == DOMAIN_LEFT:
        return -5.0, 0.0
    if spec.domain == DOMAIN_REAL:
        return -5.0, 5.0
    return -1.0, 1.0


def validate(
    spec: SuperSolutionSpec,
    *,
    x_range: tuple[float, float] | None = None,
    t_max: float = 2.0,
    resolution: tuple[int, int] = (256, 256),
    rng_seed: int = 0,
) -> ValidationReport:
    """Certify the spec on a space-time grid of its applicability domain.

    Certification needs the normalized interior residual and boundary margin
    to stay >= -1e-12 over the grid and every structural constraint to hold.
    """
    x0, x1 = x_range if x_range is not None else _default_box(spec)
    nx, nt = resolution
    xs = np.linspace(x0, x1, nx)
    ts = np.linspace(0.0, t_max, nt)
    X, T = np.meshgrid(xs, ts, indexing="ij")

    raw, normed = interior_residual(spec, X, T)
    min_raw = float(np.min(raw))
    min_norm = float(np.min(normed))

    if spec.domain in (DOMAIN_RIGHT, DOMAIN_LEFT):
        _, bn = boundary_margin(spec, ts)
        min_bdry = float(np.min(bn))
    else:
        min_bdry = 0.0

    rng = np.random.default_rng(rng_seed)
    max_rel = 0.0
    for _ in range(16):
        xp = float(rng.uniform(x0, x1))
        tp = float(rng.uniform(0.05, t_max))
        v, vt, vx, vxx = partials(spec, xp, tp)
        scale = max(1.0, abs(float(v)))
        eps_t = 1e-6 * max(1.0, abs(tp))
        eps_x = 1e-6 * max(1.0, abs(xp))
        fd_t = (evaluate(spec, xp, tp + eps_t) - evaluate(spec, xp, tp - eps_t)) / (2 * eps_t)
        fd_x = (evaluate(spec, xp + eps_x, tp) - evaluate(spec, xp - eps_x, tp)) / (2 * eps_x)
        fd_xx = (
            evaluate(spec, xp + eps_x, tp)
            - 2.0 * evaluate(spec, xp, tp)
            + evaluate(spec, xp - eps_x, tp)
        ) / (eps_x * eps_x)
        for a_cl, a_fd in ((vt, fd_t), (vx, fd_x), (vxx, fd_xx)):
            denom = max(scale, abs(float(a_cl)))
            max_rel = max(max_rel, abs(float(a_cl) - float(a_fd)) / denom)

    cons = _constraints(spec)
    certified = (
        min_norm >= -_CERT_TOL
        and min_bdry >= -_CERT_TOL
        and all(c["satisfied"] for c in cons)
    )
    return ValidationReport(
        kind=spec.kind,
        constraints=cons,
        min_interior_residual=min_norm,
        min_interior_residual_raw=min_raw,
        min_boundary_margin=min_bdry,
        fd_crosscheck_max_relerr=float(max_rel),
        certified=certified,
    )


def as_evolution(spec: SuperSolutionSpec, grid: Grid, times) -> EvolutionResult:
    """Evaluate the spec on a grid at the given times, shaped like an
    EvolutionResult for compare_fields."""
    return synthetic_result(grid, times, lambda x, t: evaluate(spec, x, t))


def validation_json(report: ValidationReport) -> str:
    doc = {
        "kind": report.kind,
        "constraints": report.constraints,
        "min_interior_residual": report.min_interior_residual,
        "min_interior_residual_raw": report.min_interior_residual_raw,
        "min_boundary_margin": report.min_boundary_margin,
        "fd_crosscheck_max_relerr": report.fd_crosscheck_max_relerr,
        "certified": report.certified,
    }
    return json.dumps(doc, indent=2, sort_keys=True)
