"""Stationary profiles built by shooting in the phase plane.

A profile is an arc of an orbit between two boundary events, reparametrized
to x in [-alpha, alpha]; the half-width alpha is always an output of the
construction (the traversal parameter of the arc), never an input.  Seeds
are found by a geometric scan (factor 1.5, up to 64 seeds) and, where a
specific interval length is wanted, refined by bisection on the emergent
alpha.

Residuals are measured independently of the integrator: fourth-order central
finite differences of the sampled profile are substituted into
u'' - u u' + u|u|^(p-1) - lambda u.  Blow-up profiles are the one exception:
their samples run to the escape cap, where no finite-difference stencil can
resolve the solution, so the residual is reported over the window
|u| <= residual_window (recorded in the metadata).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .barriers import (
    BOUNDED,
    UNBOUNDED,
    bounded_lneg_threshold,
    certify_unbounded_axis_start,
    certify_unbounded_u_axis_start,
)
from .errors import NumericalError, PreconditionError, RegimeError
from .flow import (
    EVENT_U_AXIS,
    EVENT_V_AXIS,
    IntegrationOptions,
    StopRule,
    Trajectory,
    integrate,
)
from .model import ModelParams, PhasePoint, field_callable, jacobian

__all__ = [
    "StationarySolution",
    "solve_bvp",
    "match_alpha",
    "find_periodic",
    "find_halfline",
    "find_blowup_profile",
    "neumann_positive_scan",
    "halfline_offset_sensitivity",
    "profile_residual",
    "write_profile_csv",
    "solution_meta",
]

BC_KINDS = (
    "dirichlet",
    "neumann",
    "mixed1",
    "mixed2",
    "periodic",
    "halfline-neumann",
    "halfline-mixed2",
    "fullline-neumann",
    "halfline-mixed1",
    "blowup-profile",
)

POSITIVE = "positive"
NEGATIVE = "negative"
SIGN_CHANGING = "sign-changing"

_SCAN_FACTOR = 1.5
_SCAN_LIMIT = 64
_BC_TOL = 1e-8


@dataclass
class StationarySolution:
    """A sampled stationary profile with boundary metadata and diagnostics."""

    x: np.ndarray
    u: np.ndarray
    du: np.ndarray
    bc: str
    sign: str
    half_width: float
    residual: float
    m: ModelParams
    period: float | None = None
    meta: dict = field(default_factory=dict)


def profile_residual(x: np.ndarray, u: np.ndarray, m: ModelParams, window: float | None = None) -> float:
    """Max |u'' - u u' + u|u|^(p-1) - lambda u| on the interior, with u', u''
    from fourth-order central differences of the samples themselves.

    Stencils straddling a sign change of u are excluded: for fractional p the
    term u|u|^(p-1) has only finitely many derivatives at a zero, so the
    high-order stencil loses its accuracy there even on an exact solution.
    """
    h = x[1] - x[0]
    du = (-u[4:] + 8.0 * u[3:-1] - 8.0 * u[1:-3] + u[:-4]) / (12.0 * h)
    d2u = (-u[4:] + 16.0 * u[3:-1] - 30.0 * u[2:-2] + 16.0 * u[1:-3] - u[:-4]) / (12.0 * h * h)
    ui = u[2:-2]
    res = np.abs(d2u - ui * du + ui * np.abs(ui) ** (m.p - 1.0) - m.lam * ui)
    win = np.lib.stride_tricks.sliding_window_view(u, 5)
    straddle = (win.min(axis=1) < 0.0) & (win.max(axis=1) > 0.0)
    keep = ~straddle
    if window is not None:
        keep &= np.abs(ui) <= window
    if not keep.any():
        return float("nan")
    return float(res[keep].max())


def _event_g(kind: str, m: ModelParams):
    """Event residual and its derivative along the flow, for endpoint polish."""
    f = field_callable(m)
    if kind == EVENT_V_AXIS:
        return (lambda y: y[0]), (lambda y: f(0.0, y)[0])
    if kind == EVENT_U_AXIS:
        return (lambda y: y[1]), (lambda y: f(0.0, y)[1])
    raise PreconditionError(f"no polish rule for event kind {kind!r}")


def _polished_event_s(
    start: PhasePoint, m: ModelParams, s_e0: float, kind: str, opts: IntegrationOptions
) -> float:
    """Newton-polish an event parameter on a re-integrated (accurate) endpoint."""
    run = opts.with_(s_max=s_e0, stop_rules=(), record_kinds=(), interior_scan=0)
    traj = integrate(start, m, run)
    y1 = np.array([traj.u[-1], traj.v[-1]])
    g, dg = _event_g(kind, m)
    slope_ = dg(y1)
    if slope_ == 0.0:
        return s_e0
    delta = -g(y1) / slope_
    return s_e0 + delta if abs(delta) < 0.1 else s_e0


def _refined_samples(
    start: PhasePoint,
    m: ModelParams,
    s_end: float,
    n: int,
    opts: IntegrationOptions,
    polish_kind: str | None = None,
) -> tuple[float, np.ndarray, np.ndarray]:
    """Integrate once more with steps no larger than the sample spacing (so
    the dense output is accurate at the samples), optionally polishing the
    final point onto its event curve by one Newton step along the flow.

    Returns (s_end_polished, u, v) on a uniform n-point grid of [0, s_end].
    """
    h_grid = s_end / (n - 1)
    run = opts.with_(
        s_max=s_end,
        max_step=min(opts.max_step, h_grid),
        stop_rules=(),
        record_kinds=(),
        interior_scan=0,
        max_steps=10 * n + 1000,
        escape_cap=np.inf,
    )
    traj = integrate(start, m, run)
    if traj.terminal != "max-steps" or traj.s[-1] < s_end * (1.0 - 1e-12):
        raise NumericalError(
            f"refinement pass stopped early at s = {traj.s[-1]:.6g} ({traj.terminal})"
        )
    y1 = np.array([traj.u[-1], traj.v[-1]])
    f = field_callable(m)
    if polish_kind is not None:
        g, dg = _event_g(polish_kind, m)
        slope_ = dg(y1)
        if slope_ != 0.0:
            delta = -g(y1) / slope_
            if abs(delta) < h_grid:
                s_end = s_end + delta
                y1 = y1 + delta * f(0.0, y1) + 0.5 * delta * delta * np.asarray(
                    jacobian(PhasePoint(*y1), m) @ f(0.0, y1)
                )
    s = np.linspace(0.0, s_end, n)
    ys = traj.dense(np.clip(s, 0.0, traj.s[-1]))
    u = np.asarray(ys[0], dtype=float).copy()
    v = np.asarray(ys[1], dtype=float).copy()
    u[-1], v[-1] = y1[0], y1[1]
    return s_end, u, v


def _sign_of(u: np.ndarray) -> str:
    tol = 1e-8 * max(1.0, float(np.abs(u).max()))
    has_pos = bool((u > tol).any())
    has_neg = bool((u < -tol).any())
    if has_pos and has_neg:
        return SIGN_CHANGING
    return POSITIVE if has_pos else NEGATIVE


def _arc_solution(
    traj: Trajectory,
    m: ModelParams,
    bc: str,
    n_samples: int,
    meta: dict,
    opts: IntegrationOptions,
) -> StationarySolution:
    if traj.terminal != "event-stop":
        raise NumericalError(f"arc did not reach its boundary event (terminal {traj.terminal!r})")
    start = PhasePoint(float(traj.u[0]), float(traj.v[0]))
    s_end, u, du = _refined_samples(
        start, m, traj.stop_event.s, n_samples, opts, polish_kind=traj.stop_event.kind
    )
    alpha = s_end / 2.0
    x = np.linspace(-alpha, alpha, n_samples)
    res = profile_residual(x, u, m)
    sol = StationarySolution(x, u, du, bc, _sign_of(u), alpha, res, m, meta=meta)
    _check_bc(sol)
    return sol


def _check_bc(sol: StationarySolution) -> None:
    u, du, bc = sol.u, sol.du, sol.bc
    checks = {}
    if bc == "dirichlet":
        checks = {"u(-a)": u[0], "u(+a)": u[-1]}
    elif bc == "neumann":
        checks = {"du(-a)": du[0], "du(+a)": du[-1]}
    elif bc == "mixed1":
        checks = {"u(-a)": u[0], "du(+a)": du[-1]}
    elif bc == "mixed2":
        checks = {"du(-a)": du[0], "u(+a)": u[-1]}
    elif bc == "periodic":
        checks = {"u jump": u[-1] - u[0], "du jump": du[-1] - du[0]}
    bad = {k: v for k, v in checks.items() if abs(v) > 1e-7}
    sol.meta["bc_residuals"] = {k: float(v) for k, v in checks.items()}
    if bad:
        raise NumericalError(f"boundary conditions violated beyond tolerance: {bad}")


def _scan(seed0: float, solve_one, direction: str = "up"):
    """Geometric seed scan; returns (seed, solution) of the first success."""
    failures = []
    seed = seed0
    for _ in range(_SCAN_LIMIT):
        try:
            return seed, solve_one(seed)
        except NumericalError as exc:
            failures.append((seed, str(exc)))
        seed = seed * _SCAN_FACTOR if direction == "up" else seed / _SCAN_FACTOR
    raise NumericalError(
        f"no admissible seed found in a {_SCAN_LIMIT}-step geometric scan from "
        f"{seed0:g}; last failure: {failures[-1][1]}"
    )


# ---------------------------------------------------------------------------
# regime table


def _covered(bc: str, m: ModelParams, sign: str) -> None:
    """Raise RegimeError unless a covered existence regime applies."""
    p, lam = m.p, m.lam
    if p <= 1.0:
        raise RegimeError("stationary constructions require p > 1")

    def vortex() -> bool:
        return m.discriminant < 0.0

    if sign == POSITIVE:
        if bc == "dirichlet":
            if lam > 0.0 and p >= 3.0:
                return
            if lam <= 0.0:
                return
            raise RegimeError(
                "no positive two-sided-zero profile is covered for lambda > 0 with p < 3: "
                "orbits leaving the ordinate axis may escape to infinity instead of returning"
            )
        if bc == "neumann":
            if lam <= 0.0:
                raise RegimeError(
                    "no positive solution exists under Neumann conditions for lambda <= 0: "
                    "an orbit leaving the u-axis cannot reach v = 0 again without first "
                    "crossing into u < 0"
                )
            if p >= 3.0 or vortex():
                return
            raise RegimeError(
                "positive Neumann profiles for p < 3 require the off-origin equilibrium "
                "to be a vortex (discriminant < 0); got discriminant "
                f"{m.discriminant:g}"
            )
        if bc == "mixed1":
            if (lam > 0.0 and p >= 3.0) or lam <= 0.0:
                return
            raise RegimeError(
                "no positive mixed1 profile is covered for lambda > 0 with p < 3"
            )
        if bc == "mixed2":
            return  # covered for every p > 1, any lambda
        raise RegimeError(f"positive solutions are not constructed for bc {bc!r}")

    if sign == SIGN_CHANGING:
        if bc == "neumann":
            return  # lambda > 0 any p; lambda <= 0 any p
        if bc == "mixed1":
            if lam > 0.0:
                return
            raise RegimeError("sign-changing mixed1 profiles are covered only for lambda > 0")
        raise RegimeError(f"sign-changing solutions are not constructed for bc {bc!r}")

    if sign == NEGATIVE:
        if bc == "mixed1" and lam > 0.0:
            return
        raise RegimeError(f"negative solutions are constructed only for mixed1 with lambda > 0")

    raise RegimeError(f"unknown sign request {sign!r}")


# ---------------------------------------------------------------------------
# the individual arcs


def _positive_guard(traj: Trajectory) -> None:
    if traj.u.min() < -1e-7:
        raise NumericalError("arc left the positive half-plane")


def _dirichlet_arc(m: ModelParams, v0: float, opts: IntegrationOptions) -> Trajectory:
    stop = StopRule(EVENT_V_AXIS, predicate=lambda pt: pt.v < 0.0)
    traj = integrate(PhasePoint(0.0, v0), m, opts.with_(stop_rules=(stop,)))
    if traj.terminal != "event-stop":
        raise NumericalError(f"seed v0={v0:g} did not return to the ordinate axis ({traj.terminal})")
    _positive_guard(traj)
    return traj


def _mixed1_arc(m: ModelParams, v0: float, opts: IntegrationOptions) -> Trajectory:
    stop = StopRule(EVENT_U_AXIS, predicate=lambda pt: pt.u > 0.0)
    traj = integrate(PhasePoint(0.0, v0), m, opts.with_(stop_rules=(stop,)))
    if traj.terminal != "event-stop":
        raise NumericalError(f"seed v0={v0:g} did not reach the u-axis ({traj.terminal})")
    _positive_guard(traj)
    return traj


def _mixed2_arc(m: ModelParams, u0: float, opts: IntegrationOptions) -> Trajectory:
    stop = StopRule(EVENT_V_AXIS, predicate=lambda pt: pt.v < 0.0)
    traj = integrate(PhasePoint(u0, 0.0), m, opts.with_(stop_rules=(stop,)))
    if traj.terminal != "event-stop":
        raise NumericalError(f"seed u0={u0:g} did not reach the ordinate axis ({traj.terminal})")
    _positive_guard(traj)
    return traj


def _neumann_positive_arc(m: ModelParams, u0: float, opts: IntegrationOptions) -> Trajectory:
    r = m.root
    stop = StopRule(EVENT_U_AXIS, predicate=lambda pt: pt.u > r)
    traj = integrate(PhasePoint(u0, 0.0), m, opts.with_(stop_rules=(stop,)))
    if traj.terminal != "event-stop":
        raise NumericalError(f"seed u0={u0:g} did not return to the u-axis ({traj.terminal})")
    _positive_guard(traj)
    return traj


def _neumann_signchanging_arc(m: ModelParams, u0: float, opts: IntegrationOptions) -> Trajectory:
    stop = StopRule(EVENT_U_AXIS, predicate=lambda pt: pt.u < 0.0)
    traj = integrate(PhasePoint(u0, 0.0), m, opts.with_(stop_rules=(stop,)))
    if traj.terminal != "event-stop":
        raise NumericalError(f"seed u0={u0:g} did not reach the mirrored axis point ({traj.terminal})")
    return traj


def _mixed1_negative_arc(m: ModelParams, v3: float, opts: IntegrationOptions) -> Trajectory:
    stop = StopRule(EVENT_U_AXIS, predicate=lambda pt: pt.u < 0.0)
    traj = integrate(PhasePoint(0.0, v3), m, opts.with_(stop_rules=(stop,)))
    if traj.terminal != "event-stop":
        raise NumericalError(f"seed v3={v3:g} did not reach the u-axis ({traj.terminal})")
    if traj.u.max() > 1e-7:
        raise NumericalError("arc left the negative half-plane")
    return traj


def _lneg_seed_cap(m: ModelParams) -> float:
    """Largest certified bounded axis seed for lambda <= 0 (None-cap for p >= 3)."""
    if m.p >= 3.0:
        return math.inf
    return bounded_lneg_threshold(m)


def _arc_builder(bc: str, m: ModelParams, sign_request: str, opts: IntegrationOptions):
    """(arc_fn, first_seed, scan_direction) for a covered regime."""
    lam = m.lam
    if bc == "dirichlet":
        arc = lambda v0: _dirichlet_arc(m, v0, opts)
        if lam <= 0.0:
            cap = _lneg_seed_cap(m)
            return arc, (min(0.4, 0.9 * cap) if math.isfinite(cap) else 0.4), "down"
        return arc, 0.4, "up"
    if bc == "neumann" and sign_request == POSITIVE:
        return (lambda u0: _neumann_positive_arc(m, u0, opts)), 0.5 * m.root, "down"
    if bc == "neumann":
        seed0 = 1.5 * m.root if lam > 0.0 else 0.5
        return (lambda u0: _neumann_signchanging_arc(m, u0, opts)), seed0, "up"
    if bc == "mixed1" and sign_request == POSITIVE:
        arc = lambda v0: _mixed1_arc(m, v0, opts)
        if lam <= 0.0:
            cap = _lneg_seed_cap(m)
            return arc, (min(0.4, 0.9 * cap) if math.isfinite(cap) else 0.4), "down"
        return arc, 0.4, "up"
    if bc == "mixed1":
        return (lambda v3: _mixed1_negative_arc(m, -abs(v3), opts)), 0.3, "up"
    return (lambda u0: _mixed2_arc(m, u0, opts)), (1.5 * m.root if lam > 0.0 else 1.0), "up"


def solve_bvp(
    bc: str,
    m: ModelParams,
    sign_request: str = POSITIVE,
    *,
    seed: float | None = None,
    opts: IntegrationOptions | None = None,
    n_samples: int = 2001,
) -> StationarySolution:
    """Construct the stationary profile for a covered (bc, params, sign) regime.

    Parameters
    ----------
    bc : "dirichlet" | "neumann" | "mixed1" | "mixed2"
    sign_request : "positive" | "negative" | "sign-changing"
    seed : optional explicit shooting seed (axis ordinate or abscissa,
        depending on the construction); by default a geometric scan finds one.

    Raises
    ------
    RegimeError
        When no covered existence regime applies (including the Neumann
        nonexistence region lambda <= 0), so "not covered" is never silently
        turned into a numerical search.
    NumericalError
        When the scan exhausts its seed budget.
    """
    if bc not in ("dirichlet", "neumann", "mixed1", "mixed2"):
        raise PreconditionError(f"solve_bvp handles interval problems, not {bc!r}")
    _covered(bc, m, sign_request)
    opts = opts or IntegrationOptions()
    arc, seed0, direction = _arc_builder(bc, m, sign_request, opts)

    if seed is not None:
        used_seed, traj = seed, arc(seed)
    else:
        used_seed, traj = _scan(seed0, arc, direction)

    meta = {
        "seed": float(used_seed),
        "events": [
            {"kind": e.kind, "s": e.s, "u": e.point.u, "v": e.point.v} for e in traj.events
        ],
        "end_point": {"u": traj.stop_event.point.u, "v": traj.stop_event.point.v},
    }
    sol = _arc_solution(traj, m, bc, n_samples, meta, opts)
    if sol.sign != sign_request:
        raise NumericalError(
            f"constructed profile has sign {sol.sign!r}, requested {sign_request!r}"
        )
    return sol


def match_alpha(
    bc: str,
    m: ModelParams,
    sign_request: str,
    target_alpha: float,
    bracket: tuple[float, float],
    *,
    opts: IntegrationOptions | None = None,
    n_samples: int = 2001,
    tol: float = 1e-12,
) -> StationarySolution:
    """Bisect the shooting seed until the emergent half-width matches
    `target_alpha`; used to cross-check uniqueness of a profile at a given
    interval length from an independent bracket."""

    def alpha_of(s: float) -> tuple[float, StationarySolution]:
        sol = solve_bvp(bc, m, sign_request, seed=s, opts=opts, n_samples=n_samples)
        return sol.half_width - target_alpha, sol

    lo, hi = bracket
    flo, sol_lo = alpha_of(lo)
    fhi, sol_hi = alpha_of(hi)
    if flo == 0.0:
        return sol_lo
    if fhi == 0.0:
        return sol_hi
    if flo * fhi > 0.0:
        raise NumericalError(
            f"bracket {bracket} does not straddle the target half-width "
            f"(alpha offsets {flo:g}, {fhi:g})"
        )
    sol_mid = sol_lo
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        fmid, sol_mid = alpha_of(mid)
        if abs(fmid) <= tol or (hi - lo) <= 1e-15 * max(1.0, abs(mid)):
            break
        if (fmid < 0.0) == (flo < 0.0):
            lo, flo = mid, fmid
        else:
            hi = mid
    return sol_mid


def find_periodic(
    m: ModelParams,
    seed_v0: float,
    *,
    opts: IntegrationOptions | None = None,
    n_samples: int = 2001,
) -> StationarySolution:
    """A closed orbit through (0, v0) and its sign-changing periodic profile.

    Covered regimes: lambda > 0 with p >= 3 (every axis seed closes up), and
    lambda <= 0 with the seed inside the certified bounded range.  The closure
    error after one full period must be <= 1e-7.
    """
    if seed_v0 <= 0.0:
        raise PreconditionError("seed_v0 must be positive")
    p, lam = m.p, m.lam
    if p <= 1.0:
        raise PreconditionError("find_periodic requires p > 1")
    if lam > 0.0:
        if p < 3.0:
            raise RegimeError(
                "closed orbits through the ordinate axis are only guaranteed for p >= 3 "
                "when lambda > 0"
            )
    else:
        cap = _lneg_seed_cap(m)
        if seed_v0 > cap:
            raise PreconditionError(
                f"seed v0={seed_v0:g} is outside the certified bounded range (max {cap:g})"
            )
    opts = opts or IntegrationOptions()

    start = PhasePoint(0.0, seed_v0)
    stop = StopRule(EVENT_V_AXIS, predicate=lambda pt: pt.v < 0.0)
    half = integrate(start, m, opts.with_(stop_rules=(stop,)))
    if half.terminal != "event-stop":
        raise NumericalError(f"seed v0={seed_v0:g} did not return to the ordinate axis")
    s_half = _polished_event_s(start, m, half.stop_event.s, EVENT_V_AXIS, opts)
    period = 2.0 * s_half

    _, u, du = _refined_samples(start, m, period, n_samples, opts)
    closure = float(np.hypot(u[-1] - 0.0, du[-1] - seed_v0))
    if closure > 1e-7:
        raise NumericalError(f"orbit failed to close: one-period error {closure:.3g} > 1e-7")

    alpha = period / 2.0
    x = np.linspace(-alpha, alpha, n_samples)
    res = profile_residual(x, u, m)

    u_max = float(u.max())
    u_min = float(u.min())
    meta = {
        "seed": float(seed_v0),
        "closure_error": closure,
        "u_axis_crossings": [e.point.u for e in half.events if e.kind == EVENT_U_AXIS],
        "u_extreme_asymmetry": abs(u_max + u_min),
        "v_bottom": float(half.stop_event.point.v),
    }
    sol = StationarySolution(
        x, u, du, "periodic", _sign_of(u), alpha, res, m, period=period, meta=meta
    )
    _check_bc(sol)
    return sol


def _unstable_direction(m: ModelParams) -> tuple[np.ndarray, str]:
    """Departure direction at the positive equilibrium: the dominant unstable
    eigenvector for a node, the +u direction for a vortex (every direction
    leaves a repulsive spiral)."""
    r = m.root
    D = m.discriminant
    if D > 0.0:
        J = jacobian(PhasePoint(r, 0.0), m)
        tr, det = J[1, 1], -J[1, 0]
        mu = 0.5 * (tr + math.sqrt(tr * tr - 4.0 * det))
        d = np.array([1.0, mu])
        return d / np.linalg.norm(d), "node"
    return np.array([1.0, 0.0]), "vortex"


def find_halfline(
    m: ModelParams,
    kind: str,
    *,
    offset: float = 1e-8,
    min_departure: float = 0.25,
    opts: IntegrationOptions | None = None,
    n_samples: int = 2001,
) -> StationarySolution:
    """Profiles on half-lines and the whole line built from the orbit leaving
    the positive equilibrium (lambda**(1/(p-1)), 0).

    kinds:
      "halfline-neumann":  u on (-inf, 0], u'(-inf) = u'(0) = 0
      "halfline-mixed2":   u on (-inf, 0], u'(-inf) = u(0) = 0
      "fullline-neumann":  sign-changing w on R, w'(+-inf) = 0, by reflection
      "halfline-mixed1":   negative z on [0, inf), z(0) = z'(inf) = 0

    The orbit starts `offset` away from the equilibrium along the departure
    direction; the reported truncation length is the parameter distance from
    that start to the boundary event.  In vortex regimes the orbit leaves by
    spiralling, crossing v = 0 once per winding; the reported arc ends at the
    first crossing at least `min_departure` (relative) beyond the
    equilibrium, so the profile is resolved at plotting scale rather than
    stopping inside the first microscopic loop.
    """
    if kind not in ("halfline-neumann", "halfline-mixed2", "fullline-neumann", "halfline-mixed1"):
        raise PreconditionError(f"unknown half-line kind {kind!r}")
    if m.p <= 1.0:
        raise PreconditionError("find_halfline requires p > 1")
    if m.lam <= 0.0:
        raise PreconditionError("find_halfline requires lambda > 0")
    opts = opts or IntegrationOptions()
    r = m.root
    d, dkind = _unstable_direction(m)
    start = PhasePoint(r + offset * d[0], offset * d[1])

    if kind == "halfline-neumann":
        u_min = r * (1.0 + min_departure)
        stop = StopRule(EVENT_U_AXIS, predicate=lambda pt: pt.u > u_min)
    else:
        stop = StopRule(EVENT_V_AXIS, predicate=lambda pt: pt.v < 0.0)
    traj = integrate(start, m, opts.with_(stop_rules=(stop,), max_steps=200000))
    if traj.terminal != "event-stop":
        raise NumericalError(
            f"orbit leaving the equilibrium did not reach the requested event "
            f"(terminal {traj.terminal!r}); the construction fails numerically here"
        )
    s_end, u_arc, v_arc = _refined_samples(
        start, m, traj.stop_event.s, n_samples, opts, polish_kind=traj.stop_event.kind
    )
    base_meta = {
        "asymptote": r,
        "truncation_length": float(s_end),
        "offset": offset,
        "departure": dkind,
        "end_point": {"u": float(u_arc[-1]), "v": float(v_arc[-1])},
    }
    x = np.linspace(0.0, s_end, n_samples) - s_end  # boundary event at x = 0

    if kind in ("halfline-neumann", "halfline-mixed2"):
        res = profile_residual(x, u_arc, m)
        sol = StationarySolution(
            x, u_arc, v_arc, kind, POSITIVE, s_end / 2.0, res, m, meta=base_meta
        )
        end_val = sol.du[-1] if kind == "halfline-neumann" else sol.u[-1]
        if abs(end_val) > 1e-7:
            raise NumericalError(f"half-line boundary value {end_val:.3g} beyond tolerance")
        return sol

    # reflected constructions from the mixed2 orbit v(t), t <= 0
    u_left, v_left = u_arc, v_arc
    if kind == "fullline-neumann":
        # w(t) = v(t) for t <= 0, -v(-t) for t > 0
        x_full = np.concatenate([x, -x[-2::-1]])
        u_full = np.concatenate([u_left, -u_left[-2::-1]])
        du_full = np.concatenate([v_left, v_left[-2::-1]])
        res = profile_residual(x_full, u_full, m)
        meta = dict(base_meta, glue_jump=0.0)
        return StationarySolution(
            x_full, u_full, du_full, kind, SIGN_CHANGING, x_full[-1], res, m, meta=meta
        )

    # halfline-mixed1: z(t) = -v(-t), t >= 0
    x_right = -x[::-1]
    u_right = -u_left[::-1]
    du_right = v_left[::-1]
    res = profile_residual(x_right, u_right, m)
    meta = dict(base_meta, asymptote=-r)
    return StationarySolution(
        x_right, u_right, du_right, kind, NEGATIVE, s_end / 2.0, res, m, meta=meta
    )


def halfline_offset_sensitivity(m: ModelParams, kind: str, offset: float = 1e-8) -> float:
    """Sup-difference of the half-line profile against the one rebuilt with a
    halved manifold offset, after aligning both at their boundary event.

    Along a one-dimensional unstable manifold (node regime) halving the
    offset only shifts the parameterization, so this must be small; in vortex
    regimes every offset yields a valid but phase-shifted profile and the
    difference measures that spread instead.
    """
    a = find_halfline(m, kind, offset=offset)
    b = find_halfline(m, kind, offset=offset / 2.0)
    left = max(a.x[0], b.x[0])
    xs = np.linspace(left, 0.0, 1001)
    ua = np.interp(xs, a.x, a.u)
    ub = np.interp(xs, b.x, b.u)
    return float(np.abs(ua - ub).max())


def find_blowup_profile(
    m: ModelParams,
    start: str,
    *,
    v0: float | None = None,
    beta: float = 2.0,
    opts: IntegrationOptions | None = None,
    n_samples: int = 2001,
    residual_window: float = 50.0,
) -> StationarySolution:
    """An unbounded stationary profile for p in (1, 3), integrated to the
    escape cap.

    The residual is certified on the window |u| <= residual_window: these
    profiles grow like 1/(x_esc - x), so a uniform sampling cannot support
    the finite-difference oracle near the escape end (its truncation error
    grows like h^4 u^7), while |u| <= 50 is safely resolved at the default
    sampling.  The full escape range stays in the samples and metadata.

    start = "zero-dirichlet-end":   u(0) = 0, seeded above the v-axis escape
    threshold (default 1.05x);  start = "zero-derivative-end": u'(0) = 0 from
    the certified u-axis start, which requires the lambda-threshold
    certificate for the given beta.

    The expected finiteness of the interval length is "finite" for
    p in (2, 3) and "possibly-infinite" for p in (1, 2].
    """
    if start not in ("zero-dirichlet-end", "zero-derivative-end"):
        raise PreconditionError(f"unknown start kind {start!r}")
    if not (1.0 < m.p < 3.0):
        raise PreconditionError("blow-up profiles require p in (1, 3)")
    opts = opts or IntegrationOptions()

    if start == "zero-dirichlet-end":
        if v0 is None:
            cert = certify_unbounded_axis_start(1.0, m)  # threshold probe
            v0 = 1.05 * cert.threshold
        cert = certify_unbounded_axis_start(v0, m)
        if cert.verdict != UNBOUNDED:
            raise PreconditionError(
                f"seed v0={v0:g} is not certified unbounded (threshold {cert.threshold:g})"
            )
    else:
        cert = certify_unbounded_u_axis_start(beta, m)
        if cert.verdict != UNBOUNDED:
            raise PreconditionError(
                f"lambda={m.lam:g} does not satisfy the u-axis escape criterion for "
                f"beta={beta:g} (threshold {cert.threshold:g})"
            )

    traj = integrate(cert.start, m, opts.with_(barrier=cert.barrier.curve()))
    if traj.terminal != "escape":
        raise NumericalError(f"certified orbit did not escape (terminal {traj.terminal!r})")
    s_end, u_arc, v_arc = _refined_samples(cert.start, m, float(traj.s[-1]), n_samples, opts)
    x = np.linspace(0.0, s_end, n_samples)
    res = profile_residual(x, u_arc, m, window=residual_window)
    alpha_estimate = "finite" if 2.0 < m.p < 3.0 else "possibly-infinite"
    meta = {
        "start": start,
        "certificate": {"lemma": cert.lemma, "threshold": cert.threshold},
        "escape_x": float(s_end),
        "alpha_estimate": alpha_estimate,
        "residual_window": residual_window,
    }
    sign = POSITIVE if u_arc.min() > -1e-7 else SIGN_CHANGING
    return StationarySolution(
        x, u_arc, v_arc, "blowup-profile", sign, s_end / 2.0, res, m, meta=meta
    )


def neumann_positive_scan(
    m: ModelParams,
    u_max: float = 4.0,
    n_seeds: int = 64,
    opts: IntegrationOptions | None = None,
) -> dict:
    """Exhaustive axis-seed scan documenting Neumann nonexistence for
    lambda <= 0: every orbit from (u0, 0), u0 in (0, u_max], must cross into
    u < 0 before v returns to zero.

    Returns {"positive_returns": [...], "entered_negative": n, "seeds": n}.
    """
    if m.lam > 0.0:
        raise PreconditionError("the nonexistence scan applies to lambda <= 0")
    opts = opts or IntegrationOptions()
    rules = (
        StopRule(EVENT_U_AXIS, predicate=lambda pt: pt.u > 1e-10),
        StopRule(EVENT_V_AXIS),
    )
    seeds = np.linspace(u_max / n_seeds, u_max, n_seeds)
    positive_returns = []
    entered_negative = 0
    for u0 in seeds:
        traj = integrate(PhasePoint(float(u0), 0.0), m, opts.with_(stop_rules=rules))
        if traj.terminal == "event-stop" and traj.stop_event.kind == EVENT_U_AXIS:
            positive_returns.append(float(u0))
        elif traj.terminal == "event-stop" and traj.stop_event.kind == EVENT_V_AXIS:
            entered_negative += 1
        else:
            positive_returns.append(float(u0))  # anything else counts against the claim
    return {
        "seeds": int(n_seeds),
        "entered_negative": int(entered_negative),
        "positive_returns": positive_returns,
    }


def write_profile_csv(sol: StationarySolution, path) -> None:
    """Columns x,u,du."""
    with open(path, "w") as fh:
        fh.write("x,u,du\n")
        for x, u, du in zip(sol.x, sol.u, sol.du):
            fh.write(f"{x:.17g},{u:.17g},{du:.17g}\n")


def solution_meta(sol: StationarySolution) -> dict:
    doc = {
        "bc": sol.bc,
        "alpha": sol.half_width,
        "sign": sol.sign,
        "residual": sol.residual,
        "p": sol.m.p,
        "lambda": sol.m.lam,
    }
    if sol.period is not None:
        doc["period"] = sol.period
    doc.update({k: v for k, v in sol.meta.items() if k != "events"})
    return doc


def write_profile_meta_json(sol: StationarySolution, path) -> None:
    with open(path, "w") as fh:
        json.dump(solution_meta(sol), fh, indent=2, sort_keys=True, default=float)
        fh.write("\n")
