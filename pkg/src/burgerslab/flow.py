"""Orbit integration for the stationary system: adaptive RK5(4) stepping,
event detection refined by bisection on the dense output, and the mirror
symmetry (u, v) -> (-u, v) with parameter reversal.

Terminal reasons distinguish an orbit stopped by a requested event, one
escaping past the cap |u| + |v|, one that exhausted its step budget (or
reached the requested parameter span), and one parked at an equilibrium.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import RK45, OdeSolution

from .errors import NumericalError
from .model import ModelParams, PhasePoint, field_callable

__all__ = [
    "Event",
    "StopRule",
    "IntegrationOptions",
    "Trajectory",
    "PortraitResult",
    "integrate",
    "mirror",
    "portrait",
    "write_trajectory_csv",
    "write_events_csv",
    "EVENT_U_AXIS",
    "EVENT_V_AXIS",
    "EVENT_NULLCLINE",
    "EVENT_BARRIER_EXIT",
    "TERMINAL_EVENT_STOP",
    "TERMINAL_ESCAPE",
    "TERMINAL_MAX_STEPS",
    "TERMINAL_EQUILIBRIUM",
]

EVENT_U_AXIS = "u-axis"  # v = 0
EVENT_V_AXIS = "v-axis"  # u = 0
EVENT_NULLCLINE = "nullcline"  # v = |u|^(p-1) - lambda
EVENT_BARRIER_EXIT = "barrier-exit"

#: deterministic ordering of simultaneous events
_EVENT_RANK = {
    EVENT_U_AXIS: 0,
    EVENT_V_AXIS: 1,
    EVENT_NULLCLINE: 2,
    EVENT_BARRIER_EXIT: 3,
}

TERMINAL_EVENT_STOP = "event-stop"
TERMINAL_ESCAPE = "escape"
TERMINAL_MAX_STEPS = "max-steps"
TERMINAL_EQUILIBRIUM = "equilibrium-approach"


@dataclass(frozen=True)
class Event:
    """A refined crossing of one of the defining curves."""

    kind: str
    s: float
    point: PhasePoint
    residual: float


@dataclass(frozen=True)
class StopRule:
    """Terminate the integration at the `count`-th event of `kind` whose
    point satisfies `predicate` (if given)."""

    kind: str
    predicate: Callable[[PhasePoint], bool] | None = None
    count: int = 1


@dataclass
class IntegrationOptions:
    rtol: float = 1e-9
    atol: float = 1e-11
    escape_cap: float = 1e6  # terminal when |u| + |v| exceeds this
    max_steps: int = 20000
    s_max: float = np.inf
    max_step: float = 0.25
    direction: str = "forward"  # "forward" | "reverse"
    stop_rules: tuple[StopRule, ...] = ()
    barrier: Callable[[float], float] | None = None  # v-threshold as a function of u
    barrier_margin: float = 1e-8  # relative margin avoiding chatter on the curve
    record_kinds: tuple[str, ...] = (EVENT_U_AXIS, EVENT_V_AXIS, EVENT_NULLCLINE)
    event_residual_tol: float = 1e-10
    equilibrium_field_norm: float = 1e-12
    equilibrium_steps: int = 50
    interior_scan: int = 4  # extra sign-change probes inside each step

    def with_(self, **kw) -> "IntegrationOptions":
        return replace(self, **kw)


@dataclass
class Trajectory:
    """A sampled orbit: parameter values, states, refined events and the
    terminal reason.  `dense` evaluates the dense output inside the covered
    parameter range."""

    s: np.ndarray
    u: np.ndarray
    v: np.ndarray
    events: list[Event]
    terminal: str
    m: ModelParams
    dense: Callable[[float], np.ndarray] | None = None
    stop_event: Event | None = None
    opts: IntegrationOptions | None = field(default=None, repr=False)

    def __len__(self) -> int:
        return len(self.s)

    def point(self, i: int) -> PhasePoint:
        return PhasePoint(float(self.u[i]), float(self.v[i]))

    def at(self, s: float) -> np.ndarray:
        if self.dense is None:
            raise NumericalError("trajectory has no dense output")
        return self.dense(s)

    def events_of(self, kind: str) -> list[Event]:
        return [e for e in self.events if e.kind == kind]


@dataclass
class PortraitResult:
    """Batch integration output; `errors` maps seed index -> message for
    seeds whose integration failed."""

    trajectories: list[Trajectory | None]
    errors: dict[int, str]


def _event_functions(m: ModelParams, opts: IntegrationOptions):
    """(kind, g) pairs; each g maps a state array to a signed residual."""
    q = m.p - 1.0
    funcs = [
        (EVENT_U_AXIS, lambda y: y[1]),
        (EVENT_V_AXIS, lambda y: y[0]),
        (EVENT_NULLCLINE, lambda y: y[1] - (abs(y[0]) ** q - m.lam)),
    ]
    if opts.barrier is not None:
        bar, eps = opts.barrier, opts.barrier_margin

        def g_barrier(y):
            b = bar(y[0])
            return y[1] - b + eps * (1.0 + abs(b))

        funcs.append((EVENT_BARRIER_EXIT, g_barrier))
    wanted = set(opts.record_kinds) | {r.kind for r in opts.stop_rules}
    return [(k, g) for k, g in funcs if k in wanted]


def _bisect_event(g, dense, a: float, b: float, tol: float) -> tuple[float, float]:
    """Shrink [a, b] by bisection on the dense output until |g| <= tol or the
    interval reaches machine width; assumes a sign change."""
    ga = g(dense(a))
    mid, gm = a, ga
    for _ in range(200):
        mid = 0.5 * (a + b)
        gm = g(dense(mid))
        if abs(gm) <= tol or (b - a) <= 8.0 * np.finfo(float).eps * max(1.0, abs(mid)):
            break
        if (ga < 0.0) == (gm < 0.0):
            a, ga = mid, gm
        else:
            b = mid
    return mid, gm


def integrate(start: PhasePoint, m: ModelParams, opts: IntegrationOptions | None = None) -> Trajectory:
    """Integrate the stationary system from `start`.

    Parameters
    ----------
    start : PhasePoint
        Initial state; an exact equilibrium returns a single-sample
        trajectory immediately.
    m : ModelParams
    opts : IntegrationOptions
        Tolerances, escape cap, stop rules, optional barrier curve and the
        integration direction ("reverse" integrates the negated field,
        tracing the same support backwards).

    Raises
    ------
    NumericalError
        On step-size underflow away from an equilibrium.
    """
    opts = opts or IntegrationOptions()
    f = field_callable(m, reverse=(opts.direction == "reverse"))
    y0 = start.as_array()

    if float(np.linalg.norm(f(0.0, y0))) < opts.equilibrium_field_norm:
        return Trajectory(
            s=np.array([0.0]),
            u=np.array([y0[0]]),
            v=np.array([y0[1]]),
            events=[],
            terminal=TERMINAL_EQUILIBRIUM,
            m=m,
            dense=None,
            opts=opts,
        )

    solver = RK45(
        f, 0.0, y0, t_bound=opts.s_max, rtol=opts.rtol, atol=opts.atol, max_step=opts.max_step
    )
    efuncs = _event_functions(m, opts)
    record = set(opts.record_kinds)
    rule_hits = [0] * len(opts.stop_rules)

    ss = [0.0]
    ys = [y0.copy()]
    step_ts = [0.0]
    interps = []
    events: list[Event] = []
    stop_event: Event | None = None
    terminal: str | None = None
    eq_run = 0
    n_steps = 0

    while terminal is None:
        if solver.status == "finished":
            terminal = TERMINAL_MAX_STEPS  # requested span exhausted
            break
        if n_steps >= opts.max_steps:
            terminal = TERMINAL_MAX_STEPS
            break
        solver.step()
        if solver.status == "failed":
            raise NumericalError(
                f"step-size underflow at s={solver.t:.6g}, state={tuple(solver.y)}: "
                "integration cannot continue at the requested tolerance"
            )
        n_steps += 1
        dense = solver.dense_output()
        interps.append(dense)
        step_ts.append(solver.t)
        s_a, s_b = solver.t_old, solver.t

        scan = np.linspace(s_a, s_b, opts.interior_scan + 2)
        step_events: list[Event] = []
        for kind, g in efuncs:
            gvals = [g(dense(sx)) for sx in scan]
            for j in range(len(scan) - 1):
                if gvals[j] == 0.0 and scan[j] == 0.0:
                    continue  # the start point sits exactly on its own curve
                if gvals[j] * gvals[j + 1] < 0.0:
                    s_e, res = _bisect_event(
                        g, dense, scan[j], scan[j + 1], opts.event_residual_tol
                    )
                    ye = dense(s_e)
                    step_events.append(
                        Event(kind, float(s_e), PhasePoint(float(ye[0]), float(ye[1])), float(abs(res)))
                    )
        step_events.sort(key=lambda e: (e.s, _EVENT_RANK[e.kind]))

        for ev in step_events:
            if ev.kind in record:
                events.append(ev)
            for i, rule in enumerate(opts.stop_rules):
                if rule.kind != ev.kind:
                    continue
                if rule.predicate is not None and not rule.predicate(ev.point):
                    continue
                rule_hits[i] += 1
                if rule_hits[i] >= rule.count:
                    stop_event = ev
                    terminal = TERMINAL_EVENT_STOP
                    break
            if terminal is not None:
                break

        if terminal == TERMINAL_EVENT_STOP:
            ss.append(stop_event.s)
            ys.append(stop_event.point.as_array())
            break

        ss.append(solver.t)
        ys.append(solver.y.copy())

        if abs(solver.y[0]) + abs(solver.y[1]) > opts.escape_cap:
            terminal = TERMINAL_ESCAPE
            break

        if float(np.linalg.norm(f(solver.t, solver.y))) < opts.equilibrium_field_norm:
            eq_run += 1
            if eq_run >= opts.equilibrium_steps:
                terminal = TERMINAL_EQUILIBRIUM
                break
        else:
            eq_run = 0

    dense_sol = OdeSolution(np.array(step_ts), interps) if interps else None
    ya = np.array(ys)
    return Trajectory(
        s=np.array(ss),
        u=ya[:, 0],
        v=ya[:, 1],
        events=events,
        terminal=terminal,
        m=m,
        dense=dense_sol,
        stop_event=stop_event,
        opts=opts,
    )


def mirror(t: Trajectory) -> Trajectory:
    """Mirror image (u, v) -> (-u, v) with parameter reversal.

    The image of a trajectory is again a trajectory of the same system, so
    the mirrored samples satisfy the vector field; applying mirror twice
    reproduces the input sample-wise.  The terminal tag refers to the source
    trajectory.
    """
    span = t.s[0] + t.s[-1]
    s_new = span - t.s[::-1]
    u_new = -t.u[::-1]
    v_new = t.v[::-1]

    events = [
        Event(e.kind, float(span - e.s), PhasePoint(-e.point.u, e.point.v), e.residual)
        for e in reversed(t.events)
    ]

    dense_new = None
    if t.dense is not None:
        src = t.dense

        def dense_new(s, _span=span, _src=src):
            y = _src(_span - s)
            return np.array([-y[0], y[1]])

    stop_event = None
    if t.stop_event is not None:
        e = t.stop_event
        stop_event = Event(e.kind, float(span - e.s), PhasePoint(-e.point.u, e.point.v), e.residual)

    return Trajectory(
        s=s_new,
        u=u_new,
        v=v_new,
        events=events,
        terminal=t.terminal,
        m=t.m,
        dense=dense_new,
        stop_event=stop_event,
        opts=t.opts,
    )


def portrait(
    m: ModelParams,
    seeds: Sequence[PhasePoint],
    opts: IntegrationOptions | None = None,
    workers: int = 1,
) -> PortraitResult:
    """Integrate a batch of seeds; output order follows seed order and is
    independent of the worker count.  Failures are recorded per seed and do
    not abort the batch."""
    opts = opts or IntegrationOptions()

    def run(seed: PhasePoint):
        try:
            return integrate(seed, m, opts), None
        except NumericalError as exc:
            return None, str(exc)

    if workers <= 1 or len(seeds) <= 1:
        results = [run(seed) for seed in seeds]
    else:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(run, seeds))

    trajectories = [r[0] for r in results]
    errors = {i: msg for i, (_, msg) in enumerate(results) if msg is not None}
    return PortraitResult(trajectories, errors)


def write_trajectory_csv(t: Trajectory, path) -> None:
    """Columns s,u,v."""
    with open(path, "w") as fh:
        fh.write("s,u,v\n")
        for s, u, v in zip(t.s, t.u, t.v):
            fh.write(f"{s:.17g},{u:.17g},{v:.17g}\n")


def write_events_csv(t: Trajectory, path) -> None:
    """Columns kind,s,u,v."""
    with open(path, "w") as fh:
        fh.write("kind,s,u,v\n")
        for e in t.events:
            fh.write(f"{e.kind},{e.s:.17g},{e.point.u:.17g},{e.point.v:.17g}\n")
