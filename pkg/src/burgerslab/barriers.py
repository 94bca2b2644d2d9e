"""Closed-form boundedness and unboundedness certificates for orbits of the
stationary system, plus numerical confirmation by direct integration.

Each certificate records the curve the orbit provably cannot cross and the
evaluated threshold of the inequality that was checked.  "undetermined" is a
first-class verdict: parameter regions not covered by any of the four
arguments are reported honestly instead of being guessed.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from .errors import PreconditionError
from .flow import (
    EVENT_BARRIER_EXIT,
    EVENT_NULLCLINE,
    EVENT_U_AXIS,
    EVENT_V_AXIS,
    IntegrationOptions,
    StopRule,
    Trajectory,
    integrate,
)
from .model import ModelParams, PhasePoint

__all__ = [
    "BOUNDED",
    "UNBOUNDED",
    "UNDETERMINED",
    "BarrierCurve",
    "Certificate",
    "ConfirmationReport",
    "certify_bounded_pge3",
    "certify_bounded_lneg",
    "certify_unbounded_axis_start",
    "certify_unbounded_u_axis_start",
    "confirm",
    "certificate_json",
]

BOUNDED = "bounded"
UNBOUNDED = "unbounded"
UNDETERMINED = "undetermined"

LEMMA_BOUNDED_PGE3 = "bounded-p-ge-3"
LEMMA_BOUNDED_PGE3_UNIQ = "bounded-p-ge-3+uniqueness"
LEMMA_BOUNDED_LNEG = "bounded-lambda-le-0"
LEMMA_UNBOUNDED_V_AXIS = "unbounded-from-v-axis"
LEMMA_UNBOUNDED_U_AXIS = "unbounded-from-u-axis"


@dataclass(frozen=True)
class BarrierCurve:
    """A v(u) curve with named coefficients.

    kinds:
      "parabola":     v = a*u^2 + c
      "power-offset": v = c*|u|^q + b
      "power-shift":  v = c*|u|^q - lambda
      "witness-orbit": boundedness inherited from an enclosing bounded orbit
    """

    kind: str
    coefficients: dict[str, float] = field(default_factory=dict)

    def curve(self):
        k, c = self.kind, self.coefficients
        if k == "parabola":
            a, b = c["a"], c["c"]
            return lambda u: a * u * u + b
        if k == "power-offset":
            cc, q, b = c["c"], c["q"], c["b"]
            return lambda u: cc * abs(u) ** q + b
        if k == "power-shift":
            cc, q, lam = c["c"], c["q"], c["lam"]
            return lambda u: cc * abs(u) ** q - lam
        raise PreconditionError(f"barrier kind {k!r} has no curve")


@dataclass(frozen=True)
class Certificate:
    verdict: str
    lemma: str
    threshold: float
    barrier: BarrierCurve | None
    start: PhasePoint
    m: ModelParams
    bounded_by_uniqueness: bool = False
    note: str | None = None


@dataclass
class ConfirmationReport:
    certificate: Certificate
    consistent: bool
    terminal: str
    detail: str
    trajectory: Trajectory


def certify_bounded_pge3(v0: float, m: ModelParams, witness_v0: float | None = None) -> Certificate:
    """Boundedness of the orbit from (0, v0) for lambda > 0, p >= 3.

    For p > 3 the parabola v = (1 + lambda/v0)/2 * u^2 + v0 always meets the
    nullcline, trapping the orbit for every v0 > 0.  For p = 3 the argument
    needs the parabola coefficient below 1, i.e. v0 > lambda; smaller seeds
    are undetermined by the closed form, but become bounded when nested
    inside a certified witness orbit (pass `witness_v0 > lambda`).
    """
    if m.lam <= 0.0:
        raise PreconditionError("certify_bounded_pge3 requires lambda > 0")
    if m.p < 3.0:
        raise PreconditionError("certify_bounded_pge3 requires p >= 3")
    if v0 <= 0.0:
        raise PreconditionError("certify_bounded_pge3 requires v0 > 0")
    start = PhasePoint(0.0, v0)
    a = 0.5 * (1.0 + m.lam / v0)
    parabola = BarrierCurve("parabola", {"a": a, "c": v0})
    if m.p > 3.0:
        return Certificate(BOUNDED, LEMMA_BOUNDED_PGE3, 0.0, parabola, start, m)
    # p == 3
    if v0 > m.lam:
        return Certificate(BOUNDED, LEMMA_BOUNDED_PGE3, m.lam, parabola, start, m)
    if witness_v0 is not None:
        if witness_v0 <= m.lam:
            raise PreconditionError("witness seed must itself satisfy witness_v0 > lambda")
        if witness_v0 < v0:
            raise PreconditionError("witness orbit must enclose the seed: witness_v0 >= v0")
        wit = BarrierCurve("witness-orbit", {"witness_v0": witness_v0})
        return Certificate(
            BOUNDED,
            LEMMA_BOUNDED_PGE3_UNIQ,
            m.lam,
            wit,
            start,
            m,
            bounded_by_uniqueness=True,
            note="bounded because orbits cannot cross the enclosing bounded orbit",
        )
    return Certificate(
        UNDETERMINED,
        LEMMA_BOUNDED_PGE3,
        m.lam,
        None,
        start,
        m,
        note="p = 3 with v0 <= lambda: parabola coefficient >= 1, no closed-form trap",
    )


def bounded_lneg_threshold(m: ModelParams) -> float:
    """Largest certified seed -lambda + (p-1)^((p-1)/(3-p)) - (p-1)^(2/(3-p))/2 for p < 3."""
    a = m.p - 1.0
    b = 3.0 - m.p
    return -m.lam + a ** (a / b) - 0.5 * a ** (2.0 / b)


def certify_bounded_lneg(v0: float, m: ModelParams) -> Certificate:
    """Boundedness of the orbit from (0, v0) for lambda <= 0.

    Requires v0 > -lambda (otherwise the orbit never enters the region above
    the nullcline that the argument is about).  For p >= 3 every such seed is
    bounded; for p < 3 the trap v = u^2/2 + v0 works up to the closed-form
    seed threshold.
    """
    if m.lam > 0.0:
        raise PreconditionError("certify_bounded_lneg requires lambda <= 0")
    if m.p <= 1.0:
        raise PreconditionError("certify_bounded_lneg requires p > 1")
    if v0 <= -m.lam:
        raise PreconditionError(
            f"v0 must exceed -lambda = {-m.lam:g}: smaller seeds start below the "
            "nullcline and the trapping argument does not apply"
        )
    start = PhasePoint(0.0, v0)
    parabola = BarrierCurve("parabola", {"a": 0.5, "c": v0})
    if m.p >= 3.0:
        return Certificate(BOUNDED, LEMMA_BOUNDED_LNEG, -m.lam, parabola, start, m)
    vmax = bounded_lneg_threshold(m)
    if v0 <= vmax:
        return Certificate(BOUNDED, LEMMA_BOUNDED_LNEG, vmax, parabola, start, m)
    return Certificate(
        UNDETERMINED,
        LEMMA_BOUNDED_LNEG,
        vmax,
        None,
        start,
        m,
        note="seed above the closed-form threshold; the parabola may miss the nullcline",
    )


def unbounded_axis_threshold(m: ModelParams) -> float:
    """2 max(-lambda, 0) + 2 * 8^((p-1)/(3-p)), the seed threshold for escape."""
    return 2.0 * max(-m.lam, 0.0) + 2.0 * 8.0 ** ((m.p - 1.0) / (3.0 - m.p))


def certify_unbounded_axis_start(v0: float, m: ModelParams) -> Certificate:
    """Unboundedness of the orbit from (0, v0) for 1 < p < 3.

    Above the threshold the orbit stays above v = 2 u^(p-1) + 2 max(-lambda, 0)
    forever, and dv/du >= u/2 drives it to infinity.
    """
    if not (1.0 < m.p < 3.0):
        raise PreconditionError("certify_unbounded_axis_start requires p in (1, 3)")
    if v0 <= 0.0:
        raise PreconditionError("certify_unbounded_axis_start requires v0 > 0")
    start = PhasePoint(0.0, v0)
    thr = unbounded_axis_threshold(m)
    if v0 > thr:
        bar = BarrierCurve(
            "power-offset", {"c": 2.0, "q": m.p - 1.0, "b": 2.0 * max(-m.lam, 0.0)}
        )
        return Certificate(UNBOUNDED, LEMMA_UNBOUNDED_V_AXIS, thr, bar, start, m)
    return Certificate(
        UNDETERMINED,
        LEMMA_UNBOUNDED_V_AXIS,
        thr,
        None,
        start,
        m,
        note="seed at or below the escape threshold",
    )


def unbounded_u_axis_data(beta: float, m: ModelParams) -> tuple[float, float]:
    """(u0, lambda-threshold) of the u-axis escape criterion for a given beta > 1."""
    base = 2.0 * beta * beta / (beta - 1.0)
    u0 = base ** (1.0 / (3.0 - m.p))
    thr = max((beta - 1.0) / (2.0 * beta) * u0, beta * base ** ((m.p - 1.0) / (3.0 - m.p)))
    return u0, thr


def certify_unbounded_u_axis_start(beta: float, m: ModelParams) -> Certificate:
    """Unboundedness of the orbit from (u0, 0), u0 = (2 b^2/(b-1))^(1/(3-p)).

    When lambda exceeds both branches of the threshold the orbit stays above
    v = beta u^(p-1) - lambda and escapes.
    """
    if not (1.0 < m.p < 3.0):
        raise PreconditionError("certify_unbounded_u_axis_start requires p in (1, 3)")
    if beta <= 1.0:
        raise PreconditionError("certify_unbounded_u_axis_start requires beta > 1")
    u0, thr = unbounded_u_axis_data(beta, m)
    start = PhasePoint(u0, 0.0)
    if m.lam > thr:
        bar = BarrierCurve("power-shift", {"c": beta, "q": m.p - 1.0, "lam": m.lam})
        return Certificate(UNBOUNDED, LEMMA_UNBOUNDED_U_AXIS, thr, bar, start, m)
    return Certificate(
        UNDETERMINED,
        LEMMA_UNBOUNDED_U_AXIS,
        thr,
        None,
        start,
        m,
        note=f"lambda <= threshold {thr:g} for beta = {beta:g}",
    )


def confirm(c: Certificate, m: ModelParams, opts: IntegrationOptions | None = None) -> ConfirmationReport:
    """Integrate the certified orbit and check it behaves as certified.

    bounded   -> the nullcline crossing happens before any escape;
    unbounded -> the orbit reaches the escape cap while staying above its
                 recorded barrier curve.

    A contradiction is returned as an inconsistent report (and treated as a
    test failure upstream), never silently patched over.
    """
    if c.verdict == UNDETERMINED:
        raise PreconditionError("cannot confirm an undetermined certificate")
    opts = opts or IntegrationOptions()

    if c.verdict == BOUNDED:
        run_opts = opts.with_(
            stop_rules=(StopRule(EVENT_NULLCLINE),),
            record_kinds=(EVENT_NULLCLINE, EVENT_U_AXIS, EVENT_V_AXIS),
        )
        traj = integrate(c.start, m, run_opts)
        ok = traj.terminal == "event-stop" and traj.stop_event.kind == EVENT_NULLCLINE
        detail = (
            f"nullcline crossing at s = {traj.stop_event.s:.6g}"
            if ok
            else f"no nullcline crossing before terminal {traj.terminal!r}"
        )
        return ConfirmationReport(c, ok, traj.terminal, detail, traj)

    # unbounded: run to the escape cap watching the recorded barrier
    bar = c.barrier.curve()
    run_opts = opts.with_(
        barrier=bar,
        record_kinds=(EVENT_BARRIER_EXIT,),
        stop_rules=(StopRule(EVENT_BARRIER_EXIT),),
    )
    traj = integrate(c.start, m, run_opts)
    exited = any(e.kind == EVENT_BARRIER_EXIT for e in traj.events)
    escaped = traj.terminal == "escape"
    margin = opts.barrier_margin
    above = True
    for u, v in zip(traj.u, traj.v):
        b = bar(u)
        if v < b - margin * (1.0 + abs(b)):
            above = False
            break
    ok = escaped and not exited and above
    detail = (
        f"escape at s = {traj.s[-1]:.6g} staying above the barrier"
        if ok
        else f"terminal {traj.terminal!r}, barrier exit = {exited}, stayed above = {above}"
    )
    return ConfirmationReport(c, ok, traj.terminal, detail, traj)


def certificate_json(c: Certificate) -> str:
    """{verdict, lemma, threshold, barrier:{kind, coefficients}} wire form."""
    doc = {
        "verdict": c.verdict,
        "lemma": c.lemma,
        "threshold": c.threshold,
        "barrier": None
        if c.barrier is None
        else {"kind": c.barrier.kind, "coefficients": c.barrier.coefficients},
        "start": {"u": c.start.u, "v": c.start.v},
        "params": {"p": c.m.p, "lambda": c.m.lam},
        "bounded_by_uniqueness": c.bounded_by_uniqueness,
        "note": c.note,
    }
    return json.dumps(doc, indent=2, sort_keys=True)
