"""Method-of-lines time integration of

    u_t = u_xx - u u_x + u|u|^(p-1) - lambda u

on an interval, under Dirichlet(0), Neumann, Robin, nonlinear-flux and
dynamical boundary conditions.

Space: second order.  Diffusion uses the central three-point stencil;
the convection term is differenced in conservative form as d/dx (u^2/2)
with a second-order one-sided stencil biased to the upwind side (the sign
of u), falling back to the central difference where the one-sided stencil
does not fit.  Flux-type boundary conditions enter through ghost nodes;
a dynamical end node carries its own time derivative, obtained by combining
sigma u_t = -d_nu u with the interior operator at that node (sigma = 0
reproduces the Neumann node exactly).

Time: explicit two-stage Runge-Kutta with the step recomputed every step,
    dt = min(0.4 h^2, 0.4 h / max|u|),
which keeps blow-up dynamics unfiltered.  The reaction term is evaluated as
u|u|^(p-1), identical to u^p on the nonnegative data the comparison results
are about and finite on the order-h^2 undershoots an explicit scheme allows.

The outward normal derivative on [x_l, x_r] is -u_x at the left end and
+u_x at the right end.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ContractError, DomainError, NumericalError, PreconditionError
from .model import ModelParams

__all__ = [
    "Grid",
    "Field",
    "BoundaryCondition",
    "BoundarySpec",
    "EvolveOptions",
    "EvolutionResult",
    "OrderingReport",
    "assemble_rhs",
    "evolve",
    "compare_fields",
    "synthetic_result",
    "write_snapshots_csv",
    "run_json",
    "OUTCOME_FINAL",
    "OUTCOME_BLOWUP",
    "OUTCOME_STEADY",
]

OUTCOME_FINAL = "reached-final-time"
OUTCOME_BLOWUP = "blowup-detected"
OUTCOME_STEADY = "steady-state"

BC_DIRICHLET = "dirichlet"
BC_NEUMANN = "neumann"
BC_ROBIN = "robin"
BC_DYNAMICAL = "dynamical"
BC_FLUX = "flux"


@dataclass(frozen=True)
class Grid:
    """Uniform nodes on [x_left, x_right]; at least 8 interior nodes."""

    x_left: float
    x_right: float
    n: int

    def __post_init__(self):
        if self.n < 10:
            raise PreconditionError("grid needs at least 8 interior nodes (n >= 10)")
        if not self.x_right > self.x_left:
            raise PreconditionError("x_right must exceed x_left")

    @property
    def nodes(self) -> np.ndarray:
        return np.linspace(self.x_left, self.x_right, self.n)

    @property
    def h(self) -> float:
        return (self.x_right - self.x_left) / (self.n - 1)


@dataclass
class Field:
    """Nodal values of u at one time."""

    grid: Grid
    values: np.ndarray
    time: float = 0.0
    blown_up: bool = False

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.grid.n,):
            raise ContractError(
                f"field has {self.values.shape} values for an n={self.grid.n} grid"
            )
        if not self.blown_up and not np.isfinite(self.values).all():
            raise DomainError("non-finite field values")

    def copy(self) -> "Field":
        return Field(self.grid, self.values.copy(), self.time, self.blown_up)


@dataclass(frozen=True)
class BoundaryCondition:
    kind: str
    a: float = 0.0  # Robin coefficient, >= 0
    sigma: float = 0.0  # dynamical coefficient, >= 0
    c2: float = 0.0  # d_nu u = c2 u^2 + c1 u
    c1: float = 0.0

    def __post_init__(self):
        if self.kind not in (BC_DIRICHLET, BC_NEUMANN, BC_ROBIN, BC_DYNAMICAL, BC_FLUX):
            raise PreconditionError(f"unknown boundary kind {self.kind!r}")
        if self.kind == BC_ROBIN and self.a < 0.0:
            raise PreconditionError("Robin coefficient a must be >= 0")
        if self.kind == BC_DYNAMICAL and self.sigma < 0.0:
            raise PreconditionError("dynamical coefficient sigma must be >= 0")

    @staticmethod
    def dirichlet() -> "BoundaryCondition":
        return BoundaryCondition(BC_DIRICHLET)

    @staticmethod
    def neumann() -> "BoundaryCondition":
        return BoundaryCondition(BC_NEUMANN)

    @staticmethod
    def robin(a: float) -> "BoundaryCondition":
        return BoundaryCondition(BC_ROBIN, a=a)

    @staticmethod
    def dynamical(sigma: float) -> "BoundaryCondition":
        return BoundaryCondition(BC_DYNAMICAL, sigma=sigma)

    @staticmethod
    def nonlinear_flux(c2: float, c1: float) -> "BoundaryCondition":
        return BoundaryCondition(BC_FLUX, c2=c2, c1=c1)

    def describe(self) -> dict:
        d = {"kind": self.kind}
        if self.kind == BC_ROBIN:
            d["a"] = self.a
        elif self.kind == BC_DYNAMICAL:
            d["sigma"] = self.sigma
        elif self.kind == BC_FLUX:
            d["c2"], d["c1"] = self.c2, self.c1
        return d


@dataclass(frozen=True)
class BoundarySpec:
    left: BoundaryCondition
    right: BoundaryCondition

    @staticmethod
    def both(bc: BoundaryCondition) -> "BoundarySpec":
        return BoundarySpec(bc, bc)

    def describe(self) -> dict:
        return {"left": self.left.describe(), "right": self.right.describe()}


@dataclass
class EvolveOptions:
    t_final: float = 1.0
    n_snapshots: int = 101
    blowup_cap: float = 1e8
    steady_tol: float = 1e-10
    steady_steps: int = 100
    cfl: float = 0.4
    fixed_dt: float | None = None
    source: object = None  # callable (x_nodes, t) -> array, added to the right-hand side
    refine_blowup: bool = True
    max_steps: int = 2_000_000

    def with_(self, **kw) -> "EvolveOptions":
        return replace(self, **kw)


@dataclass
class EvolutionResult:
    outcome: str
    snapshots: list[Field]
    sup_history: np.ndarray  # rows (t, sup|u|)
    mass_history: np.ndarray  # rows (t, trapezoid integral of u)
    t_blowup: float | None = None
    t_blowup_refined: float | None = None
    config: dict = field(default_factory=dict)

    @property
    def times(self) -> np.ndarray:
        return np.array([f.time for f in self.snapshots])


def _reaction(u: np.ndarray, m: ModelParams) -> np.ndarray:
    return u * np.abs(u) ** (m.p - 1.0) - m.lam * u


def _reaction_scalar(u: float, m: ModelParams) -> float:
    return u * abs(u) ** (m.p - 1.0) - m.lam * u


def assemble_rhs(
    f: Field,
    bc: BoundarySpec,
    m: ModelParams,
    t: float | None = None,
    source=None,
) -> np.ndarray:
    """Nodal time derivatives of the semi-discrete system."""
    u = f.values
    if not np.isfinite(u).all():
        raise DomainError("assemble_rhs called on a non-finite field")
    n = f.grid.n
    h = f.grid.h
    t = f.time if t is None else t

    rhs = np.zeros(n)
    F = 0.5 * u * u

    # interior: central diffusion, upwind-biased conservative convection
    diff = (u[:-2] - 2.0 * u[1:-1] + u[2:]) / (h * h)
    conv = (F[2:] - F[:-2]) / (2.0 * h)  # central fallback
    idx = np.arange(1, n - 1)
    up = (u[1:-1] >= 0.0) & (idx >= 2)
    iu = idx[up]
    conv[up] = (3.0 * F[iu] - 4.0 * F[iu - 1] + F[iu - 2]) / (2.0 * h)
    dn = (u[1:-1] < 0.0) & (idx <= n - 3)
    idn = idx[dn]
    conv[dn] = (-3.0 * F[idn] + 4.0 * F[idn + 1] - F[idn + 2]) / (2.0 * h)
    rhs[1:-1] = diff - conv + _reaction(u[1:-1], m)

    src = None
    if source is not None:
        src = np.asarray(source(f.grid.nodes, t), dtype=float)
        rhs[1:-1] += src[1:-1]

    for end, i, j, nu_sign in (("left", 0, 1, -1.0), ("right", n - 1, n - 2, +1.0)):
        b = bc.left if end == "left" else bc.right
        ub = u[i]
        un = u[j]
        f_b = _reaction_scalar(ub, m)
        if src is not None and b.kind != BC_DIRICHLET:
            f_b += src[i]
        if b.kind == BC_DIRICHLET:
            rhs[i] = 0.0
        elif b.kind == BC_NEUMANN:
            rhs[i] = 2.0 * (un - ub) / (h * h) + f_b
        elif b.kind == BC_ROBIN:
            # d_nu u + a u = 0  =>  u_x = -nu_sign * a * u at this end
            ux = -nu_sign * b.a * ub
            ghost_term = 2.0 * h * ux * nu_sign  # ghost = un + 2 h ux * nu_sign
            rhs[i] = (2.0 * (un - ub) + ghost_term) / (h * h) - ub * ux + f_b
        elif b.kind == BC_FLUX:
            # d_nu u = c2 u^2 + c1 u  =>  u_x = nu_sign * g
            g = b.c2 * ub * ub + b.c1 * ub
            ux = nu_sign * g
            ghost_term = 2.0 * h * ux * nu_sign
            rhs[i] = (2.0 * (un - ub) + ghost_term) / (h * h) - ub * ux + f_b
        else:  # dynamical: sigma u_t + d_nu u = 0 combined with the interior operator
            sig = b.sigma
            den = 1.0 + 2.0 * sig / h - nu_sign * sig * ub
            if den <= 0.05 * (1.0 + 2.0 * sig / h):
                raise NumericalError(
                    f"dynamical boundary coefficient nearly singular at the {end} end "
                    f"(u = {ub:.3g}); the combined-node form breaks down here"
                )
            rhs[i] = (2.0 * (un - ub) / (h * h) + f_b) / den
    return rhs


def _stable_dt(u: np.ndarray, h: float, cfl: float) -> float:
    umax = float(np.abs(u).max())
    dt = cfl * h * h
    if umax > 0.0:
        dt = min(dt, cfl * h / umax)
    return dt


def _pin(u: np.ndarray, bc: BoundarySpec) -> None:
    if bc.left.kind == BC_DIRICHLET:
        u[0] = 0.0
    if bc.right.kind == BC_DIRICHLET:
        u[-1] = 0.0


def evolve(
    initial: Field,
    bc: BoundarySpec,
    m: ModelParams,
    opts: EvolveOptions | None = None,
) -> EvolutionResult:
    """Run the explicit solver until the final time, a steady state
    (||u_t||_inf < steady_tol for steady_steps consecutive steps) or blow-up
    (sup-norm above blowup_cap; the crossing time is re-run at dt/4 and both
    estimates are reported)."""
    opts = opts or EvolveOptions()
    grid = initial.grid
    h = grid.h
    u = initial.values.copy()
    _pin(u, bc)
    t = float(initial.time)
    t_final = opts.t_final

    if opts.fixed_dt is not None:
        limit = _stable_dt(u, h, opts.cfl)
        if opts.fixed_dt > limit:
            raise PreconditionError(
                f"fixed_dt={opts.fixed_dt:g} violates the stability constraint {limit:g}"
            )

    def rhs_of(vals: np.ndarray, at_t: float) -> np.ndarray:
        return assemble_rhs(Field(grid, vals, at_t), bc, m, t=at_t, source=opts.source)

    def step_once(vals: np.ndarray, at_t: float, dt: float) -> np.ndarray:
        k1 = rhs_of(vals, at_t)
        u1 = vals + dt * k1
        _pin(u1, bc)
        if not np.isfinite(u1).all():
            raise NumericalError(f"non-finite stage value at t = {at_t:.6g}")
        k2 = rhs_of(u1, at_t + dt)
        out = vals + 0.5 * dt * (k1 + k2)
        _pin(out, bc)
        return out

    snap_times = np.linspace(0.0, t_final, max(2, opts.n_snapshots))
    snapshots = [Field(grid, u.copy(), t)]
    next_snap = 1
    sup_hist = [(t, float(np.abs(u).max()))]
    mass_hist = [(t, float(np.trapezoid(u, dx=h)))]

    outcome = None
    t_blowup = None
    t_blowup_refined = None
    steady_run = 0
    prev_state = (t, u.copy())

    n_steps = 0
    while t < t_final - 1e-14:
        if n_steps >= opts.max_steps:
            raise NumericalError(f"step budget exhausted at t = {t:.6g}")
        dt = opts.fixed_dt if opts.fixed_dt is not None else _stable_dt(u, h, opts.cfl)
        dt = min(dt, t_final - t)
        # land exactly on snapshot times so comparisons across runs line up
        if next_snap < len(snap_times):
            gap = snap_times[next_snap] - t
            if 0.0 < gap <= dt:
                dt = gap
        prev_state = (t, u.copy())

        k1 = rhs_of(u, t)
        if float(np.abs(k1).max()) < opts.steady_tol:
            steady_run += 1
            if steady_run >= opts.steady_steps:
                outcome = OUTCOME_STEADY
                break
        else:
            steady_run = 0

        u1 = u + dt * k1
        _pin(u1, bc)
        if not np.isfinite(u1).all():
            raise NumericalError(f"non-finite stage value at t = {t:.6g} without cap crossing")
        k2 = rhs_of(u1, t + dt)
        u = u + 0.5 * dt * (k1 + k2)
        _pin(u, bc)
        t += dt
        n_steps += 1

        if not np.isfinite(u).all():
            raise NumericalError(f"non-finite values at t = {t:.6g} without cap crossing")

        sup = float(np.abs(u).max())
        sup_hist.append((t, sup))
        mass_hist.append((t, float(np.trapezoid(u, dx=h))))

        if sup > opts.blowup_cap:
            outcome = OUTCOME_BLOWUP
            t_blowup = t
            if opts.refine_blowup:
                t_blowup_refined = _refine_crossing(prev_state, h, opts, step_once)
            snapshots.append(Field(grid, u.copy(), t, blown_up=True))
            break

        while next_snap < len(snap_times) and t >= snap_times[next_snap] - 1e-12:
            snapshots.append(Field(grid, u.copy(), t))
            next_snap += 1

    if outcome is None:
        outcome = OUTCOME_FINAL
    if outcome in (OUTCOME_FINAL, OUTCOME_STEADY):
        if not snapshots or snapshots[-1].time < t - 1e-14:
            snapshots.append(Field(grid, u.copy(), t))

    config = {
        "p": m.p,
        "lambda": m.lam,
        "grid": {"x_left": grid.x_left, "x_right": grid.x_right, "n": grid.n, "h": h},
        "bc": bc.describe(),
        "t_final": t_final,
        "cfl": opts.cfl,
        "fixed_dt": opts.fixed_dt,
        "blowup_cap": opts.blowup_cap,
        "steady_tol": opts.steady_tol,
        "steady_steps": opts.steady_steps,
        "n_snapshots": opts.n_snapshots,
    }
    return EvolutionResult(
        outcome=outcome,
        snapshots=snapshots,
        sup_history=np.array(sup_hist),
        mass_history=np.array(mass_hist),
        t_blowup=t_blowup,
        t_blowup_refined=t_blowup_refined,
        config=config,
    )


def _refine_crossing(prev_state, h, opts, step_once) -> float:
    """Re-run the final interval at a quarter of the step and return the
    refined cap-crossing time."""
    t, u = prev_state
    u = u.copy()
    for _ in range(100000):
        dt = (opts.fixed_dt if opts.fixed_dt is not None else _stable_dt(u, h, opts.cfl)) / 4.0
        u = step_once(u, t, dt)
        t += dt
        if float(np.abs(u).max()) > opts.blowup_cap:
            return t
    raise NumericalError("cap crossing vanished during refinement")


@dataclass
class OrderingReport:
    holds: bool
    max_violation: float
    tol: float
    per_snapshot: list[float]


def compare_fields(lower: EvolutionResult, upper: EvolutionResult, tol: float | None = None) -> OrderingReport:
    """Max over snapshots of max(lower - upper, 0); the ordering "holds" when
    that never exceeds `tol` (default 1e-7 plus the scheme slack 10 h^2)."""
    if len(lower.snapshots) != len(upper.snapshots):
        raise ContractError("snapshot counts differ")
    g1 = lower.snapshots[0].grid
    g2 = upper.snapshots[0].grid
    if (g1.x_left, g1.x_right, g1.n) != (g2.x_left, g2.x_right, g2.n):
        raise ContractError("grids differ")
    if tol is None:
        tol = 1e-7 + 10.0 * g1.h ** 2
    per = []
    for lo, hi in zip(lower.snapshots, upper.snapshots):
        if abs(lo.time - hi.time) > 1e-9 * max(1.0, abs(hi.time)):
            raise ContractError(f"snapshot times differ: {lo.time} vs {hi.time}")
        per.append(float(np.maximum(lo.values - hi.values, 0.0).max()))
    worst = max(per) if per else 0.0
    return OrderingReport(worst <= tol, worst, tol, per)


def synthetic_result(grid: Grid, times, fn) -> EvolutionResult:
    """Wrap a closed-form u(x, t) as an EvolutionResult for comparisons."""
    snaps = [Field(grid, np.asarray(fn(grid.nodes, t), dtype=float), float(t)) for t in times]
    sup = np.array([[f.time, float(np.abs(f.values).max())] for f in snaps])
    mass = np.array([[f.time, float(np.trapezoid(f.values, dx=grid.h))] for f in snaps])
    return EvolutionResult(OUTCOME_FINAL, snaps, sup, mass, config={"synthetic": True})


def write_snapshots_csv(result: EvolutionResult, path) -> None:
    """Long-format rows t,x,u."""
    with open(path, "w") as fh:
        fh.write("t,x,u\n")
        for snap in result.snapshots:
            xs = snap.grid.nodes
            for x, val in zip(xs, snap.values):
                fh.write(f"{snap.time:.17g},{x:.17g},{val:.17g}\n")


def run_json(result: EvolutionResult) -> str:
    doc = {
        "outcome": result.outcome,
        "t_blowup": result.t_blowup,
        "t_blowup_refined": result.t_blowup_refined,
        "sup_norm_history": [[float(a), float(b)] for a, b in result.sup_history],
        "config": result.config,
    }
    return json.dumps(doc, indent=2, sort_keys=True)
