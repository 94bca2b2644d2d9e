"""Regime cartography over a (lambda, p) grid.

Each cell records the equilibrium structure, certificate verdicts for a
canonical fan of axis seeds, and existence flags for the stationary
boundary-value problems.  A flag is "exists" only when a covered existence
regime applies AND a witness profile was actually constructed and passed the
residual check; "not-exists" only on a covered nonexistence regime; anything
else is "unknown".  Cell-level failures are recorded in the cell and never
abort the sweep.

Cells are independent work items; assembly is row-major over (lambda, p), so
output is byte-identical for any worker count.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import barriers
from .errors import BurgersLabError, NumericalError, PreconditionError, RegimeError
from .model import ModelParams, classify_equilibria
from .stationary import (
    bounded_lneg_threshold,
    find_periodic,
    solve_bvp,
    write_profile_csv,
)

__all__ = ["SeedPolicy", "RegimeCell", "SweepResult", "regime_map", "write_regime_csv", "write_svg"]

EXISTS = "exists"
NOT_EXISTS = "not-exists"
UNKNOWN = "unknown"

_BC_COLUMNS = ("dirichlet", "neumann", "mixed1", "mixed2", "periodic")


@dataclass(frozen=True)
class SeedPolicy:
    """Canonical axis seeds: a geometric fan plus, where the escape criterion
    applies, probes on both sides of its threshold."""

    v0_base: float = 0.1
    v0_factor: float = 2.0
    n_seeds: int = 8
    threshold_probes: bool = True
    witness_samples: int = 1001
    witnesses: bool = True

    def seeds(self) -> list[float]:
        return [self.v0_base * self.v0_factor**k for k in range(self.n_seeds)]


@dataclass
class RegimeCell:
    lam: float
    p: float
    n_equilibria: int
    kinds: list[str]
    discriminant: float | None
    flags: dict[str, str]
    bounded_seed_fraction: float
    seed_verdicts: list[tuple[float, str]]
    witnesses: dict[str, dict]
    errors: list[str] = field(default_factory=list)


@dataclass
class SweepResult:
    lambdas: np.ndarray
    ps: np.ndarray
    cells: list[RegimeCell]  # row-major: lambda outer, p inner

    def cell(self, i_lam: int, j_p: int) -> RegimeCell:
        return self.cells[i_lam * len(self.ps) + j_p]


def _theorem_flags(m: ModelParams) -> dict[str, str]:
    p, lam = m.p, m.lam
    flags = {bc: UNKNOWN for bc in _BC_COLUMNS}
    if p <= 1.0:
        return flags
    if lam > 0.0:
        ge3 = p >= 3.0
        vortex = m.discriminant < 0.0
        flags["dirichlet"] = EXISTS if ge3 else UNKNOWN
        flags["neumann"] = EXISTS if (ge3 or vortex) else UNKNOWN
        flags["mixed1"] = EXISTS if ge3 else UNKNOWN
        flags["mixed2"] = EXISTS
        flags["periodic"] = EXISTS if ge3 else UNKNOWN
    else:
        flags["dirichlet"] = EXISTS
        flags["neumann"] = NOT_EXISTS
        flags["mixed1"] = EXISTS
        flags["mixed2"] = EXISTS
        flags["periodic"] = EXISTS
    return flags


def _seed_verdict(v0: float, m: ModelParams) -> str:
    """Combine the applicable closed-form certificates for one axis seed."""
    verdicts = set()
    if m.p >= 3.0 and m.lam > 0.0:
        verdicts.add(barriers.certify_bounded_pge3(v0, m).verdict)
    if m.lam <= 0.0 and m.p > 1.0 and v0 > -m.lam:
        verdicts.add(barriers.certify_bounded_lneg(v0, m).verdict)
    if 1.0 < m.p < 3.0:
        verdicts.add(barriers.certify_unbounded_axis_start(v0, m).verdict)
    verdicts.discard(barriers.UNDETERMINED)
    if not verdicts:
        return barriers.UNDETERMINED
    if len(verdicts) > 1:
        raise NumericalError(f"conflicting certificates for v0={v0}, {m}")
    return verdicts.pop()


def _periodic_seed(m: ModelParams) -> float:
    if m.lam > 0.0:
        return 0.5
    if m.p >= 3.0:
        return max(0.5, -m.lam + 0.5)
    gap = bounded_lneg_threshold(m) + m.lam  # the part above -lambda
    return -m.lam + min(1.0, 0.9 * gap)


def _compute_cell(lam: float, p: float, policy: SeedPolicy, witness_dir: str | None) -> RegimeCell:
    m = ModelParams(p, lam)
    eqs = classify_equilibria(m)
    disc = next((e.discriminant for e in eqs if e.discriminant is not None), None)
    cell = RegimeCell(
        lam=lam,
        p=p,
        n_equilibria=len(eqs),
        kinds=[e.kind for e in eqs],
        discriminant=disc,
        flags=_theorem_flags(m),
        bounded_seed_fraction=0.0,
        seed_verdicts=[],
        witnesses={},
    )

    seeds = policy.seeds()
    if policy.threshold_probes and 1.0 < p < 3.0:
        thr = barriers.unbounded_axis_threshold(m)
        seeds = seeds + [0.99 * thr, 1.01 * thr]
    n_bounded = 0
    for v0 in seeds:
        try:
            verdict = _seed_verdict(v0, m)
        except BurgersLabError as exc:
            cell.errors.append(f"seed {v0:g}: {exc}")
            verdict = barriers.UNDETERMINED
        cell.seed_verdicts.append((v0, verdict))
        if verdict == barriers.BOUNDED:
            n_bounded += 1
    cell.bounded_seed_fraction = n_bounded / len(seeds)

    if policy.witnesses:
        for bc, flag in list(cell.flags.items()):
            if flag != EXISTS:
                continue
            try:
                if bc == "periodic":
                    sol = find_periodic(m, _periodic_seed(m), n_samples=policy.witness_samples)
                else:
                    sol = solve_bvp(bc, m, "positive", n_samples=policy.witness_samples)
                if not (sol.residual <= 1e-6):
                    raise NumericalError(f"witness residual {sol.residual:.3g} above 1e-6")
                entry = {
                    "alpha": sol.half_width,
                    "residual": sol.residual,
                    "sign": sol.sign,
                    "file": None,
                }
                if witness_dir is not None:
                    fname = f"{bc}_lam{lam:.6g}_p{p:.6g}.csv"
                    write_profile_csv(sol, os.path.join(witness_dir, fname))
                    entry["file"] = os.path.join("witnesses", fname)
                cell.witnesses[bc] = entry
            except BurgersLabError as exc:
                cell.flags[bc] = UNKNOWN
                cell.errors.append(f"witness {bc}: {exc}")
    return cell


def regime_map(
    lambda_range: tuple[float, float] = (-2.0, 2.0),
    p_range: tuple[float, float] = (1.0, 4.0),
    resolution: int | tuple[int, int] = 21,
    seed_policy: SeedPolicy | None = None,
    *,
    out_dir: str | None = None,
    workers: int = 1,
) -> SweepResult:
    """Fill the (lambda, p) grid cell by cell.

    resolution may be a single count for both axes or (n_lambda, n_p);
    at least 2 per axis.  p_range must lie in [1, inf).
    """
    if isinstance(resolution, int):
        n_lam = n_p = resolution
    else:
        n_lam, n_p = resolution
    if n_lam < 2 or n_p < 2:
        raise PreconditionError("resolution must be >= 2 per axis")
    if p_range[0] < 1.0:
        raise PreconditionError("p_range must stay inside [1, inf)")
    policy = seed_policy or SeedPolicy()
    lambdas = np.linspace(lambda_range[0], lambda_range[1], n_lam)
    ps = np.linspace(p_range[0], p_range[1], n_p)

    witness_dir = None
    if out_dir is not None and policy.witnesses:
        witness_dir = os.path.join(out_dir, "witnesses")
        os.makedirs(witness_dir, exist_ok=True)

    tasks = [(float(lam), float(p)) for lam in lambdas for p in ps]

    def work(args):
        lam, p = args
        try:
            return _compute_cell(lam, p, policy, witness_dir)
        except BurgersLabError as exc:
            cell = RegimeCell(
                lam=lam,
                p=p,
                n_equilibria=0,
                kinds=[],
                discriminant=None,
                flags={bc: UNKNOWN for bc in _BC_COLUMNS},
                bounded_seed_fraction=0.0,
                seed_verdicts=[],
                witnesses={},
            )
            cell.errors.append(str(exc))
            return cell

    if workers <= 1:
        cells = [work(t) for t in tasks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            cells = list(ex.map(work, tasks))

    result = SweepResult(lambdas, ps, cells)
    if out_dir is not None:
        write_regime_csv(result, os.path.join(out_dir, "regime_map.csv"))
    return result


def write_regime_csv(result: SweepResult, path) -> None:
    """Columns lambda,p,n_equilibria,kinds,dirichlet,neumann,mixed1,mixed2,
    periodic,bounded_seed_fraction (kinds joined by ';')."""
    with open(path, "w") as fh:
        fh.write(
            "lambda,p,n_equilibria,kinds,dirichlet,neumann,mixed1,mixed2,periodic,"
            "bounded_seed_fraction\n"
        )
        for c in result.cells:
            kinds = ";".join(c.kinds)
            fh.write(
                f"{c.lam:.10g},{c.p:.10g},{c.n_equilibria},{kinds},"
                f"{c.flags['dirichlet']},{c.flags['neumann']},{c.flags['mixed1']},"
                f"{c.flags['mixed2']},{c.flags['periodic']},{c.bounded_seed_fraction:.6g}\n"
            )


_FLAG_COLORS = {EXISTS: "#2c7fb8", NOT_EXISTS: "#d95f02", UNKNOWN: "#cccccc"}
_COUNT_COLORS = {0: "#000000", 1: "#74c476", 3: "#fd8d3c"}


def write_svg(result: SweepResult, path, color_by: str = "n_equilibria") -> None:
    """A plain rect-grid heat map; color_by is "n_equilibria" or one of the
    boundary-condition flag columns."""
    n_lam, n_p = len(result.lambdas), len(result.ps)
    cw, ch, margin = 22, 22, 60
    width = margin + n_lam * cw + 20
    height = margin + n_p * ch + 20
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
        f'<text x="{margin}" y="20" font-size="14">regime map, color: {color_by}</text>',
    ]
    for i in range(n_lam):
        for j in range(n_p):
            c = result.cell(i, j)
            if color_by == "n_equilibria":
                col = _COUNT_COLORS.get(c.n_equilibria, "#9e9ac8")
            else:
                col = _FLAG_COLORS.get(c.flags.get(color_by, UNKNOWN), "#cccccc")
            x = margin + i * cw
            y = margin + (n_p - 1 - j) * ch
            parts.append(
                f'<rect x="{x}" y="{y}" width="{cw - 1}" height="{ch - 1}" fill="{col}">'
                f"<title>lambda={c.lam:.4g}, p={c.p:.4g}</title></rect>"
            )
    parts.append(f'<text x="{margin}" y="{height - 4}" font-size="12">lambda -></text>')
    parts.append(
        f'<text x="10" y="{margin + 10}" font-size="12" transform="rotate(90 10 {margin + 10})">'
        "p -&gt;</text>"
    )
    parts.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(parts) + "\n")
