"""Command-line surface.

Subcommands: equilibria, portrait, certify, shoot, periodic, halfline,
evolve, super, blowup, sweep.  Exit codes: 0 success, 1 regime or
precondition errors, 2 numerical failures, 64 usage errors.

Runs are configured either by flags or by a single JSON document
(``--config``); every numeric default is resolved into the emitted output so
a run is reproducible from its outputs alone.  ``--dry-run`` validates the
configuration and prints the resolved plan without computing.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import barriers, blowup as blowup_mod, flow, model, parabolic, stationary, supersolutions, sweep
from .errors import (
    BurgersLabError,
    ConsistencyError,
    ContractError,
    DomainError,
    NumericalError,
    PreconditionError,
)

ENV_OUTDIR = "BURGERSLAB_OUTDIR"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(64)


def _outdir(args) -> str:
    out = args.out_dir or os.environ.get(ENV_OUTDIR, ".")
    os.makedirs(out, exist_ok=True)
    return out


def _params(args) -> model.ModelParams:
    return model.ModelParams(args.p, getattr(args, "lam"))


def _emit(doc, args, filename: str | None = None) -> None:
    text = json.dumps(doc, indent=2, sort_keys=True, default=float)
    print(text)
    if filename:
        with open(os.path.join(_outdir(args), filename), "w") as fh:
            fh.write(text + "\n")


# ---------------------------------------------------------------------------
# run configuration (evolve / blowup)

_RUN_DEFAULTS = {
    "problem": {"p": 2.0, "lambda": 0.0},
    "domain": {"x_left": 0.0, "x_right": 1.0, "n": 101},
    "bc": {"left": {"kind": "neumann"}, "right": {"kind": "dirichlet"}},
    "initial": {"kind": "constant", "value": 0.0},
    "time": {"t_final": 1.0, "snapshots": 101},
    "numerics": {
        "cfl": 0.4,
        "blowup_cap": 1e8,
        "steady_tol": 1e-10,
        "steady_steps": 100,
        "fixed_dt": None,
    },
    "blowup": {"alpha": None, "side": "right-halfline", "burn_in": 0.05},
}


def resolve_run_config(doc: dict) -> dict:
    """Fill every default so that serialize(resolve(x)) round-trips."""
    out = {}
    for section, defaults in _RUN_DEFAULTS.items():
        got = dict(doc.get(section, {}))
        merged = dict(defaults)
        merged.update(got)
        unknown = set(got) - set(defaults)
        if unknown and section != "initial":
            raise PreconditionError(f"unknown keys in config section {section!r}: {sorted(unknown)}")
        out[section] = merged
    return out


def _bc_from(doc: dict) -> parabolic.BoundaryCondition:
    kind = doc.get("kind", "dirichlet")
    if kind == "dirichlet":
        return parabolic.BoundaryCondition.dirichlet()
    if kind == "neumann":
        return parabolic.BoundaryCondition.neumann()
    if kind == "robin":
        return parabolic.BoundaryCondition.robin(float(doc["a"]))
    if kind == "dynamical":
        return parabolic.BoundaryCondition.dynamical(float(doc["sigma"]))
    if kind == "flux":
        return parabolic.BoundaryCondition.nonlinear_flux(float(doc["c2"]), float(doc["c1"]))
    raise PreconditionError(f"unknown boundary kind {kind!r}")


def initial_from_config(doc: dict, grid: parabolic.Grid) -> np.ndarray:
    """constant | gaussian(amplitude, center, width) | expdecay(amplitude, rate)
    | file (CSV x,u, linearly interpolated)."""
    kind = doc.get("kind", "constant")
    x = grid.nodes
    if kind == "constant":
        return np.full(grid.n, float(doc["value"]))
    if kind == "gaussian":
        a, c, w = float(doc["amplitude"]), float(doc["center"]), float(doc["width"])
        return a * np.exp(-(((x - c) / w) ** 2))
    if kind == "expdecay":
        a, k = float(doc["amplitude"]), float(doc["rate"])
        return a * np.exp(-k * x)
    if kind == "file":
        data = np.loadtxt(doc["path"], delimiter=",", skiprows=1)
        return np.interp(x, data[:, 0], data[:, 1])
    raise PreconditionError(f"unknown initial-data kind {kind!r}")


def _run_from_config(cfg: dict):
    prob = cfg["problem"]
    m = model.ModelParams(float(prob["p"]), float(prob["lambda"]))
    dom = cfg["domain"]
    grid = parabolic.Grid(float(dom["x_left"]), float(dom["x_right"]), int(dom["n"]))
    bc = parabolic.BoundarySpec(_bc_from(cfg["bc"]["left"]), _bc_from(cfg["bc"]["right"]))
    values = initial_from_config(cfg["initial"], grid)
    num = cfg["numerics"]
    opts = parabolic.EvolveOptions(
        t_final=float(cfg["time"]["t_final"]),
        n_snapshots=int(cfg["time"]["snapshots"]),
        cfl=float(num["cfl"]),
        blowup_cap=float(num["blowup_cap"]),
        steady_tol=float(num["steady_tol"]),
        steady_steps=int(num["steady_steps"]),
        fixed_dt=None if num["fixed_dt"] is None else float(num["fixed_dt"]),
    )
    return m, grid, bc, parabolic.Field(grid, values, 0.0), opts


# ---------------------------------------------------------------------------
# subcommands


def cmd_equilibria(args) -> int:
    m = _params(args)
    eqs = model.classify_equilibria(m)
    doc = {
        "p": m.p,
        "lambda": m.lam,
        "equilibria": [
            {
                "u": e.location.u,
                "v": e.location.v,
                "kind": e.kind,
                "discriminant": e.discriminant,
                "eigenvalues": [[ev.real, ev.imag] for ev in e.eigenvalues],
                "detail": e.detail,
            }
            for e in eqs
        ],
    }
    if args.dry_run:
        _emit({"plan": "equilibria", "p": m.p, "lambda": m.lam}, args)
        return 0
    _emit(doc, args, "equilibria.json")
    return 0


def _parse_seeds(items) -> list[model.PhasePoint]:
    seeds = []
    for item in items:
        try:
            su, sv = item.split(",")
            seeds.append(model.PhasePoint(float(su), float(sv)))
        except ValueError as exc:
            raise PreconditionError(f"bad seed {item!r}, expected 'u,v'") from exc
    return seeds


def cmd_portrait(args) -> int:
    m = _params(args)
    seeds = _parse_seeds(args.seed or [])
    opts = flow.IntegrationOptions(rtol=args.rtol, atol=args.atol, escape_cap=args.escape_cap)
    plan = {
        "plan": "portrait",
        "p": m.p,
        "lambda": m.lam,
        "seeds": [[s.u, s.v] for s in seeds],
        "rtol": opts.rtol,
        "atol": opts.atol,
        "escape_cap": opts.escape_cap,
        "threads": args.threads,
    }
    if args.dry_run:
        _emit(plan, args)
        return 0
    result = flow.portrait(m, seeds, opts, workers=args.threads)
    out = _outdir(args)
    summary = []
    for i, traj in enumerate(result.trajectories):
        if traj is None:
            summary.append({"seed": i, "error": result.errors[i]})
            continue
        tpath = os.path.join(out, f"trajectory_{i:03d}.csv")
        epath = os.path.join(out, f"events_{i:03d}.csv")
        flow.write_trajectory_csv(traj, tpath)
        flow.write_events_csv(traj, epath)
        summary.append(
            {
                "seed": i,
                "terminal": traj.terminal,
                "n_samples": len(traj),
                "n_events": len(traj.events),
                "files": [tpath, epath],
            }
        )
    _emit({"config": plan, "results": summary}, args, "portrait.json")
    return 0


def cmd_certify(args) -> int:
    m = _params(args)
    if args.dry_run:
        _emit({"plan": "certify", "lemma": args.lemma, "p": m.p, "lambda": m.lam}, args)
        return 0
    if args.lemma == "bounded-pge3":
        cert = barriers.certify_bounded_pge3(args.v0, m)
    elif args.lemma == "bounded-lneg":
        cert = barriers.certify_bounded_lneg(args.v0, m)
    elif args.lemma == "unbounded-v0":
        cert = barriers.certify_unbounded_axis_start(args.v0, m)
    else:
        cert = barriers.certify_unbounded_u_axis_start(args.beta, m)
    print(barriers.certificate_json(cert))
    with open(os.path.join(_outdir(args), "certificate.json"), "w") as fh:
        fh.write(barriers.certificate_json(cert) + "\n")
    if args.confirm:
        if cert.verdict == barriers.UNDETERMINED:
            print("confirmation skipped: verdict undetermined", file=sys.stderr)
            return 1
        rep = barriers.confirm(cert, m)
        print(json.dumps({"consistent": rep.consistent, "detail": rep.detail}, indent=2))
        if not rep.consistent:
            raise ConsistencyError(f"integration contradicts the certificate: {rep.detail}")
    return 0


def cmd_shoot(args) -> int:
    m = _params(args)
    if args.dry_run:
        _emit({"plan": "shoot", "bc": args.bc, "sign": args.sign, "p": m.p, "lambda": m.lam}, args)
        return 0
    sol = stationary.solve_bvp(args.bc, m, args.sign, seed=args.seed)
    out = _outdir(args)
    stationary.write_profile_csv(sol, os.path.join(out, "profile.csv"))
    stationary.write_profile_meta_json(sol, os.path.join(out, "profile.json"))
    _emit(stationary.solution_meta(sol), args)
    return 0


def cmd_periodic(args) -> int:
    m = _params(args)
    if args.dry_run:
        _emit({"plan": "periodic", "p": m.p, "lambda": m.lam, "v0": args.v0}, args)
        return 0
    sol = stationary.find_periodic(m, args.v0)
    out = _outdir(args)
    stationary.write_profile_csv(sol, os.path.join(out, "periodic.csv"))
    stationary.write_profile_meta_json(sol, os.path.join(out, "periodic.json"))
    _emit(stationary.solution_meta(sol), args)
    return 0


def cmd_halfline(args) -> int:
    m = _params(args)
    if args.dry_run:
        _emit({"plan": "halfline", "kind": args.kind, "p": m.p, "lambda": m.lam}, args)
        return 0
    sol = stationary.find_halfline(m, args.kind)
    out = _outdir(args)
    stationary.write_profile_csv(sol, os.path.join(out, f"{args.kind}.csv"))
    stationary.write_profile_meta_json(sol, os.path.join(out, f"{args.kind}.json"))
    _emit(stationary.solution_meta(sol), args)
    return 0


def _load_config(args) -> dict:
    if args.config:
        with open(args.config) as fh:
            doc = json.load(fh)
    else:
        doc = {}
    return resolve_run_config(doc)


def cmd_evolve(args) -> int:
    cfg = _load_config(args)
    if args.dry_run:
        _emit({"plan": "evolve", "config": cfg}, args)
        return 0
    m, grid, bc, field0, opts = _run_from_config(cfg)
    result = parabolic.evolve(field0, bc, m, opts)
    out = _outdir(args)
    parabolic.write_snapshots_csv(result, os.path.join(out, "snapshots.csv"))
    with open(os.path.join(out, "run.json"), "w") as fh:
        fh.write(parabolic.run_json(result) + "\n")
    _emit(
        {
            "outcome": result.outcome,
            "t_blowup": result.t_blowup,
            "t_blowup_refined": result.t_blowup_refined,
            "final_sup": float(result.sup_history[-1, 1]),
            "config": cfg,
        },
        args,
    )
    return 0


def cmd_super(args) -> int:
    m = _params(args)
    bc_doc = {"kind": args.bc}
    if args.bc == "robin":
        bc_doc["a"] = args.a
    elif args.bc == "dynamical":
        bc_doc["sigma"] = args.sigma
    elif args.bc == "flux":
        bc_doc["c2"], bc_doc["c1"] = args.c2, args.c1
    if args.dry_run:
        _emit({"plan": "super", "kind": args.kind, "bc": bc_doc, "p": m.p, "lambda": m.lam}, args)
        return 0
    bc = _bc_from(bc_doc)
    spec = supersolutions.build(
        args.kind, m, bc, args.phi_sup, domain=args.domain, a_exp=args.a_exp, n_pow=args.n_pow
    )
    report = supersolutions.validate(spec)
    doc = {
        "kind": spec.kind,
        "domain": spec.domain,
        "params": spec.params,
        "validation": json.loads(supersolutions.validation_json(report)),
    }
    _emit(doc, args, "supersolution.json")
    return 0 if report.certified else 2


def cmd_blowup(args) -> int:
    cfg = _load_config(args)
    if args.dry_run:
        _emit({"plan": "blowup", "config": cfg}, args)
        return 0
    m, grid, bc, field0, opts = _run_from_config(cfg)
    result = parabolic.evolve(field0, bc, m, opts)
    side = cfg["blowup"]["side"]
    bnode_bc = bc.left if side == blowup_mod.SIDE_RIGHT else bc.right
    alpha = cfg["blowup"]["alpha"]
    if alpha is None:
        snaps = result.snapshots
        idx = 0 if side == blowup_mod.SIDE_RIGHT else -1
        c_emp = min(float(f.values[idx]) for f in snaps)
        alpha = blowup_mod.choose_weight(m, c_emp, bnode_bc, side)
    report = blowup_mod.monitor(
        result, alpha, side, m=m, burn_in=float(cfg["blowup"]["burn_in"]), physical_bc=bnode_bc
    )
    out = _outdir(args)
    with open(os.path.join(out, "blowup.json"), "w") as fh:
        fh.write(blowup_mod.report_json(report) + "\n")
    print(blowup_mod.report_json(report))
    return 0


def cmd_sweep(args) -> int:
    plan = {
        "plan": "sweep",
        "lambda_range": [args.lambda_min, args.lambda_max],
        "p_range": [args.p_min, args.p_max],
        "resolution": args.resolution,
        "threads": args.threads,
        "svg": args.svg,
    }
    if args.dry_run:
        _emit(plan, args)
        return 0
    out = _outdir(args)
    result = sweep.regime_map(
        (args.lambda_min, args.lambda_max),
        (args.p_min, args.p_max),
        args.resolution,
        out_dir=out,
        workers=args.threads,
    )
    if args.svg:
        sweep.write_svg(result, os.path.join(out, "regime_map.svg"))
    n_exist = sum(1 for c in result.cells for f in c.flags.values() if f == "exists")
    _emit({"config": plan, "cells": len(result.cells), "exists_flags": n_exist}, args)
    return 0


# ---------------------------------------------------------------------------


def build_parser() -> _Parser:
    parser = _Parser(prog="burgerslab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--out-dir", default=None, help=f"output directory (or ${ENV_OUTDIR})")
        sp.add_argument("--dry-run", action="store_true", help="print the resolved plan only")
        sp.add_argument("--rtol", type=float, default=1e-9)
        sp.add_argument("--atol", type=float, default=1e-11)
        sp.add_argument("--threads", type=int, default=1)
        sp.add_argument("--seed-rng", type=int, default=0, help="rng seed for sampled checks")

    def with_params(sp):
        sp.add_argument("--p", type=float, required=True)
        sp.add_argument("--lambda", dest="lam", type=float, required=True)

    sp = sub.add_parser("equilibria", help="classify the equilibria of the stationary system")
    common(sp)
    with_params(sp)
    sp.set_defaults(func=cmd_equilibria)

    sp = sub.add_parser("portrait", help="integrate a batch of phase-plane seeds")
    common(sp)
    with_params(sp)
    sp.add_argument("--seed", action="append", metavar="U,V", help="repeatable seed point")
    sp.add_argument("--escape-cap", type=float, default=1e6)
    sp.set_defaults(func=cmd_portrait)

    sp = sub.add_parser("certify", help="closed-form boundedness certificates")
    common(sp)
    with_params(sp)
    sp.add_argument(
        "--lemma",
        required=True,
        choices=["bounded-pge3", "bounded-lneg", "unbounded-v0", "unbounded-u0"],
    )
    sp.add_argument("--v0", type=float, default=1.0)
    sp.add_argument("--beta", type=float, default=2.0)
    sp.add_argument("--confirm", action="store_true", help="integrate and check the verdict")
    sp.set_defaults(func=cmd_certify)

    sp = sub.add_parser("shoot", help="stationary boundary-value profiles")
    common(sp)
    with_params(sp)
    sp.add_argument("--bc", required=True, choices=["dirichlet", "neumann", "mixed1", "mixed2"])
    sp.add_argument("--sign", default="positive", choices=["positive", "negative", "sign-changing"])
    sp.add_argument("--seed", type=float, default=None, help="explicit shooting seed")
    sp.set_defaults(func=cmd_shoot)

    sp = sub.add_parser("periodic", help="closed orbits / periodic profiles")
    common(sp)
    with_params(sp)
    sp.add_argument("--v0", type=float, required=True)
    sp.set_defaults(func=cmd_periodic)

    sp = sub.add_parser("halfline", help="half-line and whole-line profiles")
    common(sp)
    with_params(sp)
    sp.add_argument(
        "--kind",
        required=True,
        choices=["halfline-neumann", "halfline-mixed2", "fullline-neumann", "halfline-mixed1"],
    )
    sp.set_defaults(func=cmd_halfline)

    sp = sub.add_parser("evolve", help="run the parabolic solver from a JSON config")
    common(sp)
    sp.add_argument("--config", default=None, help="run configuration JSON")
    sp.set_defaults(func=cmd_evolve)

    sp = sub.add_parser("super", help="build and certify an explicit super-solution")
    common(sp)
    with_params(sp)
    sp.add_argument(
        "--kind", required=True, choices=["constant-root", "exp-growth", "gaussian-decay"]
    )
    sp.add_argument("--bc", default="dirichlet", choices=["dirichlet", "neumann", "robin", "dynamical"])
    sp.add_argument("--a", type=float, default=0.0, help="Robin coefficient")
    sp.add_argument("--sigma", type=float, default=1.0, help="dynamical coefficient")
    sp.add_argument("--c2", type=float, default=0.0)
    sp.add_argument("--c1", type=float, default=0.0)
    sp.add_argument("--phi-sup", type=float, default=0.0)
    sp.add_argument("--domain", default=None)
    sp.add_argument("--a-exp", type=float, default=1.0)
    sp.add_argument("--n-pow", type=int, default=2)
    sp.set_defaults(func=cmd_super)

    sp = sub.add_parser("blowup", help="evolve and monitor the weighted-norm blow-up machinery")
    common(sp)
    sp.add_argument("--config", default=None)
    sp.set_defaults(func=cmd_blowup)

    sp = sub.add_parser("sweep", help="regime map over a (lambda, p) grid")
    common(sp)
    sp.add_argument("--lambda-min", type=float, default=-2.0)
    sp.add_argument("--lambda-max", type=float, default=2.0)
    sp.add_argument("--p-min", type=float, default=1.0)
    sp.add_argument("--p-max", type=float, default=4.0)
    sp.add_argument("--resolution", type=int, default=21)
    sp.add_argument("--svg", action="store_true")
    sp.set_defaults(func=cmd_sweep)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    except (PreconditionError, ContractError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except BurgersLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
