"""
Command-line front end.

Exit codes: 0 success, 1 a check or comparison failed its tolerance,
2 invalid configuration, 3 runtime solver error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
from pydantic import ValidationError

from .config import (
    PRESETS,
    ConfigError,
    ExperimentConfig,
    build_cotangent_point,
    build_curve,
    build_tangent,
    build_wave,
    load_config,
)
from .density_geometry import DensityFloorError
from .dynamics import (
    ImmersionError,
    InternalEnergy2,
    NLSParams,
    Nonlinearity,
    SolverError,
    TorsionWindingError,
    Trajectory,
    compressible2_evolve,
    filament_evolve,
    frenet,
    hasimoto,
    hs2_evolve,
    hs2_from_sfr,
    hydro_evolve,
    nls_evolve,
    sfr_geodesic_evolve,
    spinor_evolve,
)
from .madelung_maps import NotADiffeomorphismError, WindingError, madelung_forward, madelung_tangent
from .verification import DEFAULT_ENERGY, compressible_initial, run_verification
from .wave_geometry import fs_geodesic_exact

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2, 3
RUNTIME_ERRORS = (DensityFloorError, WindingError, TorsionWindingError, NotADiffeomorphismError,
                  ImmersionError, SolverError)
DEFAULT_OUT = "madelung_out"


class Runner:
    def __init__(self, cfg: ExperimentConfig, out: Path, quiet: bool = False):
        self.cfg = cfg.resolved()
        self.out = out
        self.quiet = quiet

    def say(self, msg: str) -> None:
        if not self.quiet:
            print(msg)

    def write_json(self, name: str, obj) -> Path:
        path = self.out / name
        path.write_text(json.dumps(obj, indent=2) + "\n")
        return path

    def save(self, traj: Trajectory, stem: str = "diagnostics") -> None:
        traj.to_csv(self.out / f"{stem}.csv")
        if self.cfg.write_snapshots:
            traj.snapshots_to_csv(self.out / f"{stem}_snapshots")
        for w in traj.warnings:
            self.say(f"warning: {w}")

    def run(self) -> int:
        self.out.mkdir(parents=True, exist_ok=True)
        self.write_json("config.resolved.json", self.cfg.echo())
        handler = getattr(self, f"run_{self.cfg.kind}")
        return handler()

    # -- kinds ---------------------------------------------------------------------

    def run_verify(self) -> int:
        cfg = self.cfg
        rep = run_verification(cfg.grid.n, cfg.seed, cfg.samples,
                               progress=lambda c, t: self.say(f"criterion {c:>2} done in {t:.1f}s"))
        rep.dump(self.out / "report.json")
        table = rep.table()
        (self.out / "report.txt").write_text(table + "\n")
        self.say(table)
        return EXIT_OK if rep.all_passed else EXIT_FAIL

    def _params(self) -> NLSParams:
        nl = self.cfg.nonlinearity
        f = {"none": Nonlinearity.none, "quartic": Nonlinearity.quartic}.get(nl.kind)
        return NLSParams(f() if f else Nonlinearity.cubic(nl.kappa))

    def run_evolve(self) -> int:
        cfg = self.cfg
        grid = cfg.grid.build()
        sv = cfg.solver
        if cfg.system == "hydro":
            p0 = build_cotangent_point(cfg.initial, grid, cfg.seed)
            traj = hydro_evolve(p0, self._params(), sv.dt, sv.T, sv.output_stride)
        else:
            psi0 = build_wave(cfg.initial, grid, cfg.seed)
            traj = nls_evolve(psi0, self._params(), sv.dt, sv.T, sv.output_stride)
        self.save(traj)
        self.say(f"{cfg.system}: {len(traj)} snapshots, Hamiltonian relative drift "
                 f"{traj.drift('hamiltonian', True):.3e}")
        return EXIT_OK

    def run_geodesic(self) -> int:
        cfg = self.cfg
        grid = cfg.grid.build()
        p0 = build_cotangent_point(cfg.initial, grid, cfg.seed)
        u0 = build_tangent(cfg.velocity, p0, cfg.seed)
        psi0, w0 = madelung_forward(p0), madelung_tangent(p0, u0)
        traj = sfr_geodesic_evolve(p0, u0, cfg.solver.dt, cfg.solver.T, cfg.solver.output_stride,
                                   reference=lambda t: fs_geodesic_exact(psi0, w0, t))
        self.save(traj)
        self.say(f"geodesic: max projective distance to the great circle "
                 f"{traj.column('correspondence_defect').max():.3e}")
        return EXIT_OK

    def run_filament(self) -> int:
        cfg = self.cfg
        c0 = build_curve(cfg.initial, cfg.grid.n)
        traj = filament_evolve(c0, cfg.solver.dt, cfg.solver.T, cfg.solver.output_stride)
        self.save(traj)
        traj.snapshots_to_csv(self.out / "curve", stem="curve")
        self.say(f"filament: Willmore relative drift {traj.drift('hamiltonian', True):.3e}, "
                 f"length relative drift {traj.drift('norm_or_mass', True):.3e}")
        return EXIT_OK

    def run_compare(self) -> int:
        cfg = self.cfg
        if cfg.preset is None:
            raise ConfigError("compare needs a preset")
        traj = getattr(self, "compare_" + cfg.preset.replace("-", "_"))()
        self.save(traj)
        defect = traj.column("correspondence_defect")[-1]
        tol = cfg.tolerances[cfg.preset]
        ok = bool(defect < tol)
        self.write_json("compare.json", {"preset": cfg.preset, "final_correspondence_defect": float(defect),
                                         "max_correspondence_defect": float(traj.column("correspondence_defect").max()),
                                         "tolerance": tol, "passed": ok})
        self.say(f"{cfg.preset}: final correspondence defect {defect:.3e} (tolerance {tol:.1e}) "
                 f"{'pass' if ok else 'FAIL'}")
        return EXIT_OK if ok else EXIT_FAIL

    def _keyed(self, traj):
        table = {round(t, 12): s for t, s in zip(traj.times, traj.states)}
        return lambda t: table[round(t, 12)]

    def compare_nls_hydro(self) -> Trajectory:
        cfg = self.cfg
        grid = cfg.grid.build()
        p0 = build_cotangent_point(cfg.initial, grid, cfg.seed)
        sv, par = cfg.solver, self._params()
        nls = nls_evolve(madelung_forward(p0), par, sv.dt, sv.T, sv.output_stride)
        ref = self._keyed(nls)
        return hydro_evolve(p0, par, sv.dt, sv.T, sv.output_stride, reference=lambda t: ref(t).values)

    def compare_sfr_fs(self) -> Trajectory:
        return self.run_geodesic_traj(hs2=False)

    def compare_hs2_fs(self) -> Trajectory:
        return self.run_geodesic_traj(hs2=True)

    def run_geodesic_traj(self, hs2: bool) -> Trajectory:
        cfg = self.cfg
        grid = cfg.grid.build()
        p0 = build_cotangent_point(cfg.initial, grid, cfg.seed)
        u0 = build_tangent(cfg.velocity, p0, cfg.seed)
        psi0, w0 = madelung_forward(p0), madelung_tangent(p0, u0)
        ref = lambda t: fs_geodesic_exact(psi0, w0, t)  # noqa: E731
        sv = cfg.solver
        if hs2:
            return hs2_evolve(hs2_from_sfr(p0, u0), sv.dt, sv.T, sv.output_stride, reference=ref)
        return sfr_geodesic_evolve(p0, u0, sv.dt, sv.T, sv.output_stride, reference=ref)

    def compare_filament_nls(self) -> Trajectory:
        cfg = self.cfg
        n = cfg.grid.n if "grid" in cfg.model_fields_set else 256
        c0 = build_curve(cfg.initial, n)
        fr = frenet(c0)
        sv = cfg.solver
        nls = nls_evolve(hasimoto(fr.k, fr.tau), NLSParams(Nonlinearity.cubic(-0.5)), sv.dt, sv.T, sv.output_stride)
        ref = self._keyed(nls)
        traj = filament_evolve(c0, sv.dt, sv.T, sv.output_stride, reference=lambda t: ref(t).values)
        traj.snapshots_to_csv(self.out / "curve", stem="curve")
        return traj

    def compare_compressible_spinor(self) -> Trajectory:
        cfg = self.cfg
        grid = cfg.grid.build()
        U = InternalEnergy2.quadratic(**DEFAULT_ENERGY)
        s0 = compressible_initial(grid)
        sv = cfg.solver
        sp = spinor_evolve(*s0.spinor(), U, sv.dt, sv.T, sv.output_stride)
        ref = self._keyed(sp)
        return compressible2_evolve(s0, U, sv.dt, sv.T, sv.output_stride,
                                    reference=lambda t: tuple(c.values for c in ref(t)))


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="output directory (default: $MADELUNG_OUT or ./madelung_out)")
    common.add_argument("--seed", type=int, help="random seed (overrides the config)")
    common.add_argument("--quiet", action="store_true", help="suppress console output")

    parser = argparse.ArgumentParser(prog="madelung", description="Madelung transform verification and solvers")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("verify", parents=[common], help="run the full verification suite")
    p.add_argument("--config", help="JSON experiment config")
    for name, text in (("evolve", "evolve NLS or hydrodynamic data"),
                       ("geodesic", "integrate a Sasaki-Fisher-Rao geodesic"),
                       ("filament", "evolve a closed vortex filament")):
        p = sub.add_parser(name, parents=[common], help=text)
        p.add_argument("--config", required=True, help="JSON experiment config")
    p = sub.add_parser("compare", parents=[common], help="run a cross-solver comparison preset")
    p.add_argument("--preset", required=True, choices=PRESETS)
    p.add_argument("--config", help="JSON experiment config (grid, solver, tolerances)")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    out = Path(args.out or os.environ.get("MADELUNG_OUT") or DEFAULT_OUT)
    try:
        cfg = load_config(args.config, kind=args.command, seed=args.seed,
                          preset=getattr(args, "preset", None))
        runner = Runner(cfg, out, args.quiet)
    except (ValidationError, ConfigError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return runner.run()
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ValidationError, ValueError) as exc:
        if isinstance(exc, RUNTIME_ERRORS):
            print(f"solver error ({type(exc).__name__}): {exc}", file=sys.stderr)
            return EXIT_RUNTIME
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except RUNTIME_ERRORS as exc:
        print(f"solver error ({type(exc).__name__}): {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
