"""Command-line front end: ``squeeze-dyn simulate | sweep | verify``.

Settings resolve as: command-line flags, then the config file (``--config``
or ``$SQUEEZE_DYN_CONFIG``), then built-in defaults.

Exit codes: 0 success, 1 usage or configuration error, 2 numerical failure
(including a failed ``verify`` check).
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from dataclasses import dataclass

import numpy as np

from . import __version__
from ._validation import DomainError, NumericalError, TruncationError
from .analysis import (
    eigenstate_residual,
    run_trajectory,
    sweep_eta,
    sweep_xi_q,
)
from .dynamics import decompose, dense_propagator_oracle, evolve
from .output import (
    SIMULATE_HEADER,
    SWEEP_HEADER,
    RunConfig,
    atomic_write,
    load_config_file,
    parse_grid,
    rows_to_csv,
    rows_to_json,
)
from .states import (
    OscState,
    SpinState,
    intelligent_state_general,
    intelligent_state_m0_zero,
    jz_and_xi_R_closed_form,
    spectroscopic_xi_R,
)
from .spin import build_spin_operators, mean_and_variance

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERICAL = 2

CONFIG_ENV = "SQUEEZE_DYN_CONFIG"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# flag dest -> RunConfig field
_FLAG_FIELDS = {
    "n_ions": "n_ions",
    "eta": "eta",
    "m0": "m0",
    "xi_q": "xi_q0",
    "tau_max": "tau_max",
    "d_tau": "d_tau",
    "trunc_eps": "trunc_eps",
    "trunc_cap": "trunc_cap",
    "output": "output_path",
    "format": "format",
}


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help=f"key=value config file (default: ${CONFIG_ENV})")
    p.add_argument("--n-ions", type=int, help="number of ions N = 2j (default 2)")
    p.add_argument("--eta", type=float, help="intelligent-state parameter, 0 < eta < 1 (default 0.36)")
    p.add_argument("--m0", type=float, help="eigenvalue branch m0 (default 0)")
    p.add_argument("--xi-q", type=float, help="initial motional squeezing xi_q(0) (default 0.6)")
    p.add_argument("--tau-max", type=float, help="last scaled time g*t (default 40)")
    p.add_argument("--d-tau", type=float, help="time step (default 0.02)")
    p.add_argument("--trunc-eps", type=float, help="Fock tail mass bound (default 1e-24)")
    p.add_argument("--trunc-cap", type=int, help="largest allowed Fock cutoff (default 1024)")
    p.add_argument("--output", "-o", help="output file (default: stdout)")
    p.add_argument("--format", choices=("csv", "json"), help="output format (default csv)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="squeeze-dyn", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", help="time series of S_ion, xi_R, xi_q, <Jz>")
    _add_common(p)

    p = sub.add_parser("sweep", help="time-averaged statistics over an eta or xi_q grid")
    _add_common(p)
    p.add_argument("--axis", choices=("eta", "xi-q"), required=True)
    p.add_argument("--grid", required=True, help="min:max:step (inclusive)")

    p = sub.add_parser("verify", help="run the invariant battery on one configuration")
    _add_common(p)
    p.add_argument("--self-test", action="store_true",
                   help="also compare block propagation with the dense oracle")
    return parser


def resolve_config(args: argparse.Namespace, environ=os.environ) -> RunConfig:
    values: dict = {}
    path = args.config or environ.get(CONFIG_ENV)
    if path:
        try:
            values.update(load_config_file(path))
        except OSError as exc:
            raise UsageError(f"cannot read config file {path}: {exc}") from exc
    for flag, name in _FLAG_FIELDS.items():
        v = getattr(args, flag, None)
        if v is not None:
            values[name] = v
    return RunConfig(**values)


def _meta(cfg: RunConfig, command: str, **extra) -> dict:
    meta = {"command": command, "version": __version__, "config": cfg.as_dict()}
    meta.update(extra)
    return meta


def _emit(cfg: RunConfig, header, rows, meta: dict, stdout) -> None:
    if cfg.format == "json":
        text = rows_to_json(meta, header, rows)
    else:
        text = rows_to_csv(header, rows)
    if cfg.output_path is None:
        stdout.write(text)
        return
    try:
        atomic_write(cfg.output_path, text)
    except OSError as exc:
        raise UsageError(f"cannot write {cfg.output_path}: {exc}") from exc


def cmd_simulate(cfg: RunConfig, stdout=sys.stdout) -> int:
    traj = run_trajectory(cfg.j, cfg.eta, cfg.m0, cfg.xi_q0, cfg.grid, cfg.trunc)
    s = traj.series
    rows = zip(traj.taus, s["S_ion"], s["xi_R"], s["xi_q"], s["jz_mean"])
    meta = _meta(cfg, "simulate", n_max=traj.n_max, samples=cfg.grid.samples)
    _emit(cfg, SIMULATE_HEADER, list(rows), meta, stdout)
    return EXIT_OK


def cmd_sweep(cfg: RunConfig, axis: str, grid_spec: str, stdout=sys.stdout) -> int:
    values = parse_grid(grid_spec)
    if axis == "eta":
        rows = sweep_eta(cfg.j, cfg.xi_q0, values, cfg.grid, cfg.m0, cfg.trunc)
    else:
        rows = sweep_xi_q(cfg.j, cfg.eta, values, cfg.grid, cfg.m0, cfg.trunc)
    meta = _meta(cfg, "sweep", axis=axis, grid=grid_spec)
    _emit(cfg, SWEEP_HEADER, [r.as_tuple() for r in rows], meta, stdout)
    return EXIT_OK


# --------------------------------------------------------------------------
# verify


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str


def _spin_state(cfg: RunConfig) -> SpinState:
    if cfg.m0 == 0:
        return intelligent_state_m0_zero(cfg.j, cfg.eta)
    return intelligent_state_general(cfg.j, cfg.eta, cfg.m0)[0]


def invariant_battery(cfg: RunConfig, self_test: bool = False) -> list[Check]:
    checks = []

    def add(name, ok, detail):
        checks.append(Check(name, bool(ok), detail))

    residual = eigenstate_residual(cfg.j, cfg.eta, cfg.m0, cfg.xi_q0, cfg.trunc)
    add("eigenstate: ||H psi|| <= 1e-9", residual <= 1e-9, f"residual = {residual:.3e}")

    spin = _spin_state(cfg)
    ops = build_spin_operators(cfg.j)
    jz, _ = mean_and_variance(ops.Jz, spin.amplitudes)
    _, vx = mean_and_variance(ops.Jx, spin.amplitudes)
    _, vy = mean_and_variance(ops.Jy, spin.amplitudes)
    prod = math.sqrt(vx * vy)
    add("intelligent state: DJx DJy = |<Jz>|/2", abs(prod - abs(jz) / 2) <= 1e-10,
        f"DJx DJy = {prod:.12f}, |<Jz>|/2 = {abs(jz) / 2:.12f}")
    jz_cf, xr_cf = jz_and_xi_R_closed_form(cfg.j, cfg.eta, cfg.m0)
    xr = spectroscopic_xi_R(spin)
    err = max(abs(jz_cf - jz), abs(xr_cf - xr))
    add("closed form (<Jz>, xi_R) matches state", err <= 1e-9, f"max deviation = {err:.3e}")

    traj = run_trajectory(cfg.j, cfg.eta, cfg.m0, cfg.xi_q0, cfg.grid, cfg.trunc,
                          check_conservation=True)
    rep = traj.conservation
    add("conservation: norm, <H>, <H^2> drift <= 1e-9",
        max(rep.norm_drift, rep.energy_drift, rep.energy2_drift) <= 1e-9,
        f"norm {rep.norm_drift:.1e}, <H> {rep.energy_drift:.1e}, <H^2> {rep.energy2_drift:.1e}")
    add("marginal entropies equal within 1e-8", rep.entropy_gap <= 1e-8,
        f"max |S_ion - S_osc| = {rep.entropy_gap:.1e}")
    add("reduced densities PSD within 1e-10", rep.min_eigenvalue >= -1e-10,
        f"min eigenvalue = {rep.min_eigenvalue:.1e}")
    s_ion = traj.series["S_ion"]
    bound = math.log(int(2 * cfg.j) + 1)
    add("entropy within [0, ln(2j+1)]", s_ion.min() >= 0 and s_ion.max() <= bound + 1e-9,
        f"S_ion in [{s_ion.min():.3e}, {s_ion.max():.3e}], bound {bound:.6f}")
    add("initial entropy zero", s_ion[0] <= 1e-12, f"S_ion(0) = {s_ion[0]:.1e}")

    if self_test:
        worst = _oracle_self_test()
        add("self-test: block vs dense propagation <= 1e-8", worst <= 1e-8,
            f"max amplitude difference = {worst:.3e}")
    return checks


def _oracle_self_test(seed: int = 20240601, n_states: int = 20, n_max: int = 40) -> float:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_states):
        c = rng.normal(size=3) + 1j * rng.normal(size=3)
        b = rng.normal(size=n_max + 1) + 1j * rng.normal(size=n_max + 1)
        st = decompose(SpinState.from_unnormalized(1, c), OscState.from_unnormalized(b))
        for tau in (1.0, 5.0, 10.0):
            diff = evolve(st, tau).flatten() - dense_propagator_oracle(st, tau).flatten()
            worst = max(worst, float(np.max(np.abs(diff))))
    return worst


def cmd_verify(cfg: RunConfig, self_test: bool = False, stdout=sys.stdout) -> int:
    checks = invariant_battery(cfg, self_test)
    for c in checks:
        stdout.write(f"{'PASS' if c.passed else 'FAIL'}  {c.name}  ({c.detail})\n")
    failed = [c for c in checks if not c.passed]
    if failed:
        stdout.write(f"{len(failed)} check(s) failed: {', '.join(c.name for c in failed)}\n")
        return EXIT_NUMERICAL
    stdout.write(f"all {len(checks)} checks passed\n")
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    out = sys.stdout
    try:
        cfg = resolve_config(args)
        if args.command == "simulate":
            return cmd_simulate(cfg, out)
        if args.command == "sweep":
            return cmd_sweep(cfg, args.axis, args.grid, out)
        return cmd_verify(cfg, args.self_test, out)
    except BrokenPipeError:
        # reader went away (e.g. piped into head); silence the flush at exit
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        return EXIT_OK
    except (DomainError, UsageError) as exc:
        print(f"squeeze-dyn: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NumericalError, TruncationError) as exc:
        print(f"squeeze-dyn: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
