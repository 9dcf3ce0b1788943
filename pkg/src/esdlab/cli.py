"""Command-line front end: ``esdlab evolve | esd | sweep | verify``.

Exit codes: 0 success, 1 verification failure, 2 usage or config error,
3 internal consistency failure.
"""

from __future__ import annotations

import argparse
import csv
import datetime
import io
import json
import math
import os
import platform
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .densmat import fidelity_with_projector, max_entangled, min_eigenvalue
from .dephasing import NoiseModel, NoiseParams, NoiseScenario, decay_factors, evolve
from .esd import esd_time_analytic, esd_time_numeric, fidelity, gap
from .isotropic import eof_isotropic, isotropic_fidelity, make_isotropic
from .verify import FAULTS, run_verification

EXIT_OK, EXIT_VERIFY, EXIT_USAGE, EXIT_INTERNAL = 0, 1, 2, 3
DEFAULT_TOL = 1e-12
TOL_ENV = "ESDLAB_TOL"

EVOLVE_FIELDS = ("t", "gamma_tilde", "fidelity", "gap", "eof_bits", "min_eigenvalue", "isotropy_residual")
SWEEP_FIELDS = (
    "d",
    "f0",
    "model",
    "scenario",
    "status",
    "gamma_tilde_star",
    "death_time",
    "analytic_time",
    "abs_rel_error",
    "error",
)


class ConfigError(Exception):
    pass


class ConsistencyError(Exception):
    pass


def _num(x):
    """12 significant digits, locale independent."""
    if x is None:
        return None
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return int(x)
    return float(format(float(x), ".12g"))


def _csv_cell(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return format(x, ".12g")
    return str(x)


def render(rows: Sequence[dict], fields: Sequence[str], fmt: str) -> str:
    if fmt == "json":
        out = [{k: (_num(r.get(k)) if isinstance(r.get(k), (int, float)) else r.get(k)) for k in fields} for r in rows]
        return json.dumps(out, indent=2) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(fields)
    for r in rows:
        w.writerow([_csv_cell(r.get(k)) for k in fields])
    return buf.getvalue()


def _emit(text: str, out: Optional[str]) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
        return
    with open(out, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _emit_meta(args: argparse.Namespace, argv: Sequence[str]) -> None:
    meta = {
        "esdlab_version": __version__,
        "argv": list(argv),
        "utc_time": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "python": platform.python_version(),
        "numpy": np.__version__,
    }
    text = json.dumps(meta, indent=2) + "\n"
    if args.out and args.out != "-":
        with open(args.out + ".meta.json", "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stderr.write(text)


@dataclass(frozen=True)
class SweepConfig:
    d_values: tuple[int, ...]
    f0_values: tuple  # floats or the token "paper"
    model: NoiseModel
    scenario: NoiseScenario
    rates: NoiseParams
    t_max: float = 5.0
    t_steps: int = 51
    output_format: str = "csv"

    def __post_init__(self):
        if not self.d_values:
            raise ConfigError("no dimensions given")
        if any(d < 2 for d in self.d_values):
            raise ConfigError(f"dimensions must be >= 2, got {list(self.d_values)}")
        if not self.f0_values:
            raise ConfigError("no initial fidelities given")
        for f in self.f0_values:
            if f != "paper" and not 0.0 <= f <= 1.0:
                raise ConfigError(f"initial fidelity {f} outside [0, 1]")
        if self.t_steps < 2:
            raise ConfigError("--steps must be >= 2")
        if not (math.isfinite(self.t_max) and self.t_max >= 0.0):
            raise ConfigError("--t-max must be finite and >= 0")


def resolve_f0(token, d: int) -> float:
    return 1.0 / (d - 1) if token == "paper" else float(token)


def _parse_d_tokens(tokens: Sequence[str]) -> tuple[int, ...]:
    """Accepts ``3``, ``3,4,5`` and inclusive ranges ``3..10``."""
    out = []
    for tok in tokens:
        for part in str(tok).split(","):
            part = part.strip()
            if not part:
                continue
            try:
                if ".." in part:
                    lo, hi = part.split("..")
                    out.extend(range(int(lo), int(hi) + 1))
                else:
                    out.append(int(part))
            except ValueError:
                raise ConfigError(f"bad dimension token {part!r}") from None
    return tuple(out)


def _parse_f0_tokens(tokens: Sequence[str]) -> tuple:
    out = []
    for tok in tokens:
        for part in str(tok).split(","):
            part = part.strip()
            if not part:
                continue
            if part == "paper":
                out.append("paper")
                continue
            try:
                out.append(float(part))
            except ValueError:
                raise ConfigError(f"bad initial fidelity token {part!r}") from None
    return tuple(out)


def _default_tol() -> float:
    env = os.environ.get(TOL_ENV)
    if env is None:
        return DEFAULT_TOL
    try:
        return float(env)
    except ValueError:
        raise ConfigError(f"{TOL_ENV}={env!r} is not a number") from None


def _as_list(v) -> list:
    if v is None:
        return []
    return [v] if isinstance(v, str) else list(v)


def config_from_args(args: argparse.Namespace) -> SweepConfig:
    d_values = _parse_d_tokens(_as_list(args.d))
    f0_tokens = ["paper"] if args.f0_paper else _as_list(args.f0)
    rate_a = args.rate if args.rate_a is None else args.rate_a
    rate_b = args.rate if args.rate_b is None else args.rate_b
    try:
        rates = NoiseParams(rate_a, rate_b)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return SweepConfig(
        d_values=d_values,
        f0_values=_parse_f0_tokens(f0_tokens),
        model=NoiseModel(args.model),
        scenario=NoiseScenario(args.scenario),
        rates=rates,
        t_max=getattr(args, "t_max", 5.0),
        t_steps=getattr(args, "steps", 51),
        output_format=getattr(args, "format", "csv"),
    )


def _single(cfg: SweepConfig) -> tuple[int, float]:
    if len(cfg.d_values) != 1 or len(cfg.f0_values) != 1:
        raise ConfigError("this command takes exactly one --d and one --f0")
    d = cfg.d_values[0]
    return d, resolve_f0(cfg.f0_values[0], d)


def evolve_rows(cfg: SweepConfig, verify: bool = False, tol: float = DEFAULT_TOL) -> list[dict]:
    """One row per uniformly spaced time in ``[0, t_max]``.

    ``fidelity`` and ``gap`` come from the closed forms; ``min_eigenvalue`` and
    ``isotropy_residual`` from the brute-force evolved matrix. ``eof_bits`` is
    filled only for the full model with ``d >= 3``.
    """
    d, f0 = _single(cfg)
    rho0 = make_isotropic(d, f0)
    proj = max_entangled(d)
    want_eof = cfg.model is NoiseModel.FULL and d >= 3
    if cfg.model is NoiseModel.FULL and d < 3:
        print("warning: entanglement of formation formula does not apply at d=2; eof_bits left empty", file=sys.stderr)
    rows = []
    for t in np.linspace(0.0, cfg.t_max, cfg.t_steps):
        t = float(t)
        factors = decay_factors(t, cfg.rates, cfg.scenario)
        g = factors.gamma_tilde
        f = fidelity(d, f0, cfg.model, g)
        rho = evolve(rho0, d, cfg.model, cfg.scenario, cfg.rates, t)
        if verify:
            brute = fidelity_with_projector(rho, proj)
            if abs(brute - f) > tol:
                raise ConsistencyError(
                    f"fidelity mismatch at t={t!r}: closed form {f!r} vs brute force {brute!r} (tol {tol:g})"
                )
        rows.append(
            {
                "t": t,
                "gamma_tilde": g,
                "fidelity": f,
                "gap": gap(d, f0, cfg.model, g),
                "eof_bits": eof_isotropic(d, f).eof if want_eof else None,
                "min_eigenvalue": min_eigenvalue(rho.matrix),
                "isotropy_residual": isotropic_fidelity(rho, d).residual,
            }
        )
    return rows


def _is_canonical_family(d: int, f0: float) -> bool:
    return d >= 3 and abs(f0 - 1.0 / (d - 1)) <= 1e-15


def esd_report(d: int, f0: float, cfg: SweepConfig) -> dict:
    r = esd_time_numeric(d, f0, cfg.model, cfg.scenario, cfg.rates)
    analytic = None
    if _is_canonical_family(d, f0) and r.effective_rate > 0.0:
        analytic = esd_time_analytic(d, cfg.model, r.effective_rate)
    interp = (
        "entanglement_sudden_death"
        if cfg.model is NoiseModel.FULL and d >= 3
        else "fidelity_threshold_crossing"
    )
    return {
        "d": d,
        "f0": f0,
        "model": cfg.model.value,
        "scenario": cfg.scenario.value,
        "status": r.status.value,
        "death_time": r.death_time,
        "gamma_tilde_star": r.gamma_tilde_star,
        "f_infinity": r.f_infinity,
        "gap_at_zero": r.gap_at_zero,
        "effective_rate": r.effective_rate,
        "analytic_time": analytic,
        "interpretation": interp,
    }


def sweep_row(d: int, token, cfg: SweepConfig) -> dict:
    row = {"d": d, "model": cfg.model.value, "scenario": cfg.scenario.value}
    try:
        f0 = resolve_f0(token, d)
        row["f0"] = f0
        rep = esd_report(d, f0, cfg)
        row.update(
            status=rep["status"],
            gamma_tilde_star=rep["gamma_tilde_star"],
            death_time=rep["death_time"],
            analytic_time=rep["analytic_time"],
        )
        if rep["analytic_time"] is not None and rep["death_time"] is not None:
            row["abs_rel_error"] = abs(rep["death_time"] - rep["analytic_time"]) / rep["analytic_time"]
    except Exception as exc:  # one bad row must not abort the sweep
        row["error"] = f"{type(exc).__name__}: {exc}"
    return row


def sweep_rows(cfg: SweepConfig, jobs: int = 1) -> list[dict]:
    grid = [(d, tok) for d in cfg.d_values for tok in cfg.f0_values]
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(lambda p: sweep_row(p[0], p[1], cfg), grid))
    return [sweep_row(d, tok, cfg) for d, tok in grid]


def _add_common(p: argparse.ArgumentParser, multi: bool = False) -> None:
    nargs = "+" if multi else None
    p.add_argument("--d", nargs=nargs, required=True, help="local dimension" + (" (e.g. 3 4 or 3..10)" if multi else ""))
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--f0", nargs=nargs, help="initial fidelity" + (" values, or 'paper'" if multi else ""))
    g.add_argument("--f0-paper", action="store_true", help="use F0 = 1/(d-1)")
    p.add_argument("--model", choices=[m.value for m in NoiseModel], default="full")
    p.add_argument("--scenario", choices=[s.value for s in NoiseScenario], default="both")
    p.add_argument("--rate", type=float, default=1.0, help="dephasing rate for both sides")
    p.add_argument("--rate-a", type=float, default=None)
    p.add_argument("--rate-b", type=float, default=None)
    p.add_argument("--out", default=None, help="output path (default stdout)")
    p.add_argument("--meta", action="store_true", help="write run metadata (to OUT.meta.json or stderr)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="esdlab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("evolve", help="fidelity / gap / E_f time series")
    _add_common(p)
    p.add_argument("--t-max", type=float, default=5.0)
    p.add_argument("--steps", type=int, default=51)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--verify", action="store_true", help="cross-check every row against brute-force evolution")
    p.add_argument("--tol", type=float, default=None, help=f"cross-check tolerance (default ${TOL_ENV} or {DEFAULT_TOL:g})")

    p = sub.add_parser("esd", help="death time and classification for one (d, F0)")
    _add_common(p)

    p = sub.add_parser("sweep", help="ESD-time table over dimensions and initial fidelities")
    _add_common(p, multi=True)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--jobs", type=int, default=1, help="worker threads; row order is unaffected")

    p = sub.add_parser("verify", help="run the built-in cross-check suites")
    p.add_argument("--dmax", type=int, default=6, help="largest d in the brute-force oracle grids")
    p.add_argument("--inject-fault", choices=sorted(FAULTS), default=None, help=argparse.SUPPRESS)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)  # exits with 2 on usage errors

    if args.command == "verify":
        if args.dmax < 2:
            print("error: --dmax must be >= 2", file=sys.stderr)
            return EXIT_USAGE
        report = run_verification(args.dmax, args.inject_fault)
        print("\n".join(report.lines()))
        failed = [s.name for s in report.suites if not s.passed]
        print(f"{len(report.suites) - len(failed)}/{len(report.suites)} suites passed")
        if failed:
            print("failed suites: " + ", ".join(failed))
            return EXIT_VERIFY
        return EXIT_OK

    try:
        cfg = config_from_args(args)
        if args.command == "evolve":
            tol = args.tol if args.tol is not None else _default_tol()
            text = render(evolve_rows(cfg, args.verify, tol), EVOLVE_FIELDS, cfg.output_format)
        elif args.command == "esd":
            d, f0 = _single(cfg)
            rep = {k: (_num(v) if isinstance(v, float) else v) for k, v in esd_report(d, f0, cfg).items()}
            text = json.dumps(rep, indent=2) + "\n"
        else:
            text = render(sweep_rows(cfg, max(1, args.jobs)), SWEEP_FIELDS, cfg.output_format)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConsistencyError as exc:
        print(f"internal consistency failure: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    _emit(text, args.out)
    if args.meta:
        _emit_meta(args, argv)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
