"""Command-line driver.

Subcommands
-----------
``modes``     list the duct modes at the run frequency.
``solve``     solve one frequency; write field, coefficients and a JSON report.
``sweep``     coefficients over a frequency range plus a gnuplot script.
``validate``  run the cross-method invariant suite on a configuration.

Configuration files are flat ``key = value`` text with ``#`` comments.
Recognised keys: ``n1 n2 N1 N2`` (or ``l l0`` for the symmetric normal
form), ``omega``, ``sweep`` (``A:B:K``), ``eps``, ``p``, ``window``, ``mr``,
``method``, ``initial_nodes``, ``tol``, ``max_doublings``, ``out``.
Command-line flags override the file.

Exit codes: 0 success, 1 failed invariant (``validate``), 2 invalid
configuration, 3 degenerate configuration, 4 non-convergence.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, replace
from pathlib import Path
from typing import Optional

import numpy as np

from .lattice_core import (RESONANT_OMEGAS, AdmissibilityError, ConvergenceError,
                           DegenerateConfigurationError, LatticeError, LatticeFrequency,
                           WaveguideGeometry, cutoff_frequency, helmholtz_residual,
                           incident_field, modes, upper_cutoff_frequency)
from .lattice_green_bae import TailoredGreen, field_bae, solve_bae
from .quadrature import QuadraturePolicy
from .scattering_analysis import (ScatteringCoefficients, coefficients_analytic,
                                  coefficients_numeric, group_velocity)
from .wh_pole_removal import assemble_and_solve_system

logger = logging.getLogger(__name__)

EXIT_OK, EXIT_INVARIANT, EXIT_CONFIG, EXIT_DEGENERATE, EXIT_CONVERGENCE = 0, 1, 2, 3, 4
#: Sweep points closer than this to a cut-off or resonance are skipped.
SWEEP_GUARD = 1e-6
EPS_ENV = "LATTICE_WH_EPS"


class ConfigError(ValueError):
    """Invalid run configuration."""


def fmt(v: float) -> str:
    """Round-trip decimal representation (17 significant digits)."""
    return format(float(v), ".17g")


@dataclass
class RunConfig:
    """Validated run configuration."""

    n1: int = 0
    n2: int = 9
    N1: int = 10
    N2: int = 19
    omega: Optional[float] = 1.5
    sweep: Optional[tuple] = None
    eps: float = 0.0
    p: int = 1
    window: int = 10
    mr: int = 40
    method: str = "wh"
    initial_nodes: int = 1024
    tol: float = 1e-11
    max_doublings: int = 10
    out: str = "out"

    @property
    def geometry(self) -> WaveguideGeometry:
        return WaveguideGeometry(self.n1, self.n2, self.N1, self.N2)

    @property
    def policy(self) -> QuadraturePolicy:
        return QuadraturePolicy.from_doublings(self.initial_nodes, self.tol, self.max_doublings)

    def frequency(self, omega: Optional[float] = None) -> LatticeFrequency:
        return LatticeFrequency(self.omega if omega is None else omega, self.eps)

    def validate(self) -> None:
        try:
            g = self.geometry
            if not (1 <= self.p <= g.N - 1):
                raise ConfigError(f"p={self.p} outside [1, N-1={g.N - 1}]")
            if self.method not in ("wh", "bae", "both"):
                raise ConfigError(f"method must be wh, bae or both, not {self.method!r}")
            if self.window < 1 or self.mr < 1:
                raise ConfigError("window and mr must be >= 1")
            if self.omega is not None:
                self.frequency()
            if self.sweep is not None:
                a, b, k = self.sweep
                if not (0 < a < b) or k < 1:
                    raise ConfigError(f"bad sweep {self.sweep}")
        except AdmissibilityError as exc:
            raise ConfigError(str(exc)) from exc


_INT_KEYS = {"n1", "n2", "N1", "N2", "p", "window", "mr", "initial_nodes", "max_doublings",
             "l", "l0"}
_FLOAT_KEYS = {"omega", "eps", "tol"}


def parse_sweep(text: str) -> tuple:
    try:
        a, b, k = text.split(":")
        return float(a), float(b), int(k)
    except ValueError as exc:
        raise ConfigError(f"sweep must be A:B:K, got {text!r}") from exc


def parse_config_text(text: str) -> dict:
    """Parse ``key = value`` lines into typed values."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        try:
            if key in _INT_KEYS:
                out[key] = int(value)
            elif key in _FLOAT_KEYS:
                out[key] = float(value)
            elif key == "sweep":
                out[key] = parse_sweep(value)
            elif key in ("method", "out"):
                out[key] = value
            else:
                raise ConfigError(f"line {lineno}: unknown key {key!r}")
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key}: {value!r}") from exc
    return out


def build_config(args: argparse.Namespace) -> RunConfig:
    values = {}
    if getattr(args, "config", None):
        try:
            values = parse_config_text(Path(args.config).read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
    if "l" in values or "l0" in values:
        if "l" not in values or "l0" not in values:
            raise ConfigError("l and l0 must be given together")
        l, l0 = values.pop("l"), values.pop("l0")
        values.update(n1=0, n2=l0 - 1, N1=l, N2=l + l0 - 1)
    for key in ("method", "p", "mr", "out"):
        v = getattr(args, key, None)
        if v is not None:
            values[key] = v
    if getattr(args, "omega", None) is not None:
        values["omega"], values["sweep"] = args.omega, None
    if getattr(args, "sweep", None):
        values["sweep"] = parse_sweep(args.sweep)
    if os.environ.get(EPS_ENV):
        try:
            values["eps"] = float(os.environ[EPS_ENV])
        except ValueError as exc:
            raise ConfigError(f"{EPS_ENV} is not a number") from exc
    cfg = RunConfig(**values)
    cfg.validate()
    return cfg


# ---------------------------------------------------------------------------
# Computations
# ---------------------------------------------------------------------------

def sweep_points(cfg: RunConfig) -> list:
    """Admissible sweep frequencies; points near cut-offs or resonances are dropped."""
    a, b, k = cfg.sweep
    N = cfg.geometry.N
    bad = list(RESONANT_OMEGAS) + [cutoff_frequency(j, N) for j in range(1, N)] \
        + [upper_cutoff_frequency(j, N) for j in range(1, N)]
    pts = []
    for om in np.linspace(a, b, k):
        near = min(abs(om - c) for c in bad)
        if near < SWEEP_GUARD or not (0 < om < 2 * np.sqrt(2)):
            logger.info("skipping omega=%.12g (within %.0e of a cut-off or resonance)",
                        om, SWEEP_GUARD)
            continue
        if not (cutoff_frequency(cfg.p, N) < om < upper_cutoff_frequency(cfg.p, N)):
            logger.info("skipping omega=%.12g (incident mode not propagating)", om)
            continue
        pts.append(float(om))
    return pts


def coefficient_rows(coef: ScatteringCoefficients, method: str) -> list:
    return [[fmt(coef.omega), mc.q, fmt(mc.R.real), fmt(mc.R.imag), fmt(mc.T.real),
             fmt(mc.T.imag), fmt(mc.R_weighted), fmt(mc.T_weighted), fmt(mc.group_velocity),
             fmt(coef.energy_residual), method] for mc in coef.modes]


COEF_HEADER = ["omega", "q", "re_R", "im_R", "re_T", "im_T", "abs_R_weighted",
               "abs_T_weighted", "group_velocity", "energy_residual", "method"]
FIELD_HEADER = ["m", "n", "re_sc", "im_sc", "re_tot", "im_tot"]


def wh_supported(cfg: RunConfig) -> bool:
    return cfg.geometry.symmetric and cfg.p % 2 == 1


def effective_method(cfg: RunConfig) -> str:
    """Method actually run; wh falls back to bae outside its scope."""
    if cfg.method in ("wh", "both") and not wh_supported(cfg):
        logger.warning("wh needs a symmetric geometry and odd p; using bae instead")
        return "bae"
    return cfg.method


def _wh(cfg: RunConfig, f: LatticeFrequency):
    return assemble_and_solve_system(cfg.geometry, f, cfg.p)


def _bae_coefficients(sol, cfg: RunConfig, f: LatticeFrequency) -> ScatteringCoefficients:
    cols = field_bae(sol, [-cfg.mr, cfg.mr])
    return coefficients_numeric(cols, cfg.p, cfg.mr, f, cfg.geometry)


def sweep_point(cfg: RunConfig, omega: float) -> list:
    """Coefficient rows for one sweep frequency (worker entry point)."""
    f = cfg.frequency(omega)
    rows = []
    cfg = replace(cfg, method=effective_method(cfg))
    if cfg.method in ("wh", "both"):
        rows += coefficient_rows(coefficients_analytic(_wh(cfg, LatticeFrequency(omega))), "wh")
    if cfg.method in ("bae", "both"):
        sol = solve_bae(cfg.geometry, f, cfg.p, policy=cfg.policy)
        rows += coefficient_rows(_bae_coefficients(sol, cfg, f), "bae")
    return rows


def write_field_csv(path: Path, sc, p: int, f: LatticeFrequency) -> None:
    tot = sc + incident_field(p, sc.geometry, LatticeFrequency(f.omega, f.eps), sc.m_values)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(FIELD_HEADER)
        for i, m in enumerate(sc.m_values):
            for k, n in enumerate(sc.n_values):
                s, t = sc.values[i, k], tot.values[i, k]
                w.writerow([int(m), int(n), fmt(s.real), fmt(s.imag), fmt(t.real), fmt(t.imag)])


def read_field_csv(path: Path) -> list:
    with Path(path).open(newline="") as fh:
        return list(csv.reader(fh))


def write_coefficients_csv(path: Path, rows: list) -> None:
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(COEF_HEADER)
        w.writerows(rows)


GNUPLOT_TEMPLATE = """# regenerate coefficient curves from {csv}
set datafile separator ','
set key outside
set xlabel 'Omega'
set multiplot layout 2,1
set ylabel '|R~_q|'
plot for [q in "{modes}"] '{csv}' using (column('q')==q+0 && strcol('method') eq '{method}' ? $1 : NaN):7 with lines title 'q='.q
set ylabel '|T~_q|'
plot for [q in "{modes}"] '{csv}' using (column('q')==q+0 && strcol('method') eq '{method}' ? $1 : NaN):8 with lines title 'q='.q
unset multiplot
"""


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_modes(cfg: RunConfig, stream=sys.stdout) -> list:
    g = cfg.geometry
    f = cfg.frequency()
    table = []
    w = csv.writer(stream)
    w.writerow(["j", "theta", "cutoff", "upper_cutoff", "propagating", "K", "group_velocity"])
    for md in modes(g, f):
        K = float(np.real(md.K)) % (2 * np.pi) if md.propagating else float("nan")
        v = group_velocity(md.j, f, g) if md.propagating else float("nan")
        row = [md.j, fmt(md.theta), fmt(md.cutoff), fmt(md.upper_cutoff), int(md.propagating),
               fmt(K), fmt(v)]
        table.append(row)
        w.writerow(row)
    if not any(r[4] for r in table):
        logger.warning("zero-frequency band gap: no propagating modes at omega=%g", f.omega)
    return table


def cmd_solve(cfg: RunConfig) -> dict:
    if cfg.omega is None:
        raise ConfigError("solve needs a single omega")
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    g, f = cfg.geometry, cfg.frequency()
    cfg = replace(cfg, method=effective_method(cfg))
    ms = np.arange(-cfg.window, cfg.window + 1)
    report = {"config": {k: v for k, v in asdict(cfg).items()}, "methods": {}}
    fields = {}
    if cfg.method in ("wh", "both"):
        t0 = time.perf_counter()
        sol = _wh(cfg, f)
        sc = sol.field(ms, policy=cfg.policy)
        coef = coefficients_analytic(sol if f.eps == 0 else _wh(cfg, LatticeFrequency(f.omega)))
        fields["wh"] = sc
        write_field_csv(out / "field_wh.csv", sc, cfg.p, f)
        write_coefficients_csv(out / "coefficients_wh.csv", coefficient_rows(coef, "wh"))
        report["methods"]["wh"] = {
            "energy_residual": coef.energy_residual, "u_star": [sol.u_star.real, sol.u_star.imag],
            "system_size": sol.J, "condition_number": sol.condition_number,
            "completion": [list(c) for c in sol.completion],
            "quadrature_nodes": int(sc.meta.get("nodes", 0)),
            "seconds": time.perf_counter() - t0}
    if cfg.method in ("bae", "both"):
        t0 = time.perf_counter()
        green = TailoredGreen(g, f, "quadrature", cfg.policy)
        sol_b = solve_bae(g, f, cfg.p, green)
        sc = field_bae(sol_b, ms)
        coef = _bae_coefficients(sol_b, cfg, f)
        fields["bae"] = sc
        write_field_csv(out / "field_bae.csv", sc, cfg.p, f)
        write_coefficients_csv(out / "coefficients_bae.csv", coefficient_rows(coef, "bae"))
        report["methods"]["bae"] = {
            "energy_residual": coef.energy_residual,
            "u_star": [[complex(u).real, complex(u).imag] for u in sol_b.u_star],
            "system_size": int(g.screen_rows.size), "condition_number": sol_b.system.condition,
            "quadrature_nodes": int(green.quadrature_nodes), "m_r": cfg.mr,
            "seconds": time.perf_counter() - t0}
    if len(fields) == 2:
        report["max_field_difference"] = float(np.max(np.abs(fields["wh"].values
                                                              - fields["bae"].values)))
    (out / "report.json").write_text(json.dumps(report, indent=2, default=str))
    return report


def cmd_sweep(cfg: RunConfig, jobs: int = 1) -> Path:
    if cfg.sweep is None:
        raise ConfigError("sweep needs --sweep A:B:K or a sweep key")
    pts = sweep_points(cfg)
    if not pts:
        raise ConfigError("no admissible frequencies in the sweep range")
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            results = list(ex.map(sweep_point, [cfg] * len(pts), pts))
    else:
        results = [sweep_point(cfg, om) for om in pts]
    rows = [r for res in results for r in res]
    csv_path = out / "coefficients_sweep.csv"
    write_coefficients_csv(csv_path, rows)
    qs = sorted({r[1] for r in rows})
    method = "bae" if effective_method(cfg) == "bae" else "wh"
    (out / "plot_coefficients.gp").write_text(
        GNUPLOT_TEMPLATE.format(csv=csv_path.name, modes=" ".join(map(str, qs)), method=method))
    return csv_path


def cmd_validate(cfg: RunConfig, stream=sys.stdout) -> bool:
    """Cross-method invariant suite; returns True if every check passes."""
    g, f = cfg.geometry, cfg.frequency()
    ms = np.arange(-cfg.window, cfg.window + 1)
    checks = []

    def check(name, value, tol):
        ok = bool(value <= tol)
        checks.append({"check": name, "value": float(value), "tol": tol, "pass": ok})

    green = TailoredGreen(g, f, "quadrature", cfg.policy)
    oracle = TailoredGreen(g, f, "residue")
    check("green quadrature vs residue", np.max(np.abs(green.table(4) - oracle.table(4))), 1e-10)
    sol_b = solve_bae(g, f, cfg.p, green)
    sc_b = field_bae(sol_b, ms)
    tot = sc_b + incident_field(cfg.p, g, f, ms)
    check("bae screen Dirichlet", np.max(np.abs(tot.column(0)[g.screen_rows + g.N1])), 1e-9)
    check("bae walls", max(np.max(np.abs(tot.values[:, 0])), np.max(np.abs(tot.values[:, -1]))), 0.0)
    check("bae Helmholtz residual", helmholtz_residual(tot, f), 1e-9)
    check("bae m-symmetry", np.max(np.abs(sc_b.values - sc_b.values[::-1])), 1e-9)
    if wh_supported(cfg):
        sol = _wh(cfg, f)
        sc_w = sol.field(ms, policy=cfg.policy)
        check("wh vs bae field", np.max(np.abs(sc_w.values - sc_b.values)), 1e-9)
        check("wh vs bae u*", abs(sol.u_star - sol_b.u_star_lower), 1e-9)
        check("wh Liouville constant", abs(sol.liouville_C1()), 1e-9)
        if f.eps == 0:
            check("wh energy residual", coefficients_analytic(sol).energy_residual, 1e-12)
    w = csv.writer(stream)
    w.writerow(["check", "value", "tol", "pass"])
    for c in checks:
        w.writerow([c["check"], fmt(c["value"]), c["tol"], int(c["pass"])])
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "validate.json").write_text(json.dumps(checks, indent=2))
    return all(c["pass"] for c in checks)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lattice-wh", description=__doc__.split("\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("modes", "solve", "sweep", "validate"):
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="key = value configuration file")
        sp.add_argument("--method", choices=["wh", "bae", "both"])
        grp = sp.add_mutually_exclusive_group()
        grp.add_argument("--omega", type=float)
        grp.add_argument("--sweep", help="A:B:K")
        sp.add_argument("--p", type=int)
        sp.add_argument("--mr", type=int)
        sp.add_argument("--jobs", type=int, default=1)
        sp.add_argument("--out")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = build_config(args)
        if args.command == "modes":
            cmd_modes(cfg)
        elif args.command == "solve":
            cmd_solve(cfg)
        elif args.command == "sweep":
            cmd_sweep(cfg, jobs=max(1, args.jobs))
        else:
            return EXIT_OK if cmd_validate(cfg) else EXIT_INVARIANT
    except (ConfigError, AdmissibilityError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DegenerateConfigurationError as exc:
        print(f"degenerate configuration: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except ConvergenceError as exc:
        print(f"no convergence: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except LatticeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
