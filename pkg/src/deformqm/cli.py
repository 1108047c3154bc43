"""Command-line front end: ``deformqm {canonicalize,spectrum,verify,wavefunction}``.

Every command emits a versioned table as CSV or JSON. Floats are written as
shortest round-trip decimals, so identical inputs give byte-identical files.
Exit codes: 0 success, 1 numerical failure (including a failed verification),
2 invalid input. Errors are reported as JSON on stderr.
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import io
import json
import math
import os
import sys
import warnings
from dataclasses import dataclass, field

import numpy as np
from threadpoolctl import threadpool_limits

from . import exact_spectra as es
from . import quad_algebra as qa
from . import si_oscillator as si
from .errors import DeformQMError, NotAdmissible, ParameterRange
from .fdeform import GridSpec
from .numerics import (
    ToleranceProfile,
    assemble_hamiltonian,
    cap_grid,
    eigensolve,
    pt_kinetic_cap,
    spectrum_compare,
)

SCHEMA_VERSION = 1
DEFAULT_DOMAINS = {
    "pt-hyp": (-12.0, 12.0, 4001),
    "pt-trig": (-math.pi / 2 + 1e-3, math.pi / 2 - 1e-3, 4001),
    "morse-exact": (-5.0, 30.0, 6000),
    "morse-first-order": (-5.0, 5.0, 4001),
    "morse": (-5.0, 30.0, 6000),
}


@dataclass
class Table:
    command: str
    columns: list[str]
    rows: list[list] = field(default_factory=list)
    meta: dict = field(default_factory=dict)
    ok: bool = True

    @property
    def schema(self) -> str:
        return f"deformqm.{self.command}.v{SCHEMA_VERSION}"


# ------------------------------------------------------------ serialization


def _plain(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v) + 0.0  # drop negative zero
        return v if math.isfinite(v) else None
    if isinstance(v, complex):
        return [_plain(v.real), _plain(v.imag)]
    if isinstance(v, dict):
        return {str(k): _plain(x) for k, x in v.items()}
    if isinstance(v, (list, tuple, np.ndarray)):
        return [_plain(x) for x in v]
    return v


def _cell(v) -> str:
    v = _plain(v)
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def render(table: Table, fmt: str) -> str:
    if fmt == "json":
        doc = {
            "schema": table.schema,
            "columns": table.columns,
            "rows": [_plain(r) for r in table.rows],
            "meta": _plain(table.meta),
        }
        return json.dumps(doc, indent=2, sort_keys=True, allow_nan=False) + "\n"
    buf = io.StringIO()
    buf.write(f"# schema: {table.schema}\n")
    for key in sorted(table.meta):
        buf.write(f"# {key}: {json.dumps(_plain(table.meta[key]), sort_keys=True, allow_nan=False)}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(table.columns)
    for row in table.rows:
        writer.writerow([_cell(v) for v in row])
    return buf.getvalue()


# ------------------------------------------------------------------ helpers


def _domain(text: str | None, system: str) -> tuple[float, float]:
    if text is None:
        lo, hi, _ = DEFAULT_DOMAINS[system]
        return lo, hi
    try:
        lo_s, hi_s = text.split(":")
        return float(lo_s), float(hi_s)
    except ValueError:
        raise ParameterRange("domain must look like lo:hi", domain=text) from None


def _require(args, *names):
    missing = [n for n in names if getattr(args, n, None) is None]
    if missing:
        raise ParameterRange("missing parameters: " + ", ".join("--" + n.replace("_", "-") for n in missing))


def _osc_input(args) -> si.OscFieldInput:
    if args.alpha_p is not None:
        _require(args, "beta_p")
        return si.OscFieldInput(args.alpha_p, args.beta_p, args.phi or 0.0, args.field)
    _require(args, "alpha", "beta")
    p = qa.QuadraticAlgebraParams(args.alpha, args.beta, args.kappa_re, args.kappa_im)
    n = qa.normalize_complex_kappa(p)
    report = qa.kempf_admissible(n.alpha, n.beta, n.kappa_re)
    if not report:
        raise NotAdmissible("parameters are not admissible", field=report.violations[0], violations=list(report.violations))
    rot = qa.rotate_to_canonical(n.alpha, n.beta, n.kappa_re)
    return si.OscFieldInput(rot.alpha_p, rot.beta_p, rot.phi, args.field)


# ----------------------------------------------------------------- commands


def cmd_canonicalize(args, validate_only: bool = False) -> Table:
    p = qa.QuadraticAlgebraParams(args.alpha, args.beta, args.kappa_re, args.kappa_im)
    n = qa.normalize_complex_kappa(p)
    report = qa.kempf_admissible(n.alpha, n.beta, n.kappa_re)
    if not report:
        raise NotAdmissible(
            "parameters are not reducible to Kempf form",
            field=report.violations[0],
            violations=list(report.violations),
        )
    cols = [
        "alpha", "beta", "kappa_re", "kappa_im", "operator_scale",
        "alpha_t", "beta_t", "kappa_t", "phi", "alpha_p", "beta_p", "kappa_p", "delta", "sigma",
        "admissible", "dx_min", "dp_min", "dx0", "dp0", "gamma_exp",
    ]
    table = Table("canonicalize", cols)
    if validate_only:
        return table
    rot = qa.rotate_to_canonical(n.alpha, n.beta, n.kappa_re)
    mu = qa.minimal_uncertainties(p, qa.ExpectationContext(args.mean_x, args.mean_p))
    table.rows.append([
        p.alpha, p.beta, p.kappa_re, p.kappa_im, n.operator_scale,
        n.alpha, n.beta, n.kappa_re, rot.phi, rot.alpha_p, rot.beta_p, rot.kappa_p, rot.delta, rot.sigma,
        True, mu.dx_min, mu.dp_min, mu.dx0, mu.dp0, mu.gamma_exp,
    ])
    return table


def cmd_spectrum(args, validate_only: bool = False) -> Table:
    system = args.system
    if system == "osc-field":
        inp = _osc_input(args)
        init = si.factorize(inp)
        levels = 6 if args.levels is None else args.levels
        table = Table("spectrum", ["n", "E", "E_field_off", "dE1", "dE2"])
        table.meta.update(system=system, alpha_p=inp.alpha_p, beta_p=inp.beta_p, phi=inp.phi, field_E=inp.field_E)
        if validate_only:
            return table
        ladder = si.si_ladder(init, levels - 1)
        table.meta.update(q=ladder.q, t=ladder.t, K=ladder.K)
        for n in range(levels):
            lv = si.energy_spectrum(ladder, n)
            table.rows.append([n, lv.E, lv.E_field_off, lv.dE1, lv.dE2])
        return table

    cols = ["n", "E_exact", "E_first_order", "delta_n", "validity_flag"]
    table = Table("spectrum", cols, meta={"system": system})
    if system == "pt-hyp":
        _require(args, "A", "beta")
        es.pt_hyp_params(args.A, args.beta)
        if validate_only:
            return table
        report = es.pt_hyp_spectrum(args.A, args.beta)
    elif system == "pt-trig":
        _require(args, "A", "beta")
        levels = 6 if args.levels is None else args.levels
        if validate_only:
            es.pt_trig_energy(args.A, args.beta, 0)
            return table
        report = es.pt_trig_spectrum(args.A, args.beta, levels)
    elif system == "morse":
        _require(args, "A", "B", "beta")
        p, report = es.morse_spectrum(args.A, args.B, args.beta, strict=args.strict)
        if validate_only:
            return table
        table.meta.update(exists=p.exists, bracket=list(p.bracket), existence_bound=es.morse_existence_bound(args.A, args.B))
    else:
        raise ParameterRange(f"unknown system {system!r}")
    table.meta.update(report.params)
    table.meta.update(n_max=report.n_max, beta_validity_bound=report.beta_validity_bound)
    levels = report.levels if args.levels is None else report.levels[: args.levels]
    for lv in levels:
        table.rows.append([lv.n, lv.E_exact, lv.E_first_order, lv.delta_n, lv.validity_flag])
    return table


def cmd_verify(args, validate_only: bool = False) -> Table:
    system = args.system
    lo, hi = _domain(args.domain, system)
    n_points = args.grid_points or DEFAULT_DOMAINS[system][2]
    grid = GridSpec(lo, hi, n_points)
    params = {"A": args.A, "beta": args.beta}
    if system.startswith("morse"):
        _require(args, "A", "B", "beta")
        params["B"] = args.B
        _, report = es.morse_spectrum(args.A, args.B, args.beta, strict=True)
    elif system == "pt-hyp":
        _require(args, "A", "beta")
        report = es.pt_hyp_spectrum(args.A, args.beta)
        if not args.no_cap:
            grid = cap_grid(grid, pt_kinetic_cap(args.beta))
    elif system == "pt-trig":
        _require(args, "A", "beta")
        report = es.pt_trig_spectrum(args.A, args.beta, args.levels or 2)
    else:
        raise ParameterRange(f"unknown system {system!r}")
    levels = min(args.levels or len(report.levels), len(report.levels))
    cols = ["n", "analytic", "numeric", "abs_err", "rel_err", "budget", "passed", "residual"]
    table = Table("verify", cols, meta={"system": system, **params})
    op = assemble_hamiltonian(system, params, grid, accuracy=args.accuracy)
    table.meta.update(x_lo=grid.x_lo, x_hi=grid.x_hi, n_points=grid.n_points, h=grid.h, accuracy=args.accuracy)
    if validate_only:
        return table
    result = eigensolve(op, levels)
    exact_rep = system == "morse-exact"
    profile = ToleranceProfile.nominal(args.budget, grid.h, args.beta, exact_representation=exact_rep)
    target = "first_order" if system in ("pt-trig", "morse-first-order") else "exact"
    comparison = spectrum_compare(report, result, profile, target=target)
    for row, res in zip(comparison.rows, result.residuals):
        table.rows.append([row.n, row.analytic, row.numeric, row.abs_err, row.rel_err, row.budget, row.passed, res])
    table.meta.update(passed=comparison.passed, negative_eigenvalues=int(np.sum(result.eigenvalues < 0)))
    table.ok = comparison.passed
    return table


def cmd_wavefunction(args, validate_only: bool = False) -> Table:
    system = args.system
    lo, hi = _domain(args.domain, system)
    x = np.linspace(lo, hi, args.samples)
    table = Table("wavefunction", ["x", "re_psi", "abs_psi2"], meta={"system": system, "n": args.n})
    if system == "pt-hyp":
        _require(args, "A", "beta")
        es.pt_hyp_params(args.A, args.beta)
        if args.n not in (0, 1):
            raise ParameterRange("pt-hyp wavefunctions are available for n = 0 and n = 1", n=args.n)
        if validate_only:
            return table
        gs = es.pt_hyp_groundstate(args.A, args.beta, x)
        table.meta.update(A=args.A, beta=args.beta, C=gs.C, D=gs.D, N0=gs.N0)
        psi = gs.psi if args.n == 0 else es.pt_hyp_first_excited(args.A, args.beta, x)
    elif system == "morse":
        _require(args, "A", "B", "beta")
        p = es.morse_params(args.A, args.B, args.beta, strict=True)
        if validate_only:
            return table
        wf = es.morse_wavefunction(p, args.n, x)
        psi = wf.psi
        table.meta.update(
            A=args.A, B=args.B, beta=args.beta, nu=wf.nu, rho=wf.rho,
            c_j=list(wf.coefficients), exponents=list(wf.exponents), orders=list(wf.orders),
        )
    else:
        raise ParameterRange(f"unknown system {system!r}")
    for xi, v in zip(x, psi):
        table.rows.append([xi, v, v * v])
    return table


COMMANDS = {
    "canonicalize": cmd_canonicalize,
    "spectrum": cmd_spectrum,
    "verify": cmd_verify,
    "wavefunction": cmd_wavefunction,
}


# ------------------------------------------------------------------ parsing


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="deformqm", description=__doc__.splitlines()[0])
    parser.add_argument("--config", help="JSON file keyed by command name")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--out", help="output file (default: stdout)")
    common.add_argument("--validate-only", action="store_true", help="check inputs and exit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("canonicalize", parents=[common], help="rotate a quadratic algebra to Kempf form")
    p.add_argument("--alpha", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--kappa-re", type=float, default=0.0)
    p.add_argument("--kappa-im", type=float, default=0.0)
    p.add_argument("--mean-x", type=float, default=0.0)
    p.add_argument("--mean-p", type=float, default=0.0)

    p = sub.add_parser("spectrum", parents=[common], help="closed-form energy levels")
    p.add_argument("--system", choices=("osc-field", "pt-hyp", "pt-trig", "morse"))
    _add_model_options(p)
    p.add_argument("--alpha", type=float)
    p.add_argument("--kappa-re", type=float, default=0.0)
    p.add_argument("--kappa-im", type=float, default=0.0)
    p.add_argument("--alpha-p", type=float)
    p.add_argument("--beta-p", type=float)
    p.add_argument("--phi", type=float)
    p.add_argument("--field", type=float, default=0.0)
    p.add_argument("--levels", type=int)
    p.add_argument("--strict", action="store_true", help="raise when no bound state exists")

    p = sub.add_parser("verify", parents=[common], help="grid eigenvalues against closed forms")
    p.add_argument("--system", choices=("pt-hyp", "pt-trig", "morse-exact", "morse-first-order"))
    _add_model_options(p)
    p.add_argument("--grid-points", type=int)
    p.add_argument("--domain", help="lo:hi")
    p.add_argument("--levels", type=int)
    p.add_argument("--accuracy", type=int, choices=(2, 4), default=2)
    p.add_argument("--budget", type=float, default=5e-4, help="total error budget at the given (h, beta)")
    p.add_argument("--no-cap", action="store_true", help="do not shrink PT grids to the positive-kinetic region")

    p = sub.add_parser("wavefunction", parents=[common], help="sampled eigenfunctions")
    p.add_argument("--system", choices=("pt-hyp", "morse"))
    _add_model_options(p)
    p.add_argument("--n", type=int, default=0)
    p.add_argument("--samples", type=int, default=201)
    p.add_argument("--domain", help="lo:hi")
    return parser


def _add_model_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--A", type=float)
    p.add_argument("--B", type=float)
    p.add_argument("--beta", type=float)


def _apply_config(parser: argparse.ArgumentParser, argv: list[str], args: argparse.Namespace):
    if not args.config:
        return args
    try:
        with open(args.config, encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ParameterRange("cannot read config file", path=args.config, reason=str(exc)) from None
    section = doc.get(args.command, {}) if isinstance(doc, dict) else None
    if not isinstance(section, dict):
        raise ParameterRange("config must be a JSON object keyed by command name")
    known = set(vars(args))
    section = {k.replace("-", "_"): v for k, v in section.items()}
    unknown = sorted(set(section) - known)
    if unknown:
        raise ParameterRange("unknown config keys", keys=unknown)
    subparser = parser._subparsers._group_actions[0].choices[args.command]
    subparser.set_defaults(**section)
    return parser.parse_args(argv)


def _run(argv: list[str]) -> tuple[Table, str]:
    parser = build_parser()
    args = parser.parse_args(argv)
    args = _apply_config(parser, argv, args)
    if args.command == "canonicalize":
        _require(args, "alpha", "beta")
    elif args.system is None:
        raise ParameterRange("--system is required")
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        table = COMMANDS[args.command](args, validate_only=args.validate_only)
    notes = sorted({str(w.message) for w in caught})
    if notes:
        table.meta["warnings"] = notes
        for msg in notes:
            print(f"warning: {msg}", file=sys.stderr)
    if args.validate_only:
        table.meta["validated"] = True
    return table, args


def _thread_limit():
    value = os.environ.get("DEFORMQM_THREADS")
    if not value:
        return contextlib.nullcontext()
    try:
        n = int(value)
    except ValueError:
        raise ParameterRange("DEFORMQM_THREADS must be a positive integer", value=value) from None
    if n < 1:
        raise ParameterRange("DEFORMQM_THREADS must be a positive integer", value=value)
    return threadpool_limits(limits=n)


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        with _thread_limit():
            table, args = _run(argv)
        text = render(table, args.format)
        if args.out:
            with open(args.out, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
    except DeformQMError as exc:
        print(json.dumps(_plain(exc.to_dict()), sort_keys=True), file=sys.stderr)
        return exc.exit_code
    return 0 if table.ok else 1


if __name__ == "__main__":
    sys.exit(main())
