"""Command-line front end.

Exit status: 0 success, 1 invalid input, 2 numerical failure.  Errors are
reported as one JSON object on stderr.
"""
from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import cox2, perturbation, potential, scattering, spectrum
from .errors import CoxError, ThresholdCritical
from .fileio import csv_text, dumps, fmt, load_json, load_model, parse_complex, write_text
from .model import ChannelModel, SheetSignature, all_sheets, validate

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2


class InputError(Exception):
    """Invalid command-line or file input; carries optional violation list."""

    def __init__(self, message: str, violations=None):
        super().__init__(message)
        self.violations = violations or []


class NumericFailure(Exception):
    """Computation finished but flagged an unreliable result."""

    def __init__(self, message: str, detail=None):
        super().__init__(message)
        self.detail = detail


# --------------------------------------------------------------------------
# argument helpers

def parse_grid(text: str) -> np.ndarray:
    """``MIN:MAX:N`` -> N evenly spaced points."""
    parts = text.split(":")
    if len(parts) != 3:
        raise InputError(f"grid must be MIN:MAX:N, got {text!r}")
    try:
        lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as exc:
        raise InputError(f"bad grid {text!r}: {exc}") from None
    if n < 2 or not hi > lo:
        raise InputError("grid needs MAX > MIN and at least 2 points")
    return np.linspace(lo, hi, n)


def parse_tolerances(items) -> spectrum.Tolerances:
    values = {}
    for item in items or []:
        name, sep, value = item.partition("=")
        if not sep:
            raise InputError(f"--tol expects NAME=VALUE, got {item!r}")
        try:
            values[name.strip()] = float(value)
        except ValueError:
            raise InputError(f"tolerance {name} is not a number: {value!r}") from None
    try:
        return spectrum.DEFAULT_TOL.updated(**values)
    except ValueError as exc:
        raise InputError(str(exc)) from None


def read_model(path, require_valid: bool = True) -> ChannelModel:
    if path is None:
        raise InputError("--model is required")
    try:
        model = load_model(path)
    except (OSError, KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read model {path}: {exc}") from None
    report = validate(model)
    if require_valid and not report.ok:
        raise InputError("model failed validation", report.violations)
    return model


def emit(path, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        write_text(path, text)


def _lines(*rows) -> str:
    return "".join(r + "\n" for r in rows)


# --------------------------------------------------------------------------
# commands

def cmd_analyze(args) -> int:
    model = read_model(args.model)
    tol = parse_tolerances(args.tol)
    points = spectrum.solve_spectrum(model, tol)
    report = spectrum.spectrum_report(points, model)
    try:
        report["count_bound_states"] = spectrum.count_bound_states(model, tol.critical)
    except ThresholdCritical:
        report["count_bound_states"] = None
    report["model"] = model.to_dict()
    emit(args.out, dumps(report))
    t = report["tally"]
    summary = _lines(
        f"bound {t['n_b']}  virtual {t['n_v']}  resonance pairs {t['n_r']}  "
        f"cancelled {t['n_cancelled']}  degenerate {t['n_degenerate']}",
        f"total {t['n_b'] + t['n_v'] + 2 * t['n_r'] + t['n_cancelled'] + t['n_degenerate']}"
        f" of {t['expected_total']}",
        *(f"{p.kind:16s} E = {fmt(p.energy.real)} {'+-'[p.energy.imag < 0]} "
          f"{fmt(abs(p.energy.imag))}i  sheet {p.sheet}" for p in points),
    )
    (sys.stderr if args.out in (None, "-") else sys.stdout).write(summary)
    if t["n_degenerate"] or not t["conserved"]:
        raise NumericFailure("spectrum contains unresolved or degenerate zeros", t)
    return EXIT_OK


def cmd_curves(args) -> int:
    model = read_model(args.model)
    n = model.n_channels
    if args.sheet:
        try:
            sheets = [SheetSignature.parse(args.sheet)]
        except ValueError as exc:
            raise InputError(f"bad sheet {args.sheet!r}: {exc}") from None
        if len(sheets[0].signs) != n:
            raise InputError(f"sheet needs {n} signs")
    else:
        sheets = all_sheets(n)
    bound = spectrum.imaginary_zero_bound(model) + 1.0
    grid = parse_grid(args.grid) if args.grid else np.linspace(-bound, bound, 801)
    header = ["sheet", "kbar1"] + [f"lambda_{j + 1}" for j in range(n)]
    rows, found = [], []
    for s in sheets:
        curve = spectrum.eigenvalue_curves(model, s, grid)
        rows.extend([str(s), float(x), *map(float, lam)] for x, lam in zip(grid, curve.eigenvalues))
        found.extend((str(s), j + 1, x) for j, x in curve.crossings)
    emit(args.out, csv_text(header, rows))
    summary = _lines(*(f"sheet {s} eigenvalue {j} crosses zero at kbar1 = {fmt(x)}"
                       for s, j, x in found))
    (sys.stderr if args.out in (None, "-") else sys.stdout).write(summary)
    return EXIT_OK


def cmd_perturb(args) -> int:
    model = read_model(args.model)
    tol = parse_tolerances(args.tol)
    split = perturbation.CouplingSplit.from_model(model)
    approx = perturbation.perturbed_roots(model, split)
    exact = spectrum.solve_spectrum(model, tol)
    order, dist = perturbation.match_to_exact(approx, exact)
    header = ["level", "sheet_level_anchor", "sheet", "zero_width",
              "approx_k1_re", "approx_k1_im", "exact_k1_re", "exact_k1_im",
              "exact_class", "error"]
    rows = []
    for z, i, d in zip(approx, order, dist):
        e = exact[i]
        rows.append([z.level + 1, str(z.sheet), str(z.channel1_sheet(model)), int(z.zero_width),
                     float(z.k[0].real), float(z.k[0].imag), float(e.k[0].real),
                     float(e.k[0].imag), e.kind, float(d)])
    emit(args.out, csv_text(header, rows))
    return EXIT_OK


def _inverse_from_file(path, args) -> cox2.InverseResult:
    data = load_json(path)
    known = {"delta", "beta", "zeros", "resonance", "branch", "kappa1"}
    extra = set(data) - known
    if extra:
        raise InputError(f"unknown inverse-problem keys: {sorted(extra)}")
    delta, beta = float(data["delta"]), float(data["beta"])
    branch = data.get("branch", args.branch)
    kappa1 = float(data.get("kappa1", args.kappa1 if args.kappa1 is not None else 0.5))
    if ("zeros" in data) == ("resonance" in data):
        raise InputError("give exactly one of 'zeros' or 'resonance'")
    if "resonance" in data:
        res = data["resonance"]
        spec = cox2.resonance_spec(float(res["er"]), float(res["ei"]), delta, beta, branch,
                                   res.get("sign", "lower"))
    else:
        zeros = []
        for z in data["zeros"]:
            if isinstance(z, list) and len(z) == 2 and all(isinstance(c, list) for c in z):
                zeros.append((parse_complex(z[0]), parse_complex(z[1])))
            else:
                k1 = parse_complex(z)
                zeros.append((k1, 1j * np.sqrt(delta - k1**2 + 0j)))
        spec = cox2.TwoChannelSpec(delta, beta, tuple(zeros), branch)
    a1, a2 = cox2.invert_two_roots(spec)
    completed = cox2.complete_roots(spec, a1, a2)
    model = cox2.model_from_alpha(delta, beta, a1, a2, kappa1)
    return cox2.InverseResult("file", (a1, a2), beta, spec.zeros, completed, model, {})


def cmd_invert2(args) -> int:
    if args.input:
        result = _inverse_from_file(args.input, args)
    else:
        if not args.scenario:
            raise InputError("invert2 needs --scenario or --input")
        if args.delta is None:
            raise InputError("--delta is required")
        lam = tuple(float(x) for x in args.lam.split(",")) if args.lam else ()
        kappa1 = args.kappa1
        if kappa1 is None:
            kappa1 = max(0.5, 1.01 * max(lam)) if lam else 0.5
        result = cox2.run_scenario(args.scenario, args.delta, kappa1=kappa1, beta=args.beta,
                                   e_r=args.er, e_i=args.ei, lam=lam, alpha1=args.alpha1,
                                   branch=args.branch, sign=args.sign)
    report_valid = validate(result.model)
    points = spectrum.solve_spectrum(result.model)
    out = {
        "scenario": result.scenario,
        "alpha": list(result.alpha),
        "beta": result.beta,
        "prescribed": [list(z) for z in result.prescribed],
        "completed": [list(z) for z in result.completed],
        "notes": result.notes,
        "model": result.model.to_dict(),
        "regular": report_valid.ok,
        "violations": report_valid.violations,
        "spectrum": spectrum.spectrum_report(points, result.model),
    }
    emit(args.out, dumps(out))
    return EXIT_OK


def cmd_potential(args) -> int:
    model = read_model(args.model)
    grid = parse_grid(args.grid) if args.grid else None
    samples = potential.potential_on_grid(model, grid)
    n = model.n_channels
    pairs = [(i, j) for i in range(n) for j in range(i, n)]
    header = ["r"] + [f"V_{i + 1}{j + 1}" for i, j in pairs]
    rows = [[s.r] + [float(s.v[i, j]) for i, j in pairs] for s in samples]
    emit(args.out, csv_text(header, rows))
    return EXIT_OK


def cmd_scatter(args) -> int:
    model = read_model(args.model)
    if args.grid:
        grid = parse_grid(args.grid)
    else:
        top = max(1.0, 2 * float(np.max(model.delta)))
        grid = np.linspace(top / 1000, top, 1000)
    samples, errors = scattering.observable_sweep(grid, model)
    n = model.n_channels
    header = ["E", "delta1", "sigma11", "open_count"]
    header += [f"S_{i + 1}{j + 1}_{part}"
               for i in range(n) for j in range(n) for part in ("re", "im")]
    rows = []
    for s in samples:
        flat = []
        for i in range(n):
            for j in range(n):
                if i < s.open_count and j < s.open_count:
                    flat += [float(s.s[i, j].real), float(s.s[i, j].imag)]
                else:
                    flat += ["", ""]
        rows.append([s.energy, s.delta1, s.sigma11, s.open_count] + flat)
    emit(args.out, csv_text(header, rows))
    for e, msg in errors:
        sys.stderr.write(json.dumps({"energy": fmt(e), "error": msg}) + "\n")
    return EXIT_OK


# --------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    """Usage errors become InputError so they share exit status 1."""

    def error(self, message):
        raise InputError(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(
        prog="coxjost",
        description="Zeros of the Jost determinant, weak-coupling approximations, "
                    "two-channel inverse problem, potentials and scattering data.",
    )
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, model=True):
        if model:
            sp.add_argument("--model", help="model JSON file")
        sp.add_argument("--out", help="output file (default: stdout)")
        sp.add_argument("--tol", action="append", metavar="NAME=VALUE",
                        help="override a tolerance; repeatable")

    sp = sub.add_parser("analyze", help="locate and classify all zeros")
    common(sp)
    sp.set_defaults(func=cmd_analyze)

    sp = sub.add_parser("curves", help="eigenvalues of B on the imaginary k1 axis (CSV)")
    common(sp)
    sp.add_argument("--sheet", help="sign string such as '+-+' (default: all sheets)")
    sp.add_argument("--grid", help="kbar1 grid MIN:MAX:N")
    sp.set_defaults(func=cmd_curves)

    sp = sub.add_parser("perturb", help="second-order weak-coupling zeros versus exact ones")
    common(sp)
    sp.set_defaults(func=cmd_perturb)

    sp = sub.add_parser("invert2", help="two-channel model from prescribed zeros")
    common(sp, model=False)
    sp.add_argument("--input", help="inverse-problem JSON file")
    sp.add_argument("--scenario", choices=cox2.SCENARIOS)
    sp.add_argument("--branch", choices=cox2.BRANCHES, default="upper")
    sp.add_argument("--sign", choices=cox2.BRANCHES, default="lower",
                    help="sign of Im k1 for a prescribed resonance (lower: visible)")
    sp.add_argument("--delta", type=float)
    sp.add_argument("--beta", type=float)
    sp.add_argument("--er", type=float, help="resonance energy")
    sp.add_argument("--ei", type=float, help="half width of the resonance")
    sp.add_argument("--lam", help="bound-state momenta, comma separated")
    sp.add_argument("--alpha1", type=float)
    sp.add_argument("--kappa1", type=float)
    sp.set_defaults(func=cmd_invert2)

    sp = sub.add_parser("potential", help="transformed potential on a radial grid (CSV)")
    common(sp)
    sp.add_argument("--grid", help="radial grid MIN:MAX:N (default 0:25/kappa_min:2000)")
    sp.set_defaults(func=cmd_potential)

    sp = sub.add_parser("scatter", help="S-matrix, phase shift and cross section (CSV)")
    common(sp)
    sp.add_argument("--grid", help="energy grid MIN:MAX:N")
    sp.set_defaults(func=cmd_scatter)
    return p


def _fail(code: int, kind: str, message: str, **extra) -> int:
    payload = {"error": kind, "message": message, **extra}
    sys.stderr.write(dumps(payload))
    return code


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except InputError as exc:
        return _fail(EXIT_INPUT, "invalid_input", str(exc), violations=exc.violations)
    except NumericFailure as exc:
        return _fail(EXIT_NUMERIC, "numerical_failure", str(exc), detail=exc.detail)
    except CoxError as exc:
        return _fail(EXIT_NUMERIC, type(exc).__name__, str(exc))
    except (ValueError, KeyError, OSError) as exc:
        return _fail(EXIT_INPUT, "invalid_input", str(exc))


if __name__ == "__main__":
    sys.exit(main())
