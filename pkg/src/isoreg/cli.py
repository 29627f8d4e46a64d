"""Command line front end.

Every command writes its artifacts plus ``config.json`` into ``--out``. The
config records the argument vector (with absolute input paths, without the
output directory) and input checksums; ``isoreg rerun config.json --out DIR``
replays it.

Failures print one line ``error CATEGORY: message`` on stderr, where
CATEGORY is IO, FORMAT, DOMAIN or NUMERIC, and exit non-zero.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from . import io as fio
from .coeffs import CoefficientSet, DegreeWeights
from .errors import DimensionError, FormatError, IsoregError, NumericError, UndefinedScalingError
from .frontier import InactiveConstraint, build_frontier, l0_frontier, lambda_from_kappa, lambda_from_sigma
from .regularizer import lambda_bound_for_error, regularize
from .scaling import scaled_field, scaling_report
from .sht import QuadratureGrid, Rotation, analyze, field_errors, synthesize
from .simulate import (
    EnsembleSpec,
    PowerSpectrum,
    cmb_like_spectrum,
    default_probes,
    isotropy_test,
    sample_ensemble,
    sample_isotropic,
)

log = logging.getLogger("isoreg")

EXIT_CODES = {"IO": 3, "FORMAT": 4, "DOMAIN": 5, "NUMERIC": 6}
# tolerance for the frontier / closed-form cross-check done on every regularize run
CROSS_CHECK_RTOL = 1e-10

_PATH_OPTIONS = {"--coeffs", "--spectrum"}


# --------------------------------------------------------------------------
# argument helpers
# --------------------------------------------------------------------------

def _weights(args, band_limit):
    kind = args.beta[0]
    if kind == "const":
        if len(args.beta) != 1:
            raise argparse.ArgumentTypeError("--beta const takes no value")
        return DegreeWeights.constant(band_limit)
    if len(args.beta) != 2:
        raise argparse.ArgumentTypeError(f"--beta {kind} needs exactly one value")
    if kind == "csv":
        beta = fio.read_weights(args.beta[1])
        if beta.band_limit != band_limit:
            raise DimensionError(f"weights cover degrees 0..{beta.band_limit}, data 0..{band_limit}")
        return beta
    if kind == "powerlaw":
        return DegreeWeights.powerlaw(band_limit, float(args.beta[1]))
    raise argparse.ArgumentTypeError(f"unknown --beta kind {kind!r}")


def _spectrum(args):
    if args.spectrum:
        return fio.read_spectrum(args.spectrum)
    L = args.band_limit
    if L is None:
        raise argparse.ArgumentTypeError("--band-limit is required with --preset")
    if args.preset == "cmb-like":
        return cmb_like_spectrum(L)
    if args.preset == "flat":
        ell = np.arange(L + 1)
        return PowerSpectrum(1.0 / (2 * ell + 1.0))
    raise argparse.ArgumentTypeError(f"unknown preset {args.preset!r}")


def _resolve_lambda(args, a, beta):
    """Map whichever selector was given to a penalty value."""
    if getattr(args, "lam", None) is not None:
        return float(args.lam), {"selector": "lambda"}
    frontier = build_frontier(a, beta)
    if args.sigma is not None:
        res = lambda_from_sigma(frontier, args.sigma)
        info = {"selector": "sigma", "sigma": args.sigma}
    elif args.kappa is not None:
        res = lambda_from_kappa(frontier, args.kappa)
        info = {"selector": "kappa", "kappa": args.kappa}
    else:
        bound = lambda_bound_for_error(a, beta, args.epsilon)
        info = {
            "selector": "epsilon",
            "epsilon": args.epsilon,
            "lambda_max": bound.lam_max,
            "ell_star": bound.ell_star,
        }
        return bound.lam_applied, info
    if isinstance(res, InactiveConstraint):
        info["constraint"] = "inactive"
        info["solution"] = res.solution
        return res.lam, info
    info["constraint"] = "active"
    return res, info


def _table_rows(a, res, grid):
    """Sparsity, scaling factor and field errors for one penalty, unscaled and scaled."""
    obs = synthesize(a, grid)
    unscaled = synthesize(res.coefficients, grid)
    rows = {
        "sparsity": res.sparsity,
        "unscaled_l2_error": field_errors(obs, unscaled)["l2"],
        "unscaled_linf_error": field_errors(obs, unscaled)["linf"],
    }
    try:
        rep = scaling_report(a, res.coefficients)
    except UndefinedScalingError:
        rows["gamma"] = "undefined (fully thresholded)"
        return rows
    scaled = synthesize(scaled_field(res.coefficients, rep.gamma_norm), grid)
    err = field_errors(obs, scaled)
    rows.update(gamma=rep.gamma_norm, scaled_l2_error=err["l2"], scaled_linf_error=err["linf"])
    return rows


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------

def cmd_simulate(args, out):
    spectrum = _spectrum(args)
    fio.write_spectrum(out / "spectrum.csv", spectrum)
    if args.realizations == 1:
        a = sample_isotropic(spectrum, args.seed)
        fio.write_coefficients(out / "coeffs.csv", a)
    else:
        rows = sample_ensemble(spectrum, args.realizations, args.seed)
        width = len(str(args.realizations - 1))
        for i, row in enumerate(rows):
            fio.write_coefficients(out / f"coeffs_{i:0{width}d}.csv", CoefficientSet(row, real_field=True))
    fio.write_key_values(
        out / "summary.txt",
        {"band_limit": spectrum.band_limit, "seed": args.seed, "realizations": args.realizations},
    )


def cmd_regularize(args, out):
    a = fio.read_coefficients(args.coeffs)
    beta = _weights(args, a.band_limit)
    lam, info = _resolve_lambda(args, a, beta)
    res = regularize(a, beta, lam)
    fio.write_coefficients(out / "regularized.csv", res.coefficients)

    # frontier and closed form must agree at the chosen penalty
    frontier = build_frontier(a, beta)
    f_disc, f_norm, f_count = (v[0] for v in frontier.evaluate([lam]))
    scale_d = max(frontier.total_energy, np.finfo(float).tiny)
    scale_n = max(frontier.total_norm, np.finfo(float).tiny)
    if (
        abs(f_disc - res.discrepancy_value) > CROSS_CHECK_RTOL * scale_d
        or abs(f_norm - res.hybrid_norm_value) > CROSS_CHECK_RTOL * scale_n
        or int(f_count) != int(res.active.sum())
    ):
        raise NumericError("frontier and closed-form summaries disagree")

    summary = dict(info)
    summary.update(res.summary())
    summary["band_limit"] = a.band_limit
    summary["input_zero_fraction"] = a.zero_fraction()
    try:
        rep = scaling_report(a, res.coefficients)
        summary["gamma_norm"] = rep.gamma_norm
        summary["gamma_opt"] = rep.gamma_opt
    except UndefinedScalingError:
        summary["gamma_norm"] = "undefined (fully thresholded; scaling undefined)"
    if args.grid:
        grid = QuadratureGrid(a.band_limit)
        rows = _table_rows(a, res, grid)
        summary.update(rows)
        if a.real_field:
            fio.write_grid_field(out / "observed_field.csv", synthesize(a, grid))
            fio.write_grid_field(out / "regularized_field.csv", synthesize(res.coefficients, grid))
    summary["cross_check"] = "pass"
    fio.write_key_values(out / "summary.txt", summary)


def cmd_frontier(args, out):
    a = fio.read_coefficients(args.coeffs)
    beta = _weights(args, a.band_limit)
    fr = build_frontier(a, beta)
    lams, disc, norm, count = fr.sample(args.samples_per_segment)
    fio.write_frontier(out / "frontier.csv", lams, disc, norm, count)
    fio.write_l0(out / "l0.csv", l0_frontier(fr))
    fio.write_key_values(
        out / "summary.txt",
        {
            "knots": fr.knots.size,
            "lambda_zero": fr.lam_zero,
            "total_energy": fr.total_energy,
            "total_hybrid_norm": fr.total_norm,
        },
    )


def cmd_solve_lambda(args, out):
    a = fio.read_coefficients(args.coeffs)
    beta = _weights(args, a.band_limit)
    lam, info = _resolve_lambda(args, a, beta)
    info["lambda"] = lam
    fio.write_key_values(out / "lambda.txt", info)
    print(fio.fmt(lam))


def cmd_scale(args, out):
    a = fio.read_coefficients(args.coeffs)
    beta = _weights(args, a.band_limit)
    res = regularize(a, beta, args.lam)
    rep = scaling_report(a, res.coefficients)
    fio.write_gamma_curve(out / "gamma_curve.csv", rep, n=args.points)
    fio.write_key_values(
        out / "scaling.txt",
        {
            "lambda": res.lam,
            "gamma_norm": rep.gamma_norm,
            "gamma_opt": rep.gamma_opt,
            "discrepancy_unscaled": rep.q(1.0),
            "discrepancy_gamma_norm": rep.q(rep.gamma_norm),
            "discrepancy_gamma_opt": rep.q(rep.gamma_opt),
        },
    )


def cmd_isotropy_test(args, out):
    spectrum = _spectrum(args)
    beta = _weights(args, spectrum.band_limit)
    spec = EnsembleSpec(spectrum, args.realizations, args.seed)
    rho = Rotation(*args.rotation)
    probes = default_probes(args.probes, args.seed)
    report = isotropy_test(spec, beta, args.lam, rho, probes, thresholder=args.thresholder)
    lines = report.lines()
    lines.insert(0, f"rotation_zyz={' '.join(fio.fmt(x) for x in args.rotation)}")
    (out / "isotropy.txt").write_text("\n".join(lines) + "\n")
    print(lines[-1])


def cmd_report(args, out):
    """Table of sparsity, scaling and field errors for several penalties."""
    a = fio.read_coefficients(args.coeffs)
    beta = _weights(args, a.band_limit)
    grid = QuadratureGrid(a.band_limit)
    obs = synthesize(a, grid)
    fourier = synthesize(analyze(obs, a.band_limit), grid)
    err = field_errors(obs, fourier)
    table = {"fourier_sparsity": a.zero_fraction(), "fourier_l2_error": err["l2"], "fourier_linf_error": err["linf"]}
    lams = list(args.lam_list or [])
    if args.knot_quantiles:
        knots = build_frontier(a, beta).knots
        lams += [float(np.quantile(knots, q)) for q in args.knot_quantiles]
    for i, lam in enumerate(lams):
        res = regularize(a, beta, lam)
        table[f"lambda[{i}]"] = lam
        for k, v in _table_rows(a, res, grid).items():
            table[f"{k}[{i}]"] = v
    table["observed_l2_norm"] = a.l2_norm()
    table["observed_linf_norm"] = float(np.max(np.abs(obs.values)))
    fio.write_key_values(out / "table.txt", table)


COMMANDS = {
    "simulate": cmd_simulate,
    "regularize": cmd_regularize,
    "frontier": cmd_frontier,
    "solve-lambda": cmd_solve_lambda,
    "scale": cmd_scale,
    "isotropy-test": cmd_isotropy_test,
    "report": cmd_report,
}


def build_parser():
    p = argparse.ArgumentParser(prog="isoreg", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, coeffs=True):
        sp.add_argument("--out", required=True, type=Path, help="output directory")
        sp.add_argument(
            "--beta",
            nargs="+",
            default=["const"],
            metavar="KIND",
            help="degree weights: 'const', 'csv PATH' or 'powerlaw P'",
        )
        if coeffs:
            sp.add_argument("--coeffs", required=True, help="coefficient CSV (ell,m,re,im)")

    def selectors(sp, allow_lambda=True):
        g = sp.add_mutually_exclusive_group(required=True)
        if allow_lambda:
            g.add_argument("--lambda", dest="lam", type=float)
        g.add_argument("--sigma", type=float, help="discrepancy bound: ||a - a_obs||_2 <= sigma")
        g.add_argument("--kappa", type=float, help="hybrid-norm bound")
        g.add_argument("--epsilon", type=float, help="target l2 error; applies 0.999 of the bound")

    def spectrum_source(sp):
        g = sp.add_mutually_exclusive_group(required=True)
        g.add_argument("--spectrum", help="spectrum CSV (ell,C)")
        g.add_argument("--preset", choices=["cmb-like", "flat"])
        sp.add_argument("--band-limit", type=int)
        sp.add_argument("--seed", type=int, required=True)

    sp = sub.add_parser("simulate", help="draw Gaussian isotropic coefficient sets")
    common(sp, coeffs=False)
    spectrum_source(sp)
    sp.add_argument("--realizations", type=int, default=1)

    sp = sub.add_parser("regularize", help="apply the degree-block regularizer")
    common(sp)
    selectors(sp)
    sp.add_argument("--grid", action="store_true", help="also compare fields on a quadrature grid")

    sp = sub.add_parser("frontier", help="export the Pareto frontier and l0 staircase")
    common(sp)
    sp.add_argument("--samples-per-segment", type=int, default=1)

    sp = sub.add_parser("solve-lambda", help="map sigma, kappa or epsilon to lambda")
    common(sp)
    selectors(sp, allow_lambda=False)

    sp = sub.add_parser("scale", help="scaling factors and the discrepancy-vs-gamma curve")
    common(sp)
    sp.add_argument("--lambda", dest="lam", type=float, required=True)
    sp.add_argument("--points", type=int, default=101)

    sp = sub.add_parser("isotropy-test", help="Monte-Carlo isotropy check of the regularized field")
    common(sp, coeffs=False)
    spectrum_source(sp)
    sp.add_argument("--lambda", dest="lam", type=float, required=True)
    sp.add_argument("--realizations", type=int, default=2000)
    sp.add_argument("--rotation", type=float, nargs=3, default=[0.3, 1.1, -0.7], metavar=("ALPHA", "BETA", "GAMMA"))
    sp.add_argument("--probes", type=int, default=3)
    sp.add_argument("--thresholder", choices=["group", "l1"], default="group")

    sp = sub.add_parser("report", help="sparsity / scaling / error table for several lambdas")
    common(sp)
    sp.add_argument("--lambda", dest="lam_list", type=float, nargs="+")
    sp.add_argument("--knot-quantiles", type=float, nargs="+")

    sp = sub.add_parser("rerun", help="replay a config.json into a new output directory")
    sp.add_argument("config", type=Path)
    sp.add_argument("--out", required=True, type=Path)
    return p


def _echo_argv(argv):
    """Argument vector with absolute input paths and no ``--out``."""
    out, skip = [], False
    for i, tok in enumerate(argv):
        if skip:
            skip = False
            continue
        if tok == "--out":
            skip = True
            continue
        if tok.startswith("--out="):
            continue
        prev = argv[i - 1] if i else None
        if prev in _PATH_OPTIONS or (prev == "csv" and i >= 2 and argv[i - 2] == "--beta"):
            tok = str(Path(tok).resolve())
        out.append(tok)
    return out


def _input_digests(args):
    paths = [getattr(args, "coeffs", None), getattr(args, "spectrum", None)]
    beta = getattr(args, "beta", None)
    if beta and beta[0] == "csv" and len(beta) == 2:
        paths.append(beta[1])
    return {
        str(Path(p).resolve()): hashlib.sha256(Path(p).read_bytes()).hexdigest() for p in paths if p
    }


def run(argv):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    if args.command == "rerun":
        text = Path(args.config).read_text()
        try:
            replay = list(json.loads(text)["argv"])
        except (ValueError, KeyError, TypeError) as exc:
            raise FormatError(f"{args.config}: not a config echo ({exc})") from None
        return run(replay + ["--out", str(args.out)])

    out = args.out
    out.mkdir(parents=True, exist_ok=True)
    config = {
        "version": __version__,
        "command": args.command,
        "argv": _echo_argv(list(argv)),
        "inputs": _input_digests(args),
    }
    (out / "config.json").write_text(json.dumps(config, indent=2, sort_keys=True) + "\n")
    log.info("running %s into %s", args.command, out)
    COMMANDS[args.command](args, out)
    return 0


def main(argv=None):
    argv = sys.argv[1:] if argv is None else argv
    try:
        return run(argv)
    except IsoregError as exc:
        category = exc.category
        msg = str(exc)
    except argparse.ArgumentTypeError as exc:
        category, msg = "DOMAIN", str(exc)
    except OSError as exc:
        category, msg = "IO", f"{exc.strerror or exc}: {exc.filename or ''}".strip()
    except (FloatingPointError, ZeroDivisionError) as exc:
        category, msg = "NUMERIC", str(exc)
    print(f"error {category}: {' '.join(msg.split())}", file=sys.stderr)
    return EXIT_CODES[category]


if __name__ == "__main__":
    sys.exit(main())
