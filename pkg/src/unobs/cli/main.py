import sys
from argparse import ArgumentParser
from json import loads
from pathlib import Path

import numpy as np
from loguru import logger

from unobs.checks import build_campaign
from unobs.config import RunConfig, load_config, parse_assignment
from unobs.control import Control, adjoint_check, random_control, unitarity_check
from unobs.counterexample import (
    CoefficientSchedule,
    build_h,
    derivative_at_2,
    divergence_certificate,
    membership_certificate,
    smoothness_diagnostics,
    value_at_2,
)
from unobs.dspace import PolyClassP, basis_element
from unobs.errors import ConfigError
from unobs.fields import HarmonicField
from unobs.harmonics import AngularExpansion
from unobs.radon import observe, tau_grid
from unobs.serialize import dumps, write_csv, write_json
from unobs.wavesim import extract_jump_vr, jump_field

EXIT_OK, EXIT_FAILED, EXIT_CONFIG = 0, 1, 2


def _add_common(parser: ArgumentParser):
    parser.add_argument("--config", type=Path, help="key=value configuration file")
    parser.add_argument("--preset", choices=["paper", "quick"], help="Named preset of defaults")
    parser.add_argument(
        "--set",
        action="append",
        default=[],
        dest="overrides",
        help="Override a configuration key (format key=value). Can be repeated.",
    )
    parser.add_argument("--outdir", type=Path, help="Output directory for artifacts")


def build_parser() -> ArgumentParser:
    parser = ArgumentParser(prog="unobs", description="Unobservable states of the incoming wave system")
    parser.add_argument("--log-level", default="INFO", help="loguru level for stderr")
    subparsers = parser.add_subparsers(dest="command", required=True)

    dspace = subparsers.add_parser("dspace", help="Elements of D^ξ_l")
    dspace_sub = dspace.add_subparsers(dest="action", required=True)
    basis = dspace_sub.add_parser("basis", help="Emit one basis element as HarmonicField JSON")
    basis.add_argument("--xi", type=float, required=True, help="Support radius ξ")
    basis.add_argument("--l", type=int, required=True, help="Harmonic degree")
    basis.add_argument("--j", type=int, default=0, help="Index of the monomial s^{l-2j}")
    basis.add_argument("--m", type=int, default=0, help="Harmonic order")
    basis.add_argument("--normalize", action="store_true", help="Scale to unit norm")
    basis.add_argument("--out", type=Path, help="Write JSON here instead of stdout")
    _add_common(basis)

    obs = subparsers.add_parser("observe", help="Sample Oy on a τ-grid")
    obs.add_argument("--field", type=Path, required=True, help="HarmonicField JSON file")
    obs.add_argument("--xi0", type=float, default=None, help="Grid covers [0, factor·ξ0]; defaults to ξ of the field")
    obs.add_argument("--method", choices=["kernel", "central"], default="kernel")
    _add_common(obs)

    control = subparsers.add_parser("control", help="Unitarity of W and duality with O")
    control.add_argument("--control", type=Path, help="Control JSON file; random controls when omitted")
    control.add_argument("--field", type=Path, help="HarmonicField JSON for the duality check")
    _add_common(control)

    wavesim = subparsers.add_parser("wavesim", help="Kirchhoff experiments")
    wavesim_sub = wavesim.add_subparsers(dest="action", required=True)
    jump = wavesim_sub.add_parser("jump", help="Jump of ∂v/∂r across a characteristic cone")
    jump.add_argument("--xi0", type=float, required=True, help="Radius of the jump of y")
    jump.add_argument("--t", type=float, action="append", required=True, help="Negative time. Can be repeated.")
    jump.add_argument("--cone", choices=["C1", "C2"], default="C1")
    jump.add_argument("--l", type=int, default=0)
    jump.add_argument("--m", type=int, default=0)
    jump.add_argument("--alpha", type=float, default=1.0, help="Jump amplitude of the harmonic")
    _add_common(jump)

    counter = subparsers.add_parser("counterexample", help="The non-smooth unobservable state h")
    counter_sub = counter.add_subparsers(dest="action", required=True)
    crun = counter_sub.add_parser("run", help="Certificates and growth tables for h_N")
    crun.add_argument("--N", type=int, default=40, dest="n_terms", help="Number of terms")
    crun.add_argument("--schedule", choices=["inv_k", "unit"], default="inv_k")
    crun.add_argument("--m-rule", choices=["zero", "top", "alternating"], default="zero")
    crun.add_argument("--out", type=Path, help="Report path; defaults to counterexample.json in outdir")
    _add_common(crun)

    verify = subparsers.add_parser("verify-all", help="Run the acceptance suite")
    _add_common(verify)
    return parser


def _config(args) -> RunConfig:
    overrides = dict(parse_assignment(a) for a in args.overrides)
    if args.outdir:
        overrides["outdir"] = args.outdir
    return load_config(args.config, args.preset, overrides)


def _dspace(args, config: RunConfig) -> int:
    p = PolyClassP.monomial(args.l, args.j)
    y = basis_element(args.xi, p, AngularExpansion.single(args.l, args.m), normalize=args.normalize)
    if args.out:
        write_json(args.out, y)
    else:
        sys.stdout.write(dumps(y))
    return EXIT_OK


def _observe(args, config: RunConfig) -> int:
    y = HarmonicField.from_json_dict(_read_json(args.field))
    xi0 = args.xi0 or y.support_radius
    grid = tau_grid(xi0, config.tau_step, config.tau_max_factor)
    trace = observe(y, grid, method=args.method, step=config.derivative_step)
    write_json(config.outdir / "observation.json", trace)
    write_csv(config.outdir / "observation.csv", ["tau", "l", "m", "value", "side"], trace.csv_rows())
    return EXIT_OK


def _control(args, config: RunConfig) -> int:
    if args.control:
        controls = [Control.from_json_dict(_read_json(args.control))]
    else:
        rng = np.random.default_rng(config.seed)
        controls = [random_control(rng, band_limit=4) for _ in range(config.random_cases)]
    rows = []
    ok = True
    field = HarmonicField.from_json_dict(_read_json(args.field)) if args.field else None
    for i, f in enumerate(controls):
        unitary = unitarity_check(f)
        row = {"case": i, "unitarity": unitary, "unitarity_tol": config.unitarity_tol}
        ok &= unitary.gap <= config.unitarity_tol
        if field is not None:
            duality = adjoint_check(f, field)
            row.update(duality=duality, oracle_tol=config.oracle_tol)
            ok &= duality.discrepancy <= config.oracle_tol
        rows.append(row)
    write_json(config.outdir / "control.json", rows)
    return EXIT_OK if ok else EXIT_FAILED


def _wavesim(args, config: RunConfig) -> int:
    alpha = AngularExpansion.single(args.l, args.m, args.alpha)
    y = jump_field(args.xi0, alpha)
    records = []
    for t in args.t:
        records.extend(extract_jump_vr(y, args.xi0, t, cone=args.cone))
    write_json(config.outdir / "jumps.json", {"jump_tol": config.jump_tol, "records": records})
    write_csv(
        config.outdir / "jumps.csv",
        ["xi0", "t", "l", "m", "predicted", "measured", "ratio"],
        (r.csv_row() for r in records),
    )
    failed = [r for r in records if r.inconclusive or r.ratio is None or abs(r.ratio - 1.0) > config.jump_tol]
    for r in failed:
        logger.error(f"Jump ratio at t={r.t} for {r.index} is {r.ratio}, outside {config.jump_tol}")
    return EXIT_FAILED if failed else EXIT_OK


def _counterexample(args, config: RunConfig) -> int:
    schedule = CoefficientSchedule(name=args.schedule)
    h = build_h(args.n_terms, schedule, args.m_rule)
    at_two = value_at_2(h)
    growth = divergence_certificate(schedule, n_values=range(5, max(args.n_terms, 5) + 1))
    membership = membership_certificate(
        h, k_max=4, tolerance=config.unobservability_tol, raise_on_failure=False
    )
    smooth = smoothness_diagnostics(h, radii=[1.2, 1.5, 3.0, 4.0])
    report = {
        "N": args.n_terms,
        "schedule": schedule.name,
        "value_at_2": {"l2_sq": at_two.l2_norm_sq, "beltrami_sq": at_two.beltrami_norm_sq},
        "radial_derivative_at_2": {f"l={idx.l},m={idx.m}": v for idx, v in derivative_at_2(h).items()},
        "divergence": {
            "doubling": growth.doubling,
            "growth_exponent": growth.growth_exponent,
            "growth_spread": growth.growth_spread,
            "l2_increment": growth.l2_increment,
            "l2_tail_bound": growth.l2_tail_bound,
        },
        "membership": membership,
        "smoothness": smooth,
        "unobservability_tol": config.unobservability_tol,
    }
    write_json(args.out or config.outdir / "counterexample.json", report)
    write_csv(
        config.outdir / "growth.csv",
        ["N", "beltrami_sq", "l2_sq"],
        ((row.n, float(row.beltrami), float(row.l2)) for row in growth.rows),
    )
    if not membership.passed:
        logger.error(f"Membership certificate failed for terms {[t.k for t in membership.terms if not t.passed]}")
        return EXIT_FAILED
    return EXIT_OK


def _verify_all(args, config: RunConfig) -> int:
    report = build_campaign(config).run()
    for name in report.failed:
        logger.error(f"Criterion {name} failed")
    return EXIT_OK if report.passed else EXIT_FAILED


def _read_json(path: Path):
    return loads(Path(path).read_text())


COMMANDS = {
    "dspace": _dspace,
    "observe": _observe,
    "control": _control,
    "wavesim": _wavesim,
    "counterexample": _counterexample,
    "verify-all": _verify_all,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_CONFIG if e.code else EXIT_OK

    logger.remove()
    logger.add(sys.stderr, level=args.log_level.upper())

    try:
        config = _config(args)
    except (ConfigError, OSError) as e:
        logger.error(f"Configuration error: {e}")
        return EXIT_CONFIG
    try:
        return COMMANDS[args.command](args, config)
    except ValueError as e:
        logger.error(f"Invalid input: {e}")
        return EXIT_CONFIG


def cli():
    sys.exit(main())
