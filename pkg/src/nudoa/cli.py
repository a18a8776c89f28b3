"""Command-line front end.

Subcommands::

    nudoa spectrum  --config FILE [--snr DB] [--method M]
    nudoa simulate  --config FILE [--snr DB]
    nudoa sweep     --config FILE [--snr-list 0,5,10] [--k N]
    nudoa example1  [--snr-list ...] [--k N]
    nudoa example2  [--snr-list ...] [--k N] [--realizations R]

Exit status: 0 on success, 2 for usage or configuration errors, 3 for
numerical failures.
"""
import argparse
import contextlib
import csv
import logging
import sys
from dataclasses import replace

import numpy as np

from .config import ConfigError, config_to_dict, example1_config, example2_config, load_config
from .estimator import ALL_METHODS, GridSpec, Method, estimate_doa
from .harness import (
    RandomNoiseSpec,
    _fixed_noise,
    draw_noise_profile,
    random_q_experiment,
    run_trial,
    sweep_snr,
    trial_stream,
    write_sweep_csv,
    write_trials_csv,
)
from .hermitian_linalg import EigensolverError, RankDeficientError
from .snapshots import RngSeed, generate_snapshots, sample_covariance

log = logging.getLogger("nudoa")

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 2, 3


class UsageError(Exception):
    pass


def _snr_list(text):
    try:
        return [float(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}")


def _u64(text):
    v = int(text)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="scenario JSON file")
    common.add_argument("--out", metavar="PATH", help="output CSV (default: stdout)")
    common.add_argument("--seed", type=_u64, help="override the scenario seed")
    common.add_argument("--k", type=_positive_int, help="Monte Carlo trials per SNR")
    common.add_argument("--snr", type=float, metavar="DB", help="single SNR in dB")
    common.add_argument("--snr-list", type=_snr_list, metavar="CSV", help="SNRs in dB, e.g. 0,5,10")
    common.add_argument("--threads", type=_positive_int, default=1,
                        help="worker processes for Monte Carlo trials")
    common.add_argument("--grid-step", type=float, metavar="DEG", help="search grid step")
    common.add_argument("--method", choices=[m.value for m in ALL_METHODS] + ["all"],
                        default=None)
    common.add_argument("--trials-out", metavar="PATH", help="also write per-trial CSV")
    common.add_argument("--timing", action="store_true",
                        help="fill mean_trial_ms (output is then not reproducible)")
    verb = common.add_mutually_exclusive_group()
    verb.add_argument("-v", "--verbose", action="store_true")
    verb.add_argument("-q", "--quiet", action="store_true")

    p = argparse.ArgumentParser(
        prog="nudoa", description="Subspace DOA estimation under nonuniform sensor noise."
    )
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("spectrum", parents=[common], help="pseudospectrum of one synthesized covariance")
    sub.add_parser("simulate", parents=[common], help="one verbose Monte Carlo trial")
    sub.add_parser("sweep", parents=[common], help="RMSE versus SNR for a scenario file")
    sub.add_parser("example1", parents=[common], help="built-in fixed nonuniform noise scenario")
    ex2 = sub.add_parser("example2", parents=[common], help="built-in random noise scenario")
    ex2.add_argument("--realizations", type=_positive_int, help="noise covariance draws")
    return p


def resolve_config(args):
    if args.command == "example1":
        cfg = example1_config()
    elif args.command == "example2":
        cfg = example2_config()
        if args.realizations:
            cfg = replace(cfg, noise=replace(cfg.noise, realizations=args.realizations))
    else:
        if not args.config:
            raise UsageError(f"{args.command} requires --config PATH")
        cfg = load_config(args.config)

    kw = {}
    if args.seed is not None:
        kw["seed"] = args.seed
    if args.k is not None:
        kw["k_trials"] = args.k
    if args.snr_list is not None:
        kw["snr_db_list"] = tuple(args.snr_list)
    elif args.snr is not None:
        kw["snr_db_list"] = (args.snr,)
    if args.grid_step is not None:
        kw["grid"] = GridSpec(cfg.grid.min_deg, cfg.grid.max_deg, args.grid_step)
        kw["grid"].angles
    if args.method not in (None, "all"):
        kw["methods"] = (Method(args.method),)
    return replace(cfg, **kw)


@contextlib.contextmanager
def _output(path):
    if path is None:
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            yield fh


def _noise_for_single_run(cfg):
    if isinstance(cfg.noise, RandomNoiseSpec):
        return draw_noise_profile(cfg.noise, cfg.geometry.sensor_count, cfg.seed, 0)
    return _fixed_noise(cfg)


def cmd_spectrum(cfg, args):
    if args.method == "all":
        raise UsageError("spectrum needs a single --method")
    method = Method(args.method or "phase2")
    noise = _noise_for_single_run(cfg)
    snr = cfg.snr_db_list[0]
    X = generate_snapshots(
        cfg.geometry, cfg.sources_at(snr, noise), noise, cfg.snapshots,
        RngSeed(cfg.seed, trial_stream(0, 0)),
    )
    est, qcov = estimate_doa(sample_covariance(X), cfg.L, cfg.geometry, cfg.grid, method)
    log.info("%s estimate at %g dB: %s", method, snr, np.round(est.doas_deg, 4).tolist())
    if qcov is not None:
        log.info("reconstructed noise variances: %s", np.round(qcov.q_hat, 4).tolist())
    with _output(args.out) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["theta_deg", "s_value"])
        for t, s in zip(est.spectrum.grid_deg, est.spectrum.values):
            w.writerow([format(t, ".12g"), format(s, ".12g")])


def cmd_simulate(cfg, args):
    noise = _noise_for_single_run(cfg)
    snr = cfg.snr_db_list[0]
    results = run_trial(cfg, snr, 0, noise=noise)
    log.info("noise variances: %s", list(noise.variances))
    for r in results:
        log.info(
            "%-9s theta_hat=%s sq_err=%s fallback=%s %.3f ms%s",
            r.method, [round(t, 4) for t in r.theta_hat],
            [round(e, 6) for e in r.sq_errors], r.fallback, r.wall_ms,
            f" error={r.error}" if r.error else "",
        )
    with _output(args.out) as fh:
        write_trials_csv(results, fh)


def cmd_sweep(cfg, args):
    if isinstance(cfg.noise, RandomNoiseSpec):
        results, profiles = random_q_experiment(cfg, workers=args.threads)
        for i, p in enumerate(profiles):
            log.debug("noise realization %d: %s", i, np.round(p.variances, 4).tolist())
        trials = [t for r in results for rr in r.realizations for t in rr.trials]
    else:
        results = sweep_snr(cfg, workers=args.threads)
        trials = [t for r in results for t in r.trials]
    for r in results:
        log.info("%6g dB %-9s RMSE %.5f deg  fallback %.3f", r.snr_db, r.method, r.rmse_deg,
                 r.fallback_rate)
    with _output(args.out) as fh:
        write_sweep_csv(results, fh, timing=args.timing)
    if args.trials_out:
        with open(args.trials_out, "w", encoding="utf-8", newline="") as fh:
            write_trials_csv(trials, fh)


COMMANDS = {
    "spectrum": cmd_spectrum,
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
    "example1": cmd_sweep,
    "example2": cmd_sweep,
}


def _setup_logging(level):
    pkg = logging.getLogger("nudoa")
    for h in [h for h in pkg.handlers if getattr(h, "_nudoa_cli", False)]:
        pkg.removeHandler(h)
    h = logging.StreamHandler(sys.stderr)
    h.setFormatter(logging.Formatter("%(levelname)s %(name)s: %(message)s"))
    h._nudoa_cli = True
    pkg.addHandler(h)
    pkg.setLevel(level)


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    _setup_logging(logging.DEBUG if args.verbose else logging.WARNING if args.quiet else logging.INFO)
    try:
        cfg = resolve_config(args)
        log.info("resolved seed %d", cfg.seed)
        log.debug("scenario %s", config_to_dict(cfg))
        COMMANDS[args.command](cfg, args)
    except ConfigError as exc:
        log.error("config error in %s", exc.source or "built-in scenario")
        for prob in exc.problems:
            log.error("  %s", prob)
        return EXIT_USAGE
    except (UsageError, ValueError) as exc:
        log.error("%s", exc)
        return EXIT_USAGE
    except (ArithmeticError, np.linalg.LinAlgError, EigensolverError, RankDeficientError) as exc:
        log.error("numerical failure: %s", exc)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
