"""Command line entry point.

Usage::

    mesowigner [-v] [--config FILE] [--seed N] [--workers N] [--out DIR] <command> [options]

Experiment commands read a JSON configuration (see
:data:`mesowigner.harness.EXPERIMENT_CONFIG_SCHEMA`); ``--seed`` and
``--workers`` override the file. With ``--out`` the report, the raw
per-sample values and any plot overlays are written into that directory.

Exit status is 0 when every non-exploratory estimate is within the z-score
bound, 2 on a statistical rejection and 1 on a runtime error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from collections.abc import Sequence
from functools import partial
from pathlib import Path

from . import __version__, harness, processes, tasks
from .constants import EnsembleKind, Experiment, ExitCode, PathOrigin
from .ensembles import EnsembleSpec, save_spectrum
from .exceptions import ConfigurationError, MesoError, SampleFailure
from .reports import EstimateReport
from .spectral import MesoPoint
from .streams import PATH, derive
from .testfunctions import corpus
from .utilities.persistence import write_path
from .utils import SampleExecutor

__all__ = ["main", "build_parser", "commands"]

logger = logging.getLogger(__name__)


class BaseCommand:
    """One subcommand: its help text, its options and what it does."""

    name = ""
    help = ""

    def add_arguments(self, parser: argparse.ArgumentParser):
        pass

    def handle(self, args: argparse.Namespace) -> int:
        raise NotImplementedError


def _parse_point(text: str) -> MesoPoint:
    try:
        tau, eta = (float(part) for part in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected TAU,ETA, got {text!r}") from None
    return MesoPoint(tau, eta)


def _print_report(report: EstimateReport):
    print(f"{report.experiment}: {len(report.estimates)} estimates, flags: {', '.join(report.flags) or 'none'}")
    for estimate in report.rejections():
        print(f"  rejected: {estimate.name} value={estimate.value} target={estimate.target} z={estimate.z}")


def _finish(report: EstimateReport, args: argparse.Namespace) -> int:
    if args.out:
        path = report.save(args.out)
        logger.info("Wrote %s", path)
    _print_report(report)
    return report.exit_code()


class SampleCommand(BaseCommand):
    name = "sample"
    help = "Draw Wigner matrices and write their spectra."

    def add_arguments(self, parser):
        parser.add_argument("--kind", choices=[k.value for k in EnsembleKind], default=EnsembleKind.GUE.value)
        parser.add_argument("-n", "--n", type=int, required=True, help="matrix dimension")
        parser.add_argument("--count", type=int, default=1, help="number of samples")
        parser.add_argument(
            "--spot-checks", type=int, help="eigenpairs to certify per sample (default: MESOWIGNER_SPOT_CHECKS)"
        )

    def handle(self, args):
        template = EnsembleSpec(args.kind, args.n, seed=args.seed or 0)
        task = partial(tasks.spectrum, template, spot_checks=args.spot_checks)
        with SampleExecutor(args.workers) as executor:
            spectra = executor.map_samples(task, range(args.count), template.seed)
        out = Path(args.out or ".")
        for spectrum in spectra:
            save_spectrum(spectrum, out)
        print(f"Wrote {len(spectra)} {template.kind.value} spectra of size {template.n} to {out}")
        return ExitCode.OK


class ExperimentCommand(BaseCommand):
    """Run one registered experiment from ``--config``."""

    experiment: Experiment

    def load_config(self, args) -> harness.ExperimentConfig:
        if not args.config:
            raise ConfigurationError(f"{self.name} needs --config")
        config = harness.ExperimentConfig.from_file(args.config)
        return config.with_overrides(experiment=self.experiment, seed=args.seed, workers=args.workers)

    def run(self, config: harness.ExperimentConfig, args) -> EstimateReport:
        return harness.run_experiment(config)

    def handle(self, args):
        return _finish(self.run(self.load_config(args), args), args)


class CovVCommand(ExperimentCommand):
    name = "cov-v"
    help = "Covariance of the resolvent-trace process on a grid."
    experiment = Experiment.COV_V


class VarMesoCommand(ExperimentCommand):
    name = "var-meso"
    help = "Variance of mesoscopic linear statistics against the H^1/2 norm."
    experiment = Experiment.VAR_MESO

    def add_arguments(self, parser):
        parser.add_argument("--function", choices=corpus.names(), help="single test function to use")

    def run(self, config, args):
        return harness.run_var_meso(config, corpus.get(args.function) if args.function else None)


class UniversalityCommand(ExperimentCommand):
    name = "universality"
    help = "Compare covariances across entry laws."
    experiment = Experiment.UNIVERSALITY


class NormalityCommand(ExperimentCommand):
    name = "normality"
    help = "Skewness, kurtosis and KS diagnostics of linear statistics."
    experiment = Experiment.NORMALITY

    def add_arguments(self, parser):
        parser.add_argument(
            "--self-test", type=int, metavar="M", help="run on M synthetic Gaussians instead of matrices"
        )

    def handle(self, args):
        if args.self_test:
            return _finish(harness.run_normality_self_test(args.self_test, args.seed or 0), args)
        return super().handle(args)


class LogProcessCommand(ExperimentCommand):
    name = "log-process"
    help = "Increment variances of the log-characteristic-polynomial process."
    experiment = Experiment.LOG_PROCESS

    def add_arguments(self, parser):
        parser.add_argument("--taus", type=float, nargs="+", help="tau grid, must contain 0")
        parser.add_argument("--eta", type=float, help="height of the horizontal line")

    def run(self, config, args):
        return harness.run_log_process(config, args.taus, args.eta)


class SineDemoCommand(ExperimentCommand):
    name = "sine-demo"
    help = "Microscopic-scale covariance against the sine-process curve."
    experiment = Experiment.SINE_KERNEL


class SemicircleKSCommand(ExperimentCommand):
    name = "semicircle-ks"
    help = "Kolmogorov-Smirnov distance of spectra to the semicircle law."
    experiment = Experiment.SEMICIRCLE_KS


class LocalLawCommand(ExperimentCommand):
    name = "local-law"
    help = "Empirical Stieltjes transform against the local semicircle law."
    experiment = Experiment.LOCAL_LAW


class GPSampleCommand(BaseCommand):
    name = "gp-sample"
    help = "Draw Gaussian limit paths; optionally check their covariance by Monte Carlo."

    def add_arguments(self, parser):
        parser.add_argument("--origin", choices=[o.value for o in PathOrigin], default=PathOrigin.CAYLEY_SERIES.value)
        parser.add_argument(
            "--point",
            dest="points",
            type=_parse_point,
            action="append",
            help="TAU,ETA evaluation point (repeatable)",
        )
        parser.add_argument("--hurst", type=float, default=0.0, help="Hurst parameter H < 1")
        parser.add_argument("--terms", type=int, help="series truncation order (default: automatic)")
        parser.add_argument("--taus", type=float, nargs="+", default=[0.0, 0.5, 1.0, 2.0])
        parser.add_argument("--eta", type=float, default=0.5, help="height of integrated paths")
        parser.add_argument("--check", type=int, metavar="COUNT", help="Monte Carlo check with COUNT draws")

    def draw(self, args) -> processes.GPPath:
        origin = PathOrigin(args.origin)
        rng = derive(args.seed or 0, PATH, list(PathOrigin).index(origin))
        if origin is PathOrigin.INTEGRATED_GAMMA:
            return processes.integrated_gamma_sample(args.taus, args.eta, rng)
        if not args.points:
            raise ConfigurationError(f"{origin.value} paths need at least one --point")
        if origin is PathOrigin.CAYLEY_SERIES:
            return processes.cayley_series_sample(args.points, args.hurst, rng, terms=args.terms)
        return processes.cholesky_gp_sample(processes.ComplexGaussianSpec.gamma(args.points, args.hurst), rng)

    def handle(self, args):
        path = self.draw(args)
        out = Path(args.out or ".")
        written = write_path(out / f"{path.origin.value}_seed{args.seed or 0}.csv", path, {"seed": args.seed or 0})
        print(f"Wrote {path.origin.value} path with {len(path.points)} points to {written}")
        if not args.check:
            return ExitCode.OK
        report = harness.run_gp_check(
            args.origin,
            args.points or (),
            h=args.hurst,
            count=args.check,
            seed=args.seed or 0,
            terms=args.terms,
            taus=args.taus,
            eta=args.eta,
        )
        return _finish(report, args)


class HSVerifyCommand(BaseCommand):
    name = "hs-verify"
    help = "Check Helffer-Sjöstrand reconstruction and linear statistics against direct evaluation."

    def add_arguments(self, parser):
        parser.add_argument(
            "--function",
            dest="functions",
            choices=corpus.names(),
            action="append",
            help="test function to check (default: every compactly supported one)",
        )
        parser.add_argument("--lambdas", type=int, default=100, help="number of evaluation points")
        parser.add_argument("--tol", type=float, help="quadrature tolerance")
        parser.add_argument("-n", "--n", type=int, help="also compare linear statistics on a GUE sample")
        parser.add_argument("--gamma", type=float, default=0.25, help="scale exponent of that comparison")

    def handle(self, args):
        functions = [corpus.get(name) for name in args.functions] if args.functions else None
        report = harness.run_hs_verify(functions, args.lambdas, args.tol, args.n, args.gamma, args.seed or 0)
        return _finish(report, args)


commands: list[BaseCommand] = [
    SampleCommand(),
    CovVCommand(),
    VarMesoCommand(),
    UniversalityCommand(),
    NormalityCommand(),
    LogProcessCommand(),
    SineDemoCommand(),
    SemicircleKSCommand(),
    LocalLawCommand(),
    GPSampleCommand(),
    HSVerifyCommand(),
]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mesowigner", description="Mesoscopic Wigner-matrix laboratory.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log at DEBUG level")
    parser.add_argument("--config", help="JSON experiment configuration")
    parser.add_argument("--seed", type=int, help="master seed (overrides the configuration)")
    parser.add_argument("--workers", type=int, help="worker threads (overrides the configuration)")
    parser.add_argument("--out", help="output directory")
    subparsers = parser.add_subparsers(dest="command", required=True, metavar="command")
    for command in commands:
        subparser = subparsers.add_parser(command.name, help=command.help, description=command.help)
        command.add_arguments(subparser)
        subparser.set_defaults(handler=command)
    return parser


def configure_logging(verbose: bool = False):
    handler = logging.StreamHandler()
    handler.setFormatter(logging.Formatter("%(asctime)s %(levelname)s %(name)s: %(message)s"))
    root = logging.getLogger("mesowigner")
    root.handlers[:] = [handler]
    root.setLevel(logging.DEBUG if verbose else logging.INFO)


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.verbose)
    try:
        return int(args.handler.handle(args))
    except SampleFailure as exc:
        logger.error("Aborted: sample %d with seed %d failed: %s", exc.sample_index, exc.seed, exc.cause)
        return int(ExitCode.RUNTIME_ERROR)
    except MesoError as exc:
        logger.error("%s", exc)
        return int(ExitCode.RUNTIME_ERROR)


if __name__ == "__main__":
    sys.exit(main())
