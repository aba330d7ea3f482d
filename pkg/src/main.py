"""
Command-line interface for seamless-L0 penalized quantile regression
"""
import argparse
import logging
import sys
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from colorama import Fore, Style, init
from pydantic import ValidationError

# Initialize colorama for Windows
init()

# Add project root to path
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

from src import __version__
from src.config.run_config import CommandKind, RunConfig
from src.config.settings import Config, load_config_file, parse_float_list, setup_logging
from src.core.models import Dataset
from src.data_io.csv_io import read_csv
from src.data_io.reports import (
    build_report,
    dumps_report,
    rate_plot_frame,
    replications_frame,
    scoreboard_frame,
    write_report,
    write_table,
)
from src.inference.asymptotics import AsymptoticContext, confidence_interval, estimate_f0, sigma_hat
from src.selection.bic import select
from src.simulation.dgp import assumption_report, generate, make_error_dist
from src.simulation.harness import rate_ladder, run_replications
from src.simulation.models import SimScenario
from src.solver.lla import fit
from src.solver.models import FitResult
from src.utils.errors import (
    ContractViolation,
    DataError,
    NumericalFailure,
    SimulationError,
    SingularMatrixError,
    UsageError,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERICAL = 3

# Config-file keys; command-line flags use the same names with dashes
CONFIG_KEYS = (
    "input", "output", "tau", "lambda", "gamma", "lambda_grid", "gamma_grid", "level",
    "seed", "threads", "init", "max_outer", "max_sweeps",
    "n", "d", "beta0", "reps", "error", "error_param", "design", "rho", "lambda_scale", "ladder", "bic",
)
FLOAT_LIST_KEYS = ("lambda_grid", "gamma_grid", "beta0")
INT_LIST_KEYS = ("ladder",)

Tables = Dict[str, pd.DataFrame]


class _ArgumentParser(argparse.ArgumentParser):
    """argparse front end that reports misuse as UsageError instead of exiting"""

    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(
        prog="selo-qr",
        description="Sparse quantile regression with the seamless-L0 penalty",
    )
    parser.add_argument("command", choices=[c.value for c in CommandKind])
    parser.add_argument("--config", type=Path, help="key = value file; flags override its entries")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    for key in CONFIG_KEYS:
        flag = "--" + key.replace("_", "-")
        if key == "bic":
            parser.add_argument(flag, dest=key, action="store_const", const="true", help="also run BIC selection per replication")
        else:
            parser.add_argument(flag, dest=key, metavar=key.upper())
    return parser


def _describe(error: ValidationError) -> str:
    parts = []
    for item in error.errors():
        where = ".".join(str(p) for p in item["loc"])
        parts.append(f"{where}: {item['msg']}" if where else item["msg"])
    return "; ".join(parts)


def parse_args(argv: Optional[Sequence[str]] = None) -> RunConfig:
    """
    Merge the config file and command-line flags into a RunConfig

    Raises:
        UsageError: On unknown keys, malformed values or missing
            command-specific settings
    """
    args = vars(build_parser().parse_args(argv))
    command = args.pop("command")
    config_path = args.pop("config")

    values: Dict[str, object] = {}
    if config_path is not None:
        from_file = load_config_file(config_path)
        unknown = sorted(set(from_file) - set(CONFIG_KEYS))
        if unknown:
            raise UsageError(f"Unknown config key(s) in {config_path}: {', '.join(unknown)}")
        values.update(from_file)
    values.update({k: v for k, v in args.items() if v is not None})

    for key in FLOAT_LIST_KEYS:
        if key in values:
            values[key] = tuple(parse_float_list(values[key]))
    for key in INT_LIST_KEYS:
        if key in values:
            numbers = parse_float_list(values[key])
            if any(not float(v).is_integer() for v in numbers):
                raise UsageError(f"{key} must list whole numbers, got {values[key]!r}")
            values[key] = tuple(int(v) for v in numbers)

    try:
        return RunConfig.model_validate({"command": command, **values})
    except ValidationError as e:
        raise UsageError(_describe(e)) from e


class SeloCLI:
    """Runs one validated command and emits its report and tables"""

    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        self.interactive = sys.stderr.isatty()
        self.fit_cfg = cfg.fit_config()

    def status(self, message: str, color: str = Fore.CYAN) -> None:
        """Progress line on stderr; colored on a terminal"""
        if self.interactive:
            print(color + message + Style.RESET_ALL, file=sys.stderr)
        else:
            print(message, file=sys.stderr)

    def tolerances(self) -> dict:
        return self.fit_cfg.model_dump(mode="json", exclude={"threads"})

    def load(self) -> Dataset:
        ds = read_csv(self.cfg.input_path)
        self.status(f"Loaded {self.cfg.input_path}: n={ds.n}, d={ds.d}")
        return ds

    def intervals(self, ds: Dataset, res: FitResult) -> dict:
        """
        Normal-limit intervals for the selected coefficients

        The error density at zero is estimated from the residuals, so this is
        skipped for small samples or degenerate fits.
        """
        if len(res.active_set) == 0:
            return {"skipped": "empty active set"}
        try:
            f0 = estimate_f0(res.residuals)
            sigma = sigma_hat(ds, res.active_set)
            rows = []
            members = list(res.active_set)
            beta_A = res.beta_hat[members]
            for position, j in enumerate(members):
                u = np.zeros(len(members))
                u[position] = 1.0
                ctx = AsymptoticContext(sigma=sigma, f0=f0, tau=res.tau, n=ds.n, u=u)
                ci = confidence_interval(ctx, beta_A, self.cfg.level)
                rows.append({"index": j, **ci.to_dict()})
        except (ContractViolation, SingularMatrixError) as e:
            logger.warning(f"Intervals skipped: {e}")
            return {"skipped": str(e)}
        return {"f0_hat": f0, "level": self.cfg.level, "intervals": rows}

    def run_fit(self) -> Tuple[dict, dict, Tables]:
        ds = self.load()
        res = fit(ds, self.cfg.tau, self.cfg.tuning(), self.fit_cfg)
        self.status(f"✓ Fit converged={res.converged} after {res.outer_iters} outer iteration(s), {res.k_nonzero} nonzero(s)")
        diagnostics = {
            "n": ds.n,
            "d": ds.d,
            "tolerances": self.tolerances(),
            "inference": self.intervals(ds, res),
        }
        return res.to_dict(), diagnostics, {}

    def run_select(self) -> Tuple[dict, dict, Tables]:
        ds = self.load()
        bic_cfg = self.cfg.bic_config()
        sel = select(ds, self.cfg.tau, bic_cfg, self.fit_cfg)
        self.status(
            f"✓ BIC picked lambda={sel.best.lambda_:g}, gamma={sel.best.gamma:g} "
            f"with {sel.best.k_nonzero} nonzero(s); {sel.excluded_count} cell(s) over the cap"
        )
        diagnostics = {
            "n": ds.n,
            "d": ds.d,
            "tolerances": self.tolerances(),
            "bic": bic_cfg.model_dump(mode="json", exclude={"threads"}),
            "inference": self.intervals(ds, sel.fit),
        }
        return sel.to_dict(), diagnostics, {"scoreboard.csv": scoreboard_frame(sel)}

    def scenario(self, n: int) -> SimScenario:
        """Scenario for sample size n"""
        signal = self.cfg.signal()
        beta0 = np.zeros(self.cfg.dimension(n))
        beta0[:len(signal)] = signal
        return SimScenario(
            n=n,
            beta0=beta0,
            error=make_error_dist(self.cfg.error, self.cfg.error_param, self.cfg.tau),
            seed=self.cfg.seed,
            reps=self.cfg.reps,
            design=self.cfg.design,
            rho=self.cfg.rho,
            lambda_scale=self.cfg.lambda_scale,
            tuning=self.cfg.tuning(),
            with_bic=self.cfg.bic,
        )

    def run_simulate(self) -> Tuple[dict, dict, Tables]:
        # replications already run in parallel, so each BIC search stays serial
        bic_cfg = self.cfg.bic_config().model_copy(update={"threads": 1})
        diagnostics = {"tolerances": self.tolerances()}
        if self.cfg.bic:
            diagnostics["bic"] = bic_cfg.model_dump(mode="json", exclude={"threads"})

        if self.cfg.ladder:
            base = self.scenario(self.cfg.ladder[0])
            ladder = rate_ladder(self.cfg.ladder, base, self.fit_cfg, bic_cfg, threads=self.cfg.threads)
            self.status(f"✓ Ladder {list(ladder.ns)}: slope {ladder.slope:.3f}")
            result = {
                "ladder": ladder.to_dict(),
                "metrics": [m.to_dict() for m in ladder.metrics],
                "error": base.error.to_dict(),
            }
            tables = {
                "replications.csv": replications_frame(ladder.ns, ladder.metrics),
                "qq_plot.csv": ladder.metrics[-1].qq_frame(),
                "rate_plot.csv": ladder.to_frame(),
            }
            return result, diagnostics, tables

        sc = self.scenario(self.cfg.n)
        metrics = run_replications(sc, self.fit_cfg, bic_cfg, threads=self.cfg.threads)
        self.status(
            f"✓ {metrics.reps} replication(s), {metrics.failures} failed; "
            f"exact recovery {metrics.exact_recovery_rate:.3f}, median l2 {metrics.median_l2:.4g}"
        )
        first, _ = generate(sc, 0)
        diagnostics["assumptions"] = assumption_report(first, sc.effective_tuning()).to_dict()
        result = {"scenario": sc.to_dict(), "metrics": metrics.to_dict()}
        tables = {
            "replications.csv": replications_frame([sc.n], [metrics]),
            "qq_plot.csv": metrics.qq_frame(),
            "rate_plot.csv": rate_plot_frame([sc], [metrics]),
        }
        return result, diagnostics, tables

    def run_check(self) -> Tuple[dict, dict, Tables]:
        ds = self.load()
        report = assumption_report(ds, self.cfg.tuning())
        self.status(f"✓ Design eigenvalues in [{report.lambda_min:.4g}, {report.lambda_max:.4g}]")
        return report.to_dict(), {"n": ds.n, "d": ds.d}, {}

    def execute(self) -> dict:
        """Run the command; write outputs under --output or print the report to stdout"""
        handlers = {
            CommandKind.FIT: self.run_fit,
            CommandKind.SELECT: self.run_select,
            CommandKind.SIMULATE: self.run_simulate,
            CommandKind.CHECK: self.run_check,
        }
        command = self.cfg.command
        result, diagnostics, tables = handlers[command]()
        report = build_report(command.value, self.cfg.echo(), result, diagnostics)

        out = self.cfg.output_path
        if out is None:
            sys.stdout.write(dumps_report(report))
            return report

        write_report(report, out / f"{command.value}.json")
        for name, frame in tables.items():
            write_table(frame, out / name)
        self.status(f"✓ Results written to {out}", Fore.GREEN)
        return report


def run(cfg: RunConfig) -> int:
    """
    Execute a validated configuration and map failures to exit codes

    Returns:
        0 on success, 1 on usage errors, 2 on data errors, 3 on numerical failures
    """
    try:
        SeloCLI(cfg).execute()
        return EXIT_OK
    except UsageError as e:
        code, message = EXIT_USAGE, f"Usage error: {e}"
    except (NumericalFailure, SimulationError) as e:
        code, message = EXIT_NUMERICAL, f"Numerical failure: {e}"
    except (DataError, ContractViolation) as e:
        code, message = EXIT_DATA, f"Data error: {e}"
    except OSError as e:
        code, message = EXIT_DATA, f"I/O error: {e}"

    logger.error(message)
    print(Fore.RED + f"❌ {message}" + Style.RESET_ALL, file=sys.stderr)
    return code


def main(argv: Optional[List[str]] = None) -> int:
    """Entry point"""
    setup_logging()
    try:
        Config.validate()
        cfg = parse_args(argv)
    except ValueError as e:
        print(Fore.RED + f"❌ Usage error: {e}" + Style.RESET_ALL, file=sys.stderr)
        return EXIT_USAGE
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
