"""Command handlers behind the specsense CLI."""

import argparse
from typing import Any, Callable, Dict, List, Optional

import numpy as np
from pydantic import BaseModel, Field

from specsense.beta.approx import beta_fit_for, pfa, threshold_for_pfa
from specsense.config import (
    RocConfig,
    SimulationSettings,
    load_roc_config,
    validate_pfa_grid,
)
from specsense.detectors.statistics import DetectorKind
from specsense.moments.exact import moment_table
from specsense.simulator.engine import (
    MonteCarloEngine,
    approximation_error_study,
    pfa_curve,
    resolve_sigma,
    roc,
)
from specsense.utils.logging import get_logger
from specsense.utils.output import (
    RunManifest,
    render_csv,
    render_csv_comments,
    render_json,
    rows_to_records,
    sha256_text,
    write_manifest_sidecar,
    write_text,
)
from specsense.wishart.core import RngStream

logger = get_logger(__name__)

MOMENTS_HEADER = ["m", "numerator", "denominator", "value"]
THRESHOLD_HEADER = ["K", "N", "target_pfa", "zeta", "pfa_analytic"]
PFA_CURVE_HEADER = ["zeta", "pfa_analytic"]
PFA_CURVE_SIM_HEADER = ["zeta", "pfa_analytic", "pfa_empirical", "stderr"]
ROC_HEADER = ["pfa_target", "threshold", "pfa_empirical", "pd_empirical", "pd_stderr"]
STUDY_HEADER = ["N", "average_error", "trials"]


class UsageError(Exception):
    """Exception raised for invalid command-line arguments."""
    pass


class Table(BaseModel):
    """A header plus rows of cells."""

    header: List[str]
    rows: List[List[Any]] = Field(default_factory=list)


class CommandResult(BaseModel):
    """Output of one command: named tables, summary values and parameters."""

    command: str
    tables: Dict[str, Table]
    summary: Dict[str, Any] = Field(default_factory=dict)
    # scalars appended to stdout CSV as comment lines
    footer: Dict[str, Any] = Field(default_factory=dict)
    parameters: Dict[str, Any] = Field(default_factory=dict)
    seed: Optional[int] = None


def parse_float_list(text: str) -> List[float]:
    """Parse ``0.05,0.1,0.2`` into floats."""
    try:
        return [float(item) for item in text.split(",") if item.strip()]
    except ValueError as e:
        raise UsageError(f"Invalid number list: {text}") from e


def parse_int_list(text: str) -> List[int]:
    """Parse ``50,100,200`` into integers."""
    try:
        return [int(item) for item in text.split(",") if item.strip()]
    except ValueError as e:
        raise UsageError(f"Invalid integer list: {text}") from e


def parse_detectors(text: str) -> List[DetectorKind]:
    """Parse ``john,st,sle`` into detector kinds."""
    detectors = []
    for item in text.split(","):
        name = item.strip().lower()
        if not name:
            continue
        try:
            detectors.append(DetectorKind(name))
        except ValueError as e:
            valid = ", ".join(kind.value for kind in DetectorKind)
            raise UsageError(f"Unknown detector: {name}. Must be one of {valid}") from e
    if not detectors:
        raise UsageError("At least one detector is required")
    return detectors


def _check_dims(K: int, N: int, min_k: int = 1) -> None:
    if K < min_k:
        raise UsageError(f"K must be at least {min_k}, got {K}")
    if N < K:
        raise UsageError(f"N must be at least K, got K={K}, N={N}")


class CommandHandler:
    """Dispatches parsed arguments to command implementations."""

    def __init__(self, settings: SimulationSettings):
        """Initialize command handler.

        Args:
            settings: Resolved run settings (file, environment and flags merged)
        """
        self.settings = settings
        self.commands: Dict[str, Callable[[argparse.Namespace], CommandResult]] = {
            "moments": self._handle_moments,
            "threshold": self._handle_threshold,
            "pfa-curve": self._handle_pfa_curve,
            "roc": self._handle_roc,
            "study": self._handle_study,
        }

    def handle(self, args: argparse.Namespace) -> CommandResult:
        """Run the command named by ``args.command``."""
        if args.command not in self.commands:
            raise UsageError(f"Unknown command: {args.command}")
        return self.commands[args.command](args)

    def _engine(self) -> MonteCarloEngine:
        return MonteCarloEngine.from_settings(self.settings)

    def _handle_moments(self, args: argparse.Namespace) -> CommandResult:
        """Exact moments of John's statistic for m = 0..m_max."""
        _check_dims(args.K, args.N)
        if not 0 <= args.m_max <= self.settings.moment_cap:
            raise UsageError(f"m-max must lie in [0, {self.settings.moment_cap}], got {args.m_max}")

        values = moment_table(args.K, args.N, args.m_max, self.settings.moment_cap)
        rows: List[List[Any]] = [
            [m, str(value.numerator), str(value.denominator), float(value)]
            for m, value in enumerate(values)
        ]
        return CommandResult(
            command="moments",
            tables={"moments": Table(header=MOMENTS_HEADER, rows=rows)},
            parameters={"K": args.K, "N": args.N, "m_max": args.m_max}
        )

    def _handle_threshold(self, args: argparse.Namespace) -> CommandResult:
        """Analytic threshold for a target false alarm probability."""
        _check_dims(args.K, args.N, min_k=2)
        if not 0.0 < args.target_pfa < 1.0:
            raise UsageError(f"target-pfa must lie in (0, 1), got {args.target_pfa}")

        fit = beta_fit_for(args.K, args.N, self.settings.moment_cap)
        zeta = threshold_for_pfa(args.target_pfa, fit)
        achieved = pfa(zeta, fit)
        logger.info("Threshold computed", extra={"K": args.K, "N": args.N, "zeta": zeta, "pfa": achieved})
        return CommandResult(
            command="threshold",
            tables={"threshold": Table(
                header=THRESHOLD_HEADER,
                rows=[[args.K, args.N, args.target_pfa, zeta, achieved]]
            )},
            summary={
                "zeta": zeta,
                "pfa_analytic": achieved,
                "alpha": fit.alpha,
                "beta": fit.beta,
                "M1": fit.M1,
                "M2": fit.M2,
            },
            parameters={"K": args.K, "N": args.N, "target_pfa": args.target_pfa}
        )

    def _handle_pfa_curve(self, args: argparse.Namespace) -> CommandResult:
        """Analytic false alarm curve, optionally against simulation."""
        _check_dims(args.K, args.N, min_k=2)
        zeta_lo = 1.0 / args.K if args.zeta_lo is None else args.zeta_lo
        zeta_hi = 1.0 if args.zeta_hi is None else args.zeta_hi
        if not 1.0 / args.K <= zeta_lo < zeta_hi <= 1.0:
            raise UsageError(f"Need 1/K <= zeta-lo < zeta-hi <= 1, got [{zeta_lo}, {zeta_hi}]")
        if args.points < 2:
            raise UsageError(f"points must be at least 2, got {args.points}")

        zetas = np.linspace(zeta_lo, zeta_hi, args.points)
        fit = beta_fit_for(args.K, args.N, self.settings.moment_cap)
        parameters: Dict[str, Any] = {
            "K": args.K, "N": args.N, "zeta_lo": zeta_lo, "zeta_hi": zeta_hi,
            "points": args.points, "simulate": args.simulate,
        }

        if not args.simulate:
            rows: List[List[Any]] = [[float(z), pfa(float(z), fit)] for z in zetas]
            return CommandResult(
                command="pfa-curve",
                tables={"pfa": Table(header=PFA_CURVE_HEADER, rows=rows)},
                parameters=parameters
            )

        trials = self.settings.trials
        parameters.update({"trials": trials, "chunk_size": self.settings.chunk_size})
        with self._engine() as engine:
            curve = pfa_curve(args.K, args.N, zetas, trials, RngStream(self.settings.seed), fit, engine)
        rows = [
            [float(z), float(a), float(e), float(s)]
            for z, a, e, s in zip(curve.zeta, curve.analytic, curve.empirical, curve.stderr)
        ]
        return CommandResult(
            command="pfa-curve",
            tables={"pfa": Table(header=PFA_CURVE_SIM_HEADER, rows=rows)},
            summary={"average_error": curve.average_error},
            footer={"average_error": curve.average_error},
            parameters=parameters,
            seed=self.settings.seed
        )

    def _resolve_roc_config(self, args: argparse.Namespace) -> RocConfig:
        roc_config = load_roc_config(args.scenario)
        updates: Dict[str, Any] = {}
        if args.detectors:
            updates["detectors"] = parse_detectors(args.detectors)
        if args.pfa_grid:
            try:
                updates["pfa_grid"] = validate_pfa_grid(parse_float_list(args.pfa_grid))
            except ValueError as e:
                raise UsageError(str(e)) from e

        scenario_updates: Dict[str, Any] = {}
        if args.seed is not None or "seed" not in roc_config.scenario.model_fields_set:
            scenario_updates["seed"] = self.settings.seed
        if args.trials is not None:
            scenario_updates["trials"] = args.trials
        if scenario_updates:
            updates["scenario"] = roc_config.scenario.model_copy(update=scenario_updates)
        return roc_config.model_copy(update=updates)

    def _handle_roc(self, args: argparse.Namespace) -> CommandResult:
        """ROC curves for each requested detector on one scenario."""
        roc_config = self._resolve_roc_config(args)
        scenario = roc_config.scenario
        if scenario.K < 2:
            raise UsageError(f"ROC runs need K >= 2, got K={scenario.K}")

        resolved = resolve_sigma(scenario)
        eigenvalues = np.linalg.eigvalsh(resolved.sigma)[::-1]
        parameters: Dict[str, Any] = {
            "scenario": scenario.model_dump(mode="json"),
            "snrs_linear": scenario.snrs_linear,
            "sigma_eigenvalues": [float(v) for v in eigenvalues],
            "detectors": [kind.value for kind in roc_config.detectors],
            "pfa_grid": roc_config.pfa_grid,
            "chunk_size": self.settings.chunk_size,
            "min_tail_samples": self.settings.min_tail_samples,
        }
        if resolved.channels is not None:
            parameters["channels"] = [
                [[float(h.real), float(h.imag)] for h in resolved.channels[:, i]]
                for i in range(resolved.channels.shape[1])
            ]

        rng = RngStream(scenario.seed)
        tables: Dict[str, Table] = {}
        with self._engine() as engine:
            for kind in roc_config.detectors:
                curve = roc(kind, scenario, roc_config.pfa_grid, rng, engine, sigma=resolved.sigma)
                tables[kind.value] = Table(
                    header=ROC_HEADER,
                    rows=[
                        [p.pfa_target, p.threshold, p.pfa.value, p.pd.value, p.pd.stderr]
                        for p in curve.points
                    ]
                )
        return CommandResult(command="roc", tables=tables, parameters=parameters, seed=scenario.seed)

    def _handle_study(self, args: argparse.Namespace) -> CommandResult:
        """Average approximation error of the analytic P_fa for several sample sizes."""
        sizes = parse_int_list(args.N_list)
        if not sizes:
            raise UsageError("N-list must not be empty")
        for N in sizes:
            _check_dims(args.K, N, min_k=2)
        if not 1.0 / args.K <= args.zeta_lo < args.zeta_hi <= 1.0:
            raise UsageError(f"Need 1/K <= zeta-lo < zeta-hi <= 1, got [{args.zeta_lo}, {args.zeta_hi}]")
        if args.points < 2:
            raise UsageError(f"points must be at least 2, got {args.points}")

        trials = self.settings.trials
        rows: List[List[Any]] = []
        with self._engine() as engine:
            for index, N in enumerate(sizes):
                error = approximation_error_study(
                    args.K, N, args.zeta_lo, args.zeta_hi, args.points, trials,
                    RngStream(self.settings.seed, index), engine
                )
                rows.append([N, error, trials])
        return CommandResult(
            command="study",
            tables={"study": Table(header=STUDY_HEADER, rows=rows)},
            parameters={
                "K": args.K, "N_list": sizes, "zeta_lo": args.zeta_lo, "zeta_hi": args.zeta_hi,
                "points": args.points, "trials": trials, "chunk_size": self.settings.chunk_size,
            },
            seed=self.settings.seed
        )


def build_manifest(result: CommandResult) -> RunManifest:
    """Manifest for a command result."""
    return RunManifest(
        command=result.command,
        parameters=result.parameters,
        seed=result.seed,
        results={key: value for key, value in result.summary.items()}
    )


def emit(result: CommandResult, output: Optional[str], output_format: str) -> RunManifest:
    """Write a result as CSV or JSON, with a manifest sidecar for file outputs.

    A multi-table result written to files produces ``<output>_<table>.csv``
    per table; written to stdout the tables are merged with a leading
    ``detector`` column. A single table on stdout is followed by its
    ``footer`` values as ``# name,value`` lines.
    """
    manifest = build_manifest(result)

    if output_format == "json":
        payload = {
            "command": result.command,
            "summary": result.summary,
            "tables": {name: rows_to_records(t.header, t.rows) for name, t in result.tables.items()},
        }
        text = render_json({**payload, "manifest": manifest.model_dump(mode="json")})
        write_text(text, output)
        return manifest

    if len(result.tables) == 1:
        table = next(iter(result.tables.values()))
        text = render_csv(table.header, table.rows)
        if output is None:
            write_text(text + render_csv_comments(result.footer))
            return manifest
        write_text(text, output)
        manifest.outputs[output] = sha256_text(text)
        write_manifest_sidecar(manifest, output)
        return manifest

    if output is None:
        header = ["detector", *next(iter(result.tables.values())).header]
        rows = [[name, *row] for name, table in result.tables.items() for row in table.rows]
        write_text(render_csv(header, rows))
        return manifest

    for name, table in result.tables.items():
        path = f"{output}_{name}.csv"
        text = render_csv(table.header, table.rows)
        write_text(text, path)
        manifest.outputs[path] = sha256_text(text)
    write_manifest_sidecar(manifest, output)
    return manifest


__all__ = [
    "CommandHandler",
    "CommandResult",
    "Table",
    "UsageError",
    "build_manifest",
    "emit",
    "parse_detectors",
    "parse_float_list",
    "parse_int_list",
]
