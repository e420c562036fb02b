"""Experiment orchestration: certify, build resolvents, check positivity, simulate, report."""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from volterra_paths.config import ExperimentConfig, Settings, get_settings
from volterra_paths.core.exceptions import IllConditionedEigenbasisError, InvalidArgumentError, NoAngleBudgetError
from volterra_paths.core.grid import TimeGrid
from volterra_paths.kernels.kernel import laplace_consistency
from volterra_paths.kernels.quadrature import discretize_kernel
from volterra_paths.kernels.sector import SectorCertificate, verify_admissibility
from volterra_paths.positivity.bochner import angle_budget, bochner_check
from volterra_paths.positivity.gram import gram_positivity_check
from volterra_paths.resolvent.elliptic import choose_shift, operator_angle
from volterra_paths.resolvent.operator import (
    OperatorResolventTable,
    cross_method_difference,
    matrix_resolvent,
    resolvent_residual,
    spectral_resolvent,
    spectralize,
)
from volterra_paths.resolvent.scalar import laplace_bound_check
from volterra_paths.stochastic.convolution import convolve_ensemble, weak_solution_residual
from volterra_paths.stochastic.diagnostics import (
    JumpTransferReport,
    RegularityReport,
    ScalingReport,
    increment_scaling,
    jump_transfer_check,
    path_regularity_diagnostics,
)
from volterra_paths.stochastic.noise import NoiseSpec, simulate_ensemble
from volterra_paths.utils.csv_utils import CsvHandler
from volterra_paths.utils.json_utils import JsonHandler
from volterra_paths.utils.logging import configure_from, get_logger

logger = get_logger(__name__)

REPORT_FILES = {
    "certificate": "certificate.json",
    "resolvent": "resolvent_report.json",
    "positivity": "positivity.json",
    "simulation": "simulation_report.json",
}
MAX_EXPORTED_PATHS = 16
WEAK_RESIDUAL_PATHS = 8
COARSENING = 4


@dataclass
class WorkflowResult:
    """Outcome of one or more workflow steps."""

    checks: dict[str, bool] = field(default_factory=dict)
    files: list[str] = field(default_factory=list)
    notices: list[str] = field(default_factory=list)
    errors: list[str] = field(default_factory=list)

    @property
    def success(self) -> bool:
        return not self.errors and all(self.checks.values())

    def record(self, name: str, passed: bool) -> None:
        self.checks[name] = bool(passed)
        logger.info(f"Check {name}: {'passed' if passed else 'FAILED'}")

    def notice(self, message: str) -> None:
        self.notices.append(message)
        logger.warning(message)


@dataclass
class ResolventTables:
    """Resolvent tables of one experiment."""

    matrix: OperatorResolventTable
    spectral: OperatorResolventTable | None
    w: float


class ExperimentWorkflow:
    """
    Runs the steps of one experiment config.

    Each step writes its JSON report into the output directory and records
    its checks in the shared WorkflowResult.
    """

    def __init__(
        self,
        config: ExperimentConfig,
        output_dir: Path | None = None,
        settings: Settings | None = None,
        force: bool = False,
        threads: int | None = None,
    ):
        """
        Initialize workflow.

        Args:
            config: Experiment configuration
            output_dir: Report directory; config or settings default when omitted
            settings: Runtime settings (uses defaults if not provided)
            force: Continue past a failed kernel certificate
            threads: Worker threads for ensembles
        """
        self.settings = settings or get_settings()

        configure_from(self.settings.logging)

        self.config = config
        self.output_dir = Path(output_dir or config.output_dir or self.settings.runtime.output_dir)
        self.force = force
        self.threads = threads or self.settings.runtime.threads
        self.tolerances = config.effective_tolerances(self.settings.tolerances)

        self.kernel = config.kernel.build()
        self.A = config.operator_matrix()
        self.grid = config.grid.build()
        self.result = WorkflowResult()

        self._certificate: SectorCertificate | None = None
        self._rho: float | None = None
        self._sectorial = True
        self._tables: ResolventTables | None = None

    def _write(self, name: str, data: Any) -> Path:
        path = self.output_dir / name
        JsonHandler.dump_file(data, path)
        self.result.files.append(name)
        return path

    @property
    def rho(self) -> float:
        """
        Operator shift: the configured rho, else the smallest ladder shift making A - rho sectorial.

        Without an operator, or when A is already sectorial, the shift is 0.
        """
        if self._rho is not None:
            return self._rho
        self._rho = 0.0
        if self.config.rho is not None:
            self._rho = self.config.rho
        elif self.config.operator is not None and self.config.phiA_bound is None:
            if not operator_angle(self.A).dissipative:
                try:
                    self._rho, _ = choose_shift(self.A, np.pi / 2.0)
                except InvalidArgumentError as e:
                    self.result.notice(f"No shift found for the operator: {e.message}")
                else:
                    self.result.notice(f"Operator is not sectorial; using shift rho={self._rho:g}")
        return self._rho

    def _phiA_bound(self) -> tuple[float, dict[str, Any] | None]:
        if self.config.phiA_bound is not None:
            return self.config.phiA_bound, None
        if self.config.operator is None:
            return 0.0, None
        angle = operator_angle(self.A, self.rho)
        return angle.field_angle, angle.to_dict()

    def certify(self) -> SectorCertificate:
        """
        Step 1: Laplace cross-check and sector certificate of the kernel.

        Returns:
            SectorCertificate
        """
        logger.info(f"Step 1: Certifying kernel {self.kernel.name}")
        tol = self.tolerances
        report: dict[str, Any] = {"kernel": self.kernel.describe(), "tolerances": tol.model_dump()}

        if self.config.enabled("laplace"):
            lambdas = self.kernel.exp_order_w0 + np.array([0.5, 1.0, 2.0 + 3.0j, 10.0 - 5.0j, 1.0 + 50.0j])
            laplace = laplace_consistency(self.kernel, lambdas, tol.laplace_rel, tol.derivative_rel)
            report["laplace"] = laplace.to_dict()
            self.result.record("laplace", laplace.passed)

        phiA, angle = self._phiA_bound()
        report["operator_angle"] = angle
        report["rho"] = self.rho
        sectorial = phiA < np.pi / 2.0
        if not sectorial:
            self.result.notice(f"Operator angle {phiA:.6f} is not below pi/2; try a larger rho")
            self.result.record("operator_angle", False)
            phiA = float(np.nextafter(np.pi / 2.0, 0.0))

        cert = verify_admissibility(
            self.kernel,
            phiA,
            sampling=self.config.sampling.build(),
            rho=self.rho,
            slack=tol.sector_slack,
        )
        report["certificate"] = cert.to_dict()
        self._sectorial = sectorial
        report["passed"] = cert.passed and sectorial and self.result.checks.get("laplace", True)
        if self.config.enabled("certificate"):
            self.result.record("certificate", cert.passed)

        self._write(REPORT_FILES["certificate"], report)
        self._certificate = cert
        return cert

    @property
    def certificate(self) -> SectorCertificate:
        return self._certificate or self.certify()

    @property
    def w(self) -> float:
        return self.config.w if self.config.w is not None else self.certificate.w

    def _admissible(self) -> bool:
        if self.certificate.passed and self._sectorial:
            return True
        if self.force:
            self.result.notice("Kernel certificate failed; continuing because of --force")
            return True
        self.result.errors.append("Kernel certificate failed; rerun with --force to continue")
        return False

    def build_resolvents(self) -> ResolventTables | None:
        """
        Step 2: Matrix and spectral resolvents with residuals and their difference.

        Returns:
            ResolventTables, or None when the certificate blocks the step
        """
        if self._tables is not None:
            return self._tables
        if not self._admissible():
            return None

        cert = self.certificate
        tol = self.tolerances
        w = self.w
        rho = self.rho
        logger.info(f"Step 2: Building resolvents (dim={self.A.shape[0]}, n={self.grid.n}, w={w:g}, rho={rho:g})")

        kernel_grid = discretize_kernel(self.kernel, self.grid, w)
        matrix = matrix_resolvent(self.A, self.kernel, w, self.grid, rho=rho, kernel_grid=kernel_grid)
        report: dict[str, Any] = {"w": w, "rho": rho, "grid": self.grid.to_dict(), "tolerances": tol.model_dump()}

        scale = max(1.0, float(np.linalg.norm(self.A, 2)))
        residual = resolvent_residual(matrix, self.A, self.kernel, kernel_grid=kernel_grid)
        check_residual = resolvent_residual(matrix, self.A, self.kernel, rule="check", kernel_grid=kernel_grid)
        report["matrix"] = {"residual": residual, "check_residual": check_residual}
        matrix.to_csv(self.output_dir / "resolvent_matrix.csv")
        matrix.to_binary(self.output_dir / "resolvent_matrix.bin")
        self.result.files += ["resolvent_matrix.csv", "resolvent_matrix.bin"]
        if self.config.enabled("resolvent"):
            if rho == 0.0:
                self.result.record("resolvent", residual <= tol.resolvent_residual * scale)
            else:
                report["matrix"]["informational"] = True

        spectral: OperatorResolventTable | None = None
        try:
            spec = spectralize(self.A, tol.eigenbasis_condition)
        except IllConditionedEigenbasisError as e:
            self.result.notice(f"Spectral resolvent skipped: {e.message}")
            report["spectral"] = {"skipped": e.message, "condition_number": e.details.get("condition_number")}
        else:
            spectral = spectral_resolvent(spec, self.kernel, w, self.grid, kernel_grid=kernel_grid)
            report["spectral"] = {
                "residual": resolvent_residual(spectral, self.A, self.kernel, kernel_grid=kernel_grid),
                "condition_number": spec.condition_number,
            }
            spectral.to_csv(self.output_dir / "resolvent_spectral.csv")
            spectral.to_binary(self.output_dir / "resolvent_spectral.bin")

            diff = cross_method_difference(matrix, spectral)
            CsvHandler.write_table(
                self.output_dir / "resolvent_diff.csv", ["t", "max_abs_diff"], np.column_stack([self.grid.times, diff])
            )
            self.result.files += ["resolvent_spectral.csv", "resolvent_spectral.bin", "resolvent_diff.csv"]
            report["cross_method"] = {"max_diff": float(diff.max()), "tol": tol.cross_method}
            if self.config.enabled("cross_method"):
                self.result.record("cross_method", float(diff.max()) <= tol.cross_method)

        if self.config.enabled("bound") and cert.passed:
            bound = laplace_bound_check(self.kernel, cert, tol=tol.bound_check)
            report["bound"] = bound.to_dict()
            self.result.record("bound", bound.passed)

        report["commutator_defect"] = matrix.commutator_defect(self.A)
        report["passed"] = all(self.result.checks.get(k, True) for k in ("resolvent", "cross_method", "bound"))
        self._write(REPORT_FILES["resolvent"], report)
        self._tables = ResolventTables(matrix=matrix, spectral=spectral, w=w)
        return self._tables

    def check_positivity(self) -> dict[str, Any] | None:
        """
        Step 3: Gram check of e^{-w|t|} S(t) and the Bochner symbol test.

        Returns:
            Positivity report, or None when no resolvent is available
        """
        tables = self.build_resolvents()
        if tables is None:
            return None
        logger.info("Step 3: Checking positive definiteness")

        tol = self.tolerances
        indices = np.round(np.linspace(0, self.grid.n, self.config.positivity_samples)).astype(int)
        samples = self.grid.times[np.unique(indices)]
        report: dict[str, Any] = {"tolerances": tol.model_dump()}

        if self.config.enabled("gram"):
            gram = gram_positivity_check(tables.matrix, tables.w, samples, rel_tol=tol.gram_rel)
            report["gram"] = gram.to_dict()
            self.result.record("gram", gram.passed)

        if self.config.enabled("bochner"):
            phiA = self.certificate.phiA_bound
            try:
                budget = angle_budget(phiA, self.certificate)
            except NoAngleBudgetError as e:
                report["bochner"] = {"passed": False, "error": e.message, **e.details}
                self.result.record("bochner", False)
            else:
                bochner = bochner_check(self.kernel, budget, tables.w, tol=tol.bochner)
                report["budget"] = budget.to_dict()
                report["bochner"] = bochner.to_dict()
                self.result.record("bochner", bochner.passed)

        report["passed"] = all(self.result.checks.get(k, True) for k in ("gram", "bochner"))
        self._write(REPORT_FILES["positivity"], report)
        return report

    def simulate(self) -> dict[str, Any] | None:
        """
        Step 4: Noise ensemble, stochastic convolution and path diagnostics.

        Returns:
            Simulation report, or None when no resolvent is available
        """
        tables = self.build_resolvents()
        if tables is None:
            return None

        config = self.config
        tol = self.tolerances
        noise = config.noise.build(self.A.shape[0], config.seed)
        u0 = config.initial_value()
        logger.info(f"Step 4: Simulating {config.ensemble_size} paths (seed {config.seed})")

        noises = simulate_ensemble(
            noise, self.grid, config.ensemble_size, config.seed, self.threads, psd_tol=tol.covariance_psd
        )
        solutions = convolve_ensemble(
            tables.matrix, noises, u0, self.kernel, config.convolution_method, self.threads
        )
        report: dict[str, Any] = {
            "noise": noise.to_dict(),
            "ensemble_size": config.ensemble_size,
            "grid": self.grid.to_dict(),
            "tolerances": tol.model_dump(),
        }

        if config.enabled("weak_residual"):
            kernel_grid = discretize_kernel(self.kernel, self.grid, 0.0)
            checked = min(len(solutions), WEAK_RESIDUAL_PATHS)
            residuals = [
                weak_solution_residual(u, L, u0, self.kernel, self.A, kernel_grid=kernel_grid)
                for u, L in zip(solutions[:checked], noises[:checked])
            ]
            report["weak_residual"] = {"max": max(residuals), "paths": checked, "tol": tol.weak_residual}
            self.result.record("weak_residual", max(residuals) <= tol.weak_residual)

        if config.enabled("jump_transfer"):
            transfer = JumpTransferReport(n_jumps=0, matched=0)
            for u, L in zip(solutions, noises):
                transfer = transfer.merge(jump_transfer_check(u, L))
            report["jump_transfer"] = transfer.to_dict()
            self.result.record("jump_transfer", transfer.passed)

        if config.enabled("regularity"):
            mode = config.regularity_mode or ("cadlag" if noise.has_jumps else "continuous")
            regularity = path_regularity_diagnostics(
                solutions, mode, noises=noises, noise_energy=noise.energy(self.grid.T)
            )
            report["regularity"] = regularity.to_dict()
            passed = regularity.passed
            if mode == "continuous":
                scaling = self._increment_scaling(regularity, noise, u0, tables.w)
                if scaling is not None:
                    report["regularity"]["increment_scaling"] = scaling.to_dict()
                    passed = passed and scaling.passed
                    report["regularity"]["passed"] = passed
            self.result.record("regularity", passed)

        exported = min(len(solutions), MAX_EXPORTED_PATHS)
        for i in range(exported):
            noises[i].to_csv(self.output_dir / "paths" / f"noise_{i:04d}.csv")
            solutions[i].to_csv(self.output_dir / "paths" / f"solution_{i:04d}.csv")
        mean = np.mean([u.values for u in solutions], axis=0)
        mean_sq = np.mean([np.sum(np.abs(u.values) ** 2, axis=1) for u in solutions], axis=0)
        header = ["t", *(f"{p}_mean_{i}" for i in range(mean.shape[1]) for p in ("re", "im")), "mean_norm_sq"]
        pairs = np.stack([mean.real, mean.imag], axis=-1).reshape(mean.shape[0], -1)
        CsvHandler.write_table(self.output_dir / "ensemble_mean.csv", header, np.column_stack([self.grid.times, pairs, mean_sq]))
        self.result.files.append("ensemble_mean.csv")
        report["exported_paths"] = exported

        simulation_checks = ("weak_residual", "jump_transfer", "regularity")
        report["passed"] = all(self.result.checks.get(k, True) for k in simulation_checks)
        self._write(REPORT_FILES["simulation"], report)
        return report

    def _increment_scaling(
        self, fine: RegularityReport, noise: NoiseSpec, u0: np.ndarray, w: float
    ) -> ScalingReport | None:
        """Repeat the ensemble on a grid COARSENING times coarser and compare increment moduli."""
        n = self.grid.n // COARSENING
        if n < 2:
            self.result.notice(f"Grid of {self.grid.n} steps is too coarse for the increment scaling check")
            return None
        grid = TimeGrid(self.grid.T, n)
        config = self.config
        table = matrix_resolvent(self.A, self.kernel, w, grid, rho=self.rho)
        noises = simulate_ensemble(
            noise, grid, config.ensemble_size, config.seed, self.threads, psd_tol=self.tolerances.covariance_psd
        )
        solutions = convolve_ensemble(table, noises, u0, self.kernel, config.convolution_method, self.threads)
        coarse = path_regularity_diagnostics(solutions, "continuous")
        scaling = increment_scaling([coarse, fine])
        logger.info(f"Increment modulus n={n}: {coarse.max_increment:.3e}, n={self.grid.n}: {fine.max_increment:.3e}")
        return scaling

    def report(self) -> dict[str, Any]:
        """
        Step 5: Aggregate the reports present in the output directory.

        Returns:
            Summary with one pass flag per report
        """
        logger.info(f"Step 5: Aggregating reports in {self.output_dir}")
        return aggregate_reports(self.output_dir, self.result)

    def run(self) -> WorkflowResult:
        """
        Execute every step.

        Returns:
            WorkflowResult with outcome details
        """
        self.certify()
        if self.build_resolvents() is not None:
            self.check_positivity()
            self.simulate()
        self.report()
        return self.result


def aggregate_reports(output_dir: Path, result: WorkflowResult | None = None) -> dict[str, Any]:
    """
    Collect the pass flags of every report in a directory into summary.json.

    Args:
        output_dir: Directory holding the step reports
        result: Result to record the outcome in

    Returns:
        Summary dictionary
    """
    result = result if result is not None else WorkflowResult()
    reports: dict[str, Any] = {}
    for name, filename in REPORT_FILES.items():
        data = JsonHandler.safe_load_file(output_dir / filename)
        if data is None:
            continue
        reports[name] = {"file": filename, "passed": bool(data.get("passed", False))}

    if not reports:
        result.errors.append(f"No reports found in {output_dir}")
    summary = {"reports": reports, "passed": bool(reports) and all(r["passed"] for r in reports.values())}
    JsonHandler.dump_file(summary, output_dir / "summary.json")
    result.files.append("summary.json")
    result.record("report", summary["passed"])
    return summary
