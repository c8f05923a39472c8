"""
hillspec - interfaz de línea de comandos por lotes

    hillspec spectrum|decompose|converge|numrange|formbound|sector|regularity|potinfo <config.json>
             [--out PATH] [--format json|csv] [--seed INT]

La configuración es un JSON (o un informe previo, cuya configuración
incrustada se reutiliza). Códigos de salida: 0 éxito, 1 entrada inválida,
2 auditoría fallida, 3 fallo numérico.

El script ejecutable `hillspec` de la raíz del repositorio llama a main();
`python cli.py ...` es equivalente.
"""
from typing import Callable, Dict, List, Optional, Tuple, Union
import argparse
import json
import logging
import math
import sys
import time

import numpy as np
from pydantic import ValidationError

from assembly import assemble_spec, lattice_for, matched_windows, potential_window
from errors import ConfigValidationError, HillspecError
from models import CSV_COMMANDS, RANDOMIZED_COMMANDS, Command, EngineConfig, JobConfig, OutputFormat
from potentials import is_real_valued, materialize, membership, tail_norms
from report_handler import ReportHandler
from seqspace import FreqLattice, Parity, hs_norm
from spectral import (
    convergence_study,
    decay_exponent,
    decomposition_check,
    eigen,
    estimate_conv_constant,
    form_bound_audit,
    numerical_range,
    sector_edge_angles,
    sector_fit,
    sectoriality_audit,
)

logger = logging.getLogger(__name__)

PASS, WARN, FAIL = "PASS", "WARN", "FAIL"
EXIT_CODES = {PASS: 0, WARN: 0, FAIL: 2}
REGULARITY_MARGIN = 0.3

report_handler = ReportHandler()


# ============== VALIDACIÓN ==============

def _error_messages(exc: ValidationError) -> List[str]:
    messages = []
    for err in exc.errors():
        path = ".".join(str(p) for p in err["loc"])
        msg = err["msg"].removeprefix("Value error, ")
        messages.append(f"{path}: {msg}" if path else msg)
    return messages


def validate(config: Union[str, Dict]) -> JobConfig:
    """Normaliza un texto JSON (configuración o informe) en un JobConfig con todos los valores por defecto"""
    if isinstance(config, str):
        try:
            config = json.loads(config)
        except json.JSONDecodeError as e:
            raise ConfigValidationError([f"JSON inválido: {e}"])
    if not isinstance(config, dict):
        raise ConfigValidationError(["la configuración debe ser un objeto JSON"])
    if "config" in config and "tool" in config:
        config = config["config"]
    try:
        return JobConfig.model_validate(config)
    except ValidationError as e:
        raise ConfigValidationError(_error_messages(e))


# ============== TRABAJOS ==============

def _plus_potential(job: JobConfig):
    return materialize(job.potential, FreqLattice(Parity.PERIODIC_PLUS, potential_window(job.kind, job.half_width)))


def _spectrum(job: JobConfig) -> Tuple[str, Dict, List[Dict]]:
    a, v = assemble_spec(job.kind, job.m, job.potential, job.half_width)
    report = eigen(a, vectors=False)
    result = report.to_dict()
    result["potential"] = job.potential.describe()
    result["real_potential"] = is_real_valued(v)
    result["max_abs_imag"] = float(np.max(np.abs(report.eigenvalues.imag), initial=0.0))
    if job.export_matrix:
        if job.output:
            result["matrix_files"] = report_handler.write_matrix(a, job.output)
        else:
            logger.warning("⚠️ export_matrix requiere --out; la matriz no se exporta")
    logger.info(f"📊 {report.eigenvalues.size} autovalores, residuo {report.residual:.2e}")
    return PASS, result, report.rows()


def _decompose(job: JobConfig) -> Tuple[str, Dict, List[Dict]]:
    windows = matched_windows(job.half_width)
    v = materialize(job.potential, FreqLattice(Parity.PERIODIC_PLUS, windows.potential_half_width))
    report = decomposition_check(v, job.m, job.half_width, job.tol)
    return (PASS if report.passed else FAIL), report.to_dict(), []


def _converge(job: JobConfig) -> Tuple[str, Dict, List[Dict]]:
    v = _plus_potential(job)
    c_est = estimate_conv_constant(job.m, lattice_for(job.kind, job.half_width), job.trials, job.seed)
    table = convergence_study(v, job.m, job.kind, job.schedule, job.half_width, job.lambda_value,
                              job.lowest, c_est=c_est, safety_factor=job.safety_factor)
    status = FAIL if any(row.pole for row in table.rows) else PASS
    return status, table.to_dict(), table.csv_rows()


def _numrange(job: JobConfig) -> Tuple[str, Dict, List[Dict]]:
    a, _ = assemble_spec(job.kind, job.m, job.potential, job.half_width)
    nr = numerical_range(a, job.n_theta, sector_edge_angles(job.theta))
    eigenvalues = eigen(a, vectors=False).eigenvalues
    inside = nr.contains(eigenvalues, 1e-8 * a.norm())
    result = nr.to_dict()
    result["eigenvalues_inside"] = int(np.count_nonzero(inside))
    result["eigenvalues_total"] = int(inside.size)
    return (PASS if inside.all() else FAIL), result, nr.rows()


def _formbound(job: JobConfig) -> Tuple[str, Dict, List[Dict]]:
    v = _plus_potential(job)
    c_est = estimate_conv_constant(job.m, lattice_for(job.kind, job.half_width), job.trials, job.seed)
    audits = [form_bound_audit(v, job.m, delta, job.trials, job.seed, kind=job.kind,
                               c_est=c_est, safety_factor=job.safety_factor, half_width=job.half_width)
              for delta in job.delta]
    result = {"c_est": c_est.to_dict(), "audits": [audit.to_dict() for audit in audits]}
    return (PASS if all(audit.passed for audit in audits) else FAIL), result, []


def _sector(job: JobConfig) -> Tuple[str, Dict, List[Dict]]:
    lattice = lattice_for(job.kind, job.half_width)
    a, v = assemble_spec(job.kind, job.m, job.potential, job.half_width)
    c_est = estimate_conv_constant(job.m, lattice, job.trials, job.seed)
    audit = sectoriality_audit(v, job.m, lattice, job.eps, job.trials, job.seed,
                               c_est=c_est, safety_factor=job.safety_factor)
    nr = numerical_range(a, job.n_theta, sector_edge_angles(job.theta))
    fit = sector_fit(nr.points, job.theta)
    eigenvalues = eigen(a, vectors=False).eigenvalues
    inside = fit.contains(eigenvalues, 1e-8 * a.norm())
    by_eps = sorted(audit.rows, key=lambda row: row.eps)
    monotone = all(hi.c_eps <= lo.c_eps for lo, hi in zip(by_eps, by_eps[1:]))
    result = {
        "audit": audit.to_dict(),
        "c_eps_monotone": monotone,
        "sector": fit.to_dict(),
        "eigenvalues_inside": int(np.count_nonzero(inside)),
        "eigenvalues_total": int(inside.size),
    }
    return (PASS if audit.passed and inside.all() else FAIL), result, []


def _regularity(job: JobConfig) -> Tuple[str, Dict, List[Dict]]:
    a, _ = assemble_spec(job.kind, job.m, job.potential, job.half_width)
    ground = eigen(a).eigenvector(0)
    threshold = membership(job.potential)
    if job.alpha is not None:
        alpha = job.alpha
    elif math.isinf(threshold.s_star):
        alpha = 0.0
    else:
        alpha = threshold.alpha(job.m) + 0.25 / job.m
    target = -job.m * (2 - alpha)
    fit = decay_exponent(ground, job.fit_range)
    result = {
        "membership": threshold.to_dict(),
        "alpha": alpha,
        "target_slope": target,
        "margin": REGULARITY_MARGIN,
        "fit": fit.to_dict(),
    }
    if fit.slope > target + REGULARITY_MARGIN:
        logger.warning(f"⚠️ Pendiente {fit.slope:.3f} por encima del objetivo {target:.3f} + {REGULARITY_MARGIN}")
        return WARN, result, []
    return PASS, result, []


def _potinfo(job: JobConfig) -> Tuple[str, Dict, List[Dict]]:
    v = _plus_potential(job)
    result = {
        "potential": job.potential.describe(),
        "membership": membership(job.potential).to_dict(),
        "real_valued": is_real_valued(v),
        "norm_minus_m": hs_norm(v, -job.m),
        "tail_norms_minus_m": tail_norms(v, -job.m).tolist(),
        "coefficients": v.to_dict(),
    }
    return PASS, result, []


JOBS: Dict[Command, Callable[[JobConfig], Tuple[str, Dict, List[Dict]]]] = {
    Command.SPECTRUM: _spectrum,
    Command.DECOMPOSE: _decompose,
    Command.CONVERGE: _converge,
    Command.NUMRANGE: _numrange,
    Command.FORMBOUND: _formbound,
    Command.SECTOR: _sector,
    Command.REGULARITY: _regularity,
    Command.POTINFO: _potinfo,
}

CSV_LAYOUT = {
    Command.SPECTRUM: ReportHandler.SPECTRUM_COLUMNS,
    Command.CONVERGE: ReportHandler.CONVERGENCE_COLUMNS,
    Command.NUMRANGE: ReportHandler.NUMRANGE_COLUMNS,
}


def execute(job: JobConfig) -> Tuple[int, Dict, List[Dict]]:
    """Ejecuta el trabajo sin escribir archivos: (código de salida, informe, filas CSV)"""
    logger.info(f"🚀 {job.command.value}: {job.potential.describe()}, m={job.m}, {job.kind.value}, N={job.half_width}")
    start = time.perf_counter()
    status, result, rows = JOBS[job.command](job)
    wall_time = time.perf_counter() - start
    randomized = job.command in RANDOMIZED_COMMANDS
    report = ReportHandler.build_report(
        command=job.command.value,
        config=job.normalized(),
        seed=job.seed if randomized else None,
        trials=job.trials if randomized else None,
        wall_time=wall_time,
        status=status,
        result=result,
    )
    mark = "✅" if status != FAIL else "❌"
    logger.info(f"{mark} {job.command.value}: {status} en {wall_time:.2f}s")
    return EXIT_CODES[status], report, rows


def run(job: JobConfig) -> Tuple[int, Dict]:
    """Ejecuta el trabajo y escribe el informe en `job.output` si está definido"""
    code, report, rows = execute(job)
    if job.output:
        if job.format is OutputFormat.CSV and job.command in CSV_COMMANDS:
            report_handler.write_csv(rows, CSV_LAYOUT[job.command], job.output)
        else:
            report_handler.write_json(report, job.output)
    return code, report


# ============== MAIN ==============

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hillspec", description="Motor espectral para operadores periódicos de orden par")
    parser.add_argument("command", choices=[c.value for c in Command])
    parser.add_argument("config", help="configuración JSON o informe previo a reproducir")
    parser.add_argument("--out", help="ruta del informe (por defecto, salida estándar)")
    parser.add_argument("--format", choices=[f.value for f in OutputFormat])
    parser.add_argument("--seed", type=int)
    return parser


def load_job(command: str, path: str, out: Optional[str] = None,
             fmt: Optional[str] = None, seed: Optional[int] = None) -> JobConfig:
    data = report_handler.read_json(path)
    if not isinstance(data, dict):
        raise ConfigValidationError(["la configuración debe ser un objeto JSON"])
    if "config" in data and "tool" in data:
        data = data["config"]
    data = dict(data)
    data["command"] = command
    overrides = {"output": out, "format": fmt, "seed": seed}
    data.update({key: value for key, value in overrides.items() if value is not None})
    return validate(data)


def main(argv: Optional[List[str]] = None) -> int:
    logging.basicConfig(
        level=getattr(logging, EngineConfig.LOG_LEVEL.upper(), logging.INFO),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
    )
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        job = load_job(args.command, args.config, args.out, args.format, args.seed)
        code, report = run(job)
    except ConfigValidationError as e:
        parser.print_usage(sys.stderr)
        for message in e.errors:
            print(f"hillspec: error: {message}", file=sys.stderr)
        return e.exit_code
    except HillspecError as e:
        logger.error(f"❌ {type(e).__name__}: {e.message}")
        return e.exit_code
    if not job.output:
        print(json.dumps(report, indent=2, ensure_ascii=False))
    return code


if __name__ == "__main__":
    sys.exit(main())
