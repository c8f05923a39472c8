"""
Cálculo espectral y auditorías sobre matrices de Galerkin

Contiene el autosolver con orden lexicográfico, la verificación de la
descomposición por paridad, el rango numérico y el ajuste de sectores, las
auditorías de cota de forma y de sectorialidad, la norma de la resolvente, el
estudio de convergencia respecto a truncaciones del potencial y el diagnóstico
de decaimiento de autovectores.
"""
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union
import logging

import numpy as np
import scipy.linalg
from scipy.optimize import linear_sum_assignment
from scipy.stats import linregress

from assembly import (
    GalerkinMatrix,
    KIND_PARITY,
    OperatorKind,
    assemble,
    lattice_for,
    matched_windows,
    multiplication_matrix,
    operator_half_width,
    parity_blocks,
)
from errors import DomainError, FitError, PoleError, SolverError
from potentials import split_smooth_small, tail_norms, truncate
from seqspace import (
    CoeffSeq,
    FreqLattice,
    Parity,
    bracket,
    convolve,
    hs_norm,
)

logger = logging.getLogger(__name__)

DEFAULT_SAFETY_FACTOR = 2.0
POLE_THRESHOLD = 1e-12
DECAY_FLOOR = 1e-14

MatrixLike = Union[GalerkinMatrix, np.ndarray]


def _entries(a: MatrixLike) -> np.ndarray:
    return a.entries if isinstance(a, GalerkinMatrix) else np.asarray(a, dtype=complex)


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed))


def _complex_gaussian(rng: np.random.Generator, shape) -> np.ndarray:
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def _kind_of(lattice: FreqLattice) -> OperatorKind:
    return next(kind for kind, parity in KIND_PARITY.items() if parity is lattice.parity)


def _audit_lattice(kind: OperatorKind, v: CoeffSeq, half_width: Optional[int]) -> FreqLattice:
    covered = operator_half_width(kind, v.half_width)
    if half_width is None:
        return lattice_for(kind, covered)
    if half_width > covered:
        logger.warning(f"⚠️ La ventana de V ({v.half_width}) no cubre la retícula N={half_width}: matriz en banda")
    return lattice_for(kind, half_width)


# ============== ORDEN Y AUTOSOLVER ==============

def lex_order(values) -> np.ndarray:
    """Permutación estable: parte real creciente, empates por parte imaginaria"""
    values = np.asarray(values, dtype=complex).reshape(-1)
    return np.lexsort((values.imag, values.real))


def lex_sort(values) -> np.ndarray:
    values = np.asarray(values, dtype=complex).reshape(-1)
    return values[lex_order(values)]


def _eigensolve(entries: np.ndarray, vectors: bool = True) -> Tuple[np.ndarray, Optional[np.ndarray], float]:
    """Autovalores (orden lex), autovectores y residuo relativo max‖Av − λv‖/‖A‖"""
    if not np.all(np.isfinite(entries)):
        raise DomainError("la matriz contiene entradas no finitas")
    n = entries.shape[0]
    try:
        if np.array_equal(entries, entries.conj().T):
            w, v = scipy.linalg.eigh(entries)
            w = w.astype(complex)
        else:
            w, v = scipy.linalg.eig(entries)
    except (np.linalg.LinAlgError, ValueError) as e:
        raise SolverError(f"el autosolver no convergió: {e}", iterations=30 * n)
    order = lex_order(w)
    w, v = w[order], v[:, order]
    norm = float(np.linalg.norm(entries, 2))
    defects = np.linalg.norm(entries @ v - v * w, axis=0)
    residual = float(np.max(defects, initial=0.0)) / norm if norm > 0 else float(np.max(defects, initial=0.0))
    return w, (v if vectors else None), residual


@dataclass(frozen=True, eq=False)
class SpectrumReport:
    eigenvalues: np.ndarray = field(repr=False)
    kind: OperatorKind
    m: int
    lattice: FreqLattice
    fingerprint: str
    residual: float
    eigenvectors: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def half_width(self) -> int:
        return self.lattice.half_width

    def eigenvector(self, index: int) -> CoeffSeq:
        """Autovector (columna `index` en orden lex) como sucesión de coeficientes"""
        if self.eigenvectors is None:
            raise DomainError("el informe no conserva autovectores")
        return CoeffSeq(self.lattice, self.eigenvectors[:, index])

    def lowest(self, count: int) -> np.ndarray:
        return self.eigenvalues[:count]

    def rows(self) -> List[Dict]:
        return [{"index": i, "re": float(z.real), "im": float(z.imag)} for i, z in enumerate(self.eigenvalues)]

    def to_dict(self) -> Dict:
        return {
            "kind": self.kind.value,
            "m": self.m,
            "half_width": self.half_width,
            "fingerprint": self.fingerprint,
            "residual": self.residual,
            "count": int(self.eigenvalues.size),
            "eigenvalues": {
                "re": self.eigenvalues.real.tolist(),
                "im": self.eigenvalues.imag.tolist(),
            },
        }


def eigen(a: GalerkinMatrix, vectors: bool = True) -> SpectrumReport:
    """Espectro completo de la matriz densa, con multiplicidad, en orden lexicográfico"""
    w, v, residual = _eigensolve(a.entries, vectors)
    logger.debug(f"{a.kind.value} N={a.lattice.half_width}: {w.size} autovalores, residuo {residual:.2e}")
    return SpectrumReport(
        eigenvalues=w,
        kind=a.kind,
        m=a.m,
        lattice=a.lattice,
        fingerprint=a.fingerprint,
        residual=residual,
        eigenvectors=v,
    )


def matching_distance(a, b) -> float:
    """Máxima distancia |λ − μ| en el emparejamiento bipartito óptimo"""
    a = np.asarray(a, dtype=complex).reshape(-1)
    b = np.asarray(b, dtype=complex).reshape(-1)
    if a.size == 0 or b.size == 0:
        return 0.0
    cost = np.abs(a[:, None] - b[None, :])
    rows, cols = linear_sum_assignment(cost)
    return float(np.max(cost[rows, cols]))


# ============== DESCOMPOSICIÓN POR PARIDAD ==============

@dataclass(frozen=True, eq=False)
class DecompositionReport:
    half_width: int
    m: int
    distance: float
    tolerance: float
    norm: float
    odd_block_matches_minus: bool
    unmatched_frequency: int
    union: np.ndarray = field(repr=False)
    full: np.ndarray = field(repr=False)

    @property
    def passed(self) -> bool:
        return self.distance <= self.tolerance

    def to_dict(self) -> Dict:
        return {
            "half_width": self.half_width,
            "m": self.m,
            "distance": self.distance,
            "relative_distance": self.distance / self.norm if self.norm > 0 else self.distance,
            "tolerance": self.tolerance,
            "norm": self.norm,
            "passed": self.passed,
            "odd_block_matches_minus": self.odd_block_matches_minus,
            "unmatched_frequency": self.unmatched_frequency,
            "union": {"re": self.union.real.tolist(), "im": self.union.imag.tolist()},
            "full": {"re": self.full.real.tolist(), "im": self.full.imag.tolist()},
        }


def decomposition_check(v: CoeffSeq, m: int, half_width: int, tol: Optional[float] = None) -> DecompositionReport:
    """
    Compara spec(S) con spec(S₊) ⊔ spec(S₋) en ventanas emparejadas

    La matriz completa se restringe a las frecuencias −2N … 2N+1; con ello es
    exactamente la suma directa (permutada) de los bloques S₊(N) y S₋(N).
    Por defecto tol = 1e-8·‖S‖.
    """
    windows = matched_windows(half_width)
    if v.half_width < windows.potential_half_width:
        logger.warning(f"⚠️ V con ventana {v.half_width} < {windows.potential_half_width}: matrices en banda")
    a_plus = assemble(OperatorKind.S_PLUS, m, v, windows.plus)
    a_minus = assemble(OperatorKind.S_MINUS, m, v, windows.minus)
    a_full = assemble(OperatorKind.S_FULL, m, v, windows.full)

    blocks = parity_blocks(a_full)
    # el bloque impar lleva la frecuencia −(2N+1) en primera posición
    odd_exact = bool(np.array_equal(blocks.minus[1:, 1:], a_minus.entries))

    keep = windows.matched_positions()
    matched = a_full.entries[np.ix_(keep, keep)]
    full_eigs, _, _ = _eigensolve(matched, vectors=False)
    union = lex_sort(np.concatenate([
        _eigensolve(a_plus.entries, vectors=False)[0],
        _eigensolve(a_minus.entries, vectors=False)[0],
    ]))
    norm = float(np.linalg.norm(matched, 2))
    tolerance = 1e-8 * norm if tol is None else float(tol)
    distance = matching_distance(union, full_eigs)
    report = DecompositionReport(
        half_width=half_width, m=m, distance=distance, tolerance=tolerance, norm=norm,
        odd_block_matches_minus=odd_exact, unmatched_frequency=windows.unmatched_frequency,
        union=union, full=full_eigs,
    )
    logger.info(f"Descomposición N={half_width}: distancia {distance:.3e} (tol {tolerance:.3e})")
    return report


# ============== RANGO NUMÉRICO Y SECTORES ==============

@dataclass(frozen=True, eq=False)
class NumericalRange:
    """Puntos soporte z(θ) de Θ(A) y valores soporte μ(θ) = max Re(e^{−iθ}z)"""
    thetas: np.ndarray = field(repr=False)
    support: np.ndarray = field(repr=False)
    points: np.ndarray = field(repr=False)

    def contains(self, values, tol: float = 0.0) -> np.ndarray:
        """Pertenencia a la intersección de los semiplanos soporte muestreados"""
        values = np.asarray(values, dtype=complex).reshape(-1)
        proj = (np.exp(-1j * self.thetas)[None, :] * values[:, None]).real
        return np.all(proj <= self.support[None, :] + tol, axis=1)

    def rows(self) -> List[Dict]:
        return [
            {"theta": float(t), "support": float(s), "re": float(z.real), "im": float(z.imag)}
            for t, s, z in zip(self.thetas, self.support, self.points)
        ]

    def to_dict(self) -> Dict:
        return {
            "theta": self.thetas.tolist(),
            "support": self.support.tolist(),
            "re": self.points.real.tolist(),
            "im": self.points.imag.tolist(),
        }


def numerical_range(a: MatrixLike, n_theta: int, extra_angles: Sequence[float] = ()) -> NumericalRange:
    """Muestras de la frontera de Θ(A) vía el autovector extremo de la parte hermítica de e^{−iθ}A"""
    if n_theta < 3:
        raise DomainError(f"n_theta debe ser ≥ 3, recibido {n_theta}")
    entries = _entries(a)
    thetas = np.concatenate([np.linspace(0.0, 2 * np.pi, n_theta, endpoint=False),
                             np.asarray(extra_angles, dtype=float)])
    support = np.empty(thetas.size)
    points = np.empty(thetas.size, dtype=complex)
    for i, theta in enumerate(thetas):
        rotated = np.exp(-1j * theta) * entries
        herm = 0.5 * (rotated + rotated.conj().T)
        mu, vecs = scipy.linalg.eigh(herm)
        x = vecs[:, -1]
        support[i] = mu[-1]
        points[i] = np.vdot(x, entries @ x)
    return NumericalRange(thetas=thetas, support=support, points=points)


@dataclass(frozen=True)
class SectorFit:
    theta: float
    gamma: float
    satisfied: bool = True

    def contains(self, values, tol: float = 0.0) -> np.ndarray:
        """|arg(λ − γ)| ≤ θ, escrito como Re(λ) − γ ≥ |Im λ|/tan θ"""
        values = np.asarray(values, dtype=complex).reshape(-1)
        return values.real - self.gamma >= np.abs(values.imag) / np.tan(self.theta) - tol

    def to_dict(self) -> Dict:
        return {"theta": self.theta, "gamma": self.gamma, "satisfied": self.satisfied}


def sector_edge_angles(theta: float) -> Tuple[float, float]:
    """Direcciones normales a las aristas de Sect(γ, θ)"""
    return (np.pi / 2 + theta, -(np.pi / 2 + theta))


def sector_fit(samples, theta: float) -> SectorFit:
    if not 0 < theta < np.pi / 2:
        raise DomainError(f"theta debe estar en (0, π/2), recibido {theta}")
    samples = np.asarray(samples, dtype=complex).reshape(-1)
    gamma = float(np.min(samples.real - np.abs(samples.imag) / np.tan(theta)))
    return SectorFit(theta=float(theta), gamma=gamma, satisfied=bool(np.isfinite(gamma)))


# ============== CONSTANTE DE CONVOLUCIÓN ==============

@dataclass(frozen=True)
class ConvConstantEstimate:
    value: float
    witness: float
    trials: int
    seed: int

    def inflated(self, safety_factor: float = DEFAULT_SAFETY_FACTOR) -> float:
        return safety_factor * self.value

    def to_dict(self) -> Dict:
        return {"c_est": self.value, "witness": self.witness, "trials": self.trials, "seed": self.seed}


def _weight_lattice(lattice: FreqLattice) -> FreqLattice:
    """Retícula del potencial que actúa sobre `lattice`"""
    if lattice.parity is Parity.FULL_TWO_PERIODIC:
        return lattice
    return FreqLattice(Parity.PERIODIC_PLUS, lattice.half_width)


def _conv_ratio(w: CoeffSeq, u: CoeffSeq, m: int) -> float:
    denom = hs_norm(w, -m) * hs_norm(u, m)
    if denom == 0:
        return 0.0
    return hs_norm(convolve(w, u), -m) / denom


def estimate_conv_constant(m: int, lattice: FreqLattice, trials: int, seed: int) -> ConvConstantEstimate:
    """
    Supremo empírico de ‖W∗u‖_{−m} / (‖W‖_{−m}‖u‖_m)

    Siempre incluye el testigo W = unidad en 0, u = unidad en la frecuencia
    más baja, cuyo cociente es ⟨f₀⟩^{−2m}. Las pruebas se extraen en orden,
    así que el máximo no decrece con `trials`.
    """
    if trials < 1:
        raise DomainError(f"trials debe ser ≥ 1, recibido {trials}")
    w_lattice = _weight_lattice(lattice)
    f0 = int(np.argmin(np.abs(lattice.frequencies())))
    witness = _conv_ratio(CoeffSeq.unit(w_lattice, 0), CoeffSeq(lattice, np.eye(lattice.size)[f0]), m)

    w_weight = bracket(w_lattice.frequencies())
    u_weight = bracket(lattice.frequencies())
    even = w_lattice.frequencies() % 2 == 0
    rng = _rng(seed)
    best = witness
    for _ in range(trials):
        p_w, p_u = rng.uniform(-1.0, float(m)), rng.uniform(-float(m) - 1.0, 0.0)
        w_data = _complex_gaussian(rng, w_lattice.size) * w_weight ** p_w * even
        u_data = _complex_gaussian(rng, lattice.size) * u_weight ** p_u
        best = max(best, _conv_ratio(CoeffSeq(w_lattice, w_data), CoeffSeq(lattice, u_data), m))
    logger.debug(f"C_est(m={m}, {lattice.parity.value}, N={lattice.half_width}) = {best:.4f} tras {trials} pruebas")
    return ConvConstantEstimate(value=float(best), witness=float(witness), trials=trials, seed=seed)


def _test_vectors(lattice: FreqLattice, m: int, trials: int, rng: np.random.Generator) -> np.ndarray:
    """Filas u ~ gaussiana compleja × ⟨f⟩^{−m}"""
    return _complex_gaussian(rng, (trials, lattice.size)) * bracket(lattice.frequencies())[None, :] ** (-m)


def _quadratic_forms(entries: np.ndarray, u: np.ndarray) -> np.ndarray:
    """(A u, u) por fila"""
    return np.einsum("ti,ij,tj->t", u.conj(), entries, u)


# ============== AUDITORÍAS DE FORMA ==============

@dataclass(frozen=True)
class FormBoundAudit:
    delta: float
    max_slack: float
    violations: int
    scale: float
    trials: int
    seed: int
    c_est: float
    c: float
    cut: int
    v0_norm: float

    @property
    def passed(self) -> bool:
        return self.max_slack <= 1e-10 * self.scale

    def to_dict(self) -> Dict:
        return {
            "delta": self.delta, "max_slack": self.max_slack, "violations": self.violations,
            "scale": self.scale, "trials": self.trials, "seed": self.seed, "c_est": self.c_est,
            "c": self.c, "cut": self.cut, "v0_norm": self.v0_norm, "passed": self.passed,
        }


def form_bound_audit(v: CoeffSeq, m: int, delta: float, trials: int, seed: int,
                     kind: OperatorKind = OperatorKind.S_PLUS,
                     c_est: Optional[ConvConstantEstimate] = None,
                     safety_factor: float = DEFAULT_SAFETY_FACTOR,
                     half_width: Optional[int] = None) -> FormBoundAudit:
    """
    |t_V[u]| ≤ δ τ[u] + (C‖V₀‖_{H^m} + δ)‖u‖² sobre u aleatorios de la retícula

    Sin half_width se usa la mayor retícula que la ventana de V cubre entera.
    """
    if delta <= 0:
        raise DomainError(f"delta debe ser positivo, recibido {delta}")
    if OperatorKind(kind) is OperatorKind.S_FULL:
        raise DomainError("la auditoría de cota de forma se hace sobre SPlus o SMinus")
    lattice = _audit_lattice(kind, v, half_width)
    if c_est is None:
        c_est = estimate_conv_constant(m, lattice, trials, seed)
    c = c_est.inflated(safety_factor)
    split = split_smooth_small(v, delta, c, m)
    v0_norm = hs_norm(split.v0, m)

    symbol = (np.pi * lattice.frequencies().astype(float)) ** (2 * m)
    u = _test_vectors(lattice, m, trials, _rng(seed))
    lhs = np.abs(_quadratic_forms(multiplication_matrix(v, kind, lattice), u))
    power = np.abs(u) ** 2
    norm2 = np.sum(power, axis=1)
    rhs = delta * (power @ symbol) + (c * v0_norm + delta) * norm2
    slack = lhs - rhs
    max_slack = float(np.max(slack))
    violations = int(np.count_nonzero(slack > 1e-10 * rhs))
    audit = FormBoundAudit(delta=float(delta), max_slack=max_slack, violations=violations,
                           scale=float(np.max(rhs)), trials=trials, seed=seed, c_est=c_est.value, c=c,
                           cut=split.cut, v0_norm=v0_norm)
    mark = "✅" if audit.passed else "❌"
    logger.info(f"{mark} Cota de forma δ={delta}: holgura máx {max_slack:.3e}, {violations} violaciones")
    return audit


@dataclass(frozen=True)
class SectorialityRow:
    eps: float
    c_eps: float
    bound: float
    gamma: float

    @property
    def passed(self) -> bool:
        return self.c_eps <= self.bound

    def to_dict(self) -> Dict:
        return {"eps": self.eps, "c_eps": self.c_eps, "bound": self.bound,
                "gamma": self.gamma, "passed": self.passed}


@dataclass(frozen=True)
class SectorialityAudit:
    rows: Tuple[SectorialityRow, ...]
    trials: int
    seed: int
    c_est: float
    c: float

    @property
    def passed(self) -> bool:
        return all(row.passed for row in self.rows)

    def to_dict(self) -> Dict:
        return {"rows": [row.to_dict() for row in self.rows], "trials": self.trials,
                "seed": self.seed, "c_est": self.c_est, "c": self.c, "passed": self.passed}


def sectoriality_audit(v: CoeffSeq, m: int, lattice: FreqLattice, eps_list: Sequence[float],
                       trials: int, seed: int,
                       c_est: Optional[ConvConstantEstimate] = None,
                       safety_factor: float = DEFAULT_SAFETY_FACTOR) -> SectorialityAudit:
    """
    c_ε mínimo empírico con |Im(Su,u)| ≤ ε Re(Su,u) + c_ε‖u‖²

    Las mismas muestras u sirven para todos los ε. Pasa si c_ε no supera la
    forma teórica 2C‖V₀‖_{H^m} + ε, con V₀ de la división en δ = ε/2. El
    vértice del sector de semiángulo arctan ε es γ = −c_ε/ε.
    """
    bad = [eps for eps in eps_list if not 0 < eps < 0.5]
    if bad:
        raise DomainError(f"cada ε debe estar en (0, 1/2): {bad}")
    a = assemble(_kind_of(lattice), m, v, lattice)
    if c_est is None:
        c_est = estimate_conv_constant(m, lattice, trials, seed)
    c = c_est.inflated(safety_factor)

    u = _test_vectors(lattice, m, trials, _rng(seed))
    q = _quadratic_forms(a.entries, u)
    norm2 = np.sum(np.abs(u) ** 2, axis=1)
    rows = []
    for eps in eps_list:
        c_eps = max(0.0, float(np.max((np.abs(q.imag) - eps * q.real) / norm2)))
        v0 = split_smooth_small(v, eps / 2, c, m).v0
        bound = 2 * c * hs_norm(v0, m) + eps
        rows.append(SectorialityRow(eps=float(eps), c_eps=c_eps, bound=bound, gamma=-c_eps / eps))
    audit = SectorialityAudit(rows=tuple(rows), trials=trials, seed=seed, c_est=c_est.value, c=c)
    mark = "✅" if audit.passed else "❌"
    logger.info(f"{mark} Sectorialidad: " + ", ".join(f"c_{r.eps}={r.c_eps:.3e}" for r in rows))
    return audit


# ============== RESOLVENTE Y CONVERGENCIA ==============

def _shifted(entries: np.ndarray, lam: complex) -> np.ndarray:
    return entries - lam * np.eye(entries.shape[0])


def _check_pole(entries: np.ndarray, lam: complex) -> float:
    """σ_min(A − λI); PoleError si λ está a menos de 1e-12·‖A‖ del espectro"""
    sigma = scipy.linalg.svdvals(_shifted(entries, lam))
    norm = float(np.linalg.norm(entries, 2))
    sigma_min = float(sigma[-1])
    if sigma_min <= POLE_THRESHOLD * norm or sigma_min == 0:
        raise PoleError(f"λ = {lam} está en el espectro (σ_min = {sigma_min:.3e})",
                        {"lambda": [lam.real, lam.imag], "sigma_min": sigma_min})
    return sigma_min


def resolvent_norm(a: MatrixLike, lam: complex) -> float:
    """‖(A − λ)^{−1}‖₂ = 1/σ_min(A − λI)"""
    return 1.0 / _check_pole(_entries(a), complex(lam))


def _resolvent(entries: np.ndarray, lam: complex) -> np.ndarray:
    _check_pole(entries, lam)
    return scipy.linalg.inv(_shifted(entries, lam))


@dataclass(frozen=True)
class ConvergenceRow:
    n: int
    dist: float
    gap: float
    specdist: float
    a_n: float
    b_n: float
    pole: bool = False

    def csv_row(self) -> Dict:
        return {"n": self.n, "dist": self.dist, "gap": self.gap, "specdist": self.specdist}

    def to_dict(self) -> Dict:
        return {"n": self.n, "dist": self.dist, "gap": None if self.pole else self.gap,
                "specdist": self.specdist, "a_n": self.a_n, "b_n": self.b_n, "pole": self.pole}


@dataclass(frozen=True)
class ConvergenceTable:
    kind: OperatorKind
    m: int
    half_width: int
    lam: complex
    lowest: int
    c_est: float
    c: float
    rows: Tuple[ConvergenceRow, ...]

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(row, name) for row in self.rows], dtype=float)

    def fitted_slope(self) -> float:
        """Pendiente log-log de gap frente a dist sobre las filas con ambos positivos"""
        dist, gap = self.column("dist"), self.column("gap")
        mask = (dist > 0) & (gap > 0) & np.isfinite(gap)
        if np.count_nonzero(mask) < 2:
            raise FitError("menos de dos filas con gap y dist positivos")
        return float(linregress(np.log(dist[mask]), np.log(gap[mask])).slope)

    def envelope(self) -> float:
        """κ = max gap/dist: gap ≤ κ·dist en toda la tabla"""
        dist, gap = self.column("dist"), self.column("gap")
        mask = (dist > 0) & np.isfinite(gap)
        return float(np.max(gap[mask] / dist[mask], initial=0.0))

    def csv_rows(self) -> List[Dict]:
        return [row.csv_row() for row in self.rows]

    def to_dict(self) -> Dict:
        out = {
            "kind": self.kind.value, "m": self.m, "half_width": self.half_width,
            "lambda": [self.lam.real, self.lam.imag], "K": self.lowest,
            "c_est": self.c_est, "c": self.c, "envelope": self.envelope(),
            "rows": [row.to_dict() for row in self.rows],
        }
        try:
            out["fitted_slope"] = self.fitted_slope()
        except FitError:
            out["fitted_slope"] = None
        return out


def convergence_study(v: CoeffSeq, m: int, kind: OperatorKind, schedule: Sequence[int], half_width: int,
                      lam: complex = complex(-1, -1), lowest: int = 5,
                      c_est: Optional[ConvConstantEstimate] = None,
                      safety_factor: float = DEFAULT_SAFETY_FACTOR,
                      trials: int = 200, seed: int = 0) -> ConvergenceTable:
    """
    Compara S(V_n) con S(V) en una ventana de Galerkin fija

    Por fila: dist = ‖V_n − V‖_{H^{−m}}, gap = ‖R(λ, A_n) − R(λ, A)‖₂ y la
    distancia de emparejamiento entre los K autovalores lex más bajos, más las
    constantes a_n, b_n de la convergencia en sentido generalizado.
    """
    kind = OperatorKind(kind)
    schedule = [int(n) for n in schedule]
    if any(b <= a for a, b in zip(schedule, schedule[1:])):
        raise DomainError(f"la secuencia de n debe ser estrictamente creciente: {schedule}")
    if schedule and (schedule[0] < 0 or schedule[-1] > v.half_width):
        raise DomainError(f"n debe estar en [0, {v.half_width}] (ventana del potencial)")
    lam = complex(lam)
    lattice = lattice_for(kind, half_width)
    a = assemble(kind, m, v, lattice)
    reference = _resolvent(a.entries, lam)
    ref_low = _eigensolve(a.entries, vectors=False)[0][:lowest]

    if c_est is None:
        c_est = estimate_conv_constant(m, lattice, trials, seed)
    c = c_est.inflated(safety_factor)
    v0_norm = hs_norm(split_smooth_small(v, 0.5, c, m).v0, m)
    tails = tail_norms(v, -m)

    rows = []
    for n in schedule:
        a_n = assemble(kind, m, truncate(v, n), lattice)
        dist = float(tails[n])
        specdist = matching_distance(_eigensolve(a_n.entries, vectors=False)[0][:lowest], ref_low)
        try:
            gap = float(np.linalg.norm(_resolvent(a_n.entries, lam) - reference, 2))
            pole = False
        except PoleError as e:
            logger.warning(f"⚠️ n={n}: {e.message}")
            gap, pole = float("nan"), True
        rows.append(ConvergenceRow(n=n, dist=dist, gap=gap, specdist=specdist,
                                   a_n=2 * (c * v0_norm + 1) * dist, b_n=2 * c * dist, pole=pole))
        logger.debug(f"n={n}: dist={dist:.3e} gap={gap:.3e} specdist={specdist:.3e}")
    logger.info(f"📊 Estudio de convergencia {kind.value} N={half_width}: {len(rows)} filas")
    return ConvergenceTable(kind=kind, m=m, half_width=half_width, lam=lam, lowest=lowest,
                            c_est=c_est.value, c=c, rows=tuple(rows))


@dataclass(frozen=True)
class FormConvergenceAudit:
    n: int
    dist: float
    a_n: float
    b_n: float
    shift: float
    max_slack: float
    trials: int
    seed: int

    @property
    def passed(self) -> bool:
        return self.max_slack <= 0

    def to_dict(self) -> Dict:
        return {"n": self.n, "dist": self.dist, "a_n": self.a_n, "b_n": self.b_n, "shift": self.shift,
                "max_slack": self.max_slack, "trials": self.trials, "seed": self.seed,
                "passed": self.passed}


def form_convergence_audit(v: CoeffSeq, m: int, n: int, kind: OperatorKind, trials: int, seed: int,
                           c_est: Optional[ConvConstantEstimate] = None,
                           safety_factor: float = DEFAULT_SAFETY_FACTOR,
                           half_width: Optional[int] = None) -> FormConvergenceAudit:
    """|t_n[u] − t[u]| ≤ a_n‖u‖² + b_n(Re t[u] + shift‖u‖²), shift tal que Re t + shift‖u‖² ≥ 0"""
    kind = OperatorKind(kind)
    lattice = _audit_lattice(kind, v, half_width)
    a = assemble(kind, m, v, lattice)
    a_n = assemble(kind, m, truncate(v, n), lattice)
    if c_est is None:
        c_est = estimate_conv_constant(m, lattice, trials, seed)
    c = c_est.inflated(safety_factor)
    dist = hs_norm(v - truncate(v, n), -m)
    v0_norm = hs_norm(split_smooth_small(v, 0.5, c, m).v0, m)
    coef_a, coef_b = 2 * (c * v0_norm + 1) * dist, 2 * c * dist

    herm = 0.5 * (a.entries + a.entries.conj().T)
    shift = max(0.0, -float(scipy.linalg.eigvalsh(herm)[0]))

    u = _test_vectors(lattice, m, trials, _rng(seed))
    t = _quadratic_forms(a.entries, u)
    t_n = _quadratic_forms(a_n.entries, u)
    norm2 = np.sum(np.abs(u) ** 2, axis=1)
    rhs = coef_a * norm2 + coef_b * (t.real + shift * norm2)
    slack = np.abs(t_n - t) - rhs
    tolerance = 1e-10 * np.maximum(np.abs(t), norm2)
    max_slack = float(np.max(slack - tolerance))
    audit = FormConvergenceAudit(n=n, dist=dist, a_n=coef_a, b_n=coef_b, shift=shift,
                                 max_slack=max_slack, trials=trials, seed=seed)
    logger.debug(f"Convergencia de formas n={n}: holgura máx {max_slack:.3e}")
    return audit


# ============== DECAIMIENTO DE AUTOVECTORES ==============

@dataclass(frozen=True)
class DecayFit:
    slope: float
    r2: float
    fit_range: Tuple[int, int]
    points: int

    def to_dict(self) -> Dict:
        return {"slope": self.slope, "r2": self.r2, "fit_range": list(self.fit_range), "points": self.points}


def decay_exponent(eigvec: CoeffSeq, fit_range: Optional[Tuple[int, int]] = None) -> DecayFit:
    """
    Pendiente de log|û(k)| frente a log⟨f_k⟩

    Por defecto se ajusta la mitad exterior de la ventana (N/2 < |k| ≤ N). Los
    coeficientes por debajo de 1e-14 (relativo al máximo) no entran en el ajuste.
    """
    n = eigvec.half_width
    if n < 16:
        raise DomainError(f"la ventana debe ser ≥ 16, recibida {n}")
    peak = float(np.max(np.abs(eigvec.coeffs)))
    if peak == 0:
        raise DomainError("el autovector es nulo")
    lo, hi = fit_range if fit_range is not None else (n // 2 + 1, n)
    if not 0 <= lo <= hi <= n:
        raise DomainError(f"rango de ajuste inválido ({lo}, {hi}) para N={n}")
    ks = np.abs(eigvec.lattice.indices())
    mags = np.abs(eigvec.coeffs) / peak
    mask = (ks >= lo) & (ks <= hi) & (mags > DECAY_FLOOR)
    freqs = eigvec.frequencies()[mask]
    if np.unique(np.abs(freqs)).size < 2:
        raise FitError(f"ajuste degenerado en |k| ∈ [{lo}, {hi}]: coeficientes por debajo de {DECAY_FLOOR}",
                       {"fit_range": [lo, hi]})
    fit = linregress(np.log(bracket(freqs)), np.log(mags[mask]))
    return DecayFit(slope=float(fit.slope), r2=float(fit.rvalue ** 2), fit_range=(lo, hi),
                    points=int(np.count_nonzero(mask)))
