"""
Ensamblado de matrices de Galerkin truncadas

En la base exponencial ortonormal la matriz de la forma coincide con la del
operador: entrada (j, k) = (π f_j)^{2m}·[j=k] + V̂(f_j − f_k), con f la
frecuencia física. Las matrices son densas.
"""
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Tuple
import hashlib
import logging

import numpy as np

from errors import DomainError
from potentials import PotentialSpec, materialize
from seqspace import CoeffSeq, FreqLattice, Parity, conv_gate

logger = logging.getLogger(__name__)


class OperatorKind(str, Enum):
    S_PLUS = "SPlus"
    S_MINUS = "SMinus"
    S_FULL = "SFull"


KIND_PARITY = {
    OperatorKind.S_PLUS: Parity.PERIODIC_PLUS,
    OperatorKind.S_MINUS: Parity.SEMIPERIODIC_MINUS,
    OperatorKind.S_FULL: Parity.FULL_TWO_PERIODIC,
}


def lattice_for(kind: OperatorKind, half_width: int) -> FreqLattice:
    return FreqLattice(KIND_PARITY[OperatorKind(kind)], half_width)


def potential_window(kind: OperatorKind, half_width: int) -> int:
    """
    Semi-anchura (retícula plus) con la que se materializa V para un operador de semi-anchura N.

    Las diferencias f_j − f_k llegan a 4N en S±(N) y a 2N en S(N); en índice plus
    son 2N y N, así que la matriz entera queda cubierta sin bandas.
    """
    if OperatorKind(kind) is OperatorKind.S_FULL:
        return half_width
    return 2 * half_width


def operator_half_width(kind: OperatorKind, window: int) -> int:
    """Inversa de potential_window: mayor semi-anchura de operador que cubre una ventana de V"""
    if OperatorKind(kind) is OperatorKind.S_FULL:
        return window
    return window // 2


def potential_fingerprint(v: CoeffSeq) -> str:
    h = hashlib.sha256()
    h.update(f"{v.parity.value}:{v.half_width}:".encode())
    h.update(np.ascontiguousarray(v.coeffs).tobytes())
    return h.hexdigest()[:16]


@dataclass(frozen=True, eq=False)
class GalerkinMatrix:
    kind: OperatorKind
    m: int
    lattice: FreqLattice
    entries: np.ndarray = field(repr=False)
    fingerprint: str = ""

    def __post_init__(self):
        data = np.array(self.entries, dtype=complex)
        data.setflags(write=False)
        object.__setattr__(self, "entries", data)

    @property
    def size(self) -> int:
        return self.entries.shape[0]

    def norm(self) -> float:
        """Norma espectral ‖A‖₂"""
        return float(np.linalg.norm(self.entries, 2))

    def hermitian_defect(self) -> np.ndarray:
        return np.abs(self.entries - self.entries.conj().T)

    def is_hermitian(self) -> bool:
        return bool(np.array_equal(self.entries, self.entries.conj().T))

    def to_dict(self) -> Dict:
        return {
            "kind": self.kind.value,
            "m": self.m,
            "half_width": self.lattice.half_width,
            "fingerprint": self.fingerprint,
            "re": self.entries.real.ravel(order="C").tolist(),
            "im": self.entries.imag.ravel(order="C").tolist(),
        }

    def to_raw_bytes(self) -> bytes:
        """Volcado column-major, float64 little-endian, re/im intercalados"""
        return np.asarray(self.entries, dtype="<c16").ravel(order="F").tobytes()


def _check_parity(kind: OperatorKind, lattice: FreqLattice):
    if KIND_PARITY[OperatorKind(kind)] is not lattice.parity:
        raise DomainError(f"la retícula {lattice.parity.value} no corresponde al operador {OperatorKind(kind).value}")


def free_diagonal(kind: OperatorKind, m: int, lattice: FreqLattice) -> np.ndarray:
    """Símbolo libre (π f_k)^{2m}; |·| es inerte porque 2m es par"""
    _check_parity(kind, lattice)
    return (np.pi * lattice.frequencies().astype(float)) ** (2 * m)


def multiplication_matrix(v: CoeffSeq, kind: OperatorKind, lattice: FreqLattice) -> np.ndarray:
    """Matriz de Toeplitz en frecuencia física: entrada (j, k) = V̂(f_j − f_k)"""
    _check_parity(kind, lattice)
    if v.parity is Parity.SEMIPERIODIC_MINUS:
        raise DomainError("el potencial debe darse en la retícula plus o full")
    if v.parity is Parity.FULL_TWO_PERIODIC and v.odd_part_max() > 0:
        raise DomainError("el potencial tiene coeficientes impares no nulos (se requiere V̂(2k+1) = 0)")

    freqs = lattice.frequencies()
    diff = freqs[:, None] - freqs[None, :]
    nv = v.half_width
    if v.parity is Parity.PERIODIC_PLUS:
        vidx = diff // 2
        valid = (diff % 2 == 0) & (np.abs(vidx) <= nv)
    else:
        vidx = diff
        valid = np.abs(diff) <= nv
    out = np.zeros(diff.shape, dtype=complex)
    out[valid] = v.coeffs[vidx[valid] + nv]
    return out


def assemble(kind: OperatorKind, m: int, v: CoeffSeq, lattice: FreqLattice) -> GalerkinMatrix:
    """Matriz de la suma de formas D^{2m} ∔ V truncada a la ventana"""
    kind = OperatorKind(kind)
    if int(m) != m or m < 1:
        raise DomainError(f"el orden m debe ser un entero positivo, recibido {m}")
    gate = conv_gate(m, m, m)
    if not gate.licensed:
        raise DomainError(f"producto no autorizado por el lema de convolución: {gate}")
    entries = multiplication_matrix(v, kind, lattice)
    entries[np.diag_indices_from(entries)] += free_diagonal(kind, m, lattice)
    matrix = GalerkinMatrix(kind=kind, m=int(m), lattice=lattice, entries=entries,
                            fingerprint=potential_fingerprint(v))
    logger.debug(f"Ensamblada {kind.value} m={m} N={lattice.half_width} ({matrix.size}×{matrix.size})")
    return matrix


def assemble_spec(kind: OperatorKind, m: int, spec: PotentialSpec, half_width: int) -> Tuple[GalerkinMatrix, CoeffSeq]:
    """Materializa V en la ventana de trabajo y ensambla"""
    kind = OperatorKind(kind)
    v = materialize(spec, FreqLattice(Parity.PERIODIC_PLUS, potential_window(kind, half_width)))
    return assemble(kind, m, v, lattice_for(kind, half_width)), v


@dataclass(frozen=True)
class MatchedWindows:
    """S₊(N), S₋(N) y S(2N+1); la frecuencia −(2N+1) de S no tiene pareja en S₋(N)"""
    plus: FreqLattice
    minus: FreqLattice
    full: FreqLattice

    @property
    def unmatched_frequency(self) -> int:
        return -self.full.half_width

    @property
    def potential_half_width(self) -> int:
        """Ventana plus de V que cubre las tres retículas"""
        return self.full.half_width

    def matched_positions(self) -> np.ndarray:
        """Posiciones de la retícula completa con frecuencias −2N … 2N+1"""
        return np.flatnonzero(self.full.frequencies() != self.unmatched_frequency)


def matched_windows(half_width: int) -> MatchedWindows:
    return MatchedWindows(
        plus=FreqLattice(Parity.PERIODIC_PLUS, half_width),
        minus=FreqLattice(Parity.SEMIPERIODIC_MINUS, half_width),
        full=FreqLattice(Parity.FULL_TWO_PERIODIC, 2 * half_width + 1),
    )


@dataclass(frozen=True, eq=False)
class ParityBlocks:
    plus: np.ndarray = field(repr=False)
    minus: np.ndarray = field(repr=False)
    perm: np.ndarray = field(repr=False)
    plus_frequencies: np.ndarray = field(repr=False)
    minus_frequencies: np.ndarray = field(repr=False)


def parity_blocks(a: GalerkinMatrix) -> ParityBlocks:
    """Permuta S a (pares, impares); los bloques fuera de la diagonal son ceros estructurales"""
    if a.kind is not OperatorKind.S_FULL:
        raise DomainError("parity_blocks requiere una matriz SFull")
    freqs = a.lattice.frequencies()
    even = np.flatnonzero(freqs % 2 == 0)
    odd = np.flatnonzero(freqs % 2 != 0)
    entries = a.entries
    if np.any(entries[np.ix_(even, odd)] != 0) or np.any(entries[np.ix_(odd, even)] != 0):
        raise DomainError("coeficiente impar no nulo detectado: la matriz no se reduce por paridad")
    return ParityBlocks(
        plus=entries[np.ix_(even, even)],
        minus=entries[np.ix_(odd, odd)],
        perm=np.concatenate([even, odd]),
        plus_frequencies=freqs[even],
        minus_frequencies=freqs[odd],
    )
