"""
Espacios de sucesiones con peso h^s y retículas de frecuencias

Una función (o distribución) periódica se representa por una ventana finita de
sus coeficientes de Fourier sobre una de tres retículas:

- PeriodicPlus:      frecuencia física 2k   (base e^{i2kπx} en (0,1))
- SemiperiodicMinus: frecuencia física 2k+1 (base e^{i(2k+1)πx} en (0,1))
- FullTwoPeriodic:   frecuencia física k    (base e^{ikπx} en (−1,1))

Las normas de Sobolev pesan siempre por la frecuencia FÍSICA, de modo que la
extensión a la retícula completa es una isometría exacta.
"""
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Optional
import logging

import numpy as np

from errors import DimensionError, DomainError, InputError

logger = logging.getLogger(__name__)

# Índice de Sobolev s; cualquier real finito (puede ser negativo)
SobolevIndex = float


class Parity(str, Enum):
    """Familia de exponenciales de la retícula"""
    PERIODIC_PLUS = "plus"
    SEMIPERIODIC_MINUS = "minus"
    FULL_TWO_PERIODIC = "full"


@dataclass(frozen=True)
class FreqLattice:
    """Ventana simétrica de índices {−N, …, N} con su regla de frecuencia física"""
    parity: Parity
    half_width: int

    def __post_init__(self):
        if int(self.half_width) != self.half_width or self.half_width < 1:
            raise DomainError(f"half_width debe ser un entero positivo, recibido {self.half_width}")
        object.__setattr__(self, "parity", Parity(self.parity))
        object.__setattr__(self, "half_width", int(self.half_width))

    @property
    def size(self) -> int:
        return 2 * self.half_width + 1

    def indices(self) -> np.ndarray:
        return np.arange(-self.half_width, self.half_width + 1)

    def frequencies(self) -> np.ndarray:
        """Frecuencia física entera de cada índice (sin el factor π)"""
        k = self.indices()
        if self.parity is Parity.PERIODIC_PLUS:
            return 2 * k
        if self.parity is Parity.SEMIPERIODIC_MINUS:
            return 2 * k + 1
        return k

    def position(self, k: int) -> int:
        if abs(k) > self.half_width:
            raise DimensionError(f"índice {k} fuera de la ventana ±{self.half_width}")
        return k + self.half_width

    def with_half_width(self, half_width: int) -> "FreqLattice":
        return FreqLattice(self.parity, half_width)


@dataclass(frozen=True, eq=False)
class CoeffSeq:
    """Coeficientes complejos indexados por k = −N … N; fuera de la ventana son cero"""
    lattice: FreqLattice
    coeffs: np.ndarray = field(repr=False)

    def __post_init__(self):
        data = np.array(self.coeffs, dtype=complex).reshape(-1)
        if data.shape[0] != self.lattice.size:
            raise DimensionError(
                f"se esperaban {self.lattice.size} coeficientes para N={self.lattice.half_width}, "
                f"recibidos {data.shape[0]}"
            )
        data.setflags(write=False)
        object.__setattr__(self, "coeffs", data)

    @classmethod
    def zeros(cls, lattice: FreqLattice) -> "CoeffSeq":
        return cls(lattice, np.zeros(lattice.size, dtype=complex))

    @classmethod
    def unit(cls, lattice: FreqLattice, k: int, value: complex = 1.0) -> "CoeffSeq":
        data = np.zeros(lattice.size, dtype=complex)
        data[lattice.position(k)] = value
        return cls(lattice, data)

    @property
    def half_width(self) -> int:
        return self.lattice.half_width

    @property
    def parity(self) -> Parity:
        return self.lattice.parity

    def frequencies(self) -> np.ndarray:
        return self.lattice.frequencies()

    def at(self, k: int) -> complex:
        """Coeficiente en el índice k (cero fuera de la ventana)"""
        if abs(k) > self.half_width:
            return 0j
        return complex(self.coeffs[k + self.half_width])

    def rewindow(self, half_width: int) -> "CoeffSeq":
        """Rellena con ceros o recorta a una nueva semi-anchura"""
        target = self.lattice.with_half_width(half_width)
        data = np.zeros(target.size, dtype=complex)
        keep = min(half_width, self.half_width)
        data[half_width - keep:half_width + keep + 1] = \
            self.coeffs[self.half_width - keep:self.half_width + keep + 1]
        return CoeffSeq(target, data)

    def _check_same(self, other: "CoeffSeq"):
        if self.lattice != other.lattice:
            raise DimensionError(f"retículas distintas: {self.lattice} vs {other.lattice}")

    def __add__(self, other: "CoeffSeq") -> "CoeffSeq":
        self._check_same(other)
        return CoeffSeq(self.lattice, self.coeffs + other.coeffs)

    def __sub__(self, other: "CoeffSeq") -> "CoeffSeq":
        self._check_same(other)
        return CoeffSeq(self.lattice, self.coeffs - other.coeffs)

    def scaled(self, factor: complex) -> "CoeffSeq":
        return CoeffSeq(self.lattice, factor * self.coeffs)

    def odd_part_max(self) -> float:
        """Máximo módulo en frecuencias físicas impares"""
        odd = self.frequencies() % 2 != 0
        return float(np.max(np.abs(self.coeffs[odd]), initial=0.0))

    def to_dict(self) -> Dict:
        return {
            "parity": self.parity.value,
            "half_width": self.half_width,
            "re": self.coeffs.real.tolist(),
            "im": self.coeffs.imag.tolist(),
        }

    @classmethod
    def from_dict(cls, data: Dict) -> "CoeffSeq":
        try:
            lattice = FreqLattice(Parity(data["parity"]), int(data["half_width"]))
            re = np.asarray(data["re"], dtype=float)
            im = np.asarray(data["im"], dtype=float)
        except (KeyError, TypeError, ValueError) as e:
            raise InputError(f"CoeffSeq JSON mal formado: {e}")
        if re.shape != im.shape:
            raise InputError("CoeffSeq JSON mal formado: 're' e 'im' con longitudes distintas")
        try:
            return cls(lattice, re + 1j * im)
        except DimensionError as e:
            raise InputError(f"CoeffSeq JSON mal formado: {e.message}")


@dataclass(frozen=True)
class ConvCheck:
    s: float
    r: float
    t: float
    verdict: "ConvVerdict"

    @property
    def licensed(self) -> bool:
        """Solo el caso VALID autoriza el producto; CRITICAL se trata como rechazo"""
        return self.verdict is ConvVerdict.VALID


class ConvVerdict(str, Enum):
    VALID = "valid"
    INVALID = "invalid"
    CRITICAL = "critical"


def bracket(freq) -> np.ndarray:
    """⟨n⟩ = 1 + |n|"""
    return 1.0 + np.abs(np.asarray(freq, dtype=float))


def hs_norm(a: CoeffSeq, s: SobolevIndex) -> float:
    """Norma de Sobolev pesada por la frecuencia física"""
    weights = bracket(a.frequencies()) ** (2.0 * s)
    return float(np.sqrt(np.sum(weights * np.abs(a.coeffs) ** 2)))


def hs_pairing(a: CoeffSeq, b: CoeffSeq) -> complex:
    """Emparejamiento ⟨a, b⟩ = Σ a(k) conj(b(k)) que extiende el producto de L₂"""
    a._check_same(b)
    return complex(np.sum(a.coeffs * np.conj(b.coeffs)))


def _product_parity(pa: Parity, pb: Parity) -> Parity:
    if pa is Parity.FULL_TWO_PERIODIC:
        return pa
    if pa is pb:
        return Parity.PERIODIC_PLUS
    return Parity.SEMIPERIODIC_MINUS


def convolve(a: CoeffSeq, b: CoeffSeq) -> CoeffSeq:
    """
    (a∗b)(k) = Σ_j a(k−j) b(j) sobre la ventana común

    La paridad del resultado sigue la regla de grupo (par∗par = par,
    par∗impar = impar, impar∗impar = par); los productos fuera de la
    ventana se descartan.
    """
    if a.half_width != b.half_width:
        raise DimensionError(
            f"ventanas incompatibles: N={a.half_width} vs N={b.half_width}"
        )
    full_a = a.parity is Parity.FULL_TWO_PERIODIC
    full_b = b.parity is Parity.FULL_TWO_PERIODIC
    if full_a != full_b:
        raise DimensionError("no se puede convolucionar la retícula completa con una retícula de paridad")

    n = a.half_width
    # impar∗impar: (2i+1)+(2j+1) = 2(i+j+1)
    shift = 1 if (a.parity is Parity.SEMIPERIODIC_MINUS and b.parity is Parity.SEMIPERIODIC_MINUS) else 0
    raw = np.convolve(a.coeffs, b.coeffs)
    window = raw[n - shift:3 * n - shift + 1]
    return CoeffSeq(FreqLattice(_product_parity(a.parity, b.parity), n), window)


def conv_gate(s: float, r: float, t: float) -> ConvCheck:
    """Criterio de continuidad s + r − t > 1/2 del lema de convolución"""
    if s < 0 or r < 0:
        raise DomainError(f"se requiere s ≥ 0 y r ≥ 0 (s={s}, r={r})")
    if t > min(s, r):
        raise DomainError(f"se requiere t ≤ min(s, r) (t={t}, min={min(s, r)})")
    total = s + r - t
    if total > 0.5:
        verdict = ConvVerdict.VALID
    elif total < 0.5:
        verdict = ConvVerdict.INVALID
    else:
        verdict = ConvVerdict.CRITICAL
    return ConvCheck(s=s, r=r, t=t, verdict=verdict)


def embed_full(f: CoeffSeq) -> CoeffSeq:
    """Extiende una sucesión de (0,1) a la retícula 2-periódica de (−1,1)"""
    if f.parity is Parity.FULL_TWO_PERIODIC:
        raise DomainError("embed_full espera una retícula PeriodicPlus o SemiperiodicMinus")
    out_width = 2 * f.half_width + 1
    data = np.zeros(2 * out_width + 1, dtype=complex)
    data[f.frequencies() + out_width] = f.coeffs
    return CoeffSeq(FreqLattice(Parity.FULL_TWO_PERIODIC, out_width), data)


def restrict_parity(f: CoeffSeq, parity: Parity, half_width: Optional[int] = None) -> CoeffSeq:
    """Inversa de embed_full: lee las frecuencias pares (o impares) de la retícula completa"""
    if f.parity is not Parity.FULL_TWO_PERIODIC:
        raise DomainError("restrict_parity espera una retícula FullTwoPeriodic")
    parity = Parity(parity)
    if parity is Parity.FULL_TWO_PERIODIC:
        raise DomainError("la paridad destino debe ser plus o minus")
    if half_width is None:
        m = f.half_width
        half_width = m // 2 if parity is Parity.PERIODIC_PLUS else max((m - 1) // 2, 1)
    target = FreqLattice(parity, half_width)
    freqs = target.frequencies()
    inside = np.abs(freqs) <= f.half_width
    data = np.zeros(target.size, dtype=complex)
    data[inside] = f.coeffs[freqs[inside] + f.half_width]
    return CoeffSeq(target, data)
