"""
Potenciales distribucionales 1-periódicos

Un PotentialSpec describe de forma declarativa la familia del potencial y sus
parámetros; materialize() produce sus coeficientes V̂(2k) sobre una retícula.
Solo las frecuencias físicas pares llevan coeficientes no nulos.
"""
from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Literal, Optional, Tuple
import json
import logging
import math

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from errors import DomainError, InputError
from seqspace import CoeffSeq, FreqLattice, Parity, bracket, hs_norm, restrict_parity

logger = logging.getLogger(__name__)

ComplexPair = Tuple[float, float]


class PotentialFamily(str, Enum):
    ZERO = "zero"
    CONSTANT = "constant"
    TRIG_POLY = "trigpoly"
    DIRAC_COMB = "dirac_comb"
    DIRAC_COMB_DERIVATIVE = "dirac_comb_derivative"
    RANDOM_DECAY = "random_decay"
    EXPLICIT = "explicit"


_FAMILY_ALIASES = {f.value.replace("_", ""): f for f in PotentialFamily}

# Parámetros admitidos por familia y sus valores por defecto
_FAMILY_FIELDS: Dict[PotentialFamily, Dict[str, object]] = {
    PotentialFamily.ZERO: {},
    PotentialFamily.CONSTANT: {"value": None},
    PotentialFamily.TRIG_POLY: {"terms": None},
    PotentialFamily.DIRAC_COMB: {"amplitude": (1.0, 0.0)},
    PotentialFamily.DIRAC_COMB_DERIVATIVE: {"order": 1, "amplitude": (1.0, 0.0)},
    PotentialFamily.RANDOM_DECAY: {"exponent": 1.0, "seed": 0, "phase": "complex"},
    PotentialFamily.EXPLICIT: {"path": None},
}
_PARAMS = ("value", "terms", "amplitude", "order", "exponent", "seed", "phase", "path")


def as_pair(value) -> ComplexPair:
    """Acepta un número, un par [re, im] o {"re": .., "im": ..}"""
    if isinstance(value, bool):
        raise ValueError("se esperaba un número complejo")
    if isinstance(value, (int, float)):
        return (float(value), 0.0)
    if isinstance(value, complex):
        return (value.real, value.imag)
    if isinstance(value, dict) and set(value) <= {"re", "im"}:
        return (float(value.get("re", 0.0)), float(value.get("im", 0.0)))
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return (float(value[0]), float(value[1]))
    raise ValueError(f"no es un complejo válido: {value!r}")


def pair_to_complex(pair: Optional[ComplexPair]) -> complex:
    if pair is None:
        return 0j
    return complex(pair[0], pair[1])


class PotentialSpec(BaseModel):
    """Descripción declarativa de un potencial: {"family": "...", parámetros...}"""
    model_config = ConfigDict(extra="forbid")

    family: PotentialFamily
    value: Optional[ComplexPair] = None
    terms: Optional[List[Tuple[int, ComplexPair]]] = None
    amplitude: Optional[ComplexPair] = None
    order: Optional[int] = None
    exponent: Optional[float] = None
    seed: Optional[int] = None
    phase: Optional[Literal["real", "complex"]] = None
    path: Optional[str] = None

    @model_validator(mode="before")
    @classmethod
    def _fill_defaults(cls, data):
        if not isinstance(data, dict):
            return data
        data = dict(data)
        raw = data.get("family")
        if isinstance(raw, str):
            key = raw.lower().replace("_", "").replace("-", "")
            if key in _FAMILY_ALIASES:
                data["family"] = _FAMILY_ALIASES[key]
        family = data.get("family")
        if isinstance(family, PotentialFamily):
            for name, default in _FAMILY_FIELDS[family].items():
                if data.get(name) is None and default is not None:
                    data[name] = default
        return data

    @field_validator("value", "amplitude", mode="before")
    @classmethod
    def _complex_param(cls, v):
        return None if v is None else as_pair(v)

    @field_validator("terms", mode="before")
    @classmethod
    def _trig_terms(cls, v):
        if v is None:
            return v
        terms = []
        for item in v:
            if isinstance(item, dict):
                freq, amp = item.get("freq"), item.get("amp")
            else:
                freq, amp = item
            if int(freq) != freq:
                raise ValueError(f"frecuencia no entera: {freq}")
            terms.append((int(freq), as_pair(amp)))
        return terms

    @model_validator(mode="after")
    def _check_family(self):
        allowed = _FAMILY_FIELDS[self.family]
        for name in _PARAMS:
            if getattr(self, name) is not None and name not in allowed:
                raise ValueError(f"el parámetro '{name}' no aplica a la familia '{self.family.value}'")
        missing = [name for name in allowed if getattr(self, name) is None]
        if missing:
            raise ValueError(f"faltan parámetros para '{self.family.value}': {', '.join(missing)}")
        if self.family is PotentialFamily.TRIG_POLY:
            if not self.terms:
                raise ValueError("trigpoly necesita al menos un término")
            odd = [f for f, _ in self.terms if f % 2 != 0]
            if odd:
                raise ValueError(f"frecuencias impares no admitidas (V̂(2k+1) = 0): {odd}")
        if self.family is PotentialFamily.DIRAC_COMB_DERIVATIVE and self.order < 1:
            raise ValueError("el orden de la derivada debe ser un entero positivo")
        return self

    def describe(self) -> str:
        params = self.model_dump(mode="json", exclude_none=True)
        params.pop("family")
        return f"{self.family.value}{params if params else ''}"


@dataclass(frozen=True)
class MembershipThreshold:
    """V ∈ H₊^{−s} exactamente para s > s_star (o s ≥ s_star si el umbral es cerrado)"""
    s_star: float
    open: bool = True
    estimated: bool = False

    def contains(self, s: float) -> bool:
        return s > self.s_star if self.open else s >= self.s_star

    def alpha(self, m: int) -> float:
        """Regularidad α con V ∈ H^{−mα} en el borde del umbral"""
        return self.s_star / m

    def to_dict(self) -> Dict:
        return {
            "s_star": None if math.isinf(self.s_star) else self.s_star,
            "s_star_is_minus_infinity": math.isinf(self.s_star),
            "open": self.open,
            "estimated": self.estimated,
        }


@dataclass(frozen=True, eq=False)
class SmoothSplit:
    v0: CoeffSeq
    v_delta: CoeffSeq
    cut: int


def _random_draws(seed: int, k_max: int) -> np.ndarray:
    """Uniformes en el orden k = 0, 1, −1, 2, −2, …; el prefijo no depende de la ventana"""
    rng = np.random.Generator(np.random.Philox(seed))
    return rng.random(2 * k_max + 1)


def _draw_position(kv: np.ndarray) -> np.ndarray:
    return np.where(kv > 0, 2 * kv - 1, -2 * kv)


def load_explicit(path: str) -> CoeffSeq:
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except FileNotFoundError:
        raise InputError(f"archivo de potencial no encontrado: {path}")
    except (OSError, json.JSONDecodeError) as e:
        raise InputError(f"archivo de potencial ilegible ({path}): {e}")
    seq = CoeffSeq.from_dict(data)
    if seq.parity is Parity.SEMIPERIODIC_MINUS:
        raise InputError("un potencial explícito debe estar en la retícula plus o full")
    if seq.parity is Parity.FULL_TWO_PERIODIC and seq.odd_part_max() > 0:
        raise DomainError("el potencial explícito tiene coeficientes impares no nulos")
    return seq


def _coefficients(spec: PotentialSpec, kv: np.ndarray) -> np.ndarray:
    """V̂(2k) para los índices de potencial kv"""
    family = spec.family
    out = np.zeros(kv.shape, dtype=complex)
    if family is PotentialFamily.ZERO:
        return out
    if family is PotentialFamily.CONSTANT:
        out[kv == 0] = pair_to_complex(spec.value)
        return out
    if family is PotentialFamily.TRIG_POLY:
        for freq, amp in spec.terms:
            out[kv == freq // 2] += pair_to_complex(amp)
        return out
    if family is PotentialFamily.DIRAC_COMB:
        out[:] = pair_to_complex(spec.amplitude)
        return out
    if family is PotentialFamily.DIRAC_COMB_DERIVATIVE:
        return pair_to_complex(spec.amplitude) * (2j * np.pi * kv) ** spec.order
    if family is PotentialFamily.RANDOM_DECAY:
        k_max = int(np.max(np.abs(kv), initial=0))
        draws = _random_draws(spec.seed, k_max)
        magnitude = bracket(2 * kv) ** (-spec.exponent)
        if spec.phase == "real":
            u = draws[_draw_position(np.abs(kv))]
            phase = np.where(u < 0.5, 1.0, -1.0)
        else:
            phase = np.exp(2j * np.pi * draws[_draw_position(kv)])
        return magnitude * phase
    # explícito
    seq = load_explicit(spec.path)
    for i, k in enumerate(kv):
        out[i] = seq.at(int(k)) if seq.parity is Parity.PERIODIC_PLUS else seq.at(2 * int(k))
    return out


def materialize(spec: PotentialSpec, lattice: FreqLattice) -> CoeffSeq:
    """Coeficientes de Fourier del potencial sobre la retícula dada"""
    if lattice.parity is Parity.SEMIPERIODIC_MINUS:
        raise DomainError("un potencial 1-periódico vive en la retícula plus o full")
    freqs = lattice.frequencies()
    even = freqs % 2 == 0
    data = np.zeros(lattice.size, dtype=complex)
    data[even] = _coefficients(spec, freqs[even] // 2)
    logger.debug(f"Potencial {spec.describe()} materializado en N={lattice.half_width}")
    return CoeffSeq(lattice, data)


def estimate_membership(v: CoeffSeq) -> MembershipThreshold:
    """Umbral empírico: pendiente q de log|V̂(2k)| frente a log⟨2k⟩, s_star = q + 1/2"""
    if v.parity is Parity.FULL_TWO_PERIODIC:
        v = restrict_parity(v, Parity.PERIODIC_PLUS)
    freqs = v.frequencies()
    mags = np.abs(v.coeffs)
    mask = (mags > 0) & (freqs != 0)
    if np.unique(np.abs(freqs[mask])).size < 2:
        return MembershipThreshold(s_star=-math.inf, open=True, estimated=True)
    q, _ = np.polyfit(np.log(bracket(freqs[mask])), np.log(mags[mask]), 1)
    return MembershipThreshold(s_star=float(q) + 0.5, open=True, estimated=True)


def membership(spec: PotentialSpec) -> MembershipThreshold:
    """Umbral s_star de la escala de Sobolev: coeficientes ~ ⟨2k⟩^q están en H₊^{−s} sii s > q + 1/2"""
    family = spec.family
    if family is PotentialFamily.EXPLICIT:
        return estimate_membership(load_explicit(spec.path))
    if family in (PotentialFamily.ZERO, PotentialFamily.CONSTANT, PotentialFamily.TRIG_POLY):
        return MembershipThreshold(s_star=-math.inf)
    if family is PotentialFamily.RANDOM_DECAY:
        return MembershipThreshold(s_star=0.5 - spec.exponent)
    if pair_to_complex(spec.amplitude) == 0:
        return MembershipThreshold(s_star=-math.inf)
    if family is PotentialFamily.DIRAC_COMB:
        return MembershipThreshold(s_star=0.5)
    return MembershipThreshold(s_star=spec.order + 0.5)


def truncate(v: CoeffSeq, n: int) -> CoeffSeq:
    """Suma parcial V_n: conserva |k| ≤ n"""
    if n < 0 or n > v.half_width:
        raise DomainError(f"n={n} fuera de rango [0, {v.half_width}]")
    data = np.array(v.coeffs)
    keep = np.abs(v.lattice.indices()) <= n
    data[~keep] = 0
    return CoeffSeq(v.lattice, data)


def tail_norms(v: CoeffSeq, s: float) -> np.ndarray:
    """‖V − V_n‖_{H^s} para n = 0 … N, acumulando desde la cola"""
    n = v.half_width
    w = bracket(v.frequencies()) ** (2.0 * s) * np.abs(v.coeffs) ** 2
    pairs = w[n + 1:] + w[:n][::-1]  # k = 1 … N
    tails = np.zeros(n + 1)
    tails[:n] = np.cumsum(pairs[::-1])[::-1]
    return np.sqrt(tails)


def split_smooth_small(v: CoeffSeq, delta: float, c: float, m: int) -> SmoothSplit:
    """V = V₀ + V_δ con V₀ = V_cut y ‖V_δ‖_{H₊^{−m}} ≤ δ/C, cut mínimo"""
    if delta <= 0 or c <= 0:
        raise DomainError("delta y C deben ser positivos")
    bound = delta / c
    tails = tail_norms(v, -m)
    cut = int(np.argmax(tails <= bound))
    v0 = truncate(v, cut)
    keep = np.abs(v.lattice.indices()) <= cut
    tail = np.where(keep, 0, v.coeffs)
    v_delta = CoeffSeq(v.lattice, tail)
    logger.debug(f"División suave/pequeña: cut={cut}, ‖V_δ‖={hs_norm(v_delta, -m):.3e} ≤ {bound:.3e}")
    return SmoothSplit(v0=v0, v_delta=v_delta, cut=cut)


def is_real_valued(v: CoeffSeq, tol: float = 0.0) -> bool:
    """V̂(2k) = conj(V̂(−2k)) para todo k, con tolerancia tol"""
    if v.parity is Parity.SEMIPERIODIC_MINUS:
        raise DomainError("la prueba de realidad aplica a potenciales en la retícula plus o full")
    defect = np.abs(v.coeffs - np.conj(v.coeffs[::-1]))
    return bool(np.max(defect, initial=0.0) <= tol)
