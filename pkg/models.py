"""
Configuración del motor y modelos de trabajo
"""
import math
import os
from enum import Enum
from typing import Dict, List, Optional, Tuple

from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from assembly import OperatorKind, potential_window
from potentials import PotentialSpec

load_dotenv()

VERSION = "1.0.0"


class EngineConfig:
   """Configuración centralizada leída del entorno"""

   LOG_LEVEL = os.getenv('HILLSPEC_LOG_LEVEL', 'INFO')

   # Valores por defecto de los trabajos
   DEFAULT_SEED = int(os.getenv('HILLSPEC_DEFAULT_SEED', '0'))
   DEFAULT_TRIALS = int(os.getenv('HILLSPEC_DEFAULT_TRIALS', '1000'))
   SAFETY_FACTOR = float(os.getenv('HILLSPEC_SAFETY_FACTOR', '2.0'))
   MAX_HALF_WIDTH = int(os.getenv('HILLSPEC_MAX_HALF_WIDTH', '512'))

   # Servidor
   OUTPUT_DIR = os.getenv('HILLSPEC_OUTPUT_DIR', 'reports')
   HOST = os.getenv('HILLSPEC_HOST', '127.0.0.1')
   PORT = int(os.getenv('HILLSPEC_PORT', '8001'))

   @classmethod
   def as_dict(cls) -> Dict[str, object]:
      return {
         'version': VERSION,
         'log_level': cls.LOG_LEVEL,
         'default_seed': cls.DEFAULT_SEED,
         'default_trials': cls.DEFAULT_TRIALS,
         'safety_factor': cls.SAFETY_FACTOR,
         'max_half_width': cls.MAX_HALF_WIDTH,
         'output_dir': cls.OUTPUT_DIR,
      }


class Command(str, Enum):
    SPECTRUM = "spectrum"
    DECOMPOSE = "decompose"
    CONVERGE = "converge"
    NUMRANGE = "numrange"
    FORMBOUND = "formbound"
    SECTOR = "sector"
    REGULARITY = "regularity"
    POTINFO = "potinfo"


class OutputFormat(str, Enum):
    JSON = "json"
    CSV = "csv"


CSV_COMMANDS = {Command.SPECTRUM, Command.CONVERGE, Command.NUMRANGE}
RANDOMIZED_COMMANDS = {Command.CONVERGE, Command.FORMBOUND, Command.SECTOR}

_KIND_ALIASES = {
    "splus": OperatorKind.S_PLUS, "plus": OperatorKind.S_PLUS, "+": OperatorKind.S_PLUS,
    "sminus": OperatorKind.S_MINUS, "minus": OperatorKind.S_MINUS, "-": OperatorKind.S_MINUS,
    "sfull": OperatorKind.S_FULL, "full": OperatorKind.S_FULL, "s": OperatorKind.S_FULL,
}


def _as_list(value):
    return [value] if isinstance(value, (int, float)) and not isinstance(value, bool) else value


class JobConfig(BaseModel):
    """Trabajo por lotes: comando, potencial, operador y parámetros, con todos los valores por defecto explícitos"""
    model_config = ConfigDict(extra="forbid", populate_by_name=True)

    command: Command
    potential: PotentialSpec
    m: int = 1
    kind: OperatorKind = OperatorKind.S_PLUS
    half_width: int = Field(16, alias="N")
    seed: int = Field(default_factory=lambda: EngineConfig.DEFAULT_SEED)
    trials: int = Field(default_factory=lambda: EngineConfig.DEFAULT_TRIALS)
    safety_factor: float = Field(default_factory=lambda: EngineConfig.SAFETY_FACTOR)
    schedule: Optional[List[int]] = None
    lam: Tuple[float, float] = Field((-1.0, -1.0), alias="lambda")
    delta: List[float] = [0.5, 0.1, 0.01]
    eps: List[float] = [0.4, 0.1, 0.02]
    theta: float = math.pi / 8
    n_theta: int = 64
    lowest: int = Field(5, alias="K")
    tol: Optional[float] = None
    fit_range: Optional[Tuple[int, int]] = None
    alpha: Optional[float] = None
    export_matrix: bool = False
    output: Optional[str] = None
    format: OutputFormat = OutputFormat.JSON

    @field_validator("kind", mode="before")
    @classmethod
    def _kind_alias(cls, v):
        if isinstance(v, str):
            return _KIND_ALIASES.get(v.lower().replace("_", ""), v)
        return v

    @field_validator("lam", mode="before")
    @classmethod
    def _lambda_pair(cls, v):
        if isinstance(v, dict):
            return (v.get("re", 0.0), v.get("im", 0.0))
        if isinstance(v, (int, float)) and not isinstance(v, bool):
            return (float(v), 0.0)
        return v

    @field_validator("delta", "eps", mode="before")
    @classmethod
    def _scalar_to_list(cls, v):
        return _as_list(v)

    @field_validator("m")
    @classmethod
    def _check_m(cls, v):
        if v < 1:
            raise ValueError(f"m debe ser un entero positivo, recibido {v}")
        return v

    @field_validator("half_width")
    @classmethod
    def _check_half_width(cls, v):
        if v < 1:
            raise ValueError(f"N debe ser ≥ 1, recibido {v}")
        if v > EngineConfig.MAX_HALF_WIDTH:
            raise ValueError(f"N={v} supera el máximo HILLSPEC_MAX_HALF_WIDTH={EngineConfig.MAX_HALF_WIDTH}")
        return v

    @field_validator("trials", "n_theta", "lowest")
    @classmethod
    def _check_positive(cls, v):
        if v < 1:
            raise ValueError(f"debe ser ≥ 1, recibido {v}")
        return v

    @field_validator("safety_factor")
    @classmethod
    def _check_safety(cls, v):
        if v < 1:
            raise ValueError(f"el factor de seguridad debe ser ≥ 1, recibido {v}")
        return v

    @field_validator("delta")
    @classmethod
    def _check_delta(cls, v):
        if not v:
            raise ValueError("se necesita al menos un δ")
        bad = [d for d in v if d <= 0]
        if bad:
            raise ValueError(f"δ debe ser positivo: {bad}")
        return v

    @field_validator("eps")
    @classmethod
    def _check_eps(cls, v):
        if not v:
            raise ValueError("se necesita al menos un ε")
        bad = [e for e in v if not 0 < e < 0.5]
        if bad:
            raise ValueError(f"ε = {bad} fuera del rango (0, 1/2) de la sectorialidad")
        return v

    @field_validator("theta")
    @classmethod
    def _check_theta(cls, v):
        if not 0 < v < math.pi / 2:
            raise ValueError(f"θ debe estar en (0, π/2), recibido {v}")
        return v

    @field_validator("schedule")
    @classmethod
    def _check_schedule(cls, v):
        if v is None:
            return v
        if not v:
            raise ValueError("la secuencia de n no puede estar vacía")
        if any(b <= a for a, b in zip(v, v[1:])):
            raise ValueError(f"la secuencia de n debe ser estrictamente creciente: {v}")
        if v[0] < 0:
            raise ValueError(f"los n deben ser ≥ 0: {v}")
        return v

    @model_validator(mode="after")
    def _check_job(self):
        window = potential_window(self.kind, self.half_width)
        if self.command is Command.CONVERGE:
            if self.schedule is None:
                self.schedule = [2 ** i for i in range(1, 20) if 2 ** i < window] or [window]
            if self.schedule[-1] > window:
                raise ValueError(f"schedule: n={self.schedule[-1]} supera la ventana del potencial ({window})")
        if self.format is OutputFormat.CSV and self.command not in CSV_COMMANDS:
            raise ValueError(f"format: csv solo está disponible para {sorted(c.value for c in CSV_COMMANDS)}")
        if self.command in (Command.FORMBOUND, Command.SECTOR) and self.kind is OperatorKind.S_FULL:
            raise ValueError(f"kind: '{self.command.value}' se audita sobre SPlus o SMinus")
        if self.fit_range is not None:
            lo, hi = self.fit_range
            if not 0 <= lo <= hi <= self.half_width:
                raise ValueError(f"fit_range: ({lo}, {hi}) fuera de [0, {self.half_width}]")
        return self

    @property
    def lambda_value(self) -> complex:
        return complex(*self.lam)

    def normalized(self) -> Dict:
        """Configuración completa tal como se incrusta en el informe"""
        return self.model_dump(mode="json", by_alias=True, exclude={"output", "format"})
