"""
Jerarquía de excepciones del motor espectral
"""
from typing import List, Optional


class HillspecError(Exception):
    """Error base; `exit_code` es el código de salida del CLI"""

    exit_code = 1

    def __init__(self, message: str, details: Optional[dict] = None):
        super().__init__(message)
        self.message = message
        self.details = details or {}


class InputError(HillspecError):
    """Archivo ausente o mal formado, esquema inválido"""


class ConfigValidationError(InputError):
    """Configuración de trabajo inválida, con un mensaje por campo"""

    def __init__(self, errors: List[str]):
        super().__init__("Configuración inválida: " + "; ".join(errors), {"errors": errors})
        self.errors = errors


class DomainError(HillspecError):
    """Precondición matemática violada"""


class DimensionError(HillspecError):
    """Ventanas de frecuencia incompatibles"""


class SolverError(HillspecError):
    """El autosolver no convergió"""

    exit_code = 3

    def __init__(self, message: str, iterations: Optional[int] = None):
        super().__init__(message, {"iterations": iterations})
        self.iterations = iterations


class PoleError(HillspecError):
    """Punto de prueba demasiado cerca del espectro"""

    exit_code = 3


class FitError(HillspecError):
    """Ajuste de decaimiento degenerado; reducir el rango de ajuste"""

    exit_code = 3
