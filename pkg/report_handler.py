"""
Manejador de informes - JSON, CSV y volcado binario de matrices
"""
import csv
import json
import os
from typing import Dict, List, Optional
import logging

from assembly import GalerkinMatrix
from errors import InputError
from models import VERSION

logger = logging.getLogger(__name__)

TOOL_NAME = "hillspec"


class ReportHandler:
    """Escritura y lectura de informes de trabajos"""

    CONVERGENCE_COLUMNS = ['n', 'dist', 'gap', 'specdist']
    SPECTRUM_COLUMNS = ['index', 're', 'im']
    NUMRANGE_COLUMNS = ['theta', 'support', 're', 'im']

    @staticmethod
    def build_report(command: str,
                     config: Dict,
                     seed: Optional[int],
                     trials: Optional[int],
                     wall_time: float,
                     status: str,
                     result: Dict) -> Dict:
        """Informe con la configuración normalizada incrustada para poder reproducirlo"""
        return {
            'tool': TOOL_NAME,
            'version': VERSION,
            'command': command,
            'config': config,
            'seed': seed,
            'trials': trials,
            'wall_time': wall_time,
            'status': status,
            'result': result,
        }

    @staticmethod
    def _ensure_parent(path: str):
        parent = os.path.dirname(os.path.abspath(path))
        os.makedirs(parent, exist_ok=True)

    def write_json(self, report: Dict, path: str) -> str:
        try:
            self._ensure_parent(path)
            with open(path, 'w', encoding='utf-8') as f:
                json.dump(report, f, indent=2, ensure_ascii=False)
        except OSError as e:
            logger.error(f"Error al escribir informe JSON: {str(e)}")
            raise InputError(f"no se puede escribir {path}: {e}")
        logger.info(f"✅ Informe JSON: {path}")
        return path

    def write_csv(self, rows: List[Dict], columns: List[str], path: str) -> str:
        try:
            self._ensure_parent(path)
            with open(path, 'w', newline='', encoding='utf-8') as f:
                writer = csv.DictWriter(f, fieldnames=columns)
                writer.writeheader()
                writer.writerows(rows)
        except OSError as e:
            logger.error(f"Error al escribir CSV: {str(e)}")
            raise InputError(f"no se puede escribir {path}: {e}")
        logger.info(f"✅ Tabla CSV: {path} ({len(rows)} filas)")
        return path

    def write_matrix(self, matrix: GalerkinMatrix, base_path: str) -> Dict[str, str]:
        """Exporta la matriz como JSON y como volcado binario column-major"""
        stem, _ = os.path.splitext(base_path)
        json_path, raw_path = f"{stem}.matrix.json", f"{stem}.matrix.bin"
        self.write_json(matrix.to_dict(), json_path)
        try:
            with open(raw_path, 'wb') as f:
                f.write(matrix.to_raw_bytes())
        except OSError as e:
            logger.error(f"Error al escribir volcado binario: {str(e)}")
            raise InputError(f"no se puede escribir {raw_path}: {e}")
        logger.info(f"✅ Matriz exportada: {raw_path} ({matrix.size}×{matrix.size})")
        return {'json': json_path, 'raw': raw_path}

    def read_json(self, path: str) -> Dict:
        try:
            with open(path, 'r', encoding='utf-8') as f:
                return json.load(f)
        except FileNotFoundError:
            raise InputError(f"archivo no encontrado: {path}")
        except (OSError, json.JSONDecodeError) as e:
            logger.error(f"Error al leer JSON: {str(e)}")
            raise InputError(f"JSON ilegible ({path}): {e}")
