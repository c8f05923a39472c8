"""
Servidor FastAPI - envío de trabajos por lotes del motor espectral
"""
from contextlib import asynccontextmanager
from datetime import datetime
from typing import Any, Dict, Optional
import asyncio
import json
import logging
import os

import aiofiles
import uvicorn
from fastapi import Body, FastAPI, File, UploadFile
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from cli import execute, validate
from errors import ConfigValidationError, DimensionError, DomainError, HillspecError, InputError
from models import VERSION, EngineConfig

# Logging
logging.basicConfig(
    level=getattr(logging, EngineConfig.LOG_LEVEL.upper(), logging.INFO),
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
)
logger = logging.getLogger(__name__)


@asynccontextmanager
async def lifespan(app: FastAPI):
    logger.info("🚀 Iniciando servidor...")
    logger.info(f"Versión: {VERSION}")
    logger.info(f"Informes en: {EngineConfig.OUTPUT_DIR}")
    logger.info(f"N máximo: {EngineConfig.MAX_HALF_WIDTH}, factor de seguridad: {EngineConfig.SAFETY_FACTOR}")
    logger.info("✅ Servidor listo")
    try:
        yield
    finally:
        logger.info("🛑 Apagando servidor...")


app = FastAPI(
    title="hillspec - Motor espectral",
    description="Trabajos por lotes sobre operadores periódicos de orden par con potenciales distribucionales",
    version=VERSION,
    lifespan=lifespan
)

app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)

# ============== MODELOS PYDANTIC ==============

class JobResponse(BaseModel):
    """Respuesta de un trabajo ejecutado"""
    success: bool = True
    exit_code: int
    status: str
    report: Dict[str, Any]
    file: Optional[str] = None


class ErrorResponse(BaseModel):
    """Respuesta de error"""
    success: bool = False
    error: str
    details: Optional[dict] = None

# ============== TRABAJOS ==============

async def _save_report(report: Dict) -> str:
    os.makedirs(EngineConfig.OUTPUT_DIR, exist_ok=True)
    stamp = datetime.now().strftime("%Y%m%d%H%M%S%f")
    path = os.path.join(EngineConfig.OUTPUT_DIR, f"{report['command']}-{stamp}.json")
    async with aiofiles.open(path, 'w', encoding='utf-8') as f:
        await f.write(json.dumps(report, indent=2, ensure_ascii=False))
    logger.info(f"✅ Informe guardado: {path}")
    return path


async def _run_job(config: Dict, save: bool) -> JobResponse:
    job = validate(config)
    code, report, _ = await asyncio.to_thread(execute, job)
    path = await _save_report(report) if save else None
    return JobResponse(exit_code=code, status=report['status'], report=report, file=path)

# ============== ENDPOINTS ==============

@app.get("/", tags=["Health"])
async def root():
    """Endpoint raíz - Health check"""
    return {
        "status": "online",
        "version": VERSION,
        "message": "hillspec - Motor espectral",
    }


@app.get("/health", tags=["Health"])
async def health_check():
    """Endpoint para health check rápido"""
    return {
        "status": "healthy",
        "message": "✅ Servidor hillspec"
    }


@app.get("/api/config",
         tags=["Configuración"],
         summary="Obtener configuración actual")
async def get_config():
    return EngineConfig.as_dict()


@app.post("/api/jobs",
          response_model=JobResponse,
          tags=["Trabajos"],
          summary="Ejecutar un trabajo (configuración o informe a reproducir)",
          responses={
              422: {"model": ErrorResponse, "description": "Configuración inválida"},
              500: {"model": ErrorResponse, "description": "Fallo numérico"}
          })
async def submit_job(config: Dict[str, Any] = Body(...), save: bool = False):
    """
    Ejecutar un trabajo por lotes

    **Cuerpo:** configuración JSON del trabajo (`command`, `potential`, `m`,
    `kind`, `N`, …) o un informe previo, cuya configuración se reutiliza.

    **Parámetros:**
    - `save` (bool): guardar además el informe en HILLSPEC_OUTPUT_DIR
    """
    logger.info(f"📝 Trabajo recibido: {config.get('command', config.get('config', {}).get('command'))}")
    return await _run_job(config, save)


@app.post("/api/jobs/upload",
          response_model=JobResponse,
          tags=["Trabajos"],
          summary="Ejecutar un trabajo subido como archivo")
async def submit_job_file(file: UploadFile = File(...), save: bool = False):
    content = await file.read()
    logger.info(f"📄 Configuración subida: {file.filename} ({len(content)} bytes)")
    try:
        config = json.loads(content.decode('utf-8'))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise ConfigValidationError([f"archivo no es JSON válido: {e}"])
    return await _run_job(config, save)

# ============== ERROR HANDLERS ==============

@app.exception_handler(HillspecError)
async def hillspec_exception_handler(request, exc: HillspecError):
    """Errores de entrada → 422; fallos numéricos → 500"""
    client_side = isinstance(exc, (InputError, DomainError, DimensionError))
    status_code = 422 if client_side else 500
    logger.error(f"❌ {type(exc).__name__}: {exc.message}")
    return JSONResponse(
        status_code=status_code,
        content=ErrorResponse(error=exc.message, details={"kind": type(exc).__name__, **exc.details}).model_dump()
    )


@app.exception_handler(Exception)
async def general_exception_handler(request, exc):
    """Manejador general de excepciones"""
    logger.error(f"Excepción no manejada: {str(exc)}")
    return JSONResponse(
        status_code=500,
        content=ErrorResponse(error="Error interno del servidor").model_dump()
    )

# ============== MAIN ==============

if __name__ == "__main__":
    if not os.path.exists('.env'):
        logger.warning("⚠️ Archivo .env no encontrado. Usando valores por defecto.")

    uvicorn.run(
        app,
        host=EngineConfig.HOST,
        port=EngineConfig.PORT,
        log_level=EngineConfig.LOG_LEVEL.lower()
    )
