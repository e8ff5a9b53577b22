"""
Punto de entrada de la API
FastAPI application con los routers de sucesiones, desenrollado y experimentos
"""
from fastapi import FastAPI, Request, status
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from fastapi.exceptions import RequestValidationError
from pydantic import ValidationError
from contextlib import asynccontextmanager
from datetime import datetime, timezone
import logging
import os
import time

from mtkit import __version__
from mtkit.config import settings, constants, setup_logging
from mtkit.exceptions import MTKitError
from mtkit.limiter import init_limiter
from mtkit.routers import experiments, sequences, unwinding

setup_logging()
logger = logging.getLogger(__name__)


@asynccontextmanager
async def lifespan(app: FastAPI):
    """Gestiona el ciclo de vida de la aplicación"""
    logger.info("🚀 Iniciando aplicación...")
    logger.info(f"Entorno: {settings.environment}")
    if not settings.testing:
        os.makedirs(settings.output_dir, exist_ok=True)
    logger.info("✓ Aplicación lista para recibir peticiones")

    yield

    logger.info("🛑 Cerrando aplicación...")
    logger.info("✓ Aplicación cerrada correctamente")


app = FastAPI(
    title="mtkit",
    description="""
    Sistemas de Malmquist-Takenaka en el círculo unitario

    ## Características principales:

    * **Sucesiones** - a_r, b, d_r y puntos arbitrarios del disco
    * **Ortonormalidad** - Matriz de Gram de la base MT por cuadratura
    * **Desenrollado de fase** - Factorización de Blaschke iterada de polinomios
    * **Experimentos** - Corridas pequeñas de los barridos numéricos
    """,
    version=__version__,
    lifespan=lifespan
)

init_limiter(app)

# ============= MIDDLEWARES =============

app.add_middleware(
    CORSMiddleware,
    allow_origins=settings.allowed_origins_list,
    allow_credentials=True,
    allow_methods=["GET", "POST"],
    allow_headers=["*"],
    max_age=3600,
)


@app.middleware("http")
async def log_requests(request: Request, call_next):
    """Registrar información de cada petición"""
    start_time = time.time()

    client_host = request.client.host if request.client else "unknown"
    logger.info(f"→ {request.method} {request.url.path} - IP: {client_host}")

    response = await call_next(request)

    process_time = time.time() - start_time
    response.headers["X-Process-Time"] = str(process_time)

    logger.info(
        f"← {request.method} {request.url.path} - "
        f"Status: {response.status_code} - "
        f"Time: {process_time:.3f}s"
    )

    return response


@app.middleware("http")
async def limit_request_size(request: Request, call_next):
    """Limitar tamaño de peticiones"""
    content_length = request.headers.get("content-length")

    if content_length and int(content_length) > settings.max_request_size_bytes:
        return JSONResponse(
            status_code=status.HTTP_413_REQUEST_ENTITY_TOO_LARGE,
            content={
                "detail": f"Request too large. Maximum: {settings.max_request_size_mb}MB"
            }
        )

    return await call_next(request)

# ============= EXCEPTION HANDLERS =============


@app.exception_handler(MTKitError)
async def mtkit_exception_handler(request: Request, exc: MTKitError):
    """Errores de dominio con su status propio"""
    logger.warning(f"{type(exc).__name__} en {request.url.path}: {exc.message}")
    content = {"detail": exc.message, "type": type(exc).__name__}
    if getattr(exc, "limit", None) is not None:
        content["required"] = exc.required
        content["limit"] = exc.limit
    return JSONResponse(status_code=exc.status_code, content=content)


@app.exception_handler(ValidationError)
async def model_validation_handler(request: Request, exc: ValidationError):
    """Modelos de dominio construidos con argumentos inválidos"""
    logger.warning(f"Argumento inválido en {request.url.path}: {exc.error_count()} errores")
    return JSONResponse(
        status_code=status.HTTP_400_BAD_REQUEST,
        content={
            "detail": "Invalid argument",
            "errors": [error["msg"] for error in exc.errors()]
        }
    )


@app.exception_handler(RequestValidationError)
async def validation_exception_handler(request: Request, exc: RequestValidationError):
    """Manejar errores de validación"""
    logger.warning(f"Error de validación en {request.url.path}: {exc.errors()}")
    return JSONResponse(
        status_code=status.HTTP_422_UNPROCESSABLE_ENTITY,
        content={
            "detail": "Validation error",
            "errors": [error["msg"] for error in exc.errors()]
        }
    )


@app.exception_handler(Exception)
async def general_exception_handler(request: Request, exc: Exception):
    """Manejar excepciones generales"""
    logger.error(f"Error en {request.url.path}: {str(exc)}", exc_info=True)

    if settings.environment == "production":
        return JSONResponse(
            status_code=status.HTTP_500_INTERNAL_SERVER_ERROR,
            content={"detail": "Internal server error"}
        )
    return JSONResponse(
        status_code=status.HTTP_500_INTERNAL_SERVER_ERROR,
        content={
            "detail": "Internal server error",
            "error": str(exc),
            "type": type(exc).__name__
        }
    )

# ============= ENDPOINTS BÁSICOS =============


@app.get("/", tags=["General"])
async def root():
    """Endpoint raíz - Información de la API"""
    return {
        "message": "mtkit",
        "version": __version__,
        "status": "online",
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "docs": "/docs",
        "experiments": constants.EXPERIMENTS
    }


@app.get("/health", tags=["General"])
async def health_check():
    """Health check"""
    return {
        "status": "healthy",
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "environment": settings.environment
    }

# ============= REGISTRAR ROUTERS =============

app.include_router(
    sequences.router,
    prefix="/api/sequences",
    tags=["Sucesiones"]
)

app.include_router(
    unwinding.router,
    prefix="/api/unwinding",
    tags=["Desenrollado"]
)

app.include_router(
    experiments.router,
    prefix="/api/experiments",
    tags=["Experimentos"]
)
