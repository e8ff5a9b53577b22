"""
Rate limiting de la API de mtkit
Límite global por IP desde Settings; los routers de cómputo y experimentos añaden el suyo
"""
import logging

from fastapi import Request, status
from fastapi.responses import JSONResponse
from slowapi import Limiter
from slowapi.errors import RateLimitExceeded
from slowapi.middleware import SlowAPIMiddleware
from slowapi.util import get_remote_address

from mtkit.config import Settings, settings

logger = logging.getLogger(__name__)

MEMORY_STORAGE = "memory://"


def build_limiter(config: Settings) -> Limiter:
    """
    Limitador por IP con `rate_limit_per_minute` como límite por omisión

    Redis si `redis_url` está definido, memoria si no; desactivado en modo testing.
    """
    storage = config.redis_url or MEMORY_STORAGE
    if config.redis_url:
        logger.info(f"Rate limiter con Redis: {config.redis_url}")
    return Limiter(
        key_func=get_remote_address,
        storage_uri=storage,
        default_limits=[f"{config.rate_limit_per_minute}/minute"],
        enabled=not config.testing
    )


# Los decoradores @limiter.limit(...) se aplican al importar los routers
limiter = build_limiter(settings)


def rate_limit_handler(request: Request, exc: RateLimitExceeded) -> JSONResponse:
    """429 con el mismo formato que los errores de dominio"""
    logger.warning(f"Rate limit excedido en {request.url.path}: {exc.detail}")
    return JSONResponse(
        status_code=status.HTTP_429_TOO_MANY_REQUESTS,
        content={"detail": f"Rate limit exceeded: {exc.detail}", "type": "RateLimitExceeded"}
    )


def init_limiter(app) -> None:
    app.state.limiter = limiter
    app.add_middleware(SlowAPIMiddleware)
    app.add_exception_handler(RateLimitExceeded, rate_limit_handler)
    logger.info("✓ Rate limiter inicializado")
