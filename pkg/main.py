"""
Arranque de la API de mtkit con uvicorn
"""
import logging

import uvicorn

from mtkit.config import settings

logger = logging.getLogger("mtkit")


if __name__ == "__main__":
    logger.info(f"🚀 Iniciando servidor en {settings.api_host}:{settings.api_port}")

    uvicorn.run(
        "mtkit.main:app",
        host=settings.api_host,
        port=settings.api_port,
        reload=settings.debug_mode,
        log_level=settings.log_level.lower()
    )
