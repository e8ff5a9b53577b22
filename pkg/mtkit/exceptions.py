"""
Errores de mtkit
Cada error conoce su código de salida en el CLI y su status HTTP
"""
from typing import Optional

from fastapi import status

from mtkit.config import constants


class MTKitError(Exception):
    """Error base de la librería"""

    exit_code = 1
    status_code = status.HTTP_500_INTERNAL_SERVER_ERROR

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message


class InvalidArgumentError(MTKitError, ValueError):
    """Argumento fuera del dominio de la operación"""

    exit_code = constants.EXIT_INVALID_ARGUMENT
    status_code = status.HTTP_400_BAD_REQUEST


class ResourceGuardError(MTKitError):
    """La operación excede una guarda de memoria o de costo"""

    exit_code = constants.EXIT_RESOURCE_GUARD
    status_code = status.HTTP_413_REQUEST_ENTITY_TOO_LARGE

    def __init__(self, message: str, required: Optional[int] = None, limit: Optional[int] = None):
        super().__init__(message)
        self.required = required
        self.limit = limit


class NumericInstabilityError(MTKitError, ArithmeticError):
    """Un contrato numérico (residuo, resto de división) no se cumplió"""

    exit_code = constants.EXIT_NUMERIC_INSTABILITY
    status_code = status.HTTP_422_UNPROCESSABLE_ENTITY


class CalibrationDriftError(NumericInstabilityError):
    """Una constante calibrada se salió de su banda congelada"""
