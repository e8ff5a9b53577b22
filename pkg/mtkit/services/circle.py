"""
Servicio del círculo
Malla, cuadratura, análisis de Fourier discreto, proyección de Hardy y maximal de Hardy-Littlewood
"""
import logging
from typing import Optional

import numpy as np
from pydantic import ValidationError
from scipy import fft as sp_fft

from mtkit.exceptions import InvalidArgumentError
from mtkit.models.circle import CircleGrid, GridFunction, SpectrumFunction, is_power_of_two

logger = logging.getLogger(__name__)


# ============= MALLA Y CUADRATURA =============

def make_grid(n_points: int) -> CircleGrid:
    """
    Crear malla uniforme de n_points puntos

    n_points debe ser potencia de dos y al menos 2
    """
    if int(n_points) != n_points or n_points < 2 or not is_power_of_two(int(n_points)):
        raise InvalidArgumentError(f"grid size must be a power of two >= 2, got {n_points}")
    return CircleGrid(n_points=int(n_points))


def make_function(grid: CircleGrid, values) -> GridFunction:
    """Construir GridFunction convirtiendo errores de validación"""
    try:
        return GridFunction(grid=grid, values=values)
    except ValidationError as exc:
        raise InvalidArgumentError(str(exc)) from exc


def require_same_grid(f: GridFunction, g: GridFunction) -> None:
    if not f.grid.same_as(g.grid):
        raise InvalidArgumentError(
            f"grid mismatch: {f.grid.n_points} vs {g.grid.n_points} points"
        )


def inner_product(f: GridFunction, g: GridFunction) -> complex:
    """⟨f, g⟩ = (1/N) Σ f_j conj(g_j)"""
    require_same_grid(f, g)
    return complex(np.vdot(g.values, f.values) / f.grid.n_points)


# ============= ANÁLISIS DE FOURIER =============

def to_spectrum(f: GridFunction) -> SpectrumFunction:
    """f̂(k) = (1/N) Σ f_j e^{−ikθ_j}, k ∈ [−N/2, N/2)"""
    coefficients = sp_fft.fft(f.values) / f.grid.n_points
    return SpectrumFunction(grid=f.grid, coefficients=sp_fft.fftshift(coefficients))


def from_spectrum(spectrum: SpectrumFunction) -> GridFunction:
    """Inversa exacta de to_spectrum en los puntos de la malla"""
    values = sp_fft.ifft(sp_fft.ifftshift(spectrum.coefficients)) * spectrum.grid.n_points
    return GridFunction(grid=spectrum.grid, values=values)


def apply_multiplier(f: GridFunction, multiplier: np.ndarray) -> GridFunction:
    """Aplicar un multiplicador dado en el orden de frecuencias de la FFT"""
    values = sp_fft.ifft(sp_fft.fft(f.values) * multiplier)
    return GridFunction(grid=f.grid, values=values)


def hardy_project(f: GridFunction) -> GridFunction:
    """Anula las frecuencias estrictamente negativas (incluida −N/2)"""
    return apply_multiplier(f, (f.grid.frequencies >= 0).astype(np.float64))


# ============= MAXIMAL DE HARDY-LITTLEWOOD =============

def hl_maximal(f: GridFunction) -> GridFunction:
    """
    Maximal de Hardy-Littlewood discreto

    En cada punto, máximo sobre arcos centrados de semilongitud h·(2π/N),
    h = 0, …, N/2, del promedio de |f| sobre los puntos del arco.
    El arco de semilongitud π es el círculo completo.
    """
    n = f.grid.n_points
    half = n // 2
    magnitude = np.abs(f.values)

    # Sumas acumuladas sobre la extensión periódica
    extended = np.concatenate([magnitude[-half:], magnitude, magnitude[:half]])
    cumulative = np.concatenate([[0.0], np.cumsum(extended)])
    centers = np.arange(n) + half

    best = magnitude.copy()
    for h in range(1, half):
        window = cumulative[centers + h + 1] - cumulative[centers - h]
        np.maximum(best, window / (2 * h + 1), out=best)

    np.maximum(best, np.mean(magnitude), out=best)
    return GridFunction(grid=f.grid, values=best)


def hl_maximal_bruteforce(f: GridFunction) -> GridFunction:
    """Versión O(N²) explícita, usada como oráculo"""
    n = f.grid.n_points
    magnitude = np.abs(f.values)
    best = np.zeros(n)
    for j in range(n):
        for h in range(n // 2):
            idx = np.arange(j - h, j + h + 1) % n
            best[j] = max(best[j], magnitude[idx].mean())
        best[j] = max(best[j], magnitude.mean())
    return GridFunction(grid=f.grid, values=best)


# ============= FUNCIONES DE PRUEBA =============

def trigonometric(grid: CircleGrid, coefficients: dict) -> GridFunction:
    """Σ c_k e^{ikθ} a partir de un diccionario {k: c_k}"""
    theta = grid.points
    values = np.zeros(grid.n_points, dtype=np.complex128)
    for k, c in coefficients.items():
        values += c * np.exp(1j * k * theta)
    return GridFunction(grid=grid, values=values)


def random_band_limited(
    grid: CircleGrid,
    rng: np.random.Generator,
    bandwidth: Optional[int] = None,
    kind: str = "complex"
) -> GridFunction:
    """
    Función aleatoria con espectro en |k| ≤ bandwidth

    kind: "complex" (coeficientes gaussianos complejos), "real" o "analytic" (solo k ≥ 0).
    Por defecto bandwidth = N/8.
    """
    n = grid.n_points
    if bandwidth is None:
        bandwidth = max(1, n // 8)
    if bandwidth >= n // 2:
        raise InvalidArgumentError(f"bandwidth {bandwidth} must be below N/2 = {n // 2}")

    ks = np.arange(-bandwidth, bandwidth + 1)
    coefficients = rng.standard_normal(ks.size) + 1j * rng.standard_normal(ks.size)
    if kind == "analytic":
        coefficients[ks < 0] = 0.0
    elif kind not in ("complex", "real"):
        raise InvalidArgumentError(f"unknown test-function kind {kind!r}")

    return synthesize(grid, ks, coefficients, real=(kind == "real"))


def synthesize(grid: CircleGrid, ks, coefficients, real: bool = False) -> GridFunction:
    """
    Σ c_k e^{ikθ} sobre la malla para frecuencias |k| < N/2

    La misma lista (ks, c_k) en dos mallas da la misma función continua muestreada.
    """
    n = grid.n_points
    ks = np.asarray(ks, dtype=np.int64)
    if ks.size and np.max(np.abs(ks)) >= n // 2:
        raise InvalidArgumentError(f"frequencies must satisfy |k| < {n // 2}")
    spectrum = np.zeros(n, dtype=np.complex128)
    np.add.at(spectrum, ks % n, np.asarray(coefficients, dtype=np.complex128))
    values = sp_fft.ifft(spectrum) * n
    if real:
        values = values.real
    return GridFunction(grid=grid, values=values)
