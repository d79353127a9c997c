"""Central finite-difference gradients for checking backward passes."""

from collections.abc import Callable

import numpy as np


def numerical_gradient(f: Callable[[], float], x: np.ndarray, h: float = 1e-6) -> np.ndarray:
    """
    Central-difference gradient of ``f`` wrt ``x``, perturbing ``x`` in place.

    ``f`` must read ``x`` (or an array sharing its memory) on every call.
    """
    grad = np.zeros_like(x, dtype=np.float64)
    flat = x.reshape(-1)
    out = grad.reshape(-1)
    for i in range(flat.size):
        original = flat[i]
        flat[i] = original + h
        upper = f()
        flat[i] = original - h
        lower = f()
        flat[i] = original
        out[i] = (upper - lower) / (2 * h)
    return grad


def relative_error(analytic: np.ndarray, numeric: np.ndarray, floor: float = 1e-12) -> float:
    """‖a − n‖ / max(‖a‖ + ‖n‖, floor), Euclidean norms over all entries."""
    if analytic.size == 0:
        return 0.0
    diff = float(np.linalg.norm((analytic - numeric).ravel()))
    scale = float(np.linalg.norm(analytic.ravel()) + np.linalg.norm(numeric.ravel()))
    return diff / max(scale, floor)
