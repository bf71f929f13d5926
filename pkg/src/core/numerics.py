"""Small numeric building blocks shared by the spectral, adjoint and multiplier services."""
import logging
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from core.errors import NumericError

logger = logging.getLogger(__name__)


def _split_exp(z):
    z = np.asarray(z)
    shift = np.abs(z.real)
    return np.exp(z - shift), np.exp(-z - shift)


def scaled_sinh(z):
    """sinh(z) * exp(-|Re z|), finite for any finite z."""
    plus, minus = _split_exp(z)
    return 0.5 * (plus - minus)


def scaled_cosh(z):
    """cosh(z) * exp(-|Re z|)."""
    plus, minus = _split_exp(z)
    return 0.5 * (plus + minus)


def principal_root(value: float) -> tuple[complex, float | None]:
    """Principal square root of a real number; the tilde part is returned when the root is imaginary."""
    if value < 0:
        tilde = float(np.sqrt(-value))
        return complex(0.0, tilde), tilde
    return complex(np.sqrt(value), 0.0), None


@dataclass(frozen=True)
class ExponentialProfile:
    """Function x -> sum_c w_c exp(r_c x - s_c) on [0, L].

    The shifts s_c = max(Re r_c, 0) L keep every term bounded by |w_c| on the interval.
    """

    exponents: np.ndarray
    weights: np.ndarray
    shifts: np.ndarray

    def derivative(self, order: int) -> "ExponentialProfile":
        return ExponentialProfile(self.exponents, self.weights * self.exponents**order, self.shifts)

    def reweighted(self, factors) -> "ExponentialProfile":
        return ExponentialProfile(self.exponents, self.weights * np.asarray(factors), self.shifts)

    def terms(self, x) -> np.ndarray:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        return np.exp(np.outer(x, self.exponents) - self.shifts) * self.weights

    def __call__(self, x) -> np.ndarray:
        return self.terms(x).sum(axis=1)

    def magnitude(self, x) -> np.ndarray:
        """Sum of term moduli, the natural scale for relative residuals."""
        return np.abs(self.terms(x)).sum(axis=1)


def sign_change_brackets(grid: np.ndarray, values: np.ndarray) -> list[tuple[float, float]]:
    brackets = []
    for i in range(len(grid) - 1):
        left, right = values[i], values[i + 1]
        if left == 0.0:
            brackets.append((grid[i], grid[i]))
        elif left * right < 0:
            brackets.append((grid[i], grid[i + 1]))
    return brackets


def refine_root(fn, lo: float, hi: float, xtol: float) -> float:
    """Bracketed refinement of a sign change of fn on [lo, hi]."""
    if lo == hi:
        return lo
    root, info = brentq(fn, lo, hi, xtol=xtol, rtol=4 * np.finfo(float).eps, maxiter=200, full_output=True, disp=False)
    if not info.converged:
        raise NumericError(f"bracketed refinement on [{lo!r}, {hi!r}] did not converge: {info.flag}")
    logger.debug(f"Refined root {root!r} in {info.iterations} iterations")
    return root
