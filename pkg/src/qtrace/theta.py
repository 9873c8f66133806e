"""Multiplicative Jacobi theta function and theta-quotient bookkeeping.

The integral-weight normalization is used throughout:

    theta_hat(z) = (z - 1) * prod_{m>=1} (1 - q**(2m) z)(1 - q**(2m) / z)

It is holomorphic on C*, vanishes exactly on the orbit q**(2Z), and obeys
theta_hat(q**2 z) = -theta_hat(z) / z.  Quotients of shifted copies are the
building blocks for quasi-periodic weight functions; ``multiplier`` tracks
their exact transformation under z -> q**2 z.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

# dropped tail of the truncated triple product stays below this
_TAIL = 1e-17


class EvaluationSingularityError(ValueError):
    """Raised when an evaluation point sits on (or too near) a pole orbit."""


@dataclass(frozen=True)
class ThetaParams:
    """Nome and truncation order for the triple product.

    ``trunc_terms`` defaults to the smallest order whose dropped tail is
    below double precision; q >= 0.9 is rejected since the product would
    need impractically many terms at desk scale.
    """

    q: float
    trunc_terms: int = field(default=0)

    def __post_init__(self):
        if not 0.0 < self.q < 1.0:
            raise ValueError("q must lie in (0, 1)")
        if self.q >= 0.9:
            raise ValueError(
                "q >= 0.9 needs too many triple-product terms; use a smaller q"
            )
        if self.trunc_terms == 0:
            terms = int(math.ceil(math.log(_TAIL) / (2.0 * math.log(self.q)))) + 1
            object.__setattr__(self, "trunc_terms", terms)
        if self.q ** (2 * self.trunc_terms) >= 1e-16:
            raise ValueError("trunc_terms too small for full double precision")


def theta_hat(z, params: ThetaParams):
    """Truncated triple product; accepts a complex scalar or ndarray."""
    arr = np.asarray(z, dtype=complex)
    if np.any(arr == 0):
        raise ValueError("theta_hat is undefined at z = 0")
    zi = 1.0 / arr
    out = arr - 1.0
    qq = params.q * params.q
    f = qq
    for _ in range(params.trunc_terms):
        out = out * (1.0 - f * arr) * (1.0 - f * zi)
        f *= qq
    return out if out.shape else complex(out)


def _near_orbit(z, point: complex, q: float, rel_tol: float) -> np.ndarray:
    """Mask of entries of z within rel_tol of the orbit point * q**(2Z)."""
    arr = np.asarray(z, dtype=complex)
    logr = np.log(np.abs(arr) / abs(point)) / (2.0 * math.log(q))
    mask = np.zeros(arr.shape, dtype=bool)
    for t in (np.floor(logr), np.ceil(logr)):
        orbit = point * np.power(q, 2.0 * t)
        scale = np.maximum(np.abs(arr), np.abs(orbit))
        mask |= np.abs(arr - orbit) <= rel_tol * scale
    return mask


def pole_proximity_mask(z, poles, params: ThetaParams, rel_tol: float = 1e-9):
    """True where z is within rel_tol of some pole orbit point."""
    arr = np.asarray(z, dtype=complex)
    mask = np.zeros(arr.shape, dtype=bool)
    for b in poles:
        mask |= _near_orbit(arr, complex(b), params.q, rel_tol)
    return mask


def theta_quotient(z, zeros, poles, l: int, c: complex, params: ThetaParams):
    """c * z**l * prod theta_hat(z/alpha_i) / prod theta_hat(z/beta_j)."""
    arr = np.asarray(z, dtype=complex)
    scalar = arr.shape == ()
    arr = np.atleast_1d(arr)
    if np.any(pole_proximity_mask(arr, poles, params)):
        raise EvaluationSingularityError(
            "evaluation point too close to a pole orbit (within 1e-9)"
        )
    out = c * arr ** l
    for a in zeros:
        out = out * theta_hat(arr / a, params)
    for b in poles:
        out = out / theta_hat(arr / b, params)
    return complex(out[0]) if scalar else out


def multiplier(zeros, poles, l: int, params: ThetaParams) -> tuple[int, complex]:
    """Exact (zpow, const) with f(q**2 z) = const * z**zpow * f(z).

    Here f is the quotient of ``theta_quotient``; each zero factor
    contributes (-alpha / z), each pole factor (-beta / z)**(-1), and the
    z**l prefactor contributes q**(2l).
    """
    N, M = len(zeros), len(poles)
    const = params.q ** (2 * l) * (-1.0) ** ((N - M) % 2)
    const = complex(const)
    for a in zeros:
        const *= a
    for b in poles:
        const /= b
    return (M - N, const)
