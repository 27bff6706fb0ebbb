"""Lagrange extrapolation of the source history and its Laplace transform.

For history nodes ``t_{n-k} < ... < t_{n-1}`` the basis polynomial ``L_j``
satisfies ``L_j(t_{n-i}) = delta_ij``.  It is stored in the shifted variable
``s = t - t_{n-1}``, i.e. ``L_{j,n}(s) = sum_m c[j, m] s**m``, whose Laplace
transform is ``sum_m c[j, m] m! / z**(m+1)``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

__all__ = ["ExtrapolationStencil", "build_stencil", "laplace_at", "ghat_at", "K_MAX_ORDER"]

K_MAX_ORDER = 6
_SPACING_WARN = 1e6


@dataclass(frozen=True)
class ExtrapolationStencil:
    k: int
    nodes: np.ndarray = field(repr=False)  # increasing: t_{n-k}, ..., t_{n-1}
    shift: float
    # coeffs[j-1, m]: coefficient of s**m in L_{j,n}(s); row j-1 belongs to t_{n-j}
    coeffs: np.ndarray = field(repr=False)

    def evaluate(self, s) -> np.ndarray:
        """Values ``L_{j,n}(s)`` for ``j = 1..k``, shape ``(k,) + shape(s)``."""
        s = np.asarray(s, dtype=float)
        out = np.zeros((self.k,) + s.shape)
        for m in range(self.k - 1, -1, -1):
            out = out * s + self.coeffs[:, m].reshape((self.k,) + (1,) * s.ndim)
        return out


def _newton_to_monomial(x: np.ndarray, values: np.ndarray) -> np.ndarray:
    """Monomial coefficients of the interpolant through ``(x, values)``.

    Divided differences followed by nested expansion of the Newton form.
    """
    k = len(x)
    dd = np.array(values, dtype=float)
    for level in range(1, k):
        dd[level:] = (dd[level:] - dd[level - 1:-1]) / (x[level:] - x[:-level])
    poly = np.zeros(k)
    poly[0] = dd[k - 1]
    # Horner on the Newton form: p <- p * (s - x_i) + dd_i
    for i in range(k - 2, -1, -1):
        shifted = np.zeros(k)
        shifted[1:] = poly[:-1]
        poly = shifted - x[i] * poly
        poly[0] += dd[i]
    return poly


def build_stencil(history_nodes: Sequence[float], k: int | None = None) -> ExtrapolationStencil:
    """Build the degree ``k-1`` extrapolation basis on increasing history nodes."""
    nodes = np.asarray(history_nodes, dtype=float)
    if k is None:
        k = len(nodes)
    if nodes.ndim != 1 or len(nodes) != k:
        raise ValueError(f"expected {k} history nodes, got shape {nodes.shape}")
    if not 1 <= k <= K_MAX_ORDER:
        raise ValueError(f"k must lie in 1..{K_MAX_ORDER}, got {k}")
    gaps = np.diff(nodes)
    if np.any(gaps <= 0):
        raise ValueError("history nodes must be strictly increasing (no duplicates)")
    if k > 2 and gaps.max() / gaps.min() > _SPACING_WARN:
        warnings.warn("extrapolation node spacing ratio exceeds 1e6; basis is ill-conditioned",
                      RuntimeWarning, stacklevel=2)

    shift = float(nodes[-1])
    # most recent first: x[0] = t_{n-1} - t_{n-1} = 0, x[1] = t_{n-2} - t_{n-1}, ...
    x = (nodes - shift)[::-1]
    coeffs = np.empty((k, k))
    for j in range(k):
        e = np.zeros(k)
        e[j] = 1.0
        coeffs[j] = _newton_to_monomial(x, e)
    coeffs.setflags(write=False)
    nodes = nodes.copy()
    nodes.setflags(write=False)
    return ExtrapolationStencil(k=k, nodes=nodes, shift=shift, coeffs=coeffs)


def _check_z(z) -> None:
    if np.any(np.abs(z) < 1e-300):
        raise ZeroDivisionError("Laplace transform evaluated too close to z = 0")


def laplace_at(stencil: ExtrapolationStencil, j: int, z):
    """Laplace transform of ``L_{j,n}`` at ``z`` (scalar or array), ``j`` in ``1..k``."""
    if not 1 <= j <= stencil.k:
        raise IndexError(f"j must lie in 1..{stencil.k}, got {j}")
    z = np.asarray(z, dtype=complex)
    _check_z(z)
    return _laplace_rows(stencil, z)[j - 1]


def _laplace_rows(stencil: ExtrapolationStencil, z: np.ndarray) -> np.ndarray:
    # sum_m c[:, m] * m! * z**-(m+1), evaluated by Horner in 1/z
    inv = 1.0 / z
    k = stencil.k
    acc = np.zeros((k,) + z.shape, dtype=complex)
    for m in range(k - 1, -1, -1):
        c = stencil.coeffs[:, m] * math.factorial(m)
        acc = acc * inv + c.reshape((k,) + (1,) * z.ndim)
    return acc * inv


def ghat_at(stencil: ExtrapolationStencil, f_history, z) -> np.ndarray:
    """Laplace transform of the extrapolated source: ``sum_j Lhat_j(z) f_{n-j}``.

    ``f_history[j-1]`` holds ``f(t_{n-j}, u_{n-j})``, most recent first.  For
    array ``z`` of shape ``(P,)`` the result has shape ``(P, M)``.
    """
    F = np.asarray(f_history, dtype=float)
    if F.ndim != 2 or F.shape[0] != stencil.k:
        raise ValueError(f"f_history must hold {stencil.k} vectors of equal length, got shape {F.shape}")
    z = np.asarray(z, dtype=complex)
    _check_z(z)
    weights = _laplace_rows(stencil, np.atleast_1d(z))  # (k, P)
    out = weights.T @ F
    return out[0] if z.ndim == 0 else out
