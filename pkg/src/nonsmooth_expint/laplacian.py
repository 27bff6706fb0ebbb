"""Finite-difference Dirichlet Laplacian on the unit interval."""

from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np
from scipy.fft import dst

__all__ = ["DirichletLaplacian1D", "SingularShiftError", "thomas_shifted"]


class SingularShiftError(ArithmeticError):
    """Raised when a shifted solve hits a (near-)zero pivot."""


@numba.njit(cache=True, nogil=True)
def _thomas_batch(shifts, diag, off, rhs, out):
    # Solves (z_p - A) x_p = rhs_p for constant-coefficient tridiagonal A
    # with diagonal `diag` and off-diagonal `off`. Returns the index of a
    # failing shift or -1.
    P, M = rhs.shape
    cp = np.empty(M, dtype=np.complex128)
    for p in range(P):
        b = shifts[p] - diag
        a = -off
        piv = b
        if abs(piv) < 1e-300:
            return p
        cp[0] = a / piv
        out[p, 0] = rhs[p, 0] / piv
        for i in range(1, M):
            piv = b - a * cp[i - 1]
            if abs(piv) < 1e-300:
                return p
            cp[i] = a / piv
            out[p, i] = (rhs[p, i] - a * out[p, i - 1]) / piv
        for i in range(M - 2, -1, -1):
            out[p, i] -= cp[i] * out[p, i + 1]
    return -1


def thomas_shifted(shifts, diag: float, off: float, rhs) -> np.ndarray:
    """Batched Thomas elimination for ``(z - A) x = b`` without pivoting.

    ``A`` is the constant tridiagonal matrix with diagonal ``diag`` and both
    off-diagonals ``off``.  ``shifts`` has shape ``(P,)`` and ``rhs`` shape ``(P, M)``.
    """
    shifts = np.ascontiguousarray(shifts, dtype=np.complex128)
    rhs = np.ascontiguousarray(rhs, dtype=np.complex128)
    out = np.empty_like(rhs)
    bad = _thomas_batch(shifts, complex(diag), complex(off), rhs, out)
    if bad >= 0:
        raise SingularShiftError(f"near-zero pivot for shift z={shifts[bad]}")
    return out


@dataclass(frozen=True)
class DirichletLaplacian1D:
    """Second-difference operator on ``M`` interior points of (0, 1).

    Grid points are ``x_i = i h`` for ``i = 1..M`` with ``h = 1/(M+1)``;
    homogeneous Dirichlet values are implied at both ends.
    """

    M: int

    def __post_init__(self):
        if int(self.M) != self.M or self.M < 1:
            raise ValueError(f"M must be a positive integer, got {self.M}")

    @property
    def h(self) -> float:
        return 1.0 / (self.M + 1)

    @property
    def scale(self) -> float:
        return (self.M + 1) ** 2

    @property
    def x(self) -> np.ndarray:
        return np.arange(1, self.M + 1) * self.h

    @property
    def eigenvalues(self) -> np.ndarray:
        m = np.arange(1, self.M + 1)
        return -4.0 * self.scale * np.sin(m * np.pi * self.h / 2.0) ** 2

    def eigenvector(self, m: int) -> np.ndarray:
        """Unit-norm (Euclidean) discrete sine mode ``m``."""
        return np.sqrt(2.0 * self.h) * np.sin(m * np.pi * self.x)

    def _check(self, v) -> np.ndarray:
        v = np.asarray(v)
        if v.shape[-1] != self.M:
            raise ValueError(f"vector length {v.shape[-1]} does not match M={self.M}")
        return v

    def apply(self, v) -> np.ndarray:
        """``A v`` with zero Dirichlet padding."""
        v = self._check(v)
        out = -2.0 * v
        out[..., 1:] += v[..., :-1]
        out[..., :-1] += v[..., 1:]
        return self.scale * out

    def matrix(self):
        """Sparse CSR representation of ``A``."""
        from scipy.sparse import diags

        s = self.scale
        return diags([s * np.ones(self.M - 1), -2 * s * np.ones(self.M), s * np.ones(self.M - 1)],
                     [-1, 0, 1], format="csr")

    def resolvent_solve(self, z, b) -> np.ndarray:
        """Solve ``(z I - A) x = b``.

        ``z`` may be a scalar with ``b`` of shape ``(M,)``, or an array of
        shifts with ``b`` of shape ``(len(z), M)``.
        """
        b = self._check(b)
        z_arr = np.asarray(z, dtype=complex)
        if z_arr.ndim == 0:
            return thomas_shifted(z_arr[None], -2.0 * self.scale, self.scale, b[None])[0]
        if b.ndim != 2 or b.shape[0] != z_arr.shape[0]:
            raise ValueError("batched resolvent needs one right-hand side per shift")
        return thomas_shifted(z_arr, -2.0 * self.scale, self.scale, b)

    def exact_propagator(self, tau: float, v) -> np.ndarray:
        """``exp(tau A) v`` through the orthonormal discrete sine transform."""
        v = self._check(np.asarray(v, dtype=float))
        if tau == 0:
            return v.copy()
        coef = dst(v, type=1, norm="ortho", axis=-1)
        return dst(np.exp(tau * self.eigenvalues) * coef, type=1, norm="ortho", axis=-1)

    def sample(self, u0) -> np.ndarray:
        """Pointwise samples ``u0(x_i)`` at the interior grid points."""
        return np.asarray(u0(self.x), dtype=float) * np.ones(self.M)
