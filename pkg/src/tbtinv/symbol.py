"""Toeplitz-block-Toeplitz symbols: storage, assembly, projection, sampling.

A TBT matrix of ``n`` outer blocks of order ``m`` is fixed by the
coefficients ``t_r^(s)`` with ``|r| < n`` and ``|s| < m``; the entry in
block ``(i, k)`` at inner position ``(j, l)`` is ``t_{i-k}^{(j-l)}``. Rows
and columns are numbered ``m*(i-1) + j`` (1-based), i.e. outer-major.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import as_matrix


@dataclass(frozen=True, eq=False)
class TbtSymbol:
    """Generating coefficients of an ``mn x mn`` TBT matrix.

    ``coeffs[r + n - 1, s + m - 1]`` holds ``t_r^(s)``.
    """

    m: int
    n: int
    coeffs: np.ndarray

    def __post_init__(self):
        if int(self.m) < 1 or int(self.n) < 1:
            raise ValueError(f"m and n must be positive, got m={self.m}, n={self.n}")
        c = np.array(self.coeffs, dtype=np.complex128)
        shape = (2 * self.n - 1, 2 * self.m - 1)
        if c.shape != shape:
            raise ValueError(f"coeffs must have shape {shape}, got {c.shape}")
        if not np.all(np.isfinite(c)):
            raise ValueError("coeffs must be finite")
        c.setflags(write=False)
        object.__setattr__(self, "m", int(self.m))
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "coeffs", c)

    @property
    def order(self) -> int:
        return self.m * self.n

    def t(self, r: int, s: int) -> complex:
        """The coefficient ``t_r^(s)``."""
        if abs(r) >= self.n or abs(s) >= self.m:
            raise IndexError(f"(r, s) = ({r}, {s}) outside the symbol of m={self.m}, n={self.n}")
        return complex(self.coeffs[r + self.n - 1, s + self.m - 1])

    def block(self, r: int) -> np.ndarray:
        """The Toeplitz block ``T_r = {t_r^(j-l)}``, an ``m x m`` matrix."""
        j = np.arange(self.m)
        return self.coeffs[r + self.n - 1][(j[:, None] - j[None, :]) + self.m - 1].copy()

    def __add__(self, other: "TbtSymbol") -> "TbtSymbol":
        self._check_same_shape(other)
        return TbtSymbol(self.m, self.n, self.coeffs + other.coeffs)

    def __mul__(self, alpha) -> "TbtSymbol":
        return TbtSymbol(self.m, self.n, complex(alpha) * self.coeffs)

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, TbtSymbol):
            return NotImplemented
        return (self.m, self.n) == (other.m, other.n) and np.array_equal(self.coeffs, other.coeffs)

    def _check_same_shape(self, other):
        if (self.m, self.n) != (other.m, other.n):
            raise ValueError("symbols have different (m, n)")


def _index_maps(m: int, n: int):
    """Return ``(r, s)`` index arrays: ``r[a, b] = i - k``, ``s[a, b] = j - l``."""
    idx = np.arange(m * n)
    outer, inner = np.divmod(idx, m)
    return outer[:, None] - outer[None, :], inner[:, None] - inner[None, :]


def assemble(sym: TbtSymbol) -> np.ndarray:
    """Materialize the full ``mn x mn`` TBT matrix."""
    r, s = _index_maps(sym.m, sym.n)
    return sym.coeffs[r + sym.n - 1, s + sym.m - 1].copy()


def project_tbt(a, m: int, n: int) -> tuple[TbtSymbol, float]:
    """Least-squares projection of a square matrix onto TBT structure.

    Each coefficient is the mean of the entries of `a` in its ``(i-k, j-l)``
    diagonal class. The returned deviation is ``max|A - assemble(proj)|``
    divided by ``max|A|`` (0 for the zero matrix).
    """
    a = as_matrix(a, "A")
    if a.shape != (m * n, m * n):
        raise ValueError(f"expected a {m * n}x{m * n} matrix for m={m}, n={n}, got {a.shape}")
    r, s = _index_maps(m, n)
    flat = ((r + n - 1) * (2 * m - 1) + (s + m - 1)).ravel()
    size = (2 * n - 1) * (2 * m - 1)
    counts = np.bincount(flat, minlength=size)
    sums = np.bincount(flat, weights=a.real.ravel(), minlength=size) + 1j * np.bincount(
        flat, weights=a.imag.ravel(), minlength=size
    )
    sym = TbtSymbol(m, n, (sums / counts).reshape(2 * n - 1, 2 * m - 1))
    scale = np.abs(a).max()
    deviation = float(np.abs(a - assemble(sym)).max() / scale) if scale > 0 else 0.0
    return sym, deviation


def random_symbol(m: int, n: int, seed: int = 0, dominance: float = 0.0) -> TbtSymbol:
    """Draw a symbol with real and imaginary parts uniform in [-1, 1].

    ``t_0^(0)`` is then shifted by ``dominance * m * n``; at ``dominance >= 4``
    the assembled matrix is strictly diagonally dominant.
    """
    if m < 1 or n < 1:
        raise ValueError(f"m and n must be positive, got m={m}, n={n}")
    if dominance < 0:
        raise ValueError("dominance must be nonnegative")
    rng = np.random.default_rng(seed)
    shape = (2 * n - 1, 2 * m - 1)
    coeffs = rng.uniform(-1.0, 1.0, shape) + 1j * rng.uniform(-1.0, 1.0, shape)
    coeffs[n - 1, m - 1] += dominance * m * n
    return TbtSymbol(m, n, coeffs)
