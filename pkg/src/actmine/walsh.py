"""Sequency-ordered fast Walsh transform with power-of-two zero padding.

The transform expands a real sequence over the +/-1-valued Walsh function
family ordered by sequency (number of sign changes). Rows are realized as
the Sylvester-Hadamard matrix permuted into sequency order via the
Gray-code / bit-reversal index map, which keeps the family orthogonal and
the inverse transform exact.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "WalshSpectrum",
    "pad",
    "padded_length",
    "walsh_matrix",
    "fwft",
    "ifwft",
]

# Largest size for which the dense matrix may be materialized; the fast
# transform has no such limit.
MATRIX_SIZE_CAP = 1024


@dataclass(frozen=True)
class WalshSpectrum:
    """Sequency-ordered coefficients of a zero-padded series.

    ``coefficients[s]`` belongs to the Walsh function with ``s`` sign
    changes, i.e. sequency index ``m = s + 1`` in 1-based terms.
    """

    coefficients: np.ndarray
    t2: int
    original_length: int

    def __post_init__(self):
        if self.t2 < 1 or self.t2 & (self.t2 - 1):
            raise ValueError(f"padded length {self.t2} is not a power of two")
        if len(self.coefficients) != self.t2:
            raise ValueError("coefficient count does not match padded length")
        if not 1 <= self.original_length <= self.t2:
            raise ValueError("original length must lie in [1, t2]")


def padded_length(n: int) -> int:
    """Transform size for a series of length ``n``.

    ``n`` itself when it is already a power of two, otherwise the next
    power of two above it.
    """
    if n < 1:
        raise ValueError("cannot pad an empty sequence")
    return n if n & (n - 1) == 0 else 1 << n.bit_length()


def pad(values) -> np.ndarray:
    """Zero-pad a sequence up to the admissible transform size."""
    x = np.asarray(values, dtype=np.float64)
    if x.ndim != 1 or x.size == 0:
        raise ValueError("pad expects a non-empty 1-D sequence")
    t2 = padded_length(x.size)
    if t2 == x.size:
        return x.copy()
    out = np.zeros(t2, dtype=np.float64)
    out[: x.size] = x
    return out


def _sequency_permutation(t2: int) -> np.ndarray:
    """Index map from sequency order to natural Hadamard order."""
    k = t2.bit_length() - 1
    s = np.arange(t2)
    gray = s ^ (s >> 1)
    rev = np.zeros(t2, dtype=np.int64)
    for b in range(k):
        rev |= ((gray >> b) & 1) << (k - 1 - b)
    return rev


def walsh_matrix(t2: int, cap: int = MATRIX_SIZE_CAP) -> np.ndarray:
    """Dense sequency-ordered Walsh matrix of +/-1 integers.

    Row ``s`` (0-based) has exactly ``s`` sign changes; rows are mutually
    orthogonal with dot product ``t2`` on the diagonal. Intended for tests
    and small sizes only, hence the ``cap``.
    """
    if t2 < 1 or t2 & (t2 - 1):
        raise ValueError(f"size {t2} is not a power of two")
    if t2 > cap:
        raise ValueError(f"size {t2} exceeds the dense-matrix cap {cap}")
    idx = np.arange(t2)
    anded = idx[:, None] & idx[None, :]
    bits = np.zeros_like(anded)
    for b in range(max(t2.bit_length() - 1, 1)):
        bits += (anded >> b) & 1
    hadamard = np.where(bits & 1, -1, 1).astype(np.int64)
    return hadamard[_sequency_permutation(t2)]


def _fwht_natural(x: np.ndarray) -> np.ndarray:
    """In-place style butterfly; returns Hadamard-ordered coefficients."""
    a = np.array(x, dtype=np.float64, copy=True)
    n = a.size
    h = 1
    while h < n:
        blocks = a.reshape(-1, 2, h)
        top = blocks[:, 0, :] + blocks[:, 1, :]
        bottom = blocks[:, 0, :] - blocks[:, 1, :]
        blocks[:, 0, :] = top
        blocks[:, 1, :] = bottom
        h *= 2
    return a


def _fwht_sequency(x: np.ndarray) -> np.ndarray:
    return _fwht_natural(x)[_sequency_permutation(x.size)]


def fwft(values, original_length: int | None = None) -> WalshSpectrum:
    """Fast Walsh-Fourier transform of an already padded sequence.

    Equals the direct product with :func:`walsh_matrix` but runs in
    O(t2 log t2) via the butterfly plus a sequency reordering.
    """
    x = np.asarray(values, dtype=np.float64)
    if x.ndim != 1 or x.size == 0 or x.size & (x.size - 1):
        raise ValueError("fwft requires a non-empty power-of-two length input")
    coeffs = _fwht_sequency(x)
    return WalshSpectrum(
        coefficients=coeffs,
        t2=x.size,
        original_length=x.size if original_length is None else original_length,
    )


def ifwft(spectrum: WalshSpectrum) -> np.ndarray:
    """Inverse transform; ``ifwft(fwft(x))`` recovers ``x`` to 1e-9.

    The sequency-ordered Walsh matrix is symmetric, so the inverse is the
    forward butterfly scaled by ``1 / t2``.
    """
    return _fwht_sequency(spectrum.coefficients) / spectrum.t2
