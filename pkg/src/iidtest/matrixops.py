"""Small dense linear algebra and the chi-squared law used for cutoffs."""

from __future__ import annotations

import numpy as np
from scipy import special, stats

from .exceptions import NotPositiveDefiniteError, ParameterError

# smallest eigenvalue must exceed this fraction of the largest
PD_RTOL = 1e-10
SYMMETRY_RTOL = 1e-12


def kronecker(a, b) -> np.ndarray:
    return np.kron(np.atleast_2d(np.asarray(a, dtype=float)), np.atleast_2d(np.asarray(b, dtype=float)))


def _check_square_symmetric(a: np.ndarray):
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ParameterError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ParameterError("matrix has non-finite entries")
    scale = max(float(np.max(np.abs(a))), 1.0)
    if np.max(np.abs(a - a.T)) > SYMMETRY_RTOL * scale:
        raise ParameterError("matrix is not symmetric")


def spd_inverse_sqrt(a) -> np.ndarray:
    """Symmetric inverse square root B = A^{-1/2}, so that B B' = B B = A^{-1}.

    Raises ``NotPositiveDefiniteError`` when the smallest eigenvalue is not
    above ``PD_RTOL`` times the largest one; no regularisation is attempted.
    """
    a = np.asarray(a, dtype=float)
    _check_square_symmetric(a)
    if np.count_nonzero(a - np.diag(np.diagonal(a))) == 0:
        d = np.diagonal(a)
        if d.min() <= PD_RTOL * max(d.max(), 0.0):
            raise NotPositiveDefiniteError(d.min())
        return np.diag(1.0 / np.sqrt(d))
    sym = (a + a.T) / 2
    eigvals, eigvecs = np.linalg.eigh(sym)
    lo, hi = eigvals[0], eigvals[-1]
    if hi <= 0 or lo <= PD_RTOL * hi:
        raise NotPositiveDefiniteError(lo)
    out = (eigvecs * eigvals**-0.5) @ eigvecs.T
    return (out + out.T) / 2


def quadratic_form(v, m_inv) -> float:
    """v' M v for a symmetric matrix M (typically an inverse covariance)."""
    v = np.asarray(v, dtype=float)
    m_inv = np.asarray(m_inv, dtype=float)
    if v.ndim != 1 or m_inv.shape != (v.size, v.size):
        raise ParameterError(f"dimension mismatch: vector {v.shape}, matrix {m_inv.shape}")
    return float(v @ m_inv @ v)


def _check_df(df: int) -> int:
    if int(df) != df or df < 1:
        raise ParameterError(f"degrees of freedom must be a positive integer, got {df}")
    return int(df)


def chi2_survival(x: float, df: int) -> float:
    """P(W > x) for W ~ chi^2_df, i.e. the regularised upper incomplete gamma Q(df/2, x/2)."""
    df = _check_df(df)
    if x < 0:
        raise ParameterError(f"chi-squared survival needs x >= 0, got {x}")
    return float(special.gammaincc(df / 2.0, x / 2.0))


def chi2_quantile(p: float, df: int) -> float:
    """Upper-tail cutoff u with P(W > u) = p."""
    df = _check_df(df)
    if not 0.0 < p < 1.0:
        raise ParameterError(f"p must lie in (0, 1), got {p}")
    return float(stats.chi2.isf(p, df))
