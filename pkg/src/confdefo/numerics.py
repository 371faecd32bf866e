"""Dense SVD rank/nullspace helpers with auditable cutoffs."""

import os
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

#: relative singular-value cutoff used for all rank decisions
RANK_TOL = 1e-9

#: default relative tolerance for residual checks; ``CONFDEFO_TOL`` overrides
DEFAULT_TOL = 1e-10


def default_tol(tol=None):
    if tol is not None:
        return float(tol)
    return float(os.environ.get("CONFDEFO_TOL", DEFAULT_TOL))


@dataclass
class Nullspace:
    """Result of a rank/nullity analysis.

    ``spectrum`` holds all ``n`` singular values in decreasing order, padded
    with exact zeros when the matrix has fewer rows than columns, so that
    ``spectrum[rank:]`` are the ones counted as zero.
    """

    basis: np.ndarray
    rank: int
    spectrum: np.ndarray
    tol: float
    sigma_max: float = field(init=False)

    def __post_init__(self):
        self.sigma_max = float(self.spectrum[0]) if self.spectrum.size else 0.0

    @property
    def nullity(self):
        return self.basis.shape[1]

    @property
    def window(self):
        """The five singular values bracketing the cutoff (3 above, 2 below)."""
        lo = max(self.rank - 3, 0)
        return [float(s) for s in self.spectrum[lo:self.rank + 2]]

    @property
    def relative_window(self):
        if self.sigma_max == 0:
            return self.window
        return [s / self.sigma_max for s in self.window]

    def as_dict(self):
        return {
            "rank": self.rank,
            "nullity": self.nullity,
            "sigma_max": self.sigma_max,
            "cutoff": self.tol,
            "singular_values_window": self.window,
        }


def nullspace(A, tol=RANK_TOL):
    """Orthonormal nullspace basis of a dense matrix via SVD.

    Singular values ``s <= tol * s_max`` count as zero.
    """
    A = np.asarray(A, dtype=float)
    m, n = A.shape
    if m == 0:
        return Nullspace(np.eye(n), 0, np.zeros(n), tol)
    _, s, vh = scipy.linalg.svd(A, full_matrices=True, lapack_driver="gesvd")
    spectrum = np.zeros(n)
    spectrum[:s.size] = s
    smax = s[0] if s.size else 0.0
    rank = int(np.sum(s > tol * smax)) if smax > 0 else 0
    basis = vh[rank:].T.copy()
    return Nullspace(basis, rank, spectrum, tol)


def lstsq(A, b):
    """Minimum-norm least-squares solution and its residual vector."""
    A = np.asarray(A, dtype=float)
    x, *_ = scipy.linalg.lstsq(A, b, cond=1e-13, lapack_driver="gelsd")
    return x, A @ x - b


def orthonormal_complement(basis, within):
    """Orthonormal basis of ``span(within)`` minus ``span(basis)``.

    ``basis`` columns must already be orthonormal and lie in ``span(within)``.
    """
    P = within - basis @ (basis.T @ within)
    u, s, _ = np.linalg.svd(P, full_matrices=False)
    k = within.shape[1] - basis.shape[1]
    return u[:, :k]
