"""Rewriting the alignment-plus-classification objective as a lasso problem.

The latent embedding is eliminated through its stationarity condition,
leaving a quadratic form in the projection column governed by a matrix A
built from the alignment matrix. Factoring the symmetrized A through its
eigendecomposition and appending ridge rows turns the objective into an
ordinary penalized least-squares design (xstar, ystar) that the LARS
engine consumes. Eigenvalues below a relative floor are clamped: the
transformed response then lives in the retained subspace only.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import MenConfig
from .errors import NumericalError

__all__ = [
    "AugmentedProblem",
    "SpectralFactor",
    "eliminate_z",
    "build_a",
    "spectral_factor",
    "build_augmented",
]

# condition estimates at or beyond this mean the resolvent solve is unreliable
COND_LIMIT = 1e14


@dataclass
class SpectralFactor:
    """Eigen square root of the symmetrized A restricted to retained rows.

    root:               n' x n, sqrt(D) U^T over retained eigenvalues
    response_transform: n' x n, 1/sqrt(D) U^T (adjoint-inverse of root
                        on the retained subspace; applied to responses)
    eigenvalues:        retained eigenvalues, descending
    n_dropped:          eigenvalues discarded by the relative floor
    """

    root: np.ndarray
    response_transform: np.ndarray
    eigenvalues: np.ndarray
    n_dropped: int


@dataclass
class AugmentedProblem:
    """Penalized least-squares design for one projection column.

    xstar:       (n' + p) x p design; bottom p rows are the scaled ridge block
    ystar:       length n' + p response; bottom p entries are zero
    lam:         implicit lasso weight lambda1/(1+lambda2) when lambda1 was
                 given; informational only (sparsity is governed by K)
    n_effective: n', the number of retained spectral rows
    scale:       sqrt(1+lambda2) relating the reported column W to the
                 solved coefficients (W* = scale * W)
    """

    xstar: np.ndarray
    ystar: np.ndarray
    lam: float | None
    n_effective: int
    scale: float

    @property
    def n_variables(self) -> int:
        return self.xstar.shape[1]


def eliminate_z(L: np.ndarray, cfg: MenConfig) -> np.ndarray:
    """Resolvent M = beta * (alpha L + beta I)^{-1}.

    The optimal embedding for a fixed projection is M X W, from setting
    the objective's gradient in the embedding to zero. Raises
    NumericalError when the system's condition estimate reaches 1e14.
    """
    L = np.asarray(L, dtype=np.float64)
    n = L.shape[0]
    if cfg.alpha == 0.0:
        return np.eye(n)
    system = cfg.alpha * L + cfg.beta * np.eye(n)
    cond = np.linalg.cond(system)
    if not np.isfinite(cond) or cond >= COND_LIMIT:
        raise NumericalError(
            f"alpha*L + beta*I is ill-conditioned (condition estimate {cond:.3e}); "
            f"increase beta or decrease alpha"
        )
    return np.linalg.solve(system, cfg.beta * np.eye(n))


def build_a(L: np.ndarray, cfg: MenConfig) -> np.ndarray:
    """A = alpha M^T L M + beta (M - I)^T (M - I) + I with M = eliminate_z(L)."""
    L = np.asarray(L, dtype=np.float64)
    n = L.shape[0]
    m = eliminate_z(L, cfg)
    if cfg.alpha == 0.0:
        return np.eye(n)
    shift = m - np.eye(n)
    return cfg.alpha * (m.T @ L @ m) + cfg.beta * (shift.T @ shift) + np.eye(n)


def spectral_factor(A: np.ndarray, eig_floor: float) -> SpectralFactor:
    """Factor (A + A^T)/2 = root^T root, dropping eigenvalues below the floor.

    Eigenvalues smaller than eig_floor times the largest are discarded
    (they would make the inverse square root applied to the response
    blow up). Raises NumericalError when nothing is retained.
    """
    A = np.asarray(A, dtype=np.float64)
    sym = 0.5 * (A + A.T)
    eigvals, eigvecs = np.linalg.eigh(sym)
    order = np.argsort(eigvals)[::-1]
    eigvals = eigvals[order]
    eigvecs = eigvecs[:, order]
    top = eigvals[0]
    if top <= 0.0:
        raise NumericalError(
            "no positive eigenvalues in the symmetrized quadratic-form matrix"
        )
    keep = eigvals >= eig_floor * top
    kept = eigvals[keep]
    vecs = eigvecs[:, keep]
    sqrt_vals = np.sqrt(kept)
    return SpectralFactor(
        root=sqrt_vals[:, None] * vecs.T,
        response_transform=vecs.T / sqrt_vals[:, None],
        eigenvalues=kept.copy(),
        n_dropped=int(eigvals.size - kept.size),
    )


def build_augmented(
    X: np.ndarray,
    y_col: np.ndarray,
    L: np.ndarray,
    cfg: MenConfig,
    *,
    factor: SpectralFactor | None = None,
) -> AugmentedProblem:
    """Assemble the (n' + p) x p design and response for one target column.

    xstar = (1+lambda2)^{-1/2} [root X ; sqrt(lambda2) I]
    ystar = [response_transform y ; 0]

    A precomputed spectral factor may be shared across columns.
    """
    X = np.asarray(X, dtype=np.float64)
    y_col = np.asarray(y_col, dtype=np.float64).reshape(-1)
    if factor is None:
        factor = spectral_factor(build_a(L, cfg), cfg.eig_floor)
    n_eff = factor.root.shape[0]
    p = X.shape[1]
    scale = float(np.sqrt(1.0 + cfg.lambda2))
    xstar = np.vstack([factor.root @ X, np.sqrt(cfg.lambda2) * np.eye(p)]) / scale
    ystar = np.concatenate([factor.response_transform @ y_col, np.zeros(p)])
    lam = None if cfg.lambda1 is None else cfg.lambda1 / (1.0 + cfg.lambda2)
    return AugmentedProblem(
        xstar=xstar,
        ystar=ystar,
        lam=lam,
        n_effective=n_eff,
        scale=scale,
    )
