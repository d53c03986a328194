"""Kernel evaluation and Gram-matrix algebra shared by all trainers.

Two kernel families: the spectrally truncated sine kernel tied to a
:class:`~kdc.spectral_model.SpectralProblem` (whose integral operator has a
known spectrum), and a generic Gaussian kernel kept for API completeness
(it carries no ground-truth regression function).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, EigendecompositionError, InvalidParameterError
from .spectral_model import SpectralProblem, basis_matrix

#: Relative tolerance (times trace/n) below which negative eigenvalues of a
#: Gram matrix are treated as floating-point noise and clamped to zero.
EIG_CLAMP_REL = 1e-8

#: Relative Frobenius tolerance for eigendecomposition reconstruction.
EIG_RECONSTRUCT_REL = 1e-8


@dataclass(frozen=True, eq=False)
class KernelSpec:
    """Tagged kernel description: ``spectral`` or ``gaussian``."""

    kind: str
    problem: SpectralProblem | None = None
    bandwidth: float | None = None

    def __post_init__(self) -> None:
        if self.kind == "spectral":
            if self.problem is None:
                raise InvalidParameterError("spectral kernel needs a problem")
        elif self.kind == "gaussian":
            if self.bandwidth is None or self.bandwidth <= 0:
                raise InvalidParameterError("gaussian kernel needs bandwidth > 0")
        else:
            raise InvalidParameterError(f"unknown kernel kind {self.kind!r}")

    def key(self):
        """Hashable identity used to check that models share a kernel."""
        if self.kind == "spectral":
            return ("spectral", self.problem.problem_id)
        return ("gaussian", self.bandwidth)


def spectral_kernel(problem: SpectralProblem) -> KernelSpec:
    """Truncated kernel K(x,u) = sum_i sigma_i phi_i(x) phi_i(u) on [0,1]."""
    return KernelSpec(kind="spectral", problem=problem)


def gaussian_kernel(bandwidth: float) -> KernelSpec:
    """K(x,u) = exp(-(x-u)^2 / (2 bandwidth^2))."""
    return KernelSpec(kind="gaussian", bandwidth=bandwidth)


def kernel_bound(spec: KernelSpec) -> float:
    """Upper bound on K(x,x): kappa_sq for spectral, 1 for Gaussian."""
    if spec.kind == "spectral":
        return spec.problem.kappa_sq
    return 1.0


def _check_spectral_domain(spec: KernelSpec, *arrays) -> None:
    if spec.kind != "spectral":
        return
    for arr in arrays:
        if np.any(arr < 0.0) or np.any(arr > 1.0):
            raise DomainError("spectral kernel is defined on [0, 1]")


def kernel_eval(spec: KernelSpec, x: float, u: float) -> float:
    """Evaluate K(x, u) for a single pair of points."""
    xa = np.asarray(x, dtype=float)
    ua = np.asarray(u, dtype=float)
    _check_spectral_domain(spec, xa, ua)
    if spec.kind == "spectral":
        p = spec.problem
        px = basis_matrix(p.dim, xa)[0]
        pu = basis_matrix(p.dim, ua)[0]
        return float(np.sum(p.eigenvalues * px * pu))
    d = float(xa) - float(ua)
    return float(np.exp(-(d * d) / (2.0 * spec.bandwidth**2)))


def kernel_cross(spec: KernelSpec, xs, us) -> np.ndarray:
    """Matrix of kernel values K(xs[j], us[k]), shape (len(xs), len(us))."""
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    us = np.atleast_1d(np.asarray(us, dtype=float))
    _check_spectral_domain(spec, xs, us)
    if spec.kind == "spectral":
        p = spec.problem
        fx = basis_matrix(p.dim, xs)
        fu = basis_matrix(p.dim, us)
        return (fx * p.eigenvalues) @ fu.T
    diff = xs[:, None] - us[None, :]
    return np.exp(-(diff**2) / (2.0 * spec.bandwidth**2))


@dataclass(frozen=True, eq=False)
class GramMatrix:
    """Symmetric n x n matrix of pairwise kernel values."""

    n: int
    entries: np.ndarray

    def __post_init__(self) -> None:
        e = np.asarray(self.entries, dtype=float)
        if e.shape != (self.n, self.n):
            raise InvalidParameterError("entries must be an n x n matrix")
        asym = float(np.max(np.abs(e - e.T))) if self.n else 0.0
        if asym > 1e-12 * max(1.0, float(np.max(np.abs(e)))):
            raise InvalidParameterError("Gram matrix must be symmetric")
        e.setflags(write=False)
        object.__setattr__(self, "entries", e)

    @property
    def trace(self) -> float:
        return float(np.trace(self.entries))


def gram(spec: KernelSpec, inputs) -> GramMatrix:
    """Build the Gram matrix of ``inputs``.

    (1/n) times this matrix represents the empirical covariance operator on
    coefficient vectors. Construction is exactly symmetric (the cross matrix
    is symmetrized to remove BLAS rounding asymmetry).
    """
    xs = np.atleast_1d(np.asarray(inputs, dtype=float))
    if xs.size == 0:
        raise InvalidParameterError("inputs must be nonempty")
    m = kernel_cross(spec, xs, xs)
    m = 0.5 * (m + m.T)
    return GramMatrix(n=xs.size, entries=m)


def sym_eigendecompose(g) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecompose a symmetric PSD matrix; eigenvalues descending.

    Accepts a GramMatrix or a raw symmetric ndarray. Tiny negative
    eigenvalues (within EIG_CLAMP_REL * trace/n of zero) are clamped to 0;
    anything more negative, or a reconstruction error beyond
    EIG_RECONSTRUCT_REL in relative Frobenius norm, raises
    EigendecompositionError. Returns (eigenvalues, eigenvectors) with
    eigenvectors in columns matching the eigenvalue order.
    """
    mat = g.entries if isinstance(g, GramMatrix) else np.asarray(g, dtype=float)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise InvalidParameterError("matrix must be square")
    n = mat.shape[0]
    sym = 0.5 * (mat + mat.T)
    try:
        vals, vecs = np.linalg.eigh(sym)
    except np.linalg.LinAlgError as exc:
        raise EigendecompositionError(f"eigensolver failed: {exc}") from exc

    norm = float(np.linalg.norm(sym))
    recon = vecs @ (vals[:, None] * vecs.T)
    err = float(np.linalg.norm(sym - recon))
    if err > EIG_RECONSTRUCT_REL * max(norm, np.finfo(float).tiny):
        raise EigendecompositionError(
            f"reconstruction error {err:.3e} exceeds {EIG_RECONSTRUCT_REL:.0e} "
            f"relative"
        )

    tol = EIG_CLAMP_REL * abs(float(np.trace(sym))) / n
    if np.any(vals < -tol):
        raise EigendecompositionError(
            f"matrix is not PSD within tolerance: min eigenvalue {vals.min():.3e}"
        )
    vals = np.where(vals < 0.0, 0.0, vals)

    order = np.argsort(vals)[::-1]
    return vals[order], vecs[:, order]
