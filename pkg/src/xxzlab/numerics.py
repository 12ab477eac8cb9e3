"""Dense symmetric kernels: eigendecomposition, shifted solves, f(H).

Everything here is deterministic for identical input bits (LAPACK drivers
with no randomized initialization) and pure, so callers may parallelize
across disorder samples.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np
import scipy.linalg

# Residual/orthonormality checks on every eigendecomposition; enabled by the
# test suite, off by default (they cost an extra matmul per call).
VALIDATE = False

SYMMETRY_RTOL = 1e-13
_RCOND_FLOOR = 1e-14


class NonSymmetricError(ValueError):
    """Input matrix is not symmetric within tolerance."""


class NearSingularShift(ArithmeticError):
    """Shifted solve at (numerically) an eigenvalue of the operator."""

    def __init__(self, z: complex, rcond: float):
        super().__init__(f"shift z={z} is near-singular (rcond={rcond:.3e})")
        self.z = z
        self.rcond = rcond


@dataclass(frozen=True, eq=False)
class EigenDecomposition:
    eigenvalues: np.ndarray  # ascending
    eigenvectors: np.ndarray  # orthonormal columns

    @property
    def dim(self) -> int:
        return self.eigenvalues.shape[0]


def _as_matrix(a) -> np.ndarray:
    m = getattr(a, "matrix", a)
    return np.asarray(m)


def check_symmetric(m: np.ndarray, rtol: float = SYMMETRY_RTOL) -> None:
    scale = max(1.0, float(np.max(np.abs(m))) if m.size else 0.0)
    dev = float(np.max(np.abs(m - m.T))) if m.size else 0.0
    if dev > rtol * scale:
        raise NonSymmetricError(f"asymmetry {dev:.3e} exceeds {rtol:.1e} * {scale:.3e}")


def eig_sym(a, validate: bool | None = None) -> EigenDecomposition:
    """Full eigendecomposition of a real symmetric matrix."""
    m = _as_matrix(a)
    check_symmetric(m)
    vals, vecs = np.linalg.eigh(m)
    if validate if validate is not None else VALIDATE:
        scale = max(1.0, float(np.max(np.abs(vals))) if vals.size else 0.0)
        residual = float(np.max(np.abs(m @ vecs - vecs * vals)))
        if residual > 1e-10 * scale:
            raise ArithmeticError(f"eigendecomposition residual {residual:.3e}")
        gram_dev = float(np.max(np.abs(vecs.T @ vecs - np.eye(vecs.shape[1]))))
        if gram_dev > 1e-10:
            raise ArithmeticError(f"eigenvector orthonormality defect {gram_dev:.3e}")
    return EigenDecomposition(vals, vecs)


class ShiftedSolver:
    """LU factorization of (A - z), reusable across right-hand sides."""

    def __init__(self, a, z: complex):
        m = _as_matrix(a)
        shifted = m.astype(complex) - z * np.eye(m.shape[0])
        anorm = float(np.linalg.norm(shifted, 1))
        with warnings.catch_warnings():
            # exact singularity is diagnosed below via the condition estimate
            warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
            self._lu, self._piv = scipy.linalg.lu_factor(shifted, check_finite=False)
        rcond, info = scipy.linalg.lapack.zgecon(self._lu, anorm)
        if info != 0 or rcond < _RCOND_FLOOR:
            raise NearSingularShift(z, float(rcond))
        self.z = z
        self.rcond = float(rcond)
        self.dim = m.shape[0]

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        return scipy.linalg.lu_solve(
            (self._lu, self._piv), np.asarray(rhs, dtype=complex), check_finite=False
        )

    def solve_basis_column(self, index: int) -> np.ndarray:
        rhs = np.zeros(self.dim, dtype=complex)
        rhs[index] = 1.0
        return self.solve(rhs)


def solve_shifted(a, z: complex, rhs: Union[int, np.ndarray]) -> np.ndarray:
    """Solve (A - z) u = e_y (or a given vector); u holds the resolvent column."""
    solver = ShiftedSolver(a, z)
    if isinstance(rhs, (int, np.integer)):
        return solver.solve_basis_column(int(rhs))
    return solver.solve(rhs)


def matrix_function(decomp: EigenDecomposition, f: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
    """V f(D) V^T; with an indicator this is the spectral projection."""
    fd = np.asarray(f(decomp.eigenvalues))
    return (decomp.eigenvectors * fd) @ decomp.eigenvectors.T


def degeneracy_tolerance(eigenvalues: np.ndarray) -> float:
    scale = max(1.0, float(np.max(np.abs(eigenvalues))) if eigenvalues.size else 0.0)
    return 1e-9 * scale


def spectral_clusters(
    decomp: EigenDecomposition, tol: float | None = None
) -> list[slice]:
    """Group near-degenerate eigenvalues so projections are well defined."""
    vals = decomp.eigenvalues
    if tol is None:
        tol = degeneracy_tolerance(vals)
    slices = []
    start = 0
    for i in range(1, vals.shape[0]):
        if vals[i] - vals[i - 1] > tol:
            slices.append(slice(start, i))
            start = i
    if vals.shape[0]:
        slices.append(slice(start, vals.shape[0]))
    return slices


def cluster_projector(decomp: EigenDecomposition, block: slice) -> np.ndarray:
    v = decomp.eigenvectors[:, block]
    return v @ v.T


def spectral_norm(m: np.ndarray) -> float:
    """Largest singular value."""
    if m.size == 0:
        return 0.0
    return float(np.linalg.svd(m, compute_uv=False)[0])
