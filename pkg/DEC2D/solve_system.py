from dataclasses import dataclass
import time
import warnings
import numpy as np
import scipy.linalg as la
import scipy.sparse as sp

from loguru import logger

from .assemble_system import LinearSystem, apply_dirichlet
from .errors import NumericalBreakdownError, SingularSystemError


# Largest system the dense oracle accepts
DENSE_LIMIT = 500


@dataclass(frozen=True)
class SolveStats:
    iterations: int
    final_residual: float
    converged: bool
    tolerance: float


def _constrained(system: LinearSystem) -> LinearSystem:
    if system.constrained:
        return system
    if system.fixed:
        return apply_dirichlet(system)
    # Zero row sums: constants span the kernel of a stiffness matrix
    row_sums = np.abs(system.matrix @ np.ones(system.n))
    scale = abs(system.matrix).max() if system.n else 0.0
    if system.n and np.max(row_sums) <= 1e-12 * scale:
        raise SingularSystemError('No Dirichlet nodes: the pure Neumann '
            'stiffness matrix is singular')
    return system


@logger.catch(reraise=True)
def solve_cg(
    system: LinearSystem,
    tol: float=1e-10,
    max_iter: int=None,
    x0: np.ndarray=None
):
    """
    Jacobi preconditioned conjugate gradient.

    Stops when ||b - A x||_2 <= tol ||b||_2 or after max_iter iterations.
    Systems whose Dirichlet set has not been applied yet are constrained
    first.

    @param system: [`LinearSystem`] Symmetric positive definite system
    @param tol: [`float`] Relative residual tolerance
    @param max_iter: [`int`] Iteration cap, defaults to 10 n
    @param x0: [`np.ndarray`] Optional starting guess, defaults to zeros
    @return: [`tuple`] (solution, SolveStats)
    """
    system = _constrained(system)
    A = sp.csr_matrix(system.matrix)
    b = np.asarray(system.rhs, dtype=float)
    n = b.shape[0]
    if max_iter is None:
        max_iter = 10 * n
    diagonal = A.diagonal()
    if not np.all(np.isfinite(diagonal)) or np.any(diagonal <= 0):
        raise NumericalBreakdownError('Jacobi preconditioning needs a '
            'positive diagonal')
    inverse_diagonal = 1.0 / diagonal

    start = time.perf_counter()
    x = np.zeros(n) if x0 is None else np.array(x0, dtype=float)
    r = b - A @ x
    b_norm = np.linalg.norm(b)
    threshold = tol * b_norm
    residual = np.linalg.norm(r)
    k = 0
    if residual > threshold:
        z = inverse_diagonal * r
        d = z.copy()
        rz = r @ z
        # Main loop
        while k < max_iter:
            Ad = A @ d
            alpha = rz / (d @ Ad)
            x += alpha * d
            r -= alpha * Ad
            k += 1
            residual = np.linalg.norm(r)
            if not (np.isfinite(alpha) and np.isfinite(residual)):
                raise NumericalBreakdownError(f'Non-finite values in CG at '
                    f'iteration {k}')
            if residual <= threshold:
                break
            z = inverse_diagonal * r
            rz_next = r @ z
            d = z + (rz_next / rz) * d
            rz = rz_next
    converged = bool(residual <= threshold)
    stats = SolveStats(iterations=k, final_residual=float(residual),
        converged=converged, tolerance=tol)
    elapsed = time.perf_counter() - start
    if converged:
        logger.info(f'CG converged in {k} iterations, residual {residual:.3e} '
            f'({elapsed:.3f} s)')
    else:
        logger.warning(f'CG stopped after {k} iterations with residual '
            f'{residual:.3e} > {threshold:.3e}')
    return x, stats


@logger.catch(reraise=True)
def solve_dense(system: LinearSystem) -> np.ndarray:
    """
    Direct LU solve with partial pivoting, the oracle for `solve_cg`.

    @param system: [`LinearSystem`] At most DENSE_LIMIT unknowns
    @return: [`np.ndarray`] The solution
    """
    system = _constrained(system)
    n = system.n
    if n > DENSE_LIMIT:
        raise ValueError(f'solve_dense handles at most {DENSE_LIMIT} unknowns, '
            f'got {n}')
    A = system.matrix.toarray() if sp.issparse(system.matrix) \
        else np.asarray(system.matrix, dtype=float)
    with warnings.catch_warnings():
        warnings.simplefilter('ignore', la.LinAlgWarning)
        lu, piv = la.lu_factor(A)
    pivots = np.abs(np.diag(lu))
    scale = max(np.max(np.abs(A)), np.finfo(float).tiny)
    if np.any(pivots <= n * np.finfo(float).eps * scale):
        raise SingularSystemError('The matrix is singular to working precision')
    return la.lu_solve((lu, piv), system.rhs)
