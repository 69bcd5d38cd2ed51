"""
Cross-block Karhunen-Loeve transform.

Each pixel position of a BlockStack is one observation: the vector of the
values found at that position in the n blocks. The transform diagonalizes
the population covariance of those vectors.
"""

import logging
import math

import numpy as np

from src.config import JACOBI_MAX_SWEEPS, JACOBI_TOLERANCE
from src.exceptions import DimensionError, ValidationError
from src.models import BlockStack, EnergyReport, KltModel

logger = logging.getLogger(__name__)


def _observations(stack: BlockStack) -> np.ndarray:
    """Stack as an (n, positions) matrix, one row per block."""
    return np.ascontiguousarray(stack.blocks.reshape(stack.n, -1))


def covariance(stack: BlockStack) -> tuple[np.ndarray, np.ndarray]:
    """
    Mean vector and population covariance over pixel positions.

    Entries are computed pairwise so that permuting the blocks permutes
    the result exactly.

    Returns:
        Tuple of (mean, covariance)
    """
    x = _observations(stack)
    positions = x.shape[1]
    mean = x.mean(axis=1)
    centered = x - mean[:, np.newaxis]
    cov = np.empty((stack.n, stack.n), dtype=np.float64)
    for i in range(stack.n):
        for j in range(i, stack.n):
            cov[i, j] = cov[j, i] = float(np.dot(centered[i], centered[j])) / positions
    return mean, cov


def _rotate(a: np.ndarray, v: np.ndarray, p: int, q: int) -> None:
    """Apply one Jacobi rotation that zeroes a[p, q] (p < q)."""
    apq = a[p, q]
    diff = a[q, q] - a[p, p]
    if abs(apq) < abs(diff) * 1.0e-36:
        t = apq / diff
    else:
        phi = diff / (2.0 * apq)
        t = 1.0 / (abs(phi) + math.sqrt(phi * phi + 1.0))
        if phi < 0.0:
            t = -t
    c = 1.0 / math.sqrt(t * t + 1.0)
    s = t * c

    app, aqq = a[p, p], a[q, q]
    col_p = a[:, p].copy()
    col_q = a[:, q].copy()
    new_p = c * col_p - s * col_q
    new_q = s * col_p + c * col_q
    a[:, p] = new_p
    a[:, q] = new_q
    a[p, :] = new_p
    a[q, :] = new_q
    a[p, p] = app - t * apq
    a[q, q] = aqq + t * apq
    a[p, q] = a[q, p] = 0.0

    vec_p = v[:, p].copy()
    vec_q = v[:, q].copy()
    v[:, p] = c * vec_p - s * vec_q
    v[:, q] = s * vec_p + c * vec_q


def jacobi_eigh(matrix: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """
    Eigen-decompose a symmetric matrix with Jacobi rotations.

    This is classical (largest-pivot) Jacobi, not the cyclic variant that
    sweeps every (p, q) pair in a fixed order and stops when the off-diagonal
    Frobenius norm falls below a fraction of the trace. Each rotation zeroes
    the largest off-diagonal element (the first one in upper-triangle order
    on ties), so permuting rows and columns together permutes the rotation
    sequence and the result exactly. Iteration stops once
    ``max|offdiag| * sqrt(n(n-1)) <= JACOBI_TOLERANCE * ||A||_F``, which
    bounds the off-diagonal Frobenius norm by the same fraction.

    Args:
        matrix: Symmetric (n, n) matrix

    Returns:
        Tuple of (eigenvalues, eigenvectors as columns), unsorted

    Raises:
        DimensionError: If the matrix is not square
    """
    a = np.array(matrix, dtype=np.float64, copy=True)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"Expected a square matrix, got shape {a.shape}")
    n = a.shape[0]
    v = np.eye(n)
    if n < 2:
        return np.diag(a).copy(), v

    # Sorted so the norm does not depend on the order of rows and columns.
    scale = math.sqrt(float(np.sum(np.sort((a * a).ravel()))))
    bound = JACOBI_TOLERANCE * scale / math.sqrt(n * (n - 1))
    rows, cols = np.triu_indices(n, 1)

    max_rotations = JACOBI_MAX_SWEEPS * n * n
    for rotation in range(max_rotations):
        off = np.abs(a[rows, cols])
        pivot = int(np.argmax(off))
        if off[pivot] <= bound:
            logger.debug(f"Jacobi converged after {rotation} rotations (n={n})")
            break
        _rotate(a, v, int(rows[pivot]), int(cols[pivot]))
    else:
        logger.warning(f"Jacobi hit its rotation cap ({max_rotations}) for n={n}")

    return np.diag(a).copy(), v


def _sort_and_sign(eigenvalues: np.ndarray, vectors: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Sort descending (lower index first on ties) and make each column's largest entry positive."""
    order = np.lexsort((np.arange(eigenvalues.size), -eigenvalues))
    eigenvalues = eigenvalues[order]
    vectors = vectors[:, order].copy()
    for j in range(vectors.shape[1]):
        k = int(np.argmax(np.abs(vectors[:, j])))
        if vectors[k, j] < 0:
            vectors[:, j] = -vectors[:, j]
    return eigenvalues, vectors


def fit(stack: BlockStack) -> KltModel:
    """
    Fit a KLT to a stack of blocks.

    Args:
        stack: At least two equally sized blocks

    Returns:
        KltModel with all n channels retained

    Raises:
        ValidationError: If the stack has fewer than two blocks
    """
    if stack.n < 2:
        raise ValidationError(f"KLT needs at least 2 blocks, got {stack.n}")
    mean, cov = covariance(stack)
    eigenvalues, vectors = _sort_and_sign(*jacobi_eigh(cov))
    logger.info(
        f"Fitted KLT over {stack.n} blocks of {stack.block_shape}: "
        f"leading eigenvalue {eigenvalues[0]:.4g}, trace {np.trace(cov):.4g}"
    )
    return KltModel(mean=mean, basis=vectors, eigenvalues=eigenvalues, kept=stack.n)


def _check(stack: BlockStack, model: KltModel) -> None:
    if stack.n != model.n:
        raise DimensionError(f"Stack has {stack.n} blocks, model expects {model.n}")


def forward(stack: BlockStack, model: KltModel) -> BlockStack:
    """
    Project every position vector onto the eigenvectors, y = V^T (x - m).

    Output block j holds channel j. Channels the model does not carry are zero.
    """
    _check(stack, model)
    x = _observations(stack) - model.mean[:, np.newaxis]
    y = np.zeros_like(x)
    y[: model.channels] = model.basis.T @ x
    return stack.with_blocks(y.reshape(stack.blocks.shape))


def inverse(stack: BlockStack, model: KltModel) -> BlockStack:
    """
    Rebuild position vectors, x = V y + m.

    Channels beyond ``model.kept`` are expected to be zero and are not read.
    """
    _check(stack, model)
    y = _observations(stack)
    kept = model.kept
    x = model.basis[:, :kept] @ y[:kept] + model.mean[:, np.newaxis]
    return stack.with_blocks(x.reshape(stack.blocks.shape))


def prune(model: KltModel, target_kept: int) -> KltModel:
    """
    Retain the ``target_kept`` channels of largest eigenvalue.

    Raises:
        ValidationError: If target_kept is outside [1, channels]
    """
    if not 1 <= target_kept <= model.channels:
        raise ValidationError(f"Kept channels must be in [1, {model.channels}], got {target_kept}")
    return KltModel(model.mean, model.basis, model.eigenvalues, target_kept)


def zero_pruned(stack: BlockStack, kept: int) -> BlockStack:
    """Replace every channel after the first ``kept`` with a zero plane."""
    if not 1 <= kept <= stack.n:
        raise ValidationError(f"Kept channels must be in [1, {stack.n}], got {kept}")
    blocks = np.array(stack.blocks, copy=True)
    blocks[kept:] = 0.0
    return stack.with_blocks(blocks)


def compact(model: KltModel) -> KltModel:
    """
    Keep only the retained columns, rounded to 32-bit floats.

    This is exactly the side information a container stores, so encoder and
    decoder work from the same numbers.
    """
    kept = model.kept
    return KltModel(
        mean=model.mean.astype(np.float32).astype(np.float64),
        basis=model.basis[:, :kept].astype(np.float32).astype(np.float64),
        eigenvalues=model.eigenvalues[:kept].astype(np.float32).astype(np.float64),
        kept=kept,
    )


def energy_report(model: KltModel) -> EnergyReport:
    """Cumulative eigen-energy fractions; flagged as zero-trace when nothing varies."""
    energy = np.maximum(model.eigenvalues, 0.0)
    cumulative = np.cumsum(energy)
    total = float(cumulative[-1]) if cumulative.size else 0.0
    if total <= 0.0:
        logger.info("Energy report: zero trace, fractions undefined")
        return EnergyReport(eigenvalues=model.eigenvalues.copy(), cumulative_fraction=None)
    fractions = np.minimum(cumulative / total, 1.0)
    fractions[-1] = 1.0
    return EnergyReport(eigenvalues=model.eigenvalues.copy(), cumulative_fraction=fractions)
