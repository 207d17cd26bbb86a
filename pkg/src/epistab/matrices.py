"""Small dense real-matrix kernel.

Eigenvalue/singular-value extremes, Kronecker products, pivoted linear
solves, and discrete Lyapunov solutions, sized for state dimensions up to
about eight.  Backed by LAPACK through numpy/scipy; the Lyapunov equation
is solved by the n^2 x n^2 vectorized system, which is exact at this scale.
"""

import warnings

import numpy as np
import scipy.linalg

from .exceptions import (
    ConvergenceError,
    DimensionError,
    InstabilityError,
    SingularMatrixError,
    ValidationError,
)

__all__ = [
    "as_matrix",
    "spectral_radius",
    "condition_number",
    "operator_two_norm",
    "kronecker",
    "solve_linear",
    "solve_discrete_lyapunov",
    "is_symmetric",
]

# sigma_min below this is reported as infinite conditioning
SIGMA_MIN_UNDERFLOW = 1e-300

# reject Kronecker results bigger than this many entries
KRON_MAX_ENTRIES = 10**6

SYMMETRY_TOL = 1e-12


def as_matrix(m, name="matrix"):
    """Coerce to a 2-D float array, rejecting NaN/Inf entries."""
    a = np.asarray(m, dtype=float)
    if a.ndim == 1:
        a = a.reshape(1, -1)
    if a.ndim != 2:
        raise DimensionError(f"{name} must be 2-D, got ndim={a.ndim}")
    if not np.all(np.isfinite(a)):
        raise ValidationError(f"{name} has non-finite entries")
    return a


def _square(m, name):
    a = as_matrix(m, name)
    if a.shape[0] != a.shape[1]:
        raise DimensionError(f"{name} must be square, got {a.shape}")
    return a


def is_symmetric(m, tol=SYMMETRY_TOL):
    a = as_matrix(m)
    if a.shape[0] != a.shape[1]:
        return False
    scale = max(1.0, float(np.abs(a).max()))
    return bool(np.abs(a - a.T).max() <= tol * scale)


def spectral_radius(m):
    """Largest eigenvalue magnitude of a square matrix.

    For triangular input this equals the largest absolute diagonal entry.

    Raises
    ------
    DimensionError
        If the input is not square.
    ConvergenceError
        If the underlying QR eigenvalue iteration does not converge.
    """
    a = _square(m, "m")
    if a.shape[0] == 0:
        return 0.0
    try:
        eig = np.linalg.eigvals(a)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise ConvergenceError(f"eigenvalue iteration did not converge: {exc}")
    return float(np.max(np.abs(eig)))


def condition_number(m):
    """Two-norm condition number sigma_max / sigma_min.

    Returns ``inf`` when sigma_min underflows the absolute threshold
    ``SIGMA_MIN_UNDERFLOW`` and ``nan`` for the zero matrix, whose
    conditioning is undefined (never silently 1).
    """
    a = _square(m, "m")
    sv = np.linalg.svd(a, compute_uv=False)
    smax = float(sv[0])
    smin = float(sv[-1])
    if smax == 0.0:
        return float("nan")
    if smin < SIGMA_MIN_UNDERFLOW:
        return float("inf")
    return smax / smin


def operator_two_norm(m):
    """Largest singular value (spectral norm)."""
    a = as_matrix(m, "m")
    if a.size == 0:
        return 0.0
    return float(np.linalg.svd(a, compute_uv=False)[0])


def kronecker(a, b):
    """Kronecker product with a guard against runaway sizes."""
    a = as_matrix(a, "a")
    b = as_matrix(b, "b")
    entries = a.shape[0] * b.shape[0] * a.shape[1] * b.shape[1]
    if entries > KRON_MAX_ENTRIES:
        raise ValidationError(
            f"kronecker result would have {entries} entries "
            f"(limit {KRON_MAX_ENTRIES})"
        )
    return np.kron(a, b)


def solve_linear(a, b):
    """Solve ``a @ x = b`` by LU with partial pivoting.

    Raises
    ------
    SingularMatrixError
        If the smallest pivot is zero to working precision; the exception
        carries the offending pivot magnitude.
    """
    a = _square(a, "a")
    bm = np.asarray(b, dtype=float)
    b2 = bm.reshape(-1, 1) if bm.ndim == 1 else bm
    if b2.shape[0] != a.shape[0]:
        raise DimensionError(
            f"b has {b2.shape[0]} rows, expected {a.shape[0]}"
        )
    if not np.all(np.isfinite(b2)):
        raise ValidationError("b has non-finite entries")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")  # scipy warns on exact singularity
        lu, piv = scipy.linalg.lu_factor(a, check_finite=False)
    pivots = np.abs(np.diag(lu))
    tiny = np.finfo(float).eps * max(1.0, float(np.abs(a).max())) * a.shape[0]
    if a.shape[0] and pivots.min() <= tiny:
        raise SingularMatrixError(
            f"matrix is singular to working precision "
            f"(pivot {pivots.min():.3e})",
            pivot=float(pivots.min()),
        )
    x = scipy.linalg.lu_solve((lu, piv), b2, check_finite=False)
    return x.reshape(bm.shape)


def solve_discrete_lyapunov(phi, sigma):
    """Solve ``P = phi @ P @ phi.T + sigma`` for a Schur-stable ``phi``.

    Uses the vectorized form ``vec(P) = (I - phi (x) phi)^-1 vec(sigma)``,
    exact for the small dimensions used here.  The result is symmetrized.

    Raises
    ------
    InstabilityError
        If ``spectral_radius(phi) >= 1`` (carries the radius).
    ValidationError
        If ``sigma`` is not symmetric within tolerance.
    """
    phi = _square(phi, "phi")
    sigma = _square(sigma, "sigma")
    if phi.shape != sigma.shape:
        raise DimensionError(
            f"phi {phi.shape} and sigma {sigma.shape} must match"
        )
    rho = spectral_radius(phi)
    if rho >= 1.0:
        raise InstabilityError(
            f"discrete Lyapunov equation requires rho(phi) < 1, got {rho:.6g}",
            rho=rho,
        )
    if not is_symmetric(sigma):
        raise ValidationError("sigma must be symmetric within 1e-12")
    n = phi.shape[0]
    lhs = np.eye(n * n) - kronecker(phi, phi)
    vec_p = solve_linear(lhs, sigma.reshape(n * n))
    p = vec_p.reshape(n, n)
    return 0.5 * (p + p.T)
