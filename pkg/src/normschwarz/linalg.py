"""Dense complex matrix primitives.

Everything here works on small (n <= ~12) complex128 numpy arrays.  The
Hermitian eigensolver is a cyclic Jacobi method; every other spectral
routine (square roots, norms, normal eigendecompositions, polar factors)
is built on top of it.

The validated wrappers (:class:`HermitianMatrix`, :class:`PositiveDefiniteMatrix`,
:class:`UnitaryMatrix`, :class:`NormalMatrix`) hold a read-only array in
``.a`` and cache their decompositions, so passing the same wrapper to
several routines never repeats an eigendecomposition.
"""

from __future__ import annotations

import math
from functools import cached_property

import numpy as np

__all__ = [
    "ConvergenceError",
    "HermitianMatrix",
    "MatrixValueError",
    "NormalMatrix",
    "PositiveDefiniteMatrix",
    "UnitaryMatrix",
    "as_matrix",
    "hermitian_eig",
    "inv_pd",
    "is_normaloid",
    "min_eigenvalue",
    "normal_eig",
    "operator_norm",
    "polar_normal",
    "random_hermitian",
    "random_normal",
    "random_pd",
    "random_unitary",
    "singular_values",
    "spectral_radius",
    "sqrt_psd",
]

HERMITIAN_TOL = 1e-12
UNITARY_TOL = 1e-10
NORMAL_TOL = 1e-10
POLAR_TOL = 1e-9
NORM_FLOOR = 1e-300

JACOBI_TOL = 1e-13
JACOBI_MAX_SWEEPS = 100
CLUSTER_TOL = 1e-8

GELFAND_TOL = 1e-9
GELFAND_MAX_STEPS = 40

# Fallback rotations for normal_eig when the real part has a
# near-degenerate (but not degenerate) spectrum.
_RETRY_TOL = 1e-12
_FALLBACK_ANGLES = (0.6180339887498949, 1.3247179572447460, 2.2360679774997896,
                    0.3819660112501051)


class MatrixValueError(ValueError):
    """Input does not satisfy a matrix type invariant."""


class ConvergenceError(ArithmeticError):
    """An iterative routine failed to reach its tolerance."""

    def __init__(self, message, residual):
        super().__init__(f"{message} (residual {residual:.3e})")
        self.residual = residual


def as_matrix(x) -> np.ndarray:
    """Return ``x`` as a square, finite complex128 array (a fresh copy)."""
    if isinstance(x, _Wrapped):
        return x.a.copy()
    a = np.array(x, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise MatrixValueError(f"expected a non-empty square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise MatrixValueError("matrix has non-finite entries")
    return a


def _arr(x) -> np.ndarray:
    # Read-only view for wrappers; validated copy otherwise.
    if isinstance(x, _Wrapped):
        return x.a
    return as_matrix(x)


def _fro(a: np.ndarray) -> float:
    return float(np.linalg.norm(a))


class _Wrapped:
    a: np.ndarray

    @property
    def n(self) -> int:
        return self.a.shape[0]

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self.a
        return self.a.astype(dtype)

    def __repr__(self):
        return f"{type(self).__name__}(n={self.n})"


class HermitianMatrix(_Wrapped):
    """Hermitian matrix, exactly symmetrized on construction.

    Raises :class:`MatrixValueError` when ``||M - M*|| > 1e-12 ||M||``.
    """

    def __init__(self, m, tol: float = HERMITIAN_TOL):
        a = _arr(m)
        scale = max(_fro(a), NORM_FLOOR)
        defect = _fro(a - a.conj().T)
        if defect > tol * scale:
            raise MatrixValueError(f"not Hermitian: defect {defect:.3e} (norm {scale:.3e})")
        a = 0.5 * (a + a.conj().T)
        a.flags.writeable = False
        self.a = a

    @cached_property
    def eig(self) -> tuple[np.ndarray, np.ndarray]:
        return hermitian_eig(self)

    @property
    def eigenvalues(self) -> np.ndarray:
        return self.eig[0]

    @property
    def eigenvectors(self) -> np.ndarray:
        return self.eig[1]

    def apply(self, f) -> np.ndarray:
        """Functional calculus: ``V diag(f(lambda)) V*``."""
        w, v = self.eig
        return (v * f(w)) @ v.conj().T

    @property
    def norm(self) -> float:
        w = self.eigenvalues
        return float(max(abs(w[0]), abs(w[-1])))


class PositiveDefiniteMatrix(HermitianMatrix):
    """Hermitian matrix with strictly positive spectrum."""

    def __init__(self, m, tol: float = HERMITIAN_TOL):
        super().__init__(m, tol)
        lo = self.eigenvalues[0]
        if not lo > 0:
            raise MatrixValueError(f"not positive definite: smallest eigenvalue {lo:.3e}")

    @property
    def condition_number(self) -> float:
        w = self.eigenvalues
        return float(w[-1] / w[0])

    @cached_property
    def sqrt(self) -> "PositiveDefiniteMatrix":
        return _pd_from_eig(np.sqrt(self.eigenvalues), self.eigenvectors)

    @cached_property
    def inv(self) -> "PositiveDefiniteMatrix":
        w, v = self.eig
        out = _pd_from_eig(1.0 / w[::-1], v[:, ::-1])
        return out

    @cached_property
    def inv_sqrt(self) -> "PositiveDefiniteMatrix":
        w, v = self.eig
        return _pd_from_eig(1.0 / np.sqrt(w[::-1]), v[:, ::-1])

    @property
    def det(self) -> float:
        return float(np.prod(self.eigenvalues))

    @classmethod
    def coerce(cls, m) -> "PositiveDefiniteMatrix":
        return m if isinstance(m, cls) else cls(m)


def _pd_from_eig(w: np.ndarray, v: np.ndarray) -> PositiveDefiniteMatrix:
    # Build a PD wrapper whose eigendecomposition is already known, so the
    # cached eig is exact rather than recomputed.
    out = PositiveDefiniteMatrix.__new__(PositiveDefiniteMatrix)
    a = (v * w) @ v.conj().T
    a = 0.5 * (a + a.conj().T)
    a.flags.writeable = False
    out.a = a
    out.__dict__["eig"] = (np.asarray(w, dtype=float), v)
    return out


class UnitaryMatrix(_Wrapped):
    """Unitary matrix, ``||U*U - I|| <= 1e-10``."""

    def __init__(self, m, tol: float = UNITARY_TOL):
        a = _arr(m).copy()
        defect = _fro(a.conj().T @ a - np.eye(a.shape[0]))
        if defect > tol:
            raise MatrixValueError(f"not unitary: ||U*U - I|| = {defect:.3e}")
        a.flags.writeable = False
        self.a = a

    @cached_property
    def eig(self) -> tuple[np.ndarray, np.ndarray]:
        return normal_eig(self)

    @classmethod
    def coerce(cls, m) -> "UnitaryMatrix":
        return m if isinstance(m, cls) else cls(m)


class NormalMatrix(_Wrapped):
    """Normal matrix with cached eigendecomposition and commuting polar factors."""

    def __init__(self, m, tol: float = NORMAL_TOL):
        a = _arr(m).copy()
        scale = max(_fro(a), NORM_FLOOR)
        defect = _fro(a.conj().T @ a - a @ a.conj().T)
        if defect > tol * scale**2:
            raise MatrixValueError(f"not normal: ||B*B - BB*|| = {defect:.3e} (||B||^2 = {scale**2:.3e})")
        a.flags.writeable = False
        self.a = a

    @property
    def normality_defect(self) -> float:
        """``||B*B - BB*|| / ||B||^2`` (Frobenius)."""
        a = self.a
        scale = max(_fro(a), NORM_FLOOR)
        return _fro(a.conj().T @ a - a @ a.conj().T) / scale**2

    @cached_property
    def eig(self) -> tuple[np.ndarray, np.ndarray]:
        return normal_eig(self)

    @cached_property
    def polar(self) -> tuple[UnitaryMatrix, PositiveDefiniteMatrix]:
        return polar_normal(self)

    @classmethod
    def coerce(cls, m) -> "NormalMatrix":
        return m if isinstance(m, cls) else cls(m)


# ---------------------------------------------------------------------------
# Jacobi eigensolver
# ---------------------------------------------------------------------------

def hermitian_eig(h, tol: float = JACOBI_TOL, max_sweeps: int = JACOBI_MAX_SWEEPS):
    """Eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.

    Parameters
    ----------
    h : HermitianMatrix or array_like
        Hermitian input; raw arrays are validated first.
    tol : float
        Stop once the off-diagonal Frobenius norm is below ``tol * ||H||_F``.
    max_sweeps : int
        Sweep cap; exceeding it raises :class:`ConvergenceError`.

    Returns
    -------
    w : ndarray of float, shape (n,)
        Eigenvalues in ascending order.
    v : ndarray of complex, shape (n, n)
        Orthonormal eigenvectors as columns, ``H v[:, j] = w[j] v[:, j]``.
    """
    if not isinstance(h, HermitianMatrix):
        h = HermitianMatrix(h)
    a = np.array(h.a)
    n = a.shape[0]
    v = np.eye(n, dtype=np.complex128)
    total = _fro(a)
    if n == 1 or total == 0.0:
        return _sorted_eig(a.diagonal().real.copy(), v)
    threshold = tol * total
    iu = np.triu_indices(n, 1)

    for _ in range(max_sweeps):
        off = math.sqrt(2.0) * float(np.linalg.norm(a[iu]))
        if off <= threshold:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = complex(a[p, q])
                mag = abs(apq)
                if mag <= 1e-300:
                    continue
                app = a[p, p].real.item()
                aqq = a[q, q].real.item()
                phase = apq / mag
                tau = (aqq - app) / (2.0 * mag)
                t = math.copysign(1.0, tau) / (abs(tau) + math.sqrt(1.0 + tau * tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                # G = diag(1, conj(phase)) @ [[c, s], [-s, c]]
                pc = phase.conjugate()
                g10, g11 = -s * pc, c * pc
                cp, cq = a[:, p].copy(), a[:, q].copy()
                a[:, p] = c * cp + g10 * cq
                a[:, q] = s * cp + g11 * cq
                rp, rq = a[p, :].copy(), a[q, :].copy()
                a[p, :] = c * rp + g10.conjugate() * rq
                a[q, :] = s * rp + g11.conjugate() * rq
                a[p, q] = a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
                vp, vq = v[:, p].copy(), v[:, q].copy()
                v[:, p] = c * vp + g10 * vq
                v[:, q] = s * vp + g11 * vq
    else:
        off = math.sqrt(2.0) * float(np.linalg.norm(a[iu]))
        if off > threshold:
            raise ConvergenceError(f"Jacobi did not converge in {max_sweeps} sweeps", off)
    return _sorted_eig(a.diagonal().real.copy(), v)


def _sorted_eig(w, v):
    order = np.argsort(w, kind="stable")
    return w[order], v[:, order]


def min_eigenvalue(h) -> float:
    """Smallest eigenvalue of a Hermitian matrix."""
    if not isinstance(h, HermitianMatrix):
        h = HermitianMatrix(h)
    return float(h.eigenvalues[0])


def sqrt_psd(a) -> PositiveDefiniteMatrix:
    """Positive square root of a positive definite matrix."""
    return PositiveDefiniteMatrix.coerce(a).sqrt


def inv_pd(a) -> PositiveDefiniteMatrix:
    """Inverse of a positive definite matrix through its eigendecomposition."""
    return PositiveDefiniteMatrix.coerce(a).inv


def operator_norm(m) -> float:
    """Largest singular value, ``sqrt(lambda_max(M* M))``."""
    if isinstance(m, HermitianMatrix):
        return m.norm
    a = _arr(m)
    if not np.any(a):
        return 0.0
    w, _ = hermitian_eig(HermitianMatrix(a.conj().T @ a))
    return math.sqrt(max(w[-1], 0.0))


def singular_values(m) -> np.ndarray:
    """Singular values in descending order.

    Uses the eigenvalues of the Hermitian dilation ``[[0, M], [M*, 0]]``,
    which are ``+-sigma_j``; unlike ``M* M`` this keeps small singular values
    accurate to ``eps ||M||`` absolutely.
    """
    a = _arr(m)
    n = a.shape[0]
    dil = np.zeros((2 * n, 2 * n), dtype=np.complex128)
    dil[:n, n:] = a
    dil[n:, :n] = a.conj().T
    w, _ = hermitian_eig(HermitianMatrix(dil))
    return np.clip(w[::-1][:n], 0.0, None)


def spectral_radius(m, tol: float = GELFAND_TOL, max_steps: int = GELFAND_MAX_STEPS) -> float:
    """Spectral radius from Gelfand's formula with repeated squaring.

    ``r_k = ||M^(2^k)||^(1/2^k)``; each squared power is renormalized and its
    log-norm carried separately so nothing overflows.  Stops when successive
    estimates agree to ``tol`` relative, or after ``max_steps`` squarings.
    """
    a = _arr(m)
    nrm = operator_norm(a)
    if nrm == 0.0:
        return 0.0
    log_norm = math.log(nrm)  # log ||M^(2^k)||
    power = a / nrm
    r = nrm
    for k in range(max_steps):
        sq = power @ power
        s = operator_norm(sq)
        if s == 0.0:
            return 0.0
        log_norm = 2.0 * log_norm + math.log(s)
        power = sq / s
        r_next = math.exp(log_norm / 2.0 ** (k + 1))
        if abs(r_next - r) <= tol * r:
            return r_next
        r = r_next
    return r


def is_normaloid(m, tol: float = 1e-8) -> bool:
    """True iff ``| ||M|| - r(M) | <= tol ||M||``."""
    nrm = operator_norm(m)
    return abs(nrm - spectral_radius(m)) <= tol * nrm


# ---------------------------------------------------------------------------
# Normal matrices
# ---------------------------------------------------------------------------

def _clusters_sorted(w: np.ndarray, tol: float) -> list[slice]:
    # w ascending; split wherever the consecutive gap exceeds tol.
    out, start = [], 0
    for i in range(1, len(w)):
        if w[i] - w[i - 1] > tol:
            out.append(slice(start, i))
            start = i
    out.append(slice(start, len(w)))
    return out


def _two_stage_eig(a: np.ndarray, cluster_tol: float, scale: float):
    h = 0.5 * (a + a.conj().T)
    k = (a - a.conj().T) / 2j
    wh, vh = hermitian_eig(HermitianMatrix(h))
    vecs = np.empty_like(vh)
    for sl in _clusters_sorted(wh, cluster_tol * scale):
        basis = vh[:, sl]
        if basis.shape[1] == 1:
            vecs[:, sl] = basis
            continue
        comp = basis.conj().T @ k @ basis
        _, wk = hermitian_eig(HermitianMatrix(0.5 * (comp + comp.conj().T)))
        vecs[:, sl] = basis @ wk
    mu = np.einsum("ij,ik,kj->j", vecs.conj(), a, vecs)
    residual = _fro(a @ vecs - vecs * mu)
    return mu, vecs, residual


def normal_eig(b, cluster_tol: float = CLUSTER_TOL, tol: float = POLAR_TOL):
    """Eigendecomposition ``B = V diag(mu) V*`` of a normal matrix.

    The Hermitian part ``H = (B + B*)/2`` is diagonalized first; within each
    cluster of its eigenvalues the compression of ``K = (B - B*)/2i`` is then
    diagonalized.  Eigenvalues are the Rayleigh quotients ``v* B v``.

    If ``H`` has nearly (but not exactly) coincident eigenvalues its
    eigenvectors are ill-determined; whenever the residual exceeds
    ``1e-12 ||B||`` the procedure is retried on ``exp(-i theta) B`` for a fixed
    list of angles and the best attempt kept.  A residual
    ``||B V - V diag(mu)||`` above ``tol ||B||`` after every attempt raises
    :class:`ConvergenceError`.

    Returns
    -------
    mu : ndarray of complex, shape (n,)
    v : ndarray of complex, shape (n, n), unitary
    """
    if not isinstance(b, (NormalMatrix, UnitaryMatrix)):
        b = NormalMatrix(b)
    a = b.a
    scale = max(_fro(a), NORM_FLOOR)
    mu, vecs, residual = _two_stage_eig(a, cluster_tol, scale)
    best = residual
    for theta in _FALLBACK_ANGLES:
        if residual <= _RETRY_TOL * scale:
            break
        rot = np.exp(-1j * theta)
        mu_r, vecs_r, _ = _two_stage_eig(rot * a, cluster_tol, scale)
        mu_r = mu_r / rot
        res_r = _fro(a @ vecs_r - vecs_r * mu_r)
        if res_r < best:
            mu, vecs, best = mu_r, vecs_r, res_r
        residual = res_r
    if best > tol * scale:
        raise ConvergenceError("simultaneous diagonalization failed; input not numerically normal", best / scale)
    return mu, vecs


def polar_normal(b) -> tuple[UnitaryMatrix, PositiveDefiniteMatrix]:
    """Commuting polar factors ``B = UD = DU`` of an invertible normal matrix."""
    b = NormalMatrix.coerce(b)
    mu, v = b.eig
    mod = np.abs(mu)
    if mod.min() <= 1e-10 * max(mod.max(), NORM_FLOOR):
        raise MatrixValueError(f"normal matrix is singular: min |eigenvalue| = {mod.min():.3e}")
    u = UnitaryMatrix((v * (mu / mod)) @ v.conj().T)
    order = np.argsort(mod, kind="stable")
    d = _pd_from_eig(mod[order], v[:, order])
    return u, d


# ---------------------------------------------------------------------------
# Random ensembles
# ---------------------------------------------------------------------------

def _haar(n: int, rng: np.random.Generator) -> np.ndarray:
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / math.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = r.diagonal()
    return q * (d / np.abs(d))


def random_unitary(n: int, rng: np.random.Generator) -> UnitaryMatrix:
    """Haar-distributed unitary (QR of a complex Ginibre matrix, phase-fixed)."""
    return UnitaryMatrix(_haar(n, rng))


def random_pd(n: int, condition_cap: float, rng: np.random.Generator) -> PositiveDefiniteMatrix:
    """``Q diag(lambda) Q*`` with Haar ``Q`` and log-uniform ``lambda``.

    Eigenvalues are drawn log-uniformly from
    ``[1/sqrt(condition_cap), sqrt(condition_cap)]``, so the condition number
    never exceeds ``condition_cap``.
    """
    if condition_cap < 1:
        raise ValueError("condition_cap must be >= 1")
    half = 0.5 * math.log(condition_cap)
    lam = np.exp(rng.uniform(-half, half, size=n))
    q = _haar(n, rng)
    return PositiveDefiniteMatrix((q * lam) @ q.conj().T)


def random_hermitian(n: int, rng: np.random.Generator) -> HermitianMatrix:
    g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return HermitianMatrix(0.5 * (g + g.conj().T))


def random_normal(n: int, rng: np.random.Generator) -> NormalMatrix:
    """``Q diag(z) Q*`` with Haar ``Q`` and standard complex Gaussian ``z``."""
    z = (rng.standard_normal(n) + 1j * rng.standard_normal(n)) / math.sqrt(2.0)
    q = _haar(n, rng)
    return NormalMatrix((q * z) @ q.conj().T)
