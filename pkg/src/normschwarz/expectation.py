"""Conditional expectation onto the commutant of a unitary.

``E_U(X) = sum_i P_i X P_i`` where ``U = sum_i z_i P_i`` is the spectral
decomposition of ``U`` with distinct ``z_i``.  When ``U^k = I`` the same map
is the group average ``(1/k) sum_j U*^j X U^j``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import CLUSTER_TOL, HERMITIAN_TOL, UnitaryMatrix, as_matrix

__all__ = [
    "Cluster",
    "SpectralDecomposition",
    "expect_u",
    "expect_u_power_avg",
    "spectral_projections",
]


@dataclass(frozen=True)
class Cluster:
    eigenvalue: complex
    basis: np.ndarray  # orthonormal columns spanning range(P)
    diameter: float

    @property
    def multiplicity(self) -> int:
        return self.basis.shape[1]

    @property
    def projection(self) -> np.ndarray:
        return self.basis @ self.basis.conj().T


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenvalue clusters of a unitary with their spectral projections."""

    clusters: tuple[Cluster, ...]
    cluster_tol: float

    @property
    def n(self) -> int:
        return self.clusters[0].basis.shape[0]

    @property
    def eigenvalues(self) -> list[complex]:
        return [c.eigenvalue for c in self.clusters]

    @property
    def projections(self) -> list[np.ndarray]:
        return [c.projection for c in self.clusters]

    @property
    def min_gap(self) -> float:
        """Smallest distance between distinct cluster eigenvalues (inf if one cluster)."""
        z = self.eigenvalues
        gaps = [abs(z[i] - z[j]) for i in range(len(z)) for j in range(i + 1, len(z))]
        return min(gaps, default=float("inf"))

    @property
    def max_diameter(self) -> float:
        return max(c.diameter for c in self.clusters)

    def pinch(self, x: np.ndarray) -> np.ndarray:
        out = np.zeros_like(x, dtype=np.complex128)
        for c in self.clusters:
            q = c.basis
            out += q @ (q.conj().T @ x @ q) @ q.conj().T
        return out


def spectral_projections(u, cluster_tol: float = CLUSTER_TOL) -> SpectralDecomposition:
    """Group the eigenvalues of ``u`` into clusters and build their projections.

    Two eigenvalues share a cluster when they are linked by a chain of
    eigenvalues each within ``cluster_tol`` of the next.  Nothing stops a
    large ``cluster_tol`` from merging genuinely distinct eigenvalues; the
    returned clusters carry their diameters and the decomposition exposes
    ``min_gap`` so such cases can be spotted.
    """
    u = UnitaryMatrix.coerce(u)
    mu, v = u.eig
    n = len(mu)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if abs(mu[i] - mu[j]) <= cluster_tol:
                parent[find(i)] = find(j)

    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    clusters = []
    for idx in sorted(groups.values(), key=lambda g: g[0]):
        z = mu[idx]
        centre = z.mean()
        centre = complex(centre / abs(centre))
        diam = float(max(abs(a - b) for a in z for b in z))
        clusters.append(Cluster(centre, v[:, idx], diam))
    return SpectralDecomposition(tuple(clusters), cluster_tol)


def _decomp(u, cluster_tol) -> SpectralDecomposition:
    if isinstance(u, SpectralDecomposition):
        return u
    return spectral_projections(u, cluster_tol)


def expect_u(u, x, cluster_tol: float = CLUSTER_TOL) -> np.ndarray:
    """``E_U(X) = sum_i P_i X P_i``.

    ``u`` may be a unitary or a precomputed :class:`SpectralDecomposition`.
    Hermitian input gives exactly Hermitian output.
    """
    dec = _decomp(u, cluster_tol)
    x = as_matrix(x)
    if x.shape[0] != dec.n:
        raise ValueError(f"dimension mismatch: {x.shape[0]} vs {dec.n}")
    out = dec.pinch(x)
    if np.linalg.norm(x - x.conj().T) <= HERMITIAN_TOL * max(np.linalg.norm(x), 1e-300):
        out = 0.5 * (out + out.conj().T)
    return out


def expect_u_power_avg(u, x, k: int, tol: float = 1e-8) -> np.ndarray:
    """``(1/k) sum_{j<k} U*^j X U^j``; requires ``||U^k - I|| <= tol``."""
    if k < 1:
        raise ValueError("k must be a positive integer")
    u = UnitaryMatrix.coerce(u).a
    x = as_matrix(x)
    n = u.shape[0]
    defect = np.linalg.norm(np.linalg.matrix_power(u, k) - np.eye(n))
    if defect > tol:
        raise ValueError(f"U^{k} != I (defect {defect:.3e}); power average does not give E_U")
    acc = np.zeros((n, n), dtype=np.complex128)
    p = np.eye(n, dtype=np.complex128)
    for _ in range(k):
        acc += p.conj().T @ x @ p
        p = p @ u
    return acc / k
