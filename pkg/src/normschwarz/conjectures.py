"""Checkers for the norm Schwarz inequality and its equivalent forms.

Every checker returns a :class:`CheckReport`.  For norm inequalities
``lhs`` and ``rhs`` are the two norms; for Loewner-order inequalities
``X >= cI`` the report stores ``lhs = lambda_min(X)`` and ``rhs = c``, so in
both cases ``margin = lhs - rhs`` and the verdict is
``margin >= -violation_tol * |rhs|``.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .expectation import SpectralDecomposition, expect_u, spectral_projections
from .linalg import (
    NORM_FLOOR,
    HermitianMatrix,
    NormalMatrix,
    PositiveDefiniteMatrix,
    UnitaryMatrix,
    as_matrix,
    is_normaloid,
    operator_norm,
    singular_values,
)
from .means import gmean, gmean_2x2

__all__ = [
    "CONJECTURE_IDS",
    "CheckReport",
    "ConstructionError",
    "Conj1Counterexample",
    "IdentityCheckError",
    "ReferenceFact",
    "check",
    "check_conj1",
    "check_conj2",
    "check_conj3",
    "check_dagger",
    "check_ddagger",
    "check_halfpower",
    "check_trace_i",
    "check_trace_ii",
    "check_two_term",
    "construct_conj1_counterexample",
    "embed_cyclic",
    "input_names",
    "instance_digest",
    "paper_counterexample",
    "twisted_mean",
]

VIOLATION_TOL = 1e-8
INVERTIBLE_TOL = 1e-10
COMMUTE_TOL = 1e-9
IDENTITY_TOL = 1e-9
MAX_POWER = 64

CONJECTURE_IDS = (
    "C1", "C1_HALFPOWER", "C2", "C3", "DAGGER", "DDAGGER", "TRACE_I", "TRACE_II", "TWO_TERM",
)


class IdentityCheckError(ArithmeticError):
    """A matrix identity that holds exactly in theory failed numerically."""


class ConstructionError(RuntimeError):
    def __init__(self, message, trajectory):
        super().__init__(message)
        self.trajectory = trajectory


@dataclass(frozen=True)
class CheckReport:
    conjecture_id: str
    lhs: float
    rhs: float
    margin: float
    holds: bool
    condition_numbers: list[float]
    instance_digest: str
    flags: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "conjecture_id": self.conjecture_id,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "margin": self.margin,
            "holds": self.holds,
            "condition_numbers": list(self.condition_numbers),
            "instance_digest": self.instance_digest,
            "flags": dict(self.flags),
        }


def instance_digest(conjecture_id: str, *mats) -> str:
    """SHA-256 over the id and each matrix's shape and little-endian complex128 bytes."""
    h = hashlib.sha256(conjecture_id.encode())
    for m in mats:
        a = np.ascontiguousarray(np.asarray(m), dtype="<c16")
        h.update(repr(a.shape).encode())
        h.update(a.tobytes())
    return h.hexdigest()


def _report(cid, lhs, rhs, conds, mats, tol, flags=None) -> CheckReport:
    lhs, rhs = float(lhs), float(rhs)
    margin = lhs - rhs
    holds = margin >= -tol * max(abs(rhs), NORM_FLOOR)
    return CheckReport(
        conjecture_id=cid,
        lhs=lhs,
        rhs=rhs,
        margin=margin,
        holds=bool(holds),
        condition_numbers=[float(c) for c in conds],
        instance_digest=instance_digest(cid, *mats),
        flags=flags or {},
    )


def _pd(*ms):
    out = tuple(PositiveDefiniteMatrix.coerce(m) for m in ms)
    if len({m.n for m in out}) > 1:
        raise ValueError("dimension mismatch")
    return out


def _lambda_min(x) -> float:
    return float(HermitianMatrix(x).eigenvalues[0])


def _commutator_defect(x: np.ndarray, y: np.ndarray) -> float:
    return float(np.linalg.norm(x @ y - y @ x))


def twisted_mean(s, u) -> PositiveDefiniteMatrix:
    """``S # (U* S^-1 U)``, the matrix every Conjecture 2/3 check is built on."""
    s = PositiveDefiniteMatrix.coerce(s)
    ua = UnitaryMatrix.coerce(u).a
    return gmean(s, PositiveDefiniteMatrix(ua.conj().T @ s.inv.a @ ua))


def _check_invertible(b: np.ndarray) -> tuple[float, float]:
    # sigma from B*B is reliable only down to ~1e-8 ||B||; below that use the
    # Hermitian dilation, which resolves sigma_min to eps ||B||.
    w = HermitianMatrix(b.conj().T @ b).eigenvalues
    smax = math.sqrt(max(w[-1], 0.0))
    if w[0] > 1e-12 * w[-1]:
        smin = math.sqrt(w[0])
    else:
        sv = singular_values(b)
        smax, smin = float(sv[0]), float(sv[-1])
    if smin <= INVERTIBLE_TOL * max(smax, NORM_FLOOR):
        raise ValueError(f"B is singular: sigma_min / sigma_max = {smin / max(smax, NORM_FLOOR):.3e}")
    return smax, smin


def _normality(b: np.ndarray) -> float:
    scale = max(float(np.linalg.norm(b)), NORM_FLOOR)
    return float(np.linalg.norm(b.conj().T @ b - b @ b.conj().T)) / scale**2


# ---------------------------------------------------------------------------
# Norm inequalities
# ---------------------------------------------------------------------------

def check_conj1(a, b, violation_tol: float = VIOLATION_TOL) -> CheckReport:
    """``||A # (B* A^-1 B)|| >= ||B||``.

    Any invertible ``B`` is accepted; ``flags['is_normal']`` records whether
    it is numerically normal (the conjecture only claims the normal case).
    """
    (a,) = _pd(a)
    b = as_matrix(b)
    if b.shape[0] != a.n:
        raise ValueError("dimension mismatch")
    smax, smin = _check_invertible(b)
    c = PositiveDefiniteMatrix(b.conj().T @ a.inv.a @ b)
    lhs = gmean(a, c).norm
    defect = _normality(b)
    flags = {"is_normal": defect <= 1e-10, "normality_defect": defect}
    return _report("C1", lhs, smax, [a.condition_number, smax / smin], [a.a, b], violation_tol, flags)


def check_halfpower(a, b, violation_tol: float = VIOLATION_TOL) -> CheckReport:
    """``||A^1/2 (B* A^-1 B)^1/2|| >= ||B||``, known to hold for normaloid ``B``.

    The verdict is computed for any invertible ``B``; ``flags['is_normaloid']``
    says whether the inequality is actually claimed for this input.
    """
    (a,) = _pd(a)
    b = as_matrix(b)
    if b.shape[0] != a.n:
        raise ValueError("dimension mismatch")
    smax, smin = _check_invertible(b)
    c = PositiveDefiniteMatrix(b.conj().T @ a.inv.a @ b)
    lhs = operator_norm(a.sqrt.a @ c.sqrt.a)
    flags = {"is_normaloid": is_normaloid(b)}
    return _report("C1_HALFPOWER", lhs, smax, [a.condition_number, smax / smin], [a.a, b],
                   violation_tol, flags)


def check_conj2(s, u, d, violation_tol: float = VIOLATION_TOL) -> CheckReport:
    """``||D^1/2 (S # U* S^-1 U) D^1/2|| >= ||D||`` for ``D`` commuting with ``U``."""
    s, d = _pd(s, d)
    u = UnitaryMatrix.coerce(u)
    defect = _commutator_defect(u.a, d.a)
    if defect > COMMUTE_TOL * float(np.linalg.norm(d.a)):
        raise ValueError(f"U and D do not commute: ||UD - DU|| = {defect:.3e}")
    m = twisted_mean(s, u)
    rd = d.sqrt.a
    lhs = HermitianMatrix(rd @ m.a @ rd).norm
    return _report("C2", lhs, d.norm, [s.condition_number, d.condition_number], [s.a, u.a, d.a],
                   violation_tol)


# ---------------------------------------------------------------------------
# Loewner-order and trace inequalities
# ---------------------------------------------------------------------------

def check_conj3(s, u, violation_tol: float = VIOLATION_TOL, decomposition: SpectralDecomposition | None = None
                ) -> CheckReport:
    """``E_U(S # U* S^-1 U) >= I``."""
    (s,) = _pd(s)
    u = UnitaryMatrix.coerce(u)
    dec = decomposition or spectral_projections(u)
    m = twisted_mean(s, u)
    e = expect_u(dec, m.a)
    flags = {"min_cluster_gap": dec.min_gap, "clusters": len(dec.clusters), "det_mean": m.det}
    return _report("C3", _lambda_min(e), 1.0, [s.condition_number], [s.a, u.a], violation_tol, flags)


def _dagger_sum(a, b, c) -> np.ndarray:
    return gmean(a, b.inv).a + gmean(b, c.inv).a + gmean(c, a.inv).a


def check_dagger(a, b, c, violation_tol: float = VIOLATION_TOL) -> CheckReport:
    """``A # B^-1 + B # C^-1 + C # A^-1 >= 3I`` (fails in general)."""
    a, b, c = _pd(a, b, c)
    lhs = _lambda_min(_dagger_sum(a, b, c))
    conds = [a.condition_number, b.condition_number, c.condition_number]
    return _report("DAGGER", lhs, 3.0, conds, [a.a, b.a, c.a], violation_tol)


def check_ddagger(a, b, c, violation_tol: float = VIOLATION_TOL) -> CheckReport:
    """``((A+B+C)/3) # ((A^-1+B^-1+C^-1)/3) >= I``."""
    a, b, c = _pd(a, b, c)
    arith = (a.a + b.a + c.a) / 3.0
    harm = (a.inv.a + b.inv.a + c.inv.a) / 3.0
    lhs = gmean(arith, harm).eigenvalues[0]
    conds = [a.condition_number, b.condition_number, c.condition_number]
    return _report("DDAGGER", lhs, 1.0, conds, [a.a, b.a, c.a], violation_tol)


def check_trace_i(s, u, violation_tol: float = VIOLATION_TOL) -> CheckReport:
    """``Tr(E_U(S # U* S^-1 U)) / n >= 1``."""
    (s,) = _pd(s)
    u = UnitaryMatrix.coerce(u)
    e = expect_u(u, twisted_mean(s, u).a)
    lhs = np.trace(e).real / s.n
    return _report("TRACE_I", lhs, 1.0, [s.condition_number], [s.a, u.a], violation_tol)


def check_trace_ii(a, b, c, violation_tol: float = VIOLATION_TOL) -> CheckReport:
    """``Tr(A # B^-1 + B # C^-1 + C # A^-1) / n >= 3``."""
    a, b, c = _pd(a, b, c)
    lhs = np.trace(_dagger_sum(a, b, c)).real / a.n
    conds = [a.condition_number, b.condition_number, c.condition_number]
    return _report("TRACE_II", lhs, 3.0, conds, [a.a, b.a, c.a], violation_tol)


def check_two_term(a, b, violation_tol: float = VIOLATION_TOL) -> CheckReport:
    """``A # B^-1 + B # A^-1 >= 2I``.

    Also records how far ``B # A^-1`` is from ``(A # B^-1)^-1`` in
    ``flags['inverse_residual']`` (relative Frobenius error).
    """
    a, b = _pd(a, b)
    p = gmean(a, b.inv)
    q = gmean(b, a.inv)
    pinv = p.inv.a
    resid = float(np.linalg.norm(q.a - pinv) / np.linalg.norm(pinv))
    flags = {"inverse_residual": resid, "inverse_identity_ok": resid <= IDENTITY_TOL}
    lhs = _lambda_min(p.a + q.a)
    return _report("TWO_TERM", lhs, 2.0, [a.condition_number, b.condition_number], [a.a, b.a],
                   violation_tol, flags)


_CHECKERS = {
    "C1": (check_conj1, ("A", "B")),
    "C1_HALFPOWER": (check_halfpower, ("A", "B")),
    "C2": (check_conj2, ("S", "U", "D")),
    "C3": (check_conj3, ("S", "U")),
    "DAGGER": (check_dagger, ("A", "B", "C")),
    "DDAGGER": (check_ddagger, ("A", "B", "C")),
    "TRACE_I": (check_trace_i, ("S", "U")),
    "TRACE_II": (check_trace_ii, ("A", "B", "C")),
    "TWO_TERM": (check_two_term, ("A", "B")),
}


def input_names(conjecture_id: str) -> tuple[str, ...]:
    return _CHECKERS[conjecture_id][1]


def check(conjecture_id: str, instance: dict, violation_tol: float = VIOLATION_TOL) -> CheckReport:
    """Dispatch to a checker by id with a ``{name: matrix}`` instance."""
    try:
        fn, names = _CHECKERS[conjecture_id]
    except KeyError:
        raise ValueError(f"unknown conjecture id {conjecture_id!r}; expected one of {CONJECTURE_IDS}") from None
    missing = [k for k in names if k not in instance]
    if missing:
        raise ValueError(f"{conjecture_id} needs matrices {names}; missing {missing}")
    return fn(*(instance[k] for k in names), violation_tol=violation_tol)


# ---------------------------------------------------------------------------
# Constructions
# ---------------------------------------------------------------------------

def _block_diag(*blocks) -> np.ndarray:
    n = sum(b.shape[0] for b in blocks)
    out = np.zeros((n, n), dtype=np.complex128)
    i = 0
    for b in blocks:
        k = b.shape[0]
        out[i:i + k, i:i + k] = b
        i += k
    return out


def embed_cyclic(a, b, c) -> tuple[PositiveDefiniteMatrix, UnitaryMatrix]:
    """Embed a triple in ``M_3n``: ``S = diag(A, B, C)`` and ``U`` the block 3-cycle.

    ``U = [[0, 0, I], [I, 0, 0], [0, I, 0]]`` so ``U^3 = I`` exactly and
    ``S # (U* S^-1 U) = diag(A # B^-1, B # C^-1, C # A^-1)``; the latter is
    verified here and :class:`IdentityCheckError` is raised if it fails.
    """
    a, b, c = _pd(a, b, c)
    n = a.n
    s = PositiveDefiniteMatrix(_block_diag(a.a, b.a, c.a))
    eye, zero = np.eye(n), np.zeros((n, n))
    u = UnitaryMatrix(np.block([[zero, zero, eye], [eye, zero, zero], [zero, eye, zero]]))
    expected = _block_diag(gmean(a, b.inv).a, gmean(b, c.inv).a, gmean(c, a.inv).a)
    got = twisted_mean(s, u).a
    err = float(np.linalg.norm(got - expected))
    if err > IDENTITY_TOL * float(np.linalg.norm(expected)):
        raise IdentityCheckError(f"block identity failed: error {err:.3e}")
    return s, u


@dataclass(frozen=True)
class Conj1Counterexample:
    a: PositiveDefiniteMatrix
    b: NormalMatrix
    m: int
    xi: np.ndarray  # unit vector in an eigenspace of U with xi* M xi < 1
    compression: float  # xi* M xi
    trajectory: list[float]  # ||D^(k/2) M D^(k/2)|| for k = 1..m


def construct_conj1_counterexample(s, u, violation_tol: float = VIOLATION_TOL, max_power: int = MAX_POWER
                                   ) -> Conj1Counterexample | None:
    """Turn a violation of ``E_U(S # U* S^-1 U) >= I`` into a normal ``B`` violating Conjecture 1.

    With ``M = S # U* S^-1 U``, take the unit vector ``xi`` inside one
    eigenspace of ``U`` minimizing ``xi* M xi`` (all clusters scanned, ties to
    the lowest cluster index).  Put ``e = xi xi*`` and
    ``D = e + (I - e)/2``, and find the smallest ``m <= max_power`` with
    ``||D^(m/2) M D^(m/2)|| < 1 - violation_tol``.  Then
    ``A = D^(m/2) S D^(m/2)`` and ``B = U D^m`` (normal, since ``e`` commutes
    with ``U``) satisfy ``||A # B* A^-1 B|| < ||B|| = 1``.

    Returns None when ``E_U(M) >= I`` holds to ``violation_tol``; raises
    :class:`ConstructionError` if no power up to ``max_power`` is enough.
    """
    (s,) = _pd(s)
    u = UnitaryMatrix.coerce(u)
    dec = spectral_projections(u)
    m_mat = twisted_mean(s, u).a

    best = None
    for cl in dec.clusters:
        q = cl.basis
        w, v = HermitianMatrix(q.conj().T @ m_mat @ q).eig
        if best is None or w[0] < best[0]:
            best = (float(w[0]), q @ v[:, 0])
    value, xi = best
    if value - 1.0 >= -violation_tol:
        return None

    n = s.n
    e = np.outer(xi, xi.conj())
    rest = np.eye(n) - e
    trajectory = []
    for k in range(1, max_power + 1):
        half = e + 2.0 ** (-k / 2) * rest
        nrm = HermitianMatrix(half @ m_mat @ half).norm
        trajectory.append(nrm)
        if nrm < 1.0 - violation_tol:
            a = PositiveDefiniteMatrix(half @ s.a @ half)
            b = NormalMatrix(u.a @ (e + 2.0 ** (-k) * rest))
            return Conj1Counterexample(a, b, k, xi, value, trajectory)
    raise ConstructionError(f"no power m <= {max_power} gave a strict violation", trajectory)


# ---------------------------------------------------------------------------
# The explicit 2x2 pair
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ReferenceFact:
    name: str
    computed: object
    expected: object
    tol: float

    @property
    def error(self) -> float:
        return float(np.max(np.abs(np.asarray(self.computed) - np.asarray(self.expected))))

    @property
    def ok(self) -> bool:
        return self.error <= self.tol


def _frac_matrix(rows, scale=Fraction(1)) -> np.ndarray:
    return np.array([[float(Fraction(x) * scale) for x in r] for r in rows], dtype=np.complex128)


def _det2(m) -> float:
    return float((m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]).real)


def _inv2(m) -> np.ndarray:
    return np.array([[m[1, 1], -m[0, 1]], [-m[1, 0], m[0, 0]]]) / _det2(m)


def paper_counterexample():
    """The 2x2 pair ``X, Y`` with ``X^2 # Y^2 + X^-1 + Y^-1`` not ``>= 3I``.

    Returns
    -------
    x, y : PositiveDefiniteMatrix
        ``X = [[50, 5], [5, 1]] / 25`` and ``Y = [[50, -5], [-5, 1]] / 25``.
    facts : dict[str, ReferenceFact]
        Quantities recomputed from ``X, Y`` next to their exact values.
    """
    x = PositiveDefiniteMatrix(_frac_matrix([[50, 5], [5, 1]], Fraction(1, 25)))
    y = PositiveDefiniteMatrix(_frac_matrix([[50, -5], [-5, 1]], Fraction(1, 25)))
    x2 = PositiveDefiniteMatrix(x.a @ x.a)
    y2 = PositiveDefiniteMatrix(y.a @ y.a)
    xinv, yinv = _inv2(x.a), _inv2(y.a)
    mean = gmean(x2, y2).a
    closed = gmean_2x2(x2, y2).a
    root = math.sqrt(101 / 650)
    total = HermitianMatrix(mean + xinv + yinv)

    facts = [
        ReferenceFact("det X", _det2(x.a), 1 / 25, 1e-15),
        ReferenceFact("det Y", _det2(y.a), 1 / 25, 1e-15),
        ReferenceFact("X^2", x2.a, _frac_matrix([[2525, 255], [255, 26]], Fraction(1, 625)), 1e-12),
        ReferenceFact("Y^2", y2.a, _frac_matrix([[2525, -255], [-255, 26]], Fraction(1, 625)), 1e-12),
        ReferenceFact("X^2 + Y^2", x2.a + y2.a, _frac_matrix([[5050, 0], [0, 52]], Fraction(1, 625)), 1e-12),
        ReferenceFact("X^-1", xinv, _frac_matrix([[1, -5], [-5, 50]]), 1e-12),
        ReferenceFact("Y^-1", yinv, _frac_matrix([[1, 5], [5, 50]]), 1e-12),
        ReferenceFact("e1* (X^2 # Y^2) e1", mean[0, 0].real, root, 1e-12),
        ReferenceFact("e1* (X^2 # Y^2) e1 [closed form]", closed[0, 0].real, root, 1e-12),
        ReferenceFact("lambda_min(X^2 # Y^2 + X^-1 + Y^-1)", total.eigenvalues[0], 2 + root, 1e-9),
    ]
    return x, y, {f.name: f for f in facts}
