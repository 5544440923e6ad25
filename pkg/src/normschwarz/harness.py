"""Seeded counterexample search and the end-to-end verification of the 2x2 pair.

Per-trial seeds
---------------
Trial ``i`` of a search with master seed ``s`` draws its matrices from
``numpy.random.default_rng(trial_seed(s, i))`` where ``trial_seed`` is the
SplitMix64 output function applied to ``s + (i + 1) * 0x9E3779B97F4A7C15``
(mod 2**64).  The dimension of trial ``i`` is ``dims[i % len(dims)]``.
A record therefore replays in isolation from ``(conjecture_id, n, seed,
condition_cap)`` alone.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import conjectures as cj
from .linalg import (
    ConvergenceError,
    MatrixValueError,
    PositiveDefiniteMatrix,
    UnitaryMatrix,
    _haar,
    random_normal,
    random_pd,
    random_unitary,
)
from .serialize import dumps_line, matrix_to_json

__all__ = [
    "SearchConfig",
    "SearchSummary",
    "Verification",
    "generate_instance",
    "random_commuting_pair",
    "replay",
    "run_search",
    "run_trial",
    "trial_seed",
    "verify_paper",
]

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def splitmix64(x: int) -> int:
    z = x & _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def trial_seed(master_seed: int, trial: int) -> int:
    return splitmix64(master_seed + (trial + 1) * _GOLDEN)


# ---------------------------------------------------------------------------
# Instance generation
# ---------------------------------------------------------------------------

def random_commuting_pair(n: int, condition_cap: float, rng: np.random.Generator):
    """Unitary ``U`` and positive ``D`` with ``UD = DU``.

    ``U = Q diag(z) Q*`` where the eigenvalues come in a random number of
    distinct groups (so eigenspaces can have dimension > 1), and
    ``D = Q diag(D_1, ..., D_k) Q*`` with an independent random PD block on
    each eigenspace.
    """
    k = int(rng.integers(1, n + 1))
    # random composition of n into k positive parts
    cuts = np.sort(rng.choice(np.arange(1, n), size=k - 1, replace=False)) if k > 1 else np.array([], int)
    sizes = np.diff(np.concatenate([[0], cuts, [n]])).astype(int)
    phases = np.exp(2j * np.pi * rng.uniform(size=k))
    q = _haar(n, rng)
    z = np.repeat(phases, sizes)
    d_block = np.zeros((n, n), dtype=np.complex128)
    i = 0
    for size in sizes:
        d_block[i:i + size, i:i + size] = random_pd(int(size), condition_cap, rng).a
        i += size
    u = UnitaryMatrix((q * z) @ q.conj().T)
    d = PositiveDefiniteMatrix(q @ d_block @ q.conj().T)
    return u, d


def generate_instance(conjecture_id: str, n: int, condition_cap: float, rng: np.random.Generator,
                      embed: bool = False) -> dict[str, np.ndarray]:
    """Random inputs for one checker, keyed by the checker's argument names."""
    if conjecture_id in ("C1", "C1_HALFPOWER"):
        return {"A": random_pd(n, condition_cap, rng).a, "B": random_normal(n, rng).a}
    if conjecture_id == "C2":
        s = random_pd(n, condition_cap, rng)
        u, d = random_commuting_pair(n, condition_cap, rng)
        return {"S": s.a, "U": u.a, "D": d.a}
    if conjecture_id in ("C3", "TRACE_I"):
        if embed:
            if n % 3:
                raise ValueError("embedded instances need a dimension divisible by 3")
            a, b, c = (random_pd(n // 3, condition_cap, rng) for _ in range(3))
            s, u = cj.embed_cyclic(a, b, c)
            return {"S": s.a, "U": u.a}
        return {"S": random_pd(n, condition_cap, rng).a, "U": random_unitary(n, rng).a}
    if conjecture_id in ("DAGGER", "DDAGGER", "TRACE_II"):
        return {k: random_pd(n, condition_cap, rng).a for k in ("A", "B", "C")}
    if conjecture_id == "TWO_TERM":
        return {k: random_pd(n, condition_cap, rng).a for k in ("A", "B")}
    raise ValueError(f"unknown conjecture id {conjecture_id!r}")


# ---------------------------------------------------------------------------
# Search
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SearchConfig:
    conjecture_id: str
    dims: tuple[int, ...]
    trials: int
    master_seed: int
    condition_cap: float = 1e6
    violation_tol: float = cj.VIOLATION_TOL
    output: str | None = None
    embed: bool = False

    def __post_init__(self):
        if self.conjecture_id not in cj.CONJECTURE_IDS:
            raise ValueError(f"unknown conjecture id {self.conjecture_id!r}")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not self.dims or any(d < 2 for d in self.dims):
            raise ValueError("dimensions must be >= 2")
        if self.embed and any(d % 3 for d in self.dims):
            raise ValueError("embedded scenarios need dimensions divisible by 3")
        if self.condition_cap < 1:
            raise ValueError("condition_cap must be >= 1")
        if not 0 <= self.master_seed <= _MASK:
            raise ValueError("master_seed must be a 64-bit unsigned integer")


@dataclass
class SearchSummary:
    conjecture_id: str
    trials: int = 0
    violations: int = 0
    errors: int = 0
    worst_margin: float = math.inf
    worst_trial: int | None = None
    records_written: int = 0
    error_messages: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "conjecture_id": self.conjecture_id,
            "trials": self.trials,
            "violations": self.violations,
            "errors": self.errors,
            "violation_rate": self.violations / self.trials if self.trials else 0.0,
            "worst_margin": self.worst_margin,
            "worst_trial": self.worst_trial,
            "records_written": self.records_written,
        }


def run_trial(conjecture_id: str, n: int, seed: int, condition_cap: float, violation_tol: float,
              embed: bool = False):
    """Generate and check one instance.  Returns ``(instance, report)``."""
    rng = np.random.default_rng(seed)
    inst = generate_instance(conjecture_id, n, condition_cap, rng, embed=embed)
    return inst, cj.check(conjecture_id, inst, violation_tol)


def replay(record: dict) -> cj.CheckReport:
    """Recompute the report of a search record from its seed."""
    _, report = run_trial(record["conjecture_id"], record["n"], record["seed"], record["condition_cap"],
                          record["violation_tol"], record.get("embed", False))
    return report


def _trial_job(args):
    cfg, i = args
    n = cfg.dims[i % len(cfg.dims)]
    seed = trial_seed(cfg.master_seed, i)
    try:
        inst, report = run_trial(cfg.conjecture_id, n, seed, cfg.condition_cap, cfg.violation_tol, cfg.embed)
    except (ConvergenceError, MatrixValueError, ValueError) as exc:
        return i, None, None, f"trial {i}: {exc}"
    line = None
    if not report.holds:
        line = dumps_line({
            "trial": i,
            "seed": seed,
            "conjecture_id": cfg.conjecture_id,
            "n": n,
            "condition_cap": cfg.condition_cap,
            "violation_tol": cfg.violation_tol,
            "embed": cfg.embed,
            "instance": {k: matrix_to_json(v) for k, v in inst.items()},
            "report": report.to_dict(),
        })
    return i, report.margin, line, None


def run_search(config: SearchConfig, workers: int = 1, chunksize: int = 64) -> SearchSummary:
    """Run ``config.trials`` independent trials and write violations as JSON lines.

    The output file (if any) is truncated first, then receives one line per
    violating trial in trial order, whether trials run serially or in a
    process pool of ``workers``.
    """
    summary = SearchSummary(config.conjecture_id)
    jobs = ((config, i) for i in range(config.trials))
    sink = None
    if config.output is not None:
        try:
            sink = open(config.output, "w")
        except OSError as exc:
            raise OSError(f"cannot open search output {config.output!r}: {exc}") from exc
    try:
        if workers > 1:
            pool = ProcessPoolExecutor(max_workers=workers)
            results = pool.map(_trial_job, jobs, chunksize=chunksize)
        else:
            pool = None
            results = map(_trial_job, jobs)
        # Executor.map yields in submission order, so writes stay ordered by trial.
        for i, margin, line, err in results:
            summary.trials += 1
            if err is not None:
                summary.errors += 1
                summary.error_messages.append(err)
                continue
            if margin < summary.worst_margin:
                summary.worst_margin, summary.worst_trial = margin, i
            if line is not None:
                summary.violations += 1
                if sink is not None:
                    try:
                        sink.write(line + "\n")
                    except OSError as exc:
                        raise OSError(f"cannot write search output {config.output!r}: {exc}") from exc
                    summary.records_written += 1
        if pool is not None:
            pool.shutdown()
    finally:
        if sink is not None:
            sink.close()
    return summary


def default_workers() -> int:
    return max(1, (os.cpu_count() or 1))


# ---------------------------------------------------------------------------
# End-to-end verification
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Verification:
    name: str
    computed: float
    expected: float
    tol: float
    relation: str = "=="  # "==": |c - e| <= tol; "<": c < e - tol; "<=": c <= e + tol; ">=": c >= e - tol

    @property
    def ok(self) -> bool:
        if self.relation == "==":
            return float(np.max(np.abs(np.asarray(self.computed) - np.asarray(self.expected)))) <= self.tol
        if self.relation == "<":
            return self.computed < self.expected - self.tol
        if self.relation == "<=":
            return self.computed <= self.expected + self.tol
        if self.relation == ">=":
            return self.computed >= self.expected - self.tol
        raise ValueError(self.relation)

    def line(self) -> str:
        status = "PASS" if self.ok else "FAIL"
        c = np.asarray(self.computed)
        if c.ndim == 0:
            shown = f"{float(c.real):.15g}"
            exp = f"{float(np.real(self.expected)):.15g}"
        else:
            shown = f"max|err|={float(np.max(np.abs(c - np.asarray(self.expected)))):.3g}"
            exp = "matrix"
        return f"{status}  {self.name}: computed {shown} {self.relation} expected {exp} (tol {self.tol:g})"


def verify_paper() -> list[Verification]:
    """Recompute the 2x2 counterexample and push it through the whole chain."""
    x, y, facts = cj.paper_counterexample()
    out = [Verification(f.name, f.computed, f.expected, f.tol) for f in facts.values()]
    root = math.sqrt(101 / 650)

    x2 = PositiveDefiniteMatrix(x.a @ x.a)
    yinv2 = PositiveDefiniteMatrix(y.a @ y.a).inv
    eye = np.eye(2)
    dag = cj.check_dagger(x2, yinv2, eye)
    out.append(Verification("dagger margin for (X^2, Y^-2, I)", dag.margin, root - 1.0, 1e-10))
    ddag = cj.check_ddagger(x2, yinv2, eye)
    out.append(Verification("ddagger margin for (X^2, Y^-2, I)", ddag.margin, 0.0, cj.VIOLATION_TOL, ">="))
    tr2 = cj.check_trace_ii(x2, yinv2, eye)
    out.append(Verification("normalized-trace margin for (X^2, Y^-2, I)", tr2.margin, 0.0, cj.VIOLATION_TOL,
                            ">="))

    s, u = cj.embed_cyclic(x2, yinv2, eye)
    u3 = np.linalg.matrix_power(u.a, 3)
    out.append(Verification("U^3 = I for the 6x6 embedding", u3, np.eye(6), 0.0))
    c3 = cj.check_conj3(s, u)
    out.append(Verification("6x6 embedding: E_U margin", c3.margin, (2 + root) / 3 - 1, 1e-8))

    ce = cj.construct_conj1_counterexample(s, u)
    if ce is None:
        out.append(Verification("Conjecture-1 counterexample constructed", 0.0, 1.0, 0.0))
        return out
    c1 = cj.check_conj1(ce.a, ce.b)
    out.append(Verification(f"6x6 Conjecture-1 margin (m = {ce.m})", c1.margin, 0.0, 1e-3, "<"))
    out.append(Verification("||B|| for the constructed B", c1.rhs, 1.0, 1e-10))
    out.append(Verification("normality defect of B", ce.b.normality_defect, 0.0, 1e-9))
    out.append(Verification("power m used", float(ce.m), float(cj.MAX_POWER), 0.0, "<="))
    return out
