"""Reproducible Monte Carlo harness and exhaustive small-n oracles.

Trial ``t`` of a run draws everything from streams keyed by ``(seed, t, tag)``,
so a report depends only on the configuration, never on how trials are split
across workers. Workers are processes; ``DEGEN_THREADS`` caps how many.
"""
from __future__ import annotations

import math
import os
import time
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from itertools import product
from typing import Sequence

import numpy as np

from . import _matching
from .asymptotics import expected_isolated_asym, expected_isolated_sym, poisson_pmf, predict_distinct
from .bipartite import BipartiteMask, condition_4_1, format_mask_text, has_perfect_matching
from .models import SparseRegime, eigenvalues_distinct, sample_csr, values_on_csr

__all__ = [
    "BridgeDisagreement",
    "EstimateReport",
    "HistogramReport",
    "SimulationConfig",
    "config_grid",
    "counterexample_mask",
    "derive_row_seed",
    "oracle_equivalence_scan",
    "run",
    "run_condition41_experiment",
    "run_gap_rate_experiment",
    "run_isolated_histogram",
    "run_matching_experiment",
    "run_sweep",
    "threshold_scan",
    "total_variation",
    "trial_rng",
    "wilson_interval",
    "worker_count",
]

MODELS = ("asym", "sym")
TARGETS = ("pm", "cond41", "histogram", "gap_rate")
CSV_COLUMNS = ("model", "N", "c", "q", "trials", "seed", "target", "estimate", "ci_low", "ci_high", "prediction", "abs_gap")

# stream purposes
TAG_MASK = 0
TAG_CHECK = 1
TAG_VALUES = 2
TAG_SWEEP = 3

_SEED_MAX = 2**64 - 1


def trial_rng(seed: int, trial: int, tag: int) -> np.random.Generator:
    ss = np.random.SeedSequence(seed, spawn_key=(trial, tag))
    return np.random.Generator(np.random.Philox(ss))


def _trial_uniform(seed: int, trial: int, tag: int) -> float:
    word = np.random.SeedSequence(seed, spawn_key=(trial, tag)).generate_state(1, dtype=np.uint64)[0]
    return float(word >> np.uint64(11)) * 2.0**-53


def derive_row_seed(seed: int, row: int) -> int:
    """Seed for sweep row ``row``; duplicates of an (N, c) pair still get distinct seeds."""
    ss = np.random.SeedSequence(seed, spawn_key=(row, TAG_SWEEP))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def worker_count() -> int:
    cap = os.environ.get("DEGEN_THREADS")
    n = os.cpu_count() or 1
    if cap:
        try:
            n = int(cap)
        except ValueError:
            raise ValueError(f"DEGEN_THREADS must be an integer, got {cap!r}") from None
    return max(1, n)


def default_value_check_fraction(n: int, model: str) -> float:
    if n <= 20:
        return 1.0
    if n < 500:
        return 0.05
    # a dense eigensolve on a near-giant strong component costs ~1 s at N = 1000
    return 0.01 if model == "sym" else 0.001


@dataclass(frozen=True)
class SimulationConfig:
    model: str = "asym"
    n: int = 100
    c: float = 0.0
    q: float | None = None
    trials: int = 1000
    seed: int = 0
    target: str = "cond41"
    value_check_fraction: float | None = None
    p_override: float | None = None

    def __post_init__(self):
        if self.model not in MODELS:
            raise ValueError(f"model must be one of {MODELS}, got {self.model!r}")
        if self.target not in TARGETS:
            raise ValueError(f"target must be one of {TARGETS}, got {self.target!r}")
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not 0 <= self.seed <= _SEED_MAX:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.model == "asym" and self.q is not None:
            raise ValueError("q only applies to the symmetric model")
        if self.model == "sym" and self.q is None:
            object.__setattr__(self, "q", 0.0)
        if self.value_check_fraction is None:
            object.__setattr__(self, "value_check_fraction", default_value_check_fraction(self.n, self.model))
        if not 0.0 <= self.value_check_fraction <= 1.0:
            raise ValueError("value_check_fraction must lie in [0, 1]")
        # validates q and p_override ranges
        self.regime

    @property
    def symmetric(self) -> bool:
        return self.model == "sym"

    @property
    def regime(self) -> SparseRegime:
        return SparseRegime(self.c, self.q or 0.0, self.p_override)

    @property
    def p(self) -> float:
        return self.regime.p(self.n)

    def intensity(self) -> float:
        """Limit Poisson intensity of isolated points (lambda or mu)."""
        return predict_distinct(self.c, self.model, self.q or 0.0).lambda_or_mu

    def finite_intensity(self) -> float:
        """Exact mean isolated-point count at this N and p."""
        if self.symmetric:
            return float(expected_isolated_sym(self.n, self.p, self.q, 1))
        return float(expected_isolated_asym(self.n, self.p, 1))


class BridgeDisagreement(AssertionError):
    """Graph criterion and numeric eigenvalue check disagree on a sampled trial."""

    def __init__(self, seed: int, trial: int, graph_verdict: bool, mask_text: str, matrix=None):
        super().__init__(
            f"the distinctness condition says {graph_verdict} but the eigenvalue check says {not graph_verdict} "
            f"(seed={seed}, trial={trial})"
        )
        self.seed = seed
        self.trial = trial
        self.graph_verdict = graph_verdict
        self.mask_text = mask_text
        self.matrix = matrix

    def __reduce__(self):
        return type(self), (self.seed, self.trial, self.graph_verdict, self.mask_text, self.matrix)


def wilson_interval(successes: int, trials: int, z: float = 1.96) -> tuple[float, float]:
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if not 0 <= successes <= trials:
        raise ValueError("need 0 <= successes <= trials")
    phat = successes / trials
    z2 = z * z
    denom = 1.0 + z2 / trials
    center = (phat + z2 / (2 * trials)) / denom
    half = z / denom * math.sqrt(phat * (1 - phat) / trials + z2 / (4 * trials * trials))
    low = 0.0 if successes == 0 else max(0.0, min(phat, center - half))
    high = 1.0 if successes == trials else min(1.0, max(phat, center + half))
    return low, high


def total_variation(empirical: dict, lam: float) -> float:
    """TV distance between an empirical pmf and Poisson(lam), tail mass included."""
    top = max(empirical) if empirical else 0
    diff = 0.0
    covered = 0.0
    for x in range(top + 1):
        ref = poisson_pmf(lam, x)
        covered += ref
        diff += abs(empirical.get(x, 0.0) - ref)
    diff += max(0.0, 1.0 - covered)
    return min(1.0, 0.5 * diff)


@dataclass
class EstimateReport:
    model: str
    n: int
    c: float
    q: float | None
    p: float
    p_clamped: bool
    trials: int
    seed: int
    target: str
    successes: int
    estimate: float
    ci_low: float
    ci_high: float
    ci_half_width: float
    prediction: float
    abs_gap: float
    finite_n_prediction: float
    finite_n_bias: float
    value_check_fraction: float
    value_checks: int
    runtime_seconds: float = field(default=0.0, compare=False)

    def to_dict(self, timing: bool = True) -> dict:
        d = asdict(self)
        if not timing:
            d.pop("runtime_seconds")
        return d

    def csv_row(self) -> list:
        d = self.to_dict()
        d["N"] = d.pop("n")
        return [d[k] for k in CSV_COLUMNS]


@dataclass
class HistogramReport:
    model: str
    n: int
    c: float
    q: float | None
    p: float
    p_clamped: bool
    trials: int
    seed: int
    target: str
    intensity: float
    counts: dict
    empirical_pmf: dict
    poisson_pmf: dict
    total_variation: float
    runtime_seconds: float = field(default=0.0, compare=False)

    def to_dict(self, timing: bool = True) -> dict:
        d = asdict(self)
        for key in ("counts", "empirical_pmf", "poisson_pmf"):
            d[key] = {str(k): v for k, v in sorted(d[key].items())}
        if not timing:
            d.pop("runtime_seconds")
        return d


# per-trial work


def _transpose_csr(n: int, indptr, indices):
    rows = np.repeat(np.arange(n, dtype=np.int64), np.diff(indptr))
    order = np.argsort(indices, kind="stable")
    t_indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(indices, minlength=n), out=t_indptr[1:])
    return t_indptr, rows[order]


def _isolated_count(n: int, indptr, indices, symmetric: bool) -> int:
    empty_rows = int(np.count_nonzero(np.diff(indptr) == 0))
    if symmetric:
        return empty_rows
    empty_cols = n - int(np.unique(indices).size)
    return empty_rows + empty_cols


def _run_chunk(cfg: SimulationConfig, start: int, stop: int):
    """Aggregate for trials ``start..stop-1``: (successes, histogram Counter, value checks)."""
    n, p, q = cfg.n, cfg.p, cfg.q or 0.0
    successes = 0
    hist: Counter = Counter()
    checks = 0
    for t in range(start, stop):
        rng = trial_rng(cfg.seed, t, TAG_MASK)
        indptr, indices = sample_csr(n, p, q, cfg.symmetric, rng)
        if cfg.target == "histogram":
            hist[_isolated_count(n, indptr, indices, cfg.symmetric)] += 1
            continue
        if cfg.symmetric:
            t_indptr, t_indices = indptr, indices
        else:
            t_indptr, t_indices = _transpose_csr(n, indptr, indices)
        size, ok = _matching.condition_41_kernel(indptr, indices, t_indptr, t_indices, n)
        if cfg.target == "pm":
            successes += size == n
        elif cfg.target == "gap_rate":
            successes += size < n and _isolated_count(n, indptr, indices, cfg.symmetric) == 0
        else:
            ok = bool(ok)
            successes += ok
            if cfg.value_check_fraction > 0 and _trial_uniform(cfg.seed, t, TAG_CHECK) < cfg.value_check_fraction:
                checks += 1
                values = values_on_csr(n, indptr, indices, cfg.symmetric, "uniform01", trial_rng(cfg.seed, t, TAG_VALUES))
                if eigenvalues_distinct(values) != ok:
                    mask = BipartiteMask.from_csr(n, indptr, indices, cfg.symmetric)
                    raise BridgeDisagreement(cfg.seed, t, ok, format_mask_text(mask), values)
    return successes, hist, checks


def _chunks(trials: int, workers: int) -> list[tuple[int, int]]:
    pieces = min(trials, workers * 4)
    edges = np.linspace(0, trials, pieces + 1).astype(int)
    return [(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:]) if b > a]


def _aggregate(cfg: SimulationConfig, workers: int | None = None):
    workers = worker_count() if workers is None else workers
    chunks = _chunks(cfg.trials, workers)
    if workers == 1 or len(chunks) == 1:
        parts = [_run_chunk(cfg, a, b) for a, b in chunks]
    else:
        with ProcessPoolExecutor(max_workers=min(workers, len(chunks))) as pool:
            futures = [pool.submit(_run_chunk, cfg, a, b) for a, b in chunks]
            parts = [f.result() for f in futures]
    successes = sum(s for s, _, _ in parts)
    hist: Counter = Counter()
    for _, h, _ in parts:
        hist.update(h)
    checks = sum(k for _, _, k in parts)
    return successes, hist, checks


# experiments


def _limit_and_finite(cfg: SimulationConfig) -> tuple[float, float]:
    if cfg.target == "gap_rate":
        return 0.0, 0.0
    lam, lam_n = cfg.intensity(), cfg.finite_intensity()
    if cfg.target == "pm":
        return math.exp(-lam), math.exp(-lam_n)
    return math.exp(-lam) * (1 + lam), math.exp(-lam_n) * (1 + lam_n)


def _estimate(cfg: SimulationConfig, workers: int | None) -> EstimateReport:
    t0 = time.perf_counter()
    successes, _, checks = _aggregate(cfg, workers)
    est = successes / cfg.trials
    low, high = wilson_interval(successes, cfg.trials)
    pred, finite = _limit_and_finite(cfg)
    return EstimateReport(
        model=cfg.model,
        n=cfg.n,
        c=cfg.c,
        q=cfg.q,
        p=cfg.p,
        p_clamped=cfg.regime.clamped(cfg.n),
        trials=cfg.trials,
        seed=cfg.seed,
        target=cfg.target,
        successes=successes,
        estimate=est,
        ci_low=low,
        ci_high=high,
        ci_half_width=(high - low) / 2,
        prediction=pred,
        abs_gap=abs(est - pred),
        finite_n_prediction=finite,
        finite_n_bias=finite - pred,
        value_check_fraction=cfg.value_check_fraction,
        value_checks=checks,
        runtime_seconds=time.perf_counter() - t0,
    )


def _require_target(cfg: SimulationConfig, target: str):
    if cfg.target != target:
        raise ValueError(f"expected target {target!r}, got {cfg.target!r}")


def run_matching_experiment(cfg: SimulationConfig, workers: int | None = None) -> EstimateReport:
    """P(perfect matching); the limit is ``e^-lambda`` (``e^-mu`` for the symmetric model)."""
    _require_target(cfg, "pm")
    return _estimate(cfg, workers)


def run_condition41_experiment(cfg: SimulationConfig, workers: int | None = None) -> EstimateReport:
    """P(mask satisfies the distinctness condition), cross-checked against eigenvalues on a random subsample of trials.

    Raises :class:`BridgeDisagreement` when a checked trial disagrees.
    """
    _require_target(cfg, "cond41")
    return _estimate(cfg, workers)


def run_gap_rate_experiment(cfg: SimulationConfig, workers: int | None = None) -> EstimateReport:
    """P(no perfect matching and no isolated point), which should vanish."""
    _require_target(cfg, "gap_rate")
    return _estimate(cfg, workers)


def run_isolated_histogram(cfg: SimulationConfig, workers: int | None = None) -> HistogramReport:
    """Distribution of the isolated-point count against its Poisson limit.

    Asymmetric: rows and columns both count. Symmetric: an index counts once.
    """
    _require_target(cfg, "histogram")
    t0 = time.perf_counter()
    _, hist, _ = _aggregate(cfg, workers)
    counts = {int(x): int(k) for x, k in sorted(hist.items())}
    emp = {x: k / cfg.trials for x, k in counts.items()}
    lam = cfg.intensity()
    top = max(counts)
    ref = {x: poisson_pmf(lam, x) for x in range(top + 1)}
    return HistogramReport(
        model=cfg.model,
        n=cfg.n,
        c=cfg.c,
        q=cfg.q,
        p=cfg.p,
        p_clamped=cfg.regime.clamped(cfg.n),
        trials=cfg.trials,
        seed=cfg.seed,
        target=cfg.target,
        intensity=lam,
        counts=counts,
        empirical_pmf=emp,
        poisson_pmf=ref,
        total_variation=total_variation(emp, lam),
        runtime_seconds=time.perf_counter() - t0,
    )


_RUNNERS = {
    "pm": run_matching_experiment,
    "cond41": run_condition41_experiment,
    "histogram": run_isolated_histogram,
    "gap_rate": run_gap_rate_experiment,
}


def run(cfg: SimulationConfig, workers: int | None = None):
    return _RUNNERS[cfg.target](cfg, workers)


def run_sweep(
    pairs: Sequence[tuple[int, float]],
    base: SimulationConfig,
    workers: int | None = None,
    value_check_fraction: float | None = None,
) -> list:
    """One report per (N, c) pair; row i runs with seed ``derive_row_seed(base.seed, i)``.

    ``value_check_fraction=None`` picks the per-N default for each row.
    """
    pairs = list(pairs)
    if not pairs:
        raise ValueError("sweep needs at least one (N, c) pair")
    reports = []
    for i, (n, c) in enumerate(pairs):
        cfg = replace(
            base, n=int(n), c=float(c), seed=derive_row_seed(base.seed, i), value_check_fraction=value_check_fraction
        )
        reports.append(run(cfg, workers))
    return reports


# exhaustive oracles


def _mask_from_code(n: int, code: int, symmetric: bool) -> BipartiteMask:
    if not symmetric:
        return BipartiteMask.from_bits(n, code)
    edges = []
    pairs = [(j, l) for j in range(n) for l in range(j, n)]
    for b, (j, l) in enumerate(pairs):
        if code >> b & 1:
            edges.append((j, l))
    return BipartiteMask.from_edges(n, edges, symmetric=True)


def oracle_equivalence_scan(max_n: int, samples_per_mask: int = 25, model: str = "asym", seed: int = 0) -> dict:
    """Check the distinctness condition against unanimous numeric verdicts on every mask up to ``max_n``.

    Each mask is filled ``samples_per_mask`` times with uniform (0, 1] values.
    A mask agrees when every fill gives the graph verdict.
    """
    if model not in MODELS:
        raise ValueError(f"model must be one of {MODELS}")
    symmetric = model == "sym"
    limit = 4 if symmetric else 3
    if not 1 <= max_n <= limit:
        raise ValueError(f"max_n must lie in 1..{limit} for the {model} model")
    if samples_per_mask < 1:
        raise ValueError("samples_per_mask must be >= 1")
    per_n = []
    disagreements = []
    for n in range(1, max_n + 1):
        nbits = n * (n + 1) // 2 if symmetric else n * n
        satisfying = 0
        failing_codes = []
        for code in range(1 << nbits):
            G = _mask_from_code(n, code, symmetric)
            indptr, indices = G.csr
            graph = condition_4_1(G)
            satisfying += graph
            if not graph:
                failing_codes.append(code)
            for s in range(samples_per_mask):
                rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(n, code, s))))
                values = values_on_csr(n, indptr, indices, symmetric, "uniform01", rng)
                if eigenvalues_distinct(values) != graph:
                    disagreements.append(
                        {"n": n, "code": code, "sample": s, "graph": graph, "mask": format_mask_text(G)}
                    )
                    break
        per_n.append(
            {
                "n": n,
                "masks": 1 << nbits,
                "satisfying": satisfying,
                "failing": (1 << nbits) - satisfying,
                "failing_codes": failing_codes if n <= 3 else None,
            }
        )
    return {
        "model": model,
        "max_n": max_n,
        "samples_per_mask": samples_per_mask,
        "seed": seed,
        "per_n": per_n,
        "disagreements": disagreements,
        "ok": not disagreements,
    }


def counterexample_mask(n: int) -> BipartiteMask:
    """``n^2 - 2n + 1`` edges and no distinct-eigenvalue realization: rows 2.. full plus the edge (1, 0)."""
    if n < 3:
        raise ValueError("the counterexample needs n >= 3")
    edges = [(j, l) for j in range(2, n) for l in range(n)] + [(1, 0)]
    return BipartiteMask.from_edges(n, edges)


def threshold_scan(n: int) -> dict:
    """Exhaustive edge-count thresholds over all ``2^(n^2)`` asymmetric masks.

    (i) ``#edges >= n^2 - 2n + 2`` forces the distinctness condition; (ii) ``>= n^2 - n + 1``
    forces a perfect matching; (iii) violations one edge below (i) are counted.
    """
    if not 1 <= n <= 4:
        raise ValueError("threshold_scan needs 1 <= n <= 4")
    cond_thr = n * n - 2 * n + 2
    pm_thr = n * n - n + 1
    cond_viol, pm_viol, below = [], [], []
    checked = 0
    for code in range(1 << (n * n)):
        edges = bin(code).count("1")
        if edges < cond_thr - 1:
            continue
        checked += 1
        G = BipartiteMask.from_bits(n, code)
        ok = condition_4_1(G)
        if edges >= cond_thr and not ok:
            cond_viol.append(code)
        if edges == cond_thr - 1 and not ok:
            below.append(code)
        if edges >= pm_thr and not has_perfect_matching(G):
            pm_viol.append(code)
    example = counterexample_mask(n).bits if n >= 3 else None
    return {
        "n": n,
        "masks_checked": checked,
        "cond41_threshold": cond_thr,
        "cond41_violations": cond_viol,
        "pm_threshold": pm_thr,
        "pm_violations": pm_viol,
        "below_threshold_edges": cond_thr - 1,
        "below_threshold_violations": len(below),
        "counterexample_code": example,
        "counterexample_found": example in below if example is not None else None,
        "ok": not cond_viol and not pm_viol and (n < 3 or len(below) >= 1),
    }


def config_grid(ns: Sequence[int], cs: Sequence[float]) -> list[tuple[int, float]]:
    return [(int(n), float(c)) for n, c in product(ns, cs)]
