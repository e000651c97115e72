"""Solve-count benchmarks for the h-greedy maxvol family."""

from __future__ import annotations

import csv
import io
import math
import statistics
import time
from dataclasses import dataclass
from typing import Literal, Sequence, Union

import numpy as np

from .maxvol import MaxvolConfig, initial_submatrix, maxvol_general, maxvol_rows

HValue = Union[int, Literal["r"]]
CSV_HEADER = ["rank", "h", "mean_solves", "std_solves", "mean_time_sec"]


@dataclass(frozen=True)
class BenchSpec:
    """`mode="tall"` draws ``rows x rank`` matrices and runs row maxvol;
    ``"square"`` draws ``rows x cols`` (cols defaults to rows) and runs the
    alternating variant."""

    rows: int = 1000
    ranks: tuple[int, ...] = (30, 60)
    h_values: tuple[HValue, ...] = (1, 2, 3, 4, "r")
    trials: int = 20
    seed: int = 0
    mode: Literal["tall", "square"] = "tall"
    cols: int | None = None
    epsilon: float = 1e-2
    rel_vol_tol: float = 1e-8
    max_sweeps: int = 1000

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if self.mode not in ("tall", "square"):
            raise ValueError("mode must be 'tall' or 'square'")
        limit = self.rows if self.mode == "tall" else min(self.rows, self.n_cols(0))
        for r in self.ranks:
            if not 1 <= r <= limit:
                raise ValueError(f"rank {r} out of range")
        for h in self.h_values:
            if h != "r" and (not isinstance(h, int) or h < 1):
                raise ValueError(f"invalid h value {h!r}")

    def n_cols(self, rank: int) -> int:
        if self.mode == "tall":
            return rank
        return self.cols if self.cols is not None else self.rows


@dataclass(frozen=True)
class BenchRow:
    rank: int
    h: HValue
    mean_solves: float
    std_solves: float
    mean_time_sec: float


@dataclass(frozen=True)
class TrialResult:
    rank: int
    h: HValue
    trial: int
    solves: int
    seconds: float
    converged: bool


def resolve_h(h: HValue, rank: int) -> int:
    return rank if h == "r" else int(h)


def _instance(spec: BenchSpec, rank: int, trial: int):
    # seeded by (seed, rank, trial) only, so every h sees the same matrix and start
    rng = np.random.default_rng([spec.seed, rank, trial])
    m = rng.uniform(-1.0, 1.0, size=(spec.rows, spec.n_cols(rank)))
    start_seed = int(rng.integers(2**63 - 1))
    start = initial_submatrix(m, rank, "random", start_seed, rows_only=spec.mode == "tall")
    return m, start


def run_trials(spec: BenchSpec) -> list[TrialResult]:
    results = []
    for rank in spec.ranks:
        for trial in range(spec.trials):
            m, start = _instance(spec, rank, trial)
            for h in spec.h_values:
                cfg = MaxvolConfig(
                    epsilon=spec.epsilon,
                    h=resolve_h(h, rank),
                    max_sweeps=spec.max_sweeps,
                    mode="rows" if spec.mode == "tall" else "alternating",
                    rel_vol_tol=spec.rel_vol_tol,
                )
                t0 = time.perf_counter()
                if spec.mode == "tall":
                    rep = maxvol_rows(m, start, cfg)
                else:
                    rep = maxvol_general(m, start, cfg)
                dt = time.perf_counter() - t0
                results.append(TrialResult(rank, h, trial, rep.solve_count, dt, rep.converged))
    return results


def aggregate(results: Sequence[TrialResult]) -> list[BenchRow]:
    groups: dict[tuple[int, HValue], list[TrialResult]] = {}
    for res in results:
        groups.setdefault((res.rank, res.h), []).append(res)
    rows = []
    for (rank, h), items in groups.items():
        items = sorted(items, key=lambda t: t.trial)
        solves = [float(t.solves) for t in items]
        std = statistics.stdev(solves) if len(solves) > 1 else 0.0
        rows.append(BenchRow(rank, h, statistics.fmean(solves), std,
                             statistics.fmean(t.seconds for t in items)))
    rows.sort(key=lambda r: (r.rank, resolve_h(r.h, r.rank), r.h == "r"))
    return rows


def run_bench(spec: BenchSpec) -> list[BenchRow]:
    return aggregate(run_trials(spec))


def pooled_std(a: BenchRow, b: BenchRow) -> float:
    return math.sqrt((a.std_solves**2 + b.std_solves**2) / 2.0)


def emit_report(rows: Sequence[BenchRow]) -> bytes:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for r in rows:
        writer.writerow([r.rank, r.h, repr(r.mean_solves), repr(r.std_solves), repr(r.mean_time_sec)])
    return buf.getvalue().encode("ascii")


def parse_report(data: bytes) -> list[BenchRow]:
    reader = csv.reader(io.StringIO(data.decode("ascii")))
    header = next(reader)
    if header != CSV_HEADER:
        raise ValueError(f"unexpected header {header}")
    out = []
    for rank, h, mean, std, t in reader:
        out.append(BenchRow(int(rank), "r" if h == "r" else int(h), float(mean), float(std), float(t)))
    return out
