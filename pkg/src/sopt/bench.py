"""Wall-clock benchmark of the 1-D solver on the uniform and Gaussian-mixture
instance families.

Each record times ``sort + solve`` on freshly drawn unsorted samples with a
monotonic clock. Timings are summarised by the median over repeats.
"""

from __future__ import annotations

import csv
import math
import time
from dataclasses import asdict, dataclass, fields

import numpy as np

from .core import ValidationError, gen_gaussian_mixture, gen_uniform
from .solver import SolverConfig, solve

GENERATORS = ("uniform", "gaussian-mixture")
# lam values used for each family by default
DEFAULT_LAMS = {"uniform": (20.0, 100.0), "gaussian-mixture": (2.0, 10.0)}
CSV_COLUMNS = ("generator", "n", "m", "lam", "repeat", "seed", "time_s", "value",
               "status")


@dataclass
class BenchRecord:
    generator: str
    n: int
    m: int
    lam: float
    repeat: int
    seed: int
    time_s: float
    value: float
    status: str = "ok"


def instance_seed(seed: int, n: int, repeat: int) -> int:
    """Deterministic per-instance seed; independent of lam so both penalty
    levels see the same samples."""
    return int(np.random.SeedSequence([seed, n, repeat]).generate_state(1)[0])


def draw(generator: str, n: int, m: int, seed: int):
    if generator == "uniform":
        return gen_uniform(n, m, seed=seed, sort=False)
    if generator == "gaussian-mixture":
        return gen_gaussian_mixture(n, m, seed=seed, sort=False)
    raise ValidationError(f"unknown generator {generator!r}; choose from {GENERATORS}")


def _warm_up():
    solve([0.0, 1.0], [0.5, 2.0], SolverConfig(lam=1.0))


def run_bench(generator: str = "uniform", sizes=(500, 1000, 2000), lams=None,
              repeats: int = 10, seed: int = 0, extra_targets: int = 1000,
              progress=None) -> list[BenchRecord]:
    """Time the solver for every ``(n, lam, repeat)`` with ``m = n + extra_targets``."""
    if generator not in GENERATORS:
        raise ValidationError(f"unknown generator {generator!r}; choose from {GENERATORS}")
    lams = tuple(DEFAULT_LAMS[generator] if lams is None else lams)
    _warm_up()
    records = []
    for n in sizes:
        m = n + extra_targets
        for lam in lams:
            cfg = SolverConfig(lam=float(lam))
            for r in range(repeats):
                s = instance_seed(seed, n, r)
                x, y = draw(generator, n, m, s)
                try:
                    t0 = time.perf_counter()
                    sol = solve(np.sort(x), np.sort(y), cfg)
                    elapsed = time.perf_counter() - t0
                    rec = BenchRecord(generator, n, m, float(lam), r, s, elapsed,
                                      sol.value)
                except Exception as exc:  # recorded, never fatal
                    rec = BenchRecord(generator, n, m, float(lam), r, s, math.nan,
                                      math.nan, f"error: {exc}")
                records.append(rec)
                if progress is not None:
                    progress(rec)
    return records


def write_csv(records, fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for rec in records:
        row = asdict(rec)
        w.writerow([row[c] for c in CSV_COLUMNS])


def read_csv(fh) -> list[BenchRecord]:
    types = {f.name: f.type for f in fields(BenchRecord)}
    conv = {"int": int, "float": float, "str": str}
    out = []
    for row in csv.DictReader(fh):
        out.append(BenchRecord(**{k: conv[types[k]](v) for k, v in row.items()}))
    return out


def median_times(records, lam: float) -> tuple[np.ndarray, np.ndarray]:
    """Sizes and median wall time per size for one penalty level."""
    by_n: dict[int, list[float]] = {}
    for rec in records:
        if rec.lam == lam and rec.status == "ok":
            by_n.setdefault(rec.n, []).append(rec.time_s)
    ns = np.array(sorted(by_n))
    return ns, np.array([np.median(by_n[n]) for n in ns])


def loglog_slope(records, lam: float) -> float:
    """Least-squares slope of ``log(median time)`` against ``log(n)``."""
    ns, t = median_times(records, lam)
    if ns.size < 2:
        raise ValidationError("need at least two sizes to fit a slope")
    return float(np.polyfit(np.log(ns), np.log(t), 1)[0])
