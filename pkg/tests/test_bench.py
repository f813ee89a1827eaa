import io
import math

import numpy as np
import pytest

from sopt import bench
from sopt.core import ValidationError


def test_row_count_and_values():
    recs = bench.run_bench("uniform", sizes=(50, 100), lams=(20.0, 100.0), repeats=3,
                           seed=1, extra_targets=100)
    assert len(recs) == 2 * 2 * 3
    assert all(r.status == "ok" and r.time_s > 0 for r in recs)
    assert all(math.isfinite(r.value) and r.value >= 0 for r in recs)
    assert all(r.m == r.n + 100 for r in recs)


def test_same_samples_across_lams():
    recs = bench.run_bench("gaussian-mixture", sizes=(40,), repeats=2, seed=3,
                           extra_targets=10)
    by_lam = {}
    for r in recs:
        by_lam.setdefault(r.lam, []).append(r.seed)
    assert set(by_lam) == {2.0, 10.0}
    assert by_lam[2.0] == by_lam[10.0]


def test_csv_roundtrip():
    recs = bench.run_bench("uniform", sizes=(30,), lams=(5.0,), repeats=2, seed=0,
                           extra_targets=5)
    buf = io.StringIO()
    bench.write_csv(recs, buf)
    header = buf.getvalue().splitlines()[0]
    assert header == ",".join(bench.CSV_COLUMNS)
    buf.seek(0)
    assert bench.read_csv(buf) == recs


def test_slope_fit_on_synthetic_records():
    recs = [bench.BenchRecord("uniform", n, n + 1000, 20.0, r, 0, 1e-6 * n ** 1.3, 0.0)
            for n in (100, 200, 400, 800) for r in range(3)]
    assert bench.loglog_slope(recs, 20.0) == pytest.approx(1.3, abs=1e-9)
    with pytest.raises(ValidationError):
        bench.loglog_slope(recs[:3], 20.0)


def test_unknown_generator():
    with pytest.raises(ValidationError):
        bench.run_bench("cauchy", sizes=(10,), repeats=1)


def test_failed_repeat_is_recorded(monkeypatch):
    def boom(*a, **k):
        raise RuntimeError("solver exploded")

    bench._warm_up()
    monkeypatch.setattr(bench, "solve", boom)
    monkeypatch.setattr(bench, "_warm_up", lambda: None)
    recs = bench.run_bench("uniform", sizes=(10,), lams=(1.0,), repeats=2, seed=0)
    assert len(recs) == 2
    assert all(r.status.startswith("error") and np.isnan(r.time_s) for r in recs)
