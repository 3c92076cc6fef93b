import random

import pytest

import lwlock


def test_strategy_codes():
    assert lwlock.parse_strategy("SY*") == "SY*"
    with pytest.raises(lwlock.ConfigError):
        lwlock.parse_strategy("XYZ")
    with pytest.raises(ValueError):
        lwlock.parse_strategy("sys")


def test_lock_names():
    assert lwlock.lock_name("TTAS-MCS", 4) == "TTAS-MCS-4"
    with pytest.raises(lwlock.ConfigError):
        lwlock.lock_name("CLH")


def test_backoff_config_validates():
    cfg = lwlock.BackoffConfig()
    assert (cfg.yield_limit, cfg.suspend_limit, cfg.spin_limit) == (8, 64, 1024)
    with pytest.raises(lwlock.ConfigError):
        lwlock.BackoffConfig(yield_limit=10, suspend_limit=5)


def test_planned_ladder():
    cfg = lwlock.BackoffConfig(yield_limit=4, suspend_limit=6)
    assert lwlock.ladder(cfg, "SYS", 6) == [
        "spin 2", "spin 4", "spin 8", "yield", "yield", "suspend"]
    assert lwlock.ladder(cfg, "SYS", 7, can_suspend=False)[-1] == "yield"


def test_recorded_ladder():
    cfg = lwlock.BackoffConfig(yield_limit=4, suspend_limit=6)
    assert lwlock.record_ladder(cfg, "SYS", 6) == (
        "[spin 2, spin 4, spin 8, yield, yield, suspend-attempt]")


def test_quantiles_match_sorting():
    rng = random.Random(3)
    for _ in range(50):
        samples = [rng.randrange(10_000) for _ in range(rng.randrange(1, 400))]
        ordered = sorted(samples)
        n = len(ordered)
        for q in (0.5, 0.95, 0.99, 1.0):
            k = next(k for k in range(1, n + 1) if k / n >= q)
            assert lwlock.compute_quantiles(samples, [q]) == [ordered[k - 1]]
    with pytest.raises(ValueError):
        lwlock.compute_quantiles([], [0.5])


def test_benchmark_and_csv_round_trip(tmp_path):
    cfg = lwlock.BenchConfig()
    cfg.lock = "MCS"
    cfg.strategy = "SYS"
    cfg.scenario = lwlock.Scenario.CACHE
    cfg.carriers = 2
    cfg.tasks = 4
    cfg.duration_s = 0.1
    cfg.warmup_s = 0.0
    cfg.repetitions = 2
    cfg.backoff.yield_limit = 4
    assert cfg.backoff.yield_limit == 4
    records = lwlock.run_benchmark(cfg)
    assert [r.rep for r in records] == [0, 1]
    assert all(r.status == "ok" and r.acquisitions > 0 for r in records)

    path = tmp_path / "out.csv"
    lwlock.write_csv(str(path), records)
    lwlock.write_csv(str(path), records, append=True)
    lines = path.read_text().splitlines()
    assert lines[0] == lwlock.CSV_HEADER
    assert len(lines) == 5
    assert lwlock.read_csv(str(path)) == records + records
    assert lwlock.parse_csv_row(records[0].to_csv_row()) == records[0]

    summary = lwlock.summarize_medians(records)
    assert len(summary) == 1 and summary[0].rep == 2


def test_oracles():
    assert lwlock.check_mutual_exclusion("MCS", "SYS", 2, 4, 500)
    assert lwlock.check_deadlock_freedom("BASELINE", "n/a", 2, 4)
    assert not lwlock.check_deadlock_freedom("MCS", "S**", 1, 2, timeout=1.0)
    assert lwlock.check_handshake_interleavings().passed
    assert lwlock.check_backoff_ladder()
    report = lwlock.check_fifo_order()
    assert report.observed == "0 1 2 3 4 5 6 7"
