import pytest

from mhdjump.verification import CHECKS, DETERMINISM_INDEX, LEVELS, run_check, run_suite


def test_every_criterion_has_exactly_one_check():
    indices = [i for i, _, _ in CHECKS] + [DETERMINISM_INDEX]
    assert sorted(indices) == list(range(1, 18))
    assert len({name for _, name, _ in CHECKS}) == len(CHECKS)


def test_levels():
    assert LEVELS["fast"].n2 == 32 and LEVELS["fast"].paths == 1_000
    assert LEVELS["full"].n2 == 64 and LEVELS["full"].paths == 10_000
    with pytest.raises(ValueError):
        run_suite("medium")
    with pytest.raises(ValueError):
        run_suite("fast", mutation="flip_signs")


def test_skipping_dealiasing_fails_energy_neutrality():
    good = run_check(7, "fast", 0)
    bad = run_check(7, "fast", 0, mutation="skip_dealias")
    assert good.passed and not bad.passed
    assert bad.measured["worst_relative"] > 1e-6


def test_subset_is_deterministic_and_seed_dependent():
    a = run_suite("fast", 3, only=[5, 9, 10])
    b = run_suite("fast", 3, only=[5, 9, 10])
    c = run_suite("fast", 4, only=[5, 9, 10])
    assert a.digest() == b.digest()
    assert a.digest() != c.digest()


def test_parallel_matches_sequential():
    seq = run_suite("fast", 1, only=[2, 9], workers=1)
    par = run_suite("fast", 1, only=[2, 9], workers=2)
    assert seq.digest() == par.digest()


def test_report_formats():
    rep = run_suite("fast", 0, only=[5, DETERMINISM_INDEX])
    assert [r.index for r in rep.results] == [5, DETERMINISM_INDEX]
    text = rep.to_text()
    assert "[PASS]  5 weak_seminorm" in text and "digest" in text
    lines = rep.to_csv().splitlines()
    assert lines[0] == "index,name,passed,threshold,runtime_s,measured" and len(lines) == 3


def test_failing_check_is_recorded_not_raised(monkeypatch):
    import mhdjump.verification as v

    def boom(ctx):
        raise RuntimeError("broken")

    monkeypatch.setattr(v, "CHECKS", [(5, "weak_seminorm", boom)])
    res = v.run_check(5, "fast", 0)
    assert not res.passed and "broken" in res.error
