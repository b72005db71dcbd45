import pytest

from qgeo.core.config import DEFAULT_TOLERANCES
from qgeo.core.errors import BadDims
from qgeo.models.uncertainty import classify, decomposition
from qgeo.schemas import Classification, RunConfig
from qgeo.utils.matrix import RngState
from qgeo.verification import (
    SUITES,
    Check,
    Suite,
    Trial,
    exponential_trial,
    fiber_trial,
    identities_trial,
    parallel_part,
    random_instance,
    run_campaign,
    run_suite,
    sampler_trial,
    within,
    xi_covariance_trial,
)

CFG = RunConfig(seed=11, trials=12, dim_max=5)


def trial(index, cfg=CFG):
    return Trial(cfg, DEFAULT_TOLERANCES, RngState(cfg.seed).spawn(index), index)


def test_within():
    assert within(1e-10, 1e-9).ok
    assert not within(1e-8, 1e-9).ok


def test_trials_alternate_hbar():
    assert trial(0).hbar == 1.0
    assert trial(1).hbar == pytest.approx(0.32)


@pytest.mark.parametrize("index", range(6))
def test_parallel_part_is_parallel(index):
    inst, _ = random_instance(trial(index))
    a = parallel_part(inst.a, inst.frame)
    assert classify(a, inst.frame, inst.ctx) is Classification.PARALLEL
    report = decomposition(a, inst.b, inst.frame, inst.ctx)
    assert report.xiAperp_sq == pytest.approx(0.0, abs=1e-9)
    assert report.geo_bound == pytest.approx(report.rs_bound, abs=1e-9 * max(1.0, report.product))


@pytest.mark.parametrize("suite", SUITES, ids=lambda s: s.name)
def test_every_suite_passes_a_few_trials(suite):
    cfg = RunConfig(seed=5, trials=5, dim_max=4)
    result = run_suite(suite, cfg, DEFAULT_TOLERANCES, stream=SUITES.index(suite))
    assert result.passed + result.failed == suite.count(cfg)
    if suite.gating:
        assert result.failed == 0


def test_failing_checks_are_counted():
    suite = Suite("flaky", lambda t: [Check(0.25 * t.index, t.index != 2)], fixed=4)
    result = run_suite(suite, CFG, DEFAULT_TOLERANCES, stream=99)
    assert (result.passed, result.failed) == (3, 1)
    assert result.worst_residual == pytest.approx(0.75)
    assert not result.ok


def test_raising_trial_counts_as_failure():
    def broken(t):
        if t.index == 1:
            raise BadDims("rho", subject="trial")
        return [Check(0.0, True)]

    result = run_suite(Suite("broken", broken, fixed=3), CFG, DEFAULT_TOLERANCES, stream=7)
    assert (result.passed, result.failed) == (2, 1)
    assert result.worst_residual == 0.0


def test_campaign_summary_is_gated():
    ok = Suite("ok", lambda t: [Check(0.0, True)], fixed=2)
    diagnostic = Suite("diagnostic", lambda t: [Check(1.0, False)], fixed=2, gating=False)
    summary = run_campaign(CFG, DEFAULT_TOLERANCES, suites=(ok, diagnostic))
    assert summary.all_passed
    assert summary.suites["diagnostic"].failed == 2
    broken = Suite("broken", lambda t: [Check(1.0, False)], fixed=1)
    assert not run_campaign(CFG, DEFAULT_TOLERANCES, suites=(ok, broken)).all_passed


def test_suite_layout():
    by_name = {suite.name: suite for suite in SUITES}
    assert by_name["eigensystem"].count(CFG) == CFG.trials
    assert {"exponential", "sampler", "fiber", "xi_covariance"} <= set(by_name)


@pytest.mark.parametrize("index", range(4))
def test_identities_trial_covers_pair_relations(index):
    checks = identities_trial(trial(index))
    # identity residuals, two checks per observable, three pair relations
    assert len(checks) >= 7
    assert all(check.ok for check in checks)


@pytest.mark.parametrize(
    "trial_fn", [exponential_trial, sampler_trial, fiber_trial, xi_covariance_trial], ids=lambda f: f.__name__
)
def test_structural_trials_pass(trial_fn):
    for index in range(5):
        assert all(check.ok for check in trial_fn(trial(index)))
