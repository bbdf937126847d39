import itertools

import pytest

from seqstop.fixed_ci import SampleSummary, ci_mean
from seqstop.seq_mv import plan_mv, run_mv
from seqstop.sim import DistributionSpec, generate


def test_plan_example():
    plan = plan_mv(0.1, 0.05, 5)
    assert plan.sizes[0] == 51
    assert plan.sizes[-1] == 265


def test_plan_single_stage():
    plan = plan_mv(0.1, 0.05, 1)
    assert plan.sizes == (185,)


def test_plan_rejects_large_epsilon():
    with pytest.raises(ValueError):
        plan_mv(0.6, 0.05, 5)


def test_stage_budget_split():
    plan = plan_mv(0.1, 0.05, 5)
    assert plan.stage_budget == pytest.approx(0.005)


def test_low_variance_stream_stops_early():
    plan = plan_mv(0.1, 0.05, 5)
    decision = run_mv(itertools.repeat(0.5, 300), plan)
    assert decision.status == "stopped"
    assert decision.n in plan.sizes
    assert decision.n < plan.sizes[-1]
    assert decision.estimate == 0.5
    # the reported interval satisfies the inclusion that triggered the stop
    assert decision.estimate - plan.epsilon <= decision.lower
    assert decision.upper <= decision.estimate + plan.epsilon


def test_all_zeros_stream():
    plan = plan_mv(0.1, 0.05, 5)
    decision = run_mv(itertools.repeat(0.0, 300), plan)
    assert decision.status == "stopped"
    assert decision.estimate == 0.0
    assert decision.lower == 0.0
    assert decision.upper <= plan.epsilon
    # cross-check against a direct interval at the stopping point
    summary = SampleSummary(n=decision.n, mean=0.0, var=0.0)
    again = ci_mean(summary, plan.stage_budget)
    assert decision.upper == again.upper


def test_never_reads_past_last_stage():
    plan = plan_mv(0.1, 0.05, 5)
    spec = DistributionSpec("bernoulli", {"p": 0.2}, seed=15)
    for rep in range(5):
        decision = run_mv(generate(spec, plan.sizes[-1], rep), plan)
        assert decision.n <= plan.sizes[-1]
        assert decision.status in ("stopped", "no-inclusion")


def test_stream_exhaustion():
    plan = plan_mv(0.1, 0.05, 5)
    decision = run_mv(iter([0.5] * 10), plan)
    assert decision.status == "stream-exhausted"
    assert decision.n == 10


def test_inclusion_reevaluates_at_stop():
    plan = plan_mv(0.1, 0.05, 5)
    spec = DistributionSpec("bernoulli", {"p": 0.2}, seed=29)
    for rep in range(10):
        draws = list(generate(spec, plan.sizes[-1], rep))
        decision = run_mv(iter(draws), plan)
        if decision.status != "stopped":
            continue
        xs = draws[:decision.n]
        mean = sum(xs) / len(xs)
        var = sum((x - mean) ** 2 for x in xs) / len(xs)
        interval = ci_mean(SampleSummary(n=len(xs), mean=mean,
                                         var=min(var, 0.25)),
                           plan.stage_budget)
        assert mean - plan.epsilon <= interval.lower
        assert interval.upper <= mean + plan.epsilon
