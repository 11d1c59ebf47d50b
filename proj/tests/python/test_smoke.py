import pytest

import tlcompose as tlc

MACROS = {
    "a": "x > 1 & x < 3 & y > 1 & y < 3",
    "b": "x > 4 & x < 6 & y > 4 & y < 6",
    "c": "x > 1 & x < 3 & y > 6 & y < 8",
}


def test_parse_print_roundtrip():
    f = tlc.parse_formula("F a & F b", macros=MACROS)
    again = tlc.parse_formula(str(f))
    assert str(again) == str(f)


def test_parse_error_position():
    with pytest.raises(ValueError, match="position"):
        tlc.parse_formula("F (x >", features={"x"})


def test_robustness_sign():
    f = tlc.parse_formula("F a", macros=MACROS)
    good = [{"x": 2.0, "y": 2.0}]
    bad = [{"x": 0.0, "y": 0.0}]
    assert tlc.robustness(good, f) > 0
    assert tlc.robustness(bad, f) <= 0


def test_translate_matches_robustness():
    f = tlc.parse_formula("F a & F b", macros=MACROS)
    fsa = tlc.translate(f)
    assert fsa.num_states == 4
    trace = [{"x": 2.0, "y": 2.0}, {"x": 5.0, "y": 5.0}]
    assert tlc.accepts(fsa, trace)
    assert tlc.robustness(trace, f) > 0
    assert not tlc.accepts(fsa, trace[:1])


def test_train_and_evaluate():
    f = tlc.parse_formula("F c", macros=MACROS)
    env = tlc.FsaAugmentedMdp(tlc.GridWorld(), tlc.translate(f), 200)
    cfg = tlc.TrainConfig()
    cfg.update_steps = 20000
    result = tlc.q_learning_train(env, cfg)
    rng = tlc.Rng(7)
    report = tlc.evaluate_satisfaction(
        env, lambda s, q: tlc.greedy_action(result.table, s, q), 100, rng
    )
    assert report.success_rate >= 0.9
    assert len(result.buffer) == cfg.update_steps


def test_qtable_json_roundtrip():
    qt = tlc.QTable(4, 2, 5)
    qt.set(3, 1, 2, 0.25)
    qt.formula = "F c"
    back = tlc.QTable.from_json(qt.to_json())
    assert back.at(3, 1, 2) == 0.25
    assert back.formula == "F c"


def test_compose_disjoint_tasks():
    grid = tlc.GridWorld()
    f1 = tlc.parse_formula("F a & F b", macros=MACROS)
    f2 = tlc.parse_formula("F c", macros=MACROS)
    fsa1, fsa2 = tlc.translate(f1), tlc.translate(f2)

    cfg = tlc.TrainConfig()
    cfg.update_steps = 20000
    r1 = tlc.q_learning_train(tlc.FsaAugmentedMdp(grid, fsa1, 200), cfg)
    cfg.seed = 1
    r2 = tlc.q_learning_train(tlc.FsaAugmentedMdp(grid, fsa2, 200), cfg)

    job = tlc.CompositionJob()
    job.q1, job.q2 = r1.table, r2.table
    job.pf = tlc.product(fsa1, fsa2)
    job.state_samples = [grid.sample_of(s) for s in range(grid.num_states)]
    job.buffer = list(r1.buffer) + list(r2.buffer)
    job.stage = tlc.Stage.C2
    job.update_steps = 20000
    out = tlc.compose_skills(job)

    assert job.pf.fsa.num_states == 8
    # Disjoint goal regions: the overlap correction is identically zero.
    assert max(abs(v) for v in out.correction.data) == 0.0

    env = tlc.FsaAugmentedMdp(grid, job.pf.fsa, 200)
    rng = tlc.Rng(11)
    report = tlc.evaluate_satisfaction(
        env, lambda s, q: tlc.greedy_action(out.composed, s, q), 100, rng
    )
    assert report.success_rate >= 0.9


def test_decomposition_identity():
    grid = tlc.GridWorld()
    f1 = tlc.parse_formula("F a & F b", macros=MACROS)
    f2 = tlc.parse_formula("F c", macros=MACROS)
    pf = tlc.product(tlc.translate(f1), tlc.translate(f2))
    env = tlc.FsaAugmentedMdp(grid, pf.fsa, 200)
    rng = tlc.Rng(3)
    report = tlc.decomposition_check(env, pf, lambda s, q: s % 5, 100, 0.95, rng)
    assert report.identity_holds
    assert abs(report.residual) < 1e-9
