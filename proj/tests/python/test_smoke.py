import json
import os
from pathlib import Path

import pytest

import uelicit

DATA = Path(os.environ.get("UELICIT_DATA_DIR", Path(__file__).resolve().parents[2] / "data"))


@pytest.fixture(scope="module")
def panda():
    return uelicit.load_model(str(DATA / "mini_panda.json"))


@pytest.fixture(scope="module")
def worked():
    return uelicit.load_model(str(DATA / "fixtures" / "worked_3x2.json"))


@pytest.fixture(scope="module")
def corpus():
    return uelicit.generate(str(DATA / "archetypes4.json"))


def test_worked_fixture_losses(worked):
    truth, proto = [1.0, 0.9, 0.0], [1.0, 0.2, 0.0]
    assert uelicit.best_strategy(worked, truth, 0) == (0, pytest.approx(0.95))
    assert uelicit.best_strategy(worked, proto, 0)[0] == 1
    assert uelicit.utility_loss(worked, truth, proto, 0) == pytest.approx(0.15, abs=1e-12)
    assert uelicit.utility_loss(worked, proto, truth, 0) == pytest.approx(0.2, abs=1e-12)
    assert uelicit.distance(worked, truth, proto, 0) == pytest.approx(0.175, abs=1e-12)
    assert uelicit.averaged_distance(worked, truth, proto) == pytest.approx(0.175, abs=1e-12)


def test_errors_are_typed(worked):
    with pytest.raises(uelicit.ValidationError):
        uelicit.expected_utility(worked, [1.0, 0.0], 0, 0)
    with pytest.raises(uelicit.NotFoundError):
        uelicit.best_strategy(worked, [1.0, 0.5, 0.0], 4)
    with pytest.raises(uelicit.Error):
        uelicit.load_model(str(DATA / "fixtures" / "bad_row_sum.json"))


def test_normalize():
    values, clamped = uelicit.normalize([10.0, 7.0, 2.0], 0, 2)
    assert values == [1.0, 0.625, 0.0]
    assert clamped == []


def test_model_round_trip(panda):
    assert (panda.outcome_count, panda.strategy_count, panda.history_count) == (22, 18, 4)
    text = json.loads((DATA / "fixtures" / "minimal_2x2.json").read_text())
    small = uelicit.model_from_json(json.dumps(text))
    assert small.outcome_labels() == ["good", "bad"]


def test_cluster_recovers_archetypes(panda, corpus):
    db, labels = corpus
    assert len(db) == 60
    for h in range(panda.history_count):
        clusters = uelicit.cluster(db, panda, h, 4)["clusters"]
        ids = db.ids()
        groups = sorted(sorted(labels[ids.index(m)] for m in c["members"]) for c in clusters)
        assert all(len(set(g)) == 1 for g in groups)
        assert sorted(g[0] for g in groups) == [0, 1, 2, 3]


def test_tree_classifies_training_functions(panda, corpus):
    db, _ = corpus
    tree = uelicit.build_tree(db, panda, 0, 4)
    assert tree.depth >= 1
    doc = tree.to_json()
    assert doc["history"] == "0"
    for i in range(len(db)):
        label, prototype, questions = tree.classify(db.values(i))
        assert prototype in db.ids()
        assert questions <= tree.depth


def test_holdout_is_deterministic(panda, corpus):
    db, _ = corpus
    a = uelicit.holdout_error(db, panda, 1, 4, runs=20, seed=3)
    b = uelicit.holdout_error(db, panda, 1, 4, runs=20, seed=3)
    assert a == b
    assert a["protocol"] == "holdout"
    assert len(a["points"][0]["samples"]) == 20
    assert 0.0 <= a["points"][0]["mean_error"] <= 1.0


def test_loocv_endpoints(panda):
    db, _ = uelicit.generate(str(DATA / "archetypes4_noisy.json"))
    report = uelicit.loocv_over_k(db, panda, 0, [1, 4])
    err = {p["x"]: p["mean_error"] for p in report["points"]}
    assert err[4.0] <= err[1.0]


def test_database_round_trip(panda, corpus, tmp_path):
    db, _ = corpus
    path = tmp_path / "db.csv"
    db.save(str(path))
    again, dropped = uelicit.load_database(str(path), panda)
    assert dropped == 0
    assert again.ids() == db.ids()
    assert again.values(7) == db.values(7)
