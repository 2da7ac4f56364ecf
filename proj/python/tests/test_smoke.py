import json
import math
import os
from pathlib import Path

import numpy as np
import pytest

import semtask

DATA = Path(os.environ.get("SEMTASK_DATA_DIR", Path(__file__).resolve().parents[2] / "data"))
FIXTURE = DATA / "wordnet160"

TWO_LEAVES = json.dumps(
    {
        "nodes": [
            {"id": "root", "name": "entity", "parents": [], "instances": 0},
            {"id": "c1", "name": "c1", "parents": ["root"], "instances": 10},
            {"id": "c2", "name": "c2", "parents": ["root"], "instances": 10},
        ]
    }
)


def test_two_leaf_distance():
    g = semtask.Taxonomy.from_json(TWO_LEAVES)
    assert g.leaf_ids == ["c1", "c2"]
    assert g.lowest_superordinate("c1", "c2") == "root"
    assert semtask.jc_distance(g, "c1", "c2") == pytest.approx(2 * math.log(2))
    dm = semtask.distance_matrix(g)
    assert dm.values.shape == (2, 2)
    assert dm.coarsity(["c1", "c2"]) == pytest.approx((2 * math.log(2)) ** 2)


def test_errors_surface_as_semtask_error():
    bad = json.dumps({"nodes": [{"id": "r", "name": "r", "parents": [], "instances": 0},
                                {"id": "x", "name": "x", "parents": ["ghost"], "instances": 1}]})
    with pytest.raises(semtask.SemtaskError, match="UnknownParent"):
        semtask.Taxonomy.from_json(bad)


def test_fixture_matrix():
    g = semtask.Taxonomy.from_file(str(FIXTURE / "taxonomy.json"))
    assert len(g.leaf_ids) == 160
    dm = semtask.distance_matrix(g)
    v = dm.values
    assert v.shape == (160, 160)
    assert np.all(np.diag(v) == 0)
    assert np.array_equal(v, v.T)
    assert np.all(v >= 0)


def test_sample_and_evaluate():
    g = semtask.Taxonomy.from_file(str(FIXTURE / "taxonomy.json"))
    kw = dict(catalog=str(FIXTURE / "catalog.csv"), tasks=300, seed=4)
    text = semtask.sample_testbed(g, **kw)
    assert text == semtask.sample_testbed(g, **kw)
    header = json.loads(text.splitlines()[0])
    assert header["config"]["alpha"] == 0.383
    tasks = semtask.read_tasks(text)
    assert len(tasks) == 300
    for t in tasks:
        assert len(t["classes"]) == 5
        for s, q in zip(t["support"], t["query"]):
            assert len(s) == 1 and len(q) == 10
            assert not set(s) & set(q)

    report = semtask.evaluate(text, str(FIXTURE / "embeddings.emb"), method="bdcspn", window=100)
    acc = report["task_top1"]
    assert acc.shape == (300,)
    assert report["mean_top1"] == pytest.approx(acc.mean())
    assert report["rolling_top1"].shape == (201,)
    q = report["quartile_top1"]
    assert q[0] < q[3]
