"""Recompute report aggregates from the per-task CSV written by the CLI."""

import json
import os
import subprocess
from pathlib import Path

import numpy as np
import pandas as pd
import pytest

DATA = Path(os.environ.get("SEMTASK_DATA_DIR", Path(__file__).resolve().parents[2] / "data")) / "wordnet160"
CLI = os.environ.get("SEMTASK_CLI")


@pytest.mark.skipif(not CLI, reason="SEMTASK_CLI not set")
@pytest.mark.parametrize("method", ["protonet", "finetune", "bdcspn"])
def test_report_matches_csv(tmp_path, method):
    tb = tmp_path / "tb.jsonl"
    subprocess.run([CLI, "sample", "--taxonomy", DATA / "taxonomy.json", "--catalog", DATA / "catalog.csv",
                    "--tasks", "1000", "--seed", "12", "--out", tb], check=True, capture_output=True)
    out = tmp_path / "r"
    subprocess.run([CLI, "eval", "--testbed", tb, "--embeddings", DATA / "embeddings.emb", "--method", method,
                    "--window", "200", "--out", out], check=True, capture_output=True)

    report = json.loads((tmp_path / "r.json").read_text())
    tasks = pd.read_csv(tmp_path / "r_tasks.csv", float_precision="round_trip")
    rolling = pd.read_csv(tmp_path / "r_rolling.csv", float_precision="round_trip")

    acc = tasks["top1"].to_numpy()
    assert report["mean_top1"] == pytest.approx(acc.mean(), abs=1e-9)
    ci = 1.96 * acc.std(ddof=1) / np.sqrt(len(acc))
    assert report["ci95_top1"] == pytest.approx(ci, abs=1e-9)

    ordered = tasks.sort_values(["coarsity", "task_id"], kind="stable").reset_index(drop=True)
    n = len(ordered)
    for b, q in enumerate(report["quartiles"]):
        part = ordered.iloc[n * b // 4 : n * (b + 1) // 4]
        assert q["count"] == len(part)
        assert q["mean_top1"] == pytest.approx(part["top1"].mean(), abs=1e-9)

    c = ordered["coarsity"].rolling(200).mean().dropna().to_numpy()
    a = ordered["top1"].rolling(200).mean().dropna().to_numpy()
    assert len(rolling) == n - 199
    np.testing.assert_allclose(rolling["coarsity"], c, atol=1e-9, rtol=0)
    np.testing.assert_allclose(rolling["accuracy"], a, atol=1e-9, rtol=0)
    # rank the emitted series: recomputed means differ in the last ulp, which reorders ties.
    # round_trip parsing keeps the printed doubles exact so ties match.
    rho = rolling["coarsity"].rank().corr(rolling["accuracy"].rank())
    assert report["rolling"]["spearman"] == pytest.approx(rho, abs=1e-9)
