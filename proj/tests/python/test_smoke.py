import json
import pathlib

import numpy as np
import pytest

import microevent as me

ROOT = pathlib.Path(__file__).resolve().parents[2]
FIXTURE = ROOT / "config" / "fixture.json"


def test_version():
    assert me.__version__ == "0.1.0"


def test_cliffs_delta_all_greater():
    r = me.cliffs_delta([3.0, 4.0, 5.0], [0.0, 1.0])
    assert r["delta"] == 1.0
    assert r["ci_low"] <= r["delta"] <= r["ci_high"]


def test_holm():
    sig, thr = me.holm_bonferroni([0.01, 0.04, 0.03], 0.05)
    assert sig == [True, False, False]
    assert thr[0] == pytest.approx(0.05 / 3)


def test_pr_auc_perfect_ranking():
    y = np.array([0.0, 0.0, 1.0, 1.0])
    s = np.array([0.1, 0.2, 0.8, 0.9])
    assert me.pr_auc(y, s) == pytest.approx(1.0)
    assert me.roc_auc(y, s) == pytest.approx(1.0)
    observed, p = me.permutation_test(y, s, n_perm=99, seed=3)
    assert observed == pytest.approx(1.0)
    assert 0.0 < p <= 1.0


def test_fit_logistic_grouped_logits():
    x = np.r_[np.zeros(50), np.ones(50)]
    y = np.r_[np.ones(10), np.zeros(40), np.ones(40), np.zeros(10)]
    fit = me.fit_logistic(x.reshape(-1, 1), y)
    assert fit["beta"][0] == pytest.approx(np.log(0.25), abs=1e-6)
    assert fit["beta"][1] == pytest.approx(np.log(4.0) - np.log(0.25), abs=1e-6)
    assert all(b >= a for a, b in zip(fit["ll_trace"], fit["ll_trace"][1:]))


def test_separation_raises():
    x = np.arange(8.0).reshape(-1, 1)
    y = (np.arange(8) >= 4).astype(float)
    with pytest.raises(me.SeparationError):
        me.fit_logistic(x, y)


def test_text_helpers():
    toks = me.clean_tokens("<p>Upgrading the <b>drivers</b> broke everything</p><pre><code>x = 1</code></pre>")
    assert "upgrad" in toks
    assert "x" not in toks
    assert me.sentiment("this is great")["compound"] > 0


def test_bad_format_is_config_error(tmp_path):
    with pytest.raises(me.ConfigError):
        me.run(FIXTURE, out=tmp_path / "o", formats=["pdf"])


def test_missing_events_input(tmp_path):
    with pytest.raises(me.InputError, match="missing input: events"):
        me.run(FIXTURE, out=tmp_path / "o", overrides={"inputs": {"events": "nope.csv"}})


def test_fixture_run_roundtrip(tmp_path):
    report = me.run(FIXTURE, out=tmp_path / "run", formats=["json", "markdown"])
    assert [e["name"] for e in report["estimators"]] == ["LR", "RF", "GBDT"]
    md = me.render_markdown(report)
    assert "| Dataset | Estimator | PRAUC | P.test | F1 |" in md
    on_disk = json.loads((tmp_path / "run" / "report" / "report.json").read_text())
    assert on_disk["config_hash"] == report["config_hash"]
    assert (tmp_path / "run" / "report" / "report.md").read_text() == md
