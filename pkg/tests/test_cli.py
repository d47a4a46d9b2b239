from __future__ import annotations

import json

import numpy as np
import pytest

from lensmaslov import cli
from lensmaslov.equivtop import complex_to_text, sphere_model
from lensmaslov.maslov import standard_loop


def _run(tmp_path, *args):
    code = cli.main([*args, "--out-dir", str(tmp_path)])
    return code, tmp_path


def _report(path, name):
    return json.loads((path / f"{name}.json").read_text())


def test_reeb_mu(tmp_path):
    code, out = _run(tmp_path, "reeb-mu", "--n", "2", "--k", "3", "--l", "1")
    assert code == 0
    doc = _report(out, "reeb-mu")
    assert doc["result"]["mu"] == 4 and doc["config"]["k"] == 3
    assert doc["tool"] == "lensmaslov" and "version" in doc
    assert (out / "reeb_mu.png").exists()


def test_linear_maslov_standard_and_samples(tmp_path):
    assert _run(tmp_path, "linear-maslov", "--n", "2", "--no-plots")[0] == 0
    assert _report(tmp_path, "linear-maslov")["result"]["nu"] == 4
    assert not (tmp_path / "linear_maslov.png").exists()
    S = np.stack([standard_loop(1)(t) for t in np.linspace(0, 1, 9)])
    np.save(tmp_path / "loop.npy", S)
    assert _run(tmp_path, "linear-maslov", "--samples-file", str(tmp_path / "loop.npy"))[0] == 0
    assert _report(tmp_path, "linear-maslov")["result"]["nu"] == 2


def test_random_loop_contract(tmp_path):
    assert _run(tmp_path, "linear-maslov", "--n", "1", "--random-loop", "3")[0] == 0
    c = _report(tmp_path, "linear-maslov")["result"]["contract"]
    assert c["passed"] and c["expected"] == c["winding_oracle"]


def test_open_samples_are_a_usage_error(tmp_path):
    S = np.stack([standard_loop(1)(t / 2) for t in np.linspace(0, 1, 9)])
    np.save(tmp_path / "open.npy", S)
    assert _run(tmp_path, "linear-maslov", "--samples-file", str(tmp_path / "open.npy"))[0] == 1


def test_crossings_reeb(tmp_path):
    code, out = _run(tmp_path, "crossings", "--hamiltonian", "reeb", "--time", "6.283185307179586")
    assert code == 0
    res = _report(out, "crossings")["result"]
    assert res["mu"] == 4 and len(res["jumps"]) == 3
    assert (out / "crossings.png").exists()


def test_translated_points(tmp_path):
    code, out = _run(tmp_path, "translated-points", "--n", "1", "--seeds", "32")
    assert code == 0
    res = _report(out, "translated-points")["result"]
    assert res["nondegenerate"] >= 2 and res["lower_bound_met"]


def test_equivtop_commands(tmp_path):
    assert _run(tmp_path, "equivtop-homology", "--k", "5", "--M", "2")[0] == 0
    assert _report(tmp_path, "equivtop-homology")["result"]["betti"] == [1, 1, 1, 1]
    for sub, ind in (("full", 4), ("empty", 0), ("vertex", 1), ("lens:1", 2)):
        assert _run(tmp_path, "equivtop-index", "--sub", sub, "--no-plots")[0] == 0
        assert _report(tmp_path, "equivtop-index")["result"]["ind"] == ind


def test_equivtop_index_from_file(tmp_path):
    X = sphere_model(3, [1, 1])
    (tmp_path / "x.txt").write_text(complex_to_text(X, {"circle": [(0, 1), (1, 2), (0, 2)]}))
    assert _run(tmp_path, "equivtop-index", "--complex-file", str(tmp_path / "x.txt"), "--sub", "circle")[0] == 0
    assert _report(tmp_path, "equivtop-index")["result"]["ind"] == 2
    assert _run(tmp_path, "equivtop-index", "--complex-file", str(tmp_path / "x.txt"), "--sub", "nope")[0] == 1


def test_suites(tmp_path):
    assert _run(tmp_path, "property-suite", "--samples", "5")[0] == 0
    assert _run(tmp_path, "defect-suite", "--pairs", "3")[0] == 0
    assert _report(tmp_path, "defect-suite")["result"]["bound"] == 3


def test_reproduce_subset(tmp_path):
    assert _run(tmp_path, "reproduce", "--only", "1", "4")[0] == 0
    doc = _report(tmp_path, "reproduce")
    assert [r["id"] for r in doc["result"]["rows"]] == [1, 4] and doc["result"]["all_passed"]
    assert (tmp_path / "timings.json").exists()


def test_usage_errors(tmp_path):
    assert _run(tmp_path, "reeb-mu", "--k", "x")[0] == 1
    assert _run(tmp_path, "crossings", "--k", "4")[0] == 1
    assert _run(tmp_path, "crossings", "--hamiltonian", "bogus")[0] == 1
    assert _run(tmp_path, "equivtop-index", "--sub", "lens:9")[0] == 1
    with pytest.raises(SystemExit):
        cli.main(["--version"])


def test_config_overrides_and_rejects_unknown_keys(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"l": 2, "n": 1}))
    assert _run(tmp_path, "reeb-mu", "--config", str(cfg))[0] == 0
    assert _report(tmp_path, "reeb-mu")["result"]["mu"] == 4
    cfg.write_text(json.dumps({"bogus": 1}))
    assert _run(tmp_path, "reeb-mu", "--config", str(cfg))[0] == 1


def test_hamiltonian_spec_in_config(tmp_path):
    cfg = tmp_path / "h.json"
    cfg.write_text(json.dumps({"hamiltonian": {"n": 1, "constant": 1.0, "terms": [[0.05, "re", [3], [0]]]}, "n": 1}))
    assert _run(tmp_path, "translated-points", "--config", str(cfg), "--seeds", "32", "--no-plots")[0] == 0
    cfg.write_text(json.dumps({"hamiltonian": {"n": 1, "constant": 1.0, "terms": [[0.05, "re", [1], [0]]]}, "n": 1}))
    assert _run(tmp_path, "translated-points", "--config", str(cfg), "--no-plots")[0] == 1


def test_reports_are_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    cli.main(["equivtop-index", "--out-dir", str(a)])
    cli.main(["equivtop-index", "--out-dir", str(b)])
    assert (a / "equivtop-index.json").read_bytes() == (b / "equivtop-index.json").read_bytes()
    assert (a / "index.png").read_bytes() == (b / "index.png").read_bytes()


def test_contract_violation_exit_code(tmp_path, monkeypatch):
    from lensmaslov import maslov

    real = maslov.mu_reeb

    def wrong(*args, **kw):
        rep = real(*args, **kw)
        rep.mu += 1
        return rep

    monkeypatch.setattr(maslov, "mu_reeb", wrong)
    assert _run(tmp_path, "reeb-mu", "--no-plots")[0] == 2


def test_thread_env_validation(monkeypatch):
    monkeypatch.setenv(cli.THREADS_ENV, "abc")
    with pytest.raises(cli.UsageError):
        cli.threads()
    monkeypatch.setenv(cli.THREADS_ENV, "3")
    assert cli.threads() == 3
