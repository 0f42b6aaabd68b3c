import os
import json
import random
from unittest.mock import patch

import pytest
import requests

import main
from config import Config
from conftest import (
    LOGIN_CONSTANT_METHOD,
    LOGIN_TRUTH,
    LOGIN_WILDCARD_TAG,
    PASSWORD_LOGINS,
    SNMPD_TRUTH,
    instantiate,
    synthetic_templates,
)
from ingest.ground_truth import load_ground_truth
from template.core import matches, parse_template

SU_TEMPLATES = ["su: session opened for user <*> by <*>", "su: never seen <*>"]


@pytest.fixture
def dataset(tmp_path):
    """Syslog file with an svcd and an su partition, plus its ground truth."""
    rnd = random.Random(42)
    svcd = synthetic_templates(6)
    lines = []
    for n in range(80):
        if n % 4 == 3:
            text = f"su: session opened for user u{n} by root"
        else:
            text = instantiate(svcd[rnd.randrange(5)], rnd)
        lines.append(f"<38>Oct 11 22:{n // 60:02d}:{n % 60:02d} host1 {text}")
    log = tmp_path / "system.log"
    log.write_text("\n".join(lines) + "\n", encoding="utf-8")
    gt = tmp_path / "gt.txt"
    gt.write_text("\n".join([t.source for t in svcd] + SU_TEMPLATES) + "\n", encoding="utf-8")
    texts = [line.split(" host1 ", 1)[1] for line in lines]
    instantiated = {
        source for source in [t.source for t in svcd] + SU_TEMPLATES
        if any(matches(parse_template(source), text) for text in texts)
    }
    return {"log": str(log), "gt": str(gt), "out": str(tmp_path / "out"), "instantiated": instantiated}


def read_text(path):
    with open(path, encoding="utf-8") as handle:
        return handle.read()


def load_json(path):
    return json.loads(read_text(path))


def read_templates(path):
    with open(path, encoding="utf-8") as handle:
        return {line.rstrip("\n") for line in handle if line.strip() and not line.startswith("#")}


def mine_oracle(dataset, *extra):
    return main.main(["mine", "--log", dataset["log"], "--backend", "oracle", "--truth", dataset["gt"],
                      "--out", dataset["out"], *extra])


def test_mine_with_oracle(dataset):
    assert mine_oracle(dataset, "-k", "10") == 0
    out = dataset["out"]
    assert read_templates(f"{out}/templates.txt") == dataset["instantiated"]
    assert len(dataset["instantiated"]) == 6
    with open(f"{out}/templates.txt", encoding="utf-8") as handle:
        headers = [line.strip() for line in handle if line.startswith("#")]
    assert headers == ["# su", "# svcd"]

    stats = load_json(f"{out}/stats.json")
    assert set(stats) == {"su", "svcd"}
    assert stats["su"]["queries"] == 1
    assert "elapsed_ms" in stats["svcd"]

    result = load_json(f"{out}/results/svcd.json")
    assert result["uncovered"] == []
    assert read_text(f"{out}/uncovered.txt") == ""


def test_mine_defaults_to_batches_of_ten(dataset):
    assert mine_oracle(dataset) == 0
    manifest = load_json(f"{dataset['out']}/manifest.json")
    assert manifest["config"]["batch_size"] == 10
    assert dataset["log"] in manifest["inputs"]
    assert len(manifest["inputs"][dataset["log"]]) == 64


def test_mine_in_parallel_gives_the_same_templates(dataset):
    assert mine_oracle(dataset, "--jobs", "2") == 0
    assert read_templates(f"{dataset['out']}/templates.txt") == dataset["instantiated"]


def test_mined_templates_load_as_ground_truth(dataset):
    assert mine_oracle(dataset) == 0
    assert len(load_ground_truth(f"{dataset['out']}/templates.txt")) == 6


def test_template_shared_by_partitions_is_written_once(tmp_path):
    log = tmp_path / "shared.log"
    log.write_text("su: session opened for alice\ncron: session opened for root\n", encoding="utf-8")
    gt = tmp_path / "gt.txt"
    gt.write_text("<*>: session opened for <*>\n", encoding="utf-8")
    out = tmp_path / "out"
    code = main.main(["mine", "--log", str(log), "--no-header", "--backend", "oracle", "--truth", str(gt),
                      "--out", str(out)])
    assert code == 0
    assert load_json(f"{out}/results/su.json")["templates"] == ["<*>: session opened for <*>"]
    assert load_json(f"{out}/results/cron.json")["templates"] == ["<*>: session opened for <*>"]
    loaded = load_ground_truth(f"{out}/templates.txt")
    assert [t.source for t in loaded] == ["<*>: session opened for <*>"]
    assert read_text(f"{out}/templates.txt").startswith("# cron\n<*>: session opened for <*>\n# su\n")


def test_mine_empty_log(tmp_path, caplog):
    log = tmp_path / "empty.log"
    log.write_text("", encoding="utf-8")
    gt = tmp_path / "gt.txt"
    gt.write_text("a <*>\n", encoding="utf-8")
    code = main.main(["mine", "--log", str(log), "--backend", "oracle", "--truth", str(gt), "--out", str(tmp_path)])
    assert code == 1
    assert "no messages" in caplog.text


def test_mine_with_unreachable_backend(dataset):
    with patch("requests.post", side_effect=requests.ConnectionError("refused")):
        code = main.main(["mine", "--log", dataset["log"], "--endpoint", "http://nowhere:1", "--out", dataset["out"]])
    assert code == 2
    # partial results are still written
    result = load_json(f"{dataset['out']}/results/svcd.json")
    assert result["templates"] == []
    assert len(result["uncovered"]) == result["messages"]


def test_replay_of_recorded_run(dataset, tmp_path):
    record = str(tmp_path / "exchanges.jsonl")
    assert mine_oracle(dataset, "--record", record) == 0
    os.remove(f"{dataset['out']}/manifest.json")
    assert main.main(["replay", "--log", dataset["log"], "--replay", record, "--out", dataset["out"]]) == 0
    manifest = load_json(f"{dataset['out']}/manifest.json")
    assert manifest["config"]["command"] == "replay"
    assert record in manifest["inputs"]


def test_replay_after_editing_a_response(dataset, tmp_path, capsys):
    record = tmp_path / "exchanges.jsonl"
    assert mine_oracle(dataset, "--record", str(record)) == 0
    records = [json.loads(line) for line in record.read_text(encoding="utf-8").splitlines()]
    records[0]["response"] = "1. <*>"
    record.write_text("".join(json.dumps(r) + "\n" for r in records), encoding="utf-8")

    code = main.main(["replay", "--log", dataset["log"], "--replay", str(record), "--out", dataset["out"]])
    assert code == 3
    assert "+++ replay:" in capsys.readouterr().err


def test_replay_without_script(dataset, tmp_path):
    missing = str(tmp_path / "missing.jsonl")
    assert main.main(["replay", "--log", dataset["log"], "--replay", missing, "--out", dataset["out"]]) == 1


def _login_files(tmp_path, detected):
    log = tmp_path / "auth.log"
    log.write_text("\n".join(PASSWORD_LOGINS) + "\n", encoding="utf-8")
    gt = tmp_path / "gt.txt"
    gt.write_text(LOGIN_TRUTH + "\n", encoding="utf-8")
    found = tmp_path / "detected.txt"
    found.write_text(detected + "\n", encoding="utf-8")
    return ["--log", str(log), "--truth", str(gt), "--detected", str(found), "--out", str(tmp_path / "eval")]


def _report(tmp_path):
    return json.loads((tmp_path / "eval" / "eval_report.json").read_text(encoding="utf-8"))


def test_eval_detected_equals_truth(dataset, capsys):
    args = ["eval", "--log", dataset["log"], "--truth", dataset["gt"], "--detected", dataset["gt"],
            "--out", dataset["out"], "--dataset", "system"]
    assert main.main(args) == 0
    report = load_json(f"{dataset['out']}/eval_report.json")
    assert (report["precision"], report["recall"], report["f1"]) == (1.0, 1.0, 1.0)
    assert report["grouping_accuracy"] == 1.0
    out = capsys.readouterr().out
    assert "system" in out and "strict" in out


def test_eval_constant_method_with_p1(tmp_path):
    assert main.main(["eval", "--p1", *_login_files(tmp_path, LOGIN_CONSTANT_METHOD)]) == 0
    report = _report(tmp_path)
    assert (report["correct_count"], report["detected_count"]) == (1, 1)
    assert report["verdicts"][0]["status"] == "CorrectViaP1"


def test_eval_word_atomic_needs_p2(tmp_path):
    args = _login_files(tmp_path, LOGIN_WILDCARD_TAG)
    assert main.main(["eval", "--p1", *args]) == 0
    with_p1 = _report(tmp_path)["correct_count"]
    assert main.main(["eval", "--p1", "--p2", *args]) == 0
    with_p2 = _report(tmp_path)["correct_count"]
    assert (with_p1, with_p2) == (0, 1)
    rows = (tmp_path / "eval" / "eval_summary.csv").read_text(encoding="utf-8").splitlines()
    assert len(rows) == 3


def test_eval_all_modes(tmp_path):
    assert main.main(["eval", "--all-modes", *_login_files(tmp_path, LOGIN_WILDCARD_TAG)]) == 0
    reports = _report(tmp_path)
    assert [r["mode"] for r in reports] == ["strict", "P1", "P1+P2"]
    assert [r["correct_count"] for r in reports] == [0, 0, 1]


def test_eval_missing_file(tmp_path):
    args = _login_files(tmp_path, LOGIN_TRUTH)
    args[args.index("--detected") + 1] = str(tmp_path / "nope.txt")
    assert main.main(["eval", *args]) == 1


def test_classify_overgeneral(tmp_path, capsys):
    log = tmp_path / "snmpd.log"
    log.write_text("snmpd[311]: NET-SNMP version 5.7.3\nsnmpd[311]: Turning on AgentX master support.\n",
                   encoding="utf-8")
    gt = tmp_path / "gt.txt"
    gt.write_text("\n".join(SNMPD_TRUTH) + "\n", encoding="utf-8")
    found = tmp_path / "detected.txt"
    found.write_text("snmpd[<*>]: <*>\nsnmpd[<*>]: NET-SNMP version <*>\n", encoding="utf-8")
    out = tmp_path / "out"
    code = main.main(["classify", "--log", str(log), "--truth", str(gt), "--detected", str(found), "--out", str(out)])
    assert code == 0
    payload = json.loads((out / "classification.json").read_text(encoding="utf-8"))
    assert payload["counts"] == {"OG": 1, "UG": 0, "MX": 0}
    assert [t["template"] for t in payload["templates"]] == ["snmpd[<*>]: <*>"]
    assert "OG" in capsys.readouterr().out


def test_sweep(dataset):
    code = main.main(["sweep", "--log", dataset["log"], "--backend", "oracle", "--truth", dataset["gt"],
                      "--sizes", "2,5", "--out", dataset["out"]])
    assert code == 0
    rows = read_text(f"{dataset['out']}/sweep.csv").splitlines()
    assert rows[0].split(",")[:2] == ["k", "queries"]
    assert "f1_strict" in rows[0]
    assert len(rows) == 3


def test_usage_errors():
    assert main.main([]) == 1
    assert main.main(["mine", "--log", "x.log", "-k", "0"]) == 1


def test_config_validate_resets_bad_values(monkeypatch):
    monkeypatch.setattr(Config, "BATCH_SIZE", 0)
    monkeypatch.setattr(Config, "OVERGENERAL_RATIO", 3.0)
    Config.validate()
    assert Config.BATCH_SIZE == 10
    assert Config.OVERGENERAL_RATIO == 0.9


def test_bad_environment_values_fall_back_before_parsing(dataset, monkeypatch):
    monkeypatch.setattr(Config, "BATCH_SIZE", 0)
    monkeypatch.setattr(Config, "MAX_WORKERS", -2)
    assert mine_oracle(dataset) == 0
    manifest = load_json(f"{dataset['out']}/manifest.json")
    assert manifest["config"]["batch_size"] == 10
    assert manifest["config"]["jobs"] == 1
