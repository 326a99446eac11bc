# Copyright 2026 The hpcdetect Authors. All Rights Reserved.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

import csv
import filecmp
import os
import subprocess

import pytest

CLI = os.environ.get("HPCDETECT_CLI", "hpcdetect")


def run(*args, check=True):
    proc = subprocess.run([CLI, *map(str, args)], capture_output=True, text=True)
    if check and proc.returncode != 0:
        raise AssertionError(f"{args} exited {proc.returncode}: {proc.stderr}")
    return proc


def synth(path, group="TLB_DATA", separation=4, n=50, seed=7):
    run("synth", "--group", group, "--separation", separation, "--n-per-class", n, "--seed", seed, "--out", path)


@pytest.fixture(scope="module")
def trained(tmp_path_factory):
    d = tmp_path_factory.mktemp("trained")
    data = d / "corpus.csv"
    synth(data)
    cfg = d / "train.cfg"
    cfg.write_text("optimizer = Adadelta\nepochs = 60\ntrain_fraction = 0.7\nseed = 11\n")
    out = run("train", "--data", data, "--config", cfg, "--out", d / "model.json")
    return d, out.stdout


def test_synth_is_byte_identical(tmp_path):
    synth(tmp_path / "a.csv")
    synth(tmp_path / "b.csv")
    assert filecmp.cmp(tmp_path / "a.csv", tmp_path / "b.csv", shallow=False)
    with open(tmp_path / "a.csv") as f:
        ids = {row["trace_id"] for row in csv.DictReader(f)}
    assert len(ids) == 100


def test_train_writes_model_and_history(trained):
    d, stdout = trained
    assert (d / "model.json").exists()
    history = (d / "model.json.history.csv").read_text().splitlines()
    assert history[0] == "epoch,train_loss,val_loss"
    assert len(history) == 61
    accuracy = next(line for line in stdout.splitlines() if line.startswith("accuracy:"))
    assert float(accuracy.split()[1].rstrip("%")) >= 95.0


def test_missing_config_key_is_named(tmp_path):
    synth(tmp_path / "c.csv", n=10)
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("optimizer = SGD\nepochs = 5\nseed = 1\n")
    proc = run("train", "--data", tmp_path / "c.csv", "--config", cfg, "--out", tmp_path / "m.json", check=False)
    assert proc.returncode == 3
    assert "train_fraction" in proc.stderr


def test_detect_truncates_to_twenty_samples(trained, tmp_path):
    d, _ = trained
    src = d / "corpus.csv"
    with open(src) as f:
        rows = list(csv.DictReader(f))
    keep = [r for r in rows if r["trace_id"] in ("benign-0000", "ransomware-0000")]
    extra = []
    for r in keep:
        if r["timestamp_us"] == "2000":
            for ts in range(2100, 2600, 100):
                extra.append({**r, "timestamp_us": str(ts), "metric_value": "1e6", "label": ""})
    for r in keep:
        r["label"] = ""
    long_path = tmp_path / "long.csv"
    with open(long_path, "w", newline="") as f:
        w = csv.DictWriter(f, fieldnames=list(rows[0].keys()), lineterminator="\n")
        w.writeheader()
        w.writerows(keep + extra)
    short_path = tmp_path / "short.csv"
    with open(short_path, "w", newline="") as f:
        w = csv.DictWriter(f, fieldnames=list(rows[0].keys()), lineterminator="\n")
        w.writeheader()
        w.writerows(keep)

    long_out = run("detect", "--model", d / "model.json", "--trace", long_path).stdout
    short_out = run("detect", "--model", d / "model.json", "--trace", short_path).stdout
    assert long_out == short_out
    verdicts = dict((line.split(",")[0], line.split(",")[1:]) for line in long_out.splitlines())
    assert verdicts["benign-0000"][1] == "benign"
    assert float(verdicts["benign-0000"][0]) < 0.5
    assert verdicts["ransomware-0000"][1] == "ransomware"
    assert verdicts["ransomware-0000"][2] == "samples_used=20"


def test_detect_rejects_group_mismatch(trained, tmp_path):
    d, _ = trained
    synth(tmp_path / "clock.csv", group="CLOCK", n=3)
    proc = run("detect", "--model", d / "model.json", "--trace", tmp_path / "clock.csv", check=False)
    assert proc.returncode == 3


def test_grid_rerun_is_identical(tmp_path):
    args = ["grid", "--synthetic", "separation=4,n_per_class=20", "--groups", "TLB_DATA,CLOCK",
            "--optimizers", "SGD,Adamax", "--fractions", "0.7,0.8", "--trials", "2", "--epochs", "8",
            "--seed", "5"]
    run(*args, "--out", tmp_path / "a", "--jobs", "1")
    run(*args, "--out", tmp_path / "b", "--jobs", "3")
    names = sorted(os.listdir(tmp_path / "a"))
    assert "accuracy_70.csv" in names and "statistics_SGD_80.txt" in names
    match, mismatch, errors = filecmp.cmpfiles(tmp_path / "a", tmp_path / "b", names, shallow=False)
    assert not mismatch and not errors


def test_grid_single_optimizer_table(tmp_path):
    run("grid", "--synthetic", "separation=4,n_per_class=10", "--groups", "TLB_DATA", "--optimizers", "SGD",
        "--fractions", "0.7", "--trials", "1", "--epochs", "3", "--out", tmp_path)
    header = (tmp_path / "accuracy_70.txt").read_text().splitlines()[1].split()
    assert header == ["Group", "SGD"]


def test_gradcheck(tmp_path):
    first = run("gradcheck", "--seed", 4).stdout
    assert first.startswith("PASS") and "e-" in first
    assert run("gradcheck", "--seed", 4).stdout == first
    assert run("gradcheck", "--dims", "1x1").stdout.startswith("PASS")
    assert run("gradcheck", "--dims", "9x2", check=False).returncode == 2


def test_usage_errors(tmp_path):
    assert run("synth", "--group", "TLB_DATA", "--out", tmp_path / "x.csv", "--bogus", check=False).returncode == 2
    assert run("synth", "--group", "NOPE", "--out", tmp_path / "x.csv", check=False).returncode == 2
    assert run(check=False).returncode == 2
    help_text = run("train", "--help").stdout
    for flag in ("--data", "--config", "--out", "--history"):
        assert flag in help_text


def test_validate_reports_bad_data(tmp_path):
    synth(tmp_path / "c.csv", n=2)
    text = (tmp_path / "c.csv").read_text().replace("benign-0000,benign,TLB_DATA,2000", "benign-0000,benign,TLB_DATA,2050")
    (tmp_path / "bad.csv").write_text(text)
    proc = run("validate", "--data", tmp_path / "bad.csv", check=False)
    assert proc.returncode == 3
    assert "line" in proc.stderr
