"""End-to-end checks of the permtest executable: exit codes, report schema, determinism."""

import argparse
import csv
import json
import math
import os
import subprocess
import sys
import tempfile

import jsonschema
import numpy as np
from scipy import stats

ARGS = None
SCHEMA = None
TMP = None


def run(*argv):
    proc = subprocess.run([ARGS.cli, *argv], capture_output=True, text=True, timeout=600)
    return proc.returncode, proc.stdout, proc.stderr


def report(*argv):
    code, out, err = run(*argv)
    assert code in (0, 1), f"exit {code}: {err}"
    doc = json.loads(out)
    jsonschema.validate(doc, SCHEMA)
    return code, doc


def write_counts(name, rows, two=False):
    path = os.path.join(TMP, name)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["category", "count_x", "count_y"] if two else ["category", "count"])
        w.writerows(rows)
    return path


def sample(name):
    return os.path.join(ARGS.samples, name)


def test_cat_exact_counts():
    code, doc = report("test-cat", "--counts", sample("one_sample_counts.csv"), "--null", "0.1,0.2,0.3,0.4")
    assert code == 0 and not doc["reject"]
    assert abs(doc["statistics"]["T"]) < 1e-9
    assert doc["categories"] == ["a", "b", "c", "d"]


def test_cat_relabelled_counts():
    path = write_counts("reversed.csv", [["a", 400], ["b", 300], ["c", 200], ["d", 100]])
    code, doc = report("test-cat", "--counts", path, "--null", "0.1,0.2,0.3,0.4")
    assert code == 0 and abs(doc["statistics"]["T"]) < 1e-9


def test_cat_degenerate_dof():
    code, doc = report("test-cat", "--counts", sample("degenerate_counts.csv"), "--null", "0.1,0.1,0.4,0.4")
    assert doc["test_kind"] == "cat_degenerate"
    assert doc["d"] == 2
    assert doc["dof"] == {"T_f": 1, "T_g": 3}
    assert "zero count in at least one category" in doc["diagnostics"]["warnings"]


def test_cat_permuted_draws_rarely_reject():
    p = np.array([0.05, 0.15, 0.3, 0.5])
    rng = np.random.default_rng(2024)
    accepted = 0
    runs = 200
    for r in range(runs):
        counts = rng.multinomial(1000, p[[2, 0, 3, 1]])
        path = write_counts(f"perm_{r}.csv", [[f"c{j}", int(c)] for j, c in enumerate(counts)])
        code, _ = report("test-cat", "--counts", path, "--null", ",".join(map(str, p)))
        accepted += code == 0
    assert accepted >= 0.9 * runs, accepted


def test_gauss_at_null_and_degenerate():
    code, doc = report("test-gauss", "--x", "1,2,3,4,5", "--null", "5,4,3,2,1", "--n", "200")
    assert code == 0 and doc["test_kind"] == "gauss"
    code, doc = report("test-gauss", "--x", "1,3,3,3,5,5", "--null", "1,3,3,3,5,5", "--n", "200")
    assert code == 0 and doc["test_kind"] == "gauss_degenerate"
    assert doc["d"] == 3 and doc["dof"] == {"T_f": 3, "T_g": 6}


def test_gauss_shift_rejects():
    n = 200
    x = [1 + 10 / math.sqrt(n), 2, 3, 4, 5]
    code, doc = report("test-gauss", "--x", ",".join(map(str, x)), "--null", "1,2,3,4,5", "--n", str(n))
    assert code == 1 and doc["reject"]


def test_two_sample_identical_columns():
    path = write_counts("same.csv", [["a", 100, 100], ["b", 100, 100], ["c", 400, 400], ["d", 400, 400]], two=True)
    code, doc = report("test-two-sample", "--counts", path, "--lambda", "sqrt2log")
    assert code == 0 and not doc["reject"]
    assert doc["two_sample"]["lambda_rule"] == "sqrt2log"
    assert doc["dof"] == [2, 2, 1]
    code, doc = report("test-two-sample", "--counts", sample("two_sample_counts.csv"))
    assert doc["m"] == 2000 and doc["two_sample"]["lambda_rule"] == "log"


def test_threshold_matches_dense_grid():
    code, out, err = run("threshold", "--kind", "gauss", "--k", "5", "--delta", "4")
    assert code == 0, err
    got = json.loads(out)
    t = np.arange(1e-3, 60.0, 1e-3)
    total = stats.chi2.sf(t, 5) + stats.ncx2.cdf(t, 5, 16.0)
    assert abs(got["t_star"] - t[np.argmin(total)]) <= 2e-3, got
    assert abs(got["total_error"] - total.min()) <= 1e-6
    code, out, _ = run("threshold", "--kind", "noncentral", "--k", "6", "--tau-sq", "0")
    assert code == 0 and abs(json.loads(out)["threshold"] - stats.chi2.isf(0.05, 6)) < 1e-8


def test_simulate_is_deterministic():
    outs = []
    for tag in ("a", "b"):
        path = os.path.join(TMP, f"s1_{tag}.csv")
        code, out, err = run("simulate", "--scenario", "1", "--seed", "7", "--reps", "300", "--out", path,
                             "--manifest", path + ".json")
        assert code == 0, err
        with open(path) as fh:
            outs.append(fh.read())
        with open(path + ".json") as fh:
            manifest = json.load(fh)
        assert manifest["config"]["seed"] == 7 and manifest["config"]["replications"] == 300
    assert outs[0] == outs[1]
    assert outs[0].splitlines()[0] == "x,power,stderr,n,m,scenario"


def test_simulate_scenario_two_power():
    cfg = os.path.join(TMP, "s2.json")
    with open(cfg, "w") as fh:
        json.dump({"scenario": 2, "grid": [7.0], "sample_sizes": [1000], "replications": 2000}, fh)
    path = os.path.join(TMP, "s2.csv")
    code, _, err = run("simulate", "--config", cfg, "--out", path)
    assert code == 0, err
    with open(path) as fh:
        row = next(csv.DictReader(fh))
    assert float(row["power"]) >= 0.95, row


def test_simulate_null_mode():
    cfg = os.path.join(TMP, "null.json")
    with open(cfg, "w") as fh:
        json.dump({"scenario": 4, "sample_sizes": [500], "replications": 300}, fh)
    path = os.path.join(TMP, "null.csv")
    code, _, err = run("simulate", "--config", cfg, "--mode", "null", "--out", path)
    assert code == 0, err
    with open(path) as fh:
        assert fh.readline().startswith("n,m,statistic,law,ks")


def test_malformed_inputs_exit_two():
    bad_header = os.path.join(TMP, "bad_header.csv")
    with open(bad_header, "w") as fh:
        fh.write("name,value\na,1\nb,2\n")
    negative = write_counts("negative.csv", [["a", 5], ["b", -1]])
    cases = [
        ("test-cat", "--counts", bad_header, "--null", "0.5,0.5"),
        ("test-cat", "--counts", negative, "--null", "0.5,0.5"),
        ("test-cat", "--counts", os.path.join(TMP, "missing.csv"), "--null", "0.5,0.5"),
        ("test-cat", "--counts", sample("one_sample_counts.csv"), "--null", "0.1,0.2,x,0.4"),
        ("test-cat", "--counts", sample("one_sample_counts.csv"), "--null", "0.5,0.5"),
        ("test-cat", "--counts", sample("degenerate_counts.csv"), "--null", "0.1,0.1,0.4,0.4",
         "--degenerate", "force-flat"),
        ("test-gauss", "--x", "1,2", "--null", "1,2,3", "--n", "10"),
        ("test-gauss", "--x", "1,2", "--null", "1,2", "--n", "0"),
        ("threshold", "--kind", "gauss", "--k", "5", "--delta", "-1"),
        ("simulate", "--scenario", "9", "--out", os.path.join(TMP, "x.csv")),
        ("no-such-command",),
    ]
    for argv in cases:
        code, _, err = run(*argv)
        assert code == 2, (argv, code, err)
        assert err.strip(), argv


def test_sample_reports_validate():
    for argv in (
        ("test-cat", "--counts", sample("one_sample_counts.csv"), "--null", "0.4,0.3,0.2,0.1"),
        ("test-cat", "--counts", sample("degenerate_counts.csv"), "--null", "0.1,0.1,0.4,0.4"),
        ("test-two-sample", "--counts", sample("two_sample_counts.csv"), "--lambda", "3.5"),
        ("test-gauss", "--x", "2,2,2", "--null", "2,2,2", "--n", "50"),
    ):
        report(*argv)


def main():
    global ARGS, SCHEMA, TMP
    parser = argparse.ArgumentParser()
    parser.add_argument("--cli", required=True)
    parser.add_argument("--schema", required=True)
    parser.add_argument("--samples", required=True)
    ARGS = parser.parse_args()
    with open(ARGS.schema) as fh:
        SCHEMA = json.load(fh)
    jsonschema.Draft7Validator.check_schema(SCHEMA)
    failed = 0
    with tempfile.TemporaryDirectory() as tmp:
        TMP = tmp
        for name, fn in sorted(globals().items()):
            if not (name.startswith("test_") and callable(fn)):
                continue
            try:
                fn()
                print(f"PASS {name}")
            except Exception as exc:  # report every case, then fail once
                failed += 1
                print(f"FAIL {name}: {exc!r}")
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
