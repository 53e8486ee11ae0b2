import contextlib
import io
import json
import tempfile
from pathlib import Path

from _check_utils import CHECK, CHECK_CLOSE, main, mandatory_testcase

from rapid_svdd import (
    IndexSet,
    KernelSpec,
    Label,
    bandwidth_scott,
    gram_matrix,
    load_csv,
    load_model,
    prefilter,
    rapid_sample,
    read_indices,
    solve_sop_exact,
)
from rapid_svdd.cli import run_cli

LABEL_MAP = "in=in,out=out"


def _run(*argv: str):
    """
    Runs the CLI and returns the exit code and the captured stdout.
    """
    out, err = io.StringIO(), io.StringIO()
    with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
        code = run_cli([str(a) for a in argv])
    return code, out.getvalue()


def _gen(directory: Path, n=400, seed=7, outlier_ratio=0.0) -> Path:
    path = directory / "data.csv"
    code, _ = _run(
        "gen", "--n", n, "--m", 2, "--components", 2, "--seed", seed,
        "--outlier-ratio", outlier_ratio, "--out", path,
    )
    CHECK(code == 0, "gen succeeds.")
    return path


def _field(stdout: str, key: str) -> str:
    for line in stdout.splitlines():
        if line.startswith(f"{key}: "):
            return line[len(key) + 2 :]
    return ""


@mandatory_testcase(max_runtime_s=60)
def test_gen_writes_labeled_csv():
    with tempfile.TemporaryDirectory() as tmp:
        path = _gen(Path(tmp))
        lines = path.read_text().splitlines()
        data, labels = load_csv(path, "label", {"in": Label.IN, "out": Label.OUT})
    CHECK(lines[0] == "x1,x2,label", f"Header '{lines[0]}'.")
    CHECK(len(lines) == 401, "400 rows below the header.")
    CHECK(data.n == 400 and labels.n_outliers == 0, "All observations are inliers.")


@mandatory_testcase(max_runtime_s=60)
def test_sample_writes_inlier_indices():
    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        path = _gen(tmp, n=200)
        out, trace = tmp / "sample.idx", tmp / "trace.csv"
        code, _ = _run(
            "sample", "--in", path, "--label-column", "label", "--label-map", LABEL_MAP,
            "--method", "rapid", "--p-out", 0.05, "--gamma-rule", "scott",
            "--out", out, "--trace", trace,
        )
        CHECK(code == 0, "sample succeeds.")
        data, _ = load_csv(path, "label", {"in": Label.IN, "out": Label.OUT})
        sample = read_indices(out, data.n)
        first = out.read_bytes()
        CHECK(trace.read_text().startswith("iteration,removed"), "The trace is written.")
        _run(
            "sample", "--in", path, "--label-column", "label", "--label-map", LABEL_MAP,
            "--out", out,
        )
        CHECK(out.read_bytes() == first, "Identical flags, identical index files.")
    gram = gram_matrix(data, KernelSpec(gamma=bandwidth_scott(data)))
    expected = rapid_sample(gram, 0.05)
    CHECK(sample == expected.sample, "The CLI sample equals the library sample.")
    CHECK(sample.issubset(prefilter(gram, 0.05).inliers), "Only inliers are sampled.")


@mandatory_testcase(max_runtime_s=60)
def test_train_and_eval_model():
    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        path = _gen(tmp, n=150, outlier_ratio=0.05)
        idx, model_path, report = tmp / "s.idx", tmp / "model.json", tmp / "report.json"
        common = ("--in", path, "--label-column", "label", "--label-map", LABEL_MAP)
        CHECK(_run("sample", *common, "--out", idx)[0] == 0, "sample succeeds.")
        code, stdout = _run("train", *common, "--sample", idx, "--out", model_path)
        CHECK(code == 0, "train succeeds.")
        model = load_model(model_path)
        CHECK(model.alpha.size == len(read_indices(idx, 150)), "Trained on the sample.")
        CHECK(_field(stdout, "support_vectors") == str(len(model.support_vectors)), "Output.")
        code, stdout = _run("eval", *common, "--model", model_path, "--out", report)
        CHECK(code == 0, "eval succeeds.")
        content = json.loads(report.read_text())
    CHECK(content["method"] == "model" and content["dataset"] == "data", f"Report {content}.")
    CHECK(-1.0 <= content["mcc"] <= 1.0, "MCC in [-1, 1].")
    CHECK(_field(stdout, "mcc") != "", "The report is printed.")


@mandatory_testcase(max_runtime_s=60)
def test_eval_pipeline_csv():
    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        path = _gen(tmp, n=150, outlier_ratio=0.05)
        report = tmp / "report.csv"
        code, _ = _run(
            "eval", "--in", path, "--label-column", "label", "--label-map", LABEL_MAP,
            "--method", "rand", "--ratio", 0.5, "--seed", 3, "--format", "csv", "--out", report,
        )
        CHECK(code == 0, "eval succeeds.")
        lines = report.read_text().splitlines()
    CHECK(lines[0].startswith("dataset,method,t_samp"), f"Header '{lines[0]}'.")
    CHECK(lines[1].split(",")[1] == "rand" and lines[1].endswith(",3"), f"Row '{lines[1]}'.")


@mandatory_testcase(max_runtime_s=60)
def test_oracle_matches_exact_solver():
    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "tiny.csv"
        path.write_text("0\n1\n2\n3\n5\n5.5\n")
        code, stdout = _run("oracle", "--in", path, "--p-out", 0, "--gamma", 1.0)
        cpsat_code, cpsat_stdout = _run(
            "oracle", "--in", path, "--gamma", 1.0, "--solver", "cpsat"
        )
        data, _ = load_csv(path)
    CHECK(code == 0 and cpsat_code == 0, "oracle succeeds.")
    gram = gram_matrix(data, KernelSpec(gamma=1.0))
    exact = solve_sop_exact(gram, IndexSet.full(data.n))
    CHECK_CLOSE(float(_field(stdout, "delta_fit_exact")), exact.objective, 1e-9)
    CHECK(_field(stdout, "exact_sample") == " ".join(map(str, exact.sample.one_based())), "Sample.")
    CHECK(_field(stdout, "rapid_feasible") == "true", "RAPID's sample is feasible.")
    CHECK_CLOSE(float(_field(cpsat_stdout, "delta_fit_exact")), exact.objective, 1e-4)


@mandatory_testcase(max_runtime_s=120)
def test_bench_sweep():
    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        out, summary = tmp / "bench.csv", tmp / "summary.csv"
        code, stdout = _run(
            "bench", "--sweep", "n", "--values", "100,200", "--methods", "rapid,rand",
            "--ratio", 0.2, "--repetitions", 2, "--out", out,
            "--summary", summary, "--format", "csv",
        )
        CHECK(code == 0, "bench succeeds.")
        rows = out.read_text().splitlines()[1:]
        summaries = summary.read_text().splitlines()
    CHECK(_field(stdout, "runs") == "6", f"2 RAPID runs and 4 random runs: {stdout}")
    CHECK(len(rows) == 6, "One row per run.")
    CHECK(len(summaries) == 5, "Header plus one summary per configuration.")


@mandatory_testcase(max_runtime_s=60)
def test_bench_suite_file():
    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        suite = tmp / "suite.json"
        suite.write_text(
            json.dumps(
                {
                    "repetitions": 2,
                    "configs": [
                        {"id": "mix", "synthetic": {"n": 100, "m": 2, "components": 2, "seed": 1}},
                        {
                            "id": "gone",
                            "path": str(tmp / "gone.csv"),
                            "label_column": "label",
                            "label_map": {"in": "in", "out": "out"},
                        },
                    ],
                }
            )
        )
        code, stdout = _run("bench", "--suite", suite, "--out", tmp / "r.json", "--format", "json")
        reports = json.loads((tmp / "r.json").read_text())
    CHECK(code == 0, "A failing configuration does not fail the suite.")
    CHECK(len(reports) == 1 and reports[0]["dataset"] == "mix", f"Reports {reports}.")
    CHECK(_field(stdout, "failures") == "1", "The missing file is recorded.")


@mandatory_testcase(max_runtime_s=30)
def test_header_flag_overrides_detection():
    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        path = tmp / "mixed.csv"
        path.write_text("a,2\n0,0\n0,1\n5,5\n")
        CHECK(_run("sample", "--in", path, "--gamma", 1.0, "--out", tmp / "o")[0] == 2, "Ambiguous.")
        code, _ = _run("sample", "--in", path, "--gamma", 1.0, "--p-out", 0, "--header", "--out", tmp / "o")
        CHECK(code == 0, "--header resolves the first row.")
        sample = read_indices(tmp / "o", 3)
        CHECK(len(sample) == 3, f"Three data rows remain after the header, sampled {sample}.")
        code, _ = _run("sample", "--in", path, "--gamma", 1.0, "--no-header", "--out", tmp / "o")
        CHECK(code == 2, "Without a header, 'a' is an unparsable cell.")


@mandatory_testcase(max_runtime_s=30)
def test_usage_errors():
    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        path = tmp / "x.csv"
        path.write_text("1,2\n3,4\n")
        CHECK(_run("sample", "--in", path, "--out", tmp / "o", "--bogus")[0] == 1, "Unknown flag.")
        CHECK(_run("sample", "--in", path, "--out", tmp / "o", "--p-out", 1.5)[0] == 1, "p_out.")
        CHECK(_run("sample", "--in", tmp / "missing.csv", "--out", tmp / "o")[0] == 1, "Missing file.")
        CHECK(_run("sample", "--in", path, "--out", tmp / "o", "--method", "rand")[0] == 1, "No ratio.")
        too_many = ("gen", "--n", 2, "--m", 1, "--components", 3, "--seed", 0, "--out", path)
        CHECK(_run(*too_many)[0] == 1, "More components than observations.")
        CHECK(_run("eval", "--in", path, "--out", tmp / "o")[0] == 1, "eval needs labels.")
        CHECK(_run()[0] == 1, "A subcommand is required.")
        CHECK(_run("train", "--help")[0] == 0, "--help exits with 0.")


@mandatory_testcase(max_runtime_s=30)
def test_runtime_errors():
    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        bad = tmp / "bad.csv"
        bad.write_text("1,2\n3,abc\n")
        CHECK(_run("sample", "--in", bad, "--out", tmp / "o")[0] == 2, "Unparsable data.")
        constant = tmp / "constant.csv"
        constant.write_text("1,1\n1,1\n1,1\n")
        CHECK(_run("sample", "--in", constant, "--out", tmp / "o")[0] == 2, "Degenerate bandwidth.")
        big = tmp / "big.csv"
        big.write_text("".join(f"{i}\n" for i in range(20)))
        CHECK(_run("oracle", "--in", big, "--gamma", 1.0)[0] == 2, "Too many inliers for the oracle.")


if __name__ == "__main__":
    main()
