import json
import tempfile
from pathlib import Path

import numpy as np
from _check_utils import CHECK, CHECK_CLOSE, CHECK_RAISES, main, mandatory_testcase
from pydantic import ValidationError

from rapid_svdd import (
    DataFormatError,
    Dataset,
    IndexSet,
    KernelSpec,
    Label,
    LabelVector,
    RunReport,
    gram_matrix,
    load_csv,
    load_model,
    predict_batch,
    rapid_sample_traced,
    read_indices,
    save_model,
    train_svdd,
    write_dataset_csv,
    write_indices,
    write_report,
)
from rapid_svdd.data_io import parse_label_map, write_trace

YES_NO = {"yes": Label.OUT, "no": Label.IN}


def _write(directory: str, name: str, content: str) -> Path:
    path = Path(directory) / name
    path.write_text(content)
    return path


def _report(**update) -> RunReport:
    values = {
        "dataset_id": "toy",
        "method": "rapid",
        "t_samp": 0.123456789,
        "t_train": 0.0,
        "t_inf": 0.5,
        "sample_size": 3,
        "sample_ratio": 0.3,
        "mcc": 1.0,
        "gamma": 0.5,
        "p_out": 0.05,
        "seed": None,
    }
    values.update(update)
    return RunReport(**values)


@mandatory_testcase(max_runtime_s=30)
def test_headerless_numeric_file():
    with tempfile.TemporaryDirectory() as tmp:
        data, labels = load_csv(_write(tmp, "x.csv", "1,2\n3,4\n5,6\n"))
    CHECK(labels is None, "No label column was requested.")
    CHECK(data.n == 3 and data.m == 2, f"Expected 3x2, got {data.n}x{data.m}.")
    CHECK(
        np.array_equal(data.observations, [[1, 2], [3, 4], [5, 6]]),
        "Row order and values must be preserved.",
    )


@mandatory_testcase(max_runtime_s=30)
def test_header_and_label_column():
    content = "a,b,outlier\n1,2,no\n3,4,yes\n5,6,no\n"
    with tempfile.TemporaryDirectory() as tmp:
        data, labels = load_csv(_write(tmp, "x.csv", content), "outlier", YES_NO)
    CHECK(data.m == 2, "The label column is not a feature.")
    CHECK(labels is not None and labels.n_outliers == 1, "One 'yes' row is an outlier.")
    CHECK(labels.labels() == [Label.IN, Label.OUT, Label.IN], f"Wrong labels {labels.labels()}.")


@mandatory_testcase(max_runtime_s=30)
def test_headerless_label_column_by_position():
    with tempfile.TemporaryDirectory() as tmp:
        data, labels = load_csv(_write(tmp, "x.csv", "1,2,no\n3,4,yes\n"), "3", YES_NO)
    CHECK(data.n == 2 and data.m == 2, "Both rows are data rows.")
    CHECK(labels.outlier.tolist() == [False, True], "Second row is an outlier.")


@mandatory_testcase(max_runtime_s=30)
def test_non_numeric_cell_names_row_and_column():
    with tempfile.TemporaryDirectory() as tmp:
        e = CHECK_RAISES(DataFormatError, load_csv, _write(tmp, "x.csv", "1,2\n3,abc\n"))
    CHECK(e.row == 2, f"The bad cell is in row 2, reported {e.row}.")
    CHECK(e.column == "2", f"The bad cell is in column 2, reported {e.column}.")


@mandatory_testcase(max_runtime_s=30)
def test_ambiguous_first_row_needs_explicit_header():
    with tempfile.TemporaryDirectory() as tmp:
        path = _write(tmp, "x.csv", "a,2\n3,4\n5,6\n")
        e = CHECK_RAISES(DataFormatError, load_csv, path)
        CHECK(e.row == 1, f"The first row is reported, got {e.row}.")
        CHECK("'2'" in str(e), f"The numeric header cell is named: {e}.")
        data, _ = load_csv(path, header=True)
        CHECK(data.n == 2, f"With a header, two data rows remain, got {data.n}.")
        CHECK(np.array_equal(data.observations, [[3, 4], [5, 6]]), "Rows after the header.")
        e = CHECK_RAISES(DataFormatError, load_csv, path, header=False)
        CHECK(e.row == 1 and e.column == "1", f"'a' is a bad cell in row 1, column 1: {e.row}, {e.column}.")
        words = _write(tmp, "words.csv", "x,y\n3,4\n")
        CHECK(load_csv(words)[0].n == 1, "A row without numbers is a header.")


@mandatory_testcase(max_runtime_s=30)
def test_non_finite_cell_is_rejected():
    with tempfile.TemporaryDirectory() as tmp:
        CHECK_RAISES(DataFormatError, load_csv, _write(tmp, "x.csv", "1,2\n3,inf\n"))
        CHECK_RAISES(DataFormatError, load_csv, _write(tmp, "y.csv", "1,2\n3,nan\n"))


@mandatory_testcase(max_runtime_s=30)
def test_empty_and_header_only_files():
    with tempfile.TemporaryDirectory() as tmp:
        CHECK_RAISES(DataFormatError, load_csv, _write(tmp, "empty.csv", ""))
        CHECK_RAISES(DataFormatError, load_csv, _write(tmp, "header.csv", "a,b\n"))


@mandatory_testcase(max_runtime_s=30)
def test_label_column_errors():
    with tempfile.TemporaryDirectory() as tmp:
        path = _write(tmp, "x.csv", "a,b,lab\n1,2,yes\n3,4,maybe\n")
        CHECK_RAISES(DataFormatError, load_csv, path, "missing", YES_NO)
        e = CHECK_RAISES(DataFormatError, load_csv, path, "lab", YES_NO)
        CHECK(e.row == 2, f"'maybe' in row 2 has no mapping, reported row {e.row}.")
        three = _write(tmp, "three.csv", "a,lab\n1,yes\n2,no\n3,maybe\n")
        CHECK_RAISES(DataFormatError, load_csv, three, "lab", {**YES_NO, "maybe": Label.IN})
        CHECK_RAISES(ValueError, load_csv, path, "lab", None)


@mandatory_testcase(max_runtime_s=30)
def test_parse_label_map():
    CHECK(parse_label_map("yes=out, no=in") == YES_NO, "Mapping with spaces.")
    CHECK(parse_label_map("a=b=out") == {"a=b": Label.OUT}, "The last '=' separates the label.")
    CHECK_RAISES(ValueError, parse_label_map, "yes")
    CHECK_RAISES(ValueError, parse_label_map, "yes=maybe")
    CHECK_RAISES(ValueError, parse_label_map, ",")


@mandatory_testcase(max_runtime_s=30)
def test_dataset_validation():
    CHECK_RAISES(ValidationError, Dataset, observations=np.zeros((0, 2)))
    CHECK_RAISES(ValidationError, Dataset, observations=np.array([[1.0, np.nan]]))
    data = Dataset(observations=[[1.0, 2.0]])
    CHECK(data.n == 1 and data.m == 2, "A single row is a 1xM matrix.")
    CHECK(not data.observations.flags.writeable, "Observations are read-only.")


@mandatory_testcase(max_runtime_s=30)
def test_written_dataset_loads_back():
    rng = np.random.default_rng(3)
    data = Dataset(observations=rng.normal(size=(20, 3)) * 100)
    labels = LabelVector(outlier=rng.random(20) < 0.3)
    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "data.csv"
        write_dataset_csv(data, path, labels)
        header = path.read_text().splitlines()[0]
        loaded, loaded_labels = load_csv(
            path, "label", {"in": Label.IN, "out": Label.OUT}
        )
    CHECK(header == "x1,x2,x3,label", f"Unexpected header '{header}'.")
    CHECK(loaded_labels == labels, "Labels must survive writing.")
    CHECK(
        np.allclose(loaded.observations, data.observations, rtol=1e-5, atol=0),
        "Values are written with 6 significant digits.",
    )


@mandatory_testcase(max_runtime_s=30)
def test_report_json_renders_six_digits():
    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "report.json"
        write_report(_report(), path, "json")
        text = path.read_text()
    content = json.loads(text)
    CHECK('"mcc": 1.0' in text, "The MCC field is written as 1.0.")
    CHECK(content["t_samp"] == 0.123457, f"t_samp rendered as {content['t_samp']}.")
    CHECK(content["size"] == 3 and content["p_out"] == 0.05, "Field names of the report.")
    CHECK(content["seed"] is None, "A deterministic method has no seed.")
    CHECK(list(content)[0] == "dataset", "The first key is the data set.")


@mandatory_testcase(max_runtime_s=30)
def test_report_csv_columns_and_determinism():
    reports = [_report(), _report(method="rand", seed=4, mcc=-0.25)]
    with tempfile.TemporaryDirectory() as tmp:
        first, second = Path(tmp) / "a.csv", Path(tmp) / "b.csv"
        write_report(reports, first, "csv")
        write_report(reports, second, "csv")
        lines = first.read_text().splitlines()
        CHECK(first.read_bytes() == second.read_bytes(), "Identical reports, identical files.")
    CHECK(
        lines[0] == "dataset,method,t_samp,t_train,t_inf,size,ratio,mcc,gamma,p_out,seed",
        f"Unexpected header '{lines[0]}'.",
    )
    CHECK(len(lines) == 3, "One row per report.")
    CHECK(lines[2].split(",")[-1] == "4", "The seed of the random run is written.")
    CHECK_RAISES(ValueError, write_report, reports, "unused", "xml")


@mandatory_testcase(max_runtime_s=30)
def test_index_files_are_one_based():
    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "sample.txt"
        write_indices(IndexSet(indices=[2, 0], n=5), path)
        CHECK(path.read_text() == "1\n3\n", f"Unexpected content {path.read_text()!r}.")
        CHECK(read_indices(path, 5) == IndexSet(indices=[0, 2], n=5), "Index file reads back.")
        CHECK_RAISES(DataFormatError, read_indices, path, 2)
        bad = _write(tmp, "bad.txt", "1\nx\n")
        e = CHECK_RAISES(DataFormatError, read_indices, bad, 5)
        CHECK(e.row == 2, "The bad line is reported.")


@mandatory_testcase(max_runtime_s=30)
def test_trace_file():
    data = Dataset(observations=[[0.0], [1.0], [2.0], [3.0]])
    gram = gram_matrix(data, KernelSpec(gamma=1.0))
    _, trace = rapid_sample_traced(gram, p_out=0.0)
    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "trace.csv"
        write_trace(trace, path)
        lines = path.read_text().splitlines()
    CHECK(lines[0] == "iteration,removed,theta_max,theta_min,violator", f"Header '{lines[0]}'.")
    CHECK(len(lines) == len(trace) + 1, "One row per iteration.")
    first = lines[1].split(",")
    CHECK(first[0] == "1", "Iterations are 1-based.")
    CHECK(first[1] in ("2", "3"), "The first removal is an interior point.")


@mandatory_testcase(max_runtime_s=60)
def test_model_file_reproduces_predictions():
    rng = np.random.default_rng(7)
    data = Dataset(observations=rng.normal(size=(30, 2)))
    model = train_svdd(data, KernelSpec(gamma=0.5))
    queries = rng.normal(size=(50, 2)) * 2
    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "model.json"
        save_model(model, path)
        loaded = load_model(path)
        broken = _write(tmp, "broken.json", "{not json")
        CHECK_RAISES(DataFormatError, load_model, broken)
    CHECK(np.array_equal(loaded.alpha, model.alpha), "Weights are stored exactly.")
    CHECK(np.array_equal(loaded.support_points, model.support_points), "Support vectors.")
    CHECK(loaded.radius_sq == model.radius_sq, "The radius is stored exactly.")
    CHECK(loaded.support_vectors == model.support_vectors, "Support positions.")
    CHECK(
        predict_batch(loaded, queries)[0] == predict_batch(model, queries)[0],
        "Predictions of the loaded model must match.",
    )
    CHECK_CLOSE(loaded.center_norm_sq, model.center_norm_sq, 0.0, "Center norm.")


if __name__ == "__main__":
    main()
