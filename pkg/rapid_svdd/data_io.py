"""
Reading and writing files: data sets (CSV), reports (CSV/JSON), index files,
RAPID traces and trained models.

All positions in files are 1-based. Reports render reals with 6 significant
digits and a fixed key order, so identical reports give byte-identical files.
"""

import json
import os
import typing
from pathlib import Path

import numpy as np
import pandas as pd
from pydantic import BaseModel

from .data_schema import Dataset, IndexSet, Label, LabelVector
from .exceptions import DataFormatError
from .kernel import KernelSpec
from .rapid import RapidTrace
from .svdd import SvddModel

PathLike = typing.Union[str, "os.PathLike[str]"]

# Field of RunReport -> column, in the order of the metric table.
REPORT_COLUMNS = {
    "dataset_id": "dataset",
    "method": "method",
    "t_samp": "t_samp",
    "t_train": "t_train",
    "t_inf": "t_inf",
    "sample_size": "size",
    "sample_ratio": "ratio",
    "mcc": "mcc",
    "gamma": "gamma",
    "p_out": "p_out",
    "seed": "seed",
}


def _is_number(cell: str) -> bool:
    try:
        float(cell)
    except ValueError:
        return False
    return True


def _has_header(raw: pd.DataFrame, label_column: typing.Optional[str]) -> bool:
    """
    With a label column, the first row is a header iff it names that column.
    Without one, a row of numbers is data and a row without any number is a
    header. A first row mixing both is ambiguous and raises DataFormatError;
    pass `header` explicitly in that case.
    """
    first = [cell.strip() for cell in raw.iloc[0]]
    if label_column is not None:
        return label_column in first
    numeric = [_is_number(cell) for cell in first]
    if all(numeric):
        return False
    if not any(numeric):
        return True
    cells = ", ".join(f"'{c}'" for c, is_number in zip(first, numeric) if is_number)
    msg = (
        f"Cannot tell whether the first row is a header: it mixes text with the numbers {cells}. "
        "Pass header=True or header=False (--header / --no-header)."
    )
    raise DataFormatError(msg, row=1)


def parse_label_map(text: str) -> typing.Dict[str, Label]:
    """
    Parses 'yes=out,no=in' into {'yes': Label.OUT, 'no': Label.IN}.
    """
    mapping: typing.Dict[str, Label] = {}
    for item in text.split(","):
        if not item.strip():
            continue
        value, sep, label = item.rpartition("=")
        if not sep or not value:
            msg = f"Invalid label mapping '{item}', expected VALUE=in or VALUE=out."
            raise ValueError(msg)
        try:
            mapping[value.strip()] = Label.from_str(label)
        except ValueError:
            msg = f"Invalid label '{label}' in mapping '{item}', expected 'in' or 'out'."
            raise ValueError(msg) from None
    if not mapping:
        msg = "The label mapping is empty."
        raise ValueError(msg)
    return mapping


def load_csv(
    path: PathLike,
    label_column: typing.Optional[str] = None,
    label_map: typing.Optional[typing.Dict[str, Label]] = None,
    header: typing.Optional[bool] = None,
) -> typing.Tuple[Dataset, typing.Optional[LabelVector]]:
    """
    Loads a comma-separated file of reals.

    Args:
        path: The CSV file.
        label_column: Name of the label column. In files without a header,
            columns are named by their 1-based position ("1", "2", ...).
        label_map: Maps every value of the label column to 'in' or 'out'.
            Required if a label column is given.
        header: Whether the first row is a header. Detected if None.

    Returns:
        The data set and, if a label column is given, the labels.
    """
    if label_column is not None and label_map is None:
        msg = f"A label mapping is required to interpret the label column '{label_column}'."
        raise ValueError(msg)
    try:
        raw = pd.read_csv(
            path, header=None, dtype=str, keep_default_na=False, skipinitialspace=True
        )
    except pd.errors.EmptyDataError:
        msg = f"The file '{path}' is empty."
        raise DataFormatError(msg) from None
    if header is None:
        header = _has_header(raw, label_column)
    if header:
        raw.columns = [str(c).strip() for c in raw.iloc[0]]
        raw = raw.iloc[1:].reset_index(drop=True)
    else:
        raw.columns = [str(i + 1) for i in range(raw.shape[1])]
    if raw.shape[0] == 0:
        msg = f"The file '{path}' contains no data rows."
        raise DataFormatError(msg)

    labels = None
    if label_column is not None:
        if label_column not in raw.columns:
            msg = f"Label column '{label_column}' not found. Columns: {', '.join(raw.columns)}."
            raise DataFormatError(msg, column=label_column)
        labels = _parse_labels(raw[label_column], label_map or {}, label_column)
        raw = raw.drop(columns=[label_column])
    if raw.shape[1] == 0:
        msg = f"The file '{path}' contains no feature columns."
        raise DataFormatError(msg)

    features = raw.apply(lambda col: pd.to_numeric(col.str.strip(), errors="coerce"))
    invalid = ~np.isfinite(features.to_numpy(dtype=float))
    if invalid.any():
        row, col = np.argwhere(invalid)[0]
        column = raw.columns[col]
        msg = f"Row {row + 1}, column '{column}': cannot parse '{raw.iat[row, col]}' as a finite real."
        raise DataFormatError(msg, row=int(row) + 1, column=column)
    return Dataset(observations=features.to_numpy(dtype=float)), labels


def _parse_labels(
    column: pd.Series, label_map: typing.Dict[str, Label], name: str
) -> LabelVector:
    values = column.str.strip()
    distinct = sorted(values.unique())
    if len(distinct) > 2:
        msg = f"Label column '{name}' has {len(distinct)} distinct values {distinct}, expected at most two."
        raise DataFormatError(msg, column=name)
    unmapped = values[~values.isin(list(label_map))]
    if not unmapped.empty:
        row = int(unmapped.index[0])
        msg = f"Row {row + 1}: label '{unmapped.iloc[0]}' in column '{name}' has no mapping."
        raise DataFormatError(msg, row=row + 1, column=name)
    return LabelVector.from_labels(label_map[v] for v in values)


def write_dataset_csv(
    data: Dataset,
    path: PathLike,
    labels: typing.Optional[LabelVector] = None,
    label_column: str = "label",
) -> None:
    """
    Writes a header x1..xM (plus the label column) and the observations with
    6 significant digits. Labels are written as 'in'/'out'.
    """
    frame = pd.DataFrame(
        data.observations, columns=[f"x{j + 1}" for j in range(data.m)]
    )
    if labels is not None:
        if len(labels) != data.n:
            msg = f"{len(labels)} labels for {data.n} observations."
            raise ValueError(msg)
        frame[label_column] = [str(label) for label in labels.labels()]
    frame.to_csv(path, index=False, float_format="%.6g", lineterminator="\n")


def _render(value: typing.Any) -> typing.Any:
    if isinstance(value, float):
        return float(f"{value:.6g}")
    if isinstance(value, np.generic):
        return _render(value.item())
    return value


def _report_row(report: BaseModel) -> typing.Dict[str, typing.Any]:
    data = report.model_dump(mode="python")
    if set(REPORT_COLUMNS) <= set(data):
        return {column: _render(data[field]) for field, column in REPORT_COLUMNS.items()}
    return {key: _render(value) for key, value in data.items()}


def write_report(
    report: typing.Union[BaseModel, typing.Sequence[BaseModel]],
    path: PathLike,
    fmt: str = "csv",
) -> None:
    """
    Writes a report, a list of reports or a list of summaries.
    JSON gives an object for a single report and an array for a list.
    """
    single = isinstance(report, BaseModel)
    rows = [_report_row(report)] if single else [_report_row(r) for r in report]
    if fmt == "json":
        content = json.dumps(rows[0] if single else rows, indent=2)
        with Path(path).open("w", newline="\n") as f:
            f.write(content + "\n")
    elif fmt == "csv":
        columns = list(rows[0]) if rows else list(REPORT_COLUMNS.values())
        pd.DataFrame(rows, columns=columns, dtype=object).to_csv(
            path, index=False, lineterminator="\n"
        )
    else:
        msg = f"Unknown report format '{fmt}', expected 'csv' or 'json'."
        raise ValueError(msg)


def write_indices(indices: IndexSet, path: PathLike) -> None:
    with Path(path).open("w", newline="\n") as f:
        f.writelines(f"{i}\n" for i in indices.one_based())


def read_indices(path: PathLike, n: int) -> IndexSet:
    positions = []
    with Path(path).open() as f:
        for row, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            if not line.isdigit():
                msg = f"Row {row} of '{path}': '{line}' is not a positive integer."
                raise DataFormatError(msg, row=row)
            positions.append(int(line))
    try:
        return IndexSet.from_one_based(positions, n)
    except ValueError as e:
        msg = f"Invalid index file '{path}': {e}"
        raise DataFormatError(msg) from e


def write_trace(trace: RapidTrace, path: PathLike) -> None:
    rows = [
        {
            "iteration": r.iteration + 1,
            "removed": r.removed + 1,
            "theta_max": r.theta_max,
            "theta_min": r.theta_min,
            "violator": None if r.violator is None else r.violator + 1,
        }
        for r in trace.records
    ]
    pd.DataFrame(
        rows, columns=["iteration", "removed", "theta_max", "theta_min", "violator"], dtype=object
    ).to_csv(path, index=False, lineterminator="\n")


class SvddModelFile(BaseModel):
    """
    The file format of a trained SVDD. Positions are 1-based. Reals are written
    with Python's shortest round-trip representation, so loading reproduces
    every value exactly.
    """

    gamma: float
    radius_sq: float
    center_norm_sq: float
    n_train: int
    support_indices: typing.List[int]
    alpha: typing.List[float]
    support_vectors: typing.List[typing.List[float]]
    training_indices: typing.Optional[typing.List[int]] = None
    training_n: typing.Optional[int] = None
    dual_objective: float = 0.0
    converged: bool = True

    @classmethod
    def from_model(cls, model: SvddModel) -> "SvddModelFile":
        return cls(
            gamma=model.kernel.gamma,
            radius_sq=model.radius_sq,
            center_norm_sq=model.center_norm_sq,
            n_train=int(model.alpha.size),
            support_indices=model.support_vectors.one_based(),
            alpha=[float(a) for a in model.support_alpha],
            support_vectors=model.support_points.tolist(),
            training_indices=None
            if model.training_indices is None
            else model.training_indices.one_based(),
            training_n=None if model.training_indices is None else model.training_indices.n,
            dual_objective=model.dual_objective,
            converged=model.converged,
        )

    def to_model(self) -> SvddModel:
        support = IndexSet.from_one_based(self.support_indices, self.n_train)
        if len(self.alpha) != len(support) or len(self.support_vectors) != len(support):
            msg = "The numbers of support indices, weights and support vectors differ."
            raise DataFormatError(msg)
        alpha = np.zeros(self.n_train)
        alpha[support.indices] = self.alpha
        training = None
        if self.training_indices is not None and self.training_n is not None:
            training = IndexSet.from_one_based(self.training_indices, self.training_n)
        return SvddModel(
            alpha=alpha,
            support_vectors=support,
            support_points=np.array(self.support_vectors, dtype=float),
            radius_sq=self.radius_sq,
            center_norm_sq=self.center_norm_sq,
            kernel=KernelSpec(gamma=self.gamma),
            dual_objective=self.dual_objective,
            converged=self.converged,
            training_indices=training,
        )


def save_model(model: SvddModel, path: PathLike) -> None:
    content = json.dumps(SvddModelFile.from_model(model).model_dump(), indent=2)
    with Path(path).open("w", newline="\n") as f:
        f.write(content + "\n")


def load_model(path: PathLike) -> SvddModel:
    content = Path(path).read_text()
    try:
        model_file = SvddModelFile.model_validate_json(content)
    except ValueError as e:
        msg = f"'{path}' is not a valid model file: {e}"
        raise DataFormatError(msg) from e
    return model_file.to_model()
