# Copyright (c) 2025 The Remendo Developers.
# Distributed under the terms of the BSD 3-Clause License.
# SPDX-License-Identifier: BSD-3-Clause
#
"""
Gold-standard and error-prone datasets and their CSV input/output.
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd

from ._exceptions import ValidationError
from ._validation import check_choice

logger = logging.getLogger(__name__)

#: Name of the column that marks a simulation truth ledger file.
LEDGER_MARKER = "population_count"

#: Name of the directory where truth ledgers are written.
LEDGER_DIRECTORY = "truth"


def _readonly(array, dtype):
    array = np.array(array, dtype=dtype)
    array.setflags(write=False)
    return array


def _check_records(schema, cells, values, weights, variable):
    """
    Check the shapes and ranges of record arrays.
    """
    size = cells.size
    if values.size != size or weights.size != size:
        message = (
            f"Invalid dataset. Got {size} cells, {values.size} values of "
            f"'{variable}', and {weights.size} weights."
        )
        raise ValidationError(message)
    if np.any(cells < 0) or np.any(cells >= schema.n_cells):
        message = f"Invalid dataset. Cell codes must be in [0, {schema.n_cells})."
        raise ValidationError(message)
    n_levels = len(schema.labels(variable))
    if np.any(values < 0) or np.any(values >= n_levels):
        message = (
            f"Invalid dataset. Codes of '{variable}' must be in [0, {n_levels})."
        )
        raise ValidationError(message)
    if np.any(~np.isfinite(weights)) or np.any(weights <= 0):
        message = "Invalid dataset. All weights must be finite and > 0."
        raise ValidationError(message)


@dataclass(frozen=True, eq=False)
class GoldDataset:
    """
    Weighted records with the true value Y observed (but not Z).

    Arrays are read-only after creation so datasets can be safely shared.

    Parameters
    ----------
    schema : :class:`remendo.Schema`
        The variable declaration.
    cells : array of int
        The cell code of each record.
    y : array of int
        The 0-based true level of each record.
    weights : array of float
        The survey weight of each record. All must be > 0.
    """

    schema: object
    cells: np.ndarray
    y: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "cells", _readonly(self.cells, int))
        object.__setattr__(self, "y", _readonly(self.y, int))
        object.__setattr__(self, "weights", _readonly(self.weights, float))
        _check_records(self.schema, self.cells, self.y, self.weights, "y")

    @property
    def size(self):
        "The number of records (n_G)."
        return self.cells.size

    def cell_counts(self):
        """
        Count the records in each cell.

        Returns
        -------
        counts : array of int
            Number of records per cell code. Sums to the number of records.
        """
        return np.bincount(self.cells, minlength=self.schema.n_cells)


@dataclass(frozen=True, eq=False)
class ErrorProneDataset:
    """
    Weighted records with the reported value Z observed (but not Y).

    Arrays are read-only after creation so datasets can be safely shared.

    Parameters
    ----------
    schema : :class:`remendo.Schema`
        The variable declaration.
    cells : array of int
        The cell code of each record.
    z : array of int
        The 0-based reported level of each record.
    weights : array of float
        The survey weight of each record. All must be > 0.
    extras : pandas.DataFrame or None
        Other variables of each record (no counterpart in the gold file).
        Never used by the sampler, only carried through to the outputs.
    """

    schema: object
    cells: np.ndarray
    z: np.ndarray
    weights: np.ndarray
    extras: pd.DataFrame = field(default=None)

    def __post_init__(self):
        object.__setattr__(self, "cells", _readonly(self.cells, int))
        object.__setattr__(self, "z", _readonly(self.z, int))
        object.__setattr__(self, "weights", _readonly(self.weights, float))
        _check_records(self.schema, self.cells, self.z, self.weights, "z")
        extras = self.extras
        if extras is None:
            extras = pd.DataFrame(index=pd.RangeIndex(self.cells.size))
        elif len(extras) != self.cells.size:
            message = (
                f"Invalid extras. Got {len(extras)} rows for {self.cells.size} "
                "records."
            )
            raise ValidationError(message)
        object.__setattr__(self, "extras", extras.reset_index(drop=True))

    @property
    def size(self):
        "The number of records (n_E)."
        return self.cells.size

    def cell_counts(self):
        """
        Count the records in each cell.

        Returns
        -------
        counts : array of int
            Number of records per cell code. Sums to the number of records.
        """
        return np.bincount(self.cells, minlength=self.schema.n_cells)


def _check_not_ledger(path, table):
    in_ledger_directory = Path(path).resolve().parent.name == LEDGER_DIRECTORY
    if in_ledger_directory or LEDGER_MARKER in table.columns:
        message = (
            f"Refusing to load '{path}'. It is a simulation truth ledger and "
            "can't be used for estimation."
        )
        raise ValidationError(message)


def _map_levels(table, column, labels, schema_variable):
    """
    Convert a column of labels into 0-based codes, naming the first bad row.
    """
    lookup = {label: code for code, label in enumerate(labels)}
    values = table[column]
    missing = values.isna()
    codes = values.map(lookup)
    bad = missing | codes.isna()
    if bad.any():
        row = int(np.flatnonzero(bad.to_numpy())[0])
        if missing.iloc[row]:
            what = "Missing value"
        else:
            what = f"Unknown level '{values.iloc[row]}'"
        message = (
            f"{what} in row {row + 1}, column '{column}' (variable "
            f"'{schema_variable}'). Valid levels: {labels}."
        )
        raise ValidationError(message)
    return codes.to_numpy(dtype=int)


def _read_weights(table, column):
    values = pd.to_numeric(table[column], errors="coerce").to_numpy(dtype=float)
    bad = ~np.isfinite(values) | (values <= 0)
    if bad.any():
        row = int(np.flatnonzero(bad)[0])
        message = (
            f"Invalid weight '{table[column].iloc[row]}' in row {row + 1}, column "
            f"'{column}'. Weights must be numbers > 0."
        )
        raise ValidationError(message)
    return values


def load_dataset(path, role, schema, *, columns=None, weight=None, extras=None):
    """
    Read and validate a gold-standard or error-prone CSV file.

    The file must be UTF-8 with a header row. Categorical columns must contain
    the level labels declared in the schema (1-based codes for unlabeled
    variables). Missing values aren't accepted in bound columns.

    Parameters
    ----------
    path : str or pathlib.Path
        The CSV file.
    role : str
        Either ``"gold"`` (requires the true value ``y``) or ``"error_prone"``
        (requires the reported value ``z``).
    schema : :class:`remendo.Schema`
        The variable declaration.
    columns : dict or None
        Maps schema variables (covariate names, ``"y"``, or ``"z"``) to the
        column names in the file. Variables not in the dictionary are read
        from columns with the same name. Default is None.
    weight : str or None
        Name of the weight column. If None, all weights are 1 (unweighted
        simple random sample). Default is None.
    extras : list of str or None
        Columns of the error-prone file to carry through imputation. If None,
        all columns not bound to schema variables or weights are carried.
        Ignored for the gold file. Default is None.

    Returns
    -------
    dataset : :class:`remendo.GoldDataset` or :class:`remendo.ErrorProneDataset`

    Raises
    ------
    ValidationError
        If columns are missing, contain unknown levels or missing values, or
        if weights are not positive numbers.
    """
    check_choice(role, ("gold", "error_prone"), name="role")
    columns = dict(columns or {})
    variable = "y" if role == "gold" else "z"
    bound = {name: columns.get(name, name) for name in schema.covariate_names}
    bound[variable] = columns.get(variable, variable)
    required = [*bound.values()]
    if weight is not None:
        required.append(weight)
    table = pd.read_csv(
        path,
        encoding="utf-8",
        dtype=dict.fromkeys(bound.values(), str),
        keep_default_na=False,
        na_values={column: [""] for column in bound.values()},
    )
    _check_not_ledger(path, table)
    absent = [column for column in required if column not in table.columns]
    if absent:
        message = (
            f"Missing columns {absent} in '{path}'. Found columns: "
            f"{list(table.columns)}."
        )
        raise ValidationError(message)
    cells = schema.encode_cell(
        np.array(
            [
                _map_levels(table, bound[name], schema.labels(name), name)
                for name in schema.covariate_names
            ]
        ).reshape(len(schema.covariate_names), len(table))
    )
    cells = np.atleast_1d(cells)
    values = _map_levels(table, bound[variable], schema.labels(variable), variable)
    if weight is None:
        weights = np.ones(len(table))
    else:
        weights = _read_weights(table, weight)
    logger.info("Read %d records from '%s' as %s data.", len(table), path, role)
    if role == "gold":
        dataset = GoldDataset(schema, cells, values, weights)
        empty = np.flatnonzero(dataset.cell_counts() == 0)
        if empty.size:
            logger.warning(
                "Gold-standard file has no records in %d of %d cells: %s",
                empty.size,
                schema.n_cells,
                [schema.cell_label(code) for code in empty],
            )
        return dataset
    used = {*bound.values(), weight}
    if extras is None:
        extras = [column for column in table.columns if column not in used]
    absent = [column for column in extras if column not in table.columns]
    if absent:
        message = f"Missing extra columns {absent} in '{path}'."
        raise ValidationError(message)
    return ErrorProneDataset(schema, cells, values, weights, table[list(extras)])


def dataset_table(dataset):
    """
    Convert a dataset into a table with level labels.

    Parameters
    ----------
    dataset : :class:`remendo.GoldDataset` or :class:`remendo.ErrorProneDataset`
        The dataset to convert.

    Returns
    -------
    table : pandas.DataFrame
        One column per covariate, then ``y`` or ``z``, then ``weight``, then
        any extras (error-prone only). Categorical columns contain labels.
    """
    schema = dataset.schema
    levels = schema.cell_levels()[dataset.cells]
    table = pd.DataFrame(
        {
            covariate.name: np.asarray(covariate.labels, dtype=object)[levels[:, i]]
            for i, covariate in enumerate(schema.covariates)
        }
    )
    if isinstance(dataset, GoldDataset):
        table["y"] = np.asarray(schema.true_labels, dtype=object)[dataset.y]
    else:
        table["z"] = np.asarray(schema.reported_labels, dtype=object)[dataset.z]
    table["weight"] = dataset.weights
    if isinstance(dataset, ErrorProneDataset):
        table = pd.concat([table, dataset.extras], axis=1)
    return table


def write_dataset(dataset, path):
    """
    Write a dataset to a CSV file that :func:`remendo.load_dataset` can read.

    Parameters
    ----------
    dataset : :class:`remendo.GoldDataset` or :class:`remendo.ErrorProneDataset`
        The dataset to write.
    path : str or pathlib.Path
        The output CSV file. Written with columns from
        :func:`remendo.dataset_table`, so it must be loaded with
        ``weight="weight"``.
    """
    dataset_table(dataset).to_csv(path, index=False, float_format="%.17g")
