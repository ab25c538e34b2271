# Copyright (c) 2025 The Remendo Developers.
# Distributed under the terms of the BSD 3-Clause License.
# SPDX-License-Identifier: BSD-3-Clause
#
"""
Multiply-imputed datasets and their persistence.
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd

from ._datasets import ErrorProneDataset, dataset_table, load_dataset
from ._exceptions import ValidationError
from ._schema import Schema
from ._utils import file_digest, package_versions, read_manifest, write_manifest

logger = logging.getLogger(__name__)

TRACE_COLUMNS = ("imputation", "parameter", "group", "truth", "reported", "value")


@dataclass(frozen=True, eq=False)
class ImputationSet:
    """
    Completed versions of an error-prone dataset with imputed true values.

    Parameters
    ----------
    data : :class:`remendo.ErrorProneDataset`
        The error-prone records. Never modified.
    y : 2D array of int
        The 0-based imputed true level of each record in each imputation, with
        shape ``(n_imputations, n_records)``.
    label : str
        Name of the model that made the imputations (used in reports).
    provenance : dict
        JSON-compatible description of how the imputations were made (model
        specifications, configuration, seed, digests).
    traces : pandas.DataFrame or None
        Model parameters at every saved state in long format with columns
        ``imputation``, ``parameter``, ``group``, ``truth``, ``reported``, and
        ``value``.
    """

    data: ErrorProneDataset
    y: np.ndarray
    label: str = "imputed"
    provenance: dict = field(default_factory=dict)
    traces: pd.DataFrame = None

    def __post_init__(self):
        y = np.array(self.y, dtype=int, ndmin=2)
        if y.ndim != 2 or y.shape[1] != self.data.size:
            message = (
                f"Invalid imputations with shape {y.shape}. Expected "
                f"(n_imputations, {self.data.size})."
            )
            raise ValidationError(message)
        if y.shape[0] < 1:
            message = "Invalid imputations. Must have at least one imputation."
            raise ValidationError(message)
        n_true = self.data.schema.n_true
        if np.any(y < 0) or np.any(y >= n_true):
            message = f"Invalid imputations. Levels must be in [0, {n_true})."
            raise ValidationError(message)
        y.setflags(write=False)
        object.__setattr__(self, "y", y)
        if self.traces is not None:
            absent = [c for c in TRACE_COLUMNS if c not in self.traces.columns]
            if absent:
                message = f"Invalid parameter traces. Missing columns {absent}."
                raise ValidationError(message)

    @property
    def schema(self):
        "The variable declaration of the data."
        return self.data.schema

    @property
    def n_imputations(self):
        "The number of imputations (M)."
        return self.y.shape[0]

    def completed(self, imputation):
        """
        Build one completed dataset as a table with level labels.

        Parameters
        ----------
        imputation : int
            The 0-based index of the imputation.

        Returns
        -------
        table : pandas.DataFrame
            The columns of :func:`remendo.dataset_table` with the imputed
            true value ``y`` inserted before the report ``z``.
        """
        if not 0 <= imputation < self.n_imputations:
            message = (
                f"Invalid imputation '{imputation}'. Must be in "
                f"[0, {self.n_imputations})."
            )
            raise ValidationError(message)
        table = dataset_table(self.data)
        labels = np.asarray(self.schema.true_labels, dtype=object)
        table.insert(table.columns.get_loc("z"), "y", labels[self.y[imputation]])
        return table

    def _file_names(self):
        width = max(3, len(str(self.n_imputations)))
        return [f"imputation_{m + 1:0{width}d}.csv" for m in range(self.n_imputations)]

    def save(self, directory, *, long_format=False):
        """
        Write the imputations, parameter traces, and a manifest to a directory.

        Each completed dataset goes to its own CSV file. The manifest records
        the schema, provenance, package versions, and the digest of every
        file. Outputs are byte-identical for identical imputations.

        Parameters
        ----------
        directory : str or pathlib.Path
            Where to write. Created if it doesn't exist.
        long_format : bool
            If True, also write ``imputations_long.csv`` with one row per
            record and imputation (columns ``record``, ``imputation``, ``y``).
            Default is False.

        Returns
        -------
        manifest : pathlib.Path
            Path of the written manifest.
        """
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        names = self._file_names()
        for imputation, name in enumerate(names):
            self.completed(imputation).to_csv(
                directory / name, index=False, float_format="%.17g"
            )
        files = list(names)
        if self.traces is not None:
            self.traces.to_csv(
                directory / "parameters.csv", index=False, float_format="%.17g"
            )
            files.append("parameters.csv")
        if long_format:
            labels = np.asarray(self.schema.true_labels, dtype=object)
            records, imputations = np.meshgrid(
                np.arange(self.data.size), np.arange(self.n_imputations)
            )
            pd.DataFrame(
                {
                    "record": records.ravel() + 1,
                    "imputation": imputations.ravel() + 1,
                    "y": labels[self.y.ravel()],
                }
            ).to_csv(directory / "imputations_long.csv", index=False)
            files.append("imputations_long.csv")
        logger.info("Wrote %d imputations to '%s'.", self.n_imputations, directory)
        return write_manifest(
            directory,
            {
                "label": self.label,
                "n_imputations": self.n_imputations,
                "n_records": self.data.size,
                "imputation_files": names,
                "extras": [str(column) for column in self.data.extras.columns],
                "schema": self.schema.to_dict(),
                "provenance": self.provenance,
                "versions": package_versions(),
                "files": {name: file_digest(directory / name) for name in files},
            },
        )


def load_imputations(directory):
    """
    Read imputations written by :meth:`remendo.ImputationSet.save`.

    Parameters
    ----------
    directory : str or pathlib.Path
        The directory with the manifest and imputation files.

    Returns
    -------
    imputations : :class:`remendo.ImputationSet`

    Raises
    ------
    FileNotFoundError
        If the manifest is missing.
    ValidationError
        If the imputation files don't match the manifest.
    """
    directory = Path(directory)
    manifest = read_manifest(directory)
    schema = Schema.from_dict(manifest["schema"])
    names = manifest["imputation_files"]
    data = load_dataset(
        directory / names[0],
        "error_prone",
        schema,
        weight="weight",
        extras=manifest["extras"],
    )
    lookup = {label: code for code, label in enumerate(schema.true_labels)}
    y = []
    for name in names:
        column = pd.read_csv(
            directory / name, usecols=["y"], dtype=str, keep_default_na=False
        )["y"].map(lookup)
        if column.isna().any() or len(column) != data.size:
            message = f"Invalid imputation file '{directory / name}'."
            raise ValidationError(message)
        y.append(column.to_numpy(dtype=int))
    traces = None
    if (directory / "parameters.csv").exists():
        traces = pd.read_csv(
            directory / "parameters.csv",
            dtype={"group": str, "truth": str, "reported": str},
            keep_default_na=False,
        )
    return ImputationSet(
        data,
        np.array(y),
        label=manifest.get("label", directory.name),
        provenance=manifest.get("provenance", {}),
        traces=traces,
    )
