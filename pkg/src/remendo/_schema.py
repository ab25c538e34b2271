# Copyright (c) 2025 The Remendo Developers.
# Distributed under the terms of the BSD 3-Clause License.
# SPDX-License-Identifier: BSD-3-Clause
#
"""
The harmonized variable declaration shared by the gold-standard and
error-prone files, and the enumeration of covariate cells.
"""

from dataclasses import dataclass

import numpy as np

from ._exceptions import ValidationError


def _make_labels(levels, name):
    """
    Convert a level count or a list of labels into a tuple of labels.
    """
    if isinstance(levels, (int, np.integer)):
        labels = tuple(str(i + 1) for i in range(int(levels)))
    else:
        labels = tuple(str(label) for label in levels)
    if len(labels) < 2:
        message = f"Invalid levels for '{name}'. Must have at least 2 levels."
        raise ValidationError(message)
    if len(set(labels)) != len(labels):
        message = f"Invalid levels for '{name}'. Labels must be unique: {labels}."
        raise ValidationError(message)
    return labels


@dataclass(frozen=True)
class Covariate:
    """
    A categorical covariate measured without error in both files.

    Parameters
    ----------
    name : str
        The name of the variable.
    labels : tuple of str
        The labels of each level, in order. Unlabeled variables use the
        1-based codes ``"1"``, ``"2"``, etc.
    """

    name: str
    labels: tuple

    @property
    def size(self):
        "The number of levels of the covariate."
        return len(self.labels)


@dataclass(frozen=True)
class CellIndex:
    """
    A combination of covariate levels (a cell).

    Parameters
    ----------
    levels : tuple of int
        The 0-based level of each covariate, in schema order.
    code : int
        The dense integer code of the cell in ``[0, n_cells)``.
    """

    levels: tuple
    code: int


@dataclass(frozen=True)
class Schema:
    """
    Declaration of the covariates, true levels, and reported levels.

    The reported levels are identified with the first ``n_reported`` true
    levels. True levels beyond those are "unreportable": individuals with such
    a true value always have a reporting error.

    Use :meth:`Schema.create` to build a schema from level counts or labels.

    Parameters
    ----------
    covariates : tuple of :class:`remendo.Covariate`
        The common covariates X, in order.
    true_labels : tuple of str
        Labels of the levels of the true value Y.
    reported_labels : tuple of str
        Labels of the levels of the reported value Z. Must be equal to the
        first ``len(reported_labels)`` true labels.
    """

    covariates: tuple
    true_labels: tuple
    reported_labels: tuple

    def __post_init__(self):
        if len(self.reported_labels) > len(self.true_labels):
            message = (
                f"Invalid schema. The number of reported levels "
                f"({len(self.reported_labels)}) can't exceed the number of true "
                f"levels ({len(self.true_labels)})."
            )
            raise ValidationError(message)
        if self.true_labels[: len(self.reported_labels)] != self.reported_labels:
            message = (
                "Invalid schema. Reported levels must match the first true levels "
                f"but got {self.reported_labels} and {self.true_labels}."
            )
            raise ValidationError(message)
        names = [covariate.name for covariate in self.covariates]
        if len(set(names)) != len(names) or {"y", "z"} & set(names):
            message = (
                f"Invalid covariate names {names}. Names must be unique and "
                "can't be 'y' or 'z'."
            )
            raise ValidationError(message)

    @classmethod
    def create(cls, covariates, true_levels, reported_levels):
        """
        Create a schema from level counts or labels.

        Parameters
        ----------
        covariates : list of (name, levels)
            Each covariate name followed by either its number of levels or
            a list of level labels.
        true_levels : int or list of str
            Number of levels or labels of the true value Y.
        reported_levels : int or list of str
            Number of levels or labels of the reported value Z. If a number,
            labels are taken from the first true levels.

        Returns
        -------
        schema : :class:`remendo.Schema`

        Examples
        --------
        >>> schema = Schema.create(
        ...     [("sex", ["M", "F"]), ("age", 4)],
        ...     true_levels=["BA", "MA", "Prof", "PhD", "None"],
        ...     reported_levels=4,
        ... )
        >>> print(schema.n_cells, schema.n_true, schema.n_reported)
        8 5 4
        >>> print(schema.reported_labels)
        ('BA', 'MA', 'Prof', 'PhD')
        """
        covariates = tuple(
            Covariate(str(name), _make_labels(levels, name))
            for name, levels in covariates
        )
        true_labels = _make_labels(true_levels, "y")
        if isinstance(reported_levels, (int, np.integer)):
            if not 2 <= reported_levels <= len(true_labels):
                message = (
                    f"Invalid number of reported levels '{reported_levels}'. "
                    f"Must be in range [2, {len(true_labels)}]."
                )
                raise ValidationError(message)
            reported_labels = true_labels[:reported_levels]
        else:
            reported_labels = _make_labels(reported_levels, "z")
        return cls(covariates, true_labels, reported_labels)

    @classmethod
    def from_dict(cls, document):
        """
        Create a schema from a JSON-compatible dictionary.

        Parameters
        ----------
        document : dict
            Must have keys ``"covariates"`` (list of ``{"name": ..., "levels":
            ...}``), ``"true_levels"``, and ``"reported_levels"``. Levels can
            be counts or lists of labels.

        Returns
        -------
        schema : :class:`remendo.Schema`
        """
        try:
            covariates = [(c["name"], c["levels"]) for c in document["covariates"]]
            return cls.create(
                covariates, document["true_levels"], document["reported_levels"]
            )
        except (KeyError, TypeError) as error:
            message = f"Invalid schema declaration. Missing or malformed {error}."
            raise ValidationError(message) from error

    def to_dict(self):
        """
        Convert the schema to a JSON-compatible dictionary.

        Returns
        -------
        document : dict
            Can be converted back with :meth:`Schema.from_dict`.
        """
        return {
            "covariates": [
                {"name": c.name, "levels": list(c.labels)} for c in self.covariates
            ],
            "true_levels": list(self.true_labels),
            "reported_levels": list(self.reported_labels),
        }

    @property
    def shape(self):
        "The number of levels of each covariate."
        return tuple(covariate.size for covariate in self.covariates)

    @property
    def covariate_names(self):
        "The names of the covariates in order."
        return tuple(covariate.name for covariate in self.covariates)

    @property
    def n_cells(self):
        "The number of cells, the product of the covariate level counts."
        return int(np.prod(self.shape, dtype=int))

    @property
    def n_true(self):
        "The number of levels of the true value Y."
        return len(self.true_labels)

    @property
    def n_reported(self):
        "The number of levels of the reported value Z."
        return len(self.reported_labels)

    @property
    def forced_levels(self):
        "The 0-based true levels that can't be reported (always an error)."
        return tuple(range(self.n_reported, self.n_true))

    def covariate(self, name):
        """
        Get the covariate with the given name.

        Parameters
        ----------
        name : str
            The covariate name.

        Returns
        -------
        covariate : :class:`remendo.Covariate`

        Raises
        ------
        ValidationError
            If there is no such covariate.
        """
        for covariate in self.covariates:
            if covariate.name == name:
                return covariate
        message = (
            f"Unknown covariate '{name}'. Valid covariates: {self.covariate_names}."
        )
        raise ValidationError(message)

    def labels(self, variable):
        """
        Get the level labels of a covariate or of ``"y"`` or ``"z"``.

        Parameters
        ----------
        variable : str
            A covariate name, ``"y"`` for the true value, or ``"z"`` for the
            reported value.

        Returns
        -------
        labels : tuple of str
        """
        if variable == "y":
            return self.true_labels
        if variable == "z":
            return self.reported_labels
        return self.covariate(variable).labels

    def level_code(self, variable, label):
        """
        Convert a level label into its 0-based code.

        Parameters
        ----------
        variable : str
            A covariate name, ``"y"``, or ``"z"``.
        label : str
            The level label.

        Returns
        -------
        code : int

        Raises
        ------
        ValidationError
            If the label isn't a level of the variable.

        Examples
        --------
        >>> schema = Schema.create([("sex", ["M", "F"])], ["BA", "MA"], 2)
        >>> schema.level_code("sex", "F")
        1
        >>> schema.level_code("y", "BA")
        0
        """
        labels = self.labels(variable)
        try:
            return labels.index(str(label))
        except ValueError:
            message = (
                f"Invalid level '{label}' for variable '{variable}'. "
                f"Valid levels: {labels}."
            )
            raise ValidationError(message) from None

    def encode_cell(self, levels):
        """
        Convert the 0-based levels of each covariate into a dense cell code.

        The last covariate varies fastest, matching the order of
        :func:`remendo.enumerate_cells`.

        Parameters
        ----------
        levels : tuple of int or array
            One 0-based level per covariate. Can also be a 2D array with one
            row per covariate to encode many cells at once.

        Returns
        -------
        code : int or array of int

        Examples
        --------
        >>> schema = Schema.create([("a", 2), ("b", 3), ("c", 2)], 2, 2)
        >>> schema.encode_cell((1, 2, 1))
        11
        >>> schema.decode_cell(11)
        CellIndex(levels=(1, 2, 1), code=11)
        """
        levels = np.asarray(levels, dtype=int)
        if levels.shape[0] != len(self.covariates):
            message = (
                f"Invalid cell levels {levels}. Expected one level per covariate "
                f"({len(self.covariates)})."
            )
            raise ValidationError(message)
        if np.any(levels < 0) or np.any(levels.T >= np.array(self.shape)):
            message = f"Invalid cell levels {levels.T}. Out of range for {self.shape}."
            raise ValidationError(message)
        if not self.covariates:
            code = np.zeros(levels.shape[1:], dtype=int)
        else:
            code = np.ravel_multi_index(tuple(levels), self.shape)
        if np.ndim(code) == 0:
            return int(code)
        return code

    def decode_cell(self, code):
        """
        Convert a dense cell code into a :class:`remendo.CellIndex`.

        Parameters
        ----------
        code : int
            The cell code in ``[0, n_cells)``.

        Returns
        -------
        cell : :class:`remendo.CellIndex`
        """
        if not 0 <= code < self.n_cells:
            message = f"Invalid cell code '{code}'. Must be in [0, {self.n_cells})."
            raise ValidationError(message)
        if not self.covariates:
            return CellIndex((), int(code))
        levels = np.unravel_index(int(code), self.shape)
        return CellIndex(tuple(int(level) for level in levels), int(code))

    def cell_levels(self):
        """
        Get the 0-based level of every covariate for every cell.

        Returns
        -------
        levels : 2D array of int
            Array with shape ``(n_cells, n_covariates)``. Row ``c`` has the
            levels of the cell with code ``c``.
        """
        if not self.covariates:
            return np.zeros((1, 0), dtype=int)
        grid = np.indices(self.shape).reshape(len(self.shape), -1)
        return grid.T

    def cell_label(self, code):
        """
        Describe a cell using the covariate labels.

        Parameters
        ----------
        code : int
            The cell code.

        Returns
        -------
        label : str
            Text like ``"sex=M, age=2"``.
        """
        if not self.covariates:
            return "all"
        cell = self.decode_cell(code)
        return ", ".join(
            f"{covariate.name}={covariate.labels[level]}"
            for covariate, level in zip(self.covariates, cell.levels, strict=True)
        )


def enumerate_cells(schema):
    """
    List all cells (combinations of covariate levels) of a schema.

    Parameters
    ----------
    schema : :class:`remendo.Schema`
        The variable declaration.

    Returns
    -------
    cells : list of :class:`remendo.CellIndex`
        Exactly ``schema.n_cells`` distinct cells in lexicographic order of
        their levels (last covariate varies fastest).

    Examples
    --------
    >>> schema = Schema.create([("sex", 2), ("black", 2)], 3, 3)
    >>> for cell in enumerate_cells(schema):
    ...     print(cell.code, cell.levels)
    0 (0, 0)
    1 (0, 1)
    2 (1, 0)
    3 (1, 1)
    """
    return [
        CellIndex(tuple(int(level) for level in levels), code)
        for code, levels in enumerate(schema.cell_levels())
    ]
