# Copyright (c) 2025 The Remendo Developers.
# Distributed under the terms of the BSD 3-Clause License.
# SPDX-License-Identifier: BSD-3-Clause
#
"""
Functions for validating inputs and outputs.
"""

import numpy as np

from ._exceptions import ValidationError


def check_choice(value, valid, *, name):
    """
    Check if an argument takes one of the allowed values.

    Parameters
    ----------
    value : str
        The value of the argument given to a function.
    valid : list or tuple
        The list of valid values for the argument.
    name : str
        The name of the argument, used in the error message.

    Raises
    ------
    ValidationError
        In case the argument is not in the list of valid values.
    """
    if value not in valid:
        message = (
            f"Invalid value for '{name}' argument '{value}'. "
            f"Should be one of {tuple(valid)}."
        )
        raise ValidationError(message)


def check_positive(values, *, name):
    """
    Check that all values are finite and strictly positive.

    Parameters
    ----------
    values : float or array
        The value(s) to check.
    name : str
        What the values represent, used in the error message.

    Raises
    ------
    ValidationError
        If any value is not finite or is <= 0.
    """
    values = np.asarray(values, dtype=float)
    bad = ~np.isfinite(values) | (values <= 0)
    if np.any(bad):
        offending = values[bad].ravel()[:5]
        message = f"Invalid {name}. All values must be > 0 but got: {offending}."
        raise ValidationError(message)


def check_simplex(probabilities, *, name, atol=1e-8):
    """
    Check that probability vectors are non-negative and sum to 1.

    The last axis of the array is taken as the probability vector. Any number
    of leading dimensions is allowed.

    Parameters
    ----------
    probabilities : array
        The probabilities to check.
    name : str
        What the probabilities represent, used in the error message.
    atol : float
        Absolute tolerance for the sum to 1.

    Raises
    ------
    ValidationError
        If any vector has negative entries or doesn't sum to 1.

    Examples
    --------
    >>> check_simplex([[0.5, 0.5], [0.1, 0.9]], name="theta")
    """
    probabilities = np.asarray(probabilities, dtype=float)
    sums = probabilities.sum(axis=-1)
    if np.any(probabilities < 0) or not np.allclose(sums, 1, rtol=0, atol=atol):
        message = (
            f"Invalid {name}. Probabilities must be >= 0 and sum to 1 along the "
            f"last axis but got sums {np.atleast_1d(sums)[:5]}."
        )
        raise ValidationError(message)


def check_same_schema(first, second):
    """
    Check that two schemas declare the same variables and levels.

    Parameters
    ----------
    first, second : :class:`remendo.Schema`
        The schemas to compare.

    Raises
    ------
    ValidationError
        If the schemas differ.
    """
    if first != second:
        message = (
            "Incompatible schemas. Both sides must declare identical covariates "
            f"and levels but got '{first}' and '{second}'."
        )
        raise ValidationError(message)


def check_square_symmetric(matrix, *, name, rtol=1e-8):
    """
    Check that the given matrix (or stack of matrices) is square and symmetric.

    Parameters
    ----------
    matrix : array
        A single matrix or an array of matrices along the last two axes.
    name : str
        What the matrix represents, used in the error message.
    rtol : float
        Relative tolerance for the symmetry check.

    Raises
    ------
    ValidationError
        If the matrices aren't square or aren't symmetric.
    """
    matrix = np.asarray(matrix, dtype=float)
    if matrix.ndim < 2 or matrix.shape[-1] != matrix.shape[-2]:
        message = f"Invalid {name}. Must be square but has shape {matrix.shape}."
        raise ValidationError(message)
    transposed = np.swapaxes(matrix, -1, -2)
    scale = max(np.abs(matrix).max(initial=0), 1)
    if not np.allclose(matrix, transposed, rtol=0, atol=rtol * scale):
        message = f"Invalid {name}. The matrix is not symmetric."
        raise ValidationError(message)
