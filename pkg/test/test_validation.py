# Copyright (c) 2025 The Remendo Developers.
# Distributed under the terms of the BSD 3-Clause License.
# SPDX-License-Identifier: BSD-3-Clause
#
"""
Test the input validation functions.
"""

import numpy as np
import pytest

from remendo._exceptions import ValidationError
from remendo._schema import Schema
from remendo._validation import (
    check_choice,
    check_positive,
    check_same_schema,
    check_simplex,
    check_square_symmetric,
)


def test_check_choice():
    "Make sure only listed values pass"
    check_choice("uniform", ("uniform", "categorical_by_truth"), name="kind")
    with pytest.raises(ValidationError, match="Invalid value for 'kind'"):
        check_choice("bla", ("uniform", "categorical_by_truth"), name="kind")


@pytest.mark.parametrize("values", [0, [1, -2], [1, np.inf], [np.nan]])
def test_check_positive_fails(values):
    "Zero, negative, and non-finite values aren't positive"
    with pytest.raises(ValidationError, match="All values must be > 0"):
        check_positive(values, name="weights")


def test_check_positive_passes():
    "Strictly positive finite values pass"
    check_positive([1e-10, 3, 1e10], name="weights")


@pytest.mark.parametrize(
    "probabilities",
    [
        [0.5, 0.6],
        [[0.5, 0.5], [1.1, -0.1]],
        [[[0.2, 0.2]]],
    ],
)
def test_check_simplex_fails(probabilities):
    "Negative entries or sums different from 1 are invalid"
    with pytest.raises(ValidationError, match="Invalid theta"):
        check_simplex(probabilities, name="theta")


def test_check_simplex_passes():
    "Any number of leading dimensions is allowed"
    check_simplex(np.full((2, 3, 4), 0.25), name="tables")
    check_simplex([1 / 3, 1 / 3, 1 / 3], name="theta")


def test_check_same_schema():
    "Schemas with different levels are incompatible"
    first = Schema.create([("sex", ("M", "F"))], ("a", "b", "c"), 2)
    check_same_schema(first, Schema.create([("sex", ("M", "F"))], ("a", "b", "c"), 2))
    with pytest.raises(ValidationError, match="Incompatible schemas"):
        check_same_schema(
            first, Schema.create([("sex", ("M", "F"))], ("a", "b", "c"), 3)
        )


@pytest.mark.parametrize(
    ("matrix", "message"),
    [
        (np.ones(3), "Must be square"),
        (np.ones((2, 3)), "Must be square"),
        ([[1, 2], [0, 1]], "not symmetric"),
        (np.array([np.eye(2), [[1, 1], [0, 1]]]), "not symmetric"),
    ],
)
def test_check_square_symmetric_fails(matrix, message):
    "Non-square and asymmetric matrices are invalid"
    with pytest.raises(ValidationError, match=message):
        check_square_symmetric(matrix, name="covariance")
