# Copyright (c) 2025 The Remendo Developers.
# Distributed under the terms of the BSD 3-Clause License.
# SPDX-License-Identifier: BSD-3-Clause
#
"""
Test the variable declaration and cell enumeration.
"""

import numpy as np
import numpy.testing as npt
import pytest

from remendo._exceptions import ValidationError
from remendo._schema import Schema, enumerate_cells


@pytest.fixture
def schema():
    "A schema with two covariates and one unreportable level"
    return Schema.create(
        [("sex", ["M", "F"]), ("age", 3)],
        true_levels=["BA", "MA", "PhD", "None"],
        reported_levels=3,
    )


def test_schema_sizes(schema):
    "Check the derived counts"
    assert schema.shape == (2, 3)
    assert schema.covariate_names == ("sex", "age")
    assert schema.n_cells == 6
    assert schema.n_true == 4
    assert schema.n_reported == 3
    assert schema.forced_levels == (3,)
    assert schema.labels("age") == ("1", "2", "3")
    assert schema.labels("z") == ("BA", "MA", "PhD")


def test_schema_no_covariates():
    "A schema without covariates has a single cell"
    schema = Schema.create([], 3, 3)
    assert schema.n_cells == 1
    assert schema.cell_label(0) == "all"
    assert schema.forced_levels == ()
    assert enumerate_cells(schema)[0].levels == ()
    assert schema.encode_cell(np.zeros((0, 5), dtype=int)).tolist() == [0] * 5


def test_schema_cell_codes(schema):
    "Encoding and decoding cells should follow the enumeration order"
    cells = enumerate_cells(schema)
    assert len(cells) == schema.n_cells
    for cell in cells:
        assert schema.encode_cell(cell.levels) == cell.code
        assert schema.decode_cell(cell.code) == cell
    npt.assert_equal(schema.cell_levels()[4], [1, 1])
    assert schema.cell_label(4) == "sex=F, age=2"
    # Many cells at once with one row per covariate
    npt.assert_equal(schema.encode_cell([[0, 1, 1], [2, 0, 2]]), [2, 3, 5])


def test_schema_dict(schema):
    "Check conversion to and from dictionaries"
    document = schema.to_dict()
    assert document["covariates"][1] == {"name": "age", "levels": ["1", "2", "3"]}
    assert document["reported_levels"] == ["BA", "MA", "PhD"]
    assert Schema.from_dict(document) == schema


@pytest.mark.parametrize(
    ("arguments", "message"),
    [
        (([("a", 1)], 3, 2), "at least 2 levels"),
        (([("a", ["x", "x"])], 3, 2), "must be unique"),
        (([("y", 2)], 3, 2), "can't be 'y' or 'z'"),
        (([("a", 2), ("a", 3)], 3, 2), "Names must be unique"),
        (([], 3, 4), "Invalid number of reported levels"),
        (([], ["a", "b", "c"], ["a", "c"]), "must match the first true levels"),
    ],
)
def test_schema_invalid(arguments, message):
    "Make sure invalid declarations are rejected"
    with pytest.raises(ValidationError, match=message):
        Schema.create(*arguments)


def test_schema_from_dict_malformed():
    "Missing keys should raise a validation error"
    with pytest.raises(ValidationError, match="Invalid schema declaration"):
        Schema.from_dict({"covariates": [], "true_levels": 3})


def test_schema_invalid_levels(schema):
    "Unknown labels, covariates, and codes are rejected"
    with pytest.raises(ValidationError, match="Invalid level 'X'"):
        schema.level_code("sex", "X")
    with pytest.raises(ValidationError, match="Unknown covariate"):
        schema.covariate("race")
    with pytest.raises(ValidationError, match="Invalid cell code"):
        schema.decode_cell(6)
    with pytest.raises(ValidationError, match="Out of range"):
        schema.encode_cell((2, 0))
    with pytest.raises(ValidationError, match="one level per covariate"):
        schema.encode_cell((1,))
