# Copyright (c) 2025 The Remendo Developers.
# Distributed under the terms of the BSD 3-Clause License.
# SPDX-License-Identifier: BSD-3-Clause
#
"""
Test the ready-made models of misreported education.
"""

import logging

import numpy as np
import numpy.testing as npt
import pytest

from remendo._exceptions import ValidationError
from remendo._models import error_groups, reporting_prior
from remendo._presets import CIA, PRESETS, REPORTED, build_preset, normalize_preset_name
from remendo._schema import Schema

EDUCATION = ["BA", "MA", "Prof", "PhD", "None"]


@pytest.fixture
def schema():
    "Sex and race with five true and four reported education levels"
    return Schema.create(
        [("sex", ["M", "F"]), ("black", ["no", "yes"])], EDUCATION, 4
    )


@pytest.mark.parametrize(
    ("name", "canonical"),
    [
        ("Model 1", "model1"),
        ("model_7", "model7"),
        ("CIA", "cia"),
        ("reported", "reported"),
    ],
)
def test_normalize_preset_name(name, canonical):
    "Case, spaces, and underscores are ignored"
    assert normalize_preset_name(name) == canonical


def test_normalize_preset_name_invalid():
    "Unknown presets are rejected"
    with pytest.raises(ValidationError, match="Invalid value for 'preset'"):
        normalize_preset_name("model8")


def test_markers(schema):
    "The comparators have no error or reporting models"
    assert build_preset("cia", schema) is CIA
    assert build_preset("Reported", schema) is REPORTED
    assert set(PRESETS) >= {"cia", "reported"}


def test_model1(schema):
    "Errors depend on the true level only"
    error, reporting = build_preset("model1", schema)
    assert error.term_names == ("intercept", "y=MA", "y=Prof", "y=PhD")
    assert error.engine == "general_logistic"
    assert error.priors == ((0.0, 10.0),) * 4
    assert reporting.kind == "categorical_by_truth"
    assert reporting.stratifier == ()


def test_model3_asymmetry(schema):
    "Black respondents get a coefficient for every level including the first"
    error, _ = build_preset("model3", schema)
    assert error.term_names == (
        "intercept",
        "y=MA & black=no",
        "y=Prof & black=no",
        "y=PhD & black=no",
        "y=BA & black=yes",
        "y=MA & black=yes",
        "y=Prof & black=yes",
        "y=PhD & black=yes",
    )


@pytest.mark.parametrize("name", ["model4", "model5", "model6", "model7"])
def test_sex_saturated_models(schema, name):
    "Models 4 to 7 have one error group per sex and reportable level"
    error, reporting = build_preset(name, schema)
    assert error.engine == "group_saturated"
    assert error.n_terms == 8
    assert reporting.stratifier == ("sex",)
    groups = error_groups(error, schema)
    assert np.unique(groups[:, :4]).size == 8


def test_model4_flat_priors(schema):
    "Model 4 has Beta(1, 1) and Dirichlet(1, 1, 1) priors"
    error, reporting = build_preset("model4", schema)
    assert error.priors == ((1.0, 1.0),) * 8
    concentration = reporting_prior(reporting, schema)
    npt.assert_allclose(concentration[:, 1], [[1, 0, 1, 1], [1, 0, 1, 1]])


def test_model5_priors(schema, caplog):
    "The men with the first level get the fixed priors and others are flat"
    with caplog.at_level(logging.WARNING):
        error, reporting = build_preset("model5", schema)
    assert "no error prior given for 7 groups" in caplog.text
    assert error.priors[0] == (0.76, 14.24)
    assert error.priors[1:] == ((1.0, 1.0),) * 7
    concentration = reporting_prior(reporting, schema)
    npt.assert_allclose(concentration[0, 0], [0, 3.54, 1.27, 0.19])
    npt.assert_allclose(concentration[1, 0], [0, 1, 1, 1])


def test_model6_priors(schema):
    "The prior of men with the first level has a sample size of 53,586"
    error_priors = {"y=MA & sex=M": (5.0, 95.0), "y=BA & sex=F": (2.0, 98.0)}
    reporting_priors = {("F", "PhD"): (1.0, 2.0, 3.0)}
    error, reporting = build_preset(
        "model6",
        schema,
        error_priors=error_priors,
        reporting_priors=reporting_priors,
    )
    a, b = error.priors[0]
    assert (a, b) == (2724.2, 50862.0)
    npt.assert_allclose(a + b, 53586.2)
    assert error.priors[error.term_names.index("y=MA & sex=M")] == (5.0, 95.0)
    assert error.priors[error.term_names.index("y=BA & sex=F")] == (2.0, 98.0)
    concentration = reporting_prior(reporting, schema)
    npt.assert_allclose(concentration[0, 0], [0, 2235.3, 799.7, 123.1])
    npt.assert_allclose(concentration[1, 3], [1, 2, 3, 0])


def test_model7_priors(schema):
    "Every group error rate has prior mean 0.005"
    error, _ = build_preset("model7", schema)
    assert error.priors == ((500.0, 99500.0),) * 8
    a, b = error.priors[0]
    npt.assert_allclose(a / (a + b), 0.005)


def test_preset_mapping():
    "Covariates and levels with other names can be mapped"
    schema = Schema.create([("gender", ["male", "female"])], EDUCATION, 4)
    error, reporting = build_preset(
        "model2",
        schema,
        covariate_names={"sex": "gender"},
        level_names={"sex": ("male", "female")},
    )
    assert error.term_names[1] == "y=MA & gender=male"
    error, reporting = build_preset(
        "model4",
        schema,
        covariate_names={"sex": "gender"},
        level_names={"sex": ("male", "female")},
    )
    assert reporting.stratifier == ("gender",)


def test_preset_incompatible_schema():
    "Presets list the missing covariates and levels"
    schema = Schema.create([("age", 4)], EDUCATION, 4)
    with pytest.raises(ValidationError, match="'sex' is missing from the schema"):
        build_preset("model2", schema)
    schema = Schema.create([("sex", ["1", "2"])], EDUCATION, 4)
    with pytest.raises(ValidationError, match=r"levels \['M', 'F'\]"):
        build_preset("model4", schema)
    schema = Schema.create([("sex", ["M", "F"])], 4, 3)
    with pytest.raises(ValidationError, match="exactly 4 reported levels"):
        build_preset("model5", schema)
