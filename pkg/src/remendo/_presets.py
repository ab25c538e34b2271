# Copyright (c) 2025 The Remendo Developers.
# Distributed under the terms of the BSD 3-Clause License.
# SPDX-License-Identifier: BSD-3-Clause
#
"""
Ready-made error and reporting models for education reports in surveys.
"""

import logging
from dataclasses import dataclass

from ._exceptions import ValidationError
from ._models import ErrorModelSpec, ReportingModelSpec, Term
from ._validation import check_choice

logger = logging.getLogger(__name__)

PRESETS = (
    "model1",
    "model2",
    "model3",
    "model4",
    "model5",
    "model6",
    "model7",
    "cia",
    "reported",
)

#: Error rate and reporting priors of males in the lowest true level.
INFORMATIVE_PRIORS = {
    "model5": ((0.76, 14.24), (3.54, 1.27, 0.19)),
    "model6": ((2724.2, 50862.0), (2235.3, 799.7, 123.1)),
}

#: Error rate prior of every group with strong belief in correct reports.
NEAR_ZERO_ERROR_PRIOR = (500.0, 99500.0)

DEFAULT_COVARIATE_NAMES = {"sex": "sex", "black": "black"}
DEFAULT_LEVEL_NAMES = {"sex": ("M", "F"), "black": ("no", "yes")}


@dataclass(frozen=True)
class ConditionalIndependence:
    """
    Marker for imputing true values from the covariates alone, ignoring the
    reports (the conditional independence assumption).
    """

    name: str = "cia"


@dataclass(frozen=True)
class AsReported:
    """
    Marker for taking the reports as the true values, without adjustment.
    """

    name: str = "reported"


CIA = ConditionalIndependence()
REPORTED = AsReported()


def normalize_preset_name(name):
    """
    Convert a preset name into the canonical form used in ``PRESETS``.

    Examples
    --------
    >>> normalize_preset_name("Model 4")
    'model4'
    >>> normalize_preset_name("CIA")
    'cia'
    """
    canonical = str(name).lower().replace(" ", "").replace("_", "").replace("-", "")
    check_choice(canonical, PRESETS, name="preset")
    return canonical


def _resolve_role(schema, role, covariate_names, level_names):
    """
    Find the covariate and level labels playing a role such as "sex".
    """
    covariate = covariate_names.get(role, role)
    levels = tuple(level_names.get(role, DEFAULT_LEVEL_NAMES[role]))
    if covariate not in schema.covariate_names:
        message = (
            f"Preset requires a covariate for '{role}' but '{covariate}' is "
            f"missing from the schema covariates {schema.covariate_names}. "
            "Provide a mapping with 'covariate_names'."
        )
        raise ValidationError(message)
    labels = schema.labels(covariate)
    absent = [level for level in levels if level not in labels]
    if absent:
        message = (
            f"Preset requires levels {absent} of covariate '{covariate}' but it "
            f"only has {labels}. Provide a mapping with 'level_names'."
        )
        raise ValidationError(message)
    return covariate, levels


def _interaction_terms(schema, covariate, level, start):
    return [
        Term(truth, covariate, level)
        for truth in schema.true_labels[start : schema.n_reported]
    ]


def _informative_priors(
    name, schema, terms, sex, male, error_priors, reporting_priors
):
    """
    Fill the priors of Models 5 and 6 from the fixed values and prior files.
    """
    if schema.n_reported != 4:
        message = (
            f"Preset '{name}' requires exactly 4 reported levels but the schema "
            f"has {schema.n_reported}."
        )
        raise ValidationError(message)
    error_fixed, reporting_fixed = INFORMATIVE_PRIORS[name]
    error_table = {"intercept": error_fixed, **(error_priors or {})}
    missing = [term.name for term in terms if term.name not in error_table]
    if missing:
        logger.warning(
            "Preset '%s': no error prior given for %d groups. Using Beta(1, 1) for %s.",
            name,
            len(missing),
            missing,
        )
    priors = [error_table.get(term.name, (1.0, 1.0)) for term in terms]
    reporting_table = {(male, schema.true_labels[0]): reporting_fixed}
    reporting_table.update(reporting_priors or {})
    expected = len(schema.labels(sex)) * schema.n_true
    if len(reporting_table) < expected:
        logger.warning(
            "Preset '%s': reporting priors given for %d of %d tables. "
            "Using Dirichlet(1, ..., 1) for the others.",
            name,
            len(reporting_table),
            expected,
        )
    return priors, reporting_table


def build_preset(
    name,
    schema,
    *,
    covariate_names=None,
    level_names=None,
    error_priors=None,
    reporting_priors=None,
):
    """
    Build one of the ready-made models of misreported education.

    The error models are logistic regressions on indicators of the true
    level, possibly interacted with sex or race. Levels are taken from the
    schema: ``k`` runs over the reportable true levels and ``k = 1`` (the
    first) is the baseline absorbed by the intercept.

    * ``"model1"``: errors depend on the true level. Reporting tables depend
      on the true level.
    * ``"model2"``: errors depend on the true level for men only.
    * ``"model3"``: errors depend on the true level and race. Black
      respondents get a coefficient for every level including the first.
    * ``"model4"``: errors depend on the true level and sex. Reporting tables
      depend on the true level and sex.
    * ``"model5"``, ``"model6"``: Model 4 with informative priors. The priors
      of men in the first true level are fixed. Other groups come from
      ``error_priors`` and ``reporting_priors`` or default to flat.
    * ``"model7"``: Model 4 with a Beta(500, 99500) prior on every group
      error rate (mean 0.005).
    * ``"cia"``: returns :data:`remendo.CIA` (impute from covariates only).
    * ``"reported"``: returns :data:`remendo.REPORTED` (no adjustment).

    Models 1 to 3 use the ``"general_logistic"`` engine with Normal(0, 10)
    priors. Models 4 to 7 use the ``"group_saturated"`` engine with one Beta
    prior per group error rate. All reporting models are
    ``"categorical_by_truth"``.

    Parameters
    ----------
    name : str
        The preset name (case, spaces, and underscores are ignored).
    schema : :class:`remendo.Schema`
        The variable declaration.
    covariate_names : dict or None
        Map the roles ``"sex"`` and ``"black"`` to covariate names of the
        schema. Default maps each role to itself.
    level_names : dict or None
        Map each role to the labels of its two levels: (male, female) and
        (not black, black). Default is ``("M", "F")`` and ``("no", "yes")``.
    error_priors : dict or None
        Beta priors keyed by term name, as read by
        :func:`remendo.read_error_priors`. Used by Models 5 and 6.
    reporting_priors : dict or None
        Dirichlet priors keyed by (group, truth), as read by
        :func:`remendo.read_reporting_priors`. Used by Models 5 and 6.

    Returns
    -------
    models : tuple or marker
        The pair (:class:`remendo.ErrorModelSpec`,
        :class:`remendo.ReportingModelSpec`), or one of the markers
        :data:`remendo.CIA` and :data:`remendo.REPORTED`.

    Raises
    ------
    ValidationError
        If the schema lacks the covariates or levels the preset needs.

    Examples
    --------
    >>> import remendo as rm
    >>> schema = rm.Schema.create(
    ...     [("sex", ["M", "F"])], ["BA", "MA", "Prof", "PhD", "None"], 4
    ... )
    >>> error, reporting = build_preset("model2", schema)
    >>> error.term_names
    ('intercept', 'y=MA & sex=M', 'y=Prof & sex=M', 'y=PhD & sex=M')
    >>> error, reporting = build_preset("model7", schema)
    >>> error.priors[0]
    (500.0, 99500.0)
    """
    name = normalize_preset_name(name)
    if name == "cia":
        return CIA
    if name == "reported":
        return REPORTED
    covariate_names = {**DEFAULT_COVARIATE_NAMES, **(covariate_names or {})}
    level_names = {**DEFAULT_LEVEL_NAMES, **(level_names or {})}
    terms = [Term()]
    if name == "model1":
        terms += [Term(truth) for truth in schema.true_labels[1 : schema.n_reported]]
    elif name == "model2":
        sex, (male, _) = _resolve_role(schema, "sex", covariate_names, level_names)
        terms += _interaction_terms(schema, sex, male, 1)
    elif name == "model3":
        black, (no, yes) = _resolve_role(schema, "black", covariate_names, level_names)
        terms += _interaction_terms(schema, black, no, 1)
        terms += _interaction_terms(schema, black, yes, 0)
    if name in ("model1", "model2", "model3"):
        return ErrorModelSpec(terms), ReportingModelSpec("categorical_by_truth")
    sex, (male, female) = _resolve_role(schema, "sex", covariate_names, level_names)
    terms += _interaction_terms(schema, sex, male, 1)
    terms += _interaction_terms(schema, sex, female, 0)
    reporting_table = {}
    if name == "model4":
        priors = None
    elif name == "model7":
        priors = [NEAR_ZERO_ERROR_PRIOR] * len(terms)
    else:
        priors, reporting_table = _informative_priors(
            name, schema, terms, sex, male, error_priors, reporting_priors
        )
    error = ErrorModelSpec(terms, engine="group_saturated", priors=priors)
    reporting = ReportingModelSpec(
        "categorical_by_truth", stratifier=(sex,), priors=reporting_table
    )
    return error, reporting
