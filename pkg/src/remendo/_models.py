# Copyright (c) 2025 The Remendo Developers.
# Distributed under the terms of the BSD 3-Clause License.
# SPDX-License-Identifier: BSD-3-Clause
#
"""
Declarative error and reporting models, their priors, and the count of
parameters the data can identify.
"""

import logging
from dataclasses import dataclass

import numpy as np
import pandas as pd
import scipy.special

from ._exceptions import ValidationError
from ._utils import digest
from ._validation import check_choice, check_positive

logger = logging.getLogger(__name__)

ENGINES = ("group_saturated", "general_logistic")
REPORTING_KINDS = ("uniform", "categorical_by_truth")

#: Prior (mean, standard deviation) of logistic coefficients when none is given.
FLAT_NORMAL = (0.0, 10.0)
#: Prior (a, b) of group error rates when none is given.
FLAT_BETA = (1.0, 1.0)


@dataclass(frozen=True)
class Term:
    """
    An indicator column of the design vector of the error model.

    A term with no truth and no covariate is the intercept. Terms refer to
    levels by label and are resolved against a :class:`remendo.Schema` when
    evaluated.

    Parameters
    ----------
    truth : str or None
        Label of the true level that activates the term.
    covariate : str or None
        Name of the covariate that activates the term.
    level : str or None
        Label of the covariate level that activates the term. Required if and
        only if ``covariate`` is given.
    """

    truth: str = None
    covariate: str = None
    level: str = None

    def __post_init__(self):
        if (self.covariate is None) != (self.level is None):
            message = (
                f"Invalid term with covariate '{self.covariate}' and level "
                f"'{self.level}'. Both or neither must be given."
            )
            raise ValidationError(message)
        if self.covariate in ("y", "z"):
            message = f"Invalid term covariate '{self.covariate}'."
            raise ValidationError(message)
        for attribute in ("truth", "covariate", "level"):
            value = getattr(self, attribute)
            if value is not None:
                object.__setattr__(self, attribute, str(value))

    @property
    def is_intercept(self):
        "True if this is the intercept term."
        return self.truth is None and self.covariate is None

    @property
    def name(self):
        "The canonical text form of the term."
        if self.is_intercept:
            return "intercept"
        parts = []
        if self.truth is not None:
            parts.append(f"y={self.truth}")
        if self.covariate is not None:
            parts.append(f"{self.covariate}={self.level}")
        return " & ".join(parts)

    def indicator(self, schema):
        """
        Evaluate the term on every combination of cell and true level.

        Parameters
        ----------
        schema : :class:`remendo.Schema`
            The variable declaration.

        Returns
        -------
        active : 2D array of bool
            Whether the term is 1, with shape ``(n_cells, n_true)``.

        Raises
        ------
        ValidationError
            If the term refers to unknown variables or levels.
        """
        active = np.ones((schema.n_cells, schema.n_true), dtype=bool)
        if self.truth is not None:
            code = schema.level_code("y", self.truth)
            active &= (np.arange(schema.n_true) == code)[np.newaxis, :]
        if self.covariate is not None:
            index = schema.covariate_names.index(schema.covariate(self.covariate).name)
            code = schema.level_code(self.covariate, self.level)
            active &= (schema.cell_levels()[:, index] == code)[:, np.newaxis]
        return active


def parse_term(text):
    """
    Parse the text form of a design term.

    The grammar is one of ``intercept``, ``y=<label>``, ``<covariate>=<label>``,
    or ``y=<label> & <covariate>=<label>`` (in any order).

    Parameters
    ----------
    text : str
        The term.

    Returns
    -------
    term : :class:`remendo.Term`

    Raises
    ------
    ValidationError
        If the text doesn't follow the grammar.

    Examples
    --------
    >>> parse_term("sex=M & y=MA").name
    'y=MA & sex=M'
    >>> parse_term("intercept").is_intercept
    True
    """
    text = str(text).strip()
    if text.lower() == "intercept":
        return Term()
    truth = covariate = level = None
    for part in text.split("&"):
        name, separator, value = (piece.strip() for piece in part.partition("="))
        if not separator or not name or not value:
            message = (
                f"Invalid term '{text}'. Expected 'intercept', 'y=<level>', "
                "'<covariate>=<level>', or 'y=<level> & <covariate>=<level>'."
            )
            raise ValidationError(message)
        if name == "y" and truth is None:
            truth = value
        elif name != "y" and covariate is None:
            covariate, level = name, value
        else:
            message = (
                f"Invalid term '{text}'. Terms can involve at most one true "
                "level and one covariate."
            )
            raise ValidationError(message)
    return Term(truth, covariate, level)


@dataclass(frozen=True)
class ErrorModelSpec:
    """
    The error model: the probability that a report differs from the truth.

    The probability of an error for a record with true level k in cell x is
    ``expit(M(x, k) @ beta)`` in which ``M`` is the design vector of the
    terms. True levels that can't be reported always have errors.

    Parameters
    ----------
    terms : list of :class:`remendo.Term` or str
        The design terms. Strings are parsed with :func:`remendo.parse_term`.
    engine : str
        ``"general_logistic"`` (Normal priors on the coefficients, Metropolis
        updates) or ``"group_saturated"`` (terms split the records into
        disjoint groups each with their own error rate, Beta priors,
        conjugate updates).
    priors : list of (float, float) or None
        One pair per term: (mean, standard deviation) of the Normal prior of
        each coefficient for ``"general_logistic"``, or (a, b) of the Beta
        prior of each group error rate for ``"group_saturated"``. If None,
        uses flat priors: Normal(0, 10) or Beta(1, 1).
    """

    terms: tuple
    engine: str = "general_logistic"
    priors: tuple = None

    def __post_init__(self):
        terms = tuple(
            term if isinstance(term, Term) else parse_term(term) for term in self.terms
        )
        if not terms:
            message = "Invalid error model. Must have at least one term."
            raise ValidationError(message)
        names = [term.name for term in terms]
        if len(set(names)) != len(names):
            message = f"Invalid error model. Duplicate terms in {names}."
            raise ValidationError(message)
        check_choice(self.engine, ENGINES, name="engine")
        if self.priors is None:
            default = FLAT_BETA if self.engine == "group_saturated" else FLAT_NORMAL
            priors = tuple(default for _ in terms)
        else:
            priors = tuple(tuple(float(v) for v in prior) for prior in self.priors)
        if len(priors) != len(terms) or any(len(prior) != 2 for prior in priors):
            message = (
                f"Invalid error model priors. Expected {len(terms)} pairs of "
                f"parameters (one per term) but got {self.priors}."
            )
            raise ValidationError(message)
        if self.engine == "group_saturated":
            check_positive(priors, name="Beta prior parameters")
        else:
            check_positive([sd for _, sd in priors], name="prior standard deviations")
            if not np.all(np.isfinite([mean for mean, _ in priors])):
                message = "Invalid prior means. All must be finite."
                raise ValidationError(message)
        object.__setattr__(self, "terms", terms)
        object.__setattr__(self, "priors", priors)

    @property
    def n_terms(self):
        "The number of design terms (coefficients)."
        return len(self.terms)

    @property
    def term_names(self):
        "The text form of each term."
        return tuple(term.name for term in self.terms)

    def to_dict(self):
        """
        Convert the specification into a JSON-compatible dictionary.
        """
        return {
            "engine": self.engine,
            "terms": [
                {"term": term.name, "prior": list(prior)}
                for term, prior in zip(self.terms, self.priors, strict=True)
            ],
        }

    @classmethod
    def from_dict(cls, document):
        """
        Create the specification from a dictionary.

        The ``"terms"`` entry is a list of term strings or of dictionaries
        with a ``"term"`` string and an optional ``"prior"`` pair. Terms
        without a prior get the flat prior of the engine.
        """
        engine = document.get("engine", "general_logistic")
        check_choice(engine, ENGINES, name="engine")
        default = FLAT_BETA if engine == "group_saturated" else FLAT_NORMAL
        terms, priors = [], []
        for entry in document.get("terms", []):
            if isinstance(entry, str):
                entry = {"term": entry}
            terms.append(entry["term"])
            priors.append(tuple(entry.get("prior", default)))
        return cls(terms, engine=engine, priors=priors)


@dataclass(frozen=True)
class ReportingModelSpec:
    """
    The reporting model: the distribution of the report given an error.

    Parameters
    ----------
    kind : str
        ``"uniform"`` (every other reported level is equally likely) or
        ``"categorical_by_truth"`` (one probability table per stratifier
        group and true level, with Dirichlet priors).
    stratifier : list of str
        Covariates whose level combinations define the reporting groups.
        Empty means a single group.
    priors : dict or None
        Dirichlet concentrations keyed by ``(group label, true level label)``.
        Each value lists the concentration of every reported level the true
        level can be reported as (all reported levels except itself). Groups
        are labeled as in :func:`remendo.reporting_group_labels`.
    default_concentration : float
        Concentration of every entry not in ``priors``. Default is 1 (flat).
    """

    kind: str = "categorical_by_truth"
    stratifier: tuple = ()
    priors: tuple = ()
    default_concentration: float = 1.0

    def __post_init__(self):
        check_choice(self.kind, REPORTING_KINDS, name="kind")
        stratifier = tuple(str(name) for name in self.stratifier)
        if len(set(stratifier)) != len(stratifier):
            message = f"Invalid reporting stratifier {stratifier}. Duplicate names."
            raise ValidationError(message)
        if isinstance(self.priors, dict):
            entries = [(*key, values) for key, values in self.priors.items()]
        else:
            entries = self.priors
        priors = tuple(
            (str(group), str(truth), tuple(float(c) for c in concentration))
            for group, truth, concentration in entries
        )
        if self.kind == "uniform" and (priors or stratifier):
            message = (
                "Invalid reporting model. The 'uniform' kind has no stratifier "
                "and no priors."
            )
            raise ValidationError(message)
        for _, _, concentration in priors:
            check_positive(concentration, name="Dirichlet concentrations")
        check_positive(self.default_concentration, name="default concentration")
        object.__setattr__(self, "stratifier", stratifier)
        object.__setattr__(self, "priors", priors)
        object.__setattr__(
            self, "default_concentration", float(self.default_concentration)
        )

    def to_dict(self):
        """
        Convert the specification into a JSON-compatible dictionary.
        """
        return {
            "kind": self.kind,
            "stratifier": list(self.stratifier),
            "default_concentration": self.default_concentration,
            "priors": [
                {"group": group, "truth": truth, "concentration": list(concentration)}
                for group, truth, concentration in self.priors
            ],
        }

    @classmethod
    def from_dict(cls, document):
        """
        Create the specification from a dictionary made by ``to_dict``.
        """
        return cls(
            kind=document.get("kind", "categorical_by_truth"),
            stratifier=document.get("stratifier", ()),
            priors=[
                (entry["group"], entry["truth"], entry["concentration"])
                for entry in document.get("priors", [])
            ],
            default_concentration=document.get("default_concentration", 1.0),
        )


def spec_digest(spec):
    """
    Calculate the SHA-256 digest of an error or reporting model.

    Parameters
    ----------
    spec : :class:`remendo.ErrorModelSpec` or :class:`remendo.ReportingModelSpec`
        The model specification.

    Returns
    -------
    digest : str
    """
    return digest(spec.to_dict())


def design_matrix(spec, schema):
    """
    Build the design vectors of every combination of cell and true level.

    Parameters
    ----------
    spec : :class:`remendo.ErrorModelSpec`
        The error model.
    schema : :class:`remendo.Schema`
        The variable declaration.

    Returns
    -------
    design : 3D array
        Array with shape ``(n_cells, n_true, n_terms)``.
    """
    return np.stack([term.indicator(schema) for term in spec.terms], axis=-1).astype(
        float
    )


def _check_coefficients(spec, beta):
    beta = np.asarray(beta, dtype=float)
    if beta.shape[-1:] != (spec.n_terms,):
        message = (
            f"Invalid coefficients with shape {beta.shape}. The error model has "
            f"{spec.n_terms} terms: {spec.term_names}."
        )
        raise ValidationError(message)
    return beta


def error_probabilities(spec, beta, schema):
    """
    Calculate the error probability of every cell and true level.

    Parameters
    ----------
    spec : :class:`remendo.ErrorModelSpec`
        The error model.
    beta : 1D array
        One coefficient per term.
    schema : :class:`remendo.Schema`
        The variable declaration.

    Returns
    -------
    probabilities : 2D array
        Array with shape ``(n_cells, n_true)``. Unreportable true levels have
        probability 1.
    """
    beta = _check_coefficients(spec, beta)
    probabilities = scipy.special.expit(design_matrix(spec, schema) @ beta)
    probabilities[:, schema.n_reported :] = 1
    return probabilities


def error_probability(spec, beta, cell, y, schema):
    """
    Calculate the probability that a report differs from the truth.

    Parameters
    ----------
    spec : :class:`remendo.ErrorModelSpec`
        The error model.
    beta : 1D array
        One coefficient per term.
    cell : int or :class:`remendo.CellIndex`
        The cell of the record.
    y : int
        The 0-based true level of the record.
    schema : :class:`remendo.Schema`
        The variable declaration.

    Returns
    -------
    probability : float

    Examples
    --------
    >>> import remendo as rm
    >>> schema = rm.Schema.create([("sex", ["M", "F"])], 3, 2)
    >>> spec = ErrorModelSpec(["intercept"])
    >>> error_probability(spec, [0], 0, 1, schema)
    0.5
    >>> error_probability(spec, [0], 0, 2, schema)
    1.0
    """
    code = _cell_code(cell, schema)
    _check_level(y, schema.n_true, "y")
    return float(error_probabilities(spec, beta, schema)[code, y])


def _cell_code(cell, schema):
    code = int(getattr(cell, "code", cell))
    if not 0 <= code < schema.n_cells:
        message = f"Invalid cell '{code}'. Must be in [0, {schema.n_cells})."
        raise ValidationError(message)
    return code


def _check_level(value, size, variable):
    if not 0 <= int(value) < size:
        message = f"Invalid level '{value}' of '{variable}'. Must be in [0, {size})."
        raise ValidationError(message)


def error_groups(spec, schema):
    """
    Assign every combination of cell and true level to a term group.

    A combination belongs to the only non-intercept term that is active for
    it, or to the intercept when none is. The terms must split the
    reportable combinations into disjoint groups.

    Parameters
    ----------
    spec : :class:`remendo.ErrorModelSpec`
        The error model.
    schema : :class:`remendo.Schema`
        The variable declaration.

    Returns
    -------
    groups : 2D array of int
        Term index of each combination, with shape ``(n_cells, n_true)``.
        Unreportable true levels get -1.

    Raises
    ------
    ValidationError
        If the terms overlap or leave combinations without a group.
    """
    design = design_matrix(spec, schema).astype(bool)
    intercepts = [i for i, term in enumerate(spec.terms) if term.is_intercept]
    others = [i for i, term in enumerate(spec.terms) if not term.is_intercept]
    reportable = design[:, : schema.n_reported, :]
    active = reportable[..., others].sum(axis=-1)
    if np.any(active > 1):
        cell, level = np.argwhere(active > 1)[0]
        message = (
            "Invalid group-saturated error model. Terms overlap for cell "
            f"'{schema.cell_label(cell)}' and true level "
            f"'{schema.true_labels[level]}'."
        )
        raise ValidationError(message)
    if not intercepts and np.any(active == 0):
        cell, level = np.argwhere(active == 0)[0]
        message = (
            "Invalid group-saturated error model. No term covers cell "
            f"'{schema.cell_label(cell)}' and true level "
            f"'{schema.true_labels[level]}'. Add an 'intercept' term."
        )
        raise ValidationError(message)
    groups = np.full((schema.n_cells, schema.n_true), -1, dtype=int)
    if intercepts:
        groups[:, : schema.n_reported] = intercepts[0]
    for index in others:
        groups[:, : schema.n_reported][reportable[..., index]] = index
    return groups


def rates_to_coefficients(spec, rates):
    """
    Convert group error rates into logistic coefficients.

    The intercept coefficient is the logit of the intercept group rate and
    every other coefficient is the logit of its group rate minus the
    intercept coefficient.

    Parameters
    ----------
    spec : :class:`remendo.ErrorModelSpec`
        A group-saturated error model.
    rates : array
        Error rate of each group in the last dimension.

    Returns
    -------
    beta : array
        Coefficients with the same shape as ``rates``.

    Examples
    --------
    >>> spec = ErrorModelSpec(["intercept", "y=2"], engine="group_saturated")
    >>> beta = rates_to_coefficients(spec, [0.5, 0.5])
    >>> print(beta)
    [0. 0.]
    """
    rates = _check_coefficients(spec, rates)
    beta = scipy.special.logit(rates)
    intercepts = [i for i, term in enumerate(spec.terms) if term.is_intercept]
    if intercepts:
        baseline = beta[..., intercepts[0]].copy()
        beta = beta - baseline[..., np.newaxis]
        beta[..., intercepts[0]] = baseline
    return beta


def reporting_support(schema):
    """
    Find the reported levels each true level can be reported as in error.

    Parameters
    ----------
    schema : :class:`remendo.Schema`
        The variable declaration.

    Returns
    -------
    support : 2D array of bool
        Array with shape ``(n_true, n_reported)``. False only for a reportable
        true level and its own reported level.
    """
    support = np.ones((schema.n_true, schema.n_reported), dtype=bool)
    support[np.arange(schema.n_reported), np.arange(schema.n_reported)] = False
    return support


def uniform_reporting(schema):
    """
    The reporting table in which all wrong reports are equally likely.

    Returns
    -------
    table : 2D array
        Array with shape ``(n_true, n_reported)``. Rows of reportable levels
        are ``1/(n_reported - 1)`` off the diagonal and rows of unreportable
        levels are ``1/n_reported``.
    """
    support = reporting_support(schema).astype(float)
    return support / support.sum(axis=1, keepdims=True)


def _stratifier_indices(spec, schema):
    return [
        schema.covariate_names.index(schema.covariate(name).name)
        for name in spec.stratifier
    ]


def reporting_groups(spec, schema):
    """
    Assign every cell to a reporting group.

    Groups are the combinations of levels of the stratifier covariates, with
    the last covariate varying fastest.

    Parameters
    ----------
    spec : :class:`remendo.ReportingModelSpec`
        The reporting model.
    schema : :class:`remendo.Schema`
        The variable declaration.

    Returns
    -------
    groups : 1D array of int
        Group index of each cell.
    """
    indices = _stratifier_indices(spec, schema)
    if not indices:
        return np.zeros(schema.n_cells, dtype=int)
    levels = schema.cell_levels()[:, indices]
    sizes = [schema.covariates[i].size for i in indices]
    return np.ravel_multi_index(levels.T, sizes)


def reporting_group_labels(spec, schema):
    """
    Label each reporting group.

    Labels are the stratifier levels joined by ``"/"``, or ``"all"`` when
    there is no stratifier.

    Returns
    -------
    labels : tuple of str
    """
    indices = _stratifier_indices(spec, schema)
    if not indices:
        return ("all",)
    sizes = [schema.covariates[i].size for i in indices]
    labels = []
    for levels in np.ndindex(*sizes):
        labels.append(
            "/".join(
                schema.covariates[i].labels[level]
                for i, level in zip(indices, levels, strict=True)
            )
        )
    return tuple(labels)


def reporting_prior(spec, schema):
    """
    Assemble the Dirichlet concentrations of every reporting table.

    Parameters
    ----------
    spec : :class:`remendo.ReportingModelSpec`
        A ``"categorical_by_truth"`` reporting model.
    schema : :class:`remendo.Schema`
        The variable declaration.

    Returns
    -------
    concentration : 3D array
        Array with shape ``(n_groups, n_true, n_reported)``. Entries outside
        the support (see :func:`remendo.reporting_support`) are 0.

    Raises
    ------
    ValidationError
        If a prior refers to unknown groups or levels, or has the wrong
        length.
    """
    labels = reporting_group_labels(spec, schema)
    support = reporting_support(schema)
    concentration = np.where(support, spec.default_concentration, 0.0)
    concentration = np.repeat(concentration[np.newaxis], len(labels), axis=0)
    for group, truth, values in spec.priors:
        if group not in labels:
            message = (
                f"Invalid reporting prior for group '{group}'. "
                f"Valid groups: {labels}."
            )
            raise ValidationError(message)
        level = schema.level_code("y", truth)
        if len(values) != support[level].sum():
            message = (
                f"Invalid reporting prior for group '{group}' and true level "
                f"'{truth}'. Expected {support[level].sum()} concentrations (one "
                f"per possible wrong report) but got {len(values)}."
            )
            raise ValidationError(message)
        concentration[labels.index(group), level, support[level]] = values
    return concentration


def reporting_distribution(spec, tables, cell, y, schema):
    """
    Get the distribution of the report given an error.

    Parameters
    ----------
    spec : :class:`remendo.ReportingModelSpec`
        The reporting model.
    tables : 3D array or None
        Current reporting tables with shape ``(n_groups, n_true,
        n_reported)``. Ignored for the ``"uniform"`` kind.
    cell : int or :class:`remendo.CellIndex`
        The cell of the record.
    y : int
        The 0-based true level of the record.
    schema : :class:`remendo.Schema`
        The variable declaration.

    Returns
    -------
    probabilities : 1D array
        Probability of each reported level.

    Examples
    --------
    >>> import remendo as rm
    >>> schema = rm.Schema.create([], 5, 4)
    >>> spec = ReportingModelSpec("uniform")
    >>> print(reporting_distribution(spec, None, 0, 1, schema).round(4))
    [0.3333 0.     0.3333 0.3333]
    >>> print(reporting_distribution(spec, None, 0, 4, schema))
    [0.25 0.25 0.25 0.25]
    """
    code = _cell_code(cell, schema)
    _check_level(y, schema.n_true, "y")
    if spec.kind == "uniform":
        return uniform_reporting(schema)[y]
    tables = np.asarray(tables, dtype=float)
    expected = (
        len(reporting_group_labels(spec, schema)),
        schema.n_true,
        schema.n_reported,
    )
    if tables.shape != expected:
        message = (
            f"Invalid reporting tables with shape {tables.shape}. "
            f"Expected {expected}."
        )
        raise ValidationError(message)
    return tables[reporting_groups(spec, schema)[code], y].copy()


@dataclass(frozen=True)
class IdentifiabilityReport:
    """
    Counts of the parameters requested by a model and identifiable by data.

    Parameters
    ----------
    n_cells : int
        Number of covariate cells (d_X).
    n_true : int
        Number of true levels (d_Y).
    n_reported : int
        Number of reported levels (d_Z).
    error_params : int
        Free parameters of the error model.
    reporting_params : int
        Free probabilities of the reporting model.
    """

    n_cells: int
    n_true: int
    n_reported: int
    error_params: int
    reporting_params: int

    @property
    def info_available(self):
        "Independent pieces of information in the two files combined."
        return (self.n_reported + self.n_true - 1) * self.n_cells

    @property
    def saturated_need(self):
        "Parameters of the saturated model of the joint distribution."
        return (self.n_true * self.n_reported - 1) * self.n_cells

    @property
    def max_error_reporting_params(self):
        "Most error and reporting parameters the data can identify."
        return (self.n_reported - 1) * self.n_cells

    @property
    def requested_params(self):
        "Parameters requested by the error and reporting models."
        return self.error_params + self.reporting_params

    @property
    def verdict(self):
        "Either ``'ok'`` or ``'over_parameterized'``."
        if self.requested_params > self.max_error_reporting_params:
            return "over_parameterized"
        return "ok"

    def to_dict(self):
        "Convert the report into a JSON-compatible dictionary."
        return {
            "n_cells": self.n_cells,
            "n_true": self.n_true,
            "n_reported": self.n_reported,
            "info_available": self.info_available,
            "saturated_need": self.saturated_need,
            "max_error_reporting_params": self.max_error_reporting_params,
            "error_params": self.error_params,
            "reporting_params": self.reporting_params,
            "requested_params": self.requested_params,
            "verdict": self.verdict,
        }

    def __str__(self):
        width = max(len(key) for key in self.to_dict())
        return "\n".join(
            f"{key:<{width}}  {value}" for key, value in self.to_dict().items()
        )


def check_identifiability(schema, error_spec, reporting_spec):
    """
    Count the parameters of the models against what the data can identify.

    The two files carry ``(d_Z + d_Y - 1) d_X`` independent pieces of
    information but the saturated joint model of (Y, Z) needs
    ``(d_Y d_Z - 1) d_X`` parameters. Since the true data model is estimated
    from the gold-standard file, at most ``(d_Z - 1) d_X`` parameters of the
    error and reporting models combined can be identified.

    Parameters
    ----------
    schema : :class:`remendo.Schema`
        The variable declaration.
    error_spec : :class:`remendo.ErrorModelSpec`
        The error model. Every coefficient counts as a parameter.
    reporting_spec : :class:`remendo.ReportingModelSpec`
        The reporting model. Each table of m possible reports contributes
        m - 1 free probabilities.

    Returns
    -------
    report : :class:`remendo.IdentifiabilityReport`

    Examples
    --------
    >>> import remendo as rm
    >>> schema = rm.Schema.create([("a", 4), ("b", 4)], 5, 4)
    >>> report = check_identifiability(
    ...     schema, ErrorModelSpec(["intercept"]), ReportingModelSpec("uniform")
    ... )
    >>> report.info_available, report.saturated_need
    (128, 304)
    >>> report.max_error_reporting_params, report.verdict
    (48, 'ok')
    """
    design_matrix(error_spec, schema)
    if error_spec.engine == "group_saturated":
        error_groups(error_spec, schema)
    if reporting_spec.kind == "uniform":
        reporting_params = 0
    else:
        reporting_prior(reporting_spec, schema)
        n_groups = len(reporting_group_labels(reporting_spec, schema))
        free = int(np.sum(reporting_support(schema).sum(axis=1) - 1))
        reporting_params = n_groups * free
    return IdentifiabilityReport(
        n_cells=schema.n_cells,
        n_true=schema.n_true,
        n_reported=schema.n_reported,
        error_params=error_spec.n_terms,
        reporting_params=reporting_params,
    )


def read_error_priors(path):
    """
    Read Beta priors of group error rates from a CSV file.

    The file has the columns ``group`` (a term in the text form of
    :func:`remendo.parse_term`), ``a``, and ``b``.

    Parameters
    ----------
    path : str or pathlib.Path
        The input file.

    Returns
    -------
    priors : dict
        Maps the canonical term name to the (a, b) pair.
    """
    table = pd.read_csv(path, dtype={"group": str}, keep_default_na=False)
    absent = [column for column in ("group", "a", "b") if column not in table]
    if absent:
        message = f"Invalid error prior file '{path}'. Missing columns {absent}."
        raise ValidationError(message)
    priors = {}
    for row in table.itertuples(index=False):
        name = parse_term(row.group).name
        if name in priors:
            message = f"Invalid error prior file '{path}'. Duplicate group '{name}'."
            raise ValidationError(message)
        priors[name] = (float(row.a), float(row.b))
        check_positive(priors[name], name=f"Beta prior of '{name}' in '{path}'")
    logger.info("Read error priors for %d groups from '%s'.", len(priors), path)
    return priors


def read_reporting_priors(path, schema):
    """
    Read Dirichlet priors of reporting tables from a CSV file.

    The file has the columns ``group`` (a label from
    :func:`remendo.reporting_group_labels`), ``truth`` (a true level label),
    and one column per reported level label. The entry of the reported level
    equal to the true level is ignored.

    Parameters
    ----------
    path : str or pathlib.Path
        The input file.
    schema : :class:`remendo.Schema`
        The variable declaration.

    Returns
    -------
    priors : dict
        Maps ``(group, truth)`` to the concentrations of every possible wrong
        report, in the format of :class:`remendo.ReportingModelSpec`.
    """
    table = pd.read_csv(
        path, dtype={"group": str, "truth": str}, keep_default_na=False
    )
    required = ["group", "truth", *schema.reported_labels]
    absent = [column for column in required if column not in table]
    if absent:
        message = f"Invalid reporting prior file '{path}'. Missing columns {absent}."
        raise ValidationError(message)
    support = reporting_support(schema)
    priors = {}
    for _, row in table.iterrows():
        level = schema.level_code("y", row["truth"])
        key = (row["group"], row["truth"])
        if key in priors:
            message = f"Invalid reporting prior file '{path}'. Duplicate row {key}."
            raise ValidationError(message)
        values = row[list(schema.reported_labels)].to_numpy(dtype=float)
        priors[key] = tuple(values[support[level]])
        check_positive(priors[key], name=f"Dirichlet prior of {key} in '{path}'")
    logger.info("Read reporting priors for %d rows from '%s'.", len(priors), path)
    return priors
