# Copyright (c) 2025 The Remendo Developers.
# Distributed under the terms of the BSD 3-Clause License.
# SPDX-License-Identifier: BSD-3-Clause
#
"""
Data augmentation Gibbs sampler for the true values of the error-prone file
and the imputers that ignore or trust the reports.
"""

import logging
from dataclasses import asdict, dataclass

import numpy as np
import pandas as pd
import scipy.special

from ._design import draw_theta_all
from ._exceptions import IdentifiabilityError, NumericalError, ValidationError
from ._imputations import TRACE_COLUMNS, ImputationSet
from ._models import (
    ReportingModelSpec,
    check_identifiability,
    design_matrix,
    error_groups,
    reporting_group_labels,
    reporting_groups,
    reporting_prior,
    reporting_support,
    spec_digest,
    uniform_reporting,
)
from ._random import random_categorical, random_dirichlet
from ._validation import check_choice

logger = logging.getLogger(__name__)

THETA_REDRAW = ("per_iteration", "per_imputation")

#: Acceptance rate targeted by the adaptation of Metropolis step sizes.
TARGET_ACCEPTANCE = 0.30


@dataclass(frozen=True)
class GibbsConfig:
    """
    Settings of the Gibbs sampler.

    Parameters
    ----------
    iterations : int
        Total number of iterations. Default is 100,000.
    burn_in : int or None
        Iterations discarded before saving states. Default is half of
        ``iterations``.
    n_imputations : int
        Number of evenly spaced states saved after the burn-in. Default is 50.
    step_size : float
        Initial standard deviation of the Metropolis proposals of logistic
        coefficients. Default is 0.5.
    adapt_until : int or None
        Last iteration in which step sizes are adapted. They're frozen after
        it. Must not exceed ``burn_in``. Default is half of ``burn_in``.
    theta_redraw : str
        ``"per_iteration"`` draws new true data model probabilities from the
        gold-standard posterior every iteration. ``"per_imputation"`` draws
        them once for each saved state.
    """

    iterations: int = 100_000
    burn_in: int = None
    n_imputations: int = 50
    step_size: float = 0.5
    adapt_until: int = None
    theta_redraw: str = "per_iteration"

    def __post_init__(self):
        if self.burn_in is None:
            object.__setattr__(self, "burn_in", self.iterations // 2)
        if self.adapt_until is None:
            object.__setattr__(self, "adapt_until", self.burn_in // 2)
        check_choice(self.theta_redraw, THETA_REDRAW, name="theta_redraw")
        if not 0 <= self.burn_in < self.iterations:
            message = (
                f"Invalid burn-in '{self.burn_in}'. Must be >= 0 and smaller than "
                f"the number of iterations '{self.iterations}'."
            )
            raise ValidationError(message)
        if not 1 <= self.n_imputations <= self.iterations - self.burn_in:
            message = (
                f"Invalid number of imputations '{self.n_imputations}'. Must be "
                "between 1 and iterations - burn-in "
                f"({self.iterations - self.burn_in})."
            )
            raise ValidationError(message)
        if not 0 <= self.adapt_until <= self.burn_in:
            message = (
                f"Invalid adaptation bound '{self.adapt_until}'. Must be between "
                f"0 and the burn-in '{self.burn_in}'."
            )
            raise ValidationError(message)
        if not self.step_size > 0:
            message = f"Invalid step size '{self.step_size}'. Must be > 0."
            raise ValidationError(message)

    @property
    def saved_iterations(self):
        """
        The iterations whose states become imputations.

        Examples
        --------
        >>> GibbsConfig(iterations=100, n_imputations=5).saved_iterations
        array([ 60,  70,  80,  90, 100])
        """
        stride = (self.iterations - self.burn_in) // self.n_imputations
        return self.burn_in + stride * np.arange(1, self.n_imputations + 1)

    def to_dict(self):
        "Convert the settings into a JSON-compatible dictionary."
        return asdict(self)


@dataclass
class ChainState:
    """
    The current state of the Gibbs sampler.

    Parameters
    ----------
    z : 1D array of int
        Reported level of each record.
    y : 1D array of int
        Imputed true level of each record as of the last saved state.
    counts : 3D array of int
        Number of records by cell, reported level, and current true level,
        with shape ``(n_cells, n_reported, n_true)``. Sufficient for every
        parameter update.
    error_params : 1D array
        Group error rates (``"group_saturated"``) or logistic coefficients
        (``"general_logistic"``), one per term.
    reporting : 3D array or None
        Reporting tables with shape ``(n_groups, n_true, n_reported)``. None
        for the ``"uniform"`` kind.
    theta : 2D array
        True data model probabilities of every cell.
    log_steps : 1D array or None
        Log of the Metropolis step size of each coefficient.
    iteration : int
        Number of completed iterations.
    """

    z: np.ndarray
    y: np.ndarray
    counts: np.ndarray
    error_params: np.ndarray
    reporting: np.ndarray
    theta: np.ndarray
    log_steps: np.ndarray = None
    iteration: int = 0

    @property
    def e(self):
        "Error indicator of each record (1 when the truth differs from the report)."
        return (self.y != self.z).astype(int)


@dataclass(frozen=True)
class _ModelTables:
    """
    Arrays derived once from the models and the schema.
    """

    n_reported: int
    groups: np.ndarray = None
    design: np.ndarray = None
    reportable_design: np.ndarray = None
    prior: np.ndarray = None
    reporting_groups: np.ndarray = None
    reporting_prior: np.ndarray = None
    support: np.ndarray = None
    uniform: np.ndarray = None


def _model_tables(error_spec, reporting_spec, schema):
    design = design_matrix(error_spec, schema)
    groups = None
    if error_spec.engine == "group_saturated":
        groups = error_groups(error_spec, schema)
    prior = None
    if reporting_spec.kind == "categorical_by_truth":
        prior = reporting_prior(reporting_spec, schema)
    return _ModelTables(
        n_reported=schema.n_reported,
        groups=groups,
        design=design,
        reportable_design=design[:, : schema.n_reported].reshape(
            -1, error_spec.n_terms
        ),
        prior=np.array(error_spec.priors),
        reporting_groups=reporting_groups(reporting_spec, schema),
        reporting_prior=prior,
        support=reporting_support(schema),
        uniform=uniform_reporting(schema),
    )


def count_records(cells, z, y, schema):
    """
    Count records by cell, reported level, and true level.

    Returns
    -------
    counts : 3D array of int
        Array with shape ``(n_cells, n_reported, n_true)``.
    """
    shape = (schema.n_cells, schema.n_reported, schema.n_true)
    index = np.ravel_multi_index((cells, z, y), shape)
    return np.bincount(index, minlength=np.prod(shape)).reshape(shape)


def error_counts(counts):
    """
    Count errors and correct reports by cell and true level.

    Parameters
    ----------
    counts : 3D array of int
        Counts by cell, reported level, and true level (see
        :func:`remendo.count_records`).

    Returns
    -------
    errors : 2D array of int
        Records with a report different from the truth, shape ``(n_cells,
        n_true)``.
    correct : 2D array of int
        Records with a report equal to the truth.
    """
    n_reported = counts.shape[1]
    by_truth = counts.sum(axis=1)
    correct = np.zeros_like(by_truth)
    correct[:, :n_reported] = np.diagonal(
        counts[:, :, :n_reported], axis1=1, axis2=2
    )
    return by_truth - correct, correct


def _rate_posterior(tables, counts):
    errors, correct = error_counts(counts)
    reportable = tables.groups >= 0
    size = tables.prior.shape[0]
    a = tables.prior[:, 0] + np.bincount(
        tables.groups[reportable], weights=errors[reportable], minlength=size
    )
    b = tables.prior[:, 1] + np.bincount(
        tables.groups[reportable], weights=correct[reportable], minlength=size
    )
    return a, b


def error_rate_posterior(error_spec, counts, schema):
    """
    Calculate the Beta posterior of every group error rate.

    Only records with reportable true levels count: unreportable levels are
    always errors and carry no information about the rates.

    Parameters
    ----------
    error_spec : :class:`remendo.ErrorModelSpec`
        A ``"group_saturated"`` error model.
    counts : 3D array of int
        Counts by cell, reported level, and true level.
    schema : :class:`remendo.Schema`
        The variable declaration.

    Returns
    -------
    a, b : 1D arrays
        Posterior Beta parameters of each group.
    """
    if error_spec.engine != "group_saturated":
        message = "Beta posteriors require a 'group_saturated' error model."
        raise ValidationError(message)
    tables = _ModelTables(
        schema.n_reported,
        groups=error_groups(error_spec, schema),
        prior=np.array(error_spec.priors),
    )
    return _rate_posterior(tables, counts)


def _reporting_concentration(tables, counts):
    wrong = counts.transpose(0, 2, 1) * tables.support
    concentration = tables.reporting_prior.copy()
    np.add.at(concentration, tables.reporting_groups, wrong)
    return concentration


def reporting_posterior(reporting_spec, counts, schema):
    """
    Calculate the Dirichlet posterior of every reporting table.

    The concentration of each (group, true level) table is the prior plus
    the number of wrong reports of each reported level among records with
    that true level. Reports equal to the truth are never counted.

    Parameters
    ----------
    reporting_spec : :class:`remendo.ReportingModelSpec`
        A ``"categorical_by_truth"`` reporting model.
    counts : 3D array of int
        Counts by cell, reported level, and true level.
    schema : :class:`remendo.Schema`
        The variable declaration.

    Returns
    -------
    concentration : 3D array
        Array with shape ``(n_groups, n_true, n_reported)``.
    """
    if reporting_spec.kind != "categorical_by_truth":
        message = "Dirichlet posteriors require a 'categorical_by_truth' model."
        raise ValidationError(message)
    tables = _ModelTables(
        schema.n_reported,
        reporting_groups=reporting_groups(reporting_spec, schema),
        reporting_prior=reporting_prior(reporting_spec, schema),
        support=reporting_support(schema),
    )
    return _reporting_concentration(tables, counts)


def _error_table(error_spec, params, tables):
    """
    Error probability of every cell and true level.
    """
    if error_spec.engine == "group_saturated":
        return np.where(tables.groups >= 0, params[tables.groups], 1.0)
    probabilities = scipy.special.expit(tables.design @ params)
    probabilities[:, tables.n_reported :] = 1
    return probabilities


def _reporting_by_cell(reporting, tables):
    if reporting is None:
        return np.broadcast_to(
            tables.uniform, (tables.reporting_groups.size, *tables.uniform.shape)
        )
    return reporting[tables.reporting_groups]


def full_conditional_y(z, theta, error_probabilities, reporting, *, record=None):
    """
    Calculate the distribution of the true level of a record given its report.

    With reported level l, the weight of true level k is
    ``theta[k] * (1 - g[k])`` if k = l and ``theta[k] * g[k] * p[k, l]``
    otherwise, in which g is the error probability and p the reporting
    table. Unreportable levels have g = 1.

    Parameters
    ----------
    z : int
        The 0-based reported level.
    theta : 1D array
        True data model probabilities of the record's cell.
    error_probabilities : 1D array
        Error probability of each true level in the record's cell.
    reporting : 2D array
        Reporting table of the record's group with shape ``(n_true,
        n_reported)``.
    record : int or None
        Index of the record, used in error messages.

    Returns
    -------
    probabilities : 1D array
        Probability of each true level.

    Raises
    ------
    NumericalError
        If every true level has zero weight.

    Examples
    --------
    >>> probabilities = full_conditional_y(
    ...     0, [0.5, 0.5], [0.1, 0.1], [[0, 1], [1, 0]]
    ... )
    >>> print(probabilities.round(6))
    [0.9 0.1]
    """
    theta = np.asarray(theta, dtype=float)
    error_probabilities = np.asarray(error_probabilities, dtype=float)
    reporting = np.asarray(reporting, dtype=float)
    correct = np.arange(theta.size) == z
    weights = theta * (
        (1 - error_probabilities) * correct + error_probabilities * reporting[:, z]
    )
    total = weights.sum()
    if not total > 0:
        message = (
            f"All true levels have zero probability for record {record} with "
            f"reported level {z}. Check for degenerate priors."
        )
        raise NumericalError(message)
    return weights / total


def full_conditional_table(theta, error_table, reporting_by_cell):
    """
    Calculate the full conditional of the truth for every cell and report.

    Vectorized version of :func:`remendo.full_conditional_y`. Combinations
    in which every true level has zero weight get all zeros.

    Parameters
    ----------
    theta : 2D array
        True data model probabilities, shape ``(n_cells, n_true)``.
    error_table : 2D array
        Error probabilities, shape ``(n_cells, n_true)``.
    reporting_by_cell : 3D array
        Reporting table of every cell, shape ``(n_cells, n_true,
        n_reported)``.

    Returns
    -------
    probabilities : 3D array
        Array with shape ``(n_cells, n_reported, n_true)``.
    """
    n_reported = reporting_by_cell.shape[-1]
    correct = np.eye(n_reported, theta.shape[1])
    weights = theta[:, np.newaxis, :] * (
        (1 - error_table)[:, np.newaxis, :] * correct
        + error_table[:, np.newaxis, :] * np.swapaxes(reporting_by_cell, 1, 2)
    )
    totals = weights.sum(axis=-1, keepdims=True)
    return np.divide(weights, totals, out=np.zeros_like(weights), where=totals > 0)


def _log_likelihood(beta, design, errors, correct):
    predictor = design @ beta
    return np.sum(
        errors * scipy.special.log_expit(predictor)
        + correct * scipy.special.log_expit(-predictor)
    )


def _metropolis_sweep(beta, log_steps, tables, counts, random, adapt_weight):
    """
    One random walk Metropolis update of each coefficient in turn.
    """
    errors, correct = error_counts(counts)
    errors = errors[:, : tables.n_reported].ravel()
    correct = correct[:, : tables.n_reported].ravel()
    mean, sd = tables.prior[:, 0], tables.prior[:, 1]
    beta = beta.copy()
    current = _log_likelihood(beta, tables.reportable_design, errors, correct)
    accepted = np.zeros(beta.size, dtype=bool)
    for j in range(beta.size):
        proposal = beta.copy()
        proposal[j] += np.exp(log_steps[j]) * random.standard_normal()
        candidate = _log_likelihood(proposal, tables.reportable_design, errors, correct)
        log_ratio = (
            candidate
            - current
            - ((proposal[j] - mean[j]) ** 2 - (beta[j] - mean[j]) ** 2)
            / (2 * sd[j] ** 2)
        )
        if np.log(random.random()) < log_ratio:
            beta, current = proposal, candidate
            accepted[j] = True
    if adapt_weight > 0:
        log_steps += adapt_weight * (accepted - TARGET_ACCEPTANCE)
    return beta, accepted


def _update_error(state, error_spec, tables, random, adapt_weight):
    if error_spec.engine == "group_saturated":
        a, b = _rate_posterior(tables, state.counts)
        return random.beta(a, b), None
    return _metropolis_sweep(
        state.error_params, state.log_steps, tables, state.counts, random, adapt_weight
    )


def update_error_params(state, error_spec, schema, *, random_seed=None, adapt_weight=0):
    """
    Draw new error model parameters given the current true values.

    Group error rates are drawn from their conjugate Beta posteriors. Logistic
    coefficients get one sweep of random walk Metropolis updates against the
    Bernoulli likelihood of the error indicators. While ``adapt_weight`` is
    positive, the step sizes in ``state.log_steps`` are moved toward a 30%
    acceptance rate in place.

    Parameters
    ----------
    state : :class:`remendo.ChainState`
        The current state.
    error_spec : :class:`remendo.ErrorModelSpec`
        The error model.
    schema : :class:`remendo.Schema`
        The variable declaration.
    random_seed : None or int or numpy.random.Generator
        A seed for a random number generator (RNG). See
        :func:`remendo.random_categorical` for details.
    adapt_weight : float
        Gain of the step size adaptation. Zero means no adaptation.

    Returns
    -------
    params : 1D array
        New group rates or coefficients.
    """
    tables = _model_tables(error_spec, ReportingModelSpec("uniform"), schema)
    params, _ = _update_error(
        state, error_spec, tables, np.random.default_rng(random_seed), adapt_weight
    )
    return params


def update_reporting_params(state, reporting_spec, schema, *, random_seed=None):
    """
    Draw new reporting tables given the current true values.

    Every (group, true level) table is drawn from its Dirichlet posterior
    (see :func:`remendo.reporting_posterior`). The ``"uniform"`` kind has no
    parameters and returns None.

    Parameters
    ----------
    state : :class:`remendo.ChainState`
        The current state.
    reporting_spec : :class:`remendo.ReportingModelSpec`
        The reporting model.
    schema : :class:`remendo.Schema`
        The variable declaration.
    random_seed : None or int or numpy.random.Generator
        A seed for a random number generator (RNG). See
        :func:`remendo.random_categorical` for details.

    Returns
    -------
    reporting : 3D array or None
        New tables with shape ``(n_groups, n_true, n_reported)``.
    """
    if reporting_spec.kind == "uniform":
        return None
    concentration = reporting_posterior(reporting_spec, state.counts, schema)
    return random_dirichlet(concentration, random_seed=random_seed)


def _check_inputs(data, posterior, schema):
    if posterior.n_cells != schema.n_cells or posterior.n_true != schema.n_true:
        message = (
            f"Posterior with {posterior.n_cells} cells and {posterior.n_true} true "
            f"levels doesn't match the schema ({schema.n_cells} cells and "
            f"{schema.n_true} true levels)."
        )
        raise ValidationError(message)
    present = np.unique(data.cells)
    invalid = present[~np.all(np.isfinite(posterior.mu[present]), axis=1)]
    if invalid.size:
        message = (
            "The posterior doesn't cover cells present in the error-prone file: "
            f"{[schema.cell_label(code) for code in invalid]}."
        )
        raise ValidationError(message)


def _initial_state(data, error_spec, reporting_spec, tables, config, theta):
    schema = data.schema
    z = np.array(data.z)
    if error_spec.engine == "group_saturated":
        params = tables.prior[:, 0] / tables.prior.sum(axis=1)
        log_steps = None
    else:
        params = tables.prior[:, 0].copy()
        log_steps = np.full(error_spec.n_terms, np.log(config.step_size))
    reporting = None
    if reporting_spec.kind == "categorical_by_truth":
        reporting = tables.reporting_prior / tables.reporting_prior.sum(
            axis=-1, keepdims=True
        )
    return ChainState(
        z=z,
        y=z.copy(),
        counts=count_records(data.cells, z, z, schema),
        error_params=params,
        reporting=reporting,
        theta=theta,
        log_steps=log_steps,
    )


def _trace_rows(imputation, state, error_spec, reporting_spec, tables, schema):
    rows = []
    names = error_spec.term_names
    native = "group_rate" if error_spec.engine == "group_saturated" else "coefficient"
    for name, value in zip(names, state.error_params, strict=True):
        rows.append((imputation, native, name, "", "", value))
    error_table = _error_table(error_spec, state.error_params, tables)
    for cell in range(schema.n_cells):
        for level in range(schema.n_reported):
            rows.append(
                (
                    imputation,
                    "error_rate",
                    schema.cell_label(cell),
                    schema.true_labels[level],
                    "",
                    error_table[cell, level],
                )
            )
    if state.reporting is not None:
        labels = reporting_group_labels(reporting_spec, schema)
        support = np.broadcast_to(tables.support, state.reporting.shape)
        for group, truth, reported in np.argwhere(support):
            rows.append(
                (
                    imputation,
                    "reporting",
                    labels[group],
                    schema.true_labels[truth],
                    schema.reported_labels[reported],
                    state.reporting[group, truth, reported],
                )
            )
    return rows


def _check_identifiability(schema, error_spec, reporting_spec, allow_overparameterized):
    report = check_identifiability(schema, error_spec, reporting_spec)
    if report.verdict != "ok":
        if not allow_overparameterized:
            message = (
                f"The models request {report.requested_params} error and reporting "
                f"parameters but the data can identify at most "
                f"{report.max_error_reporting_params}. Simplify the models or "
                "explicitly allow over-parameterized models."
            )
            raise IdentifiabilityError(message, report)
        logger.warning(
            "Running over-parameterized models (%d > %d parameters).",
            report.requested_params,
            report.max_error_reporting_params,
        )
    return report


def run_gibbs(
    data,
    posterior,
    error_spec,
    reporting_spec,
    config=None,
    *,
    random_seed=None,
    allow_overparameterized=False,
    label="gibbs",
):
    """
    Impute true values of the error-prone file with a Gibbs sampler.

    The true data model probabilities are never updated with the error-prone
    file: they are drawn from the gold-standard posterior (every iteration or
    once per saved state). Each iteration then:

    1. Draws the true level of every record from its full conditional (see
       :func:`remendo.full_conditional_y`).
    2. Updates the error model parameters (see
       :func:`remendo.update_error_params`).
    3. Updates the reporting tables (see
       :func:`remendo.update_reporting_params`).

    True values start at the reported values. Records in the same cell with
    the same report are exchangeable, so between saved states only their
    counts by true level are drawn (from a multinomial distribution). At
    saved states every record gets its own draw.

    Parameters
    ----------
    data : :class:`remendo.ErrorProneDataset`
        The error-prone records.
    posterior : :class:`remendo.TrueDataPosterior`
        Posterior of the true data model from the gold-standard file.
    error_spec : :class:`remendo.ErrorModelSpec`
        The error model.
    reporting_spec : :class:`remendo.ReportingModelSpec`
        The reporting model.
    config : :class:`remendo.GibbsConfig` or None
        Sampler settings. Default is ``GibbsConfig()``.
    random_seed : None or int or numpy.random.Generator
        A seed for a random number generator (RNG). See
        :func:`remendo.random_categorical` for details.
    allow_overparameterized : bool
        Run even if the models request more parameters than the data can
        identify. Default is False.
    label : str
        Name of the model in reports.

    Returns
    -------
    imputations : :class:`remendo.ImputationSet`
        One completed dataset per saved state, with parameter traces.

    Raises
    ------
    IdentifiabilityError
        If the models are over-parameterized and this isn't allowed.
    ValidationError
        If the posterior doesn't match the data.
    NumericalError
        If a record has zero probability for every true level.
    """
    config = GibbsConfig() if config is None else config
    schema = data.schema
    _check_inputs(data, posterior, schema)
    report = _check_identifiability(
        schema, error_spec, reporting_spec, allow_overparameterized
    )
    random = np.random.default_rng(random_seed)
    tables = _model_tables(error_spec, reporting_spec, schema)
    per_record = np.ravel_multi_index(
        (data.cells, data.z), (schema.n_cells, schema.n_reported)
    )
    n_reports = np.bincount(
        per_record, minlength=schema.n_cells * schema.n_reported
    ).reshape(schema.n_cells, schema.n_reported)
    theta = draw_theta_all(posterior, random_seed=random)
    state = _initial_state(data, error_spec, reporting_spec, tables, config, theta)
    state.error_params, _ = _update_error(state, error_spec, tables, random, 0)
    if state.reporting is not None:
        state.reporting = random_dirichlet(
            _reporting_concentration(tables, state.counts), random_seed=random
        )
    saved = {int(i): m for m, i in enumerate(config.saved_iterations)}
    imputed = np.empty((config.n_imputations, data.size), dtype=int)
    traces = []
    acceptance = np.zeros(error_spec.n_terms)
    progress = max(config.iterations // 10, 1)
    for iteration in range(1, config.iterations + 1):
        if config.theta_redraw == "per_iteration" or (iteration - 1) in saved:
            state.theta = draw_theta_all(posterior, random_seed=random)
        probabilities = full_conditional_table(
            state.theta,
            _error_table(error_spec, state.error_params, tables),
            _reporting_by_cell(state.reporting, tables),
        )
        impossible = (probabilities.sum(axis=-1) == 0) & (n_reports > 0)
        if np.any(impossible):
            record = int(np.flatnonzero(impossible.ravel()[per_record])[0])
            message = (
                f"All true levels have zero probability for record {record} in "
                f"iteration {iteration}. Check for degenerate priors."
            )
            raise NumericalError(message)
        if iteration in saved:
            state.y = random_categorical(
                probabilities[data.cells, data.z], random_seed=random
            )
            state.counts = count_records(data.cells, state.z, state.y, schema)
        else:
            state.counts = random.multinomial(n_reports, probabilities)
        adapt_weight = 0.0
        if iteration <= config.adapt_until:
            adapt_weight = iteration**-0.6
        state.error_params, accepted = _update_error(
            state, error_spec, tables, random, adapt_weight
        )
        if accepted is not None and iteration > config.burn_in:
            acceptance += accepted
        if state.reporting is not None:
            state.reporting = random_dirichlet(
                _reporting_concentration(tables, state.counts), random_seed=random
            )
        state.iteration = iteration
        if iteration == config.adapt_until and state.log_steps is not None:
            logger.info(
                "Froze Metropolis step sizes at %s.", np.exp(state.log_steps).round(4)
            )
        if iteration in saved:
            imputed[saved[iteration]] = state.y
            traces.extend(
                _trace_rows(
                    saved[iteration] + 1,
                    state,
                    error_spec,
                    reporting_spec,
                    tables,
                    schema,
                )
            )
        if iteration % progress == 0:
            logger.info("Gibbs iteration %d of %d.", iteration, config.iterations)
    provenance = {
        "method": "gibbs",
        "config": config.to_dict(),
        "error_model": error_spec.to_dict(),
        "error_model_digest": spec_digest(error_spec),
        "reporting_model": reporting_spec.to_dict(),
        "reporting_model_digest": spec_digest(reporting_spec),
        "identifiability": report.to_dict(),
        "seed": random_seed if isinstance(random_seed, int) else None,
    }
    if state.log_steps is not None:
        kept = config.iterations - config.burn_in
        provenance["acceptance_rates"] = (acceptance / kept).round(4).tolist()
    return ImputationSet(
        data,
        imputed,
        label=label,
        provenance=provenance,
        traces=pd.DataFrame(traces, columns=list(TRACE_COLUMNS)),
    )


def impute_cia(data, posterior, n_imputations=50, *, random_seed=None, label="cia"):
    """
    Impute true values from the covariates alone, ignoring the reports.

    For each imputation, draws the true data model probabilities of every
    cell from the gold-standard posterior and then the true level of every
    record independently of its report (the conditional independence
    assumption).

    Parameters
    ----------
    data : :class:`remendo.ErrorProneDataset`
        The error-prone records.
    posterior : :class:`remendo.TrueDataPosterior`
        Posterior of the true data model from the gold-standard file.
    n_imputations : int
        Number of imputations. Default is 50.
    random_seed : None or int or numpy.random.Generator
        A seed for a random number generator (RNG). See
        :func:`remendo.random_categorical` for details.
    label : str
        Name of the model in reports.

    Returns
    -------
    imputations : :class:`remendo.ImputationSet`
    """
    _check_inputs(data, posterior, data.schema)
    _check_n_imputations(n_imputations)
    random = np.random.default_rng(random_seed)
    imputed = np.empty((n_imputations, data.size), dtype=int)
    for imputation in range(n_imputations):
        theta = draw_theta_all(posterior, random_seed=random)
        imputed[imputation] = random_categorical(theta[data.cells], random_seed=random)
    provenance = {
        "method": "cia",
        "n_imputations": n_imputations,
        "seed": random_seed if isinstance(random_seed, int) else None,
    }
    return ImputationSet(data, imputed, label=label, provenance=provenance)


def impute_as_reported(data, n_imputations=50, *, label="reported"):
    """
    Take the reported values as the true values, with no adjustment.

    Useful as the unadjusted comparator in sensitivity reports. All
    imputations are identical so the between-imputation variance is zero.

    Parameters
    ----------
    data : :class:`remendo.ErrorProneDataset`
        The error-prone records.
    n_imputations : int
        Number of (identical) imputations. Default is 50.
    label : str
        Name of the model in reports.

    Returns
    -------
    imputations : :class:`remendo.ImputationSet`
    """
    _check_n_imputations(n_imputations)
    imputed = np.tile(np.asarray(data.z), (n_imputations, 1))
    provenance = {"method": "reported", "n_imputations": n_imputations}
    return ImputationSet(data, imputed, label=label, provenance=provenance)


def _check_n_imputations(n_imputations):
    if n_imputations < 1:
        message = f"Invalid number of imputations '{n_imputations}'. Must be >= 1."
        raise ValidationError(message)
