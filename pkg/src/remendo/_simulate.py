# Copyright (c) 2025 The Remendo Developers.
# Distributed under the terms of the BSD 3-Clause License.
# SPDX-License-Identifier: BSD-3-Clause
#
"""
Synthetic linked populations with known measurement errors and samples from
them under informative designs.
"""

import logging
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from ._datasets import LEDGER_MARKER, ErrorProneDataset, GoldDataset
from ._exceptions import ValidationError
from ._models import (
    ErrorModelSpec,
    error_groups,
    error_probabilities,
    reporting_support,
    uniform_reporting,
)
from ._random import random_categorical
from ._validation import check_choice, check_simplex

logger = logging.getLogger(__name__)

DESIGNS = ("simple_random", "stratified_by_z")


def _broadcast(values, shape, name):
    values = np.asarray(values, dtype=float)
    try:
        return np.broadcast_to(values, shape).copy()
    except ValueError:
        message = (
            f"Invalid {name} with shape {values.shape}. Must be broadcastable to "
            f"{shape}."
        )
        raise ValidationError(message) from None


@dataclass(frozen=True, eq=False)
class SimScenario:
    """
    A synthetic population and how the two files are sampled from it.

    Parameters
    ----------
    schema : :class:`remendo.Schema`
        The variable declaration.
    population_size : int
        Number of population members.
    theta : array
        Probability of each true level in each cell. Broadcast to ``(n_cells,
        n_true)``.
    error_probabilities : array
        Probability of a misreport for each cell and true level. Broadcast to
        ``(n_cells, n_true)``. Unreportable levels always have errors.
    reporting : array or None
        Distribution of the report given an error for each cell and true
        level. Broadcast to ``(n_cells, n_true, n_reported)``. Must be zero
        for reports equal to the truth. If None, wrong reports are equally
        likely.
    n_gold : int
        Gold-standard sample size for the ``"simple_random"`` design.
    n_error_prone : int
        Error-prone sample size (simple random sample of the rest of the
        population).
    design : str
        ``"simple_random"`` or ``"stratified_by_z"`` (simple random samples
        within strata of the reported level, using ``stratum_rates``).
    stratum_rates : dict or None
        Sampling rate in (0, 1] of each reported level label for the
        ``"stratified_by_z"`` design.
    cell_probabilities : array or None
        Probability of each cell. Default is equal probabilities.
    """

    schema: object
    population_size: int
    theta: np.ndarray
    error_probabilities: np.ndarray
    reporting: np.ndarray = None
    n_gold: int = None
    n_error_prone: int = 1000
    design: str = "simple_random"
    stratum_rates: dict = field(default_factory=dict)
    cell_probabilities: np.ndarray = None

    def __post_init__(self):
        schema = self.schema
        shape = (schema.n_cells, schema.n_true)
        theta = _broadcast(self.theta, shape, "theta")
        check_simplex(theta, name="theta")
        errors = _broadcast(self.error_probabilities, shape, "error probabilities")
        if np.any((errors < 0) | (errors > 1)):
            message = "Invalid error probabilities. All must be in [0, 1]."
            raise ValidationError(message)
        errors[:, schema.n_reported :] = 1
        if self.reporting is None:
            reporting = np.broadcast_to(
                uniform_reporting(schema), (*shape, schema.n_reported)
            ).copy()
        else:
            reporting = _broadcast(
                self.reporting, (*shape, schema.n_reported), "reporting tables"
            )
            if np.any(reporting[:, ~reporting_support(schema)] != 0):
                message = (
                    "Invalid reporting tables. Reports equal to the truth must have "
                    "probability 0."
                )
                raise ValidationError(message)
            check_simplex(reporting, name="reporting tables")
        cells = self.cell_probabilities
        if cells is None:
            cells = np.full(schema.n_cells, 1 / schema.n_cells)
        cells = _broadcast(cells, (schema.n_cells,), "cell probabilities")
        check_simplex(cells, name="cell probabilities")
        check_choice(self.design, DESIGNS, name="design")
        rates = {str(key): float(value) for key, value in self.stratum_rates.items()}
        if self.design == "stratified_by_z":
            absent = [label for label in schema.reported_labels if label not in rates]
            if absent or len(rates) != schema.n_reported:
                message = (
                    f"Invalid stratum rates {rates}. Need one rate for each reported "
                    f"level {schema.reported_labels}."
                )
                raise ValidationError(message)
            if any(not 0 < rate <= 1 for rate in rates.values()):
                message = f"Invalid stratum rates {rates}. All must be in (0, 1]."
                raise ValidationError(message)
        elif self.n_gold is None or self.n_gold < 2:
            message = f"Invalid gold sample size '{self.n_gold}'. Must be >= 2."
            raise ValidationError(message)
        if self.n_error_prone < 2:
            message = (
                f"Invalid error-prone sample size '{self.n_error_prone}'. Must be >= 2."
            )
            raise ValidationError(message)
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "error_probabilities", errors)
        object.__setattr__(self, "reporting", reporting)
        object.__setattr__(self, "cell_probabilities", cells)
        object.__setattr__(self, "stratum_rates", rates)


def _sample(random, population, size):
    if size > population.size:
        message = (
            f"Can't draw {size} records from the {population.size} remaining "
            "population members. Increase the population size."
        )
        raise ValidationError(message)
    return np.sort(random.choice(population, size=size, replace=False))


def _gold_sample(scenario, z, random):
    """
    Indices and design weights of the gold-standard sample.
    """
    population = np.arange(scenario.population_size)
    if scenario.design == "simple_random":
        chosen = _sample(random, population, scenario.n_gold)
        return chosen, np.full(chosen.size, scenario.population_size / chosen.size)
    schema = scenario.schema
    indices, weights = [], []
    for level, label in enumerate(schema.reported_labels):
        stratum = population[z == level]
        if stratum.size == 0:
            message = (
                f"Stratum of reported level '{label}' has no population members."
            )
            raise ValidationError(message)
        size = max(1, int(round(scenario.stratum_rates[label] * stratum.size)))
        chosen = _sample(random, stratum, size)
        indices.append(chosen)
        weights.append(np.full(size, stratum.size / size))
    indices = np.concatenate(indices)
    weights = np.concatenate(weights)
    order = np.argsort(indices)
    return indices[order], weights[order]


def simulate_linked(scenario, *, random_seed=None):
    """
    Simulate a linked population and draw the two files from it.

    Every population member gets a cell, a true level from ``theta``, an
    error indicator from the error probabilities, and a report (the truth
    unless there's an error, in which case it's drawn from the reporting
    table). The gold-standard file records the true levels of a sample with
    design weights equal to the inverse inclusion probabilities. The
    error-prone file records the reports of a simple random sample of the
    remaining members with weights ``population_size / n_error_prone``.

    Parameters
    ----------
    scenario : :class:`remendo.SimScenario`
        The population and designs.
    random_seed : None or int or numpy.random.Generator
        A seed for a random number generator (RNG). See
        :func:`remendo.random_categorical` for details.

    Returns
    -------
    gold : :class:`remendo.GoldDataset`
    error_prone : :class:`remendo.ErrorProneDataset`
    ledger : pandas.DataFrame
        Population counts of every observed combination of covariates, true
        level, and report (labels), in the ``population_count`` column.

    Raises
    ------
    ValidationError
        If a stratum has no population members or the samples don't fit in
        the population.
    """
    schema = scenario.schema
    random = np.random.default_rng(random_seed)
    size = scenario.population_size
    cells = random.choice(schema.n_cells, size=size, p=scenario.cell_probabilities)
    y = random_categorical(scenario.theta[cells], random_seed=random)
    errors = random.random(size) < scenario.error_probabilities[cells, y]
    z = np.array(y)
    wrong = np.flatnonzero(errors)
    z[wrong] = random_categorical(
        scenario.reporting[cells[wrong], y[wrong]], random_seed=random
    )
    gold_index, gold_weights = _gold_sample(scenario, z, random)
    rest = np.setdiff1d(np.arange(size), gold_index)
    prone_index = _sample(random, rest, scenario.n_error_prone)
    gold = GoldDataset(schema, cells[gold_index], y[gold_index], gold_weights)
    error_prone = ErrorProneDataset(
        schema,
        cells[prone_index],
        z[prone_index],
        np.full(prone_index.size, size / prone_index.size),
    )
    logger.info(
        "Simulated %d members (%.2f%% agreement), %d gold and %d error-prone records.",
        size,
        100 * np.mean(y == z),
        gold.size,
        error_prone.size,
    )
    return gold, error_prone, _ledger(schema, cells, y, z)


def _ledger(schema, cells, y, z):
    shape = (schema.n_cells, schema.n_true, schema.n_reported)
    counts = np.bincount(
        np.ravel_multi_index((cells, y, z), shape), minlength=np.prod(shape)
    ).reshape(shape)
    cell, truth, report = np.nonzero(counts)
    levels = schema.cell_levels()[cell]
    table = pd.DataFrame(
        {
            covariate.name: np.asarray(covariate.labels, dtype=object)[levels[:, i]]
            for i, covariate in enumerate(schema.covariates)
        }
    )
    table["y"] = np.asarray(schema.true_labels, dtype=object)[truth]
    table["z"] = np.asarray(schema.reported_labels, dtype=object)[report]
    table[LEDGER_MARKER] = counts[cell, truth, report]
    return table


def ledger_totals(ledger, schema):
    """
    Population count of every cell and true level from a truth ledger.

    Parameters
    ----------
    ledger : pandas.DataFrame
        The ledger from :func:`remendo.simulate_linked`.
    schema : :class:`remendo.Schema`
        The variable declaration.

    Returns
    -------
    totals : 2D array of int
        Array with shape ``(n_cells, n_true)``.
    """
    levels = np.array(
        [
            [schema.level_code(name, label) for label in ledger[name]]
            for name in schema.covariate_names
        ]
    ).reshape(len(schema.covariate_names), len(ledger))
    cells = np.atleast_1d(schema.encode_cell(levels))
    y = np.array([schema.level_code("y", label) for label in ledger["y"]], dtype=int)
    totals = np.zeros((schema.n_cells, schema.n_true), dtype=int)
    np.add.at(totals, (cells, y), ledger[LEDGER_MARKER].to_numpy(dtype=int))
    return totals


def scenario_from_dict(document, schema):
    """
    Create a scenario from a JSON-compatible dictionary.

    Keys are the parameters of :class:`remendo.SimScenario` (except
    ``schema``). Instead of ``error_probabilities``, the dictionary can give
    an ``error_model`` (see :meth:`remendo.ErrorModelSpec.from_dict`) and its
    ``error_params``: coefficients for ``"general_logistic"`` or group rates
    for ``"group_saturated"``.

    Parameters
    ----------
    document : dict
        The scenario.
    schema : :class:`remendo.Schema`
        The variable declaration.

    Returns
    -------
    scenario : :class:`remendo.SimScenario`
    """
    document = dict(document)
    document.pop("schema", None)
    document.pop("seed", None)
    if "error_model" in document:
        spec = ErrorModelSpec.from_dict(document.pop("error_model"))
        params = np.asarray(document.pop("error_params"), dtype=float)
        if spec.engine == "group_saturated":
            groups = error_groups(spec, schema)
            probabilities = np.where(groups >= 0, params[groups], 1.0)
        else:
            probabilities = error_probabilities(spec, params, schema)
        document["error_probabilities"] = probabilities
    known = set(SimScenario.__dataclass_fields__) - {"schema"}
    unknown = set(document) - known
    if unknown:
        message = f"Invalid scenario. Unknown keys {sorted(unknown)}."
        raise ValidationError(message)
    return SimScenario(schema, **document)
