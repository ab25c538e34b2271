# Copyright (c) 2025 The Remendo Developers.
# Distributed under the terms of the BSD 3-Clause License.
# SPDX-License-Identifier: BSD-3-Clause
#
"""
Design-based estimation of cell totals from the gold-standard file and the
log-normal approximate posterior of the true data model.
"""

import logging
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from ._exceptions import NumericalError, ValidationError
from ._validation import check_positive, check_same_schema, check_square_symmetric

logger = logging.getLogger(__name__)

#: Total assigned to (cell, level) combinations without any gold records.
ZERO_TOTAL_FLOOR = 0.5

#: Smallest eigenvalue kept when projecting a log-scale covariance to PSD.
EIGENVALUE_FLOOR = 1e-10


@dataclass(frozen=True, eq=False)
class CellTotalsEstimate:
    """
    Estimated population totals of each true level in each cell.

    Parameters
    ----------
    totals : 2D array
        Estimated totals with shape ``(n_cells, n_true)``.
    covariance : 3D array
        Estimated covariance matrix of the totals of each cell, with shape
        ``(n_cells, n_true, n_true)``.
    counts : 2D array of int
        Number of records behind each total.
    mean_squared_weight : 1D array
        Mean squared survey weight of the records in each cell. Used as the
        variance of totals that are floored because they have no records.
    """

    totals: np.ndarray
    covariance: np.ndarray
    counts: np.ndarray
    mean_squared_weight: np.ndarray

    def __post_init__(self):
        totals = np.asarray(self.totals, dtype=float)
        covariance = np.asarray(self.covariance, dtype=float)
        if totals.ndim != 2 or covariance.shape != (*totals.shape, totals.shape[1]):
            message = (
                f"Invalid cell totals. Got totals with shape {totals.shape} and "
                f"covariances with shape {covariance.shape}."
            )
            raise ValidationError(message)
        if np.any(totals < 0):
            message = "Invalid cell totals. All totals must be >= 0."
            raise ValidationError(message)
        check_square_symmetric(covariance, name="covariance of cell totals")
        if np.any(np.diagonal(covariance, axis1=1, axis2=2) < 0):
            message = "Invalid covariance of cell totals. Variances must be >= 0."
            raise ValidationError(message)
        object.__setattr__(self, "totals", totals)
        object.__setattr__(self, "covariance", covariance)
        object.__setattr__(self, "counts", np.asarray(self.counts, dtype=int))
        object.__setattr__(
            self, "mean_squared_weight", np.asarray(self.mean_squared_weight, float)
        )

    @property
    def empty_cells(self):
        "Codes of the cells without any records."
        return np.flatnonzero(self.counts.sum(axis=1) == 0)


@dataclass(frozen=True, eq=False)
class TrueDataPosterior:
    """
    Log-normal approximate posterior of the population totals of each cell.

    The totals of cell x follow ``exp(N(mu[x], tau[x]))`` and the true data
    model probabilities are the normalized totals.

    Parameters
    ----------
    mu : 2D array
        Log-scale means with shape ``(n_cells, n_true)``.
    tau : 3D array
        Log-scale covariance matrices with shape ``(n_cells, n_true,
        n_true)``. Must be symmetric positive semi-definite.
    projected : 1D array of bool or None
        Whether the covariance of each cell had to be projected to be positive
        semi-definite. Default is None (no projection).
    """

    mu: np.ndarray
    tau: np.ndarray
    projected: np.ndarray = None
    _factor: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        mu = np.asarray(self.mu, dtype=float)
        tau = np.asarray(self.tau, dtype=float)
        if mu.ndim != 2 or tau.shape != (*mu.shape, mu.shape[1]):
            message = (
                f"Invalid posterior. Got mu with shape {mu.shape} and tau with "
                f"shape {tau.shape}."
            )
            raise ValidationError(message)
        check_square_symmetric(tau, name="posterior covariance (tau)")
        tau = (tau + np.swapaxes(tau, 1, 2)) / 2
        eigenvalues, eigenvectors = np.linalg.eigh(tau)
        tolerance = 1e-8 * np.maximum(np.abs(eigenvalues).max(axis=1), 1)
        if np.any(eigenvalues.min(axis=1) < -tolerance):
            message = (
                "Invalid posterior covariance (tau). Must be positive semi-definite."
            )
            raise ValidationError(message)
        factor = eigenvectors * np.sqrt(np.clip(eigenvalues, 0, None))[:, None, :]
        projected = self.projected
        if projected is None:
            projected = np.zeros(mu.shape[0], dtype=bool)
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "tau", tau)
        object.__setattr__(self, "projected", np.asarray(projected, dtype=bool))
        object.__setattr__(self, "_factor", factor)

    @property
    def factor(self):
        """
        Square roots of tau with shape ``(n_cells, n_true, n_true)``.

        ``factor[x] @ factor[x].T`` equals ``tau[x]`` so log-totals can be drawn
        as ``mu[x] + factor[x] @ normal``. Built from the eigendecomposition so
        singular covariances are allowed.
        """
        return self._factor

    @property
    def n_cells(self):
        "The number of cells."
        return self.mu.shape[0]

    @property
    def n_true(self):
        "The number of true levels."
        return self.mu.shape[1]

    def mean_totals(self):
        """
        Calculate the posterior mean of the totals of each cell.

        Returns
        -------
        totals : 2D array
            ``exp(mu + diag(tau) / 2)`` with shape ``(n_cells, n_true)``.
        """
        return np.exp(self.mu + np.diagonal(self.tau, axis1=1, axis2=2) / 2)

    def mean_shares(self):
        """
        Calculate the share of each true level implied by the mean totals.

        Returns
        -------
        shares : 2D array
            Mean totals normalized to sum 1 in each cell.
        """
        totals = self.mean_totals()
        return totals / totals.sum(axis=1, keepdims=True)


@dataclass(frozen=True)
class AugmentationInput:
    """
    Error-prone file estimates used to derive the total of the unreportable
    true level.

    Parameters
    ----------
    totals : 1D array
        Estimated population total of each cell, over all true levels.
    variances : 1D array
        Estimated variance of each total.
    draws : int
        Number of Monte Carlo replications. Must be >= 1000. Default is
        10,000.
    """

    totals: np.ndarray
    variances: np.ndarray
    draws: int = 10_000

    def __post_init__(self):
        totals = np.asarray(self.totals, dtype=float)
        variances = np.asarray(self.variances, dtype=float)
        if totals.ndim != 1 or variances.shape != totals.shape:
            message = (
                f"Invalid augmentation input. Got totals with shape {totals.shape} "
                f"and variances with shape {variances.shape}."
            )
            raise ValidationError(message)
        if np.any(variances < 0):
            message = "Invalid augmentation input. Variances must be >= 0."
            raise ValidationError(message)
        if self.draws < 1000:
            message = f"Invalid number of draws '{self.draws}'. Must be >= 1000."
            raise ValidationError(message)
        object.__setattr__(self, "totals", totals)
        object.__setattr__(self, "variances", variances)


def _totals_and_variances(cells, values, weights, size):
    """
    Weighted totals and with-replacement variances of indicator categories.

    Returns totals, per-category squared weight sums, and record counts.
    """
    totals = np.bincount(values, weights=weights, minlength=size)
    squares = np.bincount(values, weights=weights**2, minlength=size)
    counts = np.bincount(values, minlength=size)
    return totals, squares, counts


def estimate_cell_totals(gold, schema):
    """
    Estimate the population total of each true level in each cell.

    Uses the Horvitz-Thompson style weighted total and the with-replacement
    (probability proportional to size) variance and covariance estimators.
    With weights :math:`w_i` and :math:`n_G` gold records, the total of level
    k in cell x is :math:`\\hat{T}_{xk} = \\sum_i w_i I_{ixk}` and

    .. math::

        \\widehat{Cov}(\\hat{T}_{xk}, \\hat{T}_{xl}) = \\frac{n_G}{n_G - 1}
        \\sum_i (w_i I_{ixk} - \\hat{T}_{xk}/n_G)(w_i I_{ixl} - \\hat{T}_{xl}/n_G)

    in which :math:`n_G` is the size of the whole gold file.

    Parameters
    ----------
    gold : :class:`remendo.GoldDataset`
        The gold-standard records. Must have at least 2 records.
    schema : :class:`remendo.Schema`
        The variable declaration.

    Returns
    -------
    estimate : :class:`remendo.CellTotalsEstimate`
        Totals and covariance matrices of every cell. Cells without records
        have zero totals and covariances.

    Examples
    --------
    >>> import remendo as rm
    >>> schema = rm.Schema.create([], true_levels=2, reported_levels=2)
    >>> gold = rm.GoldDataset(schema, cells=[0, 0], y=[0, 0], weights=[2, 3])
    >>> estimate = estimate_cell_totals(gold, schema)
    >>> print(estimate.totals)
    [[5. 0.]]
    >>> print(estimate.covariance[0])
    [[1. 0.]
     [0. 0.]]
    """
    check_same_schema(gold.schema, schema)
    n_records = gold.size
    if n_records < 2:
        message = (
            f"Invalid gold-standard file with {n_records} records. "
            "Variance estimation requires at least 2 records."
        )
        raise ValidationError(message)
    shape = (schema.n_cells, schema.n_true)
    totals, squares, counts = (
        array.reshape(shape)
        for array in _totals_and_variances(
            gold.cells,
            gold.cells * schema.n_true + gold.y,
            gold.weights,
            schema.n_cells * schema.n_true,
        )
    )
    factor = n_records / (n_records - 1)
    covariance = factor * (
        squares[:, :, None] * np.eye(schema.n_true)
        - totals[:, :, None] * totals[:, None, :] / n_records
    )
    diagonal = np.einsum("xkk->xk", covariance)
    diagonal[...] = np.clip(diagonal, 0, None)
    cell_records = counts.sum(axis=1)
    overall = np.sum(gold.weights**2) / n_records
    mean_squared_weight = np.divide(
        squares.sum(axis=1),
        cell_records,
        out=np.full(schema.n_cells, overall),
        where=cell_records > 0,
    )
    estimate = CellTotalsEstimate(totals, covariance, counts, mean_squared_weight)
    if estimate.empty_cells.size:
        logger.warning(
            "Cells without gold-standard records: %s",
            [schema.cell_label(code) for code in estimate.empty_cells],
        )
    return estimate


def estimate_cell_sizes(error_prone, schema, *, draws=10_000):
    """
    Estimate the population total of each cell from the error-prone file.

    Uses the same weighted total and with-replacement variance estimator as
    :func:`remendo.estimate_cell_totals`. The result feeds
    :func:`remendo.augment_missing_level`.

    Parameters
    ----------
    error_prone : :class:`remendo.ErrorProneDataset`
        The error-prone records. Must have at least 2 records.
    schema : :class:`remendo.Schema`
        The variable declaration.
    draws : int
        Number of Monte Carlo replications used by the augmentation.

    Returns
    -------
    augmentation : :class:`remendo.AugmentationInput`
    """
    check_same_schema(error_prone.schema, schema)
    n_records = error_prone.size
    if n_records < 2:
        message = (
            f"Invalid error-prone file with {n_records} records. "
            "Variance estimation requires at least 2 records."
        )
        raise ValidationError(message)
    totals, squares, _ = _totals_and_variances(
        error_prone.cells, error_prone.cells, error_prone.weights, schema.n_cells
    )
    variances = n_records / (n_records - 1) * (squares - totals**2 / n_records)
    return AugmentationInput(totals, np.clip(variances, 0, None), draws=draws)


def _moment_match(totals, covariance):
    """
    Moment matching that also reports if the PSD projection was needed.
    """
    totals = np.atleast_1d(np.asarray(totals, dtype=float))
    covariance = np.atleast_2d(np.asarray(covariance, dtype=float))
    if covariance.shape != (totals.size, totals.size):
        message = (
            f"Incompatible totals with shape {totals.shape} and covariance with "
            f"shape {covariance.shape}."
        )
        raise ValidationError(message)
    check_positive(totals, name="totals for moment matching")
    ratio = covariance / np.outer(totals, totals)
    if np.any(ratio <= -1):
        message = (
            "Moment matching failed. Some covariances are too negative relative "
            "to the totals to be matched by a log-normal distribution."
        )
        raise NumericalError(message)
    tau = np.log1p(ratio)
    tau = (tau + tau.T) / 2
    eigenvalues, eigenvectors = np.linalg.eigh(tau)
    tolerance = 1e-12 * max(np.abs(eigenvalues).max(), 1)
    projected = bool(eigenvalues.min() < -tolerance)
    if projected:
        eigenvalues = np.clip(eigenvalues, EIGENVALUE_FLOOR, None)
        tau = (eigenvectors * eigenvalues) @ eigenvectors.T
        tau = (tau + tau.T) / 2
    mu = np.log(totals) - np.diag(tau) / 2
    return mu, tau, projected


def moment_match_lognormal(totals, covariance):
    """
    Find the log-normal distribution with the given mean and covariance.

    For a log-normal vector :math:`T = \\exp(N(\\mu, \\tau))` the mean of
    :math:`T_j` is :math:`\\exp(\\mu_j + \\tau_{jj}/2)` and the covariance of
    :math:`T_j, T_i` is :math:`E[T_j] E[T_i] (\\exp(\\tau_{ji}) - 1)`.
    Inverting these relations gives

    .. math::

        \\tau_{ji} = \\log(1 + \\Sigma_{ji} / (T_j T_i)), \\quad
        \\mu_j = \\log(T_j) - \\tau_{jj} / 2

    If the resulting :math:`\\tau` is not positive semi-definite, it is
    projected by clamping its eigenvalues at ``1e-10``. The means are always
    matched exactly because :math:`\\mu` is computed from the final diagonal.

    Parameters
    ----------
    totals : 1D array
        The means to match. All must be > 0.
    covariance : 2D array
        The covariance matrix to match.

    Returns
    -------
    mu : 1D array
        Log-scale means.
    tau : 2D array
        Log-scale covariance matrix.

    Raises
    ------
    ValidationError
        If any total is not positive.

    Examples
    --------
    >>> mu, tau = moment_match_lognormal([100], [[0]])
    >>> print(f"{mu[0]:.5f} {tau[0, 0]:.5f}")
    4.60517 0.00000
    >>> mu, tau = moment_match_lognormal([1000], [[250000]])
    >>> print(f"{mu[0]:.5f} {tau[0, 0]:.5f}")
    6.79618 0.22314
    """
    mu, tau, _ = _moment_match(totals, covariance)
    return mu, tau


def _floor_empty(totals, covariance, mean_squared_weight):
    """
    Replace zero totals by the half-count floor.
    """
    totals = totals.copy()
    covariance = covariance.copy()
    empty = totals <= 0
    if np.any(empty):
        totals[empty] = ZERO_TOTAL_FLOOR
        covariance[empty, :] = 0
        covariance[:, empty] = 0
        covariance[empty, empty] = mean_squared_weight
    return totals, covariance, empty


def lognormal_posterior(estimate):
    """
    Convert estimated cell totals into the log-normal approximate posterior.

    Totals that are zero (no gold records for that cell and level) are
    floored at 0.5 with variance equal to the mean squared weight of the
    records in the cell before moment matching with
    :func:`remendo.moment_match_lognormal`.

    Parameters
    ----------
    estimate : :class:`remendo.CellTotalsEstimate`
        Totals and covariances of every cell.

    Returns
    -------
    posterior : :class:`remendo.TrueDataPosterior`
    """
    n_cells, n_true = estimate.totals.shape
    mu = np.empty((n_cells, n_true))
    tau = np.empty((n_cells, n_true, n_true))
    projected = np.zeros(n_cells, dtype=bool)
    for cell in range(n_cells):
        totals, covariance, empty = _floor_empty(
            estimate.totals[cell],
            estimate.covariance[cell],
            estimate.mean_squared_weight[cell],
        )
        if np.any(empty):
            logger.info(
                "Cell %d: floored %d zero totals at %g.",
                cell,
                empty.sum(),
                ZERO_TOTAL_FLOOR,
            )
        mu[cell], tau[cell], projected[cell] = _moment_match(totals, covariance)
        if projected[cell]:
            logger.info("Cell %d: projected tau to positive semi-definite.", cell)
    return TrueDataPosterior(mu, tau, projected)


def _augmented_draws(mu, factor, total, variance, draws, random, cell):
    """
    Monte Carlo draws of the totals with the remainder level appended.
    """
    n_levels = mu.size
    samples = np.empty((draws, n_levels + 1))
    filled = 0
    batch = draws
    rejected = 0
    for attempt in range(100):
        normal = random.standard_normal((batch, n_levels))
        reportable = np.exp(mu + normal @ factor.T)
        overall = random.normal(total, np.sqrt(variance), size=batch)
        remainder = overall - reportable.sum(axis=1)
        keep = remainder > 0
        if attempt == 0 and keep.mean() < 0.5:
            message = (
                f"Cell {cell}: {1 - keep.mean():.1%} of the draws of the "
                "unreportable level total are negative. The gold-standard totals "
                "are too large compared to the error-prone total of the cell."
            )
            raise NumericalError(message)
        rejected += np.count_nonzero(~keep)
        accepted = min(int(keep.sum()), draws - filled)
        samples[filled : filled + accepted, :n_levels] = reportable[keep][:accepted]
        samples[filled : filled + accepted, n_levels] = remainder[keep][:accepted]
        filled += accepted
        if filled == draws:
            break
        batch = draws - filled
    else:
        message = f"Cell {cell}: failed to draw enough positive remainder totals."
        raise NumericalError(message)
    if rejected:
        logger.info(
            "Cell %d: rejected and redrew %d negative remainder totals.",
            cell,
            rejected,
        )
    return samples


def augment_missing_level(estimate, augmentation, schema, *, random_seed=None):
    """
    Derive the posterior of the totals including the unreportable true level.

    The gold-standard file only informs the totals of the reportable levels.
    The total of the single unreportable level is the difference between the
    error-prone file estimate of the cell total and the sum of the reportable
    totals. In each of ``augmentation.draws`` replications we:

    1. Draw the cell total from a normal distribution with the error-prone
       estimate and variance.
    2. Draw the reportable totals from the log-normal posterior of the
       gold-standard estimate.
    3. Set the unreportable total to the difference.

    Draws with a non-positive difference are rejected and redrawn. The mean
    and covariance of the accepted draws are then moment matched again.

    Parameters
    ----------
    estimate : :class:`remendo.CellTotalsEstimate`
        Gold-standard totals. Only the reportable levels are used.
    augmentation : :class:`remendo.AugmentationInput`
        Error-prone estimates of the total of every cell.
    schema : :class:`remendo.Schema`
        The variable declaration. Must have exactly one unreportable level.
    random_seed : None or int or numpy.random.Generator
        A seed for a random number generator (RNG). See
        :func:`remendo.random_categorical` for details.

    Returns
    -------
    posterior : :class:`remendo.TrueDataPosterior`
        Posterior over all ``n_true`` levels of every cell.

    Raises
    ------
    NumericalError
        If more than 50% of the first batch of draws of any cell have
        a negative remainder.
    """
    n_reported = schema.n_reported
    if schema.n_true != n_reported + 1:
        message = (
            "Augmentation requires exactly one unreportable true level but the "
            f"schema has {schema.n_true} true and {n_reported} reported levels."
        )
        raise ValidationError(message)
    if augmentation.totals.size != schema.n_cells:
        message = (
            f"Invalid augmentation input with {augmentation.totals.size} cells. "
            f"Expected {schema.n_cells}."
        )
        raise ValidationError(message)
    random = np.random.default_rng(random_seed)
    reportable = CellTotalsEstimate(
        estimate.totals[:, :n_reported],
        estimate.covariance[:, :n_reported, :n_reported],
        estimate.counts[:, :n_reported],
        estimate.mean_squared_weight,
    )
    gold_posterior = lognormal_posterior(reportable)
    mu = np.empty((schema.n_cells, schema.n_true))
    tau = np.empty((schema.n_cells, schema.n_true, schema.n_true))
    projected = np.zeros(schema.n_cells, dtype=bool)
    for cell in range(schema.n_cells):
        samples = _augmented_draws(
            gold_posterior.mu[cell],
            gold_posterior.factor[cell],
            augmentation.totals[cell],
            augmentation.variances[cell],
            augmentation.draws,
            random,
            cell,
        )
        mu[cell], tau[cell], projected[cell] = _moment_match(
            samples.mean(axis=0), np.cov(samples, rowvar=False)
        )
    return TrueDataPosterior(mu, tau, projected)


def draw_theta(posterior, cell, *, random_seed=None):
    """
    Draw the true data model probabilities of one cell.

    Draws log-totals from the multivariate normal posterior, exponentiates,
    and normalizes to sum 1.

    Parameters
    ----------
    posterior : :class:`remendo.TrueDataPosterior`
        The approximate posterior of the totals.
    cell : int or :class:`remendo.CellIndex`
        The cell to draw.
    random_seed : None or int or numpy.random.Generator
        A seed for a random number generator (RNG). See
        :func:`remendo.random_categorical` for details.

    Returns
    -------
    theta : 1D array
        Probability of each true level in the cell.

    Examples
    --------
    With no posterior uncertainty, the draw is the normalized totals:

    >>> import numpy as np
    >>> posterior = TrueDataPosterior(np.log([[1.0, 3.0]]), np.zeros((1, 2, 2)))
    >>> print(draw_theta(posterior, 0, random_seed=0))
    [0.25 0.75]
    """
    code = getattr(cell, "code", cell)
    if not 0 <= code < posterior.n_cells:
        message = f"Invalid cell '{code}'. The posterior has {posterior.n_cells} cells."
        raise ValidationError(message)
    random = np.random.default_rng(random_seed)
    normal = random.standard_normal(posterior.n_true)
    log_totals = posterior.mu[code] + posterior.factor[code] @ normal
    totals = np.exp(log_totals - log_totals.max())
    return totals / totals.sum()


def draw_theta_all(posterior, *, random_seed=None):
    """
    Draw the true data model probabilities of every cell at once.

    Parameters
    ----------
    posterior : :class:`remendo.TrueDataPosterior`
        The approximate posterior of the totals.
    random_seed : None or int or numpy.random.Generator
        A seed for a random number generator (RNG). See
        :func:`remendo.random_categorical` for details.

    Returns
    -------
    theta : 2D array
        Probabilities with shape ``(n_cells, n_true)``.
    """
    random = np.random.default_rng(random_seed)
    normal = random.standard_normal((posterior.n_cells, posterior.n_true))
    log_totals = posterior.mu + np.einsum("xij,xj->xi", posterior.factor, normal)
    totals = np.exp(log_totals - log_totals.max(axis=1, keepdims=True))
    return totals / totals.sum(axis=1, keepdims=True)


def _triangle_columns(prefix, size):
    return [f"{prefix}_{j + 1}_{i + 1}" for j in range(size) for i in range(j + 1)]


def write_posterior(posterior, path):
    """
    Write the posterior to a CSV file with one row per cell.

    The columns are ``cell``, ``mu_1`` to ``mu_K``, and the lower triangle of
    tau in row order (``tau_1_1``, ``tau_2_1``, ``tau_2_2``, ...).

    Parameters
    ----------
    posterior : :class:`remendo.TrueDataPosterior`
        The posterior to save.
    path : str or pathlib.Path
        The output file.
    """
    n_true = posterior.n_true
    rows, columns = np.tril_indices(n_true)
    table = pd.DataFrame(
        np.hstack([posterior.mu, posterior.tau[:, rows, columns]]),
        columns=[f"mu_{k + 1}" for k in range(n_true)]
        + _triangle_columns("tau", n_true),
    )
    table.insert(0, "cell", np.arange(posterior.n_cells))
    table.to_csv(path, index=False, float_format="%.17g")


def read_posterior(path, schema):
    """
    Read a posterior written by :func:`remendo.write_posterior`.

    Parameters
    ----------
    path : str or pathlib.Path
        The input file.
    schema : :class:`remendo.Schema`
        The variable declaration. Determines the expected cells and levels.

    Returns
    -------
    posterior : :class:`remendo.TrueDataPosterior`

    Raises
    ------
    ValidationError
        If columns or cells are missing or the covariance matrices aren't
        positive semi-definite.
    """
    table = pd.read_csv(path)
    n_true = schema.n_true
    mu_columns = [f"mu_{k + 1}" for k in range(n_true)]
    tau_columns = _triangle_columns("tau", n_true)
    absent = [c for c in ["cell", *mu_columns, *tau_columns] if c not in table]
    if absent:
        message = f"Invalid posterior file '{path}'. Missing columns {absent}."
        raise ValidationError(message)
    if sorted(table["cell"]) != list(range(schema.n_cells)):
        message = (
            f"Invalid posterior file '{path}'. Must have exactly one row for each "
            f"of the {schema.n_cells} cells."
        )
        raise ValidationError(message)
    table = table.sort_values("cell")
    rows, columns = np.tril_indices(n_true)
    tau = np.zeros((schema.n_cells, n_true, n_true))
    tau[:, rows, columns] = table[tau_columns].to_numpy(dtype=float)
    tau[:, columns, rows] = tau[:, rows, columns]
    return TrueDataPosterior(table[mu_columns].to_numpy(dtype=float), tau)


def read_cell_totals(path, schema):
    """
    Read precomputed design-based totals and covariances from a CSV file.

    Use this to supply estimates computed elsewhere (for example, with
    replicate weights). The file needs one row per cell with the columns
    ``cell``, ``total_1`` to ``total_K``, and the full covariance matrix in
    row order (``cov_1_1``, ``cov_1_2``, ..., ``cov_K_K``). An optional
    ``mean_squared_weight`` column sets the variance used for zero totals
    (default 1).

    Parameters
    ----------
    path : str or pathlib.Path
        The input file.
    schema : :class:`remendo.Schema`
        The variable declaration.

    Returns
    -------
    estimate : :class:`remendo.CellTotalsEstimate`

    Raises
    ------
    ValidationError
        If columns or cells are missing, or covariance matrices are not
        symmetric or have negative variances.
    """
    table = pd.read_csv(path)
    n_true = schema.n_true
    total_columns = [f"total_{k + 1}" for k in range(n_true)]
    covariance_columns = [
        f"cov_{j + 1}_{i + 1}" for j in range(n_true) for i in range(n_true)
    ]
    expected = ["cell", *total_columns, *covariance_columns]
    absent = [c for c in expected if c not in table]
    if absent:
        message = f"Invalid cell totals file '{path}'. Missing columns {absent}."
        raise ValidationError(message)
    if sorted(table["cell"]) != list(range(schema.n_cells)):
        message = (
            f"Invalid cell totals file '{path}'. Must have exactly one row for "
            f"each of the {schema.n_cells} cells."
        )
        raise ValidationError(message)
    table = table.sort_values("cell")
    totals = table[total_columns].to_numpy(dtype=float)
    covariance = (
        table[covariance_columns].to_numpy(dtype=float).reshape(-1, n_true, n_true)
    )
    if "mean_squared_weight" in table:
        mean_squared_weight = table["mean_squared_weight"].to_numpy(dtype=float)
    else:
        mean_squared_weight = np.ones(schema.n_cells)
    return CellTotalsEstimate(
        totals, covariance, (totals > 0).astype(int), mean_squared_weight
    )
