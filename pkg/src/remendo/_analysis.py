# Copyright (c) 2025 The Remendo Developers.
# Distributed under the terms of the BSD 3-Clause License.
# SPDX-License-Identifier: BSD-3-Clause
#
"""
Survey-weighted estimation on multiply-imputed datasets and the combining
rules for multiple imputation.
"""

import logging
from dataclasses import dataclass

import numpy as np
import pandas as pd
import scipy.stats

from ._design import TrueDataPosterior
from ._exceptions import ValidationError
from ._validation import check_choice, check_same_schema

logger = logging.getLogger(__name__)

ESTIMAND_KINDS = (
    "domain_total",
    "domain_mean",
    "subgroup_gap",
    "error_rate",
    "cell_share",
)

#: Column order of estimate and sensitivity reports.
REPORT_COLUMNS = ("estimand", "model", "qBar", "lo", "hi", "df", "M")


@dataclass(frozen=True)
class MIEstimate:
    """
    An estimate combined over multiple imputations.

    Parameters
    ----------
    q_bar : float
        The point estimate (mean of the per-imputation estimates).
    u_bar : float
        The within-imputation variance (mean of the per-imputation variances).
    b : float
        The between-imputation variance of the estimates.
    total_variance : float
        ``u_bar + (1 + 1/M) b``.
    df : float
        Degrees of freedom of the t reference distribution. Infinite when
        ``b`` is zero.
    ci95 : tuple of float
        The 95% confidence interval.
    n_imputations : int
        The number of imputations combined (M).
    """

    q_bar: float
    u_bar: float
    b: float
    total_variance: float
    df: float
    ci95: tuple
    n_imputations: int


def _combine(q, u, confidence=0.95):
    """
    Combining rules applied along the first axis of arrays of estimates.
    """
    n_imputations = q.shape[0]
    q_bar = q.mean(axis=0)
    u_bar = u.mean(axis=0)
    b = q.var(axis=0, ddof=1)
    inflated = (1 + 1 / n_imputations) * b
    total = u_bar + inflated
    with np.errstate(divide="ignore", invalid="ignore"):
        df = np.where(
            b > 0,
            (n_imputations - 1) * (1 + u_bar / np.where(b > 0, inflated, 1)) ** 2,
            np.inf,
        )
    probability = (1 + confidence) / 2
    quantile = np.where(
        np.isfinite(df),
        scipy.stats.t.ppf(probability, np.where(np.isfinite(df), df, 1)),
        scipy.stats.norm.ppf(probability),
    )
    half_width = quantile * np.sqrt(total)
    return q_bar, u_bar, b, total, df, q_bar - half_width, q_bar + half_width


def rubin_combine(estimates):
    """
    Combine per-imputation estimates and variances with Rubin's rules.

    With M estimates :math:`q_m` and variances :math:`u_m`, the point
    estimate is :math:`\\bar{q}`, the total variance is
    :math:`T = \\bar{u} + (1 + 1/M) b` in which :math:`b` is the sample
    variance of the :math:`q_m`, and the degrees of freedom are
    :math:`(M - 1)(1 + \\bar{u} / ((1 + 1/M) b))^2` (infinite when b is 0).
    The 95% interval uses the t distribution (normal for infinite degrees of
    freedom).

    Parameters
    ----------
    estimates : list of (float, float)
        The estimate and its variance for each imputation.

    Returns
    -------
    estimate : :class:`remendo.MIEstimate`

    Raises
    ------
    ValidationError
        If there are fewer than 2 estimates or any variance is negative.

    Examples
    --------
    >>> estimate = rubin_combine([(1, 1), (3, 1)])
    >>> estimate.q_bar, estimate.b, estimate.total_variance
    (2.0, 2.0, 4.0)
    >>> print(f"{estimate.df:.3f}")
    1.778
    >>> rubin_combine([(1, 0.5), (1, 0.5)]).df
    inf
    """
    values = np.asarray(estimates, dtype=float).reshape(-1, 2)
    if values.shape[0] < 2:
        message = (
            f"Invalid number of estimates '{values.shape[0]}'. Combining requires "
            "at least 2 imputations."
        )
        raise ValidationError(message)
    if np.any(values[:, 1] < 0):
        message = "Invalid per-imputation variances. All must be >= 0."
        raise ValidationError(message)
    q_bar, u_bar, b, total, df, lo, hi = (
        float(value) for value in _combine(values[:, 0], values[:, 1])
    )
    return MIEstimate(q_bar, u_bar, b, total, df, (lo, hi), values.shape[0])


@dataclass(frozen=True)
class EstimandSpec:
    """
    A survey-weighted quantity to estimate on each completed dataset.

    Parameters
    ----------
    kind : str
        One of:

        * ``"domain_total"``: estimated number of population members in the
          domain.
        * ``"domain_mean"``: mean of ``value`` in the domain.
        * ``"subgroup_gap"``: mean of ``value`` in the domain minus the mean
          in the ``contrast`` domain.
        * ``"error_rate"``: share of the domain with imputed truth different
          from the report.
        * ``"cell_share"``: share of the domain with imputed truth ``level``.
    domain : str or callable or None
        Which records are in the domain. A string is evaluated with
        :meth:`pandas.DataFrame.eval` on the completed dataset (columns are
        the covariates, ``y``, ``z``, ``weight``, and the extras, with level
        labels). A callable receives the completed dataset and returns a
        boolean array. None means all records.
    value : str or None
        Numeric column used by ``"domain_mean"`` and ``"subgroup_gap"``.
    contrast : str or callable or None
        The second domain of ``"subgroup_gap"``.
    level : str or None
        True level label used by ``"cell_share"``.
    weighted : bool
        Use the survey weights. If False, all weights are 1. Default is True.
    name : str or None
        Label of the estimand in reports. Default is built from the kind and
        domain.
    """

    kind: str
    domain: object = None
    value: str = None
    contrast: object = None
    level: str = None
    weighted: bool = True
    name: str = None

    def __post_init__(self):
        check_choice(self.kind, ESTIMAND_KINDS, name="kind")
        needs_value = self.kind in ("domain_mean", "subgroup_gap")
        if needs_value != (self.value is not None):
            message = (
                f"Invalid '{self.kind}' estimand. A numeric 'value' column is "
                f"{'required' if needs_value else 'not allowed'}."
            )
            raise ValidationError(message)
        if (self.kind == "subgroup_gap") != (self.contrast is not None):
            message = "A 'contrast' domain is required by (and only by) 'subgroup_gap'."
            raise ValidationError(message)
        if (self.kind == "cell_share") != (self.level is not None):
            message = "A true 'level' is required by (and only by) 'cell_share'."
            raise ValidationError(message)

    @property
    def label(self):
        "The name of the estimand in reports."
        if self.name is not None:
            return self.name
        parts = [self.kind]
        if self.level is not None:
            parts.append(f"y={self.level}")
        if self.value is not None:
            parts.append(self.value)
        if isinstance(self.domain, str):
            parts.append(f"[{self.domain}]")
        if isinstance(self.contrast, str):
            parts.append(f"vs [{self.contrast}]")
        return " ".join(parts)

    @classmethod
    def from_dict(cls, document):
        "Create the estimand from a dictionary of its parameters."
        unknown = set(document) - set(cls.__dataclass_fields__)
        if unknown:
            message = f"Invalid estimand. Unknown keys {sorted(unknown)}."
            raise ValidationError(message)
        return cls(**document)


def _domain_indicator(table, domain):
    if domain is None:
        return np.ones(len(table), dtype=bool)
    try:
        if callable(domain):
            indicator = domain(table)
        else:
            indicator = table.eval(domain)
    except Exception as error:
        message = f"Invalid domain '{domain}': {error}"
        raise ValidationError(message) from error
    indicator = np.asarray(indicator)
    if indicator.shape != (len(table),) or indicator.dtype != bool:
        message = f"Invalid domain '{domain}'. Must give one boolean per record."
        raise ValidationError(message)
    return indicator


def _linearized_variance(residuals):
    """
    With-replacement variance of a total of linearized values.
    """
    size = residuals.size
    return size / (size - 1) * np.sum((residuals - residuals.mean()) ** 2)


def _ratio_residuals(weights, domain, values):
    """
    Ratio estimate and its linearized values, or None for an empty domain.
    """
    denominator = np.sum(weights * domain)
    if denominator <= 0:
        return None
    estimate = np.sum(weights * domain * values) / denominator
    return estimate, weights * domain * (values - estimate) / denominator


def _numeric(table, column):
    if column not in table:
        message = f"Invalid value column '{column}'. Not found in the dataset."
        raise ValidationError(message)
    values = pd.to_numeric(table[column], errors="coerce").to_numpy(dtype=float)
    if not np.all(np.isfinite(values)):
        message = f"Invalid value column '{column}'. Must be numeric without gaps."
        raise ValidationError(message)
    return values


def estimate_per_imputation(table, spec):
    """
    Calculate an estimate and its variance on one completed dataset.

    Totals use the weighted sum and the with-replacement variance estimator.
    Means, shares, and error rates are ratio estimators with first-order
    linearized variance: with domain weight sum :math:`S`, the linearized
    value of record i is :math:`r_i = w_i d_i (v_i - q) / S` and the
    variance is :math:`n/(n-1) \\sum_i (r_i - \\bar{r})^2`.

    Parameters
    ----------
    table : pandas.DataFrame
        A completed dataset (see :meth:`remendo.ImputationSet.completed`).
    spec : :class:`remendo.EstimandSpec`
        What to estimate.

    Returns
    -------
    estimate : tuple of float or None
        The estimate and its variance, or None if the domain is empty.

    Examples
    --------
    >>> import pandas as pd
    >>> table = pd.DataFrame(
    ...     {"y": ["a", "b"], "z": ["a", "a"], "weight": [1.0, 1.0], "v": [2, 4]}
    ... )
    >>> estimate_per_imputation(table, EstimandSpec("domain_mean", value="v"))
    (3.0, 1.0)
    """
    if len(table) < 2:
        message = "Variance estimation requires at least 2 records."
        raise ValidationError(message)
    if spec.weighted:
        weights = table["weight"].to_numpy(dtype=float)
    else:
        weights = np.ones(len(table))
    domain = _domain_indicator(table, spec.domain)
    if spec.kind == "domain_total":
        if not domain.any():
            return None
        values = weights * domain
        total = values.sum()
        return float(total), float(_linearized_variance(values))
    if spec.kind == "subgroup_gap":
        values = _numeric(table, spec.value)
        first = _ratio_residuals(weights, domain, values)
        second = _ratio_residuals(
            weights, _domain_indicator(table, spec.contrast), values
        )
        if first is None or second is None:
            return None
        return (
            float(first[0] - second[0]),
            float(_linearized_variance(first[1] - second[1])),
        )
    if spec.kind == "domain_mean":
        values = _numeric(table, spec.value)
    elif spec.kind == "error_rate":
        values = (table["y"].to_numpy() != table["z"].to_numpy()).astype(float)
    else:
        values = (table["y"].to_numpy() == str(spec.level)).astype(float)
    ratio = _ratio_residuals(weights, domain, values)
    if ratio is None:
        return None
    return float(ratio[0]), float(_linearized_variance(ratio[1]))


def estimate_mi(imputations, spec):
    """
    Estimate on every completed dataset and combine with Rubin's rules.

    Imputations in which the domain is empty are left out and the estimate
    is combined over the remaining ones.

    Parameters
    ----------
    imputations : :class:`remendo.ImputationSet`
        The completed datasets.
    spec : :class:`remendo.EstimandSpec`
        What to estimate.

    Returns
    -------
    estimate : :class:`remendo.MIEstimate` or None
        None if fewer than 2 imputations have a non-empty domain.
    """
    estimates = []
    for imputation in range(imputations.n_imputations):
        result = estimate_per_imputation(imputations.completed(imputation), spec)
        if result is not None:
            estimates.append(result)
    empty = imputations.n_imputations - len(estimates)
    if empty:
        logger.info(
            "Estimand '%s' of '%s': empty domain in %d of %d imputations.",
            spec.label,
            imputations.label,
            empty,
            imputations.n_imputations,
        )
    if len(estimates) < 2:
        logger.warning(
            "Estimand '%s' of '%s' can't be combined: only %d imputations with "
            "records in the domain.",
            spec.label,
            imputations.label,
            len(estimates),
        )
        return None
    return rubin_combine(estimates)


def _report_row(spec, label, estimate):
    if estimate is None:
        return [spec.label, label, np.nan, np.nan, np.nan, np.nan, 0]
    return [
        spec.label,
        label,
        estimate.q_bar,
        estimate.ci95[0],
        estimate.ci95[1],
        estimate.df,
        estimate.n_imputations,
    ]


def estimate_table(imputations, estimands):
    """
    Estimate several quantities on one set of imputations.

    Parameters
    ----------
    imputations : :class:`remendo.ImputationSet`
        The completed datasets.
    estimands : list of :class:`remendo.EstimandSpec`
        What to estimate.

    Returns
    -------
    table : pandas.DataFrame
        One row per estimand with the columns ``estimand``, ``model``,
        ``qBar``, ``lo``, ``hi``, ``df``, and ``M``.
    """
    rows = [
        _report_row(spec, imputations.label, estimate_mi(imputations, spec))
        for spec in estimands
    ]
    return pd.DataFrame(rows, columns=list(REPORT_COLUMNS))


def sensitivity_report(runs, estimands):
    """
    Compare estimates across imputations made with different models.

    Parameters
    ----------
    runs : list of :class:`remendo.ImputationSet`
        Imputations of the same error-prone file under different models. The
        label of each set names its rows.
    estimands : list of :class:`remendo.EstimandSpec`
        What to estimate.

    Returns
    -------
    table : pandas.DataFrame
        For each estimand, one row per model with the columns of
        :func:`remendo.estimate_table` plus ``overlaps``: the labels of the
        other models whose intervals overlap this one, separated by ``";"``.

    Raises
    ------
    ValidationError
        If there are fewer than 2 runs or the runs have different schemas.
    """
    runs = list(runs)
    if len(runs) < 2:
        message = f"Sensitivity reports require at least 2 runs but got {len(runs)}."
        raise ValidationError(message)
    for run in runs[1:]:
        check_same_schema(runs[0].schema, run.schema)
    tables = []
    for spec in estimands:
        table = pd.DataFrame(
            [_report_row(spec, run.label, estimate_mi(run, spec)) for run in runs],
            columns=list(REPORT_COLUMNS),
        )
        lo, hi = table["lo"].to_numpy(), table["hi"].to_numpy()
        overlap = (lo[:, np.newaxis] <= hi[np.newaxis, :]) & (
            lo[np.newaxis, :] <= hi[:, np.newaxis]
        )
        np.fill_diagonal(overlap, False)
        labels = table["model"].to_numpy()
        table["overlaps"] = [";".join(labels[row]) for row in overlap]
        tables.append(table)
    return pd.concat(tables, ignore_index=True)


@dataclass(frozen=True)
class CoverageReport:
    """
    Comparison of imputed cell shares with the gold-standard shares.

    Parameters
    ----------
    table : pandas.DataFrame
        One row per (cell, true level) with the columns ``cell``, ``level``,
        ``gold_share``, ``qBar``, ``lo``, ``hi``, and ``covered``.
    """

    table: pd.DataFrame

    @property
    def total_covered(self):
        "Number of gold shares inside their multiple imputation intervals."
        return int(self.table["covered"].sum())

    @property
    def total_cells(self):
        "Number of (cell, true level) combinations evaluated."
        return len(self.table)


def coverage_diagnostic(imputations, gold):
    """
    Check if imputed cell shares agree with the gold-standard shares.

    For every cell and true level, calculates the share of the cell's
    weighted records with that imputed level in each completed dataset (a
    ratio estimator with linearized variance), combines them with Rubin's
    rules, and checks whether the gold-standard share falls inside the 95%
    interval. Cells without records in the error-prone file are skipped.

    Parameters
    ----------
    imputations : :class:`remendo.ImputationSet`
        The completed datasets. Must have at least 2 imputations.
    gold : :class:`remendo.TrueDataPosterior` or 2D array
        The gold-standard posterior (its mean shares are used) or the shares
        themselves with shape ``(n_cells, n_true)``.

    Returns
    -------
    report : :class:`remendo.CoverageReport`
    """
    schema = imputations.schema
    if isinstance(gold, TrueDataPosterior):
        shares = gold.mean_shares()
    else:
        shares = np.asarray(gold, dtype=float)
    if shares.shape != (schema.n_cells, schema.n_true):
        message = (
            f"Invalid gold shares with shape {shares.shape}. Expected "
            f"({schema.n_cells}, {schema.n_true})."
        )
        raise ValidationError(message)
    if imputations.n_imputations < 2:
        message = "The coverage diagnostic requires at least 2 imputations."
        raise ValidationError(message)
    data = imputations.data
    n_records = data.size
    size = schema.n_cells * schema.n_true
    weights = np.asarray(data.weights)
    cell_weights = np.bincount(data.cells, weights=weights, minlength=schema.n_cells)
    cell_squares = np.bincount(
        data.cells, weights=weights**2, minlength=schema.n_cells
    )
    q = np.empty((imputations.n_imputations, schema.n_cells, schema.n_true))
    u = np.empty_like(q)
    present = cell_weights > 0
    for imputation, y in enumerate(imputations.y):
        index = data.cells * schema.n_true + y
        level_weights = np.bincount(index, weights=weights, minlength=size)
        level_squares = np.bincount(index, weights=weights**2, minlength=size)
        level_weights = level_weights.reshape(schema.n_cells, schema.n_true)
        level_squares = level_squares.reshape(schema.n_cells, schema.n_true)
        share = np.divide(
            level_weights,
            cell_weights[:, np.newaxis],
            out=np.zeros_like(level_weights),
            where=present[:, np.newaxis],
        )
        squares = level_squares * (1 - 2 * share) + share**2 * cell_squares[:, None]
        variance = np.divide(
            squares,
            cell_weights[:, np.newaxis] ** 2,
            out=np.zeros_like(squares),
            where=present[:, np.newaxis],
        )
        q[imputation] = share
        u[imputation] = n_records / (n_records - 1) * variance
    q_bar, _, _, _, _, lo, hi = _combine(q, u)
    cells, levels = np.nonzero(np.broadcast_to(present[:, np.newaxis], shares.shape))
    table = pd.DataFrame(
        {
            "cell": [schema.cell_label(cell) for cell in cells],
            "level": [schema.true_labels[level] for level in levels],
            "gold_share": shares[cells, levels],
            "qBar": q_bar[cells, levels],
            "lo": lo[cells, levels],
            "hi": hi[cells, levels],
        }
    )
    table["covered"] = (table["lo"] <= table["gold_share"]) & (
        table["gold_share"] <= table["hi"]
    )
    report = CoverageReport(table)
    logger.info(
        "Coverage of '%s': %d of %d gold shares inside the intervals.",
        imputations.label,
        report.total_covered,
        report.total_cells,
    )
    return report


def summarize_parameters(imputations):
    """
    Summarize the model parameters saved with the imputations.

    Parameters
    ----------
    imputations : :class:`remendo.ImputationSet`
        Imputations with parameter traces (made by :func:`remendo.run_gibbs`).

    Returns
    -------
    table : pandas.DataFrame
        One row per parameter with the columns ``parameter``, ``group``,
        ``truth``, ``reported``, ``mean``, ``lo``, and ``hi`` (the central
        95% interval of the saved values).

    Raises
    ------
    ValidationError
        If the imputations have no parameter traces.
    """
    if imputations.traces is None:
        message = (
            f"Imputations '{imputations.label}' have no parameter traces. Only "
            "the Gibbs sampler saves them."
        )
        raise ValidationError(message)
    keys = ["parameter", "group", "truth", "reported"]
    grouped = imputations.traces.groupby(keys, sort=False)["value"]
    table = pd.DataFrame(
        {
            "mean": grouped.mean(),
            "lo": grouped.quantile(0.025),
            "hi": grouped.quantile(0.975),
        }
    )
    return table.reset_index()


def write_report(table, path):
    """
    Write a report table to CSV with 6 significant digits.

    Parameters
    ----------
    table : pandas.DataFrame
        The report.
    path : str or pathlib.Path
        The output file.
    """
    table.to_csv(path, index=False, float_format="%.6g")


def format_report(table):
    """
    Format a report table as aligned text with 6 significant digits.

    Parameters
    ----------
    table : pandas.DataFrame
        The report.

    Returns
    -------
    text : str
    """
    return table.to_string(index=False, float_format=lambda value: f"{value:.6g}")
