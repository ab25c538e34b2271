# Copyright (c) 2025 The Remendo Developers.
# Distributed under the terms of the BSD 3-Clause License.
# SPDX-License-Identifier: BSD-3-Clause
#
"""
Test the design-based totals and the log-normal posterior of the true data
model.
"""

import numpy as np
import numpy.testing as npt
import pandas as pd
import pytest
from scipy.stats import ks_2samp

from remendo._datasets import ErrorProneDataset, GoldDataset
from remendo._design import (
    AugmentationInput,
    CellTotalsEstimate,
    TrueDataPosterior,
    augment_missing_level,
    draw_theta,
    draw_theta_all,
    estimate_cell_sizes,
    estimate_cell_totals,
    lognormal_posterior,
    moment_match_lognormal,
    read_cell_totals,
    read_posterior,
    write_posterior,
)
from remendo._exceptions import NumericalError, ValidationError
from remendo._schema import Schema


def test_estimate_cell_totals_hand():
    "Two records in one cell give the hand calculated total and variance"
    schema = Schema.create([], 2, 2)
    gold = GoldDataset(schema, [0, 0], [0, 0], [2, 3])
    estimate = estimate_cell_totals(gold, schema)
    npt.assert_allclose(estimate.totals, [[5, 0]])
    # 2 * ((2 - 2.5)**2 + (3 - 2.5)**2) = 1
    npt.assert_allclose(estimate.covariance[0], [[1, 0], [0, 0]])
    npt.assert_equal(estimate.counts, [[2, 0]])
    npt.assert_allclose(estimate.mean_squared_weight, [6.5])


def test_estimate_cell_totals_brute_force():
    "Compare the vectorized covariances with a direct sum over records"
    schema = Schema.create([("sex", 2), ("black", 2)], 3, 3)
    random = np.random.default_rng(5)
    size = 40
    cells = random.integers(0, schema.n_cells, size=size)
    y = random.integers(0, schema.n_true, size=size)
    weights = random.uniform(1, 50, size=size)
    estimate = estimate_cell_totals(GoldDataset(schema, cells, y, weights), schema)
    for cell in range(schema.n_cells):
        indicators = np.zeros((size, schema.n_true))
        for i in range(size):
            if cells[i] == cell:
                indicators[i, y[i]] = weights[i]
        totals = indicators.sum(axis=0)
        deviations = indicators - totals / size
        covariance = size / (size - 1) * deviations.T @ deviations
        npt.assert_allclose(estimate.totals[cell], totals)
        npt.assert_allclose(estimate.covariance[cell], covariance, atol=1e-8)


def test_estimate_cell_totals_empty_cells():
    "Cells without records have zero totals and get the overall squared weight"
    schema = Schema.create([("age", 3)], 2, 2)
    gold = GoldDataset(schema, [0, 0, 1], [0, 1, 0], [1, 2, 3])
    estimate = estimate_cell_totals(gold, schema)
    npt.assert_equal(estimate.empty_cells, [2])
    npt.assert_allclose(estimate.totals[2], 0)
    npt.assert_allclose(estimate.covariance[2], 0)
    npt.assert_allclose(estimate.mean_squared_weight, [2.5, 9, 14 / 3])


def test_estimate_cell_totals_too_small():
    "A single gold record can't estimate variances"
    schema = Schema.create([], 2, 2)
    with pytest.raises(ValidationError, match="at least 2 records"):
        estimate_cell_totals(GoldDataset(schema, [0], [0], [1]), schema)


def test_estimate_cell_sizes():
    "Check the totals and variances of each cell from the error-prone file"
    schema = Schema.create([("age", 2)], 3, 2)
    data = ErrorProneDataset(schema, [0, 0, 1], [0, 1, 1], [1, 2, 3])
    augmentation = estimate_cell_sizes(data, schema, draws=2000)
    npt.assert_allclose(augmentation.totals, [3, 3])
    # 1.5 * (sum of squared weights - total**2 / 3)
    npt.assert_allclose(augmentation.variances, [3, 9])
    assert augmentation.draws == 2000


@pytest.mark.parametrize(
    ("totals", "covariance", "mu", "tau"),
    [
        ([100], [[0]], [4.60517], [[0]]),
        ([1000], [[250000]], [6.79618], [[0.22314]]),
        (
            [1, 4],
            [[1, 0], [0, 16]],
            [-0.34657, 1.03972],
            [[0.69315, 0], [0, 0.69315]],
        ),
    ],
)
def test_moment_match_lognormal(totals, covariance, mu, tau):
    "Check against hand calculated values"
    result_mu, result_tau = moment_match_lognormal(totals, covariance)
    npt.assert_allclose(result_mu, mu, atol=1e-5)
    npt.assert_allclose(result_tau, tau, atol=1e-5)


def test_moment_match_lognormal_recovers_moments():
    "The log-normal mean and covariance should equal the inputs"
    totals = np.array([100.0, 40.0, 10.0])
    covariance = np.array([[400.0, -50.0, 10.0], [-50.0, 90.0, 0.0], [10, 0, 25]])
    mu, tau = moment_match_lognormal(totals, covariance)
    mean = np.exp(mu + np.diag(tau) / 2)
    npt.assert_allclose(mean, totals)
    npt.assert_allclose(np.outer(mean, mean) * np.expm1(tau), covariance)


def _random_totals(random, n_cells, n_levels):
    """
    Positive totals with well conditioned covariances of 1% to 30% CV.
    """
    totals = random.uniform(1, 1e4, size=(n_cells, n_levels))
    covariance = np.empty((n_cells, n_levels, n_levels))
    for cell in range(n_cells):
        loadings = random.normal(size=(n_levels, 3 * n_levels))
        scatter = loadings @ loadings.T
        scale = np.sqrt(np.diag(scatter))
        correlation = scatter / np.outer(scale, scale)
        sd = totals[cell] * random.uniform(0.01, 0.3, size=n_levels)
        matrix = correlation * np.outer(sd, sd)
        covariance[cell] = (matrix + matrix.T) / 2
    return totals, covariance


@pytest.mark.parametrize("n_levels", [2, 5])
def test_moment_match_lognormal_random_round_trip(n_levels):
    "Analytic moments of 100 random matches reproduce the inputs"
    totals, covariance = _random_totals(np.random.default_rng(n_levels), 100, n_levels)
    estimate = CellTotalsEstimate(
        totals, covariance, np.ones(totals.shape, dtype=int), np.ones(100)
    )
    posterior = lognormal_posterior(estimate)
    assert np.count_nonzero(~posterior.projected) >= 90
    mean = posterior.mean_totals()
    npt.assert_allclose(mean, totals, rtol=1e-10)
    for cell in np.flatnonzero(~posterior.projected):
        mu, tau = moment_match_lognormal(totals[cell], covariance[cell])
        npt.assert_allclose(mu, posterior.mu[cell])
        matched = np.outer(mean[cell], mean[cell]) * np.expm1(tau)
        npt.assert_allclose(matched, covariance[cell], rtol=1e-10)


@pytest.mark.slow
def test_lognormal_posterior_monte_carlo():
    "A million draws of the posterior have the mean and covariance of the totals"
    totals = np.array([[2000.0, 800.0, 150.0, 40.0]])
    sd = 0.1 * totals[0]
    correlation = np.array(
        [
            [1.0, -0.4, 0.2, 0.1],
            [-0.4, 1.0, 0.0, -0.3],
            [0.2, 0.0, 1.0, 0.5],
            [0.1, -0.3, 0.5, 1.0],
        ]
    )
    covariance = (correlation * np.outer(sd, sd))[np.newaxis]
    estimate = CellTotalsEstimate(totals, covariance, [[50, 20, 5, 2]], [100.0])
    posterior = lognormal_posterior(estimate)
    assert not posterior.projected[0]
    normal = np.random.default_rng(11).standard_normal((1_000_000, 4))
    draws = np.exp(posterior.mu[0] + normal @ posterior.factor[0].T)
    npt.assert_allclose(draws.mean(axis=0), totals[0], rtol=0.01)
    difference = np.cov(draws, rowvar=False) - covariance[0]
    assert np.all(np.abs(difference) <= 0.05 * np.outer(sd, sd))


def test_posterior_factor():
    "The square root factors reproduce tau, also for singular matrices"
    tau = np.array([[[0.04, 0.02], [0.02, 0.01]], [[0.1, 0.0], [0.0, 0.3]]])
    posterior = TrueDataPosterior(np.zeros((2, 2)), tau)
    assert posterior.factor.shape == (2, 2, 2)
    npt.assert_allclose(
        posterior.factor @ np.swapaxes(posterior.factor, 1, 2), tau, atol=1e-15
    )


def test_moment_match_lognormal_fails():
    "Totals must be positive and covariances not too negative"
    with pytest.raises(ValidationError, match="Invalid totals"):
        moment_match_lognormal([0, 1], np.eye(2))
    with pytest.raises(NumericalError, match="too negative"):
        moment_match_lognormal([1, 1], [[1, -1], [-1, 1]])
    with pytest.raises(ValidationError, match="Incompatible totals"):
        moment_match_lognormal([1, 1], np.eye(3))


def test_lognormal_posterior_projection():
    "Covariances that give an indefinite tau are projected but keep the means"
    estimate = CellTotalsEstimate(
        totals=[[1.0, 1.0], [10.0, 20.0]],
        covariance=[[[0.01, 0.5], [0.5, 0.01]], [[1, 0], [0, 4]]],
        counts=[[3, 3], [10, 20]],
        mean_squared_weight=[1, 1],
    )
    posterior = lognormal_posterior(estimate)
    npt.assert_equal(posterior.projected, [True, False])
    assert np.linalg.eigvalsh(posterior.tau[0]).min() > 0
    npt.assert_allclose(posterior.mean_totals(), estimate.totals)
    npt.assert_allclose(posterior.mean_shares()[1], [1 / 3, 2 / 3])


def test_lognormal_posterior_floors_zero_totals():
    "Zero totals are replaced by 0.5 with the mean squared weight as variance"
    estimate = CellTotalsEstimate(
        totals=[[10.0, 0.0]],
        covariance=[[[4.0, 0.0], [0.0, 0.0]]],
        counts=[[10, 0]],
        mean_squared_weight=[2.0],
    )
    posterior = lognormal_posterior(estimate)
    npt.assert_allclose(posterior.mean_totals(), [[10, 0.5]])
    npt.assert_allclose(posterior.tau[0, 1, 1], np.log1p(2 / 0.25))


def test_augment_missing_level_exact():
    "Without any variance the unreportable total is the exact difference"
    schema = Schema.create([], 3, 2)
    estimate = CellTotalsEstimate(
        totals=[[100.0, 50.0, 0.0]],
        covariance=np.zeros((1, 3, 3)),
        counts=[[10, 5, 0]],
        mean_squared_weight=[1.0],
    )
    posterior = augment_missing_level(
        estimate, AugmentationInput([200.0], [0.0], draws=1000), schema, random_seed=0
    )
    npt.assert_allclose(posterior.mean_totals(), [[100, 50, 50]], rtol=1e-10)
    npt.assert_allclose(posterior.tau, 0, atol=1e-12)


def test_augment_missing_level_monte_carlo():
    "The mean of the remainder total is the difference of the means"
    schema = Schema.create([("sex", 2)], 3, 2)
    covariance = np.array([[10_000.0, 0, 0], [0, 2500, 0], [0, 0, 0]])
    estimate = CellTotalsEstimate(
        totals=[[1000.0, 500.0, 0.0], [200.0, 300.0, 0.0]],
        covariance=[covariance, covariance / 100],
        counts=[[100, 50, 0], [20, 30, 0]],
        mean_squared_weight=[100.0, 100.0],
    )
    augmentation = AugmentationInput([3000.0, 600.0], [40_000.0, 100.0])
    posterior = augment_missing_level(estimate, augmentation, schema, random_seed=42)
    npt.assert_allclose(
        posterior.mean_totals(), [[1000, 500, 1500], [200, 300, 100]], rtol=0.01
    )
    # The remainder is negatively correlated with the reportable totals
    assert posterior.tau[0, 0, 2] < 0
    assert posterior.tau[0, 1, 2] < 0


def test_augment_missing_level_aborts():
    "Gold totals larger than the cell total make the remainder negative"
    schema = Schema.create([], 3, 2)
    estimate = CellTotalsEstimate(
        totals=[[100.0, 50.0, 0.0]],
        covariance=np.zeros((1, 3, 3)),
        counts=[[10, 5, 0]],
        mean_squared_weight=[1.0],
    )
    with pytest.raises(NumericalError, match="are negative"):
        augment_missing_level(
            estimate, AugmentationInput([100.0], [0.0]), schema, random_seed=0
        )


def test_augment_missing_level_invalid():
    "Only one unreportable level is supported and draws must be enough"
    estimate = CellTotalsEstimate(
        totals=[[1.0, 1.0, 0, 0]],
        covariance=np.zeros((1, 4, 4)),
        counts=[[1, 1, 0, 0]],
        mean_squared_weight=[1.0],
    )
    with pytest.raises(ValidationError, match="exactly one unreportable"):
        augment_missing_level(
            estimate, AugmentationInput([10.0], [0.0]), Schema.create([], 4, 2)
        )
    with pytest.raises(ValidationError, match="Must be >= 1000"):
        AugmentationInput([10.0], [0.0], draws=10)


def test_draw_theta_degenerate():
    "Without uncertainty theta is the normalized exponential of mu"
    posterior = TrueDataPosterior(
        np.log([[1.0, 1.0, 2.0], [5, 3, 2]]), np.zeros((2, 3, 3))
    )
    npt.assert_allclose(draw_theta(posterior, 0, random_seed=1), [0.25, 0.25, 0.5])
    npt.assert_allclose(
        draw_theta_all(posterior, random_seed=1), [[0.25, 0.25, 0.5], [0.5, 0.3, 0.2]]
    )
    with pytest.raises(ValidationError, match="Invalid cell '2'"):
        draw_theta(posterior, 2)


def test_draw_theta_symmetric():
    "Symmetric posteriors give theta with mean 0.5"
    size = 100_000
    posterior = TrueDataPosterior(
        np.zeros((size, 2)), np.broadcast_to(np.eye(2), (size, 2, 2))
    )
    theta = draw_theta_all(posterior, random_seed=3)
    npt.assert_allclose(theta.sum(axis=1), 1)
    npt.assert_allclose(theta[:, 0].mean(), 0.5, atol=0.005)


def test_draw_theta_oracle():
    "Draws should follow the distribution of normalized log-normal totals"
    size = 100_000
    mu = np.array([3.0, 2.0, 1.0])
    tau = np.array([[0.5, 0.2, 0.0], [0.2, 0.3, -0.1], [0.0, -0.1, 0.4]])
    posterior = TrueDataPosterior(
        np.tile(mu, (size, 1)), np.broadcast_to(tau, (size, 3, 3))
    )
    theta = draw_theta_all(posterior, random_seed=7)
    totals = np.exp(np.random.default_rng(8).multivariate_normal(mu, tau, size=size))
    oracle = totals / totals.sum(axis=1, keepdims=True)
    for level in range(3):
        assert ks_2samp(theta[:, level], oracle[:, level]).statistic < 0.01


def test_draw_theta_seeded():
    "The same seed gives the same draws"
    posterior = TrueDataPosterior(
        np.zeros((3, 2)), np.broadcast_to(np.eye(2), (3, 2, 2))
    )
    npt.assert_allclose(
        draw_theta_all(posterior, random_seed=10),
        draw_theta_all(posterior, random_seed=10),
    )


def test_posterior_not_psd():
    "Indefinite covariances are rejected"
    with pytest.raises(ValidationError, match="positive semi-definite"):
        TrueDataPosterior(np.zeros((1, 2)), [[[1.0, 2.0], [2.0, 1.0]]])
    with pytest.raises(ValidationError, match="Invalid posterior"):
        TrueDataPosterior(np.zeros((1, 2)), np.zeros((1, 3, 3)))


def test_posterior_file(tmp_path):
    "Posteriors written to CSV are read back with the same parameters"
    schema = Schema.create([("sex", 2)], 3, 3)
    tau = np.array([[[0.5, 0.1, 0], [0.1, 0.2, 0], [0, 0, 0.1]], np.eye(3) / 10])
    posterior = TrueDataPosterior([[1.0, 2, 3], [4, 5, 6]], tau)
    path = tmp_path / "posterior.csv"
    write_posterior(posterior, path)
    columns = pd.read_csv(path).columns.tolist()
    assert columns[:4] == ["cell", "mu_1", "mu_2", "mu_3"]
    assert columns[4:] == [f"tau_{j}_{i}" for j in (1, 2, 3) for i in range(1, j + 1)]
    loaded = read_posterior(path, schema)
    npt.assert_allclose(loaded.mu, posterior.mu)
    npt.assert_allclose(loaded.tau, posterior.tau)
    with pytest.raises(ValidationError, match="one row for each"):
        read_posterior(path, Schema.create([("sex", 3)], 3, 3))


def test_read_cell_totals(tmp_path):
    "Precomputed totals need symmetric covariances"
    schema = Schema.create([], 2, 2)
    path = tmp_path / "totals.csv"
    row = {"cell": 0, "total_1": 10, "total_2": 0}
    pd.DataFrame(
        [{**row, "cov_1_1": 4, "cov_1_2": 1, "cov_2_1": 1, "cov_2_2": 2}]
    ).to_csv(path, index=False)
    estimate = read_cell_totals(path, schema)
    npt.assert_allclose(estimate.covariance[0], [[4, 1], [1, 2]])
    npt.assert_allclose(estimate.mean_squared_weight, [1])
    npt.assert_equal(estimate.counts, [[1, 0]])
    pd.DataFrame(
        [{**row, "cov_1_1": 4, "cov_1_2": 1, "cov_2_1": 3, "cov_2_2": 2}]
    ).to_csv(path, index=False)
    with pytest.raises(ValidationError, match="not symmetric"):
        read_cell_totals(path, schema)
    pd.DataFrame([row]).to_csv(path, index=False)
    with pytest.raises(ValidationError, match="Missing columns"):
        read_cell_totals(path, schema)
