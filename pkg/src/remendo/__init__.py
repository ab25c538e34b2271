# Copyright (c) 2025 The Remendo Developers.
# Distributed under the terms of the BSD 3-Clause License.
# SPDX-License-Identifier: BSD-3-Clause
#
"""
These are the functions and classes that make up the Remendo API.
"""

from ._analysis import (
    CoverageReport,
    EstimandSpec,
    MIEstimate,
    coverage_diagnostic,
    estimate_mi,
    estimate_per_imputation,
    estimate_table,
    format_report,
    rubin_combine,
    sensitivity_report,
    summarize_parameters,
    write_report,
)
from ._config import DataSource, ModelChoice, RunConfig, config_from_dict, load_config
from ._datasets import ErrorProneDataset, GoldDataset, load_dataset, write_dataset
from ._design import (
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
from ._exceptions import IdentifiabilityError, NumericalError, ValidationError
from ._gibbs import (
    ChainState,
    GibbsConfig,
    count_records,
    error_counts,
    error_rate_posterior,
    full_conditional_table,
    full_conditional_y,
    impute_as_reported,
    impute_cia,
    reporting_posterior,
    run_gibbs,
    update_error_params,
    update_reporting_params,
)
from ._imputations import ImputationSet, load_imputations
from ._models import (
    ErrorModelSpec,
    IdentifiabilityReport,
    ReportingModelSpec,
    Term,
    check_identifiability,
    design_matrix,
    error_groups,
    error_probabilities,
    error_probability,
    parse_term,
    rates_to_coefficients,
    read_error_priors,
    read_reporting_priors,
    reporting_distribution,
    reporting_group_labels,
    reporting_groups,
    reporting_prior,
    reporting_support,
    spec_digest,
    uniform_reporting,
)
from ._presets import CIA, PRESETS, REPORTED, build_preset
from ._random import random_categorical, random_dirichlet
from ._schema import CellIndex, Covariate, Schema, enumerate_cells
from ._simulate import SimScenario, ledger_totals, scenario_from_dict, simulate_linked
from ._version import __version__

# Append a leading "v" to the generated version by setuptools_scm
__version__ = f"v{__version__}"
