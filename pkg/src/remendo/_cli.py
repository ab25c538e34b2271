# Copyright (c) 2025 The Remendo Developers.
# Distributed under the terms of the BSD 3-Clause License.
# SPDX-License-Identifier: BSD-3-Clause
#
"""
The ``remendo`` command line interface.
"""

import argparse
import logging
import sys
from dataclasses import replace

import pandas as pd

from ._analysis import (
    coverage_diagnostic,
    estimate_table,
    format_report,
    sensitivity_report,
    summarize_parameters,
    write_report,
)
from ._config import load_config
from ._datasets import LEDGER_DIRECTORY, load_dataset, write_dataset
from ._design import (
    augment_missing_level,
    estimate_cell_sizes,
    estimate_cell_totals,
    lognormal_posterior,
    read_cell_totals,
    read_posterior,
    write_posterior,
)
from ._exceptions import IdentifiabilityError, NumericalError, ValidationError
from ._gibbs import impute_as_reported, impute_cia, run_gibbs
from ._imputations import load_imputations
from ._models import check_identifiability
from ._presets import CIA, REPORTED
from ._simulate import scenario_from_dict, simulate_linked
from ._utils import file_digest, package_versions, write_manifest

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_IDENTIFIABILITY = 3
EXIT_NUMERICAL = 4


def _load(source, role, schema):
    if source is None:
        message = f"The configuration has no '{role}' data source."
        raise ValidationError(message)
    return load_dataset(
        source.path,
        role,
        schema,
        columns=source.columns,
        weight=source.weight,
        extras=source.extras,
    )


def _manifest(config, command, directory, files, **extra):
    document = {
        "command": command,
        "config_digest": config.digest,
        "seed": config.seed,
        "versions": package_versions(),
        "files": {name: file_digest(directory / name) for name in files},
    }
    document.update(extra)
    return write_manifest(directory, document)


def _write(text):
    sys.stdout.write(text + "\n")


def estimate_gold(config):
    """
    Estimate the true data model posterior from the gold-standard file.
    """
    schema = config.schema
    if config.cell_totals is not None:
        estimate = read_cell_totals(config.cell_totals, schema)
    else:
        estimate = estimate_cell_totals(_load(config.gold, "gold", schema), schema)
    if schema.forced_levels:
        if config.error_prone is None:
            message = (
                f"True levels {list(schema.true_labels[schema.n_reported :])} can't "
                "be reported so "
                "their totals must be derived from the error-prone file. Add an "
                "'error_prone' data source to the configuration."
            )
            raise ValidationError(message)
        augmentation = estimate_cell_sizes(
            _load(config.error_prone, "error_prone", schema),
            schema,
            draws=config.augmentation_draws,
        )
        posterior = augment_missing_level(
            estimate, augmentation, schema, random_seed=config.seed
        )
    else:
        logger.info("All true levels can be reported. Skipping augmentation.")
        posterior = lognormal_posterior(estimate)
    directory = config.posterior.parent
    directory.mkdir(parents=True, exist_ok=True)
    write_posterior(posterior, config.posterior)
    shares = pd.DataFrame(
        posterior.mean_shares(), columns=list(schema.true_labels)
    ).assign(projected=posterior.projected)
    shares.insert(0, "cell", [schema.cell_label(c) for c in range(schema.n_cells)])
    write_report(shares, directory / "shares.csv")
    _manifest(
        config,
        "estimate-gold",
        directory,
        [config.posterior.name, "shares.csv"],
        empty_cells=[schema.cell_label(cell) for cell in estimate.empty_cells],
    )
    _write(format_report(shares))
    return EXIT_OK


def _require_model(config):
    if config.model is None:
        message = "The configuration has no 'model' section."
        raise ValidationError(message)
    return config.model.build(config.schema)


def impute(config):
    """
    Impute the true values of the error-prone file with the configured model.
    """
    schema = config.schema
    models = _require_model(config)
    data = _load(config.error_prone, "error_prone", schema)
    label = config.model.label
    n_imputations = config.gibbs.n_imputations
    if models is REPORTED:
        imputations = impute_as_reported(data, n_imputations, label=label)
    else:
        posterior = read_posterior(config.posterior, schema)
        if models is CIA:
            imputations = impute_cia(
                data, posterior, n_imputations, random_seed=config.seed, label=label
            )
        else:
            error_spec, reporting_spec = models
            imputations = run_gibbs(
                data,
                posterior,
                error_spec,
                reporting_spec,
                config.gibbs,
                random_seed=config.seed,
                allow_overparameterized=config.allow_overparameterized,
                label=label,
            )
    provenance = {
        **imputations.provenance,
        "config_digest": config.digest,
        "prior_files": config.model.prior_digests(),
    }
    if models is not REPORTED:
        provenance["posterior_digest"] = file_digest(config.posterior)
    imputations = replace(imputations, provenance=provenance)
    directory = config.imputation_directory
    imputations.save(directory, long_format=config.long_format)
    _write(
        f"Wrote {imputations.n_imputations} imputations of {data.size} records "
        f"to '{directory}'."
    )
    return EXIT_OK


def analyze(config):
    """
    Combine estimates across imputations and check them against the gold file.
    """
    runs = []
    for directory in config.runs:
        try:
            runs.append(load_imputations(directory))
        except FileNotFoundError as error:
            message = f"No imputations found in '{directory}'."
            raise ValidationError(message) from error
    directory = config.output / "analysis"
    directory.mkdir(parents=True, exist_ok=True)
    files = []
    if config.estimands:
        if len(runs) > 1:
            table = sensitivity_report(runs, config.estimands)
        else:
            table = estimate_table(runs[0], config.estimands)
        write_report(table, directory / "estimates.csv")
        files.append("estimates.csv")
        _write(format_report(table))
    else:
        logger.warning("No estimands configured.")
    coverage = {}
    if config.coverage and config.posterior.exists():
        posterior = read_posterior(config.posterior, config.schema)
        for run in runs:
            if run.n_imputations < 2:
                logger.warning("Skipping coverage of '%s' (one imputation).", run.label)
                continue
            report = coverage_diagnostic(run, posterior)
            name = f"coverage_{run.label}.csv"
            write_report(report.table, directory / name)
            files.append(name)
            coverage[run.label] = [report.total_covered, report.total_cells]
            _write(
                f"{run.label}: {report.total_covered} of {report.total_cells} gold "
                "shares covered."
            )
    elif config.coverage:
        logger.warning("No posterior at '%s'. Skipping coverage.", config.posterior)
    for run in runs:
        if run.traces is None:
            continue
        name = f"parameters_{run.label}.csv"
        write_report(summarize_parameters(run), directory / name)
        files.append(name)
    _manifest(
        config,
        "analyze",
        directory,
        files,
        runs=[str(run) for run in config.runs],
        coverage=coverage,
    )
    return EXIT_OK


def simulate(config):
    """
    Simulate a linked population and write the two files and the truth ledger.
    """
    if config.scenario is None:
        message = "The configuration has no 'scenario' section."
        raise ValidationError(message)
    scenario = scenario_from_dict(config.scenario, config.schema)
    gold, error_prone, ledger = simulate_linked(scenario, random_seed=config.seed)
    directory = config.output
    (directory / LEDGER_DIRECTORY).mkdir(parents=True, exist_ok=True)
    write_dataset(gold, directory / "gold.csv")
    write_dataset(error_prone, directory / "error_prone.csv")
    ledger_path = f"{LEDGER_DIRECTORY}/ledger.csv"
    ledger.to_csv(directory / ledger_path, index=False)
    _manifest(
        config,
        "simulate",
        directory,
        ["gold.csv", "error_prone.csv", ledger_path],
        schema=config.schema.to_dict(),
    )
    _write(
        f"Wrote {gold.size} gold and {error_prone.size} error-prone records to "
        f"'{directory}'."
    )
    return EXIT_OK


def identifiability(config):
    """
    Count the parameters of the configured model against what data identify.
    """
    models = _require_model(config)
    if models is CIA or models is REPORTED:
        _write(f"Model '{config.model.label}' has no error or reporting parameters.")
        return EXIT_OK
    report = check_identifiability(config.schema, *models)
    _write(str(report))
    if report.verdict != "ok":
        return EXIT_IDENTIFIABILITY
    return EXIT_OK


COMMANDS = {
    "estimate-gold": estimate_gold,
    "impute": impute,
    "analyze": analyze,
    "simulate": simulate,
    "check-identifiability": identifiability,
}


def parse_args(argv=None):
    """
    Parse the command line arguments.
    """
    parser = argparse.ArgumentParser(
        prog="remendo",
        description="Multiple imputation of true values in error-prone files.",
    )
    parser.add_argument("--version", action="version", version=_version())
    commands = parser.add_subparsers(dest="command", required=True)
    for name, function in COMMANDS.items():
        command = commands.add_parser(name, help=function.__doc__.strip())
        command.add_argument("config", help="JSON configuration file")
        command.add_argument("--seed", type=int, help="random seed")
        command.add_argument("--output", help="run directory")
        command.add_argument("--iterations", type=int, help="Gibbs iterations")
        command.add_argument("--burn-in", type=int, help="Gibbs burn-in iterations")
        command.add_argument("--imputations", type=int, help="number of imputations")
        command.add_argument(
            "--allow-overparameterized",
            action="store_true",
            default=None,
            help="run models that request more parameters than data identify",
        )
        command.add_argument(
            "-v",
            "--verbose",
            action="count",
            default=0,
            help="log progress (-v) or debugging details (-vv) to stderr",
        )
    return parser.parse_args(argv)


def _version():
    from . import __version__  # noqa: PLC0415

    return f"remendo {__version__}"


def main(argv=None):
    """
    Run the command line interface.

    Parameters
    ----------
    argv : list of str or None
        The arguments. Default is ``sys.argv[1:]``.

    Returns
    -------
    code : int
        0 on success, 2 for invalid input, 3 for over-parameterized models,
        and 4 for numerical failures.
    """
    args = parse_args(argv)
    level = [logging.WARNING, logging.INFO, logging.DEBUG][min(args.verbose, 2)]
    logging.basicConfig(
        level=level,
        stream=sys.stderr,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    overrides = {
        "seed": args.seed,
        "output": args.output,
        "iterations": args.iterations,
        "burn_in": args.burn_in,
        "imputations": args.imputations,
        "allow_overparameterized": args.allow_overparameterized,
    }
    try:
        config = load_config(args.config, overrides)
        return COMMANDS[args.command](config)
    except IdentifiabilityError as error:
        logger.error("%s", error)
        _write(str(error.report))
        return EXIT_IDENTIFIABILITY
    except (ValidationError, FileNotFoundError) as error:
        logger.error("%s", error)
        return EXIT_INVALID
    except NumericalError as error:
        logger.error("%s", error)
        return EXIT_NUMERICAL
