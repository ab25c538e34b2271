# Copyright (c) 2025 The Remendo Developers.
# Distributed under the terms of the BSD 3-Clause License.
# SPDX-License-Identifier: BSD-3-Clause
#
"""
Test the command line interface from simulation to analysis.
"""

import json

import pandas as pd
import pytest

from remendo._cli import (
    EXIT_IDENTIFIABILITY,
    EXIT_INVALID,
    EXIT_OK,
    main,
    parse_args,
)

SCHEMA = {
    "covariates": [{"name": "sex", "levels": ["M", "F"]}],
    "true_levels": ["lo", "mid", "none"],
    "reported_levels": 2,
}


def _write_config(directory, **changes):
    document = {
        "schema": SCHEMA,
        "output": "run",
        "gold": {"path": "run/gold.csv", "weight": "weight"},
        "error_prone": {"path": "run/error_prone.csv", "weight": "weight"},
        "augmentation_draws": 500,
        "model": {
            "label": "flat",
            "error_model": {"engine": "group_saturated", "terms": ["intercept"]},
            "reporting_model": {"kind": "uniform"},
        },
        "gibbs": {"iterations": 60, "n_imputations": 3},
        "estimands": [
            {"kind": "error_rate"},
            {"kind": "cell_share", "level": "none", "domain": "sex == 'F'"},
        ],
        "scenario": {
            "population_size": 2000,
            "theta": [0.5, 0.3, 0.2],
            "error_probabilities": 0.1,
            "n_gold": 300,
            "n_error_prone": 300,
        },
    }
    document.update(changes)
    path = directory / "config.json"
    path.write_text(json.dumps(document))
    return str(path)


@pytest.fixture
def config(tmp_path):
    "A configuration of a small simulated study"
    return _write_config(tmp_path)


def test_parse_args():
    "Overrides default to None so the file values are kept"
    args = parse_args(["impute", "config.json", "--seed", "3", "-vv"])
    assert args.command == "impute"
    assert args.seed == 3
    assert args.verbose == 2
    assert args.iterations is None
    assert args.allow_overparameterized is None


@pytest.mark.slow
def test_pipeline(config, tmp_path, capsys):
    "Simulate, estimate, impute, and analyze with the same configuration"
    run = tmp_path / "run"
    assert main(["simulate", config, "--seed", "1"]) == EXIT_OK
    for name in ("gold.csv", "error_prone.csv", "truth/ledger.csv", "manifest.json"):
        assert (run / name).exists()
    assert main(["estimate-gold", config, "--seed", "2"]) == EXIT_OK
    assert (run / "posterior" / "posterior.csv").exists()
    shares = pd.read_csv(run / "posterior" / "shares.csv")
    assert list(shares.columns) == ["cell", "lo", "mid", "none", "projected"]
    assert main(["impute", config, "--seed", "3"]) == EXIT_OK
    imputations = run / "imputations" / "flat"
    manifest = json.loads((imputations / "manifest.json").read_text())
    assert manifest["n_imputations"] == 3
    assert manifest["provenance"]["seed"] == 3
    assert len(manifest["provenance"]["posterior_digest"]) == 64
    assert main(["analyze", config]) == EXIT_OK
    estimates = pd.read_csv(run / "analysis" / "estimates.csv")
    assert len(estimates) == 2
    assert set(estimates.model) == {"flat"}
    assert (run / "analysis" / "coverage_flat.csv").exists()
    assert (run / "analysis" / "parameters_flat.csv").exists()
    assert "error_rate" in capsys.readouterr().out


@pytest.mark.slow
def test_pipeline_deterministic(config, tmp_path):
    "Running again with the same seed writes the same bytes"
    run = tmp_path / "run"
    main(["simulate", config, "--seed", "1"])
    main(["estimate-gold", config, "--seed", "2"])
    main(["impute", config, "--seed", "3"])
    files = [
        run / "posterior" / "posterior.csv",
        run / "imputations" / "flat" / "imputation_001.csv",
        run / "imputations" / "flat" / "parameters.csv",
    ]
    first = [path.read_bytes() for path in files]
    main(["estimate-gold", config, "--seed", "2"])
    main(["impute", config, "--seed", "3"])
    assert [path.read_bytes() for path in files] == first


@pytest.mark.slow
def test_pipeline_comparators(tmp_path):
    "The comparators impute without a sampler and can be compared"
    run = tmp_path / "run"
    config = _write_config(tmp_path, model="reported")
    main(["simulate", config, "--seed", "1"])
    assert main(["impute", config]) == EXIT_OK
    config = _write_config(tmp_path, model="cia")
    assert main(["estimate-gold", config, "--seed", "2"]) == EXIT_OK
    assert main(["impute", config, "--seed", "4"]) == EXIT_OK
    config = _write_config(
        tmp_path,
        runs=["run/imputations/reported", "run/imputations/cia"],
        coverage=False,
    )
    assert main(["analyze", config]) == EXIT_OK
    estimates = pd.read_csv(run / "analysis" / "estimates.csv", keep_default_na=False)
    assert list(estimates.model) == ["reported", "cia", "reported", "cia"]
    assert "overlaps" in estimates.columns


def test_check_identifiability(tmp_path, capsys):
    "Over-parameterized models are refused with the report"
    config = _write_config(
        tmp_path,
        model={
            "error_model": {"terms": ["intercept", "y=mid"]},
            "reporting_model": {"kind": "categorical_by_truth"},
        },
    )
    assert main(["check-identifiability", config]) == EXIT_IDENTIFIABILITY
    output = capsys.readouterr().out
    assert "over_parameterized" in output
    assert "max_error_reporting_params  2" in output
    assert main(["check-identifiability", _write_config(tmp_path)]) == EXIT_OK
    assert main(["check-identifiability", _write_config(tmp_path, model="cia")]) == 0


def test_estimate_gold_needs_error_prone(tmp_path):
    "Unreportable levels need the error-prone file"
    config = _write_config(tmp_path)
    main(["simulate", config, "--seed", "1"])
    document = json.loads((tmp_path / "config.json").read_text())
    del document["error_prone"]
    (tmp_path / "config.json").write_text(json.dumps(document))
    assert main(["estimate-gold", config]) == EXIT_INVALID


@pytest.mark.parametrize(
    "changes",
    [
        {"schema": {"covariates": []}},
        {"gold": {"path": "missing.csv"}},
        {"gold": {"path": "run/truth/ledger.csv"}},
        {"colour": "red"},
    ],
)
def test_invalid_input(tmp_path, changes):
    "Invalid configurations and inputs exit with code 2"
    main(["simulate", _write_config(tmp_path), "--seed", "1"])
    assert main(["estimate-gold", _write_config(tmp_path, **changes)]) == EXIT_INVALID


def test_missing_config(tmp_path):
    "A missing configuration file exits with code 2"
    assert main(["analyze", str(tmp_path / "missing.json")]) == EXIT_INVALID


def test_analyze_without_imputations(config):
    "Analysis needs imputations on disk"
    assert main(["analyze", config]) == EXIT_INVALID
