# Copyright (c) 2025 The Remendo Developers.
# Distributed under the terms of the BSD 3-Clause License.
# SPDX-License-Identifier: BSD-3-Clause
#
"""
Run configuration read from a JSON document.
"""

import copy
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

from ._analysis import EstimandSpec
from ._exceptions import ValidationError
from ._gibbs import GibbsConfig
from ._models import (
    ErrorModelSpec,
    ReportingModelSpec,
    read_error_priors,
    read_reporting_priors,
)
from ._presets import build_preset, normalize_preset_name
from ._schema import Schema
from ._utils import digest, file_digest

logger = logging.getLogger(__name__)

#: Command line overrides that go into the "gibbs" section of the document.
GIBBS_OVERRIDES = {
    "iterations": "iterations",
    "burn_in": "burn_in",
    "imputations": "n_imputations",
}


@dataclass(frozen=True)
class DataSource:
    """
    Where to read a dataset and how its columns map to the schema.

    Parameters
    ----------
    path : pathlib.Path
        The CSV file.
    columns : dict
        Maps schema variables to column names (see
        :func:`remendo.load_dataset`).
    weight : str or None
        Name of the weight column.
    extras : tuple of str or None
        Columns carried through imputation.
    """

    path: Path
    columns: dict = field(default_factory=dict)
    weight: str = None
    extras: tuple = None

    @classmethod
    def from_value(cls, value, base):
        "Create from a path string or a dictionary, resolving against *base*."
        if isinstance(value, str):
            value = {"path": value}
        unknown = set(value) - {"path", "columns", "weight", "extras"}
        if unknown or "path" not in value:
            message = (
                f"Invalid data source {value}. Needs a 'path' and can only have "
                "'columns', 'weight', and 'extras'."
            )
            raise ValidationError(message)
        extras = value.get("extras")
        return cls(
            path=_resolve(value["path"], base),
            columns=dict(value.get("columns", {})),
            weight=value.get("weight"),
            extras=None if extras is None else tuple(extras),
        )


@dataclass(frozen=True)
class ModelChoice:
    """
    The error and reporting models of a run: a preset or inline models.

    Parameters
    ----------
    label : str
        Name of the model in reports and of its imputation directory.
    preset : str or None
        Name of a preset (see :func:`remendo.build_preset`).
    error_model : :class:`remendo.ErrorModelSpec` or None
        Inline error model.
    reporting_model : :class:`remendo.ReportingModelSpec` or None
        Inline reporting model.
    covariate_names, level_names : dict
        Schema mapping of the preset.
    error_priors, reporting_priors : pathlib.Path or None
        Prior files of the preset.
    """

    label: str
    preset: str = None
    error_model: ErrorModelSpec = None
    reporting_model: ReportingModelSpec = None
    covariate_names: dict = field(default_factory=dict)
    level_names: dict = field(default_factory=dict)
    error_priors: Path = None
    reporting_priors: Path = None

    @classmethod
    def from_value(cls, value, base):
        "Create from a preset name or a dictionary, resolving against *base*."
        if isinstance(value, str):
            value = {"preset": value}
        inline = "error_model" in value or "reporting_model" in value
        if inline == ("preset" in value):
            message = (
                "Invalid model. Give either a 'preset' or inline 'error_model' "
                "and 'reporting_model', not both."
            )
            raise ValidationError(message)
        if inline:
            if "error_model" not in value or "reporting_model" not in value:
                message = "Invalid model. Inline models need both sections."
                raise ValidationError(message)
            return cls(
                label=value.get("label", "custom"),
                error_model=ErrorModelSpec.from_dict(value["error_model"]),
                reporting_model=ReportingModelSpec.from_dict(value["reporting_model"]),
            )
        preset = normalize_preset_name(value["preset"])
        return cls(
            label=value.get("label", preset),
            preset=preset,
            covariate_names=dict(value.get("covariate_names", {})),
            level_names={
                key: tuple(levels)
                for key, levels in value.get("level_names", {}).items()
            },
            error_priors=_resolve(value.get("error_priors"), base),
            reporting_priors=_resolve(value.get("reporting_priors"), base),
        )

    def build(self, schema):
        """
        Create the models for a schema.

        Returns
        -------
        models : tuple or marker
            As returned by :func:`remendo.build_preset`.
        """
        if self.preset is None:
            return self.error_model, self.reporting_model
        error_priors = reporting_priors = None
        if self.error_priors is not None:
            error_priors = read_error_priors(self.error_priors)
        if self.reporting_priors is not None:
            reporting_priors = read_reporting_priors(self.reporting_priors, schema)
        return build_preset(
            self.preset,
            schema,
            covariate_names=self.covariate_names,
            level_names=self.level_names,
            error_priors=error_priors,
            reporting_priors=reporting_priors,
        )

    def prior_digests(self):
        "Digests of the prior files, keyed by file name."
        return {
            path.name: file_digest(path)
            for path in (self.error_priors, self.reporting_priors)
            if path is not None
        }


@dataclass(frozen=True)
class RunConfig:
    """
    Everything needed to run the commands of the command line interface.

    Use :func:`remendo.load_config` to read it from a JSON file.

    Parameters
    ----------
    schema : :class:`remendo.Schema`
        The variable declaration.
    output : pathlib.Path
        The run directory.
    gold, error_prone : :class:`remendo.DataSource` or None
        The input files.
    cell_totals : pathlib.Path or None
        Precomputed gold-standard totals (see :func:`remendo.read_cell_totals`)
        used instead of the gold-standard file.
    augmentation_draws : int
        Monte Carlo draws for the unreportable level total.
    posterior : pathlib.Path
        Where the true data model posterior is written and read.
    model : :class:`remendo.ModelChoice` or None
        The models used by ``impute``.
    gibbs : :class:`remendo.GibbsConfig`
        The sampler settings.
    estimands : tuple of :class:`remendo.EstimandSpec`
        What ``analyze`` estimates.
    runs : tuple of pathlib.Path
        Imputation directories compared by ``analyze``.
    coverage : bool
        Whether ``analyze`` runs the coverage diagnostic.
    long_format : bool
        Also write imputations in long format.
    scenario : dict or None
        Simulation scenario (see :func:`remendo.scenario_from_dict`).
    seed : int or None
        The random seed.
    allow_overparameterized : bool
        Run models that request more parameters than the data can identify.
    digest : str
        Digest of the configuration document (after overrides).
    """

    schema: Schema
    output: Path
    gold: DataSource = None
    error_prone: DataSource = None
    cell_totals: Path = None
    augmentation_draws: int = 10_000
    posterior: Path = None
    model: ModelChoice = None
    gibbs: GibbsConfig = field(default_factory=GibbsConfig)
    estimands: tuple = ()
    runs: tuple = ()
    coverage: bool = True
    long_format: bool = False
    scenario: dict = None
    seed: int = None
    allow_overparameterized: bool = False
    digest: str = ""

    @property
    def imputation_directory(self):
        "Where ``impute`` writes the imputations of the configured model."
        label = "imputations" if self.model is None else self.model.label
        return self.output / "imputations" / label


def _resolve(path, base):
    if path is None:
        return None
    path = Path(path).expanduser()
    if not path.is_absolute():
        path = Path(base) / path
    return path


KNOWN_KEYS = {
    "schema",
    "output",
    "gold",
    "error_prone",
    "cell_totals",
    "augmentation_draws",
    "posterior",
    "model",
    "gibbs",
    "estimands",
    "runs",
    "coverage",
    "long_format",
    "scenario",
    "seed",
    "allow_overparameterized",
}


def config_from_dict(document, base="."):
    """
    Create a run configuration from a dictionary.

    Parameters
    ----------
    document : dict
        The configuration document.
    base : str or pathlib.Path
        Directory against which relative paths are resolved.

    Returns
    -------
    config : :class:`remendo.RunConfig`

    Raises
    ------
    ValidationError
        If the document has unknown keys or invalid sections.
    """
    unknown = set(document) - KNOWN_KEYS
    if unknown:
        message = f"Invalid configuration. Unknown keys {sorted(unknown)}."
        raise ValidationError(message)
    if "schema" not in document:
        message = "Invalid configuration. Missing the 'schema' section."
        raise ValidationError(message)
    schema = Schema.from_dict(document["schema"])
    output = _resolve(document.get("output", "run"), base)
    model = None
    if "model" in document:
        model = ModelChoice.from_value(document["model"], base)
    gibbs = document.get("gibbs", {})
    unknown = set(gibbs) - set(GibbsConfig.__dataclass_fields__)
    if unknown:
        message = f"Invalid 'gibbs' section. Unknown keys {sorted(unknown)}."
        raise ValidationError(message)
    config = RunConfig(
        schema=schema,
        output=output,
        gold=None,
        error_prone=None,
        cell_totals=_resolve(document.get("cell_totals"), base),
        augmentation_draws=int(document.get("augmentation_draws", 10_000)),
        posterior=_resolve(document.get("posterior"), base)
        or output / "posterior" / "posterior.csv",
        model=model,
        gibbs=GibbsConfig(**gibbs),
        estimands=tuple(
            EstimandSpec.from_dict(estimand)
            for estimand in document.get("estimands", [])
        ),
        coverage=bool(document.get("coverage", True)),
        long_format=bool(document.get("long_format", False)),
        scenario=document.get("scenario"),
        seed=document.get("seed"),
        allow_overparameterized=bool(document.get("allow_overparameterized", False)),
        digest=digest(document),
    )
    sources = {
        key: DataSource.from_value(document[key], base)
        for key in ("gold", "error_prone")
        if key in document
    }
    runs = tuple(_resolve(run, base) for run in document.get("runs", []))
    if not runs:
        runs = (config.imputation_directory,)
    return RunConfig(**{**config.__dict__, **sources, "runs": runs})


def load_config(path, overrides=None):
    """
    Read a run configuration from a JSON file.

    Relative paths in the file are resolved against the file's directory.

    Parameters
    ----------
    path : str or pathlib.Path
        The JSON file.
    overrides : dict or None
        Values that replace those in the file. Keys are ``"seed"``,
        ``"output"``, ``"iterations"``, ``"burn_in"``, ``"imputations"``, and
        ``"allow_overparameterized"``. None values are ignored. A relative
        ``"output"`` is taken as relative to the current directory.

    Returns
    -------
    config : :class:`remendo.RunConfig`

    Raises
    ------
    ValidationError
        If the file isn't valid JSON or the configuration is invalid.
    """
    path = Path(path)
    try:
        document = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as error:
        message = f"Invalid configuration file '{path}': {error}"
        raise ValidationError(message) from error
    if not isinstance(document, dict):
        message = f"Invalid configuration file '{path}'. Must be a JSON object."
        raise ValidationError(message)
    document = copy.deepcopy(document)
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        if key in GIBBS_OVERRIDES:
            document.setdefault("gibbs", {})[GIBBS_OVERRIDES[key]] = value
        elif key == "output":
            document["output"] = str(Path(value).resolve())
        elif key in ("seed", "allow_overparameterized"):
            document[key] = value
        else:
            message = f"Invalid configuration override '{key}'."
            raise ValidationError(message)
    logger.info("Read configuration from '%s'.", path)
    return config_from_dict(document, base=path.resolve().parent)
