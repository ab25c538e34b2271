# Copyright (c) 2025 The Remendo Developers.
# Distributed under the terms of the BSD 3-Clause License.
# SPDX-License-Identifier: BSD-3-Clause
#
"""
Extra utility functions that don't fall into other categories.
"""

import hashlib
import json
from pathlib import Path


def digest(document):
    """
    Calculate a stable SHA-256 digest of a JSON-compatible document.

    Keys are sorted before hashing so that the digest doesn't depend on the
    insertion order of dictionaries.

    Parameters
    ----------
    document : dict, list, str, or number
        Anything that :func:`json.dumps` can serialize.

    Returns
    -------
    digest : str
        The hexadecimal SHA-256 digest.

    Examples
    --------
    >>> digest({"a": 1, "b": 2}) == digest({"b": 2, "a": 1})
    True
    >>> len(digest([1, 2, 3]))
    64
    """
    text = json.dumps(document, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def file_digest(path):
    """
    Calculate the SHA-256 digest of the contents of a file.

    Parameters
    ----------
    path : str or pathlib.Path
        The file to hash.

    Returns
    -------
    digest : str
        The hexadecimal SHA-256 digest.
    """
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def package_versions():
    """
    Get the versions of Remendo and its main dependencies.

    Returns
    -------
    versions : dict
        Package names and version strings.
    """
    import numpy  # noqa: PLC0415
    import pandas  # noqa: PLC0415
    import scipy  # noqa: PLC0415

    from . import __version__  # noqa: PLC0415

    return {
        "remendo": __version__,
        "numpy": numpy.__version__,
        "scipy": scipy.__version__,
        "pandas": pandas.__version__,
    }


def write_manifest(directory, document):
    """
    Write a ``manifest.json`` file to the given directory.

    The JSON is written with sorted keys and a fixed indentation so that equal
    documents always produce byte-identical files.

    Parameters
    ----------
    directory : str or pathlib.Path
        Where to write the manifest. Created if it doesn't exist.
    document : dict
        The manifest contents.

    Returns
    -------
    path : pathlib.Path
        The path of the written file.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    path = directory / "manifest.json"
    path.write_text(json.dumps(document, sort_keys=True, indent=2) + "\n")
    return path


def read_manifest(directory):
    """
    Read the ``manifest.json`` file from a directory.

    Parameters
    ----------
    directory : str or pathlib.Path
        The directory with the manifest.

    Returns
    -------
    document : dict
        The manifest contents.

    Raises
    ------
    FileNotFoundError
        If there is no manifest in the directory.
    """
    path = Path(directory) / "manifest.json"
    if not path.exists():
        message = f"Missing manifest file '{path}'."
        raise FileNotFoundError(message)
    return json.loads(path.read_text())
