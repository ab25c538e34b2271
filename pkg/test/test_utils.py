# Copyright (c) 2025 The Remendo Developers.
# Distributed under the terms of the BSD 3-Clause License.
# SPDX-License-Identifier: BSD-3-Clause
#
"""
Test the digest and manifest utilities.
"""

import pytest

from remendo._utils import (
    digest,
    file_digest,
    package_versions,
    read_manifest,
    write_manifest,
)


def test_digest_key_order():
    "Digests shouldn't depend on the order of keys"
    assert digest({"a": [1, 2], "b": {"c": 1, "d": 2}}) == digest(
        {"b": {"d": 2, "c": 1}, "a": [1, 2]}
    )
    assert digest({"a": 1}) != digest({"a": 2})


def test_manifest_byte_identical(tmp_path):
    "Equal documents should produce identical files"
    first = write_manifest(tmp_path / "first", {"b": 1, "a": [1, 2]})
    second = write_manifest(tmp_path / "second", {"a": [1, 2], "b": 1})
    assert file_digest(first) == file_digest(second)
    assert read_manifest(tmp_path / "first") == {"a": [1, 2], "b": 1}


def test_read_manifest_missing(tmp_path):
    "Directories without a manifest should raise an error"
    with pytest.raises(FileNotFoundError, match="Missing manifest"):
        read_manifest(tmp_path)


def test_package_versions():
    "All main packages are listed"
    versions = package_versions()
    assert set(versions) == {"remendo", "numpy", "scipy", "pandas"}
    assert versions["remendo"].startswith("v")
