# Copyright (c) 2025 The Remendo Developers.
# Distributed under the terms of the BSD 3-Clause License.
# SPDX-License-Identifier: BSD-3-Clause
#
"""
Exceptions raised by Remendo.
"""


class ValidationError(ValueError):
    """
    Invalid input data, configuration, or model specification.
    """


class IdentifiabilityError(ValueError):
    """
    The error and reporting models ask for more parameters than the data can
    identify.

    The :class:`~remendo.IdentifiabilityReport` that triggered the refusal is
    available as the ``report`` attribute.
    """

    def __init__(self, message, report):
        super().__init__(message)
        self.report = report


class NumericalError(ArithmeticError):
    """
    A computation could not produce a valid numerical result.
    """
