# Copyright (c) 2025 The Remendo Developers.
# Distributed under the terms of the BSD 3-Clause License.
# SPDX-License-Identifier: BSD-3-Clause
#
"""
Run the command line interface with ``python -m remendo``.
"""

import sys

from ._cli import main

sys.exit(main())
