# Copyright (c) 2025 The Remendo Developers.
# Distributed under the terms of the BSD 3-Clause License.
# SPDX-License-Identifier: BSD-3-Clause
#
"""
Functions for drawing random categorical and Dirichlet values.
"""

import numpy as np


def random_categorical(probabilities, *, random_seed=None):
    """
    Draw one category from each row of a table of probabilities.

    Uses inversion of the cumulative distribution of each row, which is fully
    vectorized and deterministic given the seed.

    Parameters
    ----------
    probabilities : array
        Probabilities of each category along the last axis. Rows must sum to
        1 (not checked). Any number of leading dimensions is allowed.
    random_seed : None or int or numpy.random.Generator
        A seed for a random number generator (RNG). If an integer is given, it
        will be used as a seed for :func:`numpy.random.default_rng` which will
        then be used as the generator. If a :class:`numpy.random.Generator` is
        given, it will be used. If ``None`` is given,
        :func:`~numpy.random.default_rng` will be used with no seed to create
        a generator (resulting in different numbers with each run). Use a seed
        to make sure computations are reproducible. Default is None.

    Returns
    -------
    categories : array of int
        The 0-based category drawn for each row. Has the shape of
        *probabilities* without the last axis.

    Examples
    --------
    >>> random_categorical([[0, 1, 0], [0, 0, 1]], random_seed=0)
    array([1, 2])
    >>> random_categorical([[1, 0], [1, 0], [0, 1]], random_seed=3)
    array([0, 0, 1])
    """
    random = np.random.default_rng(random_seed)
    probabilities = np.asarray(probabilities, dtype=float)
    cumulative = np.cumsum(probabilities, axis=-1)
    uniform = random.random(probabilities.shape[:-1])
    categories = (cumulative[..., :-1] <= uniform[..., None]).sum(axis=-1)
    return categories


def random_dirichlet(concentration, *, random_seed=None):
    """
    Draw from independent Dirichlet distributions with structural zeros.

    Entries of *concentration* that are zero are treated as outside of the
    support and always receive probability zero. Each vector along the last
    axis must have at least one positive entry.

    Parameters
    ----------
    concentration : array
        Dirichlet concentration parameters along the last axis. Zeros mark
        structural zeros.
    random_seed : None or int or numpy.random.Generator
        A seed for a random number generator (RNG). See
        :func:`remendo.random_categorical` for details.

    Returns
    -------
    probabilities : array
        Array with the same shape as *concentration* with each vector along
        the last axis in the simplex.

    Examples
    --------
    >>> table = random_dirichlet([[0, 2, 3], [1, 0, 0]], random_seed=0)
    >>> print(table[:, 0], table[1])
    [0. 1.] [1. 0. 0.]
    >>> print(table.sum(axis=1))
    [1. 1.]
    """
    random = np.random.default_rng(random_seed)
    concentration = np.asarray(concentration, dtype=float)
    support = concentration > 0
    gammas = random.standard_gamma(np.where(support, concentration, 1.0))
    gammas = np.where(support, gammas, 0.0)
    return gammas / gammas.sum(axis=-1, keepdims=True)
