#!/usr/bin/env python

from functools import wraps

import numpy as np
import sympy as sm
try:
    plt = sm.external.import_module('matplotlib.pyplot',
                                    __import__kwargs={'fromlist': ['']},
                                    catch=(RuntimeError,))
except TypeError:  # SymPy >=1.6
    plt = sm.external.import_module('matplotlib.pyplot',
                                    import_kwargs={'fromlist': ['']},
                                    catch=(RuntimeError,))


def _optional_plt_dep(func):
    """Decorator that aborts function/method call if matplotlib is not
    installed."""
    @wraps(func)
    def wrapper(*args, **kwargs):
        if plt is None:
            raise ImportError('Install matplotlib for plotting features.')
        else:
            return func(*args, **kwargs)
    return wrapper


def dbm_to_watts(power_dbm):
    """Returns the power in watts given the power in dBm."""
    return 10.0 ** ((np.asarray(power_dbm, dtype=float) - 30.0) / 10.0)


def watts_to_dbm(power_watts):
    """Returns the power in dBm given the power in watts."""
    return 10.0 * np.log10(np.asarray(power_watts, dtype=float)) + 30.0


def complex_normal(rng, shape, variance):
    """Returns samples of a circularly symmetric complex normal distribution.

    Parameters
    ==========
    rng : numpy.random.Generator
        The random number generator to draw from.
    shape : tuple of integers
        The shape of the returned array.
    variance : float
        The total variance, E|z|^2, of each sample.

    Returns
    =======
    z : ndarray of complex, shape(shape)
        Samples of CN(0, variance).

    """
    if variance < 0.0:
        msg = 'The variance must be nonnegative, not {}.'
        raise ValueError(msg.format(variance))
    scale = np.sqrt(variance / 2.0)
    return scale * (rng.standard_normal(shape) +
                    1j * rng.standard_normal(shape))


def as_position(value):
    """Returns a finite float array of shape(3,) from any three element
    sequence."""
    position = np.asarray(value, dtype=float).reshape(-1)
    if position.shape != (3,):
        msg = 'A position needs three components, got {}.'
        raise ValueError(msg.format(position.shape[0]))
    if not np.all(np.isfinite(position)):
        msg = 'The position {} has non-finite components.'
        raise ValueError(msg.format(position))
    return position
