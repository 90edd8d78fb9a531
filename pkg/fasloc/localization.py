#!/usr/bin/env python

"""Closed-form least squares positioning from two bearings."""

import numpy as np
from scipy import linalg

from .geometry import direction_vector
from .utils import as_position

__all__ = ['CollinearGeometryError', 'bearing_projection', 'ls_objective',
           'locate']

MAX_CONDITION = 1e12


class CollinearGeometryError(ValueError):
    """Raised when the two bearing lines are (nearly) parallel."""
    pass


def bearing_projection(k):
    """Returns K = I - k k^T, the projection onto the plane orthogonal to the
    unit vector k."""
    k = np.asarray(k, dtype=float)
    return np.eye(3) - np.outer(k, k)


def ls_objective(position, theta_ub, theta_ur, bs_position, ris_position):
    """Returns the sum of the squared distances of a point from the bearing
    line through the BS along theta_ub and the one through the RIS along
    theta_ur."""
    p = as_position(position)
    total = 0.0
    for angles, anchor in ((theta_ub, bs_position), (theta_ur, ris_position)):
        residual = bearing_projection(direction_vector(angles)) @ \
            (p - as_position(anchor))
        total += residual @ residual
    return float(total)


def locate(theta_ub, theta_ur, bs_position, ris_position):
    """Returns the least squares position of the UE.

    Solves (K_R + K_B) p = K_R p_R + K_B p_B, the stationarity condition of
    ls_objective, by Cholesky factorization.

    Parameters
    ==========
    theta_ub : AnglePair
        The angle of arrival of the UE at the BS.
    theta_ur : AnglePair
        The angle of arrival of the UE at the RIS.
    bs_position, ris_position : array_like, shape(3,)
        The anchors p_B and p_R.

    Returns
    =======
    position : ndarray, shape(3,)

    Raises
    ======
    CollinearGeometryError
        If the condition number of K_R + K_B exceeds 1e12.

    """
    p_b = as_position(bs_position)
    p_r = as_position(ris_position)
    k_b = bearing_projection(direction_vector(theta_ub))
    k_r = bearing_projection(direction_vector(theta_ur))
    normal = k_r + k_b

    condition = np.linalg.cond(normal)
    if not condition <= MAX_CONDITION:
        msg = ('The bearings are parallel, the normal matrix has condition '
               'number {:e}.')
        raise CollinearGeometryError(msg.format(condition))

    factor = linalg.cho_factor(normal)
    return linalg.cho_solve(factor, k_r @ p_r + k_b @ p_b)
