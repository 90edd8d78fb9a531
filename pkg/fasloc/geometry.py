#!/usr/bin/env python

"""Coordinate primitives: positions, elevation/azimuth pairs and unit
direction vectors.

All angles are radians. The elevation is measured from the +z axis and lies
in [0, pi]; the azimuth is measured in the x-y plane from the +x axis and
lies in (-pi, pi].

"""

from collections import namedtuple

import numpy as np

from .utils import as_position

__all__ = ['AnglePair', 'DegenerateGeometryError', 'direction_vector',
           'direction_derivatives', 'angles_between', 'wrap_angle']


class DegenerateGeometryError(ValueError):
    """Raised when two points that must be distinct coincide."""
    pass


AnglePair = namedtuple('AnglePair', ['el', 'az'])
AnglePair.__doc__ = """An elevation and azimuth pair in radians."""


def wrap_angle(angle):
    """Returns the angle(s) mapped into (-pi, pi]."""
    wrapped = np.mod(np.asarray(angle, dtype=float) + np.pi, 2.0 * np.pi)
    wrapped = wrapped - np.pi
    wrapped = np.where(wrapped == -np.pi, np.pi, wrapped)
    if wrapped.ndim == 0:
        return float(wrapped)
    return wrapped


def direction_vector(angles):
    """Returns the unit direction vector for an elevation and azimuth pair.

    Parameters
    ==========
    angles : AnglePair
        Elevation and azimuth in radians.

    Returns
    =======
    k : ndarray, shape(3,)
        [sin(el) cos(az), sin(el) sin(az), cos(el)]

    """
    el, az = angles
    return np.array([np.sin(el) * np.cos(az),
                     np.sin(el) * np.sin(az),
                     np.cos(el)])


def direction_derivatives(angles):
    """Returns the partial derivatives of the direction vector with respect
    to the elevation and the azimuth.

    Returns
    =======
    dk_del : ndarray, shape(3,)
        [cos(el) cos(az), cos(el) sin(az), -sin(el)]
    dk_daz : ndarray, shape(3,)
        [-sin(el) sin(az), sin(el) cos(az), 0]

    """
    el, az = angles
    dk_del = np.array([np.cos(el) * np.cos(az),
                       np.cos(el) * np.sin(az),
                       -np.sin(el)])
    dk_daz = np.array([-np.sin(el) * np.sin(az),
                       np.sin(el) * np.cos(az),
                       0.0])
    return dk_del, dk_daz


def angles_between(p1, p2):
    """Returns the elevation and azimuth of the direction pointing from p2
    to p1.

    Parameters
    ==========
    p1 : array_like, shape(3,)
        The point being looked at.
    p2 : array_like, shape(3,)
        The point looked from.

    Returns
    =======
    angles : AnglePair
        el = arccos(dz / |d|) and az = atan2(dy, dx) with d = p1 - p2.

    Raises
    ======
    DegenerateGeometryError
        If the two points coincide.

    """
    delta = as_position(p1) - as_position(p2)
    distance = np.linalg.norm(delta)
    if distance == 0.0:
        msg = 'The points {} and {} coincide.'
        raise DegenerateGeometryError(msg.format(p1, p2))
    el = float(np.arccos(np.clip(delta[2] / distance, -1.0, 1.0)))
    az = float(np.arctan2(delta[1], delta[0]))
    if az == -np.pi:
        az = np.pi
    return AnglePair(el, az)
