#!/usr/bin/env python

"""Array geometries and the far-field multipath channels between the UE, the
active RIS (ARIS) and the fluid antenna (FAS) at the base station."""

from collections import namedtuple

import numpy as np
from scipy import constants

from .geometry import (DegenerateGeometryError, angles_between,
                       direction_vector)
from .utils import as_position

__all__ = ['ArisGeometry', 'FasGeometry', 'ScattererSet', 'Scenario',
           'ChannelRealization', 'steering_vector', 'steering_aris',
           'steering_fas', 'free_space_gain', 'build_channels',
           'channel_parameters']


def steering_vector(offsets, direction, wavelength):
    """Returns the far-field steering vector exp(-j 2 pi p^T k / lambda).

    Parameters
    ==========
    offsets : ndarray, shape(n, 3)
        Element positions relative to the array reference point.
    direction : array_like, shape(3,)
        The unit direction vector k.
    wavelength : float
        The carrier wavelength in meters.

    """
    if wavelength <= 0.0:
        msg = 'The wavelength must be positive, not {}.'
        raise ValueError(msg.format(wavelength))
    phase = offsets @ np.asarray(direction, dtype=float)
    return np.exp(-2j * np.pi * phase / wavelength)


class _PlanarArray(object):
    """Element offsets of a planar array around a center position."""

    def __init__(self, offsets, center):
        self.offsets = offsets
        self.center = as_position(center)
        self.positions = self.center + self.offsets

    @property
    def num_elements(self):
        return self.offsets.shape[0]

    def steering(self, angles, wavelength):
        """Returns the steering vector for the direction given by angles."""
        return steering_vector(self.offsets, direction_vector(angles),
                               wavelength)


class ArisGeometry(_PlanarArray):
    """A uniform planar array of m_x by m_z elements parallel to the y-o-z
    plane, spaced half a wavelength apart and centered at the ARIS position.

    The m_x columns run along the y axis and the m_z rows along the z axis.
    Element m = i * m_z + j sits at offset [0, (i - (m_x - 1) / 2) d,
    (j - (m_z - 1) / 2) d].

    """

    def __init__(self, m_x, m_z, wavelength, center=(0.0, 0.0, 0.0)):
        if int(m_x) != m_x or int(m_z) != m_z or m_x < 1 or m_z < 1:
            msg = 'The ARIS shape must be two positive integers, not {}x{}.'
            raise ValueError(msg.format(m_x, m_z))
        self.m_x = int(m_x)
        self.m_z = int(m_z)
        self.spacing = wavelength / 2.0
        y = (np.arange(self.m_x) - (self.m_x - 1) / 2.0) * self.spacing
        z = (np.arange(self.m_z) - (self.m_z - 1) / 2.0) * self.spacing
        yy, zz = np.meshgrid(y, z, indexing='ij')
        offsets = np.column_stack((np.zeros(yy.size), yy.ravel(),
                                   zz.ravel()))
        super(ArisGeometry, self).__init__(offsets, center)


class FasGeometry(_PlanarArray):
    """The N discrete positions of a fluid antenna on a sqrt(N) by sqrt(N)
    lattice parallel to the x-o-z plane, centered at the BS position.

    Parameters
    ==========
    num_positions : integer
        The number of FAS positions, N. Must be a perfect square.
    wavelength : float
        The carrier wavelength in meters.
    center : array_like, shape(3,)
        The BS position.
    aperture : float, optional
        The side of the square region in wavelengths, A. Defaults to a half
        wavelength lattice step, i.e. A = (sqrt(N) - 1) / 2.

    """

    def __init__(self, num_positions, wavelength, center=(0.0, 0.0, 0.0),
                 aperture=None):
        side = int(round(np.sqrt(num_positions)))
        if num_positions < 1 or side * side != num_positions:
            msg = ('The number of FAS positions must be a perfect square, '
                   'not {}.')
            raise ValueError(msg.format(num_positions))
        if aperture is None:
            aperture = (side - 1) / 2.0
        if aperture < 0.0:
            msg = 'The FAS aperture must be nonnegative, not {}.'
            raise ValueError(msg.format(aperture))
        self.side = side
        self.aperture = float(aperture)
        if side > 1:
            self.step = self.aperture * wavelength / (side - 1)
        else:
            self.step = 0.0
        x = (np.arange(side) - (side - 1) / 2.0) * self.step
        z = (np.arange(side) - (side - 1) / 2.0) * self.step
        xx, zz = np.meshgrid(x, z, indexing='ij')
        offsets = np.column_stack((xx.ravel(), np.zeros(xx.size),
                                   zz.ravel()))
        super(FasGeometry, self).__init__(offsets, center)


def steering_aris(geom, angles, wavelength):
    """Returns the ARIS steering vector, shape(M_R,), for the given angles."""
    return geom.steering(angles, wavelength)


def steering_fas(geom, angles, wavelength):
    """Returns the FAS steering vector, shape(N,), for the given angles."""
    return geom.steering(angles, wavelength)


def free_space_gain(distance, wavelength, phase):
    """Returns the complex free-space path gain lambda / (4 pi d) e^{j phase}.

    Raises
    ======
    ValueError
        If the distance is not positive.

    """
    if not distance > 0.0:
        msg = 'The path length must be positive, not {}.'
        raise ValueError(msg.format(distance))
    return wavelength / (4.0 * np.pi * distance) * np.exp(1j * phase)


ScattererSet = namedtuple('ScattererSet', ['ue_ris', 'ris_bs', 'ue_bs'])
ScattererSet.__new__.__defaults__ = ((), (), ())
ScattererSet.__doc__ = """Scatterer positions on the UE-RIS, RIS-BS and UE-BS
links."""


ChannelRealization = namedtuple('ChannelRealization',
                                ['h_ur', 'h_ub', 'h_rb',
                                 'angles_ur', 'angles_ub',
                                 'angles_rb', 'angles_br',
                                 'gains_ur', 'gains_ub', 'gains_rb'])
ChannelRealization.__doc__ = """The UE-RIS, UE-BS and RIS-BS channels and
their per path ground truth. Index 0 of every path list is the scatterer free
direct path. angles_rb are the BS-side angles of the RIS-BS paths and
angles_br the RIS-side ones."""


class Scenario(object):
    """The known deployment: node positions, array geometries, carrier and
    scatterers.

    Parameters
    ==========
    ue_position, bs_position, ris_position : array_like, shape(3,)
        p_U (ground truth), p_B and p_R in meters.
    aris_shape : 2-tuple of integers, optional
        (m_x, m_z), the ARIS elements along y and z.
    num_fas_positions : integer, optional
        N, a perfect square.
    carrier_frequency : float, optional
        f_c in Hz.
    fas_aperture : float, optional
        A in wavelengths, see FasGeometry.
    scatterers : ScattererSet, optional
        Scatterer positions per link.
    reflection_loss : float, optional
        Amplitude multiplier applied to every scattered path.
    ris_side_sign : float, optional
        +1.0 if the UE lies on the +x side of the ARIS plane, -1.0 otherwise.
        A planar ARIS cannot observe this sign.

    """

    def __init__(self, ue_position, bs_position, ris_position,
                 aris_shape=(4, 4), num_fas_positions=100,
                 carrier_frequency=2.8e9, fas_aperture=None, scatterers=None,
                 reflection_loss=1.0, ris_side_sign=1.0):

        self.ue_position = as_position(ue_position)
        self.bs_position = as_position(bs_position)
        self.ris_position = as_position(ris_position)

        if carrier_frequency <= 0.0:
            msg = 'The carrier frequency must be positive, not {}.'
            raise ValueError(msg.format(carrier_frequency))
        self.carrier_frequency = float(carrier_frequency)
        self.wavelength = constants.c / self.carrier_frequency

        if reflection_loss < 0.0:
            msg = 'The reflection loss must be nonnegative, not {}.'
            raise ValueError(msg.format(reflection_loss))
        self.reflection_loss = float(reflection_loss)

        if ris_side_sign not in (1.0, -1.0):
            msg = 'The RIS side sign must be +1 or -1, not {}.'
            raise ValueError(msg.format(ris_side_sign))
        self.ris_side_sign = float(ris_side_sign)

        self.aris = ArisGeometry(aris_shape[0], aris_shape[1],
                                 self.wavelength, self.ris_position)
        self.fas = FasGeometry(num_fas_positions, self.wavelength,
                               self.bs_position, aperture=fas_aperture)

        if scatterers is None:
            scatterers = ScattererSet()
        self.scatterers = ScattererSet(
            *[tuple(as_position(s) for s in link) for link in scatterers])

        self._check_distinct()

        self.theta_ub = angles_between(self.ue_position, self.bs_position)
        self.theta_ur = angles_between(self.ue_position, self.ris_position)
        self.theta_rb = angles_between(self.ris_position, self.bs_position)
        self.theta_br = angles_between(self.bs_position, self.ris_position)

    def _check_distinct(self):
        nodes = {'UE': self.ue_position, 'BS': self.bs_position,
                 'RIS': self.ris_position}
        names = list(nodes)
        for i, a in enumerate(names):
            for b in names[i + 1:]:
                if np.array_equal(nodes[a], nodes[b]):
                    msg = 'The {} and the {} share the position {}.'
                    raise DegenerateGeometryError(msg.format(a, b, nodes[a]))
        for link in self.scatterers:
            for scatterer in link:
                for name, node in nodes.items():
                    if np.array_equal(scatterer, node):
                        msg = 'A scatterer coincides with the {} at {}.'
                        raise DegenerateGeometryError(msg.format(name, node))

    @property
    def num_fas_positions(self):
        return self.fas.num_elements

    @property
    def num_aris_elements(self):
        return self.aris.num_elements

    def scattered_gain(self, start, scatterer, end, phase):
        """Returns the gain of the single bounce path start -> scatterer ->
        end: the product of the two free-space segment gains, the reflection
        loss and e^{j phase}."""
        first = free_space_gain(np.linalg.norm(scatterer - start),
                                self.wavelength, phase)
        second = free_space_gain(np.linalg.norm(end - scatterer),
                                 self.wavelength, 0.0)
        return self.reflection_loss * first * second


def build_channels(scenario, rng):
    """Returns a channel realization for the scenario.

    Every path gain is the free-space gain of its segments times a phase drawn
    uniformly from [0, 2 pi) with rng. The phases are drawn in a fixed order:
    the UE-RIS, UE-BS and RIS-BS direct paths, then the scattered paths of
    each link in turn.

    Parameters
    ==========
    scenario : Scenario
        The deployment.
    rng : numpy.random.Generator
        Source of the path phases.

    Returns
    =======
    realization : ChannelRealization

    """
    lam = scenario.wavelength
    p_u = scenario.ue_position
    p_b = scenario.bs_position
    p_r = scenario.ris_position
    scatterers = scenario.scatterers

    direct_phases = rng.uniform(0.0, 2.0 * np.pi, 3)

    angles_ur = [scenario.theta_ur]
    gains_ur = [free_space_gain(np.linalg.norm(p_u - p_r), lam,
                                direct_phases[0])]
    angles_ub = [scenario.theta_ub]
    gains_ub = [free_space_gain(np.linalg.norm(p_u - p_b), lam,
                                direct_phases[1])]
    angles_rb = [scenario.theta_rb]
    angles_br = [scenario.theta_br]
    gains_rb = [free_space_gain(np.linalg.norm(p_r - p_b), lam,
                                direct_phases[2])]

    for s in scatterers.ue_ris:
        angles_ur.append(angles_between(s, p_r))
        gains_ur.append(scenario.scattered_gain(p_u, s, p_r,
                                               rng.uniform(0.0, 2.0 * np.pi)))
    for s in scatterers.ris_bs:
        angles_rb.append(angles_between(s, p_b))
        angles_br.append(angles_between(s, p_r))
        gains_rb.append(scenario.scattered_gain(p_r, s, p_b,
                                               rng.uniform(0.0, 2.0 * np.pi)))
    for s in scatterers.ue_bs:
        angles_ub.append(angles_between(s, p_b))
        gains_ub.append(scenario.scattered_gain(p_u, s, p_b,
                                               rng.uniform(0.0, 2.0 * np.pi)))

    aris = scenario.aris
    fas = scenario.fas

    h_ur = np.zeros(aris.num_elements, dtype=complex)
    for gain, angles in zip(gains_ur, angles_ur):
        h_ur += gain * aris.steering(angles, lam)

    h_ub = np.zeros(fas.num_elements, dtype=complex)
    for gain, angles in zip(gains_ub, angles_ub):
        h_ub += gain * fas.steering(angles, lam)

    h_rb = np.zeros((fas.num_elements, aris.num_elements), dtype=complex)
    for gain, bs_side, ris_side in zip(gains_rb, angles_rb, angles_br):
        h_rb += gain * np.outer(fas.steering(bs_side, lam),
                                aris.steering(ris_side, lam))

    return ChannelRealization(h_ur=h_ur, h_ub=h_ub, h_rb=h_rb,
                              angles_ur=tuple(angles_ur),
                              angles_ub=tuple(angles_ub),
                              angles_rb=tuple(angles_rb),
                              angles_br=tuple(angles_br),
                              gains_ur=tuple(gains_ur),
                              gains_ub=tuple(gains_ub),
                              gains_rb=tuple(gains_rb))


def channel_parameters(realization):
    """Returns the direct path channel parameter vector

    [Re rho_UB, Im rho_UB, Re rho_URB, Im rho_URB,
     el_UB, az_UB, el_UR, az_UR]

    where rho_URB = rho_RB rho_UR is the cascaded gain."""
    rho_ub = realization.gains_ub[0]
    rho_urb = realization.gains_rb[0] * realization.gains_ur[0]
    theta_ub = realization.angles_ub[0]
    theta_ur = realization.angles_ur[0]
    return np.array([rho_ub.real, rho_ub.imag, rho_urb.real, rho_urb.imag,
                     theta_ub.el, theta_ub.az, theta_ur.el, theta_ur.az])
