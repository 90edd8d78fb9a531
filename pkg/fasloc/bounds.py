#!/usr/bin/env python

"""Fisher information of the direct path channel parameters, its
reparameterization to the UE position and the resulting Cramer-Rao and
position error bounds.

The channel parameter vector is::

    gamma = [Re rho_UB, Im rho_UB, Re rho_URB, Im rho_URB,
             el_UB, az_UB, el_UR, az_UR]

and the position domain vector::

    gamma_p = [Re rho_UB, Im rho_UB, Re rho_URB, Im rho_URB, x_U, y_U, z_U]

The ARIS noise covariance C_R is evaluated at the scenario and held fixed when
differentiating the mean signal.

"""

from collections import namedtuple
from functools import lru_cache
import warnings

import numpy as np
import sympy as sm

from .channel import free_space_gain
from .geometry import (AnglePair, DegenerateGeometryError, angles_between,
                       direction_derivatives)
from .utils import as_position

__all__ = ['UnboundedBoundWarning', 'FimBundle', 'mean_signal',
           'mean_signal_matrix', 'mean_signal_gradient',
           'mean_signal_gradients', 'noise_variances', 'fim_channel',
           'jacobian', 'position_fim', 'peb', 'fim_bundle',
           'channel_from_position']

MAX_CONDITION = 1e12


class UnboundedBoundWarning(RuntimeWarning):
    """Issued when a Fisher information matrix is singular and the affected
    bounds are infinite."""
    pass


FimBundle = namedtuple('FimBundle', ['F', 'J', 'F_p', 'crb_diag', 'peb'])
FimBundle.__doc__ = """The 8 x 8 channel FIM, the 8 x 7 Jacobian of gamma
with respect to gamma_p, the 7 x 7 position domain FIM, the CRB of each entry
of gamma (variances) and the position error bound in meters."""


def channel_from_position(gamma_p, scenario):
    """Returns gamma for the gains of gamma_p and the angles of its UE
    position seen from the BS and the RIS."""
    gamma_p = np.asarray(gamma_p, dtype=float)
    position = gamma_p[4:7]
    theta_ub = angles_between(position, scenario.bs_position)
    theta_ur = angles_between(position, scenario.ris_position)
    return np.hstack((gamma_p[:4], theta_ub, theta_ur))


def _unpack(gamma):
    gamma = np.asarray(gamma, dtype=float)
    if gamma.shape != (8,):
        msg = 'The channel parameter vector must have shape (8,), not {}.'
        raise ValueError(msg.format(gamma.shape))
    rho_ub = complex(gamma[0], gamma[1])
    rho_urb = complex(gamma[2], gamma[3])
    return (rho_ub, rho_urb, AnglePair(gamma[4], gamma[5]),
            AnglePair(gamma[6], gamma[7]))


class _MeanSignalModel(object):
    """The noiseless received matrix as a function of gamma."""

    def __init__(self, gamma, scenario, design):
        self.rho_ub, self.rho_urb, self.theta_ub, self.theta_ur = \
            _unpack(gamma)
        self.lam = scenario.wavelength
        self.fas = scenario.fas
        self.aris = scenario.aris
        self.x = np.asarray(design.pilots.x)
        self.w = np.asarray(design.phases.w)
        self.a_ub = self.fas.steering(self.theta_ub, self.lam)
        self.a_rb = self.fas.steering(scenario.theta_rb, self.lam)
        self.a_br = self.aris.steering(scenario.theta_br, self.lam)
        self.a_ur = self.aris.steering(self.theta_ur, self.lam)
        # sum_m a_br(m) a_ur(m) w_t(m) x_t
        self.cascade = ((self.a_br * self.a_ur) @ self.w) * self.x

    def matrix(self):
        return (self.rho_ub * np.outer(self.a_ub, self.x) +
                self.rho_urb * np.outer(self.a_rb, self.cascade))

    def gradients(self):
        scale = -2j * np.pi / self.lam
        direct = np.outer(self.a_ub, self.x)
        reflected = np.outer(self.a_rb, self.cascade)
        partials = [direct, 1j * direct, reflected, 1j * reflected]
        for dk in direction_derivatives(self.theta_ub):
            da = self.a_ub * scale * (self.fas.offsets @ dk)
            partials.append(self.rho_ub * np.outer(da, self.x))
        for dk in direction_derivatives(self.theta_ur):
            da = self.a_ur * scale * (self.aris.offsets @ dk)
            d_cascade = ((self.a_br * da) @ self.w) * self.x
            partials.append(self.rho_urb * np.outer(self.a_rb, d_cascade))
        return np.stack(partials)


def mean_signal_matrix(gamma, scenario, design):
    """Returns the noiseless received matrix mu, shape(N, T)::

        mu[n, t] = rho_UB a_n(theta_UB) x_t
                   + rho_URB a_n(theta_RB) sum_m a_m(theta_BR) a_m(theta_UR)
                     w_t(m) x_t

    Parameters
    ==========
    gamma : array_like, shape(8,)
        The channel parameters.
    scenario : Scenario
        Supplies the array geometries and the known RIS-BS angles.
    design : FrameDesign
        Supplies the pilots x and the phases w.

    """
    return _MeanSignalModel(gamma, scenario, design).matrix()


def mean_signal(n, t, gamma, scenario, design):
    """Returns mu[n, t], see mean_signal_matrix."""
    return complex(mean_signal_matrix(gamma, scenario, design)[n, t])


def mean_signal_gradients(gamma, scenario, design):
    """Returns the partial derivatives of mu with respect to every entry of
    gamma, shape(8, N, T)."""
    return _MeanSignalModel(gamma, scenario, design).gradients()


def mean_signal_gradient(n, t, gamma, scenario, design):
    """Returns the eight partial derivatives of mu[n, t]."""
    return mean_signal_gradients(gamma, scenario, design)[:, n, t]


def _direct_rb_link(scenario):
    distance = np.linalg.norm(scenario.ris_position - scenario.bs_position)
    gain = free_space_gain(distance, scenario.wavelength, 0.0)
    return gain * np.outer(scenario.fas.steering(scenario.theta_rb,
                                                 scenario.wavelength),
                           scenario.aris.steering(scenario.theta_br,
                                                  scenario.wavelength))


def noise_variances(scenario, design, h_rb=None):
    """Returns the per position noise variances, the diagonal of
    C_B + C_R = sigma_B^2 I + sigma_R^2 p^2 H_RB H_RB^H.

    Parameters
    ==========
    scenario : Scenario
    design : FrameDesign
        Supplies the noise model and the amplification p.
    h_rb : ndarray, shape(N, M_R), optional
        The RIS-BS channel; defaults to the direct RIS-BS path of the
        scenario.

    Raises
    ======
    ValueError
        If a variance is not positive.

    """
    if h_rb is None:
        h_rb = _direct_rb_link(scenario)
    noise = design.noise
    p = design.phases.amplification
    variances = (noise.sigma_b2 + noise.sigma_r2 * p ** 2 *
                 np.sum(np.abs(h_rb) ** 2, axis=1))
    if not np.all(variances > 0.0):
        raise ValueError('The noise covariance is singular.')
    return variances


def fim_channel(gamma, scenario, design, h_rb=None):
    """Returns the 8 x 8 Fisher information matrix of the channel parameters

        F = sum_n sum_t (2 / sigma_n^2) Re(d mu[n, t]^H d mu[n, t])

    where sigma_n^2 are the noise_variances."""
    gradients = mean_signal_gradients(gamma, scenario, design)
    variances = noise_variances(scenario, design, h_rb=h_rb)
    stacked = gradients.reshape(8, -1)
    weights = np.repeat(2.0 / variances, gradients.shape[2])
    fim = np.real((stacked.conj() * weights) @ stacked.T)
    return (fim + fim.T) / 2.0


@lru_cache(maxsize=None)
def _bearing_jacobian_function():
    """Returns a function of (position, anchor) that evaluates the 2 x 3
    Jacobian of the bearing angles of position seen from anchor."""
    px, py, pz, ax, ay, az = sm.symbols('p_x, p_y, p_z, a_x, a_y, a_z',
                                        real=True)
    dx, dy, dz = px - ax, py - ay, pz - az
    elevation = sm.acos(dz / sm.sqrt(dx**2 + dy**2 + dz**2))
    azimuth = sm.atan2(dy, dx)
    jac = sm.Matrix([elevation, azimuth]).jacobian([px, py, pz])
    return sm.lambdify((px, py, pz, ax, ay, az), jac, modules='numpy',
                       cse=True)


def _bearing_jacobian(position, anchor):
    delta = position - anchor
    if np.hypot(delta[0], delta[1]) == 0.0:
        msg = ('The bearing from {} to {} is vertical, its azimuth is '
               'undefined.')
        raise DegenerateGeometryError(msg.format(anchor, position))
    func = _bearing_jacobian_function()
    return np.asarray(func(*np.hstack((position, anchor))), dtype=float)


def jacobian(gamma_p, scenario):
    """Returns the 8 x 7 Jacobian J[i, j] = d gamma[i] / d gamma_p[j].

    The gain block is the 4 x 4 identity and the angle rows hold the
    derivatives of the bearings of the UE from the BS and from the RIS with
    respect to its position.

    Raises
    ======
    DegenerateGeometryError
        If the UE coincides with, or is directly above or below, an anchor.

    """
    gamma_p = np.asarray(gamma_p, dtype=float)
    if gamma_p.shape != (7,):
        msg = 'The position parameter vector must have shape (7,), not {}.'
        raise ValueError(msg.format(gamma_p.shape))
    position = gamma_p[4:7]
    for anchor in (scenario.bs_position, scenario.ris_position):
        if np.array_equal(position, anchor):
            msg = 'The UE coincides with the anchor at {}.'
            raise DegenerateGeometryError(msg.format(anchor))
    jac = np.zeros((8, 7))
    jac[:4, :4] = np.eye(4)
    jac[4:6, 4:7] = _bearing_jacobian(position, scenario.bs_position)
    jac[6:8, 4:7] = _bearing_jacobian(position, scenario.ris_position)
    return jac


def _is_singular(matrix):
    scale = np.sqrt(np.diag(matrix))
    if not np.all(scale > 0.0) or not np.all(np.isfinite(matrix)):
        return True
    equilibrated = matrix / np.outer(scale, scale)
    return not np.linalg.cond(equilibrated) <= MAX_CONDITION


def _inverse(matrix, name):
    if _is_singular(matrix):
        msg = 'The {} is singular, its bounds are unbounded.'
        warnings.warn(msg.format(name), UnboundedBoundWarning)
        return np.full(matrix.shape, np.inf)
    scale = np.sqrt(np.diag(matrix))
    equilibrated = matrix / np.outer(scale, scale)
    return np.linalg.inv(equilibrated) / np.outer(scale, scale)


def position_fim(fim, jac):
    """Returns F_p = J^T F J."""
    return jac.T @ fim @ jac


def fim_bundle(gamma_p, scenario, design, h_rb=None):
    """Returns the Fisher information and the bounds at the position domain
    parameters gamma_p.

    Parameters
    ==========
    gamma_p : array_like, shape(7,)
        Gains and the UE position.
    scenario : Scenario
    design : FrameDesign
    h_rb : ndarray, shape(N, M_R), optional
        The RIS-BS channel used for the ARIS noise covariance.

    Returns
    =======
    bundle : FimBundle
        Singular matrices issue an UnboundedBoundWarning and give infinite
        CRB or PEB values.

    """
    gamma_p = np.asarray(gamma_p, dtype=float)
    gamma_p = np.hstack((gamma_p[:4], as_position(gamma_p[4:])))
    gamma = channel_from_position(gamma_p, scenario)
    fim = fim_channel(gamma, scenario, design, h_rb=h_rb)
    jac = jacobian(gamma_p, scenario)
    fim_p = position_fim(fim, jac)
    crb = np.diag(_inverse(fim, 'channel FIM')).copy()
    position_block = _inverse(fim_p, 'position FIM')[4:7, 4:7]
    bound = float(np.sqrt(np.trace(position_block)))
    return FimBundle(F=fim, J=jac, F_p=fim_p, crb_diag=crb, peb=bound)


def peb(gamma_p, scenario, design, h_rb=None):
    """Returns the position error bound sqrt(tr([F_p^-1]_{xyz})) in
    meters."""
    return fim_bundle(gamma_p, scenario, design, h_rb=h_rb).peb
