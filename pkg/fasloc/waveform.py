#!/usr/bin/env python

"""Pilot sequences, ARIS phase schedules, noise levels and the synthesis of
the received FAS signal matrix."""

from collections import namedtuple

import numpy as np
from scipy import constants

from .utils import complex_normal

__all__ = ['PilotSchedule', 'PhaseSchedule', 'NoiseModel', 'RxFrame',
           'FrameDesign', 'EPSILON_MAPPING', 'noise_power', 'make_pilots',
           'make_phase_schedule', 'amplification_from_epsilon',
           'synthesize_rx']

# Identifier of the power budget used to map epsilon to the amplification.
EPSILON_MAPPING = ('aris-output-power-budget:'
                   'p=sqrt(eps*P_U*M_R/sum(P_U|h_ur|^2+sigma_R^2)),p>=1')

REFERENCE_TEMPERATURE = 290.0

PilotSchedule = namedtuple('PilotSchedule', ['x', 'power'])
PilotSchedule.__doc__ = """Pilot symbols x, shape(T,), whose second half
repeats the first, each with power |x_t|^2 = power watts."""

PhaseSchedule = namedtuple('PhaseSchedule', ['w', 'amplification'])
PhaseSchedule.__doc__ = """ARIS reflection coefficients w, shape(M_R, T),
with |w| = amplification and the second half of the columns negating the
first."""

RxFrame = namedtuple('RxFrame', ['y', 'h_los', 'h_nlos'])
RxFrame.__doc__ = """The received matrix y, shape(N, T), and its noiseless
direct (h_los) and reflected (h_nlos) components."""

FrameDesign = namedtuple('FrameDesign', ['pilots', 'phases', 'noise'])
FrameDesign.__doc__ = """Everything the receiver knows about a frame: the
pilot schedule, the phase schedule and the noise model."""


def noise_power(noise_figure_db, bandwidth):
    """Returns the thermal noise power k_B T_0 B 10^(NF / 10) in watts."""
    if bandwidth <= 0.0:
        msg = 'The bandwidth must be positive, not {}.'
        raise ValueError(msg.format(bandwidth))
    return (constants.k * REFERENCE_TEMPERATURE * bandwidth *
            10.0 ** (noise_figure_db / 10.0))


class NoiseModel(namedtuple('NoiseModel', ['sigma_b2', 'sigma_r2',
                                           'noise_figure_db', 'bandwidth'])):
    """The BS thermal noise power sigma_b2 and the ARIS injected noise power
    sigma_r2, both in watts, and the noise figure and bandwidth they came
    from (None when given directly)."""

    __slots__ = ()

    def __new__(cls, sigma_b2, sigma_r2, noise_figure_db=None,
                bandwidth=None):
        if sigma_b2 < 0.0 or sigma_r2 < 0.0:
            msg = 'Noise powers must be nonnegative, not {} and {}.'
            raise ValueError(msg.format(sigma_b2, sigma_r2))
        return super(NoiseModel, cls).__new__(cls, float(sigma_b2),
                                              float(sigma_r2),
                                              noise_figure_db, bandwidth)

    @classmethod
    def from_noise_figure(cls, noise_figure_db=18.0, bandwidth=1e6,
                          passive=False):
        """Returns the noise model with the same noise figure at the BS and
        the ARIS. A passive RIS injects no noise."""
        power = noise_power(noise_figure_db, bandwidth)
        return cls(power, 0.0 if passive else power, noise_figure_db,
                   bandwidth)


def make_pilots(num_pilots, power, rng):
    """Returns a pilot schedule of constant envelope random phase symbols.

    Parameters
    ==========
    num_pilots : integer
        T, must be even and at least two.
    power : float
        P_U, the symbol power in watts.
    rng : numpy.random.Generator
        Source of the symbol phases.

    Returns
    =======
    pilots : PilotSchedule
        The first T / 2 symbols are repeated as the last T / 2.

    """
    if num_pilots < 2 or num_pilots % 2 != 0:
        msg = 'The pilot length must be even and at least 2, not {}.'
        raise ValueError(msg.format(num_pilots))
    if power < 0.0:
        msg = 'The transmit power must be nonnegative, not {}.'
        raise ValueError(msg.format(power))
    half = np.sqrt(power) * np.exp(1j * rng.uniform(0.0, 2.0 * np.pi,
                                                    num_pilots // 2))
    return PilotSchedule(np.concatenate((half, half)), float(power))


def make_phase_schedule(num_elements, num_pilots, amplification, rng):
    """Returns the ARIS phase schedule W = [W_1, -W_1].

    Parameters
    ==========
    num_elements : integer
        M_R.
    num_pilots : integer
        T, must be even.
    amplification : float
        p >= 1, the magnitude of every reflection coefficient.
    rng : numpy.random.Generator
        Source of the first half phases, uniform on [0, 2 pi).

    """
    if num_pilots < 2 or num_pilots % 2 != 0:
        msg = 'The pilot length must be even and at least 2, not {}.'
        raise ValueError(msg.format(num_pilots))
    if amplification < 1.0:
        msg = 'The amplification factor must be at least 1, not {}.'
        raise ValueError(msg.format(amplification))
    phases = rng.uniform(0.0, 2.0 * np.pi, (num_elements, num_pilots // 2))
    first = amplification * np.exp(1j * phases)
    return PhaseSchedule(np.hstack((first, -first)), float(amplification))


def amplification_from_epsilon(epsilon, power, h_ur, sigma_r2):
    """Returns the ARIS amplification factor for a power allocation factor.

    The ARIS is taken to radiate epsilon times the UE transmit power given the
    signal plus noise power at its M_R inputs::

        p = sqrt(epsilon P_U M_R / sum_m (P_U |h_ur(m)|^2 + sigma_R^2))

    floored at 1 (a passive surface).

    Parameters
    ==========
    epsilon : float
        The power allocation factor, positive.
    power : float
        P_U in watts.
    h_ur : ndarray, shape(M_R,)
        The UE-RIS channel.
    sigma_r2 : float
        The ARIS noise power in watts.

    """
    if not epsilon > 0.0:
        msg = 'The power allocation factor must be positive, not {}.'
        raise ValueError(msg.format(epsilon))
    h_ur = np.asarray(h_ur)
    incident = np.sum(power * np.abs(h_ur) ** 2 + sigma_r2)
    if incident <= 0.0:
        return 1.0
    p = np.sqrt(epsilon * power * h_ur.size / incident)
    return float(max(p, 1.0))


def synthesize_rx(channels, pilots, phases, noise, rng):
    """Returns the received frame

    y[n, t] = H_UB(n) x_t + H_RB(n, :) diag(w_t) (H_UR x_t + z_R[n, :, t])
              + z_B[n, t]

    with z_R ~ CN(0, sigma_R^2) and z_B ~ CN(0, sigma_B^2). The FAS port
    visits its positions one after another, so every position sees its own
    ARIS noise. The ARIS noise is drawn before the BS noise.

    Parameters
    ==========
    channels : ChannelRealization
    pilots : PilotSchedule
    phases : PhaseSchedule
    noise : NoiseModel
    rng : numpy.random.Generator

    Returns
    =======
    frame : RxFrame

    """
    x = np.asarray(pilots.x)
    w = np.asarray(phases.w)
    h_ur = np.asarray(channels.h_ur)
    h_ub = np.asarray(channels.h_ub)
    h_rb = np.asarray(channels.h_rb)

    num_positions, num_elements = h_rb.shape
    if w.shape != (num_elements, x.size):
        msg = 'The phase schedule has shape {}, expected {}.'
        raise ValueError(msg.format(w.shape, (num_elements, x.size)))
    if h_ub.shape != (num_positions,) or h_ur.shape != (num_elements,):
        msg = 'Channel dimensions {}, {} and {} are inconsistent.'
        raise ValueError(msg.format(h_ub.shape, h_ur.shape, h_rb.shape))

    h_los = np.outer(h_ub, x)
    h_nlos = (h_rb @ (w * h_ur[:, np.newaxis])) * x[np.newaxis, :]

    z_r = complex_normal(rng, (num_positions, num_elements, x.size),
                         noise.sigma_r2)
    z_b = complex_normal(rng, (num_positions, x.size), noise.sigma_b2)

    y = h_los + h_nlos + np.einsum('nm,mt,nmt->nt', h_rb, w, z_r) + z_b

    return RxFrame(y=y, h_los=h_los, h_nlos=h_nlos)
