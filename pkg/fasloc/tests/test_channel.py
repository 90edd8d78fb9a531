#!/usr/bin/env python

import numpy as np
from numpy import testing
import pytest
from scipy import constants

from ..channel import (ArisGeometry, FasGeometry, ScattererSet, Scenario,
                       build_channels, channel_parameters, free_space_gain,
                       steering_aris, steering_fas, steering_vector)
from ..geometry import (AnglePair, DegenerateGeometryError, angles_between,
                        direction_vector)

P_B = (0.0, 0.0, 10.0)
P_R = (-10.0, 23.3, 0.5)
P_U = (3.5, 26.7, 0.7)


def test_steering_vector():

    offsets = np.array([[0.0, 0.0, 0.0], [0.5, 0.0, 0.0], [0.0, 0.0, 0.25]])
    k = direction_vector(AnglePair(np.pi / 2, 0.0))

    a = steering_vector(offsets, k, 1.0)

    testing.assert_allclose(a, [1.0, np.exp(-1j * np.pi), 1.0], atol=1e-15)

    with pytest.raises(ValueError):
        steering_vector(offsets, k, 0.0)


def test_aris_geometry():

    lam = 0.1
    aris = ArisGeometry(4, 3, lam, center=P_R)

    assert aris.num_elements == 12
    testing.assert_allclose(aris.offsets[:, 0], 0.0)
    testing.assert_allclose(aris.offsets.mean(axis=0), 0.0, atol=1e-15)
    # element i * m_z + j, j running along z
    testing.assert_allclose(aris.offsets[1] - aris.offsets[0],
                            [0.0, 0.0, lam / 2])
    testing.assert_allclose(aris.offsets[3] - aris.offsets[0],
                            [0.0, lam / 2, 0.0])
    testing.assert_allclose(aris.positions, np.array(P_R) + aris.offsets)

    with pytest.raises(ValueError):
        ArisGeometry(0, 3, lam)


def test_fas_geometry():

    lam = constants.c / 2.8e9
    fas = FasGeometry(100, lam, center=P_B)

    assert fas.num_elements == 100
    assert fas.side == 10
    testing.assert_allclose(fas.step, lam / 2)
    testing.assert_allclose(fas.aperture, 4.5)
    testing.assert_allclose(fas.offsets[:, 1], 0.0)
    testing.assert_allclose(fas.offsets[:, 0].max() - fas.offsets[:, 0].min(),
                            4.5 * lam)

    wide = FasGeometry(36, lam, aperture=10.0)
    testing.assert_allclose(wide.step, 2.0 * lam)

    single = FasGeometry(1, lam)
    testing.assert_allclose(single.offsets, np.zeros((1, 3)))

    with pytest.raises(ValueError):
        FasGeometry(50, lam)

    with pytest.raises(ValueError):
        FasGeometry(16, lam, aperture=-1.0)


def test_steering_magnitudes():

    scenario = Scenario(P_U, P_B, P_R)
    lam = scenario.wavelength
    rng = np.random.default_rng(0)

    for el, az in zip(rng.uniform(0, np.pi, 10),
                      rng.uniform(-np.pi, np.pi, 10)):
        angles = AnglePair(el, az)
        testing.assert_allclose(np.abs(steering_aris(scenario.aris, angles,
                                                     lam)), 1.0)
        testing.assert_allclose(np.abs(steering_fas(scenario.fas, angles,
                                                    lam)), 1.0)


def test_free_space_gain():

    gain = free_space_gain(10.0, 0.1, np.pi / 2)
    testing.assert_allclose(gain, 1j * 0.1 / (40.0 * np.pi))

    with pytest.raises(ValueError):
        free_space_gain(0.0, 0.1, 0.0)


def test_scenario():

    scenario = Scenario(P_U, P_B, P_R)

    testing.assert_allclose(scenario.wavelength, constants.c / 2.8e9)
    assert scenario.num_fas_positions == 100
    assert scenario.num_aris_elements == 16
    assert scenario.theta_ub == angles_between(P_U, P_B)
    assert scenario.theta_ur == angles_between(P_U, P_R)
    assert scenario.theta_rb == angles_between(P_R, P_B)
    assert scenario.theta_br == angles_between(P_B, P_R)
    assert scenario.scatterers == ScattererSet((), (), ())

    with pytest.raises(DegenerateGeometryError):
        Scenario(P_B, P_B, P_R)

    with pytest.raises(DegenerateGeometryError):
        Scenario(P_U, P_B, P_R, scatterers=ScattererSet(ue_ris=[P_R]))

    with pytest.raises(ValueError):
        Scenario(P_U, P_B, P_R, carrier_frequency=0.0)

    with pytest.raises(ValueError):
        Scenario(P_U, P_B, P_R, ris_side_sign=0.5)


class TestBuildChannels():

    def setup_method(self):
        self.scenario = Scenario(P_U, P_B, P_R)
        self.lam = self.scenario.wavelength

    def test_direct_paths(self):

        channels = build_channels(self.scenario, np.random.default_rng(4))
        aris = self.scenario.aris
        fas = self.scenario.fas

        rho_ur, = channels.gains_ur
        rho_ub, = channels.gains_ub
        rho_rb, = channels.gains_rb

        testing.assert_allclose(abs(rho_ur), self.lam / (4 * np.pi *
                                np.linalg.norm(np.subtract(P_U, P_R))))

        testing.assert_allclose(channels.h_ur,
                                rho_ur * aris.steering(
                                    self.scenario.theta_ur, self.lam))
        testing.assert_allclose(channels.h_ub,
                                rho_ub * fas.steering(
                                    self.scenario.theta_ub, self.lam))

        k_br = direction_vector(self.scenario.theta_br)
        k_rb = direction_vector(self.scenario.theta_rb)
        expected = np.empty((100, 16), dtype=complex)
        for n in range(100):
            for m in range(16):
                phase = (fas.offsets[n] @ k_rb + aris.offsets[m] @ k_br)
                expected[n, m] = rho_rb * np.exp(-2j * np.pi * phase /
                                                 self.lam)
        testing.assert_allclose(channels.h_rb, expected, rtol=1e-10)

        gamma = channel_parameters(channels)
        rho_urb = rho_rb * rho_ur
        testing.assert_allclose(gamma, [rho_ub.real, rho_ub.imag,
                                        rho_urb.real, rho_urb.imag,
                                        self.scenario.theta_ub.el,
                                        self.scenario.theta_ub.az,
                                        self.scenario.theta_ur.el,
                                        self.scenario.theta_ur.az])

    def test_scattered_path(self):

        scatterer = np.array([-5.5, 28.6, 2.0])
        scenario = Scenario(P_U, P_B, P_R,
                            scatterers=ScattererSet(ue_ris=[scatterer]))

        channels = build_channels(scenario, np.random.default_rng(5))

        assert len(channels.gains_ur) == 2
        assert channels.angles_ur[1] == angles_between(scatterer, P_R)

        d1 = np.linalg.norm(scatterer - np.array(P_U))
        d2 = np.linalg.norm(np.array(P_R) - scatterer)
        testing.assert_allclose(abs(channels.gains_ur[1]),
                                (self.lam / (4 * np.pi)) ** 2 / (d1 * d2))

        expected = sum(g * scenario.aris.steering(a, self.lam) for g, a in
                       zip(channels.gains_ur, channels.angles_ur))
        testing.assert_allclose(channels.h_ur, expected)

    def test_direct_path_dominance(self):

        scatterers = ScattererSet(ue_ris=[(-5.5, 28.6, 2.0), (-2, 30, 3)],
                                  ris_bs=[(-7, 8, 9.3), (-6, 18.6, 2.7)],
                                  ue_bs=[(6.7, 28, 11), (8, 5, 2)])
        scenario = Scenario(P_U, P_B, P_R, scatterers=scatterers)

        channels = build_channels(scenario, np.random.default_rng(6))

        for gains in (channels.gains_ur, channels.gains_ub,
                      channels.gains_rb):
            assert len(gains) == 3
            assert all(abs(gains[0]) > abs(g) for g in gains[1:])
        assert len(channels.angles_br) == 3
        assert channels.angles_br[1] == angles_between((-7, 8, 9.3), P_R)
        assert channels.angles_rb[1] == angles_between((-7, 8, 9.3), P_B)

    def test_reflection_loss(self):

        scatterers = ScattererSet(ue_bs=[(8.0, 5.0, 2.0)])
        full = Scenario(P_U, P_B, P_R, scatterers=scatterers)
        lossy = Scenario(P_U, P_B, P_R, scatterers=scatterers,
                         reflection_loss=0.5)

        a = build_channels(full, np.random.default_rng(7))
        b = build_channels(lossy, np.random.default_rng(7))

        testing.assert_allclose(b.gains_ub[1], 0.5 * a.gains_ub[1])
        assert b.gains_ub[0] == a.gains_ub[0]

    def test_determinism(self):

        a = build_channels(self.scenario, np.random.default_rng(42))
        b = build_channels(self.scenario, np.random.default_rng(42))
        c = build_channels(self.scenario, np.random.default_rng(43))

        testing.assert_array_equal(a.h_ur, b.h_ur)
        testing.assert_array_equal(a.h_ub, b.h_ub)
        testing.assert_array_equal(a.h_rb, b.h_rb)
        assert not np.array_equal(a.h_ub, c.h_ub)
