#!/usr/bin/env python

import numpy as np
from numpy import testing
import pytest

from .. import utils


def test_dbm_conversions():

    testing.assert_allclose(utils.dbm_to_watts(30.0), 1.0)
    testing.assert_allclose(utils.dbm_to_watts(0.0), 1e-3)
    testing.assert_allclose(utils.dbm_to_watts([-20.0, 15.0]),
                            [1e-5, 10.0 ** -1.5])

    powers = np.array([-20.0, 0.0, 17.5, 45.0])
    testing.assert_allclose(utils.watts_to_dbm(utils.dbm_to_watts(powers)),
                            powers)


def test_complex_normal():

    rng = np.random.default_rng(3)

    z = utils.complex_normal(rng, (400, 500), 2.5)

    assert z.shape == (400, 500)
    assert np.iscomplexobj(z)
    testing.assert_allclose(np.mean(np.abs(z) ** 2), 2.5, rtol=2e-2)
    # circular: equal power in both components, uncorrelated
    testing.assert_allclose(np.var(z.real), np.var(z.imag), rtol=3e-2)
    assert abs(np.mean(z.real * z.imag)) < 2e-2

    zero = utils.complex_normal(rng, 5, 0.0)
    testing.assert_allclose(zero, np.zeros(5))

    with pytest.raises(ValueError):
        utils.complex_normal(rng, 5, -1.0)


def test_as_position():

    position = utils.as_position([1, 2, 3])
    assert position.dtype == float
    testing.assert_allclose(position, [1.0, 2.0, 3.0])

    testing.assert_allclose(utils.as_position(np.ones((3, 1))), np.ones(3))

    with pytest.raises(ValueError):
        utils.as_position([1.0, 2.0])

    with pytest.raises(ValueError):
        utils.as_position([1.0, np.nan, 2.0])

    with pytest.raises(ValueError):
        utils.as_position([1.0, np.inf, 2.0])
