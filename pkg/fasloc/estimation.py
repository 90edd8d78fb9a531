#!/usr/bin/env python

"""LoS/NLoS decoupling, MUSIC angle of arrival estimation at the FAS, cascaded
angle maximum likelihood estimation at the ARIS and recovery of the UE-RIS
angle of arrival."""

from collections import namedtuple

import numpy as np
from scipy import linalg
from scipy.ndimage import maximum_filter

from .geometry import (AnglePair, direction_derivatives, direction_vector,
                       wrap_angle)
from .refinement import refine

__all__ = ['EstimationError', 'InfeasibleCascadeError', 'DecoupledSignals',
           'SpectrumGrid', 'CascadeParams', 'CascadeEstimate',
           'EstimationReport', 'SteeringFit', 'CascadeFit', 'decouple',
           'sample_covariance', 'noise_subspace', 'music_spectrum',
           'spectrum_peaks', 'music_aoa', 'refine_angle', 'refine_paths',
           'estimate_paths', 'gain_ls',
           'peel_off', 'cascade_steering', 'cascade_grid',
           'estimate_cascade', 'recover_theta_ur', 'estimate_gain_nlos',
           'estimate_channel']

DEFAULT_ANGLE_RESOLUTION = np.deg2rad(1.0)
DEFAULT_CASCADE_RESOLUTION = 0.01
FRONT_HALF_SPACE = (0.0, np.pi)

_CHUNK = 8192


class EstimationError(ValueError):
    """Raised when an estimator cannot run on its input."""
    pass


class InfeasibleCascadeError(EstimationError):
    """Raised when cascaded parameters do not map back to a direction."""
    pass


DecoupledSignals = namedtuple('DecoupledSignals', ['y_los', 'y_nlos'])
DecoupledSignals.__doc__ = """The direct (y_los) and reflected (y_nlos)
signals, each shape(N, T / 2)."""

SpectrumGrid = namedtuple('SpectrumGrid', ['el', 'az', 'values'])
SpectrumGrid.__doc__ = """MUSIC pseudo-spectrum values, shape(len(el),
len(az)), over the elevation and azimuth grid nodes."""

CascadeParams = namedtuple('CascadeParams', ['psi_y', 'psi_z'])
CascadeParams.__doc__ = """The y and z components of k(theta_UR) plus the
RIS-side direction toward the BS, each in [-2, 2]."""

CascadeEstimate = namedtuple('CascadeEstimate',
                             ['theta_rb', 'psi', 'gain', 'objective',
                              'condition'])
CascadeEstimate.__doc__ = """One reflected path: its BS-side angle, its
cascaded parameters and gain, the normalized fit residual and the condition
number of the snapshot design matrix."""

EstimationReport = namedtuple('EstimationReport',
                              ['theta_ub', 'theta_rb', 'psi', 'theta_ur',
                               'gain_ub', 'gain_urb', 'diagnostics',
                               'cascades'])
EstimationReport.__doc__ = """Estimates of the direct path parameters. The
cascades list holds one CascadeEstimate per processed NLoS path, strongest
first; the top level theta_rb, psi and gain_urb are those of the first."""


def decouple(y):
    """Returns the LoS and NLoS signals from a frame received with a repeated
    pilot block and a negated second half ARIS phase schedule.

    Parameters
    ==========
    y : ndarray, shape(N, T)
        The received matrix (or an RxFrame).

    Returns
    =======
    signals : DecoupledSignals
        y_los = (Y_T1 + Y_T2) / 2 and y_nlos = (Y_T1 - Y_T2) / 2.

    """
    y = np.asarray(getattr(y, 'y', y))
    if y.ndim != 2 or y.shape[1] % 2 != 0:
        msg = 'The frame must have an even number of columns, not shape {}.'
        raise ValueError(msg.format(y.shape))
    half = y.shape[1] // 2
    first, second = y[:, :half], y[:, half:]
    return DecoupledSignals((first + second) / 2.0, (first - second) / 2.0)


def sample_covariance(y):
    """Returns the sample covariance Y Y^H / K of an N x K matrix."""
    y = np.asarray(y)
    if y.ndim == 1:
        y = y[:, np.newaxis]
    if y.shape[1] < 1:
        raise EstimationError('At least one snapshot is required.')
    return (y @ y.conj().T) / y.shape[1]


def _decompose(covariance, num_sources):
    covariance = np.asarray(covariance)
    size = covariance.shape[0]
    if not 1 <= num_sources < size:
        msg = 'The number of sources must be in [1, {}), not {}.'
        raise EstimationError(msg.format(size, num_sources))
    if not np.all(np.isfinite(covariance)):
        raise EstimationError('The covariance has non-finite entries.')
    return linalg.eigh(covariance)


def noise_subspace(covariance, num_sources):
    """Returns the noise subspace and all eigenvalues of a covariance.

    Parameters
    ==========
    covariance : ndarray, shape(N, N)
        A Hermitian matrix.
    num_sources : integer
        B, the signal subspace dimension, 1 <= B < N.

    Returns
    =======
    noise : ndarray, shape(N, N - B)
        Eigenvectors of the N - B smallest eigenvalues.
    eigenvalues : ndarray, shape(N,)
        In ascending order.

    """
    eigenvalues, eigenvectors = _decompose(covariance, num_sources)
    size = eigenvalues.size
    return eigenvectors[:, :size - num_sources], eigenvalues


def _grid_nodes(low, high, resolution):
    if resolution <= 0.0:
        msg = 'The grid resolution must be positive, not {}.'
        raise ValueError(msg.format(resolution))
    num = int(round((high - low) / resolution)) + 1
    return np.linspace(low, high, num=max(num, 2))


def _azimuth_nodes(az_range, resolution):
    low, high = az_range
    nodes = _grid_nodes(low, high, resolution)
    if high - low >= 2.0 * np.pi - 1e-12:
        # -pi and pi are the same direction
        nodes = nodes[1:]
    return nodes


def _grid_steering(offsets, scale, el, az_nodes):
    directions = np.vstack((np.sin(el) * np.cos(az_nodes),
                            np.sin(el) * np.sin(az_nodes),
                            np.cos(el) * np.ones_like(az_nodes)))
    return np.exp(scale * (offsets @ directions))


def music_spectrum(y, geom, wavelength, num_sources=1,
                   resolution=DEFAULT_ANGLE_RESOLUTION,
                   az_range=FRONT_HALF_SPACE):
    """Returns the MUSIC pseudo-spectrum 1 / (a^H U_n U_n^H a) over an
    elevation and azimuth grid.

    Parameters
    ==========
    y : ndarray, shape(N, K)
        Snapshots received over the array.
    geom : FasGeometry or ArisGeometry
        The array, whose element offsets define the steering vectors.
    wavelength : float
        The carrier wavelength in meters.
    num_sources : integer, optional
        B, the number of paths in the signal subspace.
    resolution : float, optional
        The grid step in radians for both angles.
    az_range : 2-tuple of floats, optional
        The azimuth search interval. A planar FAS in the x-o-z plane does not
        see the sign of k_y, so the default searches the y >= 0 half-space.

    Returns
    =======
    grid : SpectrumGrid

    """
    covariance = sample_covariance(y)
    _, eigenvectors = _decompose(covariance, num_sources)
    size = covariance.shape[0]
    # a^H U_n U_n^H a = a^H a - a^H U_s U_s^H a with a^H a = N
    signal = eigenvectors[:, size - num_sources:]

    el_nodes = _grid_nodes(0.0, np.pi, resolution)
    az_nodes = _azimuth_nodes(az_range, resolution)
    values = np.empty((el_nodes.size, az_nodes.size))
    scale = -2j * np.pi / wavelength
    for i, el in enumerate(el_nodes):
        steering = _grid_steering(geom.offsets, scale, el, az_nodes)
        projection = signal.conj().T @ steering
        denominator = size - np.sum(np.abs(projection) ** 2, axis=0)
        values[i] = 1.0 / np.maximum(denominator, np.finfo(float).tiny)
    return SpectrumGrid(el_nodes, az_nodes, values)


def spectrum_peaks(grid, num_peaks=1):
    """Returns the largest local maxima of a spectrum grid.

    Peaks are ordered by decreasing value with the lowest flat grid index
    winning ties, and no two returned peaks are adjacent grid nodes.

    Returns
    =======
    peaks : list of (AnglePair, float)
        The peak angles and their spectrum values.

    """
    values = grid.values
    if num_peaks == 1:
        flat = int(np.argmax(values))
        i, j = np.unravel_index(flat, values.shape)
        return [(AnglePair(float(grid.el[i]), float(grid.az[j])),
                 float(values[i, j]))]

    is_peak = values == maximum_filter(values, size=3, mode='nearest')
    candidates = np.flatnonzero(is_peak)
    order = np.lexsort((candidates, -values.ravel()[candidates]))
    chosen = []
    for flat in candidates[order]:
        i, j = np.unravel_index(flat, values.shape)
        if all(max(abs(i - a), abs(j - b)) >= 2 for a, b in chosen):
            chosen.append((i, j))
        if len(chosen) == num_peaks:
            break
    return [(AnglePair(float(grid.el[i]), float(grid.az[j])),
             float(values[i, j])) for i, j in chosen]


def music_aoa(y, geom, wavelength, num_sources=1,
              resolution=DEFAULT_ANGLE_RESOLUTION,
              az_range=FRONT_HALF_SPACE):
    """Returns the angles of the B largest MUSIC pseudo-spectrum peaks,
    strongest first. See music_spectrum for the parameters."""
    grid = music_spectrum(y, geom, wavelength, num_sources=num_sources,
                          resolution=resolution, az_range=az_range)
    return [angles for angles, _ in spectrum_peaks(grid, num_sources)]


class SteeringFit(object):
    """The normalized least squares misfit of K steering vectors to array
    snapshots with the path gains profiled out.

    The parameters are theta = [el_1, az_1, ..., el_K, az_K] and A(theta) the
    N x K matrix of their steering vectors. With a known waveform x the model
    is Y = A(theta) rho x^T and::

        f(theta) = 1 - |P_A Y x^*|^2 / (|x|^2 |Y|_F^2)

    without one every snapshot has its own coefficients and::

        f(theta) = 1 - |P_A Y|_F^2 / |Y|_F^2

    where P_A is the projection onto the columns of A. f is in [0, 1] and
    zero for a perfect fit. For K = 1, |P_a s|^2 = |a^H s|^2 / N.

    """

    def __init__(self, offsets, wavelength, y, waveform=None):
        y = np.asarray(y)
        if y.ndim == 1:
            y = y[:, np.newaxis]
        self.offsets = np.asarray(offsets, dtype=float)
        self.wavelength = wavelength
        if waveform is not None:
            waveform = np.atleast_1d(np.asarray(waveform))
            energy = np.sum(np.abs(waveform) ** 2)
            if energy == 0.0:
                raise EstimationError('The pilot sequence is zero.')
            self.snapshots = (y @ waveform.conj())[:, np.newaxis] / \
                np.sqrt(energy)
        else:
            self.snapshots = y
        self.energy = np.sum(np.abs(y) ** 2)
        self.size = self.offsets.shape[0]

    def steering_matrix(self, theta):
        """Returns A(theta), shape(N, K)."""
        pairs = np.reshape(np.asarray(theta, dtype=float), (-1, 2))
        directions = np.column_stack([direction_vector(p) for p in pairs])
        return np.exp(-2j * np.pi * (self.offsets @ directions) /
                      self.wavelength)

    def gains(self, theta):
        """Returns the least squares gains, shape(K, number of snapshots),
        of the (waveform matched) snapshots."""
        return linalg.lstsq(self.steering_matrix(theta), self.snapshots)[0]

    def value(self, theta):
        if self.energy == 0.0:
            return 0.0
        fitted = self.steering_matrix(theta) @ self.gains(theta)
        explained = np.sum(np.abs(fitted) ** 2)
        return float(1.0 - explained / self.energy)

    def gradient(self, theta):
        # d|P_A s|^2 / d theta_k = 2 Re((P_A^perp s)^H (dA / d theta_k) rho)
        pairs = np.reshape(np.asarray(theta, dtype=float), (-1, 2))
        if self.energy == 0.0:
            return np.zeros(pairs.size)
        a = self.steering_matrix(theta)
        gains = linalg.lstsq(a, self.snapshots)[0]
        residual = self.snapshots - a @ gains
        gradient = np.empty(pairs.size)
        for k, pair in enumerate(pairs):
            for i, dk in enumerate(direction_derivatives(pair)):
                da = a[:, k] * (-2j * np.pi / self.wavelength) * \
                    (self.offsets @ dk)
                d_explained = 2.0 * np.real(np.sum(
                    residual.conj() * np.outer(da, gains[k])))
                gradient[2 * k + i] = -d_explained / self.energy
        return gradient


def refine_angle(initial, window, fit, az_range=(-np.pi, np.pi), tol=1e-9,
                 method=None, full_output=False):
    """Returns the angles minimizing a fit objective inside
    [initial - window, initial + window].

    Parameters
    ==========
    initial : AnglePair
        The grid search estimate.
    window : float or 2-tuple of floats
        The half width of the search box in radians.
    fit : SteeringFit
        The objective.
    az_range : 2-tuple of floats, optional
        The admissible azimuth interval; the elevation is kept in [0, pi].
    tol : float, optional
        The solver convergence tolerance.
    method : string, optional
        Passed to fasloc.refinement.refine.
    full_output : boolean, optional
        If True the RefinementResult is returned as well.

    """
    result = refine(fit, [initial[0], initial[1]], window,
                    lower=[0.0, az_range[0]], upper=[np.pi, az_range[1]],
                    tol=tol, method=method)
    angles = AnglePair(float(result.x[0]), float(result.x[1]))
    if full_output:
        return angles, result
    return angles


def refine_paths(initial, window, fit, az_range=(-np.pi, np.pi), tol=1e-9,
                 method=None):
    """Returns the angles of several paths minimizing a joint SteeringFit
    inside a box of half width window around each initial pair, and the
    RefinementResult."""
    num_paths = len(initial)
    start = np.ravel([[a[0], a[1]] for a in initial])
    result = refine(fit, start, window,
                    lower=[0.0, az_range[0]] * num_paths,
                    upper=[np.pi, az_range[1]] * num_paths,
                    tol=tol, method=method)
    pairs = np.reshape(result.x, (-1, 2))
    return [AnglePair(float(el), float(az)) for el, az in pairs], result


def _near(grid, angles, radius):
    el, az = np.meshgrid(grid.el, grid.az, indexing='ij')
    mask = np.zeros(el.shape, dtype=bool)
    for pair in angles:
        mask |= ((np.abs(el - pair.el) <= radius) &
                 (np.abs(wrap_angle(az - pair.az)) <= radius))
    return mask


def estimate_paths(y, geom, wavelength, num_paths=1, waveform=None,
                   num_sources=None, resolution=DEFAULT_ANGLE_RESOLUTION,
                   az_range=FRONT_HALF_SPACE, tol=1e-9, method=None):
    """Returns the angles of arrival of num_paths paths fitted jointly,
    strongest first.

    The first path starts at the MUSIC peak. Every further path starts at the
    peak of the beamformer scan |A^H R|^2 of the residual R of the paths found
    so far, away from them, and all paths are then refined jointly. Unlike
    MUSIC alone this resolves paths carrying the same waveform.

    Parameters
    ==========
    y : ndarray, shape(N, K)
        The snapshots.
    geom : FasGeometry
    wavelength : float
    num_paths : integer, optional
        The number of paths fitted, 1 <= num_paths < N.
    waveform : ndarray, shape(K,), optional
        The known waveform, see SteeringFit.
    num_sources : integer, optional
        B for the MUSIC search. Defaults to 1 with a known waveform, whose
        paths span a single signal dimension, and to num_paths otherwise.
    resolution, az_range : optional
        The MUSIC grid, also the refinement half width.
    tol, method : optional
        Passed to fasloc.refinement.refine.

    Returns
    =======
    angles : list of AnglePair
        Ordered by decreasing gain magnitude.
    gains : ndarray, shape(num_paths, number of fitted snapshots)
        The least squares gains in the same order.
    result : RefinementResult
        Of the last joint refinement.
    peak : float
        The MUSIC spectrum value at the first start.

    """
    size = geom.offsets.shape[0]
    if not 1 <= num_paths < size:
        msg = 'The number of paths must be in [1, {}), not {}.'
        raise EstimationError(msg.format(size, num_paths))
    if num_sources is None:
        num_sources = 1 if waveform is not None else num_paths
    grid = music_spectrum(y, geom, wavelength, num_sources=num_sources,
                          resolution=resolution, az_range=az_range)
    (start, peak), = spectrum_peaks(grid, 1)
    fit = SteeringFit(geom.offsets, wavelength, y, waveform=waveform)
    angles, result = refine_paths([start], resolution, fit,
                                  az_range=az_range, tol=tol, method=method)
    scale = -2j * np.pi / wavelength
    for _ in range(1, num_paths):
        a = fit.steering_matrix(result.x)
        residual = fit.snapshots - a @ linalg.lstsq(a, fit.snapshots)[0]
        values = np.empty_like(grid.values)
        for i, el in enumerate(grid.el):
            steering = _grid_steering(geom.offsets, scale, el, grid.az)
            values[i] = np.sum(np.abs(residual.conj().T @ steering) ** 2,
                               axis=0)
        values[_near(grid, angles, 1.5 * resolution)] = 0.0
        (start, _), = spectrum_peaks(SpectrumGrid(grid.el, grid.az, values),
                                     1)
        angles, result = refine_paths(angles + [start], resolution, fit,
                                      az_range=az_range, tol=tol,
                                      method=method)
    gains = fit.gains(result.x)
    order = np.argsort(-np.linalg.norm(gains, axis=1), kind='stable')
    return ([angles[k] for k in order], gains[order], result, peak)


def gain_ls(y, steering, pilots):
    """Returns the least squares path gain a^+ y / x.

    Parameters
    ==========
    y : ndarray, shape(N,) or shape(N, K)
        One snapshot or K snapshots.
    steering : ndarray, shape(N,)
        The steering vector at the estimated angle.
    pilots : complex or ndarray, shape(K,)
        The pilot symbol(s) of the snapshot(s).

    """
    a = np.asarray(steering)
    y = np.asarray(y)
    pilots = np.atleast_1d(np.asarray(pilots))
    norm = np.vdot(a, a).real
    energy = np.sum(np.abs(pilots) ** 2)
    if energy == 0.0:
        raise EstimationError('The pilot symbols are zero.')
    if norm == 0.0:
        raise EstimationError('The steering vector is zero.')
    if y.ndim == 1:
        y = y[:, np.newaxis]
    if y.shape[1] != pilots.size:
        msg = 'There are {} snapshots but {} pilot symbols.'
        raise ValueError(msg.format(y.shape[1], pilots.size))
    return complex((a.conj() @ y @ pilots.conj()) / (norm * energy))


def peel_off(y_nlos, theta_rb, geom, wavelength, others=()):
    """Returns a_B(theta_rb)^+ Y_NLOS, shape(K,), the reflected signal with
    the BS-side response of the RIS-BS path removed.

    With the BS-side angles of other reflected paths in others, the row of
    [a_B(theta_rb), a_B(others)]^+ Y_NLOS belonging to theta_rb is returned,
    which removes those paths as well."""
    a = geom.steering(theta_rb, wavelength)
    norm = np.vdot(a, a).real
    if norm == 0.0:
        raise EstimationError('The BS-side steering vector is zero.')
    if len(others) == 0:
        return (a.conj() @ np.asarray(y_nlos)) / norm
    columns = [a] + [geom.steering(angles, wavelength) for angles in others]
    return linalg.lstsq(np.column_stack(columns), np.asarray(y_nlos))[0][0]


def cascade_steering(offsets, psi, wavelength):
    """Returns the ARIS response exp(-j 2 pi (y_m psi_y + z_m psi_z) /
    lambda) to the cascaded parameters."""
    offsets = np.asarray(offsets, dtype=float)
    phase = offsets[:, 1] * psi[0] + offsets[:, 2] * psi[1]
    return np.exp(-2j * np.pi * phase / wavelength)


def _design_matrix(phases, pilots, num_snapshots):
    w = np.asarray(getattr(phases, 'w', phases))
    x = np.asarray(getattr(pilots, 'x', pilots))
    if w.shape[1] < num_snapshots or x.size < num_snapshots:
        msg = 'Need {} snapshots of phases and pilots, got {} and {}.'
        raise ValueError(msg.format(num_snapshots, w.shape[1], x.size))
    return (w[:, :num_snapshots] * x[np.newaxis, :num_snapshots]).T


class CascadeFit(object):
    """The normalized misfit of the peeled reflected signal g_t to
    rho a_R(psi)^T w_t x_t with rho profiled out::

        f(psi) = 1 - |b^H g|^2 / (|b|^2 |g|^2),  b_t = a_R(psi)^T w_t x_t

    """

    def __init__(self, peeled, phases, pilots, offsets, wavelength):
        self.peeled = np.asarray(peeled).ravel()
        if self.peeled.size == 0:
            raise EstimationError('The snapshot set is empty.')
        self.design = _design_matrix(phases, pilots, self.peeled.size)
        self.offsets = np.asarray(offsets, dtype=float)
        self.wavelength = wavelength
        self.energy = np.vdot(self.peeled, self.peeled).real

    def response(self, psi):
        """Returns b(psi), shape(K,)."""
        return self.design @ cascade_steering(self.offsets, psi,
                                              self.wavelength)

    def value(self, psi):
        if self.energy == 0.0:
            return 0.0
        b = self.response(psi)
        norm = np.vdot(b, b).real
        if norm == 0.0:
            return 1.0
        return float(1.0 - abs(np.vdot(b, self.peeled)) ** 2 /
                     (norm * self.energy))

    def gradient(self, psi):
        if self.energy == 0.0:
            return np.zeros(2)
        a = cascade_steering(self.offsets, psi, self.wavelength)
        b = self.design @ a
        norm = np.vdot(b, b).real
        if norm == 0.0:
            return np.zeros(2)
        h = np.vdot(b, self.peeled)
        gradient = np.empty(2)
        for i, column in enumerate((1, 2)):
            db = self.design @ (a * (-2j * np.pi / self.wavelength) *
                                self.offsets[:, column])
            dh = np.vdot(db, self.peeled)
            d_h2 = 2.0 * np.real(np.conj(h) * dh)
            d_norm = 2.0 * np.real(np.vdot(b, db))
            gradient[i] = -(d_h2 * norm - abs(h) ** 2 * d_norm) / \
                (norm ** 2 * self.energy)
        return gradient


def cascade_grid(fit, resolution=DEFAULT_CASCADE_RESOLUTION, center=None):
    """Returns the cascade fit objective over a grid of [-2, 2]^2.

    Parameters
    ==========
    fit : CascadeFit
        The objective.
    resolution : float, optional
        The grid step.
    center : array_like, shape(2,), optional
        The y and z components of the known RIS-side direction. If given only
        nodes within unit distance of it are evaluated (those for which
        psi - center is the y-z part of a unit vector); the others are +inf.
        Aliases of the true cascade 2 apart are excluded this way.

    Returns
    =======
    psi_y, psi_z : ndarray
        The grid nodes.
    objective : ndarray, shape(len(psi_y), len(psi_z))

    """
    nodes = _grid_nodes(-2.0, 2.0, resolution)
    yy, zz = np.meshgrid(nodes, nodes, indexing='ij')
    if center is None:
        admissible = np.ones(yy.shape, dtype=bool)
    else:
        admissible = ((yy - center[0]) ** 2 + (zz - center[1]) ** 2 <=
                      1.0 + 1e-12)
    objective = np.full(yy.shape, np.inf)
    flat = np.flatnonzero(admissible)
    if fit.energy == 0.0:
        objective.ravel()[flat] = 0.0
        return nodes, nodes, objective
    psi = np.column_stack((yy.ravel()[flat], zz.ravel()[flat]))
    offsets = fit.offsets[:, 1:3]
    for start in range(0, flat.size, _CHUNK):
        chunk = psi[start:start + _CHUNK]
        steering = np.exp(-2j * np.pi * (offsets @ chunk.T) /
                          fit.wavelength)
        b = fit.design @ steering
        norm = np.sum(np.abs(b) ** 2, axis=0)
        h = fit.peeled.conj() @ b
        with np.errstate(divide='ignore', invalid='ignore'):
            values = 1.0 - np.abs(h) ** 2 / (norm * fit.energy)
        values[norm == 0.0] = 1.0
        objective.ravel()[flat[start:start + _CHUNK]] = values
    return nodes, nodes, objective


def estimate_cascade(peeled, phases, pilots, geom, wavelength,
                     resolution=DEFAULT_CASCADE_RESOLUTION, center=None,
                     window=None, tol=1e-9, method=None, full_output=False):
    """Returns the maximum likelihood cascaded parameters of the peeled
    reflected signal: a grid search over [-2, 2]^2 followed by a bounded
    interior-point refinement within one grid cell.

    Parameters
    ==========
    peeled : ndarray, shape(K,)
        The output of peel_off.
    phases : PhaseSchedule or ndarray, shape(M_R, >=K)
        The first K columns are the phases of the peeled snapshots.
    pilots : PilotSchedule or ndarray, shape(>=K,)
        The first K symbols are the pilots of the peeled snapshots.
    geom : ArisGeometry
    wavelength : float
    resolution : float, optional
        The grid step in psi.
    center : array_like, shape(2,), optional
        The y and z components of the known RIS-side direction toward the BS,
        restricting the search to physical cascades, see cascade_grid.
    window : float, optional
        Refinement half width, defaults to one grid step.
    tol, method : optional
        Passed to fasloc.refinement.refine.
    full_output : boolean, optional
        If True a dictionary of diagnostics is returned as well.

    Returns
    =======
    psi : CascadeParams

    """
    fit = CascadeFit(peeled, phases, pilots, geom.offsets, wavelength)
    psi_y, psi_z, objective = cascade_grid(fit, resolution, center=center)
    flat = int(np.argmin(objective))
    i, j = np.unravel_index(flat, objective.shape)
    if window is None:
        window = resolution
    result = refine(fit, [psi_y[i], psi_z[j]], window,
                    lower=[-2.0, -2.0], upper=[2.0, 2.0], tol=tol,
                    method=method)
    psi = CascadeParams(float(result.x[0]), float(result.x[1]))
    if full_output:
        info = {'grid_objective': float(objective[i, j]),
                'objective': float(result.objective),
                'iterations': result.iterations,
                'condition': float(np.linalg.cond(fit.design))}
        return psi, info
    return psi


def recover_theta_ur(psi, theta_known, side_sign=1.0):
    """Returns the UE-RIS angle of arrival from the cascaded parameters.

    The y and z components of k(theta_UR) are psi minus those of the known
    RIS-side direction; the x component, which a planar ARIS cannot observe,
    takes the sign side_sign.

    Parameters
    ==========
    psi : CascadeParams
    theta_known : AnglePair
        The RIS-side angle toward the BS, known from p_B and p_R.
    side_sign : float, optional
        +1.0 if the UE is on the +x side of the ARIS, else -1.0.

    Raises
    ======
    InfeasibleCascadeError
        If the remainder is not the y-z part of a unit vector.

    """
    known = direction_vector(theta_known)
    k_y = psi[0] - known[1]
    k_z = psi[1] - known[2]
    if abs(k_z) > 1.0 + 1e-12:
        msg = 'The cascade {} gives k_z = {}, outside [-1, 1].'
        raise InfeasibleCascadeError(msg.format(tuple(psi), k_z))
    el = float(np.arccos(np.clip(k_z, -1.0, 1.0)))
    sin_el = np.sin(el)
    if sin_el < 1e-12:
        if abs(k_y) > 1e-9:
            msg = 'The cascade {} gives k_y = {} at the pole.'
            raise InfeasibleCascadeError(msg.format(tuple(psi), k_y))
        return AnglePair(el, 0.0)
    ratio = k_y / sin_el
    if abs(ratio) > 1.0 + 1e-12:
        msg = 'The cascade {} gives sin(az) = {}, outside [-1, 1].'
        raise InfeasibleCascadeError(msg.format(tuple(psi), ratio))
    az = float(np.arcsin(np.clip(ratio, -1.0, 1.0)))
    if side_sign < 0.0:
        az = np.pi - az
        if az > np.pi:
            az -= 2.0 * np.pi
    return AnglePair(el, float(az))


def estimate_gain_nlos(peeled, psi, phases, pilots, geom, wavelength,
                       snapshot=None):
    """Returns the cascaded gain rho_URB.

    By default the least squares gain over all peeled snapshots,
    b^H g / |b|^2, which weights the per snapshot ratios g_t / b_t by
    |b_t|^2. With snapshot=t the single snapshot ratio g_t / b_t is returned.

    """
    fit = CascadeFit(peeled, phases, pilots, geom.offsets, wavelength)
    b = fit.response(psi)
    if snapshot is not None:
        if b[snapshot] == 0.0:
            msg = 'The cascade response vanishes at snapshot {}.'
            raise EstimationError(msg.format(snapshot))
        return complex(fit.peeled[snapshot] / b[snapshot])
    norm = np.vdot(b, b).real
    if norm == 0.0:
        raise EstimationError('The cascade response is zero.')
    return complex(np.vdot(b, fit.peeled) / norm)


def estimate_channel(y, pilots, phases, scenario, num_sources=1,
                     num_nlos_sources=1,
                     music_resolution=DEFAULT_ANGLE_RESOLUTION,
                     cascade_resolution=DEFAULT_CASCADE_RESOLUTION,
                     az_range=FRONT_HALF_SPACE, tol=1e-9, method=None):
    """Returns the direct path estimates from one received frame.

    The frame is decoupled. The BS angles of arrival of num_sources paths
    of the LoS signal start at the MUSIC peak and are refined jointly by the
    interior-point method, see estimate_paths; the strongest is the direct
    path. The num_nlos_sources BS-side paths of the NLoS signal are fitted the
    same way, each is peeled off with the others removed and its cascaded
    parameters estimated; the UE-RIS angle of arrival is recovered from the
    strongest one.

    Parameters
    ==========
    y : ndarray, shape(N, T), or RxFrame
    pilots : PilotSchedule
    phases : PhaseSchedule
    scenario : Scenario
        Supplies the array geometries, the wavelength, the known RIS-side
        angle toward the BS and the UE side of the ARIS.
    num_sources : integer, optional
        The number of LoS signal paths (the direct path and UE-BS scattered
        paths) fitted jointly. They share the pilots, so the LoS MUSIC search
        keeps one signal dimension.
    num_nlos_sources : integer, optional
        B for the NLoS MUSIC search, also the number of BS-side NLoS paths
        fitted jointly and of cascades processed.

    Returns
    =======
    report : EstimationReport

    Raises
    ======
    EstimationError, InfeasibleCascadeError

    """
    signals = decouple(y)
    half = signals.y_los.shape[1]
    x = np.asarray(pilots.x)[:half]
    w = np.asarray(phases.w)[:, :half]
    fas = scenario.fas
    lam = scenario.wavelength

    angles_ub, _, result_ub, peak_ub = estimate_paths(
        signals.y_los, fas, lam, num_paths=num_sources, waveform=x,
        resolution=music_resolution, az_range=az_range, tol=tol,
        method=method)
    theta_ub = angles_ub[0]
    if num_sources == 1:
        gain_ub = gain_ls(signals.y_los, fas.steering(theta_ub, lam), x)
    else:
        steering = np.column_stack([fas.steering(angles, lam)
                                    for angles in angles_ub])
        matched = signals.y_los @ x.conj() / np.vdot(x, x).real
        gain_ub = complex(linalg.lstsq(steering, matched)[0][0])

    angles_rb, _, result_rb, peak_rb = estimate_paths(
        signals.y_nlos, fas, lam, num_paths=num_nlos_sources,
        resolution=music_resolution, az_range=az_range, tol=tol,
        method=method)
    center = direction_vector(scenario.theta_br)[1:]

    cascades = []
    infos = []
    for k, theta_rb in enumerate(angles_rb):
        others = angles_rb[:k] + angles_rb[k + 1:]
        peeled = peel_off(signals.y_nlos, theta_rb, fas, lam, others=others)
        psi, info = estimate_cascade(peeled, w, x, scenario.aris, lam,
                                     resolution=cascade_resolution,
                                     center=center, tol=tol, method=method,
                                     full_output=True)
        gain = estimate_gain_nlos(peeled, psi, w, x, scenario.aris, lam)
        cascades.append(CascadeEstimate(theta_rb, psi, gain,
                                        info['objective'],
                                        info['condition']))
        infos.append(info)

    strongest = cascades[0]
    theta_ur = recover_theta_ur(strongest.psi, scenario.theta_br,
                                side_sign=scenario.ris_side_sign)

    info = infos[0]
    diagnostics = {'spectrum_peak_ub': peak_ub,
                   'spectrum_peak_rb': peak_rb,
                   'residual_ub': result_ub.objective,
                   'iterations_ub': result_ub.iterations,
                   'residual_rb': result_rb.objective,
                   'iterations_rb': result_rb.iterations,
                   'residual_cascade': info['objective'],
                   'iterations_cascade': info['iterations'],
                   'cascade_condition': info['condition']}

    return EstimationReport(theta_ub=theta_ub, theta_rb=strongest.theta_rb,
                            psi=strongest.psi, theta_ur=theta_ur,
                            gain_ub=gain_ub, gain_urb=strongest.gain,
                            diagnostics=diagnostics, cascades=cascades)
