#!/usr/bin/env python

"""Seeded Monte Carlo sweeps of the localization chain, their output files
and the ``fasloc`` command line interface."""

import argparse
from collections import OrderedDict, namedtuple
from concurrent.futures import ProcessPoolExecutor
import csv
import json
import logging
import os
import sys

import numpy as np

from .bounds import fim_bundle
from .channel import Scenario, ScattererSet, build_channels
from .estimation import EstimationError, estimate_channel
from .geometry import wrap_angle
from .localization import CollinearGeometryError, locate
from .utils import (_optional_plt_dep, as_position, dbm_to_watts, plt,
                    watts_to_dbm)
from .version import __version__
from .waveform import (EPSILON_MAPPING, FrameDesign, NoiseModel,
                       amplification_from_epsilon, make_phase_schedule,
                       make_pilots, noise_power, synthesize_rx)

__all__ = ['ConfigError', 'ScenarioConfig', 'SweepPoint', 'SweepResult',
           'TrialRecord', 'parse_config', 'load_config', 'validate_config',
           'modeled_paths', 'make_scenario', 'run_trial', 'run_sweep',
           'run_experiment', 'emit_outputs', 'read_sweep_csv',
           'read_trial_log', 'plot_sweep', 'main']

logger = logging.getLogger(__name__)

SWEEPS = ('power', 'epsilon', 'fas-steps', 'aris-size', 'scatterers',
          'passive-compare')

# axes run_sweep runs directly; fas-steps-em is the exhaustive measurement
# companion of fas-steps
SINGLE_AXES = ('power', 'epsilon', 'fas-steps', 'fas-steps-em', 'aris-size')

PLACEMENTS = ('none', 'ue-ris', 'ris-bs', 'ue-bs', 'all')

DEFAULT_SWEEP_VALUES = {
    'power': tuple(float(v) for v in range(-20, 35, 5)),
    'epsilon': (0.01, 0.05, 0.1, 0.2, 0.5, 0.8, 1.0, 2.0, 5.0, 10.0, 20.0,
                30.0),
    'fas-steps': (36.0, 49.0, 64.0, 81.0, 100.0, 121.0, 144.0),
    'fas-steps-em': (36.0, 49.0, 64.0, 81.0, 100.0, 121.0, 144.0),
    'aris-size': (4.0, 9.0, 16.0, 25.0, 36.0, 49.0, 64.0),
    'scatterers': tuple(float(v) for v in range(-20, 35, 5)),
    'passive-compare': tuple(float(v) for v in range(0, 50, 5)),
}

RMSE_DEFINITION = ('per component angle RMSE sqrt(mean(error^2)) with '
                   'azimuth errors wrapped to (-pi, pi]; position RMSE '
                   'sqrt(mean(|p_hat - p_U|^2)); failed trials excluded')

NOISE_COVARIANCE_NOTE = ('the ARIS noise covariance C_R is evaluated at the '
                         'reference channel and held fixed in the FIM')


class ConfigError(ValueError):
    """Raised for an invalid scenario configuration."""
    pass


def _parse_bool(text):
    value = text.strip().lower()
    if value in ('true', 'yes', 'on', '1'):
        return True
    if value in ('false', 'no', 'off', '0'):
        return False
    raise ValueError('{!r} is not a boolean'.format(text))


def _parse_int(text):
    return int(text.strip(), 0)


def _parse_float(text):
    return float(text.strip())


def _parse_optional_float(text):
    if text.strip().lower() in ('', 'auto', 'none'):
        return None
    return _parse_float(text)


def _parse_position(text):
    parts = text.split(',')
    if len(parts) != 3:
        raise ValueError('{!r} is not an x, y, z triple'.format(text))
    return tuple(_parse_float(p) for p in parts)


def _parse_positions(text):
    if text.strip().lower() in ('', 'none'):
        return ()
    return tuple(_parse_position(p) for p in text.split(';'))


def _parse_floats(text):
    if text.strip().lower() in ('', 'default', 'none'):
        return None
    return tuple(_parse_float(p) for p in text.split(','))


def _parse_string(text):
    return text.strip()


# name, default, parser
_FIELDS = (
    ('carrier_frequency', 2.8e9, _parse_float),
    ('bs_position', (0.0, 0.0, 10.0), _parse_position),
    ('ris_position', (-10.0, 23.3, 0.5), _parse_position),
    ('ue_position', (3.5, 26.7, 0.7), _parse_position),
    ('aris_m_x', 4, _parse_int),
    ('aris_m_z', 4, _parse_int),
    ('num_fas_positions', 100, _parse_int),
    ('fas_aperture', None, _parse_optional_float),
    ('em_positions', 0, _parse_int),
    ('num_pilots', 100, _parse_int),
    ('epsilon', 0.8, _parse_float),
    ('noise_figure_db', 18.0, _parse_float),
    ('bandwidth', 1e6, _parse_float),
    ('power_dbm', 15.0, _parse_float),
    ('scatterers', 'none', _parse_string),
    ('scatterers_ue_ris', ((-5.5, 28.6, 2.0), (-2.0, 30.0, 3.0)),
     _parse_positions),
    ('scatterers_ris_bs', ((-7.0, 8.0, 9.3), (-6.0, 18.6, 2.7)),
     _parse_positions),
    ('scatterers_ue_bs', ((6.7, 28.0, 11.0), (8.0, 5.0, 2.0)),
     _parse_positions),
    ('reflection_loss', 1.0, _parse_float),
    ('redraw_phases', True, _parse_bool),
    ('passive', False, _parse_bool),
    ('sweep', 'power', _parse_string),
    ('sweep_values', None, _parse_floats),
    ('trials', 200, _parse_int),
    ('seed', 0, _parse_int),
    ('num_sources', 1, _parse_int),
    ('num_nlos_sources', 1, _parse_int),
    ('music_resolution_deg', 1.0, _parse_float),
    ('cascade_resolution', 0.01, _parse_float),
    ('ris_side_sign', 1.0, _parse_float),
    ('workers', 1, _parse_int),
)

_PARSERS = {name: parser for name, _, parser in _FIELDS}

ScenarioConfig = namedtuple('ScenarioConfig', [f[0] for f in _FIELDS])
ScenarioConfig.__new__.__defaults__ = tuple(f[1] for f in _FIELDS)
ScenarioConfig.__doc__ = """A simulation scenario and sweep. Positions are in
meters, the carrier and bandwidth in Hz, the power in dBm. ``scatterers``
selects which of the configured scatterer lists are active: none, ue-ris,
ris-bs, ue-bs or all. ``sweep_values`` of None selects the default values of
the sweep axis. A positive ``em_positions`` adds to a fas-steps sweep the
exhaustive measurement (EM) series: a FAS with that many positions over the
aperture of each swept FAS, standing in for a continuous aperture."""

SweepPoint = namedtuple('SweepPoint',
                        ['sweep_value',
                         'rmse_ub_el', 'rmse_ub_az', 'crb_ub_el',
                         'crb_ub_az',
                         'rmse_ur_el', 'rmse_ur_az', 'crb_ur_el',
                         'crb_ur_az',
                         'rmse_position', 'peb', 'trials', 'failures'])
SweepPoint.__doc__ = """The RMSE and root-CRB of each angle component, the
position RMSE and the PEB at one sweep value, with the number of successful
and failed trials."""

SweepResult = namedtuple('SweepResult', ['name', 'axis', 'points',
                                         'trial_log'])
SweepResult.__new__.__defaults__ = ((),)
SweepResult.__doc__ = """A named sweep over one axis: a tuple of SweepPoints
and, optionally, the TrialRecords they were computed from."""

TrialRecord = namedtuple('TrialRecord',
                         ['sweep_value', 'trial', 'status', 'err_ub_el',
                          'err_ub_az', 'err_ur_el', 'err_ur_az', 'err_x',
                          'err_y', 'err_z'])
TrialRecord.__doc__ = """The signed estimation errors of one trial; status is
'ok' or the name of the error that made the trial fail."""

CSV_HEADER = ('sweep_value',
              'rmse_θUB_el', 'rmse_θUB_az',
              'crb_θUB_el', 'crb_θUB_az',
              'rmse_θUR_el', 'rmse_θUR_az',
              'crb_θUR_el', 'crb_θUR_az',
              'rmse_pU', 'peb', 'trials', 'failures')

AXIS_LABELS = {'power': 'P [dBm]', 'epsilon': r'$\epsilon$',
               'fas-steps': 'N', 'fas-steps-em': 'N', 'aris-size': r'$M_R$',
               'scatterers': 'P [dBm]',
               'passive-compare': 'P [dBm]'}


def _is_perfect_square(value):
    root = int(round(np.sqrt(value)))
    return value >= 1 and root * root == value


def modeled_paths(config):
    """Returns the numbers of LoS and NLoS signal paths the estimator fits:
    num_sources and num_nlos_sources, raised to one path more than the active
    UE-BS and RIS-BS scatterers."""
    ue_bs = ris_bs = 0
    if config.scatterers in ('ue-bs', 'all'):
        ue_bs = len(config.scatterers_ue_bs)
    if config.scatterers in ('ris-bs', 'all'):
        ris_bs = len(config.scatterers_ris_bs)
    return (max(config.num_sources, 1 + ue_bs),
            max(config.num_nlos_sources, 1 + ris_bs))


def validate_config(config, source='<config>', lines=None):
    """Returns the configuration if every field is in range.

    Parameters
    ==========
    config : ScenarioConfig
    source : string, optional
        The file name used in diagnostics.
    lines : dictionary, optional
        Maps field names to the line they were read from.

    Raises
    ======
    ConfigError
        Prefixed with ``source:line:`` when the line is known.

    """
    lines = lines or {}

    def fail(key, message):
        if key in lines:
            prefix = '{}:{}: '.format(source, lines[key])
        else:
            prefix = '{}: '.format(source)
        raise ConfigError(prefix + '{}: {}'.format(key, message))

    c = config
    if not c.carrier_frequency > 0.0:
        fail('carrier_frequency', 'must be positive')
    for key in ('bs_position', 'ris_position', 'ue_position'):
        try:
            as_position(getattr(c, key))
        except ValueError as exc:
            fail(key, str(exc))
    if np.array_equal(c.bs_position, c.ris_position):
        fail('ris_position', 'coincides with bs_position')
    for key in ('bs_position', 'ris_position'):
        if np.array_equal(getattr(c, key), c.ue_position):
            fail('ue_position', 'coincides with {}'.format(key))
    if c.aris_m_x < 1 or c.aris_m_z < 1:
        fail('aris_m_x' if c.aris_m_x < 1 else 'aris_m_z',
             'must be at least 1')
    if not _is_perfect_square(c.num_fas_positions) or \
            c.num_fas_positions < 4:
        fail('num_fas_positions', 'must be a perfect square of at least 4')
    if c.fas_aperture is not None and c.fas_aperture < 0.0:
        fail('fas_aperture', 'must be nonnegative')
    if c.em_positions != 0 and (not _is_perfect_square(c.em_positions) or
                                c.em_positions < 4):
        fail('em_positions', 'must be 0 or a perfect square of at least 4')
    if c.num_pilots < 2 or c.num_pilots % 2 != 0:
        fail('num_pilots', 'must be even and at least 2')
    if not c.epsilon > 0.0:
        fail('epsilon', 'must be positive')
    if not c.bandwidth > 0.0:
        fail('bandwidth', 'must be positive')
    if c.scatterers not in PLACEMENTS:
        fail('scatterers', 'must be one of {}'.format(', '.join(PLACEMENTS)))
    if c.reflection_loss < 0.0:
        fail('reflection_loss', 'must be nonnegative')
    if c.sweep not in SWEEPS:
        fail('sweep', 'must be one of {}'.format(', '.join(SWEEPS)))
    if c.sweep_values is not None:
        values = np.asarray(c.sweep_values, dtype=float)
        if not np.all(np.isfinite(values)):
            fail('sweep_values', 'must be finite')
        if c.sweep == 'epsilon' and not np.all(values > 0.0):
            fail('sweep_values', 'epsilon values must be positive')
        if c.sweep == 'fas-steps' and not all(
                v == int(v) and _is_perfect_square(int(v)) and v >= 4
                for v in values):
            fail('sweep_values', 'FAS sizes must be perfect squares >= 4')
        if c.sweep == 'aris-size' and not all(
                v == int(v) and _is_perfect_square(int(v)) and v >= 4
                for v in values):
            fail('sweep_values', 'ARIS sizes must be perfect squares >= 4')
    if c.trials < 0:
        fail('trials', 'must be nonnegative')
    if c.seed < 0:
        fail('seed', 'must be nonnegative')
    if c.num_sources < 1 or c.num_nlos_sources < 1:
        fail('num_sources' if c.num_sources < 1 else 'num_nlos_sources',
             'must be at least 1')
    if c.sweep == 'fas-steps':
        positions = [int(v) for v in sweep_values(c)]
        if c.em_positions:
            positions.append(c.em_positions)
    else:
        positions = [c.num_fas_positions]
    placement = 'all' if c.sweep == 'scatterers' else c.scatterers
    paths = modeled_paths(c._replace(scatterers=placement))
    for key, count in zip(('num_sources', 'num_nlos_sources'), paths):
        if positions and count >= min(positions):
            fail(key, '{} paths need more than the {} FAS positions'.format(
                count, min(positions)))
    if not c.music_resolution_deg > 0.0:
        fail('music_resolution_deg', 'must be positive')
    if not 0.0 < c.cascade_resolution <= 1.0:
        fail('cascade_resolution', 'must be in (0, 1]')
    if c.ris_side_sign not in (1.0, -1.0):
        fail('ris_side_sign', 'must be 1 or -1')
    if c.workers < 1:
        fail('workers', 'must be at least 1')
    return config


def parse_config(text, source='<string>'):
    """Returns the ScenarioConfig described by a flat ``key = value`` text.

    Blank lines and everything after ``#`` are ignored. Triples are written
    ``x, y, z``, lists of triples separate the triples with ``;`` and lists of
    numbers are comma separated. Keys not given keep their defaults.

    Raises
    ======
    ConfigError
        For unknown or repeated keys, unparseable values and out of range
        values, prefixed with ``source:line:``.

    """
    values = {}
    lines = {}
    for number, raw in enumerate(text.splitlines(), 1):
        line = raw.split('#', 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition('=')
        key = key.strip().replace('-', '_')
        if not sep:
            msg = '{}:{}: expected "key = value", got {!r}'
            raise ConfigError(msg.format(source, number, line))
        if key not in _PARSERS:
            msg = '{}:{}: unknown key {!r}'
            raise ConfigError(msg.format(source, number, key))
        if key in values:
            msg = '{}:{}: {} was already set on line {}'
            raise ConfigError(msg.format(source, number, key, lines[key]))
        try:
            values[key] = _PARSERS[key](value)
        except ValueError as exc:
            msg = '{}:{}: {}: {}'
            raise ConfigError(msg.format(source, number, key, exc))
        lines[key] = number
    return validate_config(ScenarioConfig(**values), source=source,
                           lines=lines)


def load_config(path):
    """Returns the ScenarioConfig read from a file, see parse_config."""
    try:
        with open(path) as f:
            text = f.read()
    except OSError as exc:
        msg = '{}: cannot read the configuration: {}'
        raise ConfigError(msg.format(path, exc.strerror))
    return parse_config(text, source=path)


def sweep_values(config):
    """Returns the sweep values of the configuration's axis."""
    if config.sweep_values is not None:
        return tuple(float(v) for v in config.sweep_values)
    return DEFAULT_SWEEP_VALUES[config.sweep]


def apply_sweep_value(config, value):
    """Returns the configuration at one value of its sweep axis. On the
    fas-steps-em axis the value is the size of the FAS whose aperture the
    em_positions positions cover."""
    if config.sweep == 'epsilon':
        return config._replace(epsilon=float(value))
    elif config.sweep == 'fas-steps':
        return config._replace(num_fas_positions=int(value))
    elif config.sweep == 'fas-steps-em':
        aperture = config.fas_aperture
        if aperture is None:
            aperture = (int(round(np.sqrt(value))) - 1) / 2.0
        return config._replace(num_fas_positions=config.em_positions,
                               fas_aperture=aperture)
    elif config.sweep == 'aris-size':
        side = int(round(np.sqrt(value)))
        return config._replace(aris_m_x=side, aris_m_z=side)
    else:
        return config._replace(power_dbm=float(value))


def make_scenario(config):
    """Returns the Scenario of a configuration with its active scatterers."""
    active = {'none': (), 'ue-ris': ('ue_ris',), 'ris-bs': ('ris_bs',),
              'ue-bs': ('ue_bs',), 'all': ('ue_ris', 'ris_bs', 'ue_bs')}
    links = active[config.scatterers]
    scatterers = ScattererSet(
        *[getattr(config, 'scatterers_' + link) if link in links else ()
          for link in ScattererSet._fields])
    return Scenario(config.ue_position, config.bs_position,
                    config.ris_position,
                    aris_shape=(config.aris_m_x, config.aris_m_z),
                    num_fas_positions=config.num_fas_positions,
                    carrier_frequency=config.carrier_frequency,
                    fas_aperture=config.fas_aperture, scatterers=scatterers,
                    reflection_loss=config.reflection_loss,
                    ris_side_sign=config.ris_side_sign)


def make_design(config, scenario, channels, rng):
    """Returns the pilots, the ARIS phases and the noise model of a frame.
    A passive configuration uses p = 1 and no ARIS noise."""
    noise = NoiseModel.from_noise_figure(config.noise_figure_db,
                                         config.bandwidth,
                                         passive=config.passive)
    power = float(dbm_to_watts(config.power_dbm))
    pilots = make_pilots(config.num_pilots, power, rng)
    if config.passive:
        amplification = 1.0
    else:
        amplification = amplification_from_epsilon(config.epsilon, power,
                                                    channels.h_ur,
                                                    noise.sigma_r2)
    phases = make_phase_schedule(scenario.num_aris_elements,
                                 config.num_pilots, amplification, rng)
    return FrameDesign(pilots, phases, noise)


def run_trial(config, value, trial, seed, channel_seed=None):
    """Returns the TrialRecord of one Monte Carlo trial.

    Parameters
    ==========
    config : ScenarioConfig
        Already at the sweep value.
    value : float
        The sweep value, recorded in the result.
    trial : integer
        The trial index.
    seed : numpy.random.SeedSequence
        Spawns the channel, design and noise streams of the trial.
    channel_seed : numpy.random.SeedSequence, optional
        If given the channel phases come from it instead, so that every
        trial of a sweep point sees the same channel.

    """
    channel_seq, design_seq, noise_seq = seed.spawn(3)
    if channel_seed is not None:
        channel_seq = channel_seed
    scenario = make_scenario(config)
    channels = build_channels(scenario, np.random.default_rng(channel_seq))
    design = make_design(config, scenario, channels,
                         np.random.default_rng(design_seq))
    frame = synthesize_rx(channels, design.pilots, design.phases,
                          design.noise, np.random.default_rng(noise_seq))
    num_sources, num_nlos_sources = modeled_paths(config)
    try:
        report = estimate_channel(
            frame.y, design.pilots, design.phases, scenario,
            num_sources=num_sources, num_nlos_sources=num_nlos_sources,
            music_resolution=np.deg2rad(config.music_resolution_deg),
            cascade_resolution=config.cascade_resolution)
        position = locate(report.theta_ub, report.theta_ur,
                          scenario.bs_position, scenario.ris_position)
    except (EstimationError, CollinearGeometryError) as exc:
        logger.debug('Trial %d at %s failed: %s', trial, value, exc)
        nan = float('nan')
        return TrialRecord(value, trial, type(exc).__name__, nan, nan, nan,
                           nan, nan, nan, nan)
    error = position - scenario.ue_position
    return TrialRecord(
        value, trial, 'ok',
        report.theta_ub.el - scenario.theta_ub.el,
        wrap_angle(report.theta_ub.az - scenario.theta_ub.az),
        report.theta_ur.el - scenario.theta_ur.el,
        wrap_angle(report.theta_ur.az - scenario.theta_ur.az),
        float(error[0]), float(error[1]), float(error[2]))


def _run_trial(args):
    return run_trial(*args)


def reference_bounds(config, seed):
    """Returns the FimBundle at the true parameters of a reference channel
    and frame drawn from seed."""
    channel_seq, design_seq = seed.spawn(2)
    scenario = make_scenario(config)
    channels = build_channels(scenario, np.random.default_rng(channel_seq))
    design = make_design(config, scenario, channels,
                         np.random.default_rng(design_seq))
    rho_ub = channels.gains_ub[0]
    rho_urb = channels.gains_rb[0] * channels.gains_ur[0]
    gamma_p = np.hstack(([rho_ub.real, rho_ub.imag, rho_urb.real,
                          rho_urb.imag], scenario.ue_position))
    return fim_bundle(gamma_p, scenario, design, h_rb=channels.h_rb)


def _fresh(seed):
    # spawn() advances a SeedSequence; the bounds reuse the same children
    return np.random.SeedSequence(seed.entropy, spawn_key=seed.spawn_key)


def _rmse(errors):
    errors = np.asarray(errors, dtype=float)
    if errors.size == 0:
        return float('nan')
    return float(np.sqrt(np.mean(errors ** 2)))


def summarize(value, records, bundle):
    """Returns the SweepPoint of the trial records of one sweep value."""
    ok = [r for r in records if r.status == 'ok']

    def column(name):
        return [getattr(r, name) for r in ok]

    position = [np.sqrt(r.err_x ** 2 + r.err_y ** 2 + r.err_z ** 2)
                for r in ok]
    root_crb = np.sqrt(bundle.crb_diag)
    return SweepPoint(
        float(value),
        _rmse(column('err_ub_el')), _rmse(column('err_ub_az')),
        float(root_crb[4]), float(root_crb[5]),
        _rmse(column('err_ur_el')), _rmse(column('err_ur_az')),
        float(root_crb[6]), float(root_crb[7]),
        _rmse(position), float(bundle.peb), len(ok),
        len(records) - len(ok))


def run_sweep(config, name=None, log_trials=False):
    """Returns the SweepResult of a power, epsilon, fas-steps, fas-steps-em or
    aris-size sweep.

    Every sweep value gets its own seed sequence, spawned from the
    configuration's seed, from which each trial gets an independent one.
    The bounds are evaluated at a reference channel and frame from a stream
    shared by all sweep values. Trials run on ``config.workers`` processes;
    results are reduced in trial order so the output does not depend on the
    worker count.

    Parameters
    ==========
    config : ScenarioConfig
    name : string, optional
        Defaults to the sweep axis.
    log_trials : boolean, optional
        Keep the TrialRecords in the result.

    """
    if config.sweep not in SINGLE_AXES:
        msg = 'run_sweep runs a single axis, not {}; use run_experiment.'
        raise ValueError(msg.format(config.sweep))
    values = sweep_values(config)
    root = np.random.SeedSequence(config.seed)
    point_seeds = root.spawn(len(values) + 1)
    reference_seed = point_seeds.pop()

    points = []
    log = []
    executor = None
    if config.workers > 1 and config.trials > 1:
        executor = ProcessPoolExecutor(max_workers=config.workers)
    try:
        for value, point_seed in zip(values, point_seeds):
            point_config = apply_sweep_value(config, value)
            trial_seeds = point_seed.spawn(config.trials + 1)
            channel_seed = trial_seeds.pop()
            if config.redraw_phases:
                channel_seed = None
            jobs = [(point_config, value, i, s, channel_seed)
                    for i, s in enumerate(trial_seeds)]
            if executor is None:
                records = list(map(_run_trial, jobs))
            else:
                records = list(executor.map(_run_trial, jobs))
            bundle = reference_bounds(point_config, _fresh(reference_seed))
            point = summarize(value, records, bundle)
            logger.info('%s = %g: %d trials, %d failed, position RMSE %.4g '
                        'm, PEB %.4g m', config.sweep, value, point.trials,
                        point.failures, point.rmse_position, point.peb)
            points.append(point)
            if log_trials:
                log.extend(records)
    finally:
        if executor is not None:
            executor.shutdown()

    return SweepResult(name or config.sweep, config.sweep, tuple(points),
                       tuple(log))


def run_experiment(config, log_trials=False):
    """Returns an ordered mapping of result names to SweepResults.

    The scatterers axis runs one power sweep per scatterer placement (none,
    ue-ris, ris-bs, ue-bs and all), passive-compare one power sweep with the
    ARIS and one with a passive RIS, fas-steps with a positive em_positions
    the fas-steps sweep and its exhaustive measurement series fas-steps-em,
    and the other axes a single sweep.

    """
    results = OrderedDict()
    if config.sweep == 'scatterers':
        for placement in PLACEMENTS:
            name = 'scatterers-' + placement
            sub = config._replace(sweep='power', scatterers=placement,
                                  sweep_values=sweep_values(config))
            results[name] = run_sweep(sub, name=name, log_trials=log_trials)
    elif config.sweep == 'passive-compare':
        for label, passive in (('active', False), ('passive', True)):
            name = 'passive-compare-' + label
            sub = config._replace(sweep='power', passive=passive,
                                  sweep_values=sweep_values(config))
            results[name] = run_sweep(sub, name=name, log_trials=log_trials)
    else:
        results[config.sweep] = run_sweep(config, log_trials=log_trials)
        if config.sweep == 'fas-steps' and config.em_positions > 0:
            sub = config._replace(sweep='fas-steps-em',
                                  sweep_values=sweep_values(config))
            results['fas-steps-em'] = run_sweep(sub, log_trials=log_trials)
    return results


def _format(value):
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return str(int(value))
    return repr(float(value))


def _open_for_writing(path):
    try:
        return open(path, 'w', newline='', encoding='utf-8')
    except OSError as exc:
        msg = 'Cannot write {}: {}'
        raise OSError(msg.format(path, exc.strerror))


def write_sweep_csv(result, path):
    """Writes the sweep points of a SweepResult to a CSV file."""
    with _open_for_writing(path) as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(CSV_HEADER)
        for point in result.points:
            writer.writerow([_format(v) for v in point])


def write_trial_log(records, path):
    """Writes TrialRecords to a CSV file."""
    with _open_for_writing(path) as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(TrialRecord._fields)
        for record in records:
            writer.writerow([record.status if name == 'status' else
                             _format(value) for name, value in
                             zip(TrialRecord._fields, record)])


def read_sweep_csv(path, axis=None):
    """Returns the SweepResult stored in a CSV file written by
    emit_outputs. The name is the file name without its extension."""
    name = os.path.splitext(os.path.basename(path))[0]
    with open(path, newline='', encoding='utf-8') as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header is None or tuple(header) != CSV_HEADER:
            msg = '{} does not have the sweep CSV header.'
            raise ValueError(msg.format(path))
        points = []
        for row in reader:
            floats = [float(v) for v in row[:-2]]
            points.append(SweepPoint(*(floats + [int(row[-2]),
                                                 int(row[-1])])))
    return SweepResult(name, axis, tuple(points))


def read_trial_log(path):
    """Returns the TrialRecords stored by write_trial_log."""
    with open(path, newline='', encoding='utf-8') as f:
        reader = csv.DictReader(f)
        records = []
        for row in reader:
            records.append(TrialRecord(
                float(row['sweep_value']), int(row['trial']), row['status'],
                *[float(row[name]) for name in TrialRecord._fields[3:]]))
    return records


_PLOT_SCRIPT = '''\
#!/usr/bin/env python

"""Plots the RMSE of {name} against its sweep axis with the bounds."""

import os

import matplotlib.pyplot as plt

from fasloc.harness import plot_sweep, read_sweep_csv

here = os.path.dirname(os.path.abspath(__file__))
result = read_sweep_csv(os.path.join(here, '{name}.csv'), axis='{axis}')
plot_sweep(result)
plt.show()
'''


def _jsonable(value):
    if isinstance(value, tuple):
        return [_jsonable(v) for v in value]
    return value


def emit_outputs(results, out_dir, config=None, log_trials=False):
    """Writes the files of an experiment to a directory.

    For every result ``<name>.csv`` with the sweep points and
    ``plot_<name>.py``, a script plotting it; with log_trials also
    ``<name>-trials.csv``. ``metadata.json`` records the resolved
    configuration, the seed, the package version, the epsilon mapping, the
    RMSE definition and the thermal noise power in dBm.

    Parameters
    ==========
    results : SweepResult or mapping of names to SweepResults
    out_dir : string
        Created if missing.
    config : ScenarioConfig, optional
        The configuration the results were computed with.
    log_trials : boolean, optional

    Returns
    =======
    paths : list of strings
        The files written.

    """
    if isinstance(results, SweepResult):
        results = OrderedDict([(results.name, results)])
    try:
        os.makedirs(out_dir, exist_ok=True)
    except OSError as exc:
        msg = 'Cannot create {}: {}'
        raise OSError(msg.format(out_dir, exc.strerror))

    paths = []
    for name, result in results.items():
        path = os.path.join(out_dir, name + '.csv')
        write_sweep_csv(result, path)
        paths.append(path)
        path = os.path.join(out_dir, 'plot_{}.py'.format(name))
        with _open_for_writing(path) as f:
            f.write(_PLOT_SCRIPT.format(name=name, axis=result.axis))
        paths.append(path)
        if log_trials:
            path = os.path.join(out_dir, name + '-trials.csv')
            write_trial_log(result.trial_log, path)
            paths.append(path)

    metadata = OrderedDict([
        ('version', __version__),
        ('seed', None if config is None else config.seed),
        ('config', None if config is None else
         OrderedDict((k, _jsonable(v)) for k, v in config._asdict().items())),
        ('results', list(results)),
        ('epsilon_mapping', EPSILON_MAPPING),
        ('rmse_definition', RMSE_DEFINITION),
        ('crb_columns', 'square roots of the CRB diagonal; PEB in meters'),
        ('noise_covariance', NOISE_COVARIANCE_NOTE),
        ('noise_power_dbm', None if config is None else float(watts_to_dbm(
            noise_power(config.noise_figure_db, config.bandwidth)))),
    ])
    path = os.path.join(out_dir, 'metadata.json')
    with _open_for_writing(path) as f:
        json.dump(metadata, f, indent=2)
        f.write('\n')
    paths.append(path)
    return paths


@_optional_plt_dep
def plot_sweep(result, axes=None):
    """Returns the axes of three log scale plots of the RMSE of theta_UB,
    theta_UR and the position against the sweep axis, each with its bound
    dashed.

    Parameters
    ==========
    result : SweepResult
    axes : array_like of three matplotlib axes, optional

    """
    if axes is None:
        fig, axes = plt.subplots(1, 3, figsize=(12, 4))
    x = [p.sweep_value for p in result.points]

    def column(name):
        return [getattr(p, name) for p in result.points]

    panels = (
        (r'$\theta_{UB}$ [rad]', (('ub_el', 'el'), ('ub_az', 'az'))),
        (r'$\theta_{UR}$ [rad]', (('ur_el', 'el'), ('ur_az', 'az'))),
    )
    for ax, (ylabel, components) in zip(axes[:2], panels):
        for key, label in components:
            line, = ax.plot(x, column('rmse_' + key), marker='o',
                            label='RMSE ' + label)
            ax.plot(x, column('crb_' + key), linestyle='--',
                    color=line.get_color(), label='CRB ' + label)
        ax.set_ylabel(ylabel)

    axes[2].plot(x, column('rmse_position'), marker='o', label='RMSE')
    axes[2].plot(x, column('peb'), linestyle='--', label='PEB')
    axes[2].set_ylabel('position [m]')

    for ax in axes:
        ax.set_yscale('log')
        ax.set_xlabel(AXIS_LABELS.get(result.axis, result.axis or ''))
        ax.legend()
        ax.grid(True, which='both', alpha=0.3)
    axes[0].set_title(result.name)

    return axes


def build_parser():
    parser = argparse.ArgumentParser(
        prog='fasloc',
        description='Monte Carlo localization with an active RIS and a '
                    'fluid antenna base station.')
    parser.add_argument('--version', action='version',
                        version='%(prog)s ' + __version__)
    commands = parser.add_subparsers(dest='command')
    simulate = commands.add_parser('simulate', help='Run a sweep.')
    simulate.add_argument('--config', help='Scenario file (key = value).')
    simulate.add_argument('--sweep', choices=SWEEPS,
                          help='The sweep axis, overrides the file.')
    simulate.add_argument('--trials', type=int,
                          help='Trials per sweep value.')
    simulate.add_argument('--seed', type=lambda value: int(value, 0),
                          help='Root seed (decimal or 0x-prefixed hex).')
    simulate.add_argument('--out', required=True,
                          help='Output directory.')
    simulate.add_argument('--log-trials', action='store_true',
                          help='Also write the per trial errors.')
    simulate.add_argument('--workers', type=int,
                          help='Worker processes for the trials.')
    simulate.add_argument('--em-positions', type=int,
                          help='FAS positions of the exhaustive measurement '
                               'series of a fas-steps sweep.')
    simulate.add_argument('--verbose', action='store_true',
                          help='Log every failed trial.')
    return parser


def main(argv=None):
    """Runs the command line interface and returns the exit status."""
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command != 'simulate':
        parser.print_help()
        return 2

    logging.basicConfig(level=logging.DEBUG if args.verbose else
                        logging.INFO,
                        format='%(asctime)s %(name)s %(levelname)s '
                               '%(message)s')
    logging.captureWarnings(True)

    try:
        if args.config is None:
            config = ScenarioConfig()
        else:
            config = load_config(args.config)
        overrides = {'sweep': args.sweep, 'trials': args.trials,
                     'seed': args.seed, 'workers': args.workers,
                     'em_positions': args.em_positions}
        overrides = {k: v for k, v in overrides.items() if v is not None}
        if 'sweep' in overrides and args.config is not None and \
                overrides['sweep'] != config.sweep:
            # values from the file belong to the file's axis
            overrides['sweep_values'] = None
        config = validate_config(config._replace(**overrides),
                                 source='command line')
    except ConfigError as exc:
        print('fasloc: error: {}'.format(exc), file=sys.stderr)
        return 2

    logger.info('Running the %s sweep with %d trials per value, seed %d.',
                config.sweep, config.trials, config.seed)
    results = run_experiment(config, log_trials=args.log_trials)
    try:
        paths = emit_outputs(results, args.out, config=config,
                             log_trials=args.log_trials)
    except OSError as exc:
        print('fasloc: error: {}'.format(exc), file=sys.stderr)
        return 1
    for path in paths:
        logger.info('Wrote %s', path)
    return 0
