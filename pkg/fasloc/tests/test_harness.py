#!/usr/bin/env python

import json
import os

import numpy as np
from numpy import testing
import pytest

from .. import harness
from ..harness import (CSV_HEADER, ConfigError, ScenarioConfig,
                       emit_outputs, load_config, main, parse_config,
                       read_sweep_csv, read_trial_log, run_experiment,
                       run_sweep, validate_config)
from ..utils import plt
from ..waveform import EPSILON_MAPPING

SMALL = ScenarioConfig(num_fas_positions=16, num_pilots=20, aris_m_x=2,
                       aris_m_z=2, music_resolution_deg=2.0,
                       cascade_resolution=0.02, trials=3,
                       sweep_values=(10.0, 30.0))

SMALL_TEXT = """\
# a quick sweep
num_fas_positions = 16
num_pilots = 20
aris_m_x = 2
aris_m_z = 2
music_resolution_deg = 2
cascade_resolution = 0.02
trials = 1
sweep_values = 10
"""


def as_array(result):
    return np.array([tuple(p) for p in result.points], dtype=float)


class TestConfig():

    def test_defaults(self):

        config = ScenarioConfig()

        assert config.carrier_frequency == 2.8e9
        assert config.bs_position == (0.0, 0.0, 10.0)
        assert config.ris_position == (-10.0, 23.3, 0.5)
        assert config.ue_position == (3.5, 26.7, 0.7)
        assert (config.aris_m_x, config.aris_m_z) == (4, 4)
        assert config.num_fas_positions == 100
        assert config.num_pilots == 100
        assert config.epsilon == 0.8
        assert config.noise_figure_db == 18.0
        assert config.bandwidth == 1e6
        assert config.trials == 200
        assert config.sweep == 'power'
        assert harness.sweep_values(config) == tuple(
            float(v) for v in range(-20, 35, 5))
        assert validate_config(config) is config

    def test_parse(self):

        text = """
        # scenario
        ue_position = 1.0, 2.0, 3.0   # meters
        scatterers = all
        scatterers_ue_bs = 1, 1, 1; 2, 2, 2
        sweep = epsilon
        sweep-values = 0.1, 1.0
        redraw_phases = no
        seed = 0x10
        fas_aperture = auto
        """

        config = parse_config(text)

        assert config.ue_position == (1.0, 2.0, 3.0)
        assert config.scatterers == 'all'
        assert config.scatterers_ue_bs == ((1.0, 1.0, 1.0), (2.0, 2.0, 2.0))
        assert config.sweep == 'epsilon'
        assert config.sweep_values == (0.1, 1.0)
        assert config.redraw_phases is False
        assert config.seed == 16
        assert config.fas_aperture is None
        assert config.num_pilots == 100

    def test_errors(self):

        with pytest.raises(ConfigError, match='cfg:2: unknown key'):
            parse_config('trials = 3\nfrequency = 1e9', source='cfg')

        with pytest.raises(ConfigError, match='cfg:1: trials'):
            parse_config('trials = many', source='cfg')

        with pytest.raises(ConfigError, match='cfg:3: trials was already'):
            parse_config('trials = 3\n\ntrials = 4', source='cfg')

        with pytest.raises(ConfigError, match='cfg:2: num_fas_positions'):
            parse_config('seed = 1\nnum_fas_positions = 50', source='cfg')

        with pytest.raises(ConfigError, match='cfg:1: ue_position'):
            parse_config('ue_position = 1, 2', source='cfg')

        with pytest.raises(ConfigError, match='cfg:1: expected'):
            parse_config('trials 3', source='cfg')

        with pytest.raises(ConfigError, match='ue_position'):
            parse_config('ue_position = 0, 0, 10')

        with pytest.raises(ConfigError, match='sweep_values'):
            parse_config('sweep = fas-steps\nsweep_values = 16, 20')

        with pytest.raises(ConfigError, match='sweep_values'):
            parse_config('sweep = aris-size\nsweep_values = 4, 8')

        with pytest.raises(ConfigError, match='cfg:2: em_positions'):
            parse_config('seed = 1\nem_positions = 50', source='cfg')

        text = 'num_fas_positions = 16\nnum_sources = 16'
        with pytest.raises(ConfigError, match='cfg:2: num_sources'):
            parse_config(text, source='cfg')

        text = 'num_nlos_sources = 40\nsweep = fas-steps'
        with pytest.raises(ConfigError, match='cfg:1: num_nlos_sources'):
            parse_config(text, source='cfg')

        # the scattered paths count as well
        text = 'num_fas_positions = 4\nscatterers = ue-bs\n' + \
            'scatterers_ue_bs = 1, 1, 1; 2, 2, 2; 3, 3, 3'
        with pytest.raises(ConfigError, match='num_sources'):
            parse_config(text, source='cfg')

    def test_load(self, tmp_path):

        path = tmp_path / 'small.cfg'
        path.write_text(SMALL_TEXT)

        config = load_config(str(path))

        assert config.num_fas_positions == 16
        assert config.sweep_values == (10.0,)

        with pytest.raises(ConfigError, match='cannot read'):
            load_config(str(tmp_path / 'missing.cfg'))

    def test_scenario_and_design(self):

        config = SMALL._replace(scatterers='all')

        scenario = harness.make_scenario(config)

        assert scenario.num_fas_positions == 16
        assert scenario.num_aris_elements == 4
        assert all(len(link) == 2 for link in scenario.scatterers)
        assert harness.make_scenario(SMALL).scatterers == ((), (), ())

        channels = harness.build_channels(scenario,
                                          np.random.default_rng(0))
        passive = harness.make_design(SMALL._replace(passive=True), scenario,
                                      channels, np.random.default_rng(1))
        assert passive.phases.amplification == 1.0
        assert passive.noise.sigma_r2 == 0.0

        active = harness.make_design(SMALL, scenario, channels,
                                     np.random.default_rng(1))
        assert active.phases.amplification > 1.0
        assert active.noise.sigma_r2 == active.noise.sigma_b2

    def test_apply_sweep_value(self):

        assert harness.apply_sweep_value(SMALL, 5.0).power_dbm == 5.0
        config = SMALL._replace(sweep='epsilon')
        assert harness.apply_sweep_value(config, 2.0).epsilon == 2.0
        config = SMALL._replace(sweep='fas-steps')
        assert harness.apply_sweep_value(config, 36.0).num_fas_positions == 36
        config = SMALL._replace(sweep='aris-size')
        changed = harness.apply_sweep_value(config, 9.0)
        assert (changed.aris_m_x, changed.aris_m_z) == (3, 3)
        config = SMALL._replace(sweep='fas-steps-em', em_positions=25)
        changed = harness.apply_sweep_value(config, 64.0)
        assert changed.num_fas_positions == 25
        assert changed.fas_aperture == 3.5
        config = config._replace(fas_aperture=1.0)
        assert harness.apply_sweep_value(config, 64.0).fas_aperture == 1.0

    def test_modeled_paths(self):

        assert harness.modeled_paths(SMALL) == (1, 1)
        assert harness.modeled_paths(SMALL._replace(scatterers='all')) == \
            (3, 3)
        assert harness.modeled_paths(SMALL._replace(scatterers='ue-ris')) == \
            (1, 1)
        config = SMALL._replace(scatterers='ue-bs', num_sources=4)
        assert harness.modeled_paths(config) == (4, 1)


class TestSweep():

    def test_accounting(self):

        result = run_sweep(SMALL, log_trials=True)

        assert result.name == 'power'
        assert result.axis == 'power'
        assert [p.sweep_value for p in result.points] == [10.0, 30.0]
        for point in result.points:
            assert point.trials + point.failures == 3
            assert np.isfinite(point.peb)
        assert len(result.trial_log) == 6
        assert [r.trial for r in result.trial_log] == [0, 1, 2, 0, 1, 2]

    def test_determinism(self, tmp_path):

        first = emit_outputs(run_sweep(SMALL), str(tmp_path / 'a'))
        second = emit_outputs(run_sweep(SMALL), str(tmp_path / 'b'))

        with open(first[0], 'rb') as a, open(second[0], 'rb') as b:
            assert a.read() == b.read()

        other = run_sweep(SMALL._replace(seed=1))
        assert not np.array_equal(as_array(other),
                                  as_array(read_sweep_csv(first[0])))

    def test_workers(self):

        serial = run_sweep(SMALL._replace(trials=4))
        parallel = run_sweep(SMALL._replace(trials=4, workers=2))

        testing.assert_array_equal(as_array(serial), as_array(parallel))

    def test_frozen_channel(self):

        result = run_sweep(SMALL._replace(redraw_phases=False, trials=2),
                           log_trials=True)

        assert len(result.trial_log) == 4

    def test_empty_sweep(self, tmp_path):

        result = run_sweep(SMALL._replace(sweep_values=()))

        assert result.points == ()

        paths = emit_outputs(result, str(tmp_path))
        with open(paths[0], encoding='utf-8') as f:
            assert f.read() == ','.join(CSV_HEADER) + '\n'

    def test_monotone_bounds(self):

        config = SMALL._replace(trials=0, sweep_values=tuple(
            float(v) for v in range(-20, 35, 5)))

        result = run_sweep(config)

        columns = as_array(result)[:, [3, 4, 7, 8, 10]]
        assert np.all(np.diff(columns, axis=0) < 0.0)
        # no trials, no RMSE
        assert np.all(np.isnan(as_array(result)[:, 1]))

    def test_single_axis(self):

        with pytest.raises(ValueError):
            run_sweep(SMALL._replace(sweep='scatterers'))

    def test_experiment(self):

        config = SMALL._replace(trials=0, sweep_values=(10.0,))

        results = run_experiment(config._replace(sweep='passive-compare'))
        assert list(results) == ['passive-compare-active',
                                 'passive-compare-passive']

        results = run_experiment(config._replace(sweep='scatterers'))
        assert list(results) == ['scatterers-' + p for p in
                                 harness.PLACEMENTS]
        assert all(r.axis == 'power' for r in results.values())

        config = SMALL._replace(trials=0, sweep='fas-steps', em_positions=16,
                                sweep_values=(36.0, 64.0))
        results = run_experiment(config)
        assert list(results) == ['fas-steps', 'fas-steps-em']
        em = results['fas-steps-em']
        assert em.axis == 'fas-steps-em'
        assert [p.sweep_value for p in em.points] == [36.0, 64.0]
        assert all(np.isfinite(p.peb) for p in em.points)

        results = run_experiment(config._replace(em_positions=0))
        assert list(results) == ['fas-steps']

    def test_aris_size(self):

        config = SMALL._replace(trials=0, sweep='aris-size',
                                sweep_values=(4.0, 16.0))

        result = run_sweep(config)

        assert result.axis == 'aris-size'
        small, large = result.points
        assert large.crb_ur_el < small.crb_ur_el
        assert large.crb_ur_az < small.crb_ur_az


class TestOutputs():

    def setup_method(self):
        self.config = SMALL._replace(trials=2)
        self.result = run_sweep(self.config, log_trials=True)

    def test_files(self, tmp_path):

        paths = emit_outputs(self.result, str(tmp_path), config=self.config,
                             log_trials=True)

        names = sorted(os.path.basename(p) for p in paths)
        assert names == ['metadata.json', 'plot_power.py', 'power-trials.csv',
                         'power.csv']

        with open(str(tmp_path / 'metadata.json'), encoding='utf-8') as f:
            metadata = json.load(f)
        assert metadata['epsilon_mapping'] == EPSILON_MAPPING
        assert metadata['seed'] == 0
        assert metadata['results'] == ['power']
        assert metadata['config']['num_fas_positions'] == 16
        assert metadata['config']['bs_position'] == [0.0, 0.0, 10.0]
        assert 'rmse_definition' in metadata
        # -174 dBm/Hz, 1 MHz and an 18 dB noise figure
        testing.assert_allclose(metadata['noise_power_dbm'], -96.0, atol=0.05)

    def test_csv_round_trip(self, tmp_path):

        paths = emit_outputs(self.result, str(tmp_path))

        loaded = read_sweep_csv(paths[0], axis='power')

        assert loaded.name == 'power'
        testing.assert_array_equal(as_array(loaded), as_array(self.result))
        assert all(isinstance(p.trials, int) for p in loaded.points)

        with open(paths[1], encoding='utf-8') as f:
            assert 'read_sweep_csv' in f.read()

    def test_trial_log(self, tmp_path):

        emit_outputs(self.result, str(tmp_path), log_trials=True)

        records = read_trial_log(str(tmp_path / 'power-trials.csv'))

        assert len(records) == 4
        for point in self.result.points:
            ok = [r for r in records if r.sweep_value == point.sweep_value
                  and r.status == 'ok']
            assert len(ok) == point.trials
            if ok:
                squared = [r.err_x ** 2 + r.err_y ** 2 + r.err_z ** 2
                           for r in ok]
                testing.assert_allclose(np.sqrt(np.mean(squared)),
                                        point.rmse_position, rtol=1e-12)
                errors = [r.err_ub_az for r in ok]
                testing.assert_allclose(np.sqrt(np.mean(np.square(errors))),
                                        point.rmse_ub_az, rtol=1e-12)

    def test_bad_header(self, tmp_path):

        path = tmp_path / 'other.csv'
        path.write_text('a,b\n1,2\n')

        with pytest.raises(ValueError):
            read_sweep_csv(str(path))

    @pytest.mark.skipif(plt is None, reason='matplotlib is not installed')
    def test_plot_sweep(self):

        axes = harness.plot_sweep(self.result)

        assert len(axes) == 3
        assert axes[2].get_yscale() == 'log'
        plt.close('all')


class TestMain():

    def test_simulate(self, tmp_path):

        config = tmp_path / 'small.cfg'
        config.write_text(SMALL_TEXT)
        out = tmp_path / 'out'

        status = main(['simulate', '--config', str(config), '--out',
                       str(out), '--seed', '0x2a', '--log-trials'])

        assert status == 0
        assert sorted(os.listdir(str(out))) == ['metadata.json',
                                                'plot_power.py',
                                                'power-trials.csv',
                                                'power.csv']
        with open(str(out / 'metadata.json'), encoding='utf-8') as f:
            assert json.load(f)['seed'] == 42

    def test_bad_config(self, tmp_path, capsys):

        config = tmp_path / 'bad.cfg'
        config.write_text('num_pilots = 7\n')

        status = main(['simulate', '--config', str(config), '--out',
                       str(tmp_path / 'out')])

        assert status == 2
        assert 'bad.cfg:1: num_pilots' in capsys.readouterr().err
        assert not (tmp_path / 'out').exists()

    def test_no_command(self):

        assert main([]) == 2

    def test_sweep_override(self, tmp_path):

        config = tmp_path / 'small.cfg'
        config.write_text(SMALL_TEXT.replace('trials = 1', 'trials = 0'))
        out = tmp_path / 'out'

        status = main(['simulate', '--config', str(config), '--out',
                       str(out), '--sweep', 'fas-steps'])

        assert status == 0
        with open(str(out / 'fas-steps.csv'), encoding='utf-8') as f:
            rows = f.read().splitlines()
        assert len(rows) == 1 + len(harness.DEFAULT_SWEEP_VALUES['fas-steps'])

    def test_em_positions(self, tmp_path, capsys):

        config = tmp_path / 'small.cfg'
        config.write_text(SMALL_TEXT.replace('trials = 1', 'trials = 0'))
        out = tmp_path / 'out'

        status = main(['simulate', '--config', str(config), '--out',
                       str(out), '--sweep', 'fas-steps', '--em-positions',
                       '16'])

        assert status == 0
        assert 'fas-steps-em.csv' in os.listdir(str(out))
        with open(str(out / 'metadata.json'), encoding='utf-8') as f:
            metadata = json.load(f)
        assert metadata['results'] == ['fas-steps', 'fas-steps-em']
        assert metadata['config']['em_positions'] == 16

        status = main(['simulate', '--config', str(config), '--out',
                       str(tmp_path / 'bad'), '--em-positions', '10'])

        assert status == 2
        assert 'command line: em_positions' in capsys.readouterr().err
