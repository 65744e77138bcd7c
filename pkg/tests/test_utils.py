import pytest

from utils import ConfigError, ExperimentConfig, load_config, parse_config_lines, resolve_path, str_to_bool


class TestStrToBool:

    @pytest.mark.parametrize('value, expected', [('true', True), ('Yes', True), ('0', False), (' off ', False)])
    def test_spellings(self, value, expected):
        assert str_to_bool(value) is expected

    def test_rejects_other_words(self):
        with pytest.raises(ConfigError):
            str_to_bool('maybe')


class TestParseConfig:

    def test_minimal(self):
        config = parse_config_lines(['construction = halton'], 'halton_run')
        assert config.name == 'halton_run'
        assert config.kernel == 'K1' and config.tent is True and config.d == 2

    def test_types_and_comments(self):
        lines = ['# order 2 net',
                 'construction = net',
                 'matrix_file = data/matrices/sobol  # six dimensions',
                 'alpha = 2',
                 'tent = false',
                 '',
                 'n_min = 2',
                 'n_max = 9',
                 'timing = no']
        config = parse_config_lines(lines)
        assert config.matrix_file == 'data/matrices/sobol'
        assert config.alpha == 2 and config.n_max == 9
        assert config.tent is False and config.timing is False

    def test_name_in_file_wins(self):
        assert parse_config_lines(['construction = halton', 'name = other'], 'stem').name == 'other'

    @pytest.mark.parametrize('lines', [
        ['kernel = K1'],
        ['construction = halton', 'construction = zaremba'],
        ['construction = halton', 'colour = blue'],
        ['construction = halton', 'n_max = many'],
        ['construction = halton', 'just words'],
        ['construction = halton', 'tent = sometimes'],
    ])
    def test_malformed(self, lines):
        with pytest.raises(ConfigError):
            parse_config_lines(lines)


class TestValidate:

    @pytest.mark.parametrize('kwargs', [
        dict(construction='sobol'),
        dict(construction='halton', kernel='K4'),
        dict(construction='halton', kernel='none', test_function='none'),
        dict(construction='halton', d=3),
        dict(construction='fibonacci', m_min=2, m_max=5),
        dict(construction='zaremba', n_min=4, n_max=3),
        dict(construction='net'),
        dict(construction='halton', mode='float'),
        dict(construction='halton_shifted', replicates=0),
        dict(construction='halton', n_jobs=0),
    ])
    def test_rejects(self, kwargs):
        with pytest.raises(ConfigError):
            ExperimentConfig(**kwargs).validate()

    def test_net_any_dimension(self):
        config = ExperimentConfig('net', matrix_file='data/matrices/sobol', d=3, alpha=2).validate()
        assert config.d == 3


class TestLoadConfig:

    def test_name_from_stem(self, tmp_path):
        path = tmp_path / 'zaremba_small.cfg'
        path.write_text('construction = zaremba\nn_min = 2\nn_max = 4\n')
        config = load_config(path)
        assert config.name == 'zaremba_small'
        assert (config.n_min, config.n_max) == (2, 4)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            load_config(tmp_path / 'nope.cfg')

    def test_shipped_configs_are_valid(self, matrix_dir):
        configs = sorted((matrix_dir.parents[1] / 'configs').glob('*.cfg'))
        assert configs
        for path in configs:
            load_config(path)

    def test_shipped_nets_append_k_over_n(self, matrix_dir):
        configs = [load_config(path) for path in (matrix_dir.parents[1] / 'configs').glob('*.cfg')]
        nets = [config for config in configs if config.construction == 'net']
        assert nets
        assert all(config.sequence_to_net for config in nets)


def test_resolve_path(tmp_path):
    assert resolve_path(tmp_path) == tmp_path
    assert resolve_path('no/such/file').parts[-3:] == ('no', 'such', 'file')
