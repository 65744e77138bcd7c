"""Helper functions and constants."""
from dataclasses import dataclass, fields
from pathlib import Path

PROJECT_ROOT = Path.cwd()


class ConfigError(ValueError):
    """Invalid configuration, missing input file or malformed matrix file."""


class BudgetExceededError(RuntimeError):
    """A computation refused to run because it exceeds its search budget."""


CONSTRUCTIONS = ('net', 'fibonacci', 'halton', 'zaremba', 'halton_shifted')
KERNELS = ('K1', 'K2', 'K3', 'none')
TEST_FUNCTIONS = ('pwlinear', 'bspline', 'none')
MODES = ('exact', 'fixed60', 'auto')

RECORD_COLUMNS = ['construction',
                  'transform',
                  'kernel_or_function',
                  'd',
                  'N',
                  'error',
                  'squared_error_num',
                  'squared_error_den',
                  'seconds']

SLOPE_COLUMNS = ['series',
                 'slope',
                 'intercept',
                 'std_err',
                 'log2_n_min',
                 'log2_n_max',
                 'n_points']


def str_to_bool(value):
    """Parse the boolean spellings accepted in configuration files."""
    lowered = str(value).strip().lower()
    if lowered in ('true', 'yes', '1', 'on'):
        return True
    if lowered in ('false', 'no', '0', 'off'):
        return False
    raise ConfigError(f'Not a boolean: {value!r}')


@dataclass
class ExperimentConfig:
    """Validated content of an experiment configuration file."""
    construction: str
    name: str = 'experiment'
    matrix_file: str = ''
    alpha: int = 1
    tent: bool = True
    kernel: str = 'K1'
    test_function: str = 'none'
    d: int = 2
    n_min: int = 1
    n_max: int = 1
    m_min: int = 3
    m_max: int = 3
    replicates: int = 1
    seed: int = 42
    precision_digits: int = 30
    mode: str = 'auto'
    n_jobs: int = 1
    fit_min: int = -1
    fit_max: int = -1
    nodes: int = 3
    instances: int = 1
    sequence_to_net: bool = False
    timing: bool = True

    def validate(self):
        if self.construction not in CONSTRUCTIONS:
            raise ConfigError(f'Unknown construction {self.construction!r}, expected one of {CONSTRUCTIONS}')
        if self.kernel not in KERNELS:
            raise ConfigError(f'Unknown kernel {self.kernel!r}, expected one of {KERNELS}')
        if self.test_function not in TEST_FUNCTIONS:
            raise ConfigError(f'Unknown test_function {self.test_function!r}, expected one of {TEST_FUNCTIONS}')
        if self.kernel == 'none' and self.test_function == 'none':
            raise ConfigError('Nothing to measure: kernel and test_function are both none')
        if self.mode not in MODES:
            raise ConfigError(f'Unknown mode {self.mode!r}, expected one of {MODES}')
        if self.alpha < 1:
            raise ConfigError('alpha must be >= 1')
        if self.d < 1:
            raise ConfigError('d must be >= 1')
        if self.construction in ('fibonacci', 'halton', 'zaremba', 'halton_shifted') and self.d != 2:
            raise ConfigError(f'Construction {self.construction} is two-dimensional, got d={self.d}')
        if self.construction == 'fibonacci':
            if not 3 <= self.m_min <= self.m_max:
                raise ConfigError('fibonacci needs 3 <= m_min <= m_max')
        elif not 1 <= self.n_min <= self.n_max:
            raise ConfigError('needs 1 <= n_min <= n_max')
        if self.construction == 'net' and not self.matrix_file:
            raise ConfigError('construction net needs matrix_file')
        if self.replicates < 1 or self.instances < 1 or self.n_jobs == 0:
            raise ConfigError('replicates and instances must be >= 1, n_jobs must not be 0')
        if self.precision_digits < 1:
            raise ConfigError('precision_digits must be >= 1')
        if self.nodes < 0:
            raise ConfigError('nodes must be >= 0')
        return self


def parse_config_lines(lines, default_name='experiment'):
    """Parse ``key = value`` lines into an ``ExperimentConfig``.

    Parameters
    ----------
    lines: iterable of str
        Content of the configuration file.
    default_name: str
        Used for ``name`` when the file does not set it.

    Returns
    -------
    ExperimentConfig
        Validated configuration.
    """
    raw = {}
    for line_number, line in enumerate(lines, start=1):
        line = line.split('#', 1)[0].strip()
        if not line:
            continue
        if '=' not in line:
            raise ConfigError(f'Line {line_number}: expected "key = value", got {line!r}')
        key, value = (part.strip() for part in line.split('=', 1))
        if key in raw:
            raise ConfigError(f'Line {line_number}: duplicate key {key!r}')
        raw[key] = value

    if 'construction' not in raw:
        raise ConfigError('Missing required key "construction"')

    known = {f.name: f for f in fields(ExperimentConfig)}
    kwargs = {'name': default_name}
    extra = {}
    for key, value in raw.items():
        if key not in known:
            extra[key] = value
            continue
        kind = known[key].type
        try:
            if kind in (int, 'int'):
                kwargs[key] = int(value)
            elif kind in (bool, 'bool'):
                kwargs[key] = str_to_bool(value)
            else:
                kwargs[key] = value
        except ValueError as error:
            raise ConfigError(f'Key {key!r}: {error}') from error
    if extra:
        raise ConfigError(f'Unknown keys: {sorted(extra)}')

    return ExperimentConfig(**kwargs).validate()


def load_config(config_path):
    """Load and validate an experiment configuration file."""
    config_path = Path(config_path)
    try:
        text = config_path.read_text(encoding='utf-8')
    except FileNotFoundError as error:
        raise ConfigError(f'No configuration file {config_path}') from error
    return parse_config_lines(text.splitlines(), default_name=config_path.stem)


def resolve_path(path_str):
    """Resolve a path relative to the project root unless it is absolute."""
    path = Path(path_str)
    if path.is_absolute() or path.exists():
        return path
    return PROJECT_ROOT / path
