"""
Configuration management for the FIN placement solver
Provides development, experiment and testing configurations with environment variable support
"""
import os
from pathlib import Path


def _optional_int(name):
    value = os.getenv(name)
    if value is None or value.strip() == '':
        return None
    return int(value)


def _optional_float(name):
    value = os.getenv(name)
    if value is None or value.strip() == '':
        return None
    return float(value)


def _flag(name, default='false'):
    return os.getenv(name, default).strip().lower() in ('1', 'true', 'yes', 'on')


class Config:
    """Base configuration with common settings"""

    # Logging
    LOG_LEVEL = os.getenv('LOG_LEVEL', 'INFO')
    LOG_FORMAT = '%(levelname)s %(name)s: %(message)s'

    # Scenario loading
    DATA_DIR = Path(os.getenv('FIN_DATA_DIR', str(Path(__file__).resolve().parent / 'data')))
    BITS_PER_FEATURE = int(os.getenv('FIN_BITS_PER_FEATURE', '32'))

    # Solver defaults
    DEFAULT_GAMMA = int(os.getenv('FIN_DEFAULT_GAMMA', '10'))
    DEFAULT_LAMBDA = _optional_int('FIN_DEFAULT_LAMBDA')
    DEFAULT_MODE = os.getenv('FIN_MODE', 'survival')
    MCP_ENDPOINTS = os.getenv('FIN_MCP_ENDPOINTS', 'any')

    # Exhaustive search guard (number of candidate configurations)
    OPT_GUARD = int(float(os.getenv('FIN_OPT_GUARD', '1e8')))

    # Multi-application experiment
    MULTIAPP_COMPUTE_SHARE = float(os.getenv('FIN_MULTIAPP_COMPUTE_SHARE', '0.005'))
    MULTIAPP_BANDWIDTH_SHARE = _optional_float('FIN_MULTIAPP_BANDWIDTH_SHARE')
    MULTIAPP_JITTER = float(os.getenv('FIN_MULTIAPP_JITTER', '0.0'))

    # Results
    RECORD_WALL_TIME = _flag('FIN_RECORD_WALL_TIME')
    DEFAULT_SEED = int(os.getenv('FIN_SEED', '0'))


class DevelopmentConfig(Config):
    """Development configuration with verbose logging"""

    DEBUG = True
    TESTING = False

    LOG_LEVEL = os.getenv('LOG_LEVEL', 'DEBUG')


class ExperimentConfig(Config):
    """Configuration for long experiment runs"""

    DEBUG = False
    TESTING = False

    # Experiment runs only surface warnings and errors
    LOG_LEVEL = os.getenv('LOG_LEVEL', 'WARNING')
    RECORD_WALL_TIME = _flag('FIN_RECORD_WALL_TIME', 'true')

    def __init__(self):
        """Validate experiment configuration on initialization"""
        super().__init__()

        if self.OPT_GUARD <= 0:
            raise ValueError('FIN_OPT_GUARD must be a positive candidate count')

        if not 0.0 <= self.MULTIAPP_JITTER < 1.0:
            raise ValueError('FIN_MULTIAPP_JITTER must lie in [0, 1)')


class TestingConfig(Config):
    """Testing configuration for running tests"""

    DEBUG = True
    TESTING = True

    LOG_LEVEL = os.getenv('LOG_LEVEL', 'WARNING')
    DEFAULT_SEED = 1234
    RECORD_WALL_TIME = False

    # Desk instances stay well below this
    OPT_GUARD = 10 ** 7


# Configuration dictionary for easy access
config = {
    'development': DevelopmentConfig,
    'experiment': ExperimentConfig,
    'testing': TestingConfig,
    'default': DevelopmentConfig
}


def get_config(config_name=None):
    """
    Get configuration object based on environment

    Args:
        config_name: Configuration name ('development', 'experiment', 'testing')
                    If None, uses FIN_ENV environment variable

    Returns:
        Configuration instance
    """
    if config_name is None:
        config_name = os.getenv('FIN_ENV', 'development')

    return config.get(config_name, DevelopmentConfig)()
