"""
Configuration for catmod
Environment variables and command defaults
"""

import os
import logging
from typing import Dict, Any
from dotenv import load_dotenv


class Config:
    """Base configuration"""

    # Load variables from a local .env file if present
    load_dotenv()

    # Report cache
    CACHE_DIR = os.environ.get('CATMOD_CACHE_DIR') or '.catmod_cache'
    LOCK_TIMEOUT = float(os.environ.get('CATMOD_LOCK_TIMEOUT', '30.0'))

    # Logging
    LOG_LEVEL = os.environ.get('LOG_LEVEL', 'INFO').upper()
    LOG_FILE = os.environ.get('LOG_FILE', 'catmod.log')
    ENABLE_FILE_LOGGING = os.environ.get('ENABLE_FILE_LOGGING', 'False').lower() in ['true', '1', 'on']
    ENABLE_PERFORMANCE_LOGGING = os.environ.get('ENABLE_PERFORMANCE_LOGGING', 'False').lower() in ['true', '1']

    # Command defaults
    DEFAULT_K = 2
    DEFAULT_LEVEL = 3
    DEFAULT_MODE = 'multigraph-sum'
    DEFAULT_POLICY = 'skip-missing'
    DEFAULT_SEED = 17
    DEFAULT_TRIALS = 30
    DEFAULT_JOBS = int(os.environ.get('CATMOD_JOBS', '1'))


class DevelopmentConfig(Config):
    """Development configuration (DEBUG output via --log-level or LOG_LEVEL)"""


class ProductionConfig(Config):
    """Long sweeps: quieter console, rotating log file"""
    LOG_LEVEL = os.environ.get('LOG_LEVEL', 'WARNING').upper()
    ENABLE_FILE_LOGGING = True


class TestingConfig(Config):
    """Test configuration"""
    CACHE_DIR = 'test_cache'
    ENABLE_FILE_LOGGING = False
    LOCK_TIMEOUT = 5.0


config_map = {
    'development': DevelopmentConfig,
    'production': ProductionConfig,
    'testing': TestingConfig,
    'default': DevelopmentConfig
}


def get_config(config_name: str = None) -> Config:
    """
    Return the configuration class for an environment

    Args:
        config_name (str): development, production or testing

    Returns:
        Config: configuration class
    """
    if config_name is None:
        config_name = os.environ.get('CATMOD_ENV', 'default')

    return config_map.get(config_name, DevelopmentConfig)


def setup_logging(config: Config, level_override: str = None):
    """
    Configure logging on standard error (standard output carries command results)

    Args:
        config (Config): active configuration
        level_override (str): level name from the command line, wins over the config
    """
    log_format = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'

    level_name = (level_override or config.LOG_LEVEL).upper()
    level = getattr(logging, level_name, logging.INFO)

    root_logger = logging.getLogger()
    root_logger.setLevel(level)
    if not root_logger.handlers:
        logging.basicConfig(
            level=level,
            format=log_format,
            datefmt='%Y-%m-%d %H:%M:%S'
        )

    if config.ENABLE_FILE_LOGGING:
        try:
            os.makedirs('logs', exist_ok=True)
            if config is ProductionConfig:
                from logging.handlers import RotatingFileHandler
                file_handler = RotatingFileHandler(
                    f'logs/{config.LOG_FILE}',
                    maxBytes=10240000,
                    backupCount=10
                )
            else:
                file_handler = logging.FileHandler(f'logs/{config.LOG_FILE}')
            file_handler.setLevel(level)
            file_handler.setFormatter(logging.Formatter(log_format))
            root_logger.addHandler(file_handler)

        except OSError as e:
            logging.getLogger(__name__).warning(f"File logging disabled: {e}")

    # Lock acquisition chatter is only useful when debugging the cache
    logging.getLogger('filelock').setLevel(logging.WARNING)


def get_app_info() -> Dict[str, Any]:
    """
    Describe the active configuration

    Returns:
        dict: name, version and effective settings
    """
    config = get_config()

    return {
        'app_name': 'catmod',
        'version': '1.0.0',
        'environment': os.environ.get('CATMOD_ENV', 'development'),
        'cache_dir': config.CACHE_DIR,
        'log_level': config.LOG_LEVEL,
        'lock_timeout': config.LOCK_TIMEOUT,
        'performance_logging': config.ENABLE_PERFORMANCE_LOGGING
    }
