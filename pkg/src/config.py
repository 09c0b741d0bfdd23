"""
Configuration settings for the polytile tiling toolkit
"""

import logging
import os
from typing import Dict, List


class Config:
    """Configuration class for polytile"""

    # Input handling
    TILE_SUFFIX = '.tile'

    # Directory settings
    LOGS_DIRECTORY_ENV = 'POLYTILE_LOG_DIR'
    DEFAULT_STATE_FILE = 'polytile.state'

    # Engine settings
    THREADS_ENV = 'POLYTILE_THREADS'
    DEFAULT_THREADS = 1
    STATE_VERSION = 'polytile-state/1'

    # Arrangement size above which discretization warns (edges of Omega)
    MAX_ARRANGEMENT_EDGES = 400

    # SVG rendering settings
    SVG_SETTINGS = {
        'cell_pixels': 40,
        'panel_gap_cells': 1,
        'stroke': '#222222',
        'empty_fill': '#ffffff',
        # P_0 grey, P_1 green, P_2 orange, P_3 blue, then further distinct hues
        'palette': [
            '#9e9e9e', '#4caf50', '#ff9800', '#2196f3', '#e91e63',
            '#9c27b0', '#00bcd4', '#cddc39', '#795548', '#3f51b5',
            '#ffeb3b', '#009688',
        ],
    }

    # Process exit codes shared by every subcommand
    EXIT_CODES = {
        'ok': 0,
        'negative': 1,
        'undecided': 2,
        'usage': 64,
        'data_format': 65,
        'internal': 70,
    }

    LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
    LOG_LEVEL = 'INFO'

    @classmethod
    def get_thread_count(cls) -> int:
        """Read POLYTILE_THREADS, falling back to the default on bad values"""
        raw = os.getenv(cls.THREADS_ENV)
        if raw is None or raw.strip() == '':
            return cls.DEFAULT_THREADS
        try:
            threads = int(raw)
        except ValueError:
            logging.getLogger(__name__).warning(
                f"Ignoring non-integer {cls.THREADS_ENV}={raw!r}; using {cls.DEFAULT_THREADS}")
            return cls.DEFAULT_THREADS
        if threads < 1:
            logging.getLogger(__name__).warning(
                f"Ignoring non-positive {cls.THREADS_ENV}={raw!r}; using {cls.DEFAULT_THREADS}")
            return cls.DEFAULT_THREADS
        return threads

    @classmethod
    def get_log_directory(cls):
        """Directory for log files, or None when file logging is disabled"""
        return os.getenv(cls.LOGS_DIRECTORY_ENV) or None

    @classmethod
    def get_log_level(cls) -> str:
        return os.getenv('POLYTILE_LOG_LEVEL', cls.LOG_LEVEL).upper()

    @classmethod
    def get_cell_pixels(cls) -> int:
        """SVG_CELL_PIXELS override of the default cell size"""
        raw = os.getenv('SVG_CELL_PIXELS')
        if raw and raw.strip().isdigit() and int(raw) > 0:
            return int(raw)
        return cls.SVG_SETTINGS['cell_pixels']

    @classmethod
    def get_palette(cls) -> List[str]:
        return list(cls.SVG_SETTINGS['palette'])

    @classmethod
    def exit_code(cls, name: str) -> int:
        return cls.EXIT_CODES[name]


# Environment-specific configurations
class DevelopmentConfig(Config):
    """Development environment configuration"""
    DEBUG = True
    LOG_LEVEL = 'INFO'


class ProductionConfig(Config):
    """Production environment configuration"""
    DEBUG = False
    LOG_LEVEL = 'WARNING'


def load_config() -> Config:
    """Select configuration based on POLYTILE_ENV"""
    env = os.getenv('POLYTILE_ENV', 'development')
    if env == 'production':
        return ProductionConfig()
    return DevelopmentConfig()


config = load_config()


def describe_settings() -> Dict[str, object]:
    """Snapshot of the effective settings, used in debug logging"""
    return {
        'env': os.getenv('POLYTILE_ENV', 'development'),
        'threads': config.get_thread_count(),
        'log_level': config.get_log_level(),
        'log_dir': config.get_log_directory(),
        'state_version': config.STATE_VERSION,
    }
