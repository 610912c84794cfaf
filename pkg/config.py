import os
from dotenv import load_dotenv

load_dotenv()


def _env_int(name: str, default: int | None) -> int | None:
    value = os.getenv(name)
    return int(value) if value not in (None, "") else default


class Settings:
    """Base configuration for the nvregsim command-line tool"""
    APP_ENV: str = "development"
    DEBUG: bool = False
    APP_TITLE: str = os.getenv('APP_TITLE', 'nvregsim')
    APP_VERSION: str = os.getenv('APP_VERSION', '1.0.0')
    DATABASE_URL: str = os.getenv('DATABASE_URL', 'sqlite:///./nvregsim.db')
    SQLALCHEMY_ECHO: bool = False
    LOG_LEVEL: str = os.getenv('LOG_LEVEL', 'INFO')
    LOG_DIR: str | None = os.getenv('LOG_DIR')
    OUTPUT_DIR: str = os.getenv('NVREGSIM_OUTPUT_DIR', 'results')
    # worker override; None lets each command decide
    THREADS: int | None = _env_int('NVREGSIM_THREADS', None)
    # Riemann samples per ns for single-gate studies and for RB/ablation sweeps
    STEP_DENSITY: float = float(os.getenv('NVREGSIM_STEP_DENSITY', '20'))
    DESK_STEP_DENSITY: float = float(os.getenv('NVREGSIM_DESK_STEP_DENSITY', '2'))


class DevelopmentConfig(Settings):
    """Development configuration"""
    DEBUG: bool = True
    APP_ENV: str = "development"


class ProductionConfig(Settings):
    """Production configuration"""
    DEBUG: bool = False
    APP_ENV: str = "production"
    LOG_LEVEL: str = os.getenv('LOG_LEVEL', 'WARNING')


class TestingConfig(Settings):
    """Testing configuration"""
    DEBUG: bool = True
    APP_ENV: str = "testing"
    DATABASE_URL: str = 'sqlite://'


config = {
    'development': DevelopmentConfig,
    'production': ProductionConfig,
    'testing': TestingConfig,
    'default': DevelopmentConfig,
}


def get_config(config_name: str = 'development') -> Settings:
    """Get configuration instance for the given name.

    Unknown names fall back to the development settings.
    """
    cfg_class = config.get(config_name, config['default'])
    return cfg_class()
