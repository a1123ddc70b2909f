import os
from typing import Optional, Type


def _env_float(name: str, default: float) -> float:
    return float(os.environ.get(name, default))


def _env_int(name: str, default: int) -> int:
    return int(os.environ.get(name, default))


def _default_threads() -> int:
    """Worker cap from MASLOV_THREADS, defaulting to the CPU count."""
    value = os.environ.get('MASLOV_THREADS')
    if value:
        return max(1, int(value))
    return os.cpu_count() or 1


class Config:
    """Base configuration."""
    # Logging
    LOG_LEVEL = os.environ.get('LOG_LEVEL', 'INFO')

    # Integration
    RTOL = _env_float('MASLOV_RTOL', 1e-10)
    ATOL = _env_float('MASLOV_ATOL', 1e-12)
    RENORM_THRESHOLD = _env_float('MASLOV_RENORM_THRESHOLD', 1e6)
    DECAY_TOL = _env_float('MASLOV_DECAY_TOL', 1e-12)
    RESIDUAL_TOL = _env_float('MASLOV_RESIDUAL_TOL', 1e-8)
    DRIFT_TOL = 1e-8

    # Maslov box
    ELL = None  # None selects 6 for the KH profile, support + 2 otherwise
    ELL_MARGIN = 2.0
    EPSILON = _env_float('MASLOV_EPSILON', 1e-3)
    LAMBDA_INF = None
    LAMBDA_INF_MARGIN = 1.0
    LAMBDA_POINTS = _env_int('MASLOV_LAMBDA_POINTS', 64)
    X_SCAN_STEP = 0.05
    MAX_ESCALATIONS = 3

    # Crossings and forms
    ROOT_XTOL = 1e-10
    TOUCH_TOL = 1e-7
    INTERSECTION_TOL = 1e-6
    FORM_TOL = 1e-8
    MAX_FORM_ORDER = 9

    # Inhomogeneous solves
    # roundoff in the solver residual grows like h⁻⁴
    SOLVER_H = _env_float('MASLOV_SOLVER_H', 0.04)
    SOLVER_PAD = 10.0
    SOLVER_TOL = 1e-8
    FREDHOLM_TOL = 1e-8
    ZERO_TOL = 1e-10

    # Eigenvalue curves
    CURVE_LAMBDA_OFFSET = 0.06
    CURVE_LAMBDA_MAX = 1.5
    CURVE_LAMBDA_POINTS = 81
    CURVE_MAX_JUMP = 1.0
    CURVE_ROW_TOL = 1e-8

    # Parallelism
    THREADS = _default_threads()


class DevelopmentConfig(Config):
    """Development configuration."""
    DEBUG = True


class TestingConfig(Config):
    """Testing configuration."""
    TESTING = True
    DEBUG = True
    # Coarser sweeps keep the suite fast; crossings are still refined to ROOT_XTOL
    LAMBDA_POINTS = _env_int('MASLOV_LAMBDA_POINTS', 32)
    CURVE_LAMBDA_POINTS = 33


class ProductionConfig(Config):
    """Production configuration."""
    DEBUG = False
    TESTING = False
    LOG_LEVEL = os.environ.get('LOG_LEVEL', 'WARNING')


# Configuration dictionary
config_by_name = {
    'development': DevelopmentConfig,
    'testing': TestingConfig,
    'production': ProductionConfig,
    'default': DevelopmentConfig
}


# Get configuration based on environment
def get_config(env: Optional[str] = None) -> Type[Config]:
    env = env or os.environ.get('MASLOV_ENV', 'default')
    return config_by_name.get(env, config_by_name['default'])
