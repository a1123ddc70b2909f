"""
Maslov-index spectral stability engine for fourth-order NLS solitons.
"""
import logging
from logging.config import dictConfig
from typing import Optional

__version__ = '0.1.0'

LOG_FORMAT = '[%(asctime)s] %(levelname)s in %(module)s: %(message)s'


def configure_logging(level: Optional[str] = None) -> None:
    """Configure package logging.

    Args:
        level: Root log level; defaults to the active config's LOG_LEVEL.
    """
    from .config.config import get_config

    level = level or get_config().LOG_LEVEL

    dictConfig({
        'version': 1,
        'disable_existing_loggers': False,
        'formatters': {
            'default': {
                'format': LOG_FORMAT,
            }
        },
        'handlers': {
            'console': {
                'class': 'logging.StreamHandler',
                'stream': 'ext://sys.stdout',
                'formatter': 'default'
            },
        },
        'root': {
            'level': level,
            'handlers': ['console']
        }
    })
    logging.getLogger(__name__).debug(f"Logging configured at {level}")
