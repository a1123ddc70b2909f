"""
Environment file loading, keyed by MASLOV_ENV.
"""
import os
import logging
from typing import List, Optional

from dotenv import load_dotenv

logger = logging.getLogger(__name__)


def env_file_candidates(env: str) -> List[str]:
    """Env file names for one environment, highest priority first."""
    return [f".env.{env}.local", f".env.{env}", ".env.local", ".env"]


def load_environment(base_dir: str = '.', env: Optional[str] = None) -> List[str]:
    """
    Load the .env files of the active environment into os.environ.

    Files are read lowest priority first, so `.env.{env}.local` wins over
    `.env.{env}`, which wins over `.env.local` and `.env`.

    Args:
        base_dir: Directory searched for the env files.
        env: Environment name; defaults to MASLOV_ENV, then 'development'.

    Returns:
        The env files that were loaded, highest priority first.
    """
    env = env or os.environ.get('MASLOV_ENV', 'development')
    logger.info(f"Loading environment configuration for: {env}")

    loaded_files = []
    for env_file in reversed(env_file_candidates(env)):
        path = os.path.join(base_dir, env_file)
        if os.path.isfile(path):
            load_dotenv(path, override=True)
            loaded_files.insert(0, env_file)

    if loaded_files:
        logger.info(f"Loaded environment from: {', '.join(loaded_files)}")
    else:
        logger.debug("No environment files found; using the process environment")

    overrides = sorted(k for k in os.environ if k.startswith('MASLOV_'))
    logger.debug(f"MASLOV_* settings in effect: {overrides or 'none'}")
    return loaded_files
