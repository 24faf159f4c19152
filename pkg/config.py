"""
Configuration file for the Graph Union Lab toolkit
Runtime knobs come from environment variables (or a local .env file)
"""

import logging
import os
from typing import Dict

from dotenv import load_dotenv

# Load environment variables from .env file (local development)
load_dotenv()

logger = logging.getLogger("CONFIG")


def get_setting(key: str, default: str = '') -> str:
    """Get a setting from the environment (populated from .env when present)"""
    value = os.getenv(key)
    if value is None or value.strip() == '':
        return default
    return value.strip()


def _get_int(key: str, default: int) -> int:
    try:
        return int(get_setting(key, str(default)))
    except (ValueError, TypeError):
        logger.warning("Invalid %s, using default %d", key, default)
        return default


# ============================================================================
# SIMULATION CONFIGURATION
# ============================================================================

SIMULATION_CONFIG = {
    'default_master_seed': _get_int('GRAPH_UNION_LAB_SEED', 20260121),
    'progress': get_setting('GRAPH_UNION_LAB_PROGRESS', 'false').lower() == 'true',
    'threads_env': 'GRAPH_UNION_LAB_THREADS',
}

# ============================================================================
# ORACLE CONFIGURATION
# ============================================================================

ORACLE_CONFIG = {
    'enumeration_budget': _get_int('GRAPH_UNION_LAB_ENUM_BUDGET', 1_000_000),
    'brute_force_max_n': 16,
}

# ============================================================================
# STATISTICS CONFIGURATION
# ============================================================================

STATS_CONFIG = {
    # communities with more non-isolated vertices make pair counting quadratic
    'pair_count_warn_size': 2000,
}

# ============================================================================
# OUTPUT CONFIGURATION
# ============================================================================

OUTPUT_CONFIG = {
    'significant_digits': 9,
    'confidence': 0.95,
}

# ============================================================================
# LOGGING CONFIGURATION
# ============================================================================

LOGGING_CONFIG = {
    'level': get_setting('GRAPH_UNION_LAB_LOG_LEVEL', 'INFO').upper(),
    'format': '[%(name)s] %(message)s',
}


def configure_logging(level: str = None) -> None:
    """Install the tagged console handler used by every module"""
    logging.basicConfig(
        level=(level or LOGGING_CONFIG['level']),
        format=LOGGING_CONFIG['format'],
        force=True,
    )


# ============================================================================
# HELPER FUNCTIONS
# ============================================================================

def get_worker_count() -> int:
    """Worker count for trial fan-out; read on every call so tests can patch it"""
    raw = get_setting(SIMULATION_CONFIG['threads_env'], '')
    if raw == '':
        return os.cpu_count() or 1
    try:
        workers = int(raw)
    except ValueError:
        logger.warning("Invalid %s=%r, using 1 worker", SIMULATION_CONFIG['threads_env'], raw)
        return 1
    if workers < 1:
        logger.warning("%s must be >= 1, using 1 worker", SIMULATION_CONFIG['threads_env'])
        return 1
    return workers


def get_config_summary() -> Dict:
    """Get configuration summary for debugging"""
    return {
        'workers': get_worker_count(),
        'default_master_seed': SIMULATION_CONFIG['default_master_seed'],
        'progress': SIMULATION_CONFIG['progress'],
        'enumeration_budget': ORACLE_CONFIG['enumeration_budget'],
        'brute_force_max_n': ORACLE_CONFIG['brute_force_max_n'],
        'log_level': LOGGING_CONFIG['level'],
    }


def validate_config() -> tuple[bool, list]:
    """Validate that all settings are usable"""
    errors = []

    raw_threads = get_setting(SIMULATION_CONFIG['threads_env'], '')
    if raw_threads and (not raw_threads.isdigit() or int(raw_threads) < 1):
        errors.append(f"{SIMULATION_CONFIG['threads_env']} must be a positive integer")

    if ORACLE_CONFIG['enumeration_budget'] < 1:
        errors.append('GRAPH_UNION_LAB_ENUM_BUDGET must be positive')

    if SIMULATION_CONFIG['default_master_seed'] < 0:
        errors.append('GRAPH_UNION_LAB_SEED must be nonnegative')

    if LOGGING_CONFIG['level'] not in ('DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL'):
        errors.append(f"GRAPH_UNION_LAB_LOG_LEVEL {LOGGING_CONFIG['level']!r} is not a logging level")

    return len(errors) == 0, errors
