import logging
import os
from dotenv import load_dotenv

from ewalk.errors import ConfigurationError

# Load environment variables from .env file
load_dotenv()


def _positive_int(name: str, default: int, minimum: int = 1) -> int:
    raw = os.getenv(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        value = int(raw)
    except ValueError as exc:
        raise ConfigurationError(f"{name} must be an integer, got {raw!r}") from exc
    if value < minimum:
        raise ConfigurationError(f"{name} must be >= {minimum}, got {value}")
    return value


class Settings:
    """
    Runtime settings read from the environment.

    Attributes:
        threads: Trajectory workers for figure1_dataset (EWALK_THREADS); theta sweeps stay vectorized
        theta_grid: Coarse momentum grid size for sup-over-theta searches
        refine_candidates: Grid maxima that get a bounded refinement
        refine_rounds: Refinement rounds around each candidate
        output_folder: Base folder for relative output paths
        log_level: Logging level name
    """

    def __init__(self):
        """Initialize settings; an invalid environment falls back to defaults until reload()."""
        self.threads, self.theta_grid = 1, 4096
        self.refine_candidates, self.refine_rounds = 8, 3
        self.output_folder, self.log_level = ".", "INFO"
        try:
            self.reload()
        except ConfigurationError as exc:
            logging.getLogger(__name__).warning(f"using default settings: {exc}")

    def reload(self):
        """Re-read every setting from os.environ."""
        self.threads = _positive_int("EWALK_THREADS", 1)
        self.theta_grid = _positive_int("EWALK_THETA_GRID", 4096, minimum=64)
        self.refine_candidates = _positive_int("EWALK_REFINE_CANDIDATES", 8)
        self.refine_rounds = _positive_int("EWALK_REFINE_ROUNDS", 3)
        self.output_folder = os.getenv("EWALK_OUTPUT_DIR", ".")
        log_level = os.getenv("EWALK_LOG_LEVEL", "INFO").upper()
        if not isinstance(logging.getLevelName(log_level), int):
            raise ConfigurationError(f"EWALK_LOG_LEVEL is not a logging level: {log_level!r}")
        self.log_level = log_level
        return self


settings = Settings()
