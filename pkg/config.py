import os
import logging
from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()

logger = logging.getLogger("TemplateMiner")


def _int_env(name: str, default: int) -> int:
    try:
        return int(os.getenv(name, default))
    except ValueError:
        return default


def _float_env(name: str, default: float) -> float:
    try:
        return float(os.getenv(name, default))
    except ValueError:
        return default


class Config:
    # --- Completion backend ---
    ENDPOINT = os.getenv("LLMTD_ENDPOINT", "http://localhost:11434")
    API_PATH = os.getenv("LLMTD_API_PATH", "/api/generate")
    MODEL = os.getenv("LLMTD_MODEL", "openchat")
    TIMEOUT = _float_env("LLMTD_TIMEOUT", 300.0)  # seconds

    # --- Mining ---
    BATCH_SIZE = _int_env("LLMTD_BATCH_SIZE", 10)
    MAX_WORKERS = _int_env("LLMTD_JOBS", 1)  # partitions mined in parallel
    OVERGENERAL_RATIO = _float_env("LLMTD_OVERGENERAL_RATIO", 0.9)
    SWEEP_BATCH_SIZES = (2, 5, 10, 20)

    # --- Prompt / extraction ---
    PROMPT_FILE = os.getenv("LLMTD_PROMPT_FILE")
    # Overrides the extractor's list-marker regex when set
    LIST_MARKER_PATTERN = os.getenv("LLMTD_LIST_MARKER_PATTERN")

    # --- Paths ---
    BASE_DIR = os.path.dirname(os.path.abspath(__file__))
    OUTPUT_DIR = os.getenv("LLMTD_OUTPUT_DIR", os.path.join(os.getcwd(), "output"))

    LOG_LEVEL = os.getenv("LLMTD_LOG_LEVEL", "INFO")

    # Validate critical config
    @classmethod
    def validate(cls):
        if cls.BATCH_SIZE < 1:
            logger.warning(f"LLMTD_BATCH_SIZE={cls.BATCH_SIZE} is not positive, using 10.")
            cls.BATCH_SIZE = 10
        if cls.MAX_WORKERS < 1:
            logger.warning(f"LLMTD_JOBS={cls.MAX_WORKERS} is not positive, using 1.")
            cls.MAX_WORKERS = 1
        if not 0 < cls.OVERGENERAL_RATIO <= 1:
            logger.warning(f"LLMTD_OVERGENERAL_RATIO={cls.OVERGENERAL_RATIO} outside (0, 1], using 0.9.")
            cls.OVERGENERAL_RATIO = 0.9
        if cls.TIMEOUT <= 0:
            logger.warning(f"LLMTD_TIMEOUT={cls.TIMEOUT} is not positive, using 300.")
            cls.TIMEOUT = 300.0
