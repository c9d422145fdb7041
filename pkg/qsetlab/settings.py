import os
from dataclasses import dataclass, fields

DEFAULT_EPSILON = 1e-9


def _normalize_epsilon(raw: str | None) -> float:
    """
    Accepts only finite positive floats; anything else falls back to 1e-9.
    """
    if not raw:
        return DEFAULT_EPSILON
    try:
        value = float(raw.strip())
    except ValueError:
        return DEFAULT_EPSILON
    if not value > 0 or value == float("inf"):
        return DEFAULT_EPSILON
    return value


def _normalize_int(raw: str | None, default: int, minimum: int | None = None) -> int:
    if not raw:
        return default
    try:
        value = int(raw.strip())
    except ValueError:
        return default
    if minimum is not None and value < minimum:
        return minimum
    return value


@dataclass
class Settings:
    epsilon: float = DEFAULT_EPSILON
    workers: int = 1
    seed: int = 0
    log_level: str = "WARNING"


def load_settings() -> Settings:
    return Settings(
        epsilon=_normalize_epsilon(os.environ.get("QSETLAB_EPSILON")),
        workers=_normalize_int(os.environ.get("QSETLAB_WORKERS"), 1, minimum=1),
        seed=_normalize_int(os.environ.get("QSETLAB_SEED"), 0, minimum=0),
        log_level=(os.environ.get("QSETLAB_LOG_LEVEL") or "WARNING").strip().upper(),
    )


settings = load_settings()


def reload_settings() -> Settings:
    """Refresh the shared ``settings`` object in place (after load_dotenv)."""
    fresh = load_settings()
    for item in fields(Settings):
        setattr(settings, item.name, getattr(fresh, item.name))
    return settings
