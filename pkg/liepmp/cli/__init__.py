from .config import RunConfig
from .main import run

__all__ = ["RunConfig", "run"]
