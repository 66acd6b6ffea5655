from .config import RunConfig, config_from_dict, parse_config
from .experiments import run

__all__ = ["RunConfig", "config_from_dict", "parse_config", "run"]
