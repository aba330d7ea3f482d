"""
Configuration package
"""
from .settings import config, Config, setup_logging, load_config_file, parse_float_list

__all__ = ["config", "Config", "setup_logging", "load_config_file", "parse_float_list"]
