# Command-line modules
from .parser import RunConfig, build_parser, parse_args
from .runner import main, run

__all__ = [
    'RunConfig',
    'build_parser',
    'parse_args',
    'main',
    'run'
]
