"""
Commands catmod
"""

from . import modularity, sweep, tasks
from .modularity import cmd_modularity, cmd_communities
from .tasks import cmd_task
from .sweep import cmd_sweep, cmd_correlate, cmd_leaderboard


def register_all(subparsers):
    """Attach every subcommand parser"""
    for module in (modularity, tasks, sweep):
        module.register(subparsers)


__all__ = [
    'register_all',
    'cmd_modularity',
    'cmd_communities',
    'cmd_task',
    'cmd_sweep',
    'cmd_correlate',
    'cmd_leaderboard',
]
