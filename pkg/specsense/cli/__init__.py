"""Command-line surface for specsense."""

from specsense.cli.commands import CommandHandler, CommandResult, UsageError, emit

__all__ = ["CommandHandler", "CommandResult", "UsageError", "emit"]
