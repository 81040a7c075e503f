"""One-shot Python runner speaking the utscale runner protocol."""

from .runner import command, deep_equal, evaluate, serve_once

__version__ = "0.1.0"
__all__ = ["command", "deep_equal", "evaluate", "serve_once"]
