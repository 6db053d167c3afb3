"""Electric discrete-time quantum walks on the line."""

__version__ = "0.1.0"
