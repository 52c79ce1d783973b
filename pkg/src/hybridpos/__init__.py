"""Hybrid positioning as a push/pull dataflow graph."""
from . import units
from .geometry import *  # noqa: F401,F403  (registers position codecs)
from .model import *  # noqa: F401,F403
from .serialization import deserialize, serialize

__version__ = "0.1.0"
