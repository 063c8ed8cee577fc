"""Client SDK for the dualhab JSON-over-TCP step protocol."""

from .client import Client, ProtocolError, ServerError, connect
from .loop import EpisodeRecord, run_agent
from .policies import GreedyPolicy, RandomPolicy, make_policy

__all__ = [
    "Client", "ProtocolError", "ServerError", "connect",
    "EpisodeRecord", "run_agent",
    "GreedyPolicy", "RandomPolicy", "make_policy",
]
__version__ = "0.1.0"
