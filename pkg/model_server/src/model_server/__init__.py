"""Model server package."""

from .app import create_app
from .config import ServerConfig

__all__ = ["create_app", "ServerConfig"]
