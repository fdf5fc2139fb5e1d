"""HTTP service: accounts, repositories, jobs, and the recommendation API."""

from .app import create_app
from .core import ServiceCore
from .store import Store

__all__ = ["create_app", "ServiceCore", "Store"]
