"""Background job execution with per-repository mutual exclusion.

A small thread pool runs jobs; one repository never has two jobs in flight,
enforced at submission time under a lock, so a second start while the first
runs is a conflict rather than a queue entry.
"""

from __future__ import annotations

import logging
import threading
from concurrent.futures import ThreadPoolExecutor
from typing import Callable

from ..errors import ConflictError

logger = logging.getLogger(__name__)


class JobRunner:
    def __init__(self, parallelism: int = 2):
        self._pool = ThreadPoolExecutor(
            max_workers=parallelism, thread_name_prefix="termrec-job"
        )
        self._lock = threading.Lock()
        self._active: dict[str, str] = {}

    def submit(self, repository_id: str, job_id: str, work: Callable[[], None]) -> None:
        """Run ``work`` in the background unless the repository is busy."""
        with self._lock:
            if repository_id in self._active:
                raise ConflictError(
                    f"repository {repository_id} already has job "
                    f"{self._active[repository_id]} in flight"
                )
            self._active[repository_id] = job_id

        def run():
            try:
                work()
            except Exception:
                logger.exception("job %s for repository %s crashed", job_id, repository_id)
            finally:
                with self._lock:
                    self._active.pop(repository_id, None)

        self._pool.submit(run)

    def busy(self, repository_id: str) -> bool:
        with self._lock:
            return repository_id in self._active

    def shutdown(self, wait: bool = True) -> None:
        self._pool.shutdown(wait=wait)
