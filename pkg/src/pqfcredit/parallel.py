"""Bounded worker pool; results come back in task order so schedules never change outputs."""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor

WORKERS_ENV = "PQFCREDIT_WORKERS"


def worker_count(requested: int | None = None) -> int:
    env = os.environ.get(WORKERS_ENV)
    if env:
        return max(1, int(env))
    if requested:
        return max(1, int(requested))
    return 1


def map_tasks(fn, tasks, workers: int | None = None) -> list:
    tasks = list(tasks)
    n = min(worker_count(workers), len(tasks)) if tasks else 1
    if n <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, tasks))
