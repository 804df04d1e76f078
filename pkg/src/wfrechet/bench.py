"""Median wall-clock timing over repeated runs."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
import statistics
import time
from typing import Any, Callable

import numpy as np


@dataclass
class BenchReport:
    task: str
    reps: int
    times: list
    median: float
    checksum: float
    parameters: dict = field(default_factory=dict)

    def to_dict(self):
        return dataclasses.asdict(self)


def checksum(result) -> float:
    """Reduce a result to one float so the timed computation cannot be skipped."""
    if result is None:
        return 0.0
    if isinstance(result, (int, float, np.number)):
        x = float(result)
        return x if np.isfinite(x) else 0.0
    if isinstance(result, np.ndarray):
        if result.dtype.kind not in "biuf":
            return float(result.size)
        v = result.astype(float)
        return float(v[np.isfinite(v)].sum())
    if dataclasses.is_dataclass(result):
        return sum(checksum(getattr(result, f.name)) for f in dataclasses.fields(result))
    if isinstance(result, dict):
        return sum(checksum(v) for v in result.values())
    if isinstance(result, (list, tuple)):
        return sum(checksum(v) for v in result)
    return 0.0


def measure(task: Callable[[], Any], reps: int = 15, name: str = "task", parameters=None) -> BenchReport:
    """One untimed warm-up call, then ``reps`` timed calls on a monotonic clock."""
    if int(reps) != reps or reps < 1:
        raise ValueError(f"reps must be a positive integer, got {reps}")
    task()
    times = []
    total = 0.0
    for _ in range(int(reps)):
        t0 = time.perf_counter()
        out = task()
        times.append(time.perf_counter() - t0)
        total += checksum(out)
    return BenchReport(name, int(reps), times, statistics.median(times), total, dict(parameters or {}))
