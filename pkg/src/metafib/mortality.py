"""Length L(k) of H_k before it dies, for single k and for sweeps over k."""

from __future__ import annotations

import csv
import io
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from . import engine
from .engine import Status
from .families import Family, make_spec

CSV_HEADER = ("k", "L", "status", "max_term", "wall_ms")


@dataclass(frozen=True)
class MortalityRecord:
    k: int
    L: int | None  # -1 means the cap was reached; None for budget/overflow errors
    status: Status
    max_term: int
    wall_ms: float

    def row(self, timing: bool = True) -> list[str]:
        return [
            str(self.k),
            "" if self.L is None else str(self.L),
            self.status.value,
            str(self.max_term),
            f"{self.wall_ms:.0f}" if timing else "",
        ]


@dataclass(frozen=True)
class SweepConfig:
    k_min: int
    k_max: int
    cap: int = engine.DEFAULT_CAP
    budget: int = engine.DEFAULT_BUDGET
    workers: int = 1
    width: int = 32
    out: Path | None = None

    def __post_init__(self) -> None:
        if self.k_min > self.k_max:
            raise ValueError(f"empty k range {self.k_min}..{self.k_max}")
        if self.k_min < 3:
            raise ValueError("H_k is defined for k >= 3")
        if self.workers < 1:
            raise ValueError("need at least one worker")


def length_of(
    k: int, cap: int = engine.DEFAULT_CAP, budget: int = engine.DEFAULT_BUDGET, width: int = 32
) -> MortalityRecord:
    plan = engine.compile_plan(make_spec(Family("hk", (k,))))
    t0 = time.perf_counter()
    history, outcome = engine.run(plan, cap=cap, budget=budget, width=width, check_positive=True)
    wall = (time.perf_counter() - t0) * 1e3
    del history
    if outcome.status is Status.DIED:
        L = outcome.final_length
    elif outcome.status is Status.CAP_REACHED:
        L = -1
    else:
        L = None
    return MortalityRecord(k, L, outcome.status, outcome.max_term, wall)


def sweep(config: SweepConfig) -> list[MortalityRecord]:
    """One record per k in the range, ordered by k.

    Each k is a separate task handed to the next free worker, so one slow k
    does not hold up a fixed chunk of others.
    """
    ks = range(config.k_min, config.k_max + 1)

    def task(k: int) -> MortalityRecord:
        return length_of(k, cap=config.cap, budget=config.budget, width=config.width)

    if config.workers == 1:
        records = [task(k) for k in ks]
    else:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            records = list(pool.map(task, ks))
    records.sort(key=lambda r: r.k)
    if config.out is not None:
        write_csv(records, config.out)
    return records


def format_csv(records: list[MortalityRecord], timing: bool = True) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for r in records:
        writer.writerow(r.row(timing))
    return buf.getvalue()


def write_csv(records: list[MortalityRecord], path: Path | str, timing: bool = True) -> None:
    Path(path).write_text(format_csv(records, timing), newline="")


def read_csv(path: Path | str) -> list[MortalityRecord]:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return [
        MortalityRecord(
            k=int(r["k"]),
            L=int(r["L"]) if r["L"] else None,
            status=Status(r["status"]),
            max_term=int(r["max_term"]),
            wall_ms=float(r["wall_ms"]) if r["wall_ms"] else 0.0,
        )
        for r in rows
    ]
