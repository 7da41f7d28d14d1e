"""Partitioned, asynchronous visitor engine.

Each partition owns the vertices ``v`` with ``v % P == p`` and a message queue.
A handler processes one visitor at a time for a vertex its partition owns and
may emit further visitors through ``send``; a phase ends at quiescence, when
every message sent has been processed.

Two schedulers are available:

* single-lane (default): partitions are drained round-robin, one visitor per
  partition per turn, in a single thread. Fully deterministic.
* threaded: one worker thread per partition; cross-partition sends go through
  a shared condition-guarded channel. Interleaving is up to the OS.

Queue disciplines are FIFO (arrival order) and MIN_PRIORITY (smallest
``priority_key`` first, arrival order among equal keys).
"""

from __future__ import annotations

import heapq
import threading
import time
from collections import deque
from contextlib import contextmanager
from dataclasses import dataclass, field
from enum import Enum
from itertools import count
from typing import Any, Callable, Iterable, NamedTuple

from .errors import EngineError, MessageBudgetExceeded
from .graph import Graph, PartitionMap


class Discipline(str, Enum):
    FIFO = "fifo"
    MIN_PRIORITY = "priority"


class Visitor(NamedTuple):
    target: int
    sender: int
    payload: Any = None
    priority_key: int = 0


Send = Callable[..., None]
#: handler(target, sender, payload, send); send(target, sender, payload, key)
Handler = Callable[[int, int, Any, Send], None]


@dataclass
class PhaseStats:
    messages_sent: int = 0
    messages_processed: int = 0
    wall_time: float = 0.0  # seconds


@dataclass
class EngineMetrics:
    """Per-phase message and timing counters."""

    phases: dict[str, PhaseStats] = field(default_factory=dict)
    dequeue_count: int = 0
    diagnostics: dict[str, int] = field(default_factory=dict)

    def phase(self, label: str) -> PhaseStats:
        stats = self.phases.get(label)
        if stats is None:
            stats = self.phases[label] = PhaseStats()
        return stats

    @contextmanager
    def timed(self, label: str):
        stats = self.phase(label)
        t0 = time.perf_counter()
        try:
            yield stats
        finally:
            stats.wall_time += time.perf_counter() - t0

    def to_record(self) -> dict[str, dict[str, float]]:
        return {
            name: {
                "messages_sent": s.messages_sent,
                "messages_processed": s.messages_processed,
                "wall_time_ms": round(s.wall_time * 1000.0, 3),
            }
            for name, s in self.phases.items()
        }

    @classmethod
    def from_record(cls, record: dict) -> "EngineMetrics":
        m = cls()
        for name, r in record.items():
            m.phases[name] = PhaseStats(
                int(r["messages_sent"]), int(r["messages_processed"]), r["wall_time_ms"] / 1000.0
            )
        return m


@dataclass(frozen=True)
class EngineConfig:
    partitions: int = 1
    discipline: Discipline = Discipline.MIN_PRIORITY
    threaded: bool = False
    budget_factor: int = 64

    def partition_map(self) -> PartitionMap:
        return PartitionMap(self.partitions)


def broadcast_init(
    vertices: Iterable[int], predicate: Callable[[int], bool], payload: Callable[[int], Any] = lambda v: None
) -> list[Visitor]:
    """One self-addressed visitor for each vertex satisfying ``predicate``."""
    return [Visitor(v, v, payload(v), 0) for v in vertices if predicate(v)]


def default_budget(graph: Graph, factor: int = 64) -> int:
    # floor keeps tiny graphs (a handful of arcs) from tripping the guard
    return factor * max(graph.edge_count, 16)


def run_to_quiescence(
    graph: Graph,
    partitions: PartitionMap,
    discipline: Discipline,
    initial_visitors: Iterable[Visitor],
    handler: Handler,
    metrics: EngineMetrics,
    phase: str = "default",
    threaded: bool = False,
    budget: int | None = None,
) -> None:
    """Deliver ``initial_visitors`` and everything they spawn until quiescence."""
    if budget is None:
        budget = default_budget(graph)
    runner = _run_threaded if threaded else _run_single_lane
    with metrics.timed(phase) as stats:
        sent, processed = runner(
            graph.vertex_count, partitions.partition_count, discipline,
            list(initial_visitors), handler, budget, phase,
        )
        stats.messages_sent += sent
        stats.messages_processed += processed
        metrics.dequeue_count += processed
    if sent != processed:
        raise EngineError(f"{phase}: returned with {sent - processed} message(s) outstanding")


def _run_single_lane(n, P, discipline, initial, handler, budget, phase):
    heap_mode = discipline == Discipline.MIN_PRIORITY
    seq = count()
    sent = 0
    queues: list = [[] if heap_mode else deque() for _ in range(P)]
    heappush, heappop = heapq.heappush, heapq.heappop

    if P == 1 and heap_mode:
        q0 = queues[0]

        def send(target, sender, payload=None, key=0):
            nonlocal sent
            if not 0 <= target < n:
                raise EngineError(f"{phase}: visitor addressed to vertex {target} outside 0..{n - 1}")
            sent += 1
            heappush(q0, (key, next(seq), target, sender, payload))
    elif P == 1:
        append0 = queues[0].append

        def send(target, sender, payload=None, key=0):
            nonlocal sent
            if not 0 <= target < n:
                raise EngineError(f"{phase}: visitor addressed to vertex {target} outside 0..{n - 1}")
            sent += 1
            append0((key, 0, target, sender, payload))
    else:
        def send(target, sender, payload=None, key=0):
            nonlocal sent
            if not 0 <= target < n:
                raise EngineError(f"{phase}: visitor addressed to vertex {target} outside 0..{n - 1}")
            sent += 1
            q = queues[target % P]
            if heap_mode:
                heappush(q, (key, next(seq), target, sender, payload))
            else:
                q.append((key, 0, target, sender, payload))

    for vis in initial:
        send(vis.target, vis.sender, vis.payload, vis.priority_key)

    processed = 0
    if P == 1:
        q = queues[0]
        if heap_mode:
            while q:
                _, _, target, sender, payload = heappop(q)
                processed += 1
                if processed > budget:
                    raise MessageBudgetExceeded(f"{phase}: more than {budget} messages processed")
                handler(target, sender, payload, send)
        else:
            pop = q.popleft
            while q:
                _, _, target, sender, payload = pop()
                processed += 1
                if processed > budget:
                    raise MessageBudgetExceeded(f"{phase}: more than {budget} messages processed")
                handler(target, sender, payload, send)
        return sent, processed

    while processed < sent:
        for q in queues:
            if not q:
                continue
            _, _, target, sender, payload = heappop(q) if heap_mode else q.popleft()
            processed += 1
            if processed > budget:
                raise MessageBudgetExceeded(f"{phase}: more than {budget} messages processed")
            handler(target, sender, payload, send)
    return sent, processed


def _run_threaded(n, P, discipline, initial, handler, budget, phase):
    heap_mode = discipline == Discipline.MIN_PRIORITY
    seq = count()
    queues: list = [[] if heap_mode else deque() for _ in range(P)]
    cond = threading.Condition()
    state = {"sent": 0, "processed": 0, "outstanding": 0, "error": None}

    def enqueue(target, sender, payload, key):
        q = queues[target % P]
        if heap_mode:
            heapq.heappush(q, (key, next(seq), target, sender, payload))
        else:
            q.append((key, 0, target, sender, payload))

    def send(target, sender, payload=None, key=0):
        if not 0 <= target < n:
            raise EngineError(f"{phase}: visitor addressed to vertex {target} outside 0..{n - 1}")
        with cond:
            enqueue(target, sender, payload, key)
            state["sent"] += 1
            state["outstanding"] += 1
            cond.notify_all()

    for vis in initial:
        if not 0 <= vis.target < n:
            raise EngineError(f"{phase}: visitor addressed to vertex {vis.target} outside 0..{n - 1}")
        enqueue(vis.target, vis.sender, vis.payload, vis.priority_key)
        state["sent"] += 1
        state["outstanding"] += 1

    def worker(p):
        q = queues[p]
        while True:
            with cond:
                while not q and state["outstanding"] > 0 and state["error"] is None:
                    cond.wait()
                if state["outstanding"] == 0 or state["error"] is not None:
                    return
                item = heapq.heappop(q) if heap_mode else q.popleft()
                state["processed"] += 1
                if state["processed"] > budget:
                    state["error"] = MessageBudgetExceeded(
                        f"{phase}: more than {budget} messages processed")
                    cond.notify_all()
                    return
            try:
                handler(item[2], item[3], item[4], send)
            except Exception as exc:  # surfaced in the calling thread
                with cond:
                    state["error"] = exc
                    cond.notify_all()
                return
            with cond:
                state["outstanding"] -= 1
                if state["outstanding"] == 0:
                    cond.notify_all()

    threads = [threading.Thread(target=worker, args=(p,), daemon=True) for p in range(P)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    err = state["error"]
    if err is not None:
        if isinstance(err, EngineError):
            raise err
        raise EngineError(f"{phase}: handler failed: {err!r}") from err
    return state["sent"], state["processed"]


def all_reduce_min(tables: Iterable[dict], key=None) -> dict:
    """Element-wise minimum over keyed tables.

    ``key`` maps a value to its sort key (identity by default) and must induce
    a total order, otherwise the winner among equal keys depends on table
    order. The returned dict is the one every partition would observe.
    """
    result: dict = {}
    for table in tables:
        for k, val in table.items():
            cur = result.get(k)
            if cur is None or (key(val) < key(cur) if key else val < cur):
                result[k] = val
    return result
