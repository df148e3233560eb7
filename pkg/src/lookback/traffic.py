"""BS-side user queues and client playback buffers.

Traffic is fluid: queues hold bits, playback buffers hold seconds of media.
A session starts frozen with an empty buffer; time only counts towards the
session (and towards freezing) after playback has started once.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace


@dataclass(frozen=True)
class BsQueue:
    backlog: float = 0.0
    arrival_rate: float = 0.0
    mode: str = "cbr"  # or "full-buffer"


def enqueue_arrivals(queue: BsQueue, dt: float) -> BsQueue:
    if dt <= 0:
        raise ValueError("dt must be positive")
    if queue.mode == "full-buffer":
        return queue
    return replace(queue, backlog=queue.backlog + queue.arrival_rate * dt)


def serve(queue: BsQueue, offered: float) -> tuple[float, BsQueue]:
    if offered < 0:
        raise ValueError("offered must be non-negative")
    if queue.mode == "full-buffer":
        return offered, queue
    served = min(offered, queue.backlog)
    return served, replace(queue, backlog=queue.backlog - served)


@dataclass(frozen=True)
class PlaybackBuffer:
    stream_rate: float
    threshold: float = 5.0
    content: float = 0.0
    playing: bool = False
    started: bool = False


@dataclass(frozen=True)
class FreezeStats:
    frozen_time: float = 0.0
    session_time: float = 0.0
    consumed: float = 0.0  # seconds of media played out

    @property
    def freeze_fraction(self) -> float:
        return freeze_fraction(self)


def playback_step(
    buffer: PlaybackBuffer, delivered: float, dt: float, stats: FreezeStats
) -> tuple[PlaybackBuffer, FreezeStats]:
    """Advance the player by dt after `delivered` bits arrived."""
    if dt <= 0 or delivered < 0:
        raise ValueError("dt must be positive and delivered non-negative")
    content = buffer.content + delivered / buffer.stream_rate
    playing, started = buffer.playing, buffer.started
    frozen_time, session_time, consumed = stats.frozen_time, stats.session_time, stats.consumed
    if playing:
        consumed += min(dt, content)
        content -= dt
        if content <= 0.0:
            content = 0.0
            playing = False
    if not playing:
        if started:
            frozen_time += dt
        if content >= buffer.threshold:
            playing = True
            started = True
    if started:
        session_time += dt
    return (
        replace(buffer, content=content, playing=playing, started=started),
        FreezeStats(frozen_time, session_time, consumed),
    )


def freeze_fraction(stats: FreezeStats) -> float:
    if stats.session_time <= 0:
        return 0.0
    return stats.frozen_time / stats.session_time


def is_legal_transition(before: PlaybackBuffer, after: PlaybackBuffer) -> bool:
    """Only playing->frozen on empty buffer and frozen->playing at threshold."""
    if before.playing and not after.playing:
        return after.content == 0.0
    if not before.playing and after.playing:
        return after.content >= before.threshold and not math.isnan(after.content)
    return True
