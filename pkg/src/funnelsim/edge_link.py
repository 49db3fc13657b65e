"""Simulated robot-edge channel with a round-trip staleness filter.

Messages traverse an uplink delay d1, an edge processing time, and a
downlink delay d2, with datagram semantics: independent per-message
delays (so replies can arrive out of order) and independent loss.  The
robot applies a staleness filter on the measured round-trip time and
keeps only replies with d1 + d2 <= tau_max (inclusive); everything else
is ignored so stale localization never reaches the controller.  Between
accepted updates the consumer holds the last accepted estimate.
"""

from __future__ import annotations

import enum
import heapq
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Optional

import numpy as np


@dataclass(frozen=True)
class DelayModel:
    """One-way delay distribution.

    kind 'constant': always ``value``; 'uniform': U[low, high);
    'exponential': offset + Exp(mean).  All parameters in seconds.
    """

    kind: str
    value: float = 0.0
    low: float = 0.0
    high: float = 0.0
    mean: float = 0.0
    offset: float = 0.0

    def __post_init__(self):
        if self.kind == "constant":
            if self.value < 0.0:
                raise ValueError("constant delay must be >= 0")
        elif self.kind == "uniform":
            if not 0.0 <= self.low <= self.high:
                raise ValueError("need 0 <= low <= high")
        elif self.kind == "exponential":
            if self.mean <= 0.0 or self.offset < 0.0:
                raise ValueError("need mean > 0 and offset >= 0")
        else:
            raise ValueError(f"unknown delay model kind {self.kind!r}")

    @classmethod
    def constant(cls, value: float) -> DelayModel:
        return cls("constant", value=value)

    @classmethod
    def uniform(cls, low: float, high: float) -> DelayModel:
        return cls("uniform", low=low, high=high)

    @classmethod
    def exponential(cls, mean: float, offset: float = 0.0) -> DelayModel:
        return cls("exponential", mean=mean, offset=offset)

    def sample(self, rng: np.random.Generator) -> float:
        if self.kind == "constant":
            return self.value
        if self.kind == "uniform":
            return float(rng.uniform(self.low, self.high))
        return self.offset + float(rng.exponential(self.mean))


@dataclass(frozen=True)
class LinkDelays:
    """Uplink/downlink delay models, per-message loss probability, and
    the RNG seed that makes the channel reproducible."""

    d1_model: DelayModel
    d2_model: DelayModel
    loss_prob: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.loss_prob <= 1.0:
            raise ValueError("loss_prob must be in [0, 1]")


@dataclass(frozen=True)
class StampedMessage:
    """A perception payload with its transport timestamps."""

    payload: object
    sent_at: float
    received_at: float
    d1: float
    d2: float

    def __post_init__(self):
        if self.d1 < 0.0 or self.d2 < 0.0:
            raise ValueError("delays must be >= 0")
        if self.received_at < self.sent_at:
            raise ValueError("received_at must be >= sent_at")


class Outcome(str, enum.Enum):
    ACCEPTED = "accepted"
    IGNORED_STALE = "ignored_stale"
    LOST = "lost"


@dataclass(frozen=True)
class DeliveryRecord:
    """Per-message channel outcome.  received_at is None for lost
    messages (they never arrive); for delivered ones it is
    sent_at + d1 + processing + d2."""

    payload: object
    sent_at: float
    d1: float
    d2: float
    processing: float
    received_at: Optional[float]
    outcome: Outcome


def sample_delays(model: LinkDelays, rng: np.random.Generator) -> tuple:
    """Draw one (d1, d2) pair; deterministic for a given generator state."""
    return (model.d1_model.sample(rng), model.d2_model.sample(rng))


def rtt_filter(msg: StampedMessage, tau_max: float) -> bool:
    """Accept iff d1 + d2 <= tau_max (boundary inclusive)."""
    return msg.d1 + msg.d2 <= tau_max


class EdgeChannel:
    """Event-driven channel: feed sends with :meth:`send`, collect
    completed round trips with :meth:`poll` as the simulation clock
    advances.  Deliveries come out ordered by arrival time."""

    def __init__(self, model: LinkDelays, tau_max: float,
                 processing_time_fn: Optional[Callable] = None):
        if tau_max < 0.0:
            raise ValueError("tau_max must be >= 0")
        self._model = model
        self._tau_max = tau_max
        self._processing = processing_time_fn or (lambda payload: 0.0)
        self._rng = np.random.Generator(np.random.PCG64(model.seed))
        self._heap: list = []
        self._seq = 0

    def send(self, sent_at: float, payload: object) -> None:
        d1, d2 = sample_delays(self._model, self._rng)
        lost = (self._model.loss_prob > 0.0
                and self._rng.random() < self._model.loss_prob)
        processing = float(self._processing(payload))
        if lost:
            record = DeliveryRecord(payload, sent_at, d1, d2, processing,
                                    None, Outcome.LOST)
            # surfaces in the log at its would-be arrival time
            arrival = sent_at + d1 + processing + d2
        else:
            arrival = sent_at + d1 + processing + d2
            outcome = (Outcome.ACCEPTED if d1 + d2 <= self._tau_max
                       else Outcome.IGNORED_STALE)
            record = DeliveryRecord(payload, sent_at, d1, d2, processing,
                                    arrival, outcome)
        heapq.heappush(self._heap, (arrival, self._seq, record))
        self._seq += 1

    def poll(self, now: float) -> list:
        """All records whose (would-be) arrival time is <= now, in arrival
        order."""
        out = []
        while self._heap and self._heap[0][0] <= now:
            out.append(heapq.heappop(self._heap)[2])
        return out


def channel_run(send_schedule: Iterable, model: LinkDelays, tau_max: float,
                processing_time_fn: Optional[Callable] = None) -> list:
    """Batch transport simulation.

    send_schedule is an iterable of (sent_at, payload) pairs with
    monotone send times.  Returns the full delivery log ordered by
    arrival time (which may differ from send order: datagram semantics).
    """
    channel = EdgeChannel(model, tau_max, processing_time_fn)
    last = -math.inf
    for sent_at, payload in send_schedule:
        if sent_at < last:
            raise ValueError("send schedule must be monotone")
        last = sent_at
        channel.send(sent_at, payload)
    return channel.poll(math.inf)


def latest_valid_estimate(log: Iterable, now: float):
    """The accepted record with the greatest sent_at among those already
    received (received_at <= now); None when nothing qualifies.  Ignored
    and lost messages never influence the result."""
    best = None
    for record in log:
        if record.outcome is not Outcome.ACCEPTED:
            continue
        if record.received_at is None or record.received_at > now:
            continue
        if best is None or record.sent_at > best.sent_at:
            best = record
    return best


def export_delivery_log(log: Iterable) -> list:
    """Structured per-message records (one dict per message)."""
    return [
        {
            "sent_at": r.sent_at,
            "d1": r.d1,
            "d2": r.d2,
            "processing": r.processing,
            "received_at": r.received_at,
            "outcome": r.outcome.value,
        }
        for r in log
    ]
