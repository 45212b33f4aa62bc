"""Connection-state machine, dedicated-preamble registry, and the
pre-data timelines of the three connection procedures.

Two extra states beyond the classic Idle/Connected pair let a user keep
its stored configuration (Inactive) or additionally hold pre-allocated
grant-free subchannels (InactiveConnected), so a packet can be sent with
little or no handshaking.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Optional, Tuple


class RrcStateKind(Enum):
    IDLE = "Idle"
    CONNECTED = "Connected"
    INACTIVE = "Inactive"
    INACTIVE_CONNECTED = "InactiveConnected"


class RrcEvent(Enum):
    SETUP_4WAY = "Setup4Way"
    SUSPEND_TO_INACTIVE = "SuspendToInactive"
    RESUME_FGMA = "ResumeFGMA"
    PROMOTE_INACTIVE_CONNECTED = "PromoteInactiveConnected"
    PACKET_ARRIVAL_GFMA = "PacketArrivalGFMA"
    RELEASE = "Release"


class Protocol(Enum):
    FOUR_WAY = "FourWay"
    FGMA = "FGMA"
    GFMA = "GFMA"


class IllegalTransition(ValueError):
    pass


class PoolExhausted(RuntimeError):
    """No free preambles; admission must reject or the pool must grow."""


@dataclass(frozen=True)
class RrcState:
    """Immutable per-user connection state.

    preallocated_subchannels maps class_id -> subchannel_id, stored as a
    sorted tuple of pairs; nonempty exactly in InactiveConnected.
    """

    state: RrcStateKind = RrcStateKind.IDLE
    stored_config: bool = False
    dedicated_preambles: frozenset = frozenset()
    preallocated_subchannels: Tuple[Tuple[int, int], ...] = ()

    def __post_init__(self) -> None:
        validate_state(self)

    def subchannel_for(self, class_id: int) -> Optional[int]:
        for cid, sub in self.preallocated_subchannels:
            if cid == class_id:
                return sub
        return None


def validate_state(s: RrcState) -> None:
    kind = s.state
    if kind is RrcStateKind.IDLE:
        if s.dedicated_preambles or s.stored_config or s.preallocated_subchannels:
            raise IllegalTransition("Idle carries no preambles, config, or subchannels")
    if kind in (RrcStateKind.INACTIVE, RrcStateKind.INACTIVE_CONNECTED):
        if not s.stored_config or not s.dedicated_preambles:
            raise IllegalTransition(f"{kind.value} needs a stored config and >= 1 "
                                    "dedicated preamble")
    if (len(s.preallocated_subchannels) > 0) != (kind is RrcStateKind.INACTIVE_CONNECTED):
        raise IllegalTransition("pre-allocated subchannels exist exactly in "
                                "InactiveConnected")


def transition(state: RrcState, event: RrcEvent,
               preambles: Iterable[int] = (),
               subchannels: Iterable[Tuple[int, int]] = ()) -> RrcState:
    """Apply one event; extra resources granted by the network ride along
    (preamble ids on setup/suspend, (class_id, subchannel_id) pairs on
    promotion).  Raises IllegalTransition for any pair not in the table."""
    kind = state.state
    new_preambles = state.dedicated_preambles | frozenset(preambles)

    if event is RrcEvent.RELEASE:
        return RrcState()  # any state; clears everything

    if kind is RrcStateKind.IDLE and event is RrcEvent.SETUP_4WAY:
        return RrcState(RrcStateKind.CONNECTED, True, new_preambles, ())

    if kind is RrcStateKind.CONNECTED and event is RrcEvent.SUSPEND_TO_INACTIVE:
        if not new_preambles:
            raise IllegalTransition("suspend requires >= 1 dedicated preamble")
        return RrcState(RrcStateKind.INACTIVE, True, new_preambles, ())

    if kind is RrcStateKind.INACTIVE and event is RrcEvent.RESUME_FGMA:
        return RrcState(RrcStateKind.CONNECTED, True, new_preambles, ())

    if kind is RrcStateKind.INACTIVE and event is RrcEvent.PROMOTE_INACTIVE_CONNECTED:
        subs = tuple(sorted(subchannels))
        if not subs:
            raise IllegalTransition("promotion requires >= 1 pre-allocated subchannel")
        return RrcState(RrcStateKind.INACTIVE_CONNECTED, True, new_preambles, subs)

    if kind is RrcStateKind.INACTIVE_CONNECTED and event is RrcEvent.PACKET_ARRIVAL_GFMA:
        return state  # immediate transmission, no handshake, state kept

    raise IllegalTransition(f"{kind.value} cannot handle {event.value}")


# --- preamble registry ------------------------------------------------------

class PreambleKind(Enum):
    CELL_COMMON = "CellCommon"
    DEDICATED = "Dedicated"


@dataclass(frozen=True)
class PreambleRecord:
    preamble_id: int
    user_id: int
    class_id: int
    kind: PreambleKind = PreambleKind.DEDICATED


class PreamblePool:
    """Fixed pool of dedicated preambles; decoding an allocated id recovers
    the owning (user, class) pair.  Lowest free id is handed out first."""

    def __init__(self, size: int):
        if size < 1:
            raise ValueError("pool size must be >= 1")
        self.size = size
        self._next_unused = 0
        self._released: list = []  # min-heap of returned ids
        self._records: dict = {}  # preamble_id -> PreambleRecord
        self._by_owner: dict = {}  # (user_id, class_id) -> preamble_id

    @property
    def free_count(self) -> int:
        return self.size - len(self._records)

    def allocate(self, user_id: int, class_id: int) -> PreambleRecord:
        owner = (user_id, class_id)
        if owner in self._by_owner:
            raise ValueError(f"(user {user_id}, class {class_id}) already holds "
                             f"preamble {self._by_owner[owner]}")
        if self._released:
            pid = heapq.heappop(self._released)
        elif self._next_unused < self.size:
            pid = self._next_unused
            self._next_unused += 1
        else:
            raise PoolExhausted(f"all {self.size} preambles allocated")
        record = PreambleRecord(pid, user_id, class_id)
        self._records[pid] = record
        self._by_owner[owner] = pid
        return record

    def release(self, preamble_id: int) -> None:
        record = self._records.pop(preamble_id, None)
        if record is None:
            raise KeyError(f"preamble {preamble_id} is not allocated")
        del self._by_owner[(record.user_id, record.class_id)]
        heapq.heappush(self._released, preamble_id)

    def decode(self, preamble_id: int) -> Tuple[int, int]:
        record = self._records.get(preamble_id)
        if record is None:
            raise KeyError(f"preamble {preamble_id} is not allocated")
        return record.user_id, record.class_id


def allocate_preamble(user_id: int, class_id: int, pool: PreamblePool) -> PreambleRecord:
    return pool.allocate(user_id, class_id)


# --- protocol timelines -----------------------------------------------------

@dataclass(frozen=True)
class ProtocolTimeline:
    protocol: Protocol
    t_min_s: float
    propagation_s: float
    components: Tuple[Tuple[str, float], ...]
    pre_data_delay_s: float
    air_legs: int  # over-the-air legs before the data transmission


def protocol_timeline(protocol: Protocol, t_min_s: float,
                      propagation_s: float = 0.0) -> ProtocolTimeline:
    """Deterministic pre-data delay of a connection procedure.

    The data transmission itself (one more leg plus the slot duration) is
    charged by the engine; alignment to the next mini-slot is sampled by
    the caller.
    """
    if t_min_s <= 0.0:
        raise ValueError("t_min must be > 0")
    if propagation_s < 0.0:
        raise ValueError("propagation must be >= 0")

    if protocol is Protocol.FOUR_WAY:
        components = []
        for i in range(1, 5):
            components.append((f"msg{i}_tx", t_min_s))
            components.append((f"msg{i}_proc", t_min_s))
        legs = 4
    elif protocol is Protocol.FGMA:
        components = [("sr_tx", t_min_s), ("scheduling", 2.0 * t_min_s),
                      ("grant_tx", t_min_s)]
        legs = 2
    else:  # grant-free: no handshake at all
        components = []
        legs = 0

    if legs:
        components.append(("propagation", legs * propagation_s))
    pre_data = math.fsum(v for _, v in components)
    return ProtocolTimeline(protocol=protocol, t_min_s=t_min_s,
                            propagation_s=propagation_s,
                            components=tuple(components),
                            pre_data_delay_s=pre_data, air_legs=legs)
