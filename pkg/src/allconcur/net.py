"""Reliable FIFO transport over the overlay, as explicit buffers.

Every server owns a send buffer of ``SendEntry`` items (a message plus the
destinations it still has to reach) and a receive buffer of messages. Both
are FIFO; only the head of a buffer is ever consumed.
"""

from __future__ import annotations

from enum import IntEnum
from typing import NamedTuple, Sequence

from .overlay import Digraph


class StepDisabled(Exception):
    """Raised when a transition is applied outside its precondition."""


class Kind(IntEnum):
    BCAST = 0
    FAIL = 1


class Message(NamedTuple):
    kind: Kind
    o: int
    t: int | None = None

    def to_json(self) -> dict:
        if self.kind == Kind.BCAST:
            return {"kind": "BCAST", "o": self.o}
        return {"kind": "FAIL", "o": self.o, "t": self.t}


def bcast(o: int) -> Message:
    return Message(Kind.BCAST, o)


def fail_notice(o: int, t: int) -> Message:
    return Message(Kind.FAIL, o, t)


class SendEntry(NamedTuple):
    msg: Message
    dests: tuple[int, ...]


class NetState(NamedTuple):
    send_buf: tuple[tuple[SendEntry, ...], ...]
    recv_buf: tuple[tuple[Message, ...], ...]

    @classmethod
    def empty(cls, n: int) -> "NetState":
        return cls(((),) * n, ((),) * n)


def _put(seq: tuple, i: int, value) -> tuple:
    return seq[:i] + (value,) + seq[i + 1 :]


def send_msg(net: NetState, p: int, msgs: Sequence[Message], live: int, G: Digraph) -> NetState:
    """Queue ``msgs`` at ``p`` for every live successor except the message owner.

    ``live`` is the bitmask of non-faulty servers. Destinations are ascending;
    a message with no destination is dropped.
    """
    out = G.succ_mask[p] & live
    added = []
    for m in msgs:
        dests = out & ~(1 << m.o)
        if dests:
            added.append(SendEntry(m, tuple(q for q in range(dests.bit_length()) if dests >> q & 1)))
    if not added:
        return net
    return NetState(_put(net.send_buf, p, net.send_buf[p] + tuple(added)), net.recv_buf)


def tx_msg(net: NetState, p: int, q: int | None = None) -> NetState:
    """Transmit the head message of ``p``'s send buffer to one of its destinations.

    ``q`` defaults to the first remaining destination.
    """
    queue = net.send_buf[p]
    if not queue:
        raise StepDisabled(f"TXMsg({p}): send buffer empty")
    head = queue[0]
    if q is None:
        q = head.dests[0]
    elif q not in head.dests:
        raise StepDisabled(f"TXMsg({p}, {q}): {q} is not a pending destination of the head message")
    rest = tuple(d for d in head.dests if d != q)
    queue = ((SendEntry(head.msg, rest),) if rest else ()) + queue[1:]
    return NetState(_put(net.send_buf, p, queue), _put(net.recv_buf, q, net.recv_buf[q] + (head.msg,)))


def deliver_msg(net: NetState, p: int) -> tuple[NetState, Message]:
    """Pop the least recent message from ``p``'s receive buffer."""
    queue = net.recv_buf[p]
    if not queue:
        raise StepDisabled(f"DeliverMsg({p}): receive buffer empty")
    return NetState(net.send_buf, _put(net.recv_buf, p, queue[1:])), queue[0]


def append_recv(net: NetState, p: int, m: Message) -> NetState:
    return NetState(net.send_buf, _put(net.recv_buf, p, net.recv_buf[p] + (m,)))
