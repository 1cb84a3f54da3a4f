"""Configuration and state values shared by the protocol, detector and checker."""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

from .net import NetState
from .overlay import Digraph, vertex_connectivity
from .tracking import TrackingDigraph, members

MUTANTS = ("keep_owner", "early_deliver", "no_fail_forward")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class Config:
    """Immutable run parameters.

    ``mutant`` selects a deliberately broken protocol variant (see ``MUTANTS``)
    used to check that the checker notices. ``inflight_after_fail`` lets a
    failed server keep draining its send buffer. ``relay_after_done`` keeps a
    terminated server processing failure notifications instead of freezing.
    """

    G: Digraph
    f: int
    mutant: str | None = None
    inflight_after_fail: bool = False
    relay_after_done: bool = False

    def __post_init__(self):
        if self.mutant is not None and self.mutant not in MUTANTS:
            raise ConfigError(f"unknown mutant {self.mutant!r}; choose from {', '.join(MUTANTS)}")
        if self.f < 0:
            raise ConfigError("f must be non-negative")
        if self.G.nodes != frozenset(range(self.G.n)):
            raise ConfigError("overlay nodes must be 0..n-1")
        if self.G.has_self_loops():
            raise ConfigError("overlay must not contain self-loops")
        if self.G.n > 64:
            raise ConfigError("at most 64 servers are supported")

    @property
    def n(self) -> int:
        return self.G.n

    def validate(self) -> None:
        if self.G.n < 2:
            raise ConfigError("need at least 2 servers")
        kappa = vertex_connectivity(self.G)
        if kappa <= self.f:
            raise ConfigError(f"vertex connectivity {kappa} does not exceed f={self.f}")


class ServerState(NamedTuple):
    M: int
    F: tuple[int, ...]
    g: tuple[TrackingDigraph, ...]
    nf: bool
    ab: bool
    done: bool

    def known(self) -> list[int]:
        return members(self.M)


class SystemState:
    """One global state. Treated as immutable; transitions build new values.

    ``fd[p]`` is the bitmask of servers whose failure ``p`` has detected.
    Equality and hashing ignore ``config``.
    """

    __slots__ = ("config", "servers", "net", "fd", "failed")

    def __init__(self, config: Config, servers, net: NetState, fd, failed: int):
        self.config = config
        self.servers = servers
        self.net = net
        self.fd = fd
        self.failed = failed

    def key(self) -> tuple:
        return (self.servers, self.net, self.fd)

    def __eq__(self, other):
        return isinstance(other, SystemState) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        return f"SystemState(n={self.config.n}, failed={self.failed})"

    @property
    def live(self) -> int:
        m = 0
        for p, s in enumerate(self.servers):
            if s.nf:
                m |= 1 << p
        return m

    @property
    def ab_mask(self) -> int:
        m = 0
        for p, s in enumerate(self.servers):
            if s.ab:
                m |= 1 << p
        return m
