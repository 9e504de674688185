"""Simulated half-duplex serial bus between one master and its terminals.

The wire is lossy on purpose: every traversal rolls for frame loss and
for single-bit corruption against a seeded RNG, so any failure pattern
is reproducible from the seed. A corrupted frame is still delivered but
fails its checksum at the far end, and the receiver stays silent — the
master's only recovery is retry, and `Timeout` is raised once attempts
are exhausted.

Slaves never initiate traffic. A command may execute more than once when
its reply is lost and the master retries, which is why the drain/ack
event protocol is idempotent by design.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import TYPE_CHECKING, Sequence

from campus.bus.commands import CMD_DISCOVER
from campus.bus.frame import BROADCAST_ADDR, Frame, decode_frame, encode_frame
from campus.errors import BadCrc, NoSuchTerminal, Timeout, Truncated
from campus.tag.image import TagImage
from campus.tag.reader import ReaderFieldModel

if TYPE_CHECKING:  # circular at runtime: the terminal speaks this bus
    from campus.terminal.terminal import GateTerminal

MAX_TERMINALS = 30


@dataclass(frozen=True)
class BusConfig:
    """Declarative bus description, convertible to a live SimBus."""

    terminals: frozenset[int] = frozenset()
    loss_prob: float = 0.0
    corrupt_prob: float = 0.0
    rng_seed: int = 0
    slot_ms: int = 10

    def __post_init__(self):
        if len(self.terminals) > MAX_TERMINALS:
            raise ValueError(f"at most {MAX_TERMINALS} terminals per bus")
        if any(not 1 <= a <= MAX_TERMINALS for a in self.terminals):
            raise ValueError("terminal addresses must be 1..30")


def inventory(reader: ReaderFieldModel, tags: Sequence[tuple[TagImage, float]]) -> list[TagImage]:
    """Collision-resolved inventory of the tags inside the reader field.

    ``tags`` pairs each candidate image with its distance from the
    antenna in centimetres. Tags beyond the configured range are not
    energized; of the rest, the anti-collision round is modelled as a
    deterministic sweep that singulates tags in ascending UID order
    until the reader's tracking capacity is full.
    """
    seen = [image for image, distance in tags if distance <= reader.range_cm]
    seen.sort(key=lambda image: image.uid.value)
    return seen[: reader.capacity]


class SimBus:
    """One master port and up to 30 attached terminals."""

    def __init__(self, rng: random.Random | None = None, loss_rate: float = 0.0, corrupt_rate: float = 0.0):
        if not 0.0 <= loss_rate <= 1.0:
            raise ValueError("loss rate must be in [0, 1]")
        if not 0.0 <= corrupt_rate <= 1.0:
            raise ValueError("corrupt rate must be in [0, 1]")
        self.rng = rng or random.Random(0)
        self.loss_rate = loss_rate
        self.corrupt_rate = corrupt_rate
        self.terminals: list[GateTerminal] = []

    @classmethod
    def from_config(cls, config: BusConfig) -> "SimBus":
        return cls(
            rng=random.Random(config.rng_seed),
            loss_rate=config.loss_prob,
            corrupt_rate=config.corrupt_prob,
        )

    def attach(self, terminal: GateTerminal) -> None:
        if len(self.terminals) >= MAX_TERMINALS:
            raise ValueError(f"bus supports at most {MAX_TERMINALS} terminals")
        if any(t.config.address == terminal.config.address for t in self.terminals):
            raise ValueError(f"address {terminal.config.address} already attached")
        self.terminals.append(terminal)

    def addresses(self) -> list[int]:
        return sorted(t.config.address for t in self.terminals)

    def _find(self, addr: int) -> GateTerminal | None:
        # Addresses live in terminal config and may move under SET_CONFIG,
        # so routing re-reads them on every transaction.
        for terminal in self.terminals:
            if terminal.config.address == addr:
                return terminal
        return None

    def _channel(self, wire: bytes) -> bytes | None:
        """One traversal of the shared pair: maybe lose, maybe corrupt.

        Rolls loss first, then corruption, exactly once each, so a
        transcript of outcomes is a pure function of the RNG state.
        """
        lost = self.rng.random() < self.loss_rate
        corrupt = self.rng.random() < self.corrupt_rate
        if lost:
            return None
        if corrupt:
            bit = self.rng.randrange(len(wire) * 8)
            flipped = bytearray(wire)
            flipped[bit // 8] ^= 1 << (bit % 8)
            return bytes(flipped)
        return wire

    def transact(self, request: Frame, now: int, retries: int = 3) -> Frame:
        """Send one unicast command and wait for its reply.

        ``retries`` counts total attempts. Each attempt re-sends the
        request; a terminal that receives it executes it even if the
        reply is then lost, so commands repeat under retry.
        """
        if request.addr == BROADCAST_ADDR:
            raise ValueError("transact is unicast; use broadcast()")
        terminal = self._find(request.addr)
        if terminal is None:
            raise NoSuchTerminal(request.addr)
        wire_out = encode_frame(request.addr, request.code, request.payload)
        for _ in range(max(1, retries)):
            delivered = self._channel(wire_out)
            if delivered is None:
                continue
            try:
                heard = decode_frame(delivered)
            except (BadCrc, Truncated):
                continue  # slave stays silent on a bad frame
            rcode, rpayload = terminal.handle_command(heard.code, heard.payload, now)
            wire_back = self._channel(encode_frame(terminal.config.address, rcode, rpayload))
            if wire_back is None:
                continue
            try:
                return decode_frame(wire_back)
            except (BadCrc, Truncated):
                continue
        raise Timeout(f"no valid reply from address {request.addr} after {max(1, retries)} attempts")

    def request(self, addr: int, code: int, payload: bytes, now: int, retries: int = 3) -> Frame:
        return self.transact(Frame(addr, code, payload), now, retries=retries)

    def broadcast(self, code: int, payload: bytes, now: int) -> int:
        """Deliver a no-reply broadcast; returns how many terminals heard it."""
        wire = encode_frame(BROADCAST_ADDR, code, payload)
        heard = 0
        for terminal in self.terminals:
            delivered = self._channel(wire)
            if delivered is None:
                continue
            try:
                frame = decode_frame(delivered)
            except (BadCrc, Truncated):
                continue
            terminal.handle_command(frame.code, frame.payload, now)
            heard += 1
        return heard

    def discover(self, now: int, rounds: int = 3) -> list[int]:
        """Slot-based enumeration of live terminal addresses.

        Each round broadcasts a discover probe; every terminal that
        hears it answers in the reply slot indexed by its address, so
        answers never collide. Individual probes and replies still roll
        for loss and corruption, and the result is the union over all
        rounds, sorted.
        """
        wire = encode_frame(BROADCAST_ADDR, CMD_DISCOVER, b"")
        found: set[int] = set()
        for _ in range(max(1, rounds)):
            for terminal in sorted(self.terminals, key=lambda t: t.config.address):
                probe = self._channel(wire)
                if probe is None:
                    continue
                try:
                    frame = decode_frame(probe)
                except (BadCrc, Truncated):
                    continue
                rcode, rpayload = terminal.handle_command(frame.code, frame.payload, now)
                reply = self._channel(encode_frame(terminal.config.address, rcode, rpayload))
                if reply is None:
                    continue
                try:
                    heard = decode_frame(reply)
                except (BadCrc, Truncated):
                    continue
                if heard.payload:
                    found.add(heard.payload[0])
        return sorted(found)
