"""Minimal DNS wire format: A-record queries and mock responses over UDP.

Only what the probing harness needs: building a recursion-desired query,
validating a response (transaction id, QR flag, rcode 0 or NXDOMAIN), and
building a reply for the mock resolver.  Answer content is never
inspected; the harness measures resolution latency only.
"""

from __future__ import annotations

import re
import struct
from dataclasses import dataclass

__all__ = [
    "MAX_NAME_LENGTH",
    "is_valid_name",
    "build_query",
    "parse_message",
    "is_valid_answer",
    "build_response",
    "RCODE_OK",
    "RCODE_NXDOMAIN",
]

QTYPE_A = 1
QCLASS_IN = 1
FLAG_QR = 0x8000
FLAG_RD = 0x0100
FLAG_RA = 0x0080
RCODE_OK = 0
RCODE_NXDOMAIN = 3

MAX_NAME_LENGTH = 253
_LABEL_RE = re.compile(r"^[A-Za-z0-9_]([A-Za-z0-9_-]{0,61}[A-Za-z0-9_])?$")


def is_valid_name(name: str) -> bool:
    name = name.rstrip(".")
    if not name or len(name) > MAX_NAME_LENGTH:
        return False
    return all(_LABEL_RE.match(label) for label in name.split("."))


def _encode_name(name: str) -> bytes:
    out = bytearray()
    for label in name.rstrip(".").split("."):
        raw = label.encode("ascii")
        out.append(len(raw))
        out.extend(raw)
    out.append(0)
    return bytes(out)


def build_query(txid: int, name: str) -> bytes:
    """Standard recursive A-record query."""
    if not is_valid_name(name):
        raise ValueError(f"syntactically invalid domain name {name!r}")
    header = struct.pack(">HHHHHH", txid & 0xFFFF, FLAG_RD, 1, 0, 0, 0)
    return header + _encode_name(name) + struct.pack(">HH", QTYPE_A, QCLASS_IN)


@dataclass(frozen=True)
class Message:
    txid: int
    is_response: bool
    rcode: int
    question: bytes  # raw question section (may be empty)


def parse_message(data: bytes) -> Message | None:
    """Header fields of a DNS message, or None if too short to be one."""
    if len(data) < 12:
        return None
    txid, flags, qdcount = struct.unpack(">HHH", data[:6])
    question = b""
    if qdcount >= 1:
        # Skip the first qname to find the end of its question entry.
        pos = 12
        while pos < len(data) and data[pos] != 0:
            pos += 1 + data[pos]
        end = pos + 1 + 4
        if end <= len(data):
            question = data[12:end]
    return Message(txid, bool(flags & FLAG_QR), flags & 0x000F, question)


def is_valid_answer(data: bytes, txid: int) -> bool:
    """A response counts as valid on txid match, QR set, and rcode 0 or NXDOMAIN."""
    msg = parse_message(data)
    return (
        msg is not None
        and msg.is_response
        and msg.txid == (txid & 0xFFFF)
        and msg.rcode in (RCODE_OK, RCODE_NXDOMAIN)
    )


def build_response(query: bytes, rcode: int = RCODE_OK) -> bytes:
    """Reply for the mock resolver: echoes the question, one A record on rcode 0."""
    msg = parse_message(query)
    if msg is None:
        raise ValueError("query too short to answer")
    ancount = 1 if rcode == RCODE_OK and msg.question else 0
    flags = FLAG_QR | FLAG_RD | FLAG_RA | (rcode & 0x000F)
    header = struct.pack(">HHHHHH", msg.txid, flags, 1 if msg.question else 0, ancount, 0, 0)
    answer = b""
    if ancount:
        # Compressed pointer to the question name at offset 12.
        answer = struct.pack(">HHHIH", 0xC00C, QTYPE_A, QCLASS_IN, 60, 4) + bytes([127, 0, 0, 1])
    return header + msg.question + answer
