"""Framed stream protocol for running the exchange between two peers,
plus the passive eavesdropper that breaks every session.

Frame wire format: 4-byte big-endian payload length, one tag byte,
payload.  Payloads are capped at 2**20 bytes.  Tags:

  0x01 PARAMS   canonical params JSON (UTF-8)
  0x02 PUBKEY   public-key vector, 8-byte big-endian per entry
  0x03 CONFIRM  8-byte big-endian FNV-1a-64 checksum of the shared key
                bytes (key confirmation only -- deliberately not a MAC;
                the model is a passive adversary)

Session order: the initiator sends PARAMS then PUBKEY; the responder
answers with its PUBKEY; both derive the shared key; the initiator
sends CONFIRM, the responder echoes its own CONFIRM, and each side
compares checksums.  A single round trip, no retransmission, no
authentication.

Every frame either sent or received is appended to a transcript, so a
transcript captured by either peer (or a tap) replays the full session.
``eavesdrop`` consumes such a transcript and recovers the shared key
from public data alone via the passive attack.
"""

from __future__ import annotations

import json
import socket
import threading
from dataclasses import dataclass, field as dc_field
from typing import Optional

from .attacks import passive_commutant_attack
from .errors import (
    ChecksumMismatch,
    FrameTooLarge,
    IncompleteTranscript,
    NeedMoreBytes,
    ParseError,
    ProtocolViolation,
    UnknownTag,
)
from .gf import Rng
from .kex import (
    Params,
    PrivateKey,
    PublicKey,
    SharedKey,
    canonical_json,
    derive_shared,
    keygen,
    params_from_json,
    params_to_json,
    public_key,
)

TAG_PARAMS = 0x01
TAG_PUBKEY = 0x02
TAG_CONFIRM = 0x03
_TAGS = {TAG_PARAMS, TAG_PUBKEY, TAG_CONFIRM}
_TAG_NAMES = {TAG_PARAMS: "PARAMS", TAG_PUBKEY: "PUBKEY", TAG_CONFIRM: "CONFIRM"}

MAX_PAYLOAD = 1 << 20

ROLE_INITIATOR = "initiator"
ROLE_RESPONDER = "responder"

# Direction labels are relative to the initiator: i2r frames travel
# initiator -> responder.
DIR_I2R = "i2r"
DIR_R2I = "r2i"

FNV_OFFSET = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3


def checksum64(data: bytes) -> int:
    """FNV-1a 64-bit."""
    state = FNV_OFFSET
    for byte in data:
        state = ((state ^ byte) * FNV_PRIME) & 0xFFFFFFFFFFFFFFFF
    return state


@dataclass(frozen=True)
class Frame:
    tag: int
    payload: bytes


def encode_frame(frame: Frame) -> bytes:
    if len(frame.payload) > MAX_PAYLOAD:
        raise FrameTooLarge(f"payload of {len(frame.payload)} bytes exceeds {MAX_PAYLOAD}")
    if frame.tag not in _TAGS:
        raise UnknownTag(f"tag {frame.tag:#04x} is not defined")
    return len(frame.payload).to_bytes(4, "big") + bytes([frame.tag]) + frame.payload


def decode_frame(data: bytes) -> tuple[Frame, int]:
    """Decode one frame from the head of ``data``.

    Returns the frame and the number of bytes consumed.  Raises
    NeedMoreBytes while the buffer is still short, so callers can feed
    a stream incrementally.
    """
    if len(data) < 4:
        raise NeedMoreBytes("frame header incomplete")
    length = int.from_bytes(data[:4], "big")
    if length > MAX_PAYLOAD:
        raise FrameTooLarge(f"declared payload of {length} bytes exceeds {MAX_PAYLOAD}")
    if len(data) < 5:
        raise NeedMoreBytes("tag byte missing")
    tag = data[4]
    if tag not in _TAGS:
        raise UnknownTag(f"tag {tag:#04x} is not defined")
    if len(data) < 5 + length:
        raise NeedMoreBytes(f"payload incomplete ({len(data) - 5}/{length} bytes)")
    return Frame(tag, bytes(data[5 : 5 + length])), 5 + length


@dataclass
class Transcript:
    """Append-only record of a session's frames with directions."""

    frames: list[tuple[str, Frame]] = dc_field(default_factory=list)

    def append(self, direction: str, frame: Frame) -> None:
        self.frames.append((direction, frame))

    def to_json(self) -> str:
        return canonical_json(
            {
                "frames": [
                    {"dir": d, "tag": f.tag, "payload_hex": f.payload.hex()}
                    for d, f in self.frames
                ]
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "Transcript":
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(f"malformed transcript JSON: {exc.msg}", pos=exc.pos) from None
        if not isinstance(obj, dict) or not isinstance(obj.get("frames"), list):
            raise ParseError("transcript: expected {\"frames\": [...]}")
        frames = []
        for i, raw in enumerate(obj["frames"]):
            if not isinstance(raw, dict):
                raise ParseError(f"transcript.frames[{i}]: expected an object")
            d = raw.get("dir")
            tag = raw.get("tag")
            hexpay = raw.get("payload_hex")
            if d not in (DIR_I2R, DIR_R2I) or not isinstance(tag, int):
                raise ParseError(f"transcript.frames[{i}]: bad dir/tag")
            if tag not in _TAGS:
                raise ParseError(f"transcript.frames[{i}]: unknown tag {tag}")
            try:
                payload = bytes.fromhex(hexpay)
            except (TypeError, ValueError):
                raise ParseError(f"transcript.frames[{i}]: bad payload hex") from None
            frames.append((d, Frame(tag, payload)))
        return cls(frames)


def _pubkey_payload(pk: PublicKey) -> bytes:
    return b"".join(e.to_bytes(8, "big") for e in pk.vec)


def _pubkey_from_payload(payload: bytes, params: Params) -> PublicKey:
    if len(payload) != 8 * params.m:
        raise ProtocolViolation(
            f"public key payload of {len(payload)} bytes, expected {8 * params.m}"
        )
    vec = [int.from_bytes(payload[i : i + 8], "big") for i in range(0, len(payload), 8)]
    if any(e >= params.q for e in vec):
        raise ProtocolViolation("public key entry is not a canonical residue")
    return PublicKey(vec)


class _FrameReader:
    def __init__(self, transport):
        self._transport = transport
        self._buf = b""

    def next_frame(self) -> Frame:
        while True:
            try:
                frame, used = decode_frame(self._buf)
            except NeedMoreBytes:
                chunk = self._transport.recv(65536)
                if not chunk:
                    raise ConnectionError("peer closed the connection mid-session")
                self._buf += chunk
                continue
            self._buf = self._buf[used:]
            return frame


def run_peer(
    role: str,
    transport,
    params: Optional[Params] = None,
    private_key: Optional[PrivateKey] = None,
    rng: Optional[Rng] = None,
) -> tuple[SharedKey, Transcript]:
    """Run one side of the exchange over a connected byte stream.

    The initiator must bring params and a private key.  A responder may
    bring both (the received PARAMS frame must then match them), or
    neither, in which case it adopts the received parameters and
    generates an ephemeral key with ``rng``.  Transport errors
    propagate as OSError/ConnectionError.
    """
    if role not in (ROLE_INITIATOR, ROLE_RESPONDER):
        raise ValueError(f"unknown role {role!r}")
    transcript = Transcript()
    reader = _FrameReader(transport)
    send_dir = DIR_I2R if role == ROLE_INITIATOR else DIR_R2I
    recv_dir = DIR_R2I if role == ROLE_INITIATOR else DIR_I2R

    def send(tag: int, payload: bytes) -> None:
        frame = Frame(tag, payload)
        transport.sendall(encode_frame(frame))
        transcript.append(send_dir, frame)

    def expect(tag: int) -> Frame:
        frame = reader.next_frame()
        transcript.append(recv_dir, frame)
        if frame.tag != tag:
            raise ProtocolViolation(
                f"expected {_TAG_NAMES[tag]}, got {_TAG_NAMES[frame.tag]}"
            )
        return frame

    if role == ROLE_INITIATOR:
        if params is None or private_key is None:
            raise ValueError("initiator needs params and a private key")
        send(TAG_PARAMS, params_to_json(params).encode())
        send(TAG_PUBKEY, _pubkey_payload(public_key(params, private_key)))
        peer_pub = _pubkey_from_payload(expect(TAG_PUBKEY).payload, params)
        shared = derive_shared(params, private_key, peer_pub)
        confirm = checksum64(shared.to_bytes()).to_bytes(8, "big")
        send(TAG_CONFIRM, confirm)
        peer_confirm = expect(TAG_CONFIRM).payload
    else:
        frame = expect(TAG_PARAMS)
        try:
            wire_params = params_from_json(frame.payload.decode("utf-8"))
        except (ParseError, UnicodeDecodeError) as exc:
            raise ProtocolViolation(f"bad PARAMS frame: {exc}") from None
        if params is None:
            params = wire_params
        elif params_to_json(params) != params_to_json(wire_params):
            raise ProtocolViolation("received parameters differ from configured ones")
        if private_key is None:
            private_key, _ = keygen(params, rng if rng is not None else Rng())
        peer_pub = _pubkey_from_payload(expect(TAG_PUBKEY).payload, params)
        send(TAG_PUBKEY, _pubkey_payload(public_key(params, private_key)))
        shared = derive_shared(params, private_key, peer_pub)
        confirm = checksum64(shared.to_bytes()).to_bytes(8, "big")
        peer_confirm = expect(TAG_CONFIRM).payload
        send(TAG_CONFIRM, confirm)

    if peer_confirm != confirm:
        raise ChecksumMismatch("peers derived different shared keys")
    return shared, transcript


@dataclass
class EavesdropResult:
    shared_key: SharedKey
    verdict: bool
    confirms_observed: int


def eavesdrop(transcript: Transcript, degree_bound: Optional[int] = None) -> EavesdropResult:
    """Recover the session key of a recorded exchange from public data.

    Needs the PARAMS frame and both PUBKEY frames (initiator's first).
    The verdict is True when at least one CONFIRM frame was observed
    and the recovered key's checksum matches every one of them.
    """
    params_frames = [f for _, f in transcript.frames if f.tag == TAG_PARAMS]
    pubkey_frames = [f for _, f in transcript.frames if f.tag == TAG_PUBKEY]
    confirm_frames = [f for _, f in transcript.frames if f.tag == TAG_CONFIRM]
    if not params_frames:
        raise IncompleteTranscript("transcript has no PARAMS frame")
    if len(pubkey_frames) < 2:
        raise IncompleteTranscript(
            f"transcript has {len(pubkey_frames)} PUBKEY frame(s), need 2"
        )
    try:
        params = params_from_json(params_frames[0].payload.decode("utf-8"))
    except (ParseError, UnicodeDecodeError) as exc:
        raise IncompleteTranscript(f"unreadable PARAMS frame: {exc}") from None
    pub_a = _pubkey_from_payload(pubkey_frames[0].payload, params)
    pub_b = _pubkey_from_payload(pubkey_frames[1].payload, params)
    attack = passive_commutant_attack(params, pub_a, pub_b, degree_bound)
    expected = checksum64(attack.shared_key.to_bytes()).to_bytes(8, "big")
    verdict = bool(confirm_frames) and all(
        f.payload == expected for f in confirm_frames
    )
    return EavesdropResult(attack.shared_key, verdict, len(confirm_frames))


class Listener:
    """TCP listener running the responder side, one thread per session.

    Results (or exceptions) are collected in ``results`` in completion
    order.  With a seed, every session uses the same deterministic key
    stream; without one, each session draws an ephemeral key from OS
    entropy.
    """

    def __init__(
        self,
        host: str = "127.0.0.1",
        port: int = 0,
        params: Optional[Params] = None,
        private_key: Optional[PrivateKey] = None,
        seed: Optional[int] = None,
        max_sessions: Optional[int] = None,
    ):
        self._host = host
        self._port = port
        self._params = params
        self._private_key = private_key
        self._seed = seed
        self._max_sessions = max_sessions
        self._sock: Optional[socket.socket] = None
        self._accept_thread: Optional[threading.Thread] = None
        self._workers: list[threading.Thread] = []
        self._lock = threading.Lock()
        self._stopping = False
        self.results: list[tuple[SharedKey, Transcript] | Exception] = []

    @property
    def address(self) -> tuple[str, int]:
        assert self._sock is not None, "listener not started"
        return self._sock.getsockname()[:2]

    def start(self) -> tuple[str, int]:
        sock = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        sock.bind((self._host, self._port))
        sock.listen(16)
        self._sock = sock
        self._accept_thread = threading.Thread(target=self._accept_loop, daemon=True)
        self._accept_thread.start()
        return self.address

    def _accept_loop(self) -> None:
        served = 0
        assert self._sock is not None
        while not self._stopping:
            if self._max_sessions is not None and served >= self._max_sessions:
                break
            try:
                conn, _ = self._sock.accept()
            except OSError:
                break
            served += 1
            worker = threading.Thread(target=self._serve_one, args=(conn,), daemon=True)
            with self._lock:
                self._workers.append(worker)
            worker.start()

    def _serve_one(self, conn: socket.socket) -> None:
        rng = Rng(self._seed) if self._seed is not None else Rng()
        try:
            with conn:
                result = run_peer(
                    ROLE_RESPONDER,
                    conn,
                    params=self._params,
                    private_key=self._private_key,
                    rng=rng,
                )
        except Exception as exc:  # collected for the owner to inspect
            result = exc
        with self._lock:
            self.results.append(result)

    def wait(self, sessions: int, timeout: float = 30.0) -> None:
        """Block until at least ``sessions`` results are in."""
        import time

        deadline = time.monotonic() + timeout
        while time.monotonic() < deadline:
            with self._lock:
                if len(self.results) >= sessions:
                    return
            time.sleep(0.01)
        raise TimeoutError(f"listener saw {len(self.results)} of {sessions} sessions")

    def stop(self) -> None:
        self._stopping = True
        if self._sock is not None:
            try:
                self._sock.close()
            except OSError:
                pass
        if self._accept_thread is not None:
            self._accept_thread.join(timeout=5)
        with self._lock:
            workers = list(self._workers)
        for w in workers:
            w.join(timeout=5)


def connect_and_run(
    host: str,
    port: int,
    params: Params,
    private_key: PrivateKey,
    timeout: float = 30.0,
) -> tuple[SharedKey, Transcript]:
    """Dial a listener and run the initiator side."""
    with socket.create_connection((host, port), timeout=timeout) as sock:
        return run_peer(ROLE_INITIATOR, sock, params=params, private_key=private_key)
