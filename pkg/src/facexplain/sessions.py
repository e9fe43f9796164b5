"""In-memory session store with TTL expiry.

Sessions hold everything one verified pair produced: the record, the
explainability table, the saliency maps, the QA context, and the chat
turns.  Expired sessions drop their heavy payload immediately but leave a
tombstone so the API can answer 410 instead of 404.  Nothing is ever
persisted; biometric rasters live only as long as the session.
"""

from __future__ import annotations

import secrets
import threading
import time
from dataclasses import dataclass, field

import numpy as np

from .context import QAContext
from .errors import SessionExpired, UnknownSession
from .qa import AnswerResult
from .regions import ExplainabilityTable
from .saliency import SaliencyMap
from .verification import VerificationRecord


@dataclass
class Session:
    session_id: str
    record: VerificationRecord
    table: ExplainabilityTable
    maps: dict[str, SaliencyMap]  # method code (plus "_rev" variants) -> map
    context: QAContext
    probe_pixels: np.ndarray
    reference_pixels: np.ndarray
    created_at: float
    last_access: float
    ttl_s: int
    turns: list[tuple[str, AnswerResult]] = field(default_factory=list)
    heatmap_cache: dict[str, bytes] = field(default_factory=dict)
    ask_lock: threading.Lock = field(default_factory=threading.Lock)


def new_session_id() -> str:
    return secrets.token_hex(16)  # 128 bits


class SessionStore:
    def __init__(self, ttl_s: int = 3600, clock=time.monotonic):
        self.ttl_s = ttl_s
        self._clock = clock
        self._lock = threading.RLock()
        self._sessions: dict[str, Session] = {}
        self._expired: set[str] = set()

    def create(
        self, *, record, table, maps, context, probe_pixels, reference_pixels,
        ttl_s: int | None = None,
    ) -> Session:
        with self._lock:
            session_id = new_session_id()
            while session_id in self._sessions or session_id in self._expired:
                session_id = new_session_id()
            now = self._clock()
            session = Session(
                session_id=session_id,
                record=record,
                table=table,
                maps=maps,
                context=context,
                probe_pixels=probe_pixels,
                reference_pixels=reference_pixels,
                created_at=now,
                last_access=now,
                ttl_s=self.ttl_s if ttl_s is None else ttl_s,
            )
            self._sessions[session_id] = session
            return session

    def get(self, session_id: str, touch: bool = True) -> Session:
        with self._lock:
            self.purge_expired()
            if session_id in self._expired:
                raise SessionExpired(session_id)
            session = self._sessions.get(session_id)
            if session is None:
                raise UnknownSession(session_id)
            if touch:
                session.last_access = self._clock()
            return session

    def purge_expired(self) -> None:
        """Drop payloads of timed-out sessions, keeping only tombstones."""
        with self._lock:
            now = self._clock()
            for sid in [
                sid
                for sid, s in self._sessions.items()
                if now - s.last_access > s.ttl_s
            ]:
                del self._sessions[sid]
                self._expired.add(sid)

    def live_count(self) -> int:
        with self._lock:
            self.purge_expired()
            return len(self._sessions)
