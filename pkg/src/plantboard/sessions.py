"""Authenticated session lifecycle and the application state machine.

Each session walks a small state machine: after login it sits in the
hub, from which it can open the post-creation form or an existing post's
thread, and every edge is re-validated server side so a client cannot
skip states. The legal transitions:

    app_hub          --open_create--> create_new_post
    create_new_post  --publish------> app_hub      (valid draft required)
    create_new_post  --cancel-------> app_hub
    app_hub          --open_post----> add_comment  (post must be viewable)
    add_comment      --back---------> app_hub
    any state        --logout-------> logged_out   (idempotent)

Everything else is an InvalidTransition.
"""

from __future__ import annotations

import secrets
import threading
from collections.abc import Collection, Mapping
from dataclasses import dataclass
from datetime import datetime, timedelta
from enum import Enum
from typing import Callable

from .domain import WorkerRecord
from .errors import (
    AccountDisabled,
    InvalidCredentials,
    InvalidTransition,
    PostNotViewable,
    SessionExpired,
)
from .passwords import verify_password

DEFAULT_SESSION_TTL = timedelta(hours=12)
_TOKEN_BYTES = 32  # 256 bits of entropy


class SessionState(str, Enum):
    LOGGED_OUT = "logged_out"
    APP_HUB = "app_hub"
    CREATE_NEW_POST = "create_new_post"
    ADD_COMMENT = "add_comment"


class SessionAction(str, Enum):
    OPEN_CREATE = "open_create"
    PUBLISH = "publish"
    CANCEL = "cancel"
    OPEN_POST = "open_post"
    BACK = "back"
    LOGOUT = "logout"


def transition_state(
    state: SessionState,
    action: SessionAction,
    *,
    post_id: str | None = None,
    can_view: Callable[[str], bool] | None = None,
) -> tuple[SessionState, str | None]:
    """The pure transition function: (state, action) -> (state', post ctx).

    Raises InvalidTransition for every pair outside the legal edge set,
    and PostNotViewable when open_post names a thread the caller may not
    see. Returns the new state and the post id in context (set only in
    add_comment).
    """
    if action is SessionAction.LOGOUT:
        return SessionState.LOGGED_OUT, None
    if state is SessionState.APP_HUB:
        if action is SessionAction.OPEN_CREATE:
            return SessionState.CREATE_NEW_POST, None
        if action is SessionAction.OPEN_POST:
            if not post_id:
                raise InvalidTransition(state.value, action.value)
            if can_view is not None and not can_view(post_id):
                raise PostNotViewable(f"post {post_id!r} is not viewable in this session")
            return SessionState.ADD_COMMENT, post_id
    elif state is SessionState.CREATE_NEW_POST:
        if action in (SessionAction.PUBLISH, SessionAction.CANCEL):
            return SessionState.APP_HUB, None
    elif state is SessionState.ADD_COMMENT:
        if action is SessionAction.BACK:
            return SessionState.APP_HUB, None
    raise InvalidTransition(state.value, action.value)


def legal_pairs() -> set[tuple[SessionState, SessionAction]]:
    """The 9 legal (state, action) pairs, for exhaustive-table checks."""
    pairs = {(s, SessionAction.LOGOUT) for s in SessionState}
    pairs |= {
        (SessionState.APP_HUB, SessionAction.OPEN_CREATE),
        (SessionState.APP_HUB, SessionAction.OPEN_POST),
        (SessionState.CREATE_NEW_POST, SessionAction.PUBLISH),
        (SessionState.CREATE_NEW_POST, SessionAction.CANCEL),
        (SessionState.ADD_COMMENT, SessionAction.BACK),
    }
    return pairs


@dataclass
class Session:
    session_id: str
    worker_id: str
    state: SessionState
    expires_at: datetime
    comment_post_id: str | None = None

    def to_json_obj(self) -> dict:
        return {
            "state": self.state.value,
            "worker_id": self.worker_id,
            "post_id": self.comment_post_id,
        }


def authenticate(
    workers_by_email: Mapping[str, WorkerRecord],
    *,
    email: str,
    password: str,
    removed: Collection[str] = (),
) -> WorkerRecord:
    """Resolve credentials to a worker record.

    Unknown email and bad password are indistinguishable to the caller
    (single InvalidCredentials); a tombstoned account is reported as
    disabled only after the password verifies.
    """
    worker = workers_by_email.get(email)
    if worker is None or worker.password_digest is None:
        raise InvalidCredentials("unknown email or wrong password")
    if not verify_password(password, worker.password_digest):
        raise InvalidCredentials("unknown email or wrong password")
    if worker.worker_id in removed:
        raise AccountDisabled(f"account {email!r} is disabled")
    return worker


class SessionStore:
    """In-memory session registry; one lock per session serializes the
    actions of that session, distinct sessions proceed independently."""

    def __init__(self, *, ttl: timedelta = DEFAULT_SESSION_TTL):
        self.ttl = ttl
        self._sessions: dict[str, Session] = {}
        self._locks: dict[str, threading.Lock] = {}
        self._registry_lock = threading.Lock()

    def create(self, worker_id: str, *, now: datetime) -> Session:
        token = secrets.token_urlsafe(_TOKEN_BYTES)
        session = Session(
            session_id=token,
            worker_id=worker_id,
            state=SessionState.APP_HUB,
            expires_at=now + self.ttl,
        )
        with self._registry_lock:
            self._sessions[token] = session
            self._locks[token] = threading.Lock()
        return session

    def get(self, token: str | None, *, now: datetime) -> Session:
        """Look up a live session; expired or revoked tokens raise."""
        with self._registry_lock:
            session = self._sessions.get(token or "")
        if session is None:
            raise SessionExpired("session token is not valid")
        if now >= session.expires_at or session.state is SessionState.LOGGED_OUT:
            self.revoke(token or "")
            raise SessionExpired("session has expired")
        return session

    def lock_for(self, token: str) -> threading.Lock:
        with self._registry_lock:
            lock = self._locks.get(token)
        return lock if lock is not None else threading.Lock()

    def revoke(self, token: str) -> None:
        """Drop a session; revoking an unknown token is a no-op."""
        with self._registry_lock:
            self._sessions.pop(token, None)
            self._locks.pop(token, None)

    def count(self) -> int:
        with self._registry_lock:
            return len(self._sessions)
