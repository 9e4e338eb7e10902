"""Durable, replayable system of record.

All state (taxonomy, plant map, workers, posts, threads, presence) is the
fold of an append-only event log. Each log line is one event in canonical
JSON followed by a CRC32 of its bytes; a torn final line (crash during
append) is detected and dropped on recovery, while damage anywhere else
is reported as corruption.

Authorization lives here too: worker/taxonomy/map events require an
admin actor, while post/availability/message/location events must be
appended by the worker they speak for. The reserved ``system`` actor
(used by bootstrap tooling) bypasses both checks.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import threading
import zlib
from collections.abc import Iterable, Mapping
from dataclasses import dataclass
from datetime import datetime, timedelta
from pathlib import Path

from .canonical import canonical_dumps, format_timestamp, parse_timestamp
from .domain import (
    OFF_SITE,
    Attachment,
    ChatMessage,
    LocationReport,
    PlantMap,
    Post,
    PresenceView,
    Response,
    Taxonomy,
    Thread,
    WorkerRecord,
    post_to_draft_obj,
    validate_post_draft,
    validate_worker_record,
)
from .errors import (
    ActorMismatch,
    AlreadyAccepted,
    CorruptLog,
    CorruptSnapshot,
    FieldError,
    NotAdmin,
    NotMember,
    NotReached,
    UnknownPost,
    UnknownWorker,
    ValidationErrors,
    WouldOrphanReferences,
    single_error,
)
from .matching import RecipientSet, eligible_recipients
from .presence import DEFAULT_PRESENCE_TTL, report_location

logger = logging.getLogger(__name__)

SYSTEM_ACTOR = "system"

EVENT_KINDS = (
    "taxonomy_defined",
    "worker_created",
    "worker_updated",
    "worker_removed",
    "map_defined",
    "post_published",
    "availability_set",
    "message_sent",
    "location_reported",
)

ADMIN_KINDS = frozenset(
    {"taxonomy_defined", "map_defined", "worker_created", "worker_updated", "worker_removed"}
)

# For actor-bound kinds: which payload field names the acting worker.
ACTOR_FIELD = {
    "post_published": "author",
    "availability_set": "worker",
    "message_sent": "sender",
    "location_reported": "worker",
}

_UPDATABLE_WORKER_FIELDS = frozenset(
    {"name", "surname", "email", "experience", "expertises", "duties", "is_admin", "password_digest"}
)

LOG_FILENAME = "events.log"
SNAPSHOT_DIRNAME = "snapshots"


@dataclass(frozen=True)
class Event:
    seq: int
    at: datetime
    kind: str
    payload: dict

    def to_json_obj(self) -> dict:
        return {
            "seq": self.seq,
            "at": format_timestamp(self.at),
            "kind": self.kind,
            "payload": self.payload,
        }

    @classmethod
    def from_json_obj(cls, obj: Mapping) -> "Event":
        return cls(
            seq=int(obj["seq"]),
            at=parse_timestamp(obj["at"]),
            kind=str(obj["kind"]),
            payload=dict(obj["payload"]),
        )

    def encode_line(self) -> bytes:
        body = canonical_dumps(self.to_json_obj())
        crc = format(zlib.crc32(body.encode("utf-8")), "08x")
        return f"{body} {crc}\n".encode("utf-8")


def decode_line(line: bytes) -> Event:
    """Parse one log line, verifying its CRC32 suffix."""
    text = line.decode("utf-8").rstrip("\n")
    if len(text) < 10 or text[-9] != " ":
        raise ValueError("missing checksum suffix")
    body, crc = text[:-9], text[-8:]
    if format(zlib.crc32(body.encode("utf-8")), "08x") != crc:
        raise ValueError("checksum mismatch")
    return Event.from_json_obj(json.loads(body))


class MaterializedState:
    """The fold of the event log, updated one validated event at a time.

    ``check`` validates an event against the current state without
    mutating anything; ``apply`` checks and then mutates. Both run on
    replay, so a log that validated when written always replays.
    """

    def __init__(self, *, presence_ttl: timedelta = DEFAULT_PRESENCE_TTL):
        self.presence_ttl = presence_ttl
        self.taxonomy: Taxonomy | None = None
        self.plant_map: PlantMap = PlantMap.empty()
        self.workers: dict[str, WorkerRecord] = {}
        self.removed_workers: set[str] = set()
        self.posts: dict[str, Post] = {}
        self.threads: dict[str, Thread] = {}
        self.presence: PresenceView = PresenceView.empty()
        self.applied_seq = 0
        self.workers_created = 0
        self.posts_published = 0

    # -- registry views ------------------------------------------------------

    def is_active(self, worker_id: str) -> bool:
        return worker_id in self.workers and worker_id not in self.removed_workers

    def active_workers(self) -> list[WorkerRecord]:
        return [w for wid, w in self.workers.items() if wid not in self.removed_workers]

    def active_worker_ids(self) -> frozenset[str]:
        return frozenset(w.worker_id for w in self.active_workers())

    def worker_by_email(self, email: str) -> WorkerRecord | None:
        for worker in self.active_workers():
            if worker.email == email:
                return worker
        return None

    def next_worker_id(self) -> str:
        return f"w{self.workers_created + 1}"

    def next_post_id(self) -> str:
        return f"p{self.posts_published + 1}"

    # -- event validation ----------------------------------------------------

    def check(self, event: Event):
        """Validate an event against this state; returns the parsed payload
        artifacts apply needs. Raises without mutating."""
        handler = getattr(self, f"_check_{event.kind}", None)
        if handler is None:
            raise single_error("kind", "unknown_kind", f"unknown event kind {event.kind!r}")
        return handler(event)

    def _require_taxonomy(self) -> Taxonomy:
        if self.taxonomy is None:
            raise single_error("taxonomy", "missing_field", "no taxonomy has been defined yet")
        return self.taxonomy

    def _check_taxonomy_defined(self, event: Event) -> Taxonomy:
        taxonomy = Taxonomy.from_json_obj(event.payload)
        dangling = []
        for worker in self.active_workers():
            ok = (
                taxonomy.has_rank(worker.experience)
                and worker.expertises <= taxonomy.expertises
                and worker.duties <= taxonomy.duties
            )
            if not ok:
                dangling.append(worker.worker_id)
        for post in self.posts.values():
            ok = (
                post.machine in taxonomy.duties
                and post.required_expertises <= taxonomy.expertises
            )
            if not ok:
                dangling.append(post.post_id)
        if dangling:
            raise WouldOrphanReferences(dangling)
        return taxonomy

    def _check_map_defined(self, event: Event) -> PlantMap:
        plant_map = PlantMap.from_json_obj(event.payload)
        if plant_map.machine_zone:
            taxonomy = self._require_taxonomy()
            errors = [
                FieldError(f"machines.{machine}", "unknown_duty", f"{machine!r} not a taxonomy duty")
                for machine in plant_map.machine_zone
                if machine not in taxonomy.duties
            ]
            if errors:
                raise ValidationErrors(errors)
        dangling = []
        for worker_id, report in self.presence.reports.items():
            if report.zone != OFF_SITE and report.zone not in plant_map.zones:
                dangling.append(worker_id)
        if dangling:
            raise WouldOrphanReferences(dangling)
        return plant_map

    def _check_worker_created(self, event: Event) -> WorkerRecord:
        taxonomy = self._require_taxonomy()
        record = validate_worker_record(
            event.payload,
            taxonomy,
            existing_emails={w.email for w in self.active_workers()},
        )
        if record.worker_id in self.workers:
            raise single_error(
                "worker_id", "duplicate_worker_id", f"worker {record.worker_id!r} already exists"
            )
        return record

    def _check_worker_updated(self, event: Event) -> WorkerRecord:
        taxonomy = self._require_taxonomy()
        worker_id = str(event.payload.get("worker_id") or "")
        if not self.is_active(worker_id):
            raise UnknownWorker(f"worker {worker_id!r} does not exist")
        changes = event.payload.get("changes") or {}
        unknown = set(changes) - _UPDATABLE_WORKER_FIELDS
        if unknown:
            raise single_error(
                "changes", "unknown_field", f"cannot update fields: {sorted(unknown)}"
            )
        current = self.workers[worker_id]
        merged = current.to_json_obj(include_digest=True)
        merged.update(changes)
        merged["worker_id"] = worker_id
        return validate_worker_record(
            merged,
            taxonomy,
            existing_emails={
                w.email for w in self.active_workers() if w.worker_id != worker_id
            },
        )

    def _check_worker_removed(self, event: Event) -> str:
        worker_id = str(event.payload.get("worker_id") or "")
        if not self.is_active(worker_id):
            raise UnknownWorker(f"worker {worker_id!r} does not exist")
        return worker_id

    def _check_post_published(self, event: Event) -> tuple[Post, RecipientSet]:
        taxonomy = self._require_taxonomy()
        try:
            post = Post.from_json_obj(event.payload["post"])
        except (KeyError, ValueError, TypeError) as exc:
            raise single_error("post", "invalid_post", str(exc)) from exc
        if post.post_id in self.posts:
            raise single_error(
                "post.post_id", "duplicate_post_id", f"post {post.post_id!r} already exists"
            )
        if not self.is_active(post.author):
            raise single_error("post.author", "unknown_worker", f"unknown author {post.author!r}")
        validate_post_draft(
            post_to_draft_obj(post),
            taxonomy,
            author=post.author,
            known_workers=self.active_worker_ids(),
        )
        recipients = eligible_recipients(
            post,
            self.active_workers(),
            self.presence,
            self.plant_map,
            now=event.at,
            ttl=self.presence_ttl,
        )
        declared = RecipientSet.from_json_obj(
            {"reasons": event.payload.get("reasons", {})}
        )
        declared_ids = set(event.payload.get("reached", []))
        if declared != recipients or declared_ids != set(recipients.worker_ids):
            raise single_error(
                "reached",
                "recipient_mismatch",
                "declared recipient set does not match the routing computation",
            )
        return post, recipients

    def _check_availability_set(self, event: Event) -> tuple[str, str, Response]:
        post_id = str(event.payload.get("post_id") or "")
        thread = self.threads.get(post_id)
        if thread is None:
            raise UnknownPost(f"unknown post {post_id!r}")
        worker_id = str(event.payload.get("worker") or "")
        if worker_id not in thread.reached:
            raise NotReached(f"worker {worker_id!r} was not reached by post {post_id!r}")
        try:
            response = Response(event.payload.get("response"))
        except ValueError:
            raise single_error(
                "response", "invalid_response", "response must be accepted or declined"
            ) from None
        if response is Response.PENDING:
            raise single_error(
                "response", "invalid_response", "response must be accepted or declined"
            )
        current = thread.responses[worker_id]
        allowed = current is Response.PENDING or (
            current is Response.DECLINED and response is Response.ACCEPTED
        )
        if not allowed:
            raise AlreadyAccepted(
                f"response for {worker_id!r} already recorded as {current.value}"
            )
        return post_id, worker_id, response

    def _check_message_sent(self, event: Event) -> tuple[str, ChatMessage]:
        post_id = str(event.payload.get("post_id") or "")
        thread = self.threads.get(post_id)
        if thread is None:
            raise UnknownPost(f"unknown post {post_id!r}")
        sender = str(event.payload.get("sender") or "")
        author = self.posts[post_id].author
        if sender not in thread.members(author):
            raise NotMember(f"worker {sender!r} is not a member of thread {post_id!r}")
        body = str(event.payload.get("body") or "")
        raw_attachments = event.payload.get("attachments") or []
        try:
            attachments = tuple(_parse_attachment(a) for a in raw_attachments)
        except (KeyError, ValueError, TypeError) as exc:
            raise single_error("attachments", "invalid_attachment", str(exc)) from exc
        if not body and not attachments:
            raise single_error("body", "empty_message", "a message needs text or attachments")
        message = ChatMessage(
            seq=thread.next_seq,
            sender=sender,
            body=body,
            attachments=attachments,
            sent_at=event.at,
        )
        return post_id, message

    def _check_location_reported(self, event: Event) -> LocationReport:
        worker_id = str(event.payload.get("worker") or "")
        if not self.is_active(worker_id):
            raise UnknownWorker(f"worker {worker_id!r} does not exist")
        raw_at = event.payload.get("at")
        at = parse_timestamp(raw_at) if raw_at else event.at
        report = LocationReport(worker_id=worker_id, zone=str(event.payload.get("zone")), at=at)
        # validates the zone against the map without mutating
        report_location(self.presence, report, self.plant_map)
        return report

    # -- event application ---------------------------------------------------

    def apply(self, event: Event) -> dict:
        """Validate and fold one event; returns kind-specific results
        (assigned message seq, created worker id, ...)."""
        parsed = self.check(event)
        return self.apply_checked(event, parsed)

    def apply_checked(self, event: Event, parsed) -> dict:
        result: dict = {}
        kind = event.kind
        if kind == "taxonomy_defined":
            self.taxonomy = parsed
        elif kind == "map_defined":
            self.plant_map = parsed
        elif kind == "worker_created":
            self.workers[parsed.worker_id] = parsed
            self.workers_created += 1
            result["worker_id"] = parsed.worker_id
        elif kind == "worker_updated":
            self.workers[parsed.worker_id] = parsed
            result["worker_id"] = parsed.worker_id
        elif kind == "worker_removed":
            self.removed_workers.add(parsed)
            result["worker_id"] = parsed
        elif kind == "post_published":
            post, recipients = parsed
            self.posts[post.post_id] = post
            self.threads[post.post_id] = Thread.new(post.post_id, recipients.worker_ids)
            self.posts_published += 1
            result["post_id"] = post.post_id
            result["recipients"] = recipients
        elif kind == "availability_set":
            post_id, worker_id, response = parsed
            self.threads[post_id] = self.threads[post_id].with_response(worker_id, response)
            result["post_id"] = post_id
            result["response"] = response
        elif kind == "message_sent":
            post_id, message = parsed
            self.threads[post_id] = self.threads[post_id].with_message(message)
            result["seq"] = message.seq
            result["message"] = message
        elif kind == "location_reported":
            self.presence = self.presence.with_report(parsed)
            result["zone"] = parsed.zone
        else:  # pragma: no cover - check() rejects unknown kinds
            raise ValueError(f"unhandled kind {kind}")
        self.applied_seq = event.seq
        return result

    # -- serialization (snapshots, equality in tests) -------------------------

    def to_json_obj(self) -> dict:
        return {
            "applied_seq": self.applied_seq,
            "workers_created": self.workers_created,
            "posts_published": self.posts_published,
            "taxonomy": self.taxonomy.to_json_obj() if self.taxonomy else None,
            "plant_map": self.plant_map.to_json_obj(),
            "workers": {w: r.to_json_obj() for w, r in sorted(self.workers.items())},
            "removed_workers": sorted(self.removed_workers),
            "posts": {p: post.to_json_obj() for p, post in sorted(self.posts.items())},
            "threads": {p: t.to_json_obj() for p, t in sorted(self.threads.items())},
            "presence": self.presence.to_json_obj(),
        }

    @classmethod
    def from_json_obj(
        cls, obj: Mapping, *, presence_ttl: timedelta = DEFAULT_PRESENCE_TTL
    ) -> "MaterializedState":
        state = cls(presence_ttl=presence_ttl)
        state.applied_seq = int(obj["applied_seq"])
        state.workers_created = int(obj["workers_created"])
        state.posts_published = int(obj["posts_published"])
        state.taxonomy = Taxonomy.from_json_obj(obj["taxonomy"]) if obj["taxonomy"] else None
        state.plant_map = PlantMap.from_json_obj(obj["plant_map"])
        state.workers = {
            w: WorkerRecord.from_json_obj(r) for w, r in obj.get("workers", {}).items()
        }
        state.removed_workers = set(obj.get("removed_workers", []))
        state.posts = {p: Post.from_json_obj(o) for p, o in obj.get("posts", {}).items()}
        state.threads = {p: Thread.from_json_obj(o) for p, o in obj.get("threads", {}).items()}
        state.presence = PresenceView.from_json_obj(obj.get("presence", {}))
        return state


def _parse_attachment(obj) -> Attachment:
    return obj if isinstance(obj, Attachment) else Attachment.from_json_obj(obj)


class EventStore:
    """Append-only log on disk plus the live materialized state.

    One serialized writer; every append is durably written (flush+fsync)
    before it is acknowledged or folded into the live state.
    """

    def __init__(
        self,
        data_dir: str | Path,
        *,
        presence_ttl: timedelta = DEFAULT_PRESENCE_TTL,
        fsync: bool = True,
    ):
        self.data_dir = Path(data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)
        self.log_path = self.data_dir / LOG_FILENAME
        self.snapshot_dir = self.data_dir / SNAPSHOT_DIRNAME
        self.presence_ttl = presence_ttl
        self.fsync = fsync
        self._write_lock = threading.Lock()
        self._events: list[Event] = []
        self.state = MaterializedState(presence_ttl=presence_ttl)
        self._recover()
        self._log_file = open(self.log_path, "ab")

    # -- recovery ------------------------------------------------------------

    def _recover(self) -> None:
        if not self.log_path.exists():
            self.log_path.touch()
            return
        raw = self.log_path.read_bytes()
        if not raw:
            return
        lines = raw.split(b"\n")
        trailing = lines.pop() if lines else b""  # bytes after the final newline
        offset = 0
        events: list[Event] = []
        torn_at: int | None = None
        for index, line in enumerate(lines):
            try:
                event = decode_line(line + b"\n")
            except (ValueError, KeyError, json.JSONDecodeError) as exc:
                if index == len(lines) - 1 and not trailing:
                    torn_at = offset
                    break
                raise CorruptLog(index + 1, str(exc)) from exc
            if event.seq != index + 1:
                raise CorruptLog(index + 1, f"expected seq {index + 1}, found {event.seq}")
            events.append(event)
            offset += len(line) + 1
        if trailing and torn_at is None:
            torn_at = offset  # partial write without newline
        if torn_at is not None:
            logger.warning("dropping torn final record at byte %d of %s", torn_at, self.log_path)
            with open(self.log_path, "r+b") as fh:
                fh.truncate(torn_at)
        for event in events:
            self.state.apply(event)
        self._events = events

    # -- authorization -------------------------------------------------------

    def _authorize(self, actor: str, kind: str, payload: Mapping) -> None:
        if actor == SYSTEM_ACTOR:
            return
        if kind in ADMIN_KINDS:
            worker = self.state.workers.get(actor)
            if (
                worker is None
                or actor in self.state.removed_workers
                or not worker.is_admin
            ):
                raise NotAdmin(f"actor {actor!r} is not an administrator")
            return
        bound_field = ACTOR_FIELD.get(kind)
        if bound_field is None:
            raise single_error("kind", "unknown_kind", f"unknown event kind {kind!r}")
        if not self.state.is_active(actor):
            raise ActorMismatch(f"actor {actor!r} is not an active worker")
        if str(payload.get(bound_field)) != actor:
            raise ActorMismatch(
                f"{kind} events must be appended by the {bound_field} they name"
            )

    # -- the single writer ---------------------------------------------------

    def append(self, kind: str, payload: Mapping, *, actor: str, at: datetime) -> tuple[int, dict]:
        """Authorize, validate, durably write, then fold one event.

        Returns (assigned global seq, kind-specific apply result).
        """
        with self._write_lock:
            self._authorize(actor, kind, payload)
            event = Event(
                seq=self.state.applied_seq + 1, at=at, kind=kind, payload=dict(payload)
            )
            parsed = self.state.check(event)
            line = event.encode_line()
            self._log_file.write(line)
            self._log_file.flush()
            if self.fsync:
                os.fsync(self._log_file.fileno())
            result = self.state.apply_checked(event, parsed)
            self._events.append(event)
            return event.seq, result

    @property
    def events(self) -> tuple[Event, ...]:
        return tuple(self._events)

    def close(self) -> None:
        self._log_file.close()

    # -- replay & snapshots ----------------------------------------------------

    @staticmethod
    def replay(
        events: Iterable[Event], *, presence_ttl: timedelta = DEFAULT_PRESENCE_TTL
    ) -> MaterializedState:
        """Fold a well-formed event sequence into a fresh state."""
        state = MaterializedState(presence_ttl=presence_ttl)
        for event in events:
            if event.seq != state.applied_seq + 1:
                raise CorruptLog(event.seq, f"expected seq {state.applied_seq + 1}")
            state.apply(event)
        return state

    def snapshot(self, upto_seq: int | None = None) -> Path:
        """Write a checksummed snapshot of the state folded up to a seq."""
        if upto_seq is None:
            upto_seq = self.state.applied_seq
        if upto_seq > self.state.applied_seq:
            raise ValueError(f"cannot snapshot future seq {upto_seq}")
        if upto_seq == self.state.applied_seq:
            state_obj = self.state.to_json_obj()
        else:
            prefix = [e for e in self._events if e.seq <= upto_seq]
            state_obj = self.replay(prefix, presence_ttl=self.presence_ttl).to_json_obj()
        body = {"seq": upto_seq, "state": state_obj}
        checksum = hashlib.sha256(canonical_dumps(body).encode("utf-8")).hexdigest()
        self.snapshot_dir.mkdir(parents=True, exist_ok=True)
        path = self.snapshot_dir / f"snapshot-{upto_seq:08d}.json"
        content = canonical_dumps({"body": body, "checksum": checksum})
        tmp = path.with_suffix(".tmp")
        tmp.write_text(content, encoding="utf-8")
        tmp.replace(path)
        return path

    def load_snapshot(self, path: str | Path) -> tuple[MaterializedState, int]:
        """Read a snapshot back, verifying its checksum."""
        try:
            obj = json.loads(Path(path).read_text(encoding="utf-8"))
            body = obj["body"]
            checksum = obj["checksum"]
        except (OSError, ValueError, KeyError, TypeError) as exc:
            raise CorruptSnapshot(f"unreadable snapshot {path}: {exc}") from exc
        computed = hashlib.sha256(canonical_dumps(body).encode("utf-8")).hexdigest()
        if computed != checksum:
            raise CorruptSnapshot(f"checksum mismatch in snapshot {path}")
        state = MaterializedState.from_json_obj(body["state"], presence_ttl=self.presence_ttl)
        return state, int(body["seq"])

    # -- guarded reads ---------------------------------------------------------

    def _require_admin_reader(self, actor: str) -> None:
        if actor == SYSTEM_ACTOR:
            return
        worker = self.state.workers.get(actor)
        if worker is None or actor in self.state.removed_workers or not worker.is_admin:
            raise NotAdmin(f"actor {actor!r} may not read the raw database")

    def export_log(self, actor: str) -> str:
        """The raw line-delimited log; administrators only."""
        self._require_admin_reader(actor)
        return b"".join(e.encode_line() for e in self._events).decode("utf-8")

    def worker_records(self, actor: str) -> list[WorkerRecord]:
        """Full worker records including credential metadata; admins only."""
        self._require_admin_reader(actor)
        return self.workers_sorted()

    def workers_sorted(self) -> list[WorkerRecord]:
        return [self.state.workers[w] for w in sorted(self.state.workers)]
