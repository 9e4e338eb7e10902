"""Domain types, their invariants, and draft validation.

Everything here is an immutable value: constructing an object with data
that breaks a structural invariant raises ValueError (a programming
error), while validating an untrusted draft against the taxonomy goes
through ``validate_worker_record`` / ``validate_post_draft``, which
collect every violation and raise ``ValidationErrors`` (an expected,
reportable failure). Validation never fails fast: the error list names
each bad field so a client can mark them all in one round trip.
"""

from __future__ import annotations

from collections.abc import Collection, Mapping
from dataclasses import dataclass, field, replace
from datetime import datetime, timedelta
from enum import Enum
from typing import Any

from .canonical import format_timestamp, parse_timestamp, sorted_list
from .errors import FieldError, ValidationErrors
from .passwords import PasswordDigest

OFF_SITE = "off_site"

# Applied when a client enables proximity filtering without a hop count:
# "same or adjacent zone".
DEFAULT_PROXIMITY_HOPS = 1

MANDATORY_POST_FIELDS = ("title", "error_code", "machine", "required_expertises", "body")


class MediaType(str, Enum):
    IMAGE = "image"
    VIDEO = "video"
    AUDIO = "audio"
    TEXT = "text"


class Response(str, Enum):
    PENDING = "pending"
    ACCEPTED = "accepted"
    DECLINED = "declined"


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise ValueError(message)


@dataclass(frozen=True)
class Taxonomy:
    """Admin-defined vocabularies: expertise tags, machine duties, and the
    totally ordered experience ladder (rank 1..n ascending)."""

    expertises: frozenset[str]
    duties: frozenset[str]
    experience_levels: tuple[str, ...]

    def __post_init__(self):
        _require(len(self.experience_levels) >= 1, "at least one experience level required")
        _require(
            len(set(self.experience_levels)) == len(self.experience_levels),
            "experience level names must be unique",
        )
        for name in self.experience_levels:
            _require(bool(name) and isinstance(name, str), "experience level names must be nonempty")
        for tag in self.expertises:
            _require(bool(tag) and isinstance(tag, str), "expertise tags must be nonempty strings")
        for duty in self.duties:
            _require(bool(duty) and isinstance(duty, str), "duty names must be nonempty strings")

    @property
    def max_rank(self) -> int:
        return len(self.experience_levels)

    def has_rank(self, rank: Any) -> bool:
        return isinstance(rank, int) and not isinstance(rank, bool) and 1 <= rank <= self.max_rank

    def to_json_obj(self) -> dict:
        return {
            "expertises": sorted_list(self.expertises),
            "duties": sorted_list(self.duties),
            "experience_levels": list(self.experience_levels),
        }

    @classmethod
    def from_json_obj(cls, obj: Mapping) -> "Taxonomy":
        errors: list[FieldError] = []
        expertises = _string_list(obj.get("expertises", []), "expertises", errors, unique=True)
        duties = _string_list(obj.get("duties", []), "duties", errors, unique=True)
        levels = _string_list(
            obj.get("experience_levels", []), "experience_levels", errors, unique=True
        )
        if not levels:
            errors.append(
                FieldError("experience_levels", "missing_field", "at least one level required")
            )
        if errors:
            raise ValidationErrors(errors)
        return cls(
            expertises=frozenset(expertises),
            duties=frozenset(duties),
            experience_levels=tuple(levels),
        )


@dataclass(frozen=True)
class WorkerRecord:
    """One worker: identity, login key, experience rank, skill sets.

    ``password_digest`` is a salted hash record; plaintext is hashed
    before any record is built and never stored anywhere.
    """

    worker_id: str
    name: str
    surname: str
    email: str
    password_digest: PasswordDigest | None
    experience: int
    expertises: frozenset[str]
    duties: frozenset[str]
    is_admin: bool = False

    def __post_init__(self):
        _require(bool(self.worker_id), "worker_id must be nonempty")
        _require(bool(self.email), "email must be nonempty")

    def to_json_obj(self, *, include_digest: bool = True) -> dict:
        obj = {
            "worker_id": self.worker_id,
            "name": self.name,
            "surname": self.surname,
            "email": self.email,
            "experience": self.experience,
            "expertises": sorted_list(self.expertises),
            "duties": sorted_list(self.duties),
            "is_admin": self.is_admin,
        }
        if include_digest:
            obj["password_digest"] = (
                self.password_digest.to_json_obj() if self.password_digest else None
            )
        return obj

    def public_json_obj(self) -> dict:
        """The derived view ordinary workers may read: attribution data only."""
        return {
            "worker_id": self.worker_id,
            "name": self.name,
            "surname": self.surname,
            "experience": self.experience,
            "expertises": sorted_list(self.expertises),
            "duties": sorted_list(self.duties),
        }

    @classmethod
    def from_json_obj(cls, obj: Mapping) -> "WorkerRecord":
        digest = obj.get("password_digest")
        return cls(
            worker_id=str(obj["worker_id"]),
            name=str(obj.get("name", "")),
            surname=str(obj.get("surname", "")),
            email=str(obj.get("email", "")),
            password_digest=PasswordDigest.from_json_obj(digest) if digest else None,
            experience=int(obj["experience"]),
            expertises=frozenset(obj.get("expertises", [])),
            duties=frozenset(obj.get("duties", [])),
            is_admin=bool(obj.get("is_admin", False)),
        )


@dataclass(frozen=True)
class Attachment:
    media_type: MediaType
    byte_length: int
    content_ref: str

    def __post_init__(self):
        _require(isinstance(self.media_type, MediaType), "media_type must be a MediaType")
        _require(self.byte_length > 0, "byte_length must be positive")
        _require(bool(self.content_ref), "content_ref must be nonempty")

    def to_json_obj(self) -> dict:
        return {
            "media_type": self.media_type.value,
            "byte_length": self.byte_length,
            "content_ref": self.content_ref,
        }

    @classmethod
    def from_json_obj(cls, obj: Mapping) -> "Attachment":
        return cls(
            media_type=MediaType(obj["media_type"]),
            byte_length=int(obj["byte_length"]),
            content_ref=str(obj["content_ref"]),
        )


@dataclass(frozen=True)
class AuthorFilters:
    """Conjunctive addressee filters an author attaches to a post.

    ``max_zone_hops`` measures proximity to the post's machine in the
    zone graph and implies ``require_in_plant``.
    """

    min_experience: int | None = None
    require_in_plant: bool = False
    max_zone_hops: int | None = None

    def __post_init__(self):
        if self.max_zone_hops is not None:
            _require(self.max_zone_hops >= 0, "max_zone_hops must be nonnegative")
            _require(self.require_in_plant, "max_zone_hops implies require_in_plant")
        if self.min_experience is not None:
            _require(self.min_experience >= 1, "min_experience ranks start at 1")

    @property
    def empty(self) -> bool:
        return (
            self.min_experience is None
            and not self.require_in_plant
            and self.max_zone_hops is None
        )

    def to_json_obj(self) -> dict:
        return {
            "min_experience": self.min_experience,
            "require_in_plant": self.require_in_plant,
            "max_zone_hops": self.max_zone_hops,
        }

    @classmethod
    def from_json_obj(cls, obj: Mapping) -> "AuthorFilters":
        hops = obj.get("max_zone_hops")
        if hops is True:  # proximity enabled without a value
            hops = DEFAULT_PROXIMITY_HOPS
        elif hops is not None:
            hops = int(hops)
        in_plant = bool(obj.get("require_in_plant", False)) or hops is not None
        min_exp = obj.get("min_experience")
        return cls(
            min_experience=int(min_exp) if min_exp is not None else None,
            require_in_plant=in_plant,
            max_zone_hops=hops,
        )


NO_FILTERS = AuthorFilters()


@dataclass(frozen=True)
class PostDraft:
    """A draft that passed validation, ready to be minted into a Post."""

    title: str
    error_code: str
    machine: str
    required_expertises: frozenset[str]
    receiver: str | None
    body: str
    attachments: tuple[Attachment, ...]
    filters: AuthorFilters


@dataclass(frozen=True)
class Post:
    """A published virtual-board entry. Receiver is the only optional field."""

    post_id: str
    author: str
    title: str
    error_code: str
    machine: str
    required_expertises: frozenset[str]
    receiver: str | None
    body: str
    attachments: tuple[Attachment, ...]
    filters: AuthorFilters
    published_at: datetime

    def __post_init__(self):
        _require(bool(self.post_id), "post_id must be nonempty")
        for name in MANDATORY_POST_FIELDS:
            _require(bool(getattr(self, name)), f"{name} must be nonempty")
        _require(self.receiver != self.author, "receiver must differ from author")

    @classmethod
    def from_draft(
        cls, draft: PostDraft, *, post_id: str, author: str, published_at: datetime
    ) -> "Post":
        return cls(
            post_id=post_id,
            author=author,
            title=draft.title,
            error_code=draft.error_code,
            machine=draft.machine,
            required_expertises=draft.required_expertises,
            receiver=draft.receiver,
            body=draft.body,
            attachments=draft.attachments,
            filters=draft.filters,
            published_at=published_at,
        )

    def to_json_obj(self) -> dict:
        return {
            "post_id": self.post_id,
            "author": self.author,
            "title": self.title,
            "error_code": self.error_code,
            "machine": self.machine,
            "required_expertises": sorted_list(self.required_expertises),
            "receiver": self.receiver,
            "body": self.body,
            "attachments": [a.to_json_obj() for a in self.attachments],
            "filters": self.filters.to_json_obj(),
            "published_at": format_timestamp(self.published_at),
        }

    @classmethod
    def from_json_obj(cls, obj: Mapping) -> "Post":
        return cls(
            post_id=str(obj["post_id"]),
            author=str(obj["author"]),
            title=str(obj["title"]),
            error_code=str(obj["error_code"]),
            machine=str(obj["machine"]),
            required_expertises=frozenset(obj["required_expertises"]),
            receiver=obj.get("receiver") or None,
            body=str(obj["body"]),
            attachments=tuple(Attachment.from_json_obj(a) for a in obj.get("attachments", [])),
            filters=AuthorFilters.from_json_obj(obj.get("filters", {})),
            published_at=parse_timestamp(obj["published_at"]),
        )


@dataclass(frozen=True)
class ChatMessage:
    seq: int
    sender: str
    body: str
    attachments: tuple[Attachment, ...]
    sent_at: datetime

    def __post_init__(self):
        _require(self.seq >= 1, "message seq starts at 1")
        _require(bool(self.body) or bool(self.attachments), "body or attachments required")

    def to_json_obj(self) -> dict:
        return {
            "seq": self.seq,
            "sender": self.sender,
            "body": self.body,
            "attachments": [a.to_json_obj() for a in self.attachments],
            "sent_at": format_timestamp(self.sent_at),
        }

    @classmethod
    def from_json_obj(cls, obj: Mapping) -> "ChatMessage":
        return cls(
            seq=int(obj["seq"]),
            sender=str(obj["sender"]),
            body=str(obj.get("body", "")),
            attachments=tuple(Attachment.from_json_obj(a) for a in obj.get("attachments", [])),
            sent_at=parse_timestamp(obj["sent_at"]),
        )


@dataclass(frozen=True)
class Thread:
    """A post's responses and chat. Membership = author plus accepters;
    the author is tracked on the post, not here."""

    post_id: str
    responses: dict[str, Response]
    messages: tuple[ChatMessage, ...]
    reached: frozenset[str]

    def __post_init__(self):
        _require(
            set(self.responses) <= self.reached,
            "every responder must be a reached worker",
        )
        for i, message in enumerate(self.messages):
            _require(message.seq == i + 1, "message seqs must be gapless from 1")

    def accepters(self) -> frozenset[str]:
        return frozenset(w for w, r in self.responses.items() if r is Response.ACCEPTED)

    def members(self, author: str) -> frozenset[str]:
        return self.accepters() | {author}

    def response_of(self, worker_id: str) -> Response | None:
        return self.responses.get(worker_id)

    @property
    def next_seq(self) -> int:
        return len(self.messages) + 1

    def with_response(self, worker_id: str, response: Response) -> "Thread":
        updated = dict(self.responses)
        updated[worker_id] = response
        return replace(self, responses=updated)

    def with_message(self, message: ChatMessage) -> "Thread":
        return replace(self, messages=self.messages + (message,))

    @classmethod
    def new(cls, post_id: str, reached: Collection[str]) -> "Thread":
        return cls(
            post_id=post_id,
            responses={w: Response.PENDING for w in reached},
            messages=(),
            reached=frozenset(reached),
        )

    def to_json_obj(self) -> dict:
        return {
            "post_id": self.post_id,
            "responses": {w: r.value for w, r in sorted(self.responses.items())},
            "messages": [m.to_json_obj() for m in self.messages],
            "reached": sorted_list(self.reached),
        }

    @classmethod
    def from_json_obj(cls, obj: Mapping) -> "Thread":
        return cls(
            post_id=str(obj["post_id"]),
            responses={w: Response(r) for w, r in obj.get("responses", {}).items()},
            messages=tuple(ChatMessage.from_json_obj(m) for m in obj.get("messages", [])),
            reached=frozenset(obj.get("reached", [])),
        )


@dataclass(frozen=True)
class PlantMap:
    """Zone adjacency graph plus machine-to-zone assignment.

    Adjacency is symmetric and irreflexive; pairs are stored normalized
    (lexicographically sorted) so equal maps serialize identically.
    """

    zones: frozenset[str]
    adjacency: frozenset[tuple[str, str]]
    machine_zone: dict[str, str]

    def __post_init__(self):
        _require(OFF_SITE not in self.zones, f"{OFF_SITE!r} is reserved and cannot be a zone")
        for a, b in self.adjacency:
            _require(a != b, "zones cannot be adjacent to themselves")
            _require(a < b, "adjacency pairs must be stored sorted")
            _require(a in self.zones and b in self.zones, "adjacency endpoints must be zones")
        for machine, zone in self.machine_zone.items():
            _require(zone in self.zones, f"machine {machine!r} mapped to unknown zone {zone!r}")

    def neighbors(self, zone: str) -> frozenset[str]:
        out = set()
        for a, b in self.adjacency:
            if a == zone:
                out.add(b)
            elif b == zone:
                out.add(a)
        return frozenset(out)

    def zone_of_machine(self, machine: str) -> str | None:
        return self.machine_zone.get(machine)

    @classmethod
    def empty(cls) -> "PlantMap":
        return cls(zones=frozenset(), adjacency=frozenset(), machine_zone={})

    def to_json_obj(self) -> dict:
        return {
            "zones": sorted_list(self.zones),
            "adjacency": [list(pair) for pair in sorted(self.adjacency)],
            "machines": dict(sorted(self.machine_zone.items())),
        }

    @classmethod
    def from_json_obj(cls, obj: Mapping) -> "PlantMap":
        errors: list[FieldError] = []
        zones = _string_list(obj.get("zones", []), "zones", errors, unique=True)
        zone_set = set(zones)
        if OFF_SITE in zone_set:
            errors.append(FieldError("zones", "reserved_zone", f"{OFF_SITE!r} is reserved"))
        pairs = set()
        for i, raw in enumerate(obj.get("adjacency", [])):
            if not isinstance(raw, (list, tuple)) or len(raw) != 2:
                errors.append(
                    FieldError(f"adjacency[{i}]", "invalid_edge", "edges are [zone, zone] pairs")
                )
                continue
            a, b = str(raw[0]), str(raw[1])
            if a == b:
                errors.append(FieldError(f"adjacency[{i}]", "invalid_edge", "self-loops not allowed"))
                continue
            if a not in zone_set or b not in zone_set:
                errors.append(
                    FieldError(f"adjacency[{i}]", "unknown_zone", f"unknown endpoint in {raw!r}")
                )
                continue
            pairs.add((min(a, b), max(a, b)))
        machines = {}
        for machine, zone in dict(obj.get("machines", {})).items():
            if str(zone) not in zone_set:
                errors.append(
                    FieldError(f"machines.{machine}", "unknown_zone", f"unknown zone {zone!r}")
                )
                continue
            machines[str(machine)] = str(zone)
        if errors:
            raise ValidationErrors(errors)
        return cls(zones=frozenset(zone_set), adjacency=frozenset(pairs), machine_zone=machines)


@dataclass(frozen=True)
class LocationReport:
    worker_id: str
    zone: str  # a plant zone or OFF_SITE
    at: datetime

    def to_json_obj(self) -> dict:
        return {
            "worker_id": self.worker_id,
            "zone": self.zone,
            "at": format_timestamp(self.at),
        }

    @classmethod
    def from_json_obj(cls, obj: Mapping) -> "LocationReport":
        return cls(
            worker_id=str(obj["worker_id"]),
            zone=str(obj["zone"]),
            at=parse_timestamp(obj["at"]),
        )


@dataclass(frozen=True)
class PresenceView:
    """Latest location report per worker, last-writer-wins by timestamp.

    A worker with no report ever is off site. With a ``now`` and ``ttl``,
    reports older than the cutoff also resolve to off site so ended
    shifts do not leave ghosts.
    """

    reports: dict[str, LocationReport] = field(default_factory=dict)

    def with_report(self, report: LocationReport) -> "PresenceView":
        current = self.reports.get(report.worker_id)
        if current is not None and report.at < current.at:
            return self  # stale report, ignore
        updated = dict(self.reports)
        updated[report.worker_id] = report
        return PresenceView(reports=updated)

    def zone_of(
        self,
        worker_id: str,
        *,
        now: datetime | None = None,
        ttl: timedelta | None = None,
    ) -> str:
        report = self.reports.get(worker_id)
        if report is None:
            return OFF_SITE
        if now is not None and ttl is not None and now - report.at > ttl:
            return OFF_SITE
        return report.zone

    def is_in_plant(
        self,
        worker_id: str,
        *,
        now: datetime | None = None,
        ttl: timedelta | None = None,
    ) -> bool:
        return self.zone_of(worker_id, now=now, ttl=ttl) != OFF_SITE

    @classmethod
    def empty(cls) -> "PresenceView":
        return cls(reports={})

    def to_json_obj(self) -> dict:
        return {
            "reports": {
                w: {"zone": r.zone, "at": format_timestamp(r.at)}
                for w, r in sorted(self.reports.items())
            }
        }

    @classmethod
    def from_json_obj(cls, obj: Mapping) -> "PresenceView":
        reports = {}
        for worker_id, entry in obj.get("reports", {}).items():
            reports[worker_id] = LocationReport(
                worker_id=worker_id,
                zone=str(entry["zone"]),
                at=parse_timestamp(entry["at"]),
            )
        return cls(reports=reports)


# --- draft validation -------------------------------------------------------


def _string_list(
    raw: Any, fieldname: str, errors: list[FieldError], *, unique: bool = False
) -> list[str]:
    if not isinstance(raw, (list, tuple, set, frozenset)):
        errors.append(FieldError(fieldname, "invalid_type", "expected an array of strings"))
        return []
    values = [str(v) for v in raw]
    for v in values:
        if not v:
            errors.append(FieldError(fieldname, "empty_value", "entries must be nonempty"))
            return []
    if unique and len(set(values)) != len(values):
        errors.append(FieldError(fieldname, "duplicate_value", "entries must be unique"))
        return []
    return values


def validate_worker_record(
    draft: Mapping,
    taxonomy: Taxonomy,
    *,
    existing_emails: Collection[str] = (),
) -> WorkerRecord:
    """Validate a worker draft against the taxonomy and email registry.

    Returns the validated record or raises ValidationErrors naming every
    violated field. ``existing_emails`` are the emails already registered
    (excluding the worker being updated, for updates).
    """
    errors: list[FieldError] = []

    worker_id = str(draft.get("worker_id") or "")
    if not worker_id:
        errors.append(FieldError("worker_id", "missing_field", "worker_id is required"))

    name = str(draft.get("name") or "")
    surname = str(draft.get("surname") or "")
    if not name:
        errors.append(FieldError("name", "empty_name", "name must be nonempty"))
    if not surname:
        errors.append(FieldError("surname", "empty_name", "surname must be nonempty"))

    email = str(draft.get("email") or "")
    if not email:
        errors.append(FieldError("email", "missing_field", "email is required"))
    elif email in existing_emails:
        errors.append(FieldError("email", "duplicate_email", f"email {email!r} already registered"))

    experience = draft.get("experience")
    if not taxonomy.has_rank(experience):
        errors.append(
            FieldError(
                "experience",
                "bad_experience_rank",
                f"rank must be an integer in 1..{taxonomy.max_rank}, got {experience!r}",
            )
        )

    expertises = _string_list(draft.get("expertises", []), "expertises", errors)
    for tag in expertises:
        if tag not in taxonomy.expertises:
            errors.append(
                FieldError("expertises", "unknown_expertise", f"unknown expertise {tag!r}")
            )
    duties = _string_list(draft.get("duties", []), "duties", errors)
    for duty in duties:
        if duty not in taxonomy.duties:
            errors.append(FieldError("duties", "unknown_duty", f"unknown duty {duty!r}"))

    digest_raw = draft.get("password_digest")
    digest: PasswordDigest | None = None
    if isinstance(digest_raw, PasswordDigest):
        digest = digest_raw
    elif isinstance(digest_raw, Mapping):
        try:
            digest = PasswordDigest.from_json_obj(digest_raw)
        except (KeyError, ValueError, TypeError):
            errors.append(
                FieldError("password_digest", "invalid_digest", "malformed digest record")
            )
    elif digest_raw is None:
        errors.append(
            FieldError("password_digest", "missing_field", "a password digest is required")
        )
    else:
        errors.append(FieldError("password_digest", "invalid_digest", "malformed digest record"))

    if errors:
        raise ValidationErrors(errors)

    return WorkerRecord(
        worker_id=worker_id,
        name=name,
        surname=surname,
        email=email,
        password_digest=digest,
        experience=int(experience),  # type: ignore[arg-type]
        expertises=frozenset(expertises),
        duties=frozenset(duties),
        is_admin=bool(draft.get("is_admin", False)),
    )


def validate_post_draft(
    draft: Mapping,
    taxonomy: Taxonomy,
    *,
    author: str,
    known_workers: Collection[str],
) -> PostDraft:
    """Validate a post draft: the five mandatory fields must be nonempty
    and taxonomy-consistent; the receiver is the only optional field.

    Raises ValidationErrors enumerating all missing or invalid fields at
    once. ``known_workers`` are the worker ids the receiver may name.
    """
    errors: list[FieldError] = []

    def text_field(name: str) -> str:
        value = draft.get(name)
        if value is None or not str(value):
            errors.append(FieldError(name, "missing_field", f"{name} is required"))
            return ""
        return str(value)

    title = text_field("title")
    error_code = text_field("error_code")
    machine = text_field("machine")
    body = text_field("body")

    raw_required = draft.get("required_expertises")
    required: list[str] = []
    if not raw_required:
        errors.append(
            FieldError("required_expertises", "missing_field", "required_expertises is required")
        )
    else:
        required = _string_list(raw_required, "required_expertises", errors)

    if machine and machine not in taxonomy.duties:
        errors.append(FieldError("machine", "unknown_machine", f"unknown machine {machine!r}"))
    for tag in required:
        if tag not in taxonomy.expertises:
            errors.append(
                FieldError("required_expertises", "unknown_expertise", f"unknown expertise {tag!r}")
            )

    receiver_raw = draft.get("receiver")
    receiver: str | None = str(receiver_raw) if receiver_raw else None
    if receiver is not None:
        if receiver == author:
            errors.append(
                FieldError("receiver", "receiver_is_author", "receiver cannot be the author")
            )
        elif receiver not in known_workers:
            errors.append(
                FieldError("receiver", "receiver_unknown", f"unknown receiver {receiver!r}")
            )

    attachments: list[Attachment] = []
    raw_attachments = draft.get("attachments") or []
    if not isinstance(raw_attachments, (list, tuple)):
        errors.append(FieldError("attachments", "invalid_type", "expected an array"))
        raw_attachments = []
    for i, raw in enumerate(raw_attachments):
        if isinstance(raw, Attachment):
            attachments.append(raw)
            continue
        try:
            attachments.append(Attachment.from_json_obj(raw))
        except (KeyError, ValueError, TypeError) as exc:
            errors.append(FieldError(f"attachments[{i}]", "invalid_attachment", str(exc)))

    filters = NO_FILTERS
    raw_filters = draft.get("filters")
    if isinstance(raw_filters, AuthorFilters):
        filters = raw_filters
    elif raw_filters:
        try:
            filters = AuthorFilters.from_json_obj(raw_filters)
        except (ValueError, TypeError) as exc:
            errors.append(FieldError("filters", "invalid_filters", str(exc)))
    if filters.min_experience is not None and not taxonomy.has_rank(filters.min_experience):
        errors.append(
            FieldError(
                "filters.min_experience",
                "bad_experience_rank",
                f"rank must be in 1..{taxonomy.max_rank}, got {filters.min_experience!r}",
            )
        )

    if errors:
        raise ValidationErrors(errors)

    return PostDraft(
        title=title,
        error_code=error_code,
        machine=machine,
        required_expertises=frozenset(required),
        receiver=receiver,
        body=body,
        attachments=tuple(attachments),
        filters=filters,
    )


def post_to_draft_obj(post: Post) -> dict:
    """Project a published post back to draft shape (for re-validation)."""
    return {
        "title": post.title,
        "error_code": post.error_code,
        "machine": post.machine,
        "required_expertises": sorted_list(post.required_expertises),
        "receiver": post.receiver,
        "body": post.body,
        "attachments": [a.to_json_obj() for a in post.attachments],
        "filters": post.filters.to_json_obj(),
    }
