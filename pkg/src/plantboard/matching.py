"""Pure recipient matching: who gets notified of a post, and what a
worker's hub feed contains.

Relevance is disjunctive — a worker matches a post if the post's machine
is among their duties OR their expertise set intersects the post's
required expertises. Author filters are conjunctive on top of that:
minimum experience rank, in-plant presence, and zone proximity to the
post's machine must all hold when set. A direct receiver bypasses
relevance but still has to pass the filters.

Everything here is a pure function over immutable snapshots; outputs are
deterministically ordered.
"""

from __future__ import annotations

from datetime import datetime, timedelta
from enum import Enum
from typing import Iterable, Mapping

from .canonical import format_timestamp, sorted_list
from .domain import (
    OFF_SITE,
    AuthorFilters,
    PlantMap,
    Post,
    PresenceView,
    Response,
    Thread,
    WorkerRecord,
)
from .presence import machine_zone, zone_distance


class Relevance(str, Enum):
    NONE = "none"
    DUTY_MATCH = "duty_match"
    EXPERTISE_MATCH = "expertise_match"
    BOTH = "both"


class RecipientReason(str, Enum):
    DUTY_MATCH = "duty_match"
    EXPERTISE_MATCH = "expertise_match"
    BOTH = "both"
    DIRECT_RECEIVER = "direct_receiver"


def relevance(worker: WorkerRecord, post: Post) -> Relevance:
    """Duty/expertise relevance of a post to a worker (OR semantics)."""
    duty = post.machine in worker.duties
    expertise = bool(worker.expertises & post.required_expertises)
    if duty and expertise:
        return Relevance.BOTH
    if duty:
        return Relevance.DUTY_MATCH
    if expertise:
        return Relevance.EXPERTISE_MATCH
    return Relevance.NONE


def experience_at_least(worker_rank: int, min_rank: int) -> bool:
    """True iff the worker's rank meets the minimum under the total order."""
    return worker_rank >= min_rank


def passes_filters(
    worker: WorkerRecord,
    filters: AuthorFilters,
    presence: PresenceView,
    plant_map: PlantMap,
    machine: str,
    *,
    now: datetime | None = None,
    ttl: timedelta | None = None,
) -> bool:
    """Conjunction of all present author filters; empty filters pass.

    Raises MachineUnmapped when a proximity filter names a machine with
    no zone assignment.
    """
    if filters.min_experience is not None:
        if not experience_at_least(worker.experience, filters.min_experience):
            return False
    if filters.require_in_plant:
        if presence.zone_of(worker.worker_id, now=now, ttl=ttl) == OFF_SITE:
            return False
    if filters.max_zone_hops is not None:
        center = machine_zone(plant_map, machine)
        zone = presence.zone_of(worker.worker_id, now=now, ttl=ttl)
        if zone == OFF_SITE:
            return False
        distance = zone_distance(plant_map, zone, center)
        if distance is None or distance > filters.max_zone_hops:
            return False
    return True


class RecipientSet:
    """The workers a post is routed to, with the reason each one matched."""

    def __init__(self, reasons: Mapping[str, RecipientReason]):
        self.reasons = dict(reasons)
        self.worker_ids = tuple(sorted(self.reasons))

    def __contains__(self, worker_id: str) -> bool:
        return worker_id in self.reasons

    def __len__(self) -> int:
        return len(self.worker_ids)

    def __eq__(self, other) -> bool:
        return isinstance(other, RecipientSet) and self.reasons == other.reasons

    def __repr__(self) -> str:
        return f"RecipientSet({self.reasons!r})"

    def to_json_obj(self) -> dict:
        return {
            "worker_ids": list(self.worker_ids),
            "reasons": {w: r.value for w, r in sorted(self.reasons.items())},
        }

    @classmethod
    def from_json_obj(cls, obj: Mapping) -> "RecipientSet":
        return cls({w: RecipientReason(r) for w, r in obj.get("reasons", {}).items()})


def eligible_recipients(
    post: Post,
    registry: Iterable[WorkerRecord],
    presence: PresenceView,
    plant_map: PlantMap,
    *,
    now: datetime | None = None,
    ttl: timedelta | None = None,
) -> RecipientSet:
    """Compute the recipient set for a post over a registry snapshot.

    With a receiver set, the set is at most {receiver} (relevance is
    bypassed, filters still apply). Otherwise: every worker other than
    the author with nonzero relevance who passes all author filters.
    """
    workers = {w.worker_id: w for w in registry}
    reasons: dict[str, RecipientReason] = {}

    if post.receiver is not None:
        receiver = workers.get(post.receiver)
        if receiver is not None and passes_filters(
            receiver, post.filters, presence, plant_map, post.machine, now=now, ttl=ttl
        ):
            reasons[receiver.worker_id] = RecipientReason.DIRECT_RECEIVER
        return RecipientSet(reasons)

    for worker in workers.values():
        if worker.worker_id == post.author:
            continue
        match = relevance(worker, post)
        if match is Relevance.NONE:
            continue
        if not passes_filters(
            worker, post.filters, presence, plant_map, post.machine, now=now, ttl=ttl
        ):
            continue
        reasons[worker.worker_id] = RecipientReason(match.value)
    return RecipientSet(reasons)


class FeedEntry:
    """One hub-feed row: the post summary plus this worker's own state."""

    def __init__(self, post: Post, *, response: Response | None, is_author: bool):
        self.post = post
        self.response = response
        self.is_author = is_author

    def to_json_obj(self) -> dict:
        return {
            "post_id": self.post.post_id,
            "title": self.post.title,
            "error_code": self.post.error_code,
            "machine": self.post.machine,
            "required_expertises": sorted_list(self.post.required_expertises),
            "author": self.post.author,
            "published_at": format_timestamp(self.post.published_at),
            "response": self.response.value if self.response else None,
            "is_author": self.is_author,
        }


def feed_for(
    worker_id: str,
    threads: Mapping[str, Thread],
    posts: Mapping[str, Post],
) -> list[FeedEntry]:
    """Posts where the worker was reached or is the author, newest first.

    Declining never removes a post from the feed; it only changes the
    response state shown (and stops further pushes elsewhere).
    """
    entries = []
    for post_id, thread in threads.items():
        post = posts[post_id]
        is_author = post.author == worker_id
        if not is_author and worker_id not in thread.reached:
            continue
        entries.append(
            FeedEntry(post, response=thread.response_of(worker_id), is_author=is_author)
        )
    entries.sort(key=lambda e: e.post.post_id)
    entries.sort(key=lambda e: e.post.published_at, reverse=True)
    return entries
