"""Zone-graph proximity queries and location report handling.

The plant is modeled as an undirected graph of zones; proximity is hop
count along shortest paths. Workers report the zone they entered (or
``off_site``); the newest report per worker wins regardless of arrival
order, and reports older than a TTL resolve to off site.
"""

from __future__ import annotations

from collections import deque
from datetime import datetime, timedelta

from .domain import OFF_SITE, LocationReport, PlantMap, PresenceView
from .errors import MachineUnmapped, UnknownZone

DEFAULT_PRESENCE_TTL = timedelta(hours=8)


def zone_distance(plant_map: PlantMap, a: str, b: str) -> int | None:
    """Shortest hop count between two zones; None when disconnected."""
    if a not in plant_map.zones:
        raise UnknownZone(f"unknown zone {a!r}")
    if b not in plant_map.zones:
        raise UnknownZone(f"unknown zone {b!r}")
    if a == b:
        return 0
    seen = {a: 0}
    queue = deque([a])
    while queue:
        current = queue.popleft()
        for neighbor in plant_map.neighbors(current):
            if neighbor in seen:
                continue
            seen[neighbor] = seen[current] + 1
            if neighbor == b:
                return seen[neighbor]
            queue.append(neighbor)
    return None


def machine_zone(plant_map: PlantMap, machine: str) -> str:
    zone = plant_map.zone_of_machine(machine)
    if zone is None:
        raise MachineUnmapped(f"machine {machine!r} has no zone assignment")
    return zone


def report_location(
    presence: PresenceView, report: LocationReport, plant_map: PlantMap
) -> PresenceView:
    """Fold one report into the view; older-than-current reports are ignored."""
    if report.zone != OFF_SITE and report.zone not in plant_map.zones:
        raise UnknownZone(f"unknown zone {report.zone!r}")
    return presence.with_report(report)


def workers_near(
    machine: str,
    max_hops: int,
    presence: PresenceView,
    plant_map: PlantMap,
    *,
    now: datetime | None = None,
    ttl: timedelta | None = None,
) -> frozenset[str]:
    """Workers whose current zone is within max_hops of the machine's zone.

    Off-site workers (no report, explicit off_site, or stale report when a
    TTL is applied) are never included.
    """
    center = machine_zone(plant_map, machine)
    near = set()
    for worker_id in presence.reports:
        zone = presence.zone_of(worker_id, now=now, ttl=ttl)
        if zone == OFF_SITE:
            continue
        distance = zone_distance(plant_map, zone, center)
        if distance is not None and distance <= max_hops:
            near.add(worker_id)
    return frozenset(near)
