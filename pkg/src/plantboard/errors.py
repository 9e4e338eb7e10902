"""Error hierarchy for the whole service.

Every error carries a stable ``error_code`` and the HTTP status it maps to
on the wire; validation failures additionally carry the full list of field
violations so a client can mark every bad field in one round trip.
"""

from __future__ import annotations

from dataclasses import dataclass


class PlantboardError(Exception):
    """Base class; subclasses pin error_code and the wire status."""

    error_code = "internal_error"
    http_status = 500

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message

    def to_wire(self) -> dict:
        return {"error_code": self.error_code, "message": self.message}


@dataclass(frozen=True)
class FieldError:
    """One violated field: which field, which rule, human-readable detail."""

    field: str
    code: str
    message: str

    def to_json_obj(self) -> dict:
        return {"field": self.field, "code": self.code, "message": self.message}


class ValidationErrors(PlantboardError):
    """All violations of a draft at once (never fail-fast)."""

    error_code = "validation_error"
    http_status = 400

    def __init__(self, errors: list[FieldError]):
        if not errors:
            raise ValueError("ValidationErrors requires at least one field error")
        self.errors = list(errors)
        detail = "; ".join(f"{e.field}: {e.message}" for e in self.errors)
        super().__init__(f"validation failed: {detail}")

    def codes(self) -> set[str]:
        return {e.code for e in self.errors}

    def fields(self) -> set[str]:
        return {e.field for e in self.errors}

    def to_wire(self) -> dict:
        wire = super().to_wire()
        wire["fields"] = [e.to_json_obj() for e in self.errors]
        return wire


class InvalidCredentials(PlantboardError):
    error_code = "invalid_credentials"
    http_status = 401


class SessionExpired(PlantboardError):
    error_code = "session_expired"
    http_status = 401


class AccountDisabled(PlantboardError):
    error_code = "account_disabled"
    http_status = 403


class NotAdmin(PlantboardError):
    error_code = "not_admin"
    http_status = 403


class ActorMismatch(PlantboardError):
    error_code = "actor_mismatch"
    http_status = 403


class NotReached(PlantboardError):
    error_code = "not_reached"
    http_status = 403


class NotMember(PlantboardError):
    error_code = "not_member"
    http_status = 403


class PostNotViewable(PlantboardError):
    error_code = "post_not_viewable"
    http_status = 403


class UnknownPost(PlantboardError):
    error_code = "unknown_post"
    http_status = 404


class UnknownWorker(PlantboardError):
    error_code = "unknown_worker"
    http_status = 404


class UnknownBlob(PlantboardError):
    error_code = "unknown_blob"
    http_status = 404


class UnknownZone(PlantboardError):
    error_code = "unknown_zone"
    http_status = 400


class MachineUnmapped(PlantboardError):
    error_code = "machine_unmapped"
    http_status = 400


class InvalidTransition(PlantboardError):
    error_code = "invalid_transition"
    http_status = 409

    def __init__(self, state: str, action: str):
        super().__init__(f"action {action!r} is not legal in state {state!r}")
        self.state = state
        self.action = action


class AlreadyAccepted(PlantboardError):
    error_code = "already_accepted"
    http_status = 409


class WouldOrphanReferences(PlantboardError):
    """Redefinition would leave workers/posts referencing removed vocabulary."""

    error_code = "would_orphan_references"
    http_status = 409

    def __init__(self, dangling: list[str]):
        self.dangling = sorted(dangling)
        super().__init__(
            "redefinition would orphan references held by: " + ", ".join(self.dangling)
        )

    def to_wire(self) -> dict:
        wire = super().to_wire()
        wire["dangling"] = self.dangling
        return wire


class CorruptLog(PlantboardError):
    error_code = "corrupt_log"
    http_status = 500

    def __init__(self, seq: int, detail: str):
        super().__init__(f"event log corrupt at seq {seq}: {detail}")
        self.seq = seq


class CorruptSnapshot(PlantboardError):
    error_code = "corrupt_snapshot"
    http_status = 500


class StorageFailure(PlantboardError):
    error_code = "storage_failure"
    http_status = 500


def single_error(field: str, code: str, message: str) -> ValidationErrors:
    return ValidationErrors([FieldError(field, code, message)])
