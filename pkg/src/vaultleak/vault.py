"""Plaintext vault data model: credentials, folders, sharing, duplicate metrics.

A vault is an ordered list of credentials. Each credential carries a stable id
(preserved across sharing), plaintext url/username fields, a password held as
an exact byte string, and an ordered attachment list. Timestamps are logical
integers; nothing here touches wall-clock time, so every operation is
deterministic and replayable.

Duplicate-password metrics come in four flavours, because deployed clients
disagree about what "number of duplicates" means:

* ``PAIR_COUNT`` counts unordered pairs of entries with equal passwords.
* ``DISTINCT_REUSED_VALUES`` counts distinct password values used twice or
  more (a third copy of a value does not move the metric).
* ``ENTRIES_WITH_REUSE`` counts entries whose password value is used twice
  or more.
* ``PER_ENTRY_FLAGS`` reports one boolean per entry.

Passwords are compared as exact byte strings; no normalization.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Optional, Union


class DupSemantics(Enum):
    """How a client aggregates password reuse into its reported metric."""

    PAIR_COUNT = "pair_count"
    DISTINCT_REUSED_VALUES = "distinct_reused_values"
    ENTRIES_WITH_REUSE = "entries_with_reuse"
    PER_ENTRY_FLAGS = "per_entry_flags"


# Scalar count, or one (credential id, reused) flag per vault entry.
MetricValue = Union[int, list]


class ShareError(Exception):
    """A share-channel update touched a share that was never accepted."""


@dataclass(frozen=True)
class Attachment:
    """A named binary file attached to a credential.

    Content may be empty; the filename may not.
    """

    filename: str
    content: bytes

    def __post_init__(self) -> None:
        if not self.filename:
            raise ValueError("attachment filename must be non-empty")


@dataclass
class Credential:
    id: str
    url: str = ""
    username: str = ""
    password: bytes = b""
    attachments: list[Attachment] = field(default_factory=list)
    shared_by: Optional[str] = None  # None = personal entry
    folder: Optional[str] = None
    last_modified: int = 0

    @property
    def is_shared(self) -> bool:
        return self.shared_by is not None

    def copy(self) -> "Credential":
        return replace(self, attachments=list(self.attachments))


@dataclass
class Folder:
    id: str
    owner: str
    members: tuple[str, ...] = ()


@dataclass
class Vault:
    """Ordered credential store plus folder definitions and a logical clock.

    ``accepted_folders`` and ``accepted_entry_ids`` record which share
    channels the owner has approved; updates arriving through any other
    channel are rejected.
    """

    entries: list[Credential] = field(default_factory=list)
    folders: list[Folder] = field(default_factory=list)
    clock: int = 0
    accepted_folders: set[str] = field(default_factory=set)
    accepted_entry_ids: set[str] = field(default_factory=set)

    def __post_init__(self) -> None:
        ids = [e.id for e in self.entries]
        if len(set(ids)) != len(ids):
            raise ValueError("credential ids must be unique within a vault")
        folder_ids = {f.id for f in self.folders}
        for e in self.entries:
            if e.folder is not None and e.folder not in folder_ids:
                raise ValueError(f"entry {e.id!r} references unknown folder {e.folder!r}")

    def entry(self, credential_id: str) -> Credential:
        for e in self.entries:
            if e.id == credential_id:
                return e
        raise KeyError(credential_id)

    def has_entry(self, credential_id: str) -> bool:
        return any(e.id == credential_id for e in self.entries)

    def personal_entries(self) -> list[Credential]:
        return [e for e in self.entries if not e.is_shared]

    def tick(self) -> int:
        self.clock += 1
        return self.clock


def dup_pair_count(vault: Vault) -> int:
    """Number of unordered pairs of entries holding the same password bytes."""
    counts = Counter(e.password for e in vault.entries)
    return sum(k * (k - 1) // 2 for k in counts.values())


def _scoped_counts(entries: list[Credential]) -> Counter:
    return Counter(e.password for e in entries)


def dup_metric(vault: Vault, semantics: DupSemantics, entries: Optional[list[Credential]] = None) -> MetricValue:
    """Compute the duplicate metric under the given semantics.

    ``entries`` restricts the computation to a subset of the vault (the
    personal-only mitigation); by default all entries are counted.
    """
    if entries is None:
        entries = vault.entries
    counts = _scoped_counts(entries)
    if semantics is DupSemantics.PAIR_COUNT:
        return sum(k * (k - 1) // 2 for k in counts.values())
    if semantics is DupSemantics.DISTINCT_REUSED_VALUES:
        return sum(1 for k in counts.values() if k >= 2)
    if semantics is DupSemantics.ENTRIES_WITH_REUSE:
        return sum(1 for e in entries if counts[e.password] >= 2)
    if semantics is DupSemantics.PER_ENTRY_FLAGS:
        return [(e.id, counts[e.password] >= 2) for e in entries]
    raise ValueError(semantics)


def metric_scalar(value: MetricValue) -> int:
    """Collapse a metric value to a single integer (flag lists count trues)."""
    if isinstance(value, int):
        return value
    return sum(1 for _, reused in value if reused)


@dataclass(frozen=True)
class ShareUpdate:
    """One create/update/delete arriving over an accepted share channel.

    ``create`` requires ``folder`` (entries can only be created inside an
    accepted shared folder; fresh individual shares would need a new
    acceptance, which is out of band). ``update`` mutates only the fields
    that are not None. ``touch`` re-writes an entry without changing it,
    which still advances its timestamp and forces a save.
    """

    kind: str  # "create" | "update" | "delete" | "touch"
    credential_id: str
    sender: str = ""
    url: Optional[str] = None
    username: Optional[str] = None
    password: Optional[bytes] = None
    attachments: Optional[list[Attachment]] = None
    folder: Optional[str] = None


def apply_share_update(vault: Vault, update: ShareUpdate) -> Vault:
    """Apply a share-channel update to the vault, in place.

    The share (folder or individual entry) must have been accepted
    beforehand; anything else raises :class:`ShareError`. Ids are preserved
    across updates, and every mutation advances the vault clock and the
    entry's ``last_modified``.
    """
    if update.kind == "create":
        if update.folder is None or update.folder not in vault.accepted_folders:
            raise ShareError(f"create outside an accepted shared folder: {update.folder!r}")
        if vault.has_entry(update.credential_id):
            raise ShareError(f"credential id already present: {update.credential_id!r}")
        now = vault.tick()
        vault.entries.append(
            Credential(
                id=update.credential_id,
                url=update.url or "",
                username=update.username or "",
                password=update.password or b"",
                attachments=list(update.attachments or []),
                shared_by=update.sender,
                folder=update.folder,
                last_modified=now,
            )
        )
        return vault

    if not vault.has_entry(update.credential_id):
        raise ShareError(f"no such shared credential: {update.credential_id!r}")
    target = vault.entry(update.credential_id)
    accepted = (target.folder is not None and target.folder in vault.accepted_folders) or (
        target.id in vault.accepted_entry_ids
    )
    if not target.is_shared or not accepted:
        raise ShareError(f"update to a share that was never accepted: {update.credential_id!r}")

    if update.kind == "delete":
        vault.tick()
        vault.entries.remove(target)
        return vault
    if update.kind in ("update", "touch"):
        now = vault.tick()
        if update.url is not None:
            target.url = update.url
        if update.username is not None:
            target.username = update.username
        if update.password is not None:
            target.password = update.password
        if update.attachments is not None:
            target.attachments = list(update.attachments)
        target.last_modified = now
        return vault
    raise ValueError(f"unknown update kind: {update.kind!r}")
