"""Discrete-event world: victim client, attacker share channel, observer taps.

Time is a logical tick counter; nothing depends on wall-clock time. The
attacker owns a share channel into the victim vault (an accepted shared
folder, or a fixed set of accepted individually-shared entries) and drives
the world by injecting batches of share updates. Each injection syncs into
the victim vault after the profile's sync delay and fires the downstream
client behavior: vault-health metric logs, URL icon fetches, and cloud-file
re-uploads, all appended to an observation queue.

Two taps are available. An eavesdropper sees metric-log bodies with parsed
content plus every network request; a network tap sees only endpoint labels
and payload sizes. The redaction happens at drain time, so code holding a
network-tap world can never reach parsed metric content.

The victim can also act on its own: :meth:`World.victim_noise` sets a rate
of background credential adds/edits per tick, each of which fires the same
downstream behavior as real activity.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Optional, Union

from . import codec
from .profiles import (
    AppProfile,
    IconPolicy,
    MetricFormat,
    MetricScope,
    MetricTrigger,
    Storage,
)
from .vault import (
    Credential,
    Folder,
    MetricValue,
    ShareUpdate,
    Vault,
    apply_share_update,
    dup_metric,
    metric_scalar,
)

ATTACKER = "attacker"
SHARED_FOLDER_ID = "F"

_SYNC_BASE_SIZE = 180
_ICON_REQ_BASE = 64
_MUX_FILLER_COUNT = 3


class Tap:
    EAVESDROPPER = "eavesdropper"
    NETWORK = "network"


class HandleViolation(Exception):
    """An injection touched state outside the attacker's share channel."""


@dataclass(frozen=True)
class MetricLog:
    tick: int
    payload: bytes
    parsed: MetricValue


@dataclass(frozen=True)
class NetworkRequest:
    tick: int
    endpoint: str
    payload_size: int


@dataclass(frozen=True)
class CloudFileUpdate:
    tick: int
    size: int


Observation = Union[MetricLog, NetworkRequest, CloudFileUpdate]


def normalize_url(url: str) -> str:
    """Cache key for icon fetches: the lowercased host component."""
    host = url
    if "://" in host:
        host = host.split("://", 1)[1]
    host = host.split("/", 1)[0]
    return host.lower()


def render_metric_log(vault: Vault, profile: AppProfile) -> bytes:
    """Render the vault-health log body exactly as the client would send it.

    Scalar bodies embed the count as fixed-width decimal so that their
    length never varies; per-entry JSON bodies carry one ``{"id":...,
    "reused":...}`` object per scoped entry, fixed key order, no whitespace.
    """
    entries = (
        vault.personal_entries()
        if profile.metric_scope is MetricScope.PERSONAL_ONLY
        else vault.entries
    )
    if profile.metric_format is MetricFormat.SCALAR:
        value = metric_scalar(dup_metric(vault, profile.dup_semantics, entries))
        return b'{"report":"vault-health","duplicates":%08d}' % value
    flags = dup_metric(vault, profile.dup_semantics, entries)
    if isinstance(flags, int):  # scalar semantics rendered per entry
        from .vault import DupSemantics

        flags = dup_metric(vault, DupSemantics.PER_ENTRY_FLAGS, entries)
    body = ",".join(
        '{"id":"%s","reused":%s}' % (eid, "true" if reused else "false")
        for eid, reused in flags
    )
    return b"[" + body.encode("utf-8") + b"]"


def parse_metric_log(vault: Vault, profile: AppProfile) -> MetricValue:
    entries = (
        vault.personal_entries()
        if profile.metric_scope is MetricScope.PERSONAL_ONLY
        else vault.entries
    )
    if profile.metric_format is MetricFormat.SCALAR:
        return metric_scalar(dup_metric(vault, profile.dup_semantics, entries))
    from .vault import DupSemantics

    return dup_metric(vault, DupSemantics.PER_ENTRY_FLAGS, entries)


class World:
    """One victim client, one attacker channel, one observer tap."""

    def __init__(
        self,
        profile: AppProfile,
        victim_vault: Vault,
        tap: str,
        rng_seed,
        individual_shares: int = 0,
    ):
        if tap not in (Tap.EAVESDROPPER, Tap.NETWORK):
            raise ValueError(f"unknown tap {tap!r}")
        if individual_shares <= 0 and not profile.supports_shared_folders:
            raise HandleViolation(
                f"profile {profile.name!r} has no shared-folder support; "
                "use individually-shared entries"
            )
        self.profile = profile
        self.vault = victim_vault
        self.tap = tap
        self.rng = random.Random(rng_seed)
        self.tick = 0
        self.noise_intensity = 0.0
        self._queue: list[Observation] = []
        self._noise_entry_ids: list[str] = []
        self._noise_counter = 0
        self.master_secret = self.rng.randbytes(32)

        # Icons for the victim's own pre-existing entries were fetched when
        # the entries were added, long before the attack started.
        self.icon_cache: set[str] = set()
        for e in self.vault.entries:
            if e.url:
                self.icon_cache.add(normalize_url(e.url))

        self.attacker_entry_ids: set[str] = set()
        self.handle_entry_ids: list[str] = []
        if individual_shares > 0:
            for i in range(individual_shares):
                eid = f"shared-{i:05d}"
                now = self.vault.tick()
                self.vault.entries.append(
                    Credential(
                        id=eid,
                        password=self._placeholder_password(),
                        shared_by=ATTACKER,
                        last_modified=now,
                    )
                )
                self.vault.accepted_entry_ids.add(eid)
                self.attacker_entry_ids.add(eid)
                self.handle_entry_ids.append(eid)
            self.uses_folder = False
        else:
            self.vault.folders.append(Folder(SHARED_FOLDER_ID, ATTACKER, ("victim", ATTACKER)))
            self.vault.accepted_folders.add(SHARED_FOLDER_ID)
            self.uses_folder = True

        # The acceptance itself is a sync: it seeds the baseline observations.
        self._emit_sync_effects(url_changes=[], changed_bytes=0)

    # -- internal helpers ---------------------------------------------------

    def _placeholder_password(self) -> bytes:
        return ("ph-" + self.rng.randbytes(16).hex()).encode()

    def _emit(self, obs: Observation) -> None:
        self._queue.append(obs)

    def _bundle_endpoint(self, default: str) -> str:
        return "api" if self.profile.endpoint_multiplexed else default

    def _emit_icon_fetch(self, url: str) -> None:
        policy = self.profile.icon_policy
        if policy is IconPolicy.ICONS_OFF or not url:
            return
        key = normalize_url(url)
        cached = key in self.icon_cache
        self.icon_cache.add(key)
        if policy is IconPolicy.FETCH_ONCE and cached:
            return
        if self.profile.endpoint_multiplexed:
            size = self.rng.randint(230, 270)
        else:
            size = _ICON_REQ_BASE + len(key)
        self._emit(NetworkRequest(self.tick, self._bundle_endpoint("icons"), size))

    def _emit_metric_log(self) -> None:
        body = render_metric_log(self.vault, self.profile)
        parsed = parse_metric_log(self.vault, self.profile)
        self._emit(MetricLog(self.tick, body, parsed))

    def _emit_sync_effects(self, url_changes: list[str], changed_bytes: int) -> None:
        """Everything the victim client does right after importing a sync."""
        if self.profile.endpoint_multiplexed:
            for _ in range(_MUX_FILLER_COUNT):
                self._emit(NetworkRequest(self.tick, "api", self.rng.randint(120, 880)))
        if self.profile.storage is Storage.SERVER_SYNC:
            self._emit(
                NetworkRequest(
                    self.tick, self._bundle_endpoint("sync"), _SYNC_BASE_SIZE + changed_bytes
                )
            )
        for url in url_changes:
            self._emit_icon_fetch(url)
        if self.profile.storage is Storage.CLOUD_FILE:
            size = codec.encrypted_size(
                self.vault, self.master_secret, self.profile.container, self.rng
            )
            self._emit(CloudFileUpdate(self.tick, size))
        if self.profile.metric_trigger is MetricTrigger.ON_SYNC:
            self._emit_metric_log()

    def _noise_event(self) -> None:
        add = not self._noise_entry_ids or self.rng.random() < 0.7
        if add:
            self._noise_counter += 1
            eid = f"noise-{self._noise_counter:05d}"
            url = f"https://noise-{self._noise_counter:05d}.example.org"
            now = self.vault.tick()
            self.vault.entries.append(
                Credential(
                    id=eid,
                    url=url,
                    username=f"user{self._noise_counter:05d}",
                    password=("np-" + self.rng.randbytes(16).hex()).encode(),
                    last_modified=now,
                )
            )
            self._noise_entry_ids.append(eid)
            self._emit_sync_effects(url_changes=[url], changed_bytes=len(url) + 40)
        else:
            eid = self.rng.choice(self._noise_entry_ids)
            entry = self.vault.entry(eid)
            entry.password = ("np-" + self.rng.randbytes(16).hex()).encode()
            entry.last_modified = self.vault.tick()
            self._emit_sync_effects(url_changes=[], changed_bytes=40)

    def _advance_one(self) -> None:
        self.tick += 1
        whole = int(self.noise_intensity)
        frac = self.noise_intensity - whole
        events = whole + (1 if self.rng.random() < frac else 0)
        for _ in range(events):
            self._noise_event()
        if (
            self.profile.metric_trigger is MetricTrigger.PERIODIC
            and self.tick % self.profile.metric_interval == 0
        ):
            self._emit_metric_log()

    # -- public surface -----------------------------------------------------

    def advance(self, ticks: int = 1) -> None:
        """Let logical time pass: noise fires, periodic logs fire."""
        for _ in range(ticks):
            self._advance_one()

    def victim_noise(self, intensity: float) -> None:
        """Set background victim activity, in events per tick (0 = quiet)."""
        if intensity < 0:
            raise ValueError("intensity must be >= 0")
        self.noise_intensity = intensity

    def inject(self, mutations: list[ShareUpdate]) -> None:
        """Push a batch of share updates through the attacker's channel.

        The batch arrives as one sync after the profile's sync delay; all
        post-import behavior (icon fetches, metric log, cloud re-upload)
        fires once for the batch, in mutation order.
        """
        for m in mutations:
            self._validate(m)
        self.advance(self.profile.sync_delay)
        url_changes: list[str] = []
        changed = 0
        for m in mutations:
            m = self._normalize(m)
            before_url = (
                self.vault.entry(m.credential_id).url
                if m.kind != "create" and self.vault.has_entry(m.credential_id)
                else None
            )
            apply_share_update(self.vault, m)
            if m.kind == "create":
                self.attacker_entry_ids.add(m.credential_id)
                if m.url:
                    url_changes.append(m.url)
            elif m.kind == "delete":
                self.attacker_entry_ids.discard(m.credential_id)
            elif m.url is not None and m.url != before_url and m.url:
                url_changes.append(m.url)
            changed += (
                len(m.url or "")
                + len(m.username or "")
                + len(m.password or b"")
                + sum(len(a.content) + len(a.filename) for a in (m.attachments or []))
                + 24
            )
        self._emit_sync_effects(url_changes=url_changes, changed_bytes=changed)

    def _normalize(self, m: ShareUpdate) -> ShareUpdate:
        from dataclasses import replace

        if m.kind == "create":
            return replace(m, sender=ATTACKER, folder=m.folder or SHARED_FOLDER_ID)
        return replace(m, sender=ATTACKER)

    def _validate(self, m: ShareUpdate) -> None:
        if m.kind == "create":
            if not self.uses_folder:
                raise HandleViolation(
                    "cannot create entries through individual shares; "
                    "each new share would need its own acceptance"
                )
            folder = m.folder or SHARED_FOLDER_ID
            if folder != SHARED_FOLDER_ID:
                raise HandleViolation(f"create outside the shared folder: {folder!r}")
            return
        if m.credential_id not in self.attacker_entry_ids:
            raise HandleViolation(
                f"mutation targets {m.credential_id!r}, which the attacker does not hold"
            )

    def drain_observations(self) -> list[Observation]:
        """Return and clear queued observations, redacted for this tap."""
        out = self._queue
        self._queue = []
        if self.tap == Tap.EAVESDROPPER:
            return out
        redacted: list[Observation] = []
        for obs in out:
            if isinstance(obs, MetricLog):
                redacted.append(
                    NetworkRequest(
                        obs.tick, self._bundle_endpoint("metrics"), len(obs.payload)
                    )
                )
            else:
                redacted.append(obs)
        return redacted

    # Convenience for attack code: the current cloud container config.
    @property
    def container_config(self) -> Optional[codec.ContainerConfig]:
        return self.profile.container


def world_new(
    profile: AppProfile,
    victim_seed_vault: Vault,
    tap: str,
    rng_seed,
    individual_shares: int = 0,
) -> World:
    """Build a world with the share channel already accepted.

    ``individual_shares`` > 0 sets up that many accepted individually-shared
    entries instead of a shared folder (mandatory for profiles without
    folder support).
    """
    return World(profile, victim_seed_vault, tap, rng_seed, individual_shares)
