"""Application behavior profiles.

A profile captures the handful of client-side switches that decide which
side channels exist: what the duplicate metric means, how and when it is
logged off-device, whether URL icons are fetched once or always, whether
state sync goes through application servers or re-uploads an encrypted
cloud file, and whether unrelated traffic shares the icon endpoint.

Five built-ins cover the behavior families seen in deployed clients;
profiles can also be loaded from JSON config files.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, replace
from enum import Enum
from pathlib import Path
from typing import Optional, Union

from .codec import ContainerConfig, DedupScope, PaddingRange
from .vault import DupSemantics


class MetricFormat(Enum):
    SCALAR = "scalar"
    PER_ENTRY_JSON = "per_entry_json"


class MetricTrigger(Enum):
    ON_SYNC = "on_sync"
    PERIODIC = "periodic"
    NEVER = "never"


class IconPolicy(Enum):
    FETCH_ONCE = "fetch_once"
    FETCH_ALWAYS = "fetch_always"
    ICONS_OFF = "icons_off"


class Storage(Enum):
    SERVER_SYNC = "server_sync"
    CLOUD_FILE = "cloud_file"


class MetricScope(Enum):
    ALL_ENTRIES = "all_entries"
    PERSONAL_ONLY = "personal_only"


@dataclass(frozen=True)
class AppProfile:
    name: str
    supports_shared_folders: bool
    dup_semantics: DupSemantics
    metric_format: MetricFormat
    metric_trigger: MetricTrigger
    icon_policy: IconPolicy
    storage: Storage
    metric_scope: MetricScope = MetricScope.ALL_ENTRIES
    endpoint_multiplexed: bool = False
    metric_interval: int = 4  # ticks, for PERIODIC triggers
    sync_delay: int = 1  # ticks between an injection and the victim import
    container: Optional[ContainerConfig] = None

    def __post_init__(self) -> None:
        if self.storage is Storage.CLOUD_FILE and self.container is None:
            object.__setattr__(self, "container", ContainerConfig())
        if self.metric_trigger is MetricTrigger.PERIODIC and self.metric_interval < 1:
            raise ValueError("periodic metric trigger needs interval >= 1")

    def with_container(self, container: ContainerConfig) -> "AppProfile":
        return replace(self, container=container)


def _p(**kw) -> AppProfile:
    return AppProfile(**kw)


BUILTIN_PROFILES: dict[str, AppProfile] = {
    # Folder sharing, scalar duplicate metric counting distinct reused
    # values, logged on every sync import.
    "lastpass-like": _p(
        name="lastpass-like",
        supports_shared_folders=True,
        dup_semantics=DupSemantics.DISTINCT_REUSED_VALUES,
        metric_format=MetricFormat.SCALAR,
        metric_trigger=MetricTrigger.ON_SYNC,
        icon_policy=IconPolicy.FETCH_ONCE,
        storage=Storage.SERVER_SYNC,
    ),
    # Individual shares only, scalar metric counting accounts with reuse,
    # logged periodically.
    "dashlane-like": _p(
        name="dashlane-like",
        supports_shared_folders=False,
        dup_semantics=DupSemantics.ENTRIES_WITH_REUSE,
        metric_format=MetricFormat.SCALAR,
        metric_trigger=MetricTrigger.PERIODIC,
        icon_policy=IconPolicy.FETCH_ONCE,
        storage=Storage.SERVER_SYNC,
    ),
    # Folder sharing, per-entry JSON health report with a reused flag per
    # credential, logged periodically. Icons are bundled locally, so the
    # icon channel is closed.
    "zoho-like": _p(
        name="zoho-like",
        supports_shared_folders=True,
        dup_semantics=DupSemantics.PER_ENTRY_FLAGS,
        metric_format=MetricFormat.PER_ENTRY_JSON,
        metric_trigger=MetricTrigger.PERIODIC,
        icon_policy=IconPolicy.ICONS_OFF,
        storage=Storage.SERVER_SYNC,
    ),
    # Textbook target for the pair-count metric attack.
    "generic-scalar": _p(
        name="generic-scalar",
        supports_shared_folders=True,
        dup_semantics=DupSemantics.PAIR_COUNT,
        metric_format=MetricFormat.SCALAR,
        metric_trigger=MetricTrigger.ON_SYNC,
        icon_policy=IconPolicy.FETCH_ONCE,
        storage=Storage.SERVER_SYNC,
    ),
    # No server sync: the encrypted database file is re-uploaded to a cloud
    # store on every save. No off-device metric logging, no icon fetching.
    "keepassxc-like": _p(
        name="keepassxc-like",
        supports_shared_folders=True,
        dup_semantics=DupSemantics.PAIR_COUNT,
        metric_format=MetricFormat.SCALAR,
        metric_trigger=MetricTrigger.NEVER,
        icon_policy=IconPolicy.ICONS_OFF,
        storage=Storage.CLOUD_FILE,
        container=ContainerConfig(),
    ),
}


def profile_to_dict(profile: AppProfile) -> dict:
    d = asdict(profile)
    d["dup_semantics"] = profile.dup_semantics.value
    d["metric_format"] = profile.metric_format.value
    d["metric_trigger"] = profile.metric_trigger.value
    d["icon_policy"] = profile.icon_policy.value
    d["storage"] = profile.storage.value
    d["metric_scope"] = profile.metric_scope.value
    if profile.container is not None:
        c = {
            "compression": profile.container.compression,
            "dedup_scope": profile.container.dedup_scope.value,
            "cipher": profile.container.cipher,
        }
        if profile.container.padding is not None:
            c["padding"] = {
                "min_bytes": profile.container.padding.min_bytes,
                "max_bytes": profile.container.padding.max_bytes,
            }
        d["container"] = c
    return d


def profile_from_dict(d: dict) -> AppProfile:
    d = dict(d)
    container = None
    if d.get("container") is not None:
        c = d["container"]
        padding = None
        if c.get("padding"):
            padding = PaddingRange(c["padding"]["min_bytes"], c["padding"]["max_bytes"])
        container = ContainerConfig(
            compression=c.get("compression", True),
            dedup_scope=DedupScope(c.get("dedup_scope", "global")),
            padding=padding,
            cipher=c.get("cipher", 1),
        )
    d["container"] = container
    d["dup_semantics"] = DupSemantics(d["dup_semantics"])
    d["metric_format"] = MetricFormat(d["metric_format"])
    d["metric_trigger"] = MetricTrigger(d["metric_trigger"])
    d["icon_policy"] = IconPolicy(d["icon_policy"])
    d["storage"] = Storage(d["storage"])
    d["metric_scope"] = MetricScope(d.get("metric_scope", "all_entries"))
    return AppProfile(**d)


def load_profile(name_or_path: Union[str, Path]) -> AppProfile:
    """Resolve a built-in profile name, or load a JSON profile file."""
    key = str(name_or_path)
    if key in BUILTIN_PROFILES:
        return BUILTIN_PROFILES[key]
    path = Path(name_or_path)
    if path.exists():
        return profile_from_dict(json.loads(path.read_text()))
    raise KeyError(f"unknown profile {name_or_path!r}; built-ins: {sorted(BUILTIN_PROFILES)}")
