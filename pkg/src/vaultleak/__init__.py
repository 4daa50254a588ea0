"""vaultleak: a deterministic simulator and attack toolkit for injection
side channels in password managers.

The package models a victim client syncing an encrypted vault, an attacker
who can share credentials into it, and the two observer positions that
matter in practice (an eavesdropper on exported metadata, and a network
observer who sees only request sizes). On top of the world model it
implements dictionary attacks through vault-health metrics, URL-icon
fetching, attachment deduplication, and pre-encryption compression, along
with the corresponding countermeasures and an experiment harness.
"""

from .vault import (
    Attachment,
    Credential,
    DupSemantics,
    Folder,
    MetricValue,
    ShareError,
    ShareUpdate,
    Vault,
    apply_share_update,
    dup_metric,
    dup_pair_count,
)
from .codec import (
    ContainerConfig,
    DedupScope,
    FormatError,
    IntegrityError,
    PaddingRange,
    SerializedVault,
    deserialize,
    encrypted_size,
    gzip_len,
    serialize,
)
from .profiles import (
    AppProfile,
    BUILTIN_PROFILES,
    IconPolicy,
    MetricFormat,
    MetricScope,
    MetricTrigger,
    Storage,
    load_profile,
)
from .sim import (
    CloudFileUpdate,
    HandleViolation,
    MetricLog,
    NetworkRequest,
    Observation,
    Tap,
    World,
    render_metric_log,
    world_new,
)
from .attacks import (
    AttackReport,
    Dictionary,
    IconStrategy,
    StrategyError,
    compression_dictionary,
    dedup_binary_search,
    dedup_naive,
    dup_binary_search,
    dup_sequential,
    icon_dictionary,
    zoho_batch,
    zoho_network,
)
from .mitigations import MitigationSet, apply, evaluate
from .workloads import Workload, generate_workload
from .harness import experiment_fig4, experiment_fig5, run_trials

__version__ = "0.1.0"

__all__ = [
    "Attachment", "Credential", "DupSemantics", "Folder", "MetricValue",
    "ShareError", "ShareUpdate", "Vault", "apply_share_update", "dup_metric",
    "dup_pair_count",
    "ContainerConfig", "DedupScope", "FormatError", "IntegrityError",
    "PaddingRange", "SerializedVault", "deserialize", "encrypted_size",
    "gzip_len", "serialize",
    "AppProfile", "BUILTIN_PROFILES", "IconPolicy", "MetricFormat",
    "MetricScope", "MetricTrigger", "Storage", "load_profile",
    "CloudFileUpdate", "HandleViolation", "MetricLog", "NetworkRequest",
    "Observation", "Tap", "World", "render_metric_log", "world_new",
    "AttackReport", "Dictionary", "IconStrategy", "StrategyError",
    "compression_dictionary", "dedup_binary_search", "dedup_naive",
    "dup_binary_search", "dup_sequential", "icon_dictionary", "zoho_batch",
    "zoho_network",
    "MitigationSet", "apply", "evaluate",
    "Workload", "generate_workload",
    "experiment_fig4", "experiment_fig5", "run_trials",
]
