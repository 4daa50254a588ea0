"""Countermeasure switches and paired before/after evaluation.

Each mitigation is a configuration change on the profile or its container:

* scope vault-health metrics to personal entries only,
* fetch URL icons on every credential add (or turn icons off entirely),
* deduplicate attachments separately per shared folder,
* append a random-length incompressible pad to every save.

``evaluate`` reruns the same seeded trials with and without one mitigation,
so the two success rates differ only through the switch under test.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .codec import DedupScope, PaddingRange
from .profiles import AppProfile, IconPolicy, MetricScope


@dataclass(frozen=True)
class MitigationSet:
    metric_scope_personal_only: bool = False
    icon_fetch_always: bool = False
    icons_off: bool = False
    per_folder_dedup: bool = False
    random_padding: bool = False

    def names(self) -> list[str]:
        return [name for name, on in vars(self).items() if on]


def apply(mitigations: MitigationSet, profile: AppProfile) -> AppProfile:
    """Return a copy of ``profile`` with the selected countermeasures set."""
    out = profile
    if mitigations.metric_scope_personal_only:
        out = replace(out, metric_scope=MetricScope.PERSONAL_ONLY)
    if mitigations.icons_off:
        out = replace(out, icon_policy=IconPolicy.ICONS_OFF)
    elif mitigations.icon_fetch_always:
        out = replace(out, icon_policy=IconPolicy.FETCH_ALWAYS)
    container = out.container
    if container is not None:
        if mitigations.per_folder_dedup:
            container = replace(container, dedup_scope=DedupScope.PER_FOLDER)
        if mitigations.random_padding:
            container = replace(container, padding=PaddingRange())
        out = replace(out, container=container)
    return out


@dataclass
class EvalResult:
    mitigation: MitigationSet
    attack: str
    trials: int
    before_successes: int
    after_successes: int

    @property
    def before_rate(self) -> float:
        return self.before_successes / self.trials

    @property
    def after_rate(self) -> float:
        return self.after_successes / self.trials


def evaluate(
    mitigations: MitigationSet,
    attack: str,
    workload,
    trials: int,
    base_seed,
    profile: AppProfile,
    t: int = 10,
) -> EvalResult:
    """Run paired trials of ``attack`` with and without the mitigation set.

    Both runs derive per-trial seeds from the same base seed, so candidate
    sets, planted targets, and world randomness match pairwise.
    """
    from .harness import run_trials

    if trials < 1:
        raise ValueError("trials must be >= 1")
    before = run_trials(attack, workload, trials, base_seed, profile=profile, t=t)
    after = run_trials(
        attack, workload, trials, base_seed, profile=apply(mitigations, profile), t=t
    )
    return EvalResult(
        mitigation=mitigations,
        attack=attack,
        trials=trials,
        before_successes=before.successes,
        after_successes=after.successes,
    )
