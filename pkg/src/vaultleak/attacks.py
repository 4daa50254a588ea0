"""Attack templates against the simulated password-manager world.

Every attack consumes only the observation tap its threat model allows:
metric-driven attacks parse vault-health logs (eavesdropper), the log-size
variant and all storage attacks read nothing but request sizes and cloud
file sizes (network). Each returns an :class:`AttackReport` with the
recovered items, the injection and observation budgets actually spent, and
a transcript.

Budget accounting: ``injections_used`` counts injection batches (one sync
each), ``observations_used`` counts post-injection measurement rounds, and
``baseline_observations`` counts measurements consumed before the first
injection. A fill round overwrites every slot it owns, which subsumes the
delete-before-reinject step that value-counting metrics otherwise need.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

from . import codec
from .profiles import IconPolicy, MetricFormat, Storage
from .sim import (
    CloudFileUpdate,
    MetricLog,
    NetworkRequest,
    Observation,
    Tap,
    World,
    normalize_url,
)
from .vault import Attachment, DupSemantics, ShareUpdate

DEFAULT_NOISE_BUDGET = 8
SMALL_FILE_THRESHOLD = 50
SMALL_FILE_REPEATS = 8
PAD_LEN = codec.WINDOW_SIZE  # 32 KiB, the compressor's search window


class StrategyError(Exception):
    """The requested strategy cannot run against this world."""


@dataclass(frozen=True)
class Dictionary:
    """Ordered candidate set; items must be pairwise distinct."""

    items: tuple[bytes, ...]
    kind: str  # "password" | "url" | "username" | "attachment"

    def __post_init__(self) -> None:
        if len(self.items) < 1:
            raise ValueError("dictionary must hold at least one candidate")
        if len(set(self.items)) != len(self.items):
            raise ValueError("dictionary candidates must be pairwise distinct")
        if self.kind not in ("password", "url", "username", "attachment"):
            raise ValueError(f"unknown dictionary kind {self.kind!r}")

    def __len__(self) -> int:
        return len(self.items)


@dataclass
class AttackReport:
    found: list[bytes] = field(default_factory=list)
    injections_used: int = 0
    observations_used: int = 0
    baseline_observations: int = 0
    confirmed: Optional[bool] = None
    transcript: list[tuple[str, str]] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    def log(self, injection: str, observation: str) -> None:
        self.transcript.append((injection, observation))


# ---------------------------------------------------------------------------
# Observation plumbing
# ---------------------------------------------------------------------------


class _Feed:
    """Pulls observations out of a world, advancing time when needed."""

    def __init__(self, world: World):
        self.world = world
        self.pending: list[Observation] = []

    def _pull(self) -> None:
        self.pending.extend(self.world.drain_observations())

    def _await(self, pick: Callable[[list[Observation]], Optional[object]], what: str):
        limit = 16 + 4 * max(self.world.profile.metric_interval, self.world.profile.sync_delay)
        for _ in range(limit):
            self._pull()
            got = pick(self.pending)
            if got is not None:
                self.pending = []
                return got
            self.world.advance(1)
        raise RuntimeError(f"no {what} observed within {limit} ticks")

    def latest_metric_value(self):
        """Most recent parsed metric log (eavesdropper tap only)."""

        def pick(obs):
            logs = [o for o in obs if isinstance(o, MetricLog)]
            return logs[-1].parsed if logs else None

        return self._await(pick, "metric log")

    def latest_metric_size(self) -> int:
        endpoint = "api" if self.world.profile.endpoint_multiplexed else "metrics"

        def pick(obs):
            hits = [
                o
                for o in obs
                if isinstance(o, NetworkRequest) and o.endpoint == endpoint
            ]
            return hits[-1].payload_size if hits else None

        return self._await(pick, "metric log request")

    def latest_cloud_size(self) -> int:
        def pick(obs):
            hits = [o for o in obs if isinstance(o, CloudFileUpdate)]
            return hits[-1].size if hits else None

        return self._await(pick, "cloud file update")

    def drain_requests(self, endpoint: str) -> list[NetworkRequest]:
        """All queued requests to one endpoint, in emission order."""
        self._pull()
        out = [
            o
            for o in self.pending
            if isinstance(o, NetworkRequest) and o.endpoint == endpoint
        ]
        self.pending = []
        return out


def _scalarize(value) -> int:
    if isinstance(value, int):
        return value
    return sum(1 for _, reused in value if reused)


def _matches_from_delta(delta: int, semantics: DupSemantics) -> int:
    """Fill-induced metric increase -> number of matching candidates.

    Exact when the victim holds at most one copy of each candidate value,
    which is also what the underlying oracle needs to fire at all for
    value-counting metrics.
    """
    if delta <= 0:
        return 0
    if semantics is DupSemantics.ENTRIES_WITH_REUSE:
        return max(1, delta // 2)
    return delta


# ---------------------------------------------------------------------------
# Duplicate-metric attacks
# ---------------------------------------------------------------------------


class _SlotBoard:
    """A bank of attacker-held entries whose passwords are overwritten per round.

    Filling a round means: slot i gets the round's i-th value, every other
    slot gets back its unique placeholder. Overwriting disposes of previous
    injections, so value-counting metrics never see stale duplicates.
    """

    def __init__(self, world: World, rng: random.Random, capacity: int, report: AttackReport):
        self.world = world
        self.rng = rng
        self.report = report
        self.placeholders = [
            ("slotph-" + rng.randbytes(12).hex()).encode() for _ in range(capacity)
        ]
        self.current: list[Optional[bytes]] = [None] * capacity
        self.ids: list[str] = []
        if world.uses_folder:
            self._pending_create = True
        else:
            if len(world.handle_entry_ids) < capacity:
                raise StrategyError(
                    f"need {capacity} individually-shared entries, "
                    f"have {len(world.handle_entry_ids)}"
                )
            self.ids = list(world.handle_entry_ids[:capacity])
            self.current = [None] * capacity
            self._pending_create = False

    def fill(self, values: Sequence[bytes], label: str) -> None:
        """One injection batch setting the slot passwords to ``values`` + placeholders."""
        want = list(values) + self.placeholders[len(values) :]
        muts: list[ShareUpdate] = []
        if self._pending_create:
            self.ids = [f"probe-{i:05d}" for i in range(len(self.placeholders))]
            for eid, value in zip(self.ids, want):
                muts.append(ShareUpdate("create", eid, password=value))
            self.current = list(want)
            self._pending_create = False
        else:
            for eid, value, have in zip(self.ids, want, self.current):
                if value != have:
                    muts.append(ShareUpdate("update", eid, password=value))
            self.current = list(want)
        self.world.inject(muts)
        self.report.injections_used += 1
        self.report.log(label, "sync")


def _require_eavesdropper(world: World, attack: str) -> None:
    if world.tap != Tap.EAVESDROPPER:
        raise StrategyError(f"{attack} parses metric log content and needs an eavesdropper tap")


def _dup_endgame_gadget(
    board: _SlotBoard, feed: _Feed, base: int, a: bytes, b: bytes, report: AttackReport
) -> list[bytes]:
    """Resolve {a-is-present, b-is-present, neither} in one round.

    Fill [a, a, b]: under the pair-count metric the self-pair of the two
    ``a`` copies always contributes 1, a vault match on ``a`` lifts that to
    3 choose 2, and a vault match on ``b`` adds 1, so the increase is
    3 / 2 / 1 respectively. Entries-with-reuse separates the same three
    cases as 3 / 4 / 2. Exact for victims holding one copy of the value.
    """
    semantics = board.world.profile.dup_semantics
    board.fill([a, a, b], "gadget fill [a, a, b]")
    delta = _scalarize(feed.latest_metric_value()) - base
    report.observations_used += 1
    report.log("await metric", f"delta={delta}")
    if semantics is DupSemantics.PAIR_COUNT:
        if delta >= 3:
            return [a]
        if delta == 2:
            return [b]
        return []
    if semantics is DupSemantics.ENTRIES_WITH_REUSE:
        if delta >= 4:
            return [b]
        if delta == 3:
            return [a]
        return []
    raise StrategyError("gadget endgame needs a pair-count or entries-with-reuse metric")


def _dup_endgame_single(
    board: _SlotBoard, feed: _Feed, base: int, a: bytes, report: AttackReport
) -> list[bytes]:
    """Presence test for one survivor in one round, absent-safe.

    Fill [a, a]: the self-pair contributes 1 whether or not the vault holds
    ``a``; a vault copy lifts the pair count to 3 (entries-with-reuse: 2
    baseline vs 3 with a match).
    """
    semantics = board.world.profile.dup_semantics
    board.fill([a, a], "gadget fill [a, a]")
    delta = _scalarize(feed.latest_metric_value()) - base
    report.observations_used += 1
    report.log("await metric", f"delta={delta}")
    if semantics is DupSemantics.PAIR_COUNT:
        return [a] if delta >= 3 else []
    if semantics is DupSemantics.ENTRIES_WITH_REUSE:
        return [a] if delta >= 3 else []
    raise StrategyError("gadget endgame needs a pair-count or entries-with-reuse metric")


def _dup_endgame_plain(
    board: _SlotBoard, feed: _Feed, base: int, a: bytes, b: Optional[bytes], report: AttackReport
) -> list[bytes]:
    """Test ``a`` alone; verify ``b`` with a second round if needed."""
    board.fill([a], f"verify fill [{a!r}]")
    delta = _scalarize(feed.latest_metric_value()) - base
    report.observations_used += 1
    report.log("await metric", f"delta={delta}")
    if delta > 0:
        return [a]
    if b is None:
        return []
    return _dup_endgame_plain(board, feed, base, b, None, report)


def _gadget_usable(world: World) -> bool:
    return world.profile.dup_semantics in (
        DupSemantics.PAIR_COUNT,
        DupSemantics.ENTRIES_WITH_REUSE,
    )


def _dup_descend_single(
    board: _SlotBoard,
    feed: _Feed,
    base: int,
    candidates: list[bytes],
    report: AttackReport,
) -> list[bytes]:
    """Halving descent for (at most) one target among ``candidates``.

    Worst case ceil(log2 n) rounds including the endgame, target present or
    absent, when the metric supports the three-way endgame gadget.
    """
    cur = list(candidates)
    while len(cur) > 2:
        half = cur[: (len(cur) + 1) // 2]
        board.fill(half, f"fill half of {len(cur)}")
        delta = _scalarize(feed.latest_metric_value()) - base
        report.observations_used += 1
        report.log("await metric", f"delta={delta}")
        cur = half if delta > 0 else cur[len(half) :]
    if len(cur) == 2 and _gadget_usable(board.world):
        return _dup_endgame_gadget(board, feed, base, cur[0], cur[1], report)
    if len(cur) == 2:
        return _dup_endgame_plain(board, feed, base, cur[0], cur[1], report)
    if _gadget_usable(board.world):
        return _dup_endgame_single(board, feed, base, cur[0], report)
    return _dup_endgame_plain(board, feed, base, cur[0], None, report)


def _dup_descend_all(
    board: _SlotBoard,
    feed: _Feed,
    base: int,
    candidates: list[bytes],
    report: AttackReport,
) -> list[bytes]:
    """Exhaustive variant: recurse into every increasing branch.

    The first round injects the whole dictionary, whose metric increase
    fixes the total match count; sibling counts are then inferred, so only
    one half per level needs a measurement. Budget grows with the number
    of matches and is simply recorded.
    """
    semantics = board.world.profile.dup_semantics

    board.fill(candidates, f"fill all {len(candidates)}")
    delta = _scalarize(feed.latest_metric_value()) - base
    report.observations_used += 1
    report.log("await metric", f"delta={delta}")
    total = _matches_from_delta(delta, semantics)
    found: list[tuple[int, bytes]] = []
    stack: list[tuple[list[int], int]] = [(list(range(len(candidates))), total)]
    while stack:
        idxs, m = stack.pop()
        if m <= 0:
            continue
        if m >= len(idxs):
            found.extend((i, candidates[i]) for i in idxs)
            continue
        left = idxs[: (len(idxs) + 1) // 2]
        right = idxs[len(left) :]
        board.fill([candidates[i] for i in left], f"fill {len(left)} of node {len(idxs)}")
        delta = _scalarize(feed.latest_metric_value()) - base
        report.observations_used += 1
        report.log("await metric", f"delta={delta}")
        m_left = min(_matches_from_delta(delta, semantics), len(left), m)
        stack.append((right, m - m_left))
        stack.append((left, m_left))
    found.sort()
    return [value for _, value in found]


def dup_binary_search(
    world: World,
    dictionary: Dictionary,
    rng: Optional[random.Random] = None,
    find_all: bool = False,
) -> AttackReport:
    """Recover vault passwords through the duplicate metric, halving the
    dictionary each round via a shared folder.

    The default mode runs the single-target descent within the
    ceil(log2 n) round budget; ``find_all=True`` recurses into every
    increasing branch and spends whatever the match count requires.
    """
    _require_eavesdropper(world, "dup_binary_search")
    if not world.uses_folder:
        raise StrategyError(
            "profile has no shared-folder support; use dup_sequential with "
            "individually-shared entries"
        )
    rng = rng or random.Random("dup-binary")
    report = AttackReport()
    feed = _Feed(world)

    base = _scalarize(feed.latest_metric_value())
    report.baseline_observations += 1
    report.log("baseline", f"dup={base}")

    capacity = len(dictionary) if find_all else max(3, (len(dictionary) + 1) // 2)
    board = _SlotBoard(world, rng, capacity, report)
    descend = _dup_descend_all if find_all else _dup_descend_single
    report.found = descend(board, feed, base, list(dictionary.items), report)
    return report


def dup_sequential(
    world: World,
    dictionary: Dictionary,
    t: int,
    rng: Optional[random.Random] = None,
    find_all: bool = False,
) -> AttackReport:
    """Recover vault passwords through the duplicate metric using ``t``
    individually-shared entries, batch by batch.

    Scans ceil(n/t) batches; an increasing batch is then resolved by the
    halving descent over the same t entries, treating them as a folder.
    """
    _require_eavesdropper(world, "dup_sequential")
    n = len(dictionary)
    if t < 1:
        raise StrategyError("need at least one shared entry")
    if 2 * t >= n and t > 1:
        raise StrategyError("t >= n/2: use dup_binary_search instead")
    rng = rng or random.Random("dup-seq")
    report = AttackReport()
    feed = _Feed(world)

    base = _scalarize(feed.latest_metric_value())
    report.baseline_observations += 1
    report.log("baseline", f"dup={base}")

    board = _SlotBoard(world, rng, t, report)
    items = list(dictionary.items)
    found: list[bytes] = []
    for start in range(0, n, t):
        batch = items[start : start + t]
        board.fill(batch, f"batch {start // t}")
        delta = _scalarize(feed.latest_metric_value()) - base
        report.observations_used += 1
        report.log("await metric", f"delta={delta}")
        if delta > 0:
            if len(batch) == 1:
                found.extend(batch)
            elif find_all:
                found.extend(_dup_descend_all(board, feed, base, batch, report))
            else:
                found.extend(_dup_descend_single(board, feed, base, batch, report))
            if not find_all:
                break
    report.found = found
    return report


def zoho_batch(world: World, dictionary: Dictionary, rng: Optional[random.Random] = None) -> AttackReport:
    """Recover every matching password from one injection and one per-entry log.

    Creates one credential per candidate, remembers the assigned ids, then
    reads the reused flag of each injected id from the next health report.
    """
    _require_eavesdropper(world, "zoho_batch")
    if world.profile.metric_format is not MetricFormat.PER_ENTRY_JSON:
        raise StrategyError("zoho_batch needs a per-entry JSON metric format")
    if not world.uses_folder:
        raise StrategyError("zoho_batch creates entries and needs a shared folder")
    report = AttackReport()
    feed = _Feed(world)

    ids = {f"zb-{i:05d}": item for i, item in enumerate(dictionary.items)}
    world.inject(
        [ShareUpdate("create", eid, password=item) for eid, item in ids.items()]
    )
    report.injections_used += 1
    report.log(f"create batch of {len(ids)}", "sync")

    flags = feed.latest_metric_value()
    report.observations_used += 1
    if isinstance(flags, int):
        raise StrategyError("profile reported a scalar metric, not per-entry flags")
    flag_map = dict(flags)
    report.found = [item for eid, item in ids.items() if flag_map.get(eid, False)]
    report.log("await metric", f"{sum(flag_map.get(e, False) for e in ids)} flagged")
    return report


def zoho_network(
    world: World, dictionary: Dictionary, rng: Optional[random.Random] = None
) -> AttackReport:
    """Binary search driven purely by the byte length of the health report.

    A flag flipping false->true shortens the JSON body by one byte, so a
    fill whose candidates include a vault password shrinks the report by
    one or two bytes against the all-placeholder baseline. Rounds whose
    size moves outside that envelope are repeated after re-baselining.
    """
    if world.profile.metric_format is not MetricFormat.PER_ENTRY_JSON:
        raise StrategyError("zoho_network needs a per-entry JSON metric format")
    if not world.uses_folder:
        raise StrategyError("zoho_network creates entries and needs a shared folder")
    rng = rng or random.Random("zoho-net")
    report = AttackReport()
    feed = _Feed(world)

    n = len(dictionary)
    capacity = max(1, (n + 1) // 2)
    placeholders = [("zn-" + rng.randbytes(12).hex()).encode() for _ in range(capacity)]
    ids = [f"zn-{i:05d}" for i in range(capacity)]
    world.inject(
        [
            ShareUpdate("create", eid, password=ph)
            for eid, ph in zip(ids, placeholders)
        ]
    )
    report.injections_used += 1
    report.log(f"create {capacity} empty credentials", "sync")

    baseline = feed.latest_metric_size()
    report.baseline_observations += 1
    report.log("baseline", f"log size={baseline}")

    current = list(placeholders)

    def fill(values: list[bytes], label: str) -> int:
        nonlocal current
        want = list(values) + placeholders[len(values) :]
        muts = [
            ShareUpdate("update", eid, password=v)
            for eid, v, have in zip(ids, want, current)
            if v != have
        ]
        current = want
        world.inject(muts)
        report.injections_used += 1
        size = feed.latest_metric_size()
        report.observations_used += 1
        report.log(label, f"log size={size}")
        return size

    cur = list(dictionary.items)
    verified = False
    while len(cur) > 1:
        half = cur[: (len(cur) + 1) // 2]
        size = fill(half, f"fill {len(half)} of {len(cur)}")
        delta = baseline - size
        if delta in (1, 2):
            cur = half
            verified = len(half) == 1
        elif delta == 0:
            cur = cur[len(half) :]
            verified = False
        else:
            # Victim activity moved the log size; reset and repeat the round.
            report.notes.append(f"anomalous size delta {delta}; round repeated")
            fill([], "reset to placeholders")
            baseline = feed.latest_metric_size()
            report.baseline_observations += 1
            report.log("re-baseline", f"log size={baseline}")
    report.found = [cur[0]]
    report.confirmed = True if verified else None
    if not verified:
        report.notes.append("final candidate inferred by elimination, not directly observed")
    return report


# ---------------------------------------------------------------------------
# Icon-fetch attack
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class IconStrategy:
    kind: str  # "binary" | "sequential"
    t: int = 1

    @classmethod
    def binary(cls) -> "IconStrategy":
        return cls("binary")

    @classmethod
    def sequential(cls, t: int = 1) -> "IconStrategy":
        return cls("sequential", t)


def _icon_batch_schedule(n: int, strategy: IconStrategy) -> list[int]:
    if strategy.kind == "sequential":
        sizes = []
        left = n
        while left > 0:
            sizes.append(min(strategy.t, left))
            left -= sizes[-1]
        return sizes
    sizes = []
    left = n
    while left > 0:
        if left <= 3:
            sizes.append(left)
            break
        sizes.append((left + 1) // 2)
        left -= sizes[-1]
    return sizes


def icon_dictionary(
    world: World,
    dictionary: Dictionary,
    strategy: IconStrategy = IconStrategy.binary(),
    rng: Optional[random.Random] = None,
) -> AttackReport:
    """Recover a vault URL from the presence or absence of icon fetches.

    Injecting a credential whose URL the victim already holds triggers no
    icon fetch (the icon is cached); a fresh URL always does. Batched
    rounds compare the number of icon requests to the batch size; each
    candidate is book-ended by marker URLs of a recognizable length, so an
    under-count is attributed to the silent slot within the same round.
    A candidate only ever yields information on its first injection (the
    fetch itself populates the cache), which is why rounds never re-inject.

    On endpoint-multiplexed profiles no request can be told apart inside
    the sync bundle, so the attack calibrates the bundle request count with
    a gibberish URL and probes one candidate per round.
    """
    if world.profile.icon_policy is IconPolicy.ICONS_OFF:
        report = AttackReport()
        report.notes.append("icons are disabled; the fetch oracle does not exist")
        return report
    rng = rng or random.Random("icon")
    report = AttackReport()
    feed = _Feed(world)
    feed._pull()
    feed.pending = []  # discard setup observations

    if world.profile.endpoint_multiplexed:
        return _icon_multiplexed(world, dictionary, rng, report, feed)

    urls = [item.decode("utf-8") for item in dictionary.items]
    hosts = [normalize_url(u) for u in urls]
    marker_len = max(max(len(h) for h in hosts) + 7, 18)
    marker_seq = 0

    def make_marker() -> str:
        nonlocal marker_seq
        marker_seq += 1
        stem = f"mk{marker_seq:04d}{rng.randbytes(4).hex()}"
        return "https://" + stem + "x" * (marker_len - len(stem))

    marker_size = 64 + marker_len  # icon request size is base + host length

    counter = 0
    found: list[bytes] = []
    pos = 0
    for batch_size in _icon_batch_schedule(len(urls), strategy):
        batch = list(range(pos, pos + batch_size))
        pos += batch_size
        muts = []
        markers = [make_marker()]
        muts.append(ShareUpdate("create", f"ic-{counter:05d}", url=markers[0]))
        counter += 1
        for i in batch:
            muts.append(ShareUpdate("create", f"ic-{counter:05d}", url=urls[i]))
            counter += 1
            markers.append(make_marker())
            muts.append(ShareUpdate("create", f"ic-{counter:05d}", url=markers[-1]))
            counter += 1
        world.inject(muts)
        report.injections_used += 1
        requests = feed.drain_requests("icons")
        report.observations_used += 1
        report.log(
            f"batch of {batch_size} candidates", f"{len(requests)} icon requests"
        )
        expected_full = 2 * batch_size + 1
        if len(requests) >= expected_full:
            continue
        # Walk the gaps between marker-sized requests: a gap with no fetch
        # in it is a candidate whose icon was already cached.
        gap = 0
        saw_fetch = False
        for req in requests:
            if req.payload_size == marker_size:
                if gap > 0 and not saw_fetch:
                    found.append(dictionary.items[batch[gap - 1]])
                gap += 1
                saw_fetch = False
            else:
                saw_fetch = True
        if found and strategy.kind == "binary":
            break
    report.found = found
    if found:
        report.confirmed = None
        report.notes.append(
            "cached icons persist after deletion; a found URL may have been "
            "deleted from the vault recently"
        )
    return report


def _icon_multiplexed(
    world: World,
    dictionary: Dictionary,
    rng: random.Random,
    report: AttackReport,
    feed: _Feed,
) -> AttackReport:
    counter = 0

    def probe(url: str) -> int:
        nonlocal counter
        world.inject([ShareUpdate("create", f"icm-{counter:05d}", url=url)])
        counter += 1
        report.injections_used += 1
        return len(feed.drain_requests("api"))

    gibberish = "https://" + rng.randbytes(12).hex() + ".invalid"
    with_fetch = probe(gibberish)
    report.baseline_observations += 1
    report.log("calibrate with gibberish url", f"{with_fetch} bundled requests")

    found: list[bytes] = []
    for item in dictionary.items:
        count = probe(item.decode("utf-8"))
        report.observations_used += 1
        report.log("probe candidate", f"{count} bundled requests")
        if count < with_fetch:
            found.append(item)
            break
    report.found = found
    if found:
        report.confirmed = None
        report.notes.append(
            "cached icons persist after deletion; a found URL may have been "
            "deleted from the vault recently"
        )
    return report


# ---------------------------------------------------------------------------
# Storage-side attacks (cloud file sizes)
# ---------------------------------------------------------------------------


def _require_cloud(world: World, attack: str) -> None:
    if world.profile.storage is not Storage.CLOUD_FILE:
        raise StrategyError(f"{attack} needs cloud-file storage with observable sizes")


def _slot_id(world: World) -> str:
    if world.handle_entry_ids:
        return world.handle_entry_ids[0]
    raise StrategyError("storage attacks need one individually-shared entry as the probe slot")


def dedup_naive(
    world: World,
    dictionary: Dictionary,
    rng: Optional[random.Random] = None,
    noise_budget: int = DEFAULT_NOISE_BUDGET,
) -> AttackReport:
    """Scan candidates one at a time; a file that fails to grow the vault by
    its own compressed length was deduplicated against victim content.

    Candidates below the small-file threshold are re-injected several times
    and averaged, since re-encryption noise can swallow their size signal.
    """
    _require_cloud(world, "dedup_naive")
    report = AttackReport()
    feed = _Feed(world)
    slot = _slot_id(world)

    base = feed.latest_cloud_size()
    report.baseline_observations += 1
    report.log("baseline", f"|B|={base}")

    def set_attachments(files: list[Attachment]) -> int:
        world.inject([ShareUpdate("update", slot, attachments=files)])
        report.injections_used += 1
        size = feed.latest_cloud_size()
        report.observations_used += 1
        return size

    stream_overhead = codec.gzip_len(b"")  # container framing cancels out
    for item in dictionary.items:
        file = Attachment("f", item)
        grows_by = codec.gzip_len(item) - stream_overhead  # expected if not pooled away
        if len(item) >= SMALL_FILE_THRESHOLD:
            size = set_attachments([file])
            delta = size - base
            report.log(f"inject {len(item)}B candidate", f"delta={delta}")
            deduplicated = delta < grows_by - noise_budget
        else:
            with_sizes, without_sizes = [], []
            for _ in range(SMALL_FILE_REPEATS):
                with_sizes.append(set_attachments([file]))
                without_sizes.append(set_attachments([]))
            delta = sum(with_sizes) / len(with_sizes) - sum(without_sizes) / len(without_sizes)
            report.log(
                f"inject small candidate x{SMALL_FILE_REPEATS}", f"mean delta={delta:.1f}"
            )
            deduplicated = delta < grows_by - max(2.0, noise_budget / 2)
        if deduplicated:
            report.found = [item]
            break
    return report


def _pad_confirm_cloud(
    world: World,
    feed: _Feed,
    report: AttackReport,
    slot: str,
    base: int,
    found: bytes,
    rng: random.Random,
    noise_budget: int,
    as_attachment: bool = True,
) -> bool:
    """Re-inject the found file behind a window-sized incompressible pad.

    The pad sits between any vault copy and the probe copy in the pool, so
    a wrong guess cannot back-reference its near-duplicates and must grow
    the file by its full compressed length; a true duplicate is pooled away
    entirely and only the pad's own cost appears.
    """
    pad = rng.randbytes(PAD_LEN)
    probe = [Attachment("p", pad), Attachment("f", found)]
    world.inject([ShareUpdate("update", slot, attachments=probe)])
    report.injections_used += 1
    size = feed.latest_cloud_size()
    report.observations_used += 1

    pad_cost = codec.gzip_len(pad) - codec.gzip_len(b"")
    expected_growth = codec.gzip_len(pad + found) - codec.gzip_len(pad)
    actual = size - base
    confirmed = actual < pad_cost + expected_growth - noise_budget
    report.log(
        "confirmation: pad-isolated re-injection",
        f"grew {actual}, full-cost threshold {pad_cost + expected_growth - noise_budget}",
    )
    return confirmed


def dedup_binary_search(
    world: World,
    dictionary: Dictionary,
    rng: Optional[random.Random] = None,
    noise_budget: int = DEFAULT_NOISE_BUDGET,
) -> AttackReport:
    """Halving descent over candidate attachments with compression-aware
    scoring, then a pad-isolated confirmation of the survivor.

    Each round injects both halves in turn and recurses into the half whose
    relative growth, normalized by its own compressed bulk, is smaller:
    into W1 iff B2/(B1+z1) < B3/(B1+z2), where z1 and z2 are the locally
    computed compressed lengths of the concatenated halves and B1 is the
    vault size right before the round's injections.
    """
    _require_cloud(world, "dedup_binary_search")
    rng = rng or random.Random("dedup-bin")
    report = AttackReport()
    feed = _Feed(world)
    slot = _slot_id(world)

    last = feed.latest_cloud_size()
    report.baseline_observations += 1
    report.log("baseline", f"|B|={last}")

    def inject_files(items: list[bytes], label: str) -> int:
        files = [Attachment("f", item) for item in items]
        world.inject([ShareUpdate("update", slot, attachments=files)])
        report.injections_used += 1
        size = feed.latest_cloud_size()
        report.observations_used += 1
        report.log(label, f"|B|={size}")
        return size

    cur = list(dictionary.items)
    while len(cur) > 1:
        b1 = last  # size before both of this round's injections
        first = cur[: (len(cur) + 1) // 2]
        second = cur[len(first) :]
        b2 = inject_files(first, f"inject half of {len(cur)} ({len(first)} files)")
        b3 = inject_files(second, f"inject other half ({len(second)} files)")
        last = b3
        z1 = codec.gzip_len(b"".join(first))
        z2 = codec.gzip_len(b"".join(second))
        if b2 * (b1 + z2) < b3 * (b1 + z1):  # B2/(B1+z1) < B3/(B1+z2), cross-multiplied
            cur = first
        else:
            cur = second
    found = cur[0]
    report.found = [found]
    # Clear the probe before confirming so the measurement is not entangled
    # with the final round's leftover attachments.
    clean = inject_files([], "clear probe for confirmation")
    report.confirmed = _pad_confirm_cloud(
        world, feed, report, slot, clean, found, rng, noise_budget, as_attachment=True
    )
    return report


def compression_dictionary(
    world: World,
    dictionary: Dictionary,
    t: int = 10,
    rng: Optional[random.Random] = None,
    noise_budget: int = DEFAULT_NOISE_BUDGET,
) -> AttackReport:
    """Two-tries compression attack on plaintext fields or attachments.

    For each candidate, inject the candidate and then a character
    permutation of it, measuring the vault size after each of ``t`` saves
    and averaging. A candidate present in the vault compresses away
    entirely while its scrambled twin does not, so the per-byte score
    |n2 - n1| / |w| peaks at the true item. Ties break toward the smaller
    plain-measurement, then dictionary order. Passwords are out of reach:
    their ciphertexts never share bytes with injected plaintext.
    """
    _require_cloud(world, "compression_dictionary")
    if dictionary.kind == "password":
        raise StrategyError(
            "passwords sit under the inner encryption layer and never co-compress"
        )
    if t < 1:
        raise StrategyError("need at least one measurement per try")
    rng = rng or random.Random("compress")
    report = AttackReport()
    feed = _Feed(world)
    slot = _slot_id(world)

    base = feed.latest_cloud_size()
    report.baseline_observations += 1
    report.log("baseline", f"|B|={base}")

    def set_value(item: bytes) -> None:
        if dictionary.kind == "attachment":
            world.inject([ShareUpdate("update", slot, attachments=[Attachment("f", item)])])
        elif dictionary.kind == "url":
            world.inject([ShareUpdate("update", slot, url=item.decode("utf-8"))])
        else:
            world.inject([ShareUpdate("update", slot, username=item.decode("utf-8"))])
        report.injections_used += 1

    def measure_sum(values: list[bytes], label: str) -> int:
        """Sum of |B| over one save per value (t values = t measurements)."""
        total = 0
        last = None
        for value in values:
            if value == last:
                world.inject([ShareUpdate("touch", slot)])
                report.injections_used += 1
            else:
                set_value(value)
                last = value
            total += feed.latest_cloud_size()
            report.observations_used += 1
        report.log(label, f"mean |B|={total / len(values):.1f}")
        return total

    def scramble(item: bytes) -> bytes:
        chars = list(item)
        for _ in range(16):
            rng.shuffle(chars)
            if bytes(chars) != item or len(item) == 1:
                break
        return bytes(chars)

    best_idx = -1
    best_key: tuple = ()
    for i, item in enumerate(dictionary.items):
        n1 = measure_sum([item] * t, f"candidate {i}: plain x{t}")
        n2 = measure_sum(
            [scramble(item) for _ in range(t)], f"candidate {i}: scrambled x{t}"
        )
        # score = |n2-n1| / (len * t); compare exactly via cross-multiplication
        num = abs(n2 - n1)
        if best_idx < 0:
            best_idx, best_key = i, (num, len(item), n1)
        else:
            b_num, b_len, b_n1 = best_key
            lhs = num * b_len
            rhs = b_num * len(item)
            if lhs > rhs or (lhs == rhs and n1 < b_n1):
                best_idx, best_key = i, (num, len(item), n1)

    found = dictionary.items[best_idx]
    report.found = [found]

    if dictionary.kind == "attachment":
        world.inject([ShareUpdate("update", slot, attachments=[])])
        report.injections_used += 1
        clean = feed.latest_cloud_size()
        report.observations_used += 1
        report.confirmed = _pad_confirm_cloud(
            world, feed, report, slot, clean, found, rng, noise_budget, as_attachment=True
        )
        return report

    # String confirmation, one-sided. The scramble differential carries the
    # proof: a candidate absent from the vault compresses like its own
    # permutation, so a gap of many noise deviations can only come from
    # window matches against victim content (quiet device). The pad-prefixed
    # re-injection then checks, per the textbook recipe, that the string
    # stops vanishing once a window-sized incompressible prefix separates it
    # from everything else; Huffman-table mixing drifts the in-stream pad
    # cost by a few hundred bytes at this scale, so that check is a coarse
    # floor rather than the discriminating test.
    num, length, _ = best_key
    differential_threshold = t * max(noise_budget, (3 * length) // 4)
    differential_ok = num >= differential_threshold

    alnum = "abcdefghijklmnopqrstuvwxyz0123456789"
    pad_text = "".join(rng.choice(alnum) for _ in range(PAD_LEN))
    value = pad_text + found.decode("utf-8")
    if dictionary.kind == "url":
        world.inject([ShareUpdate("update", slot, url=value)])
    else:
        world.inject([ShareUpdate("update", slot, username=value)])
    report.injections_used += 1
    size = feed.latest_cloud_size()
    report.observations_used += 1
    pad_floor = (9 * (codec.gzip_len(pad_text.encode()) - codec.gzip_len(b""))) // 10
    grew = size - base
    pad_ok = grew >= pad_floor + length - noise_budget
    report.log(
        "confirmation: pad-prefixed re-injection",
        f"grew {grew} (floor {pad_floor + length - noise_budget}), "
        f"differential {num} vs {differential_threshold}",
    )
    report.confirmed = differential_ok and pad_ok
    return report
