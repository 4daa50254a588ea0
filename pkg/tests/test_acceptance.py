"""Acceptance suite: every numbered criterion from the build contract, each
as one test that prints its own pass/fail line.

The deterministic attacks run at 100 seeded trials with their stated
injection and observation budgets. The success-rate grids run the named
reproduction cells at 100 trials per cell and compare against the reference
rates at the stated tolerances. Mitigation completeness uses 300 paired
trials. Run with ``pytest -s tests/test_acceptance.py`` to see the
per-criterion lines.
"""

import math
import random

import pytest

from vaultleak.codec import ContainerConfig, PaddingRange, encrypted_size
from vaultleak.harness import run_trials
from vaultleak.mitigations import MitigationSet, evaluate
from vaultleak.profiles import BUILTIN_PROFILES
from vaultleak.sim import MetricLog, Tap, world_new
from vaultleak.vault import Credential, Vault
from vaultleak.workloads import Workload, bundled_corpus_path

TRIALS = 100


def _report(line: str) -> None:
    print(line, flush=True)


def _sigma(p: float, n: int) -> float:
    return math.sqrt(p * (1 - p) / n)


# --------------------------------------------------------------------------
# Criterion 1: deterministic attacks, exact recovery within stated budgets
# --------------------------------------------------------------------------


@pytest.mark.parametrize(
    "attack,workload,t,max_inj,max_obs",
    [
        ("dup-binary", Workload("random_equal", "password", 512, size=12), 10, 9, 9),
        ("dup-seq", Workload("random_equal", "password", 100, size=12), 10, 14, 14),
        ("zoho-batch", Workload("random_equal", "password", 512, size=12), 10, 1, 1),
        ("zoho-net", Workload("random_equal", "password", 64, size=12), 10, 7, 6),
        ("icon", Workload("random_equal", "url", 128, size=14), 10, 7, 7),
        ("dedup-naive", Workload("random_equal", "attachment", 100, size=10_000), 1, 100, 101),
    ],
)
def test_criterion_1_deterministic_attacks(attack, workload, t, max_inj, max_obs):
    res = run_trials(attack, workload, TRIALS, f"acc1:{attack}", t=t)
    worst_inj = max(r.injections for r in res.results)
    worst_obs = max(r.observations for r in res.results)
    baselines = max(r.baseline_observations for r in res.results)
    line = (
        f"criterion 1 [{attack} n={workload.n}]: rate={res.rate:.2f} "
        f"fp={res.false_positives} inj<={worst_inj} obs<={worst_obs} (+{baselines} baseline)"
    )
    ok = (
        res.rate == 1.0
        and res.false_positives == 0
        and worst_inj <= max_inj
        and worst_obs <= max_obs
    )
    _report(("PASS " if ok else "FAIL ") + line)
    assert res.rate == 1.0
    assert res.false_positives == 0
    assert worst_inj <= max_inj
    assert worst_obs <= max_obs
    if attack == "zoho-net":
        assert baselines == 1  # the stated bound is ceil(log2 n) plus one baseline


# --------------------------------------------------------------------------
# Criterion 2: attachment-deduplication grid reproduction
# --------------------------------------------------------------------------


@pytest.fixture(scope="module")
def fig4_results():
    out = {}
    for cell_id, wl, ref in [
        ("rep10000-W32", Workload("repeated_char", "attachment", 32, size=10_000), 74),
        ("rep10000-W128", Workload("repeated_char", "attachment", 128, size=10_000), 53),
        ("rep1000000-W512", Workload("repeated_char", "attachment", 512, size=1_000_000), 8),
    ]:
        out[cell_id] = (run_trials("dedup-bin", wl, TRIALS, f"acc2:fig4-{cell_id}"), ref)
    out["random-W32"] = (
        run_trials("dedup-bin", Workload("random_equal", "attachment", 32, size=10_000),
                   TRIALS, "acc2:rnd"),
        100,
    )
    for W, ref in [(32, 92), (128, 81), (512, 52)]:
        out[f"email-W{W}"] = (
            run_trials("dedup-bin", Workload("email_like", "attachment", W),
                       TRIALS, f"acc2:email-W{W}"),
            ref,
        )
    return out


def test_criterion_2_fig4_synthetic_cells(fig4_results):
    for cell in ("rep10000-W32", "rep10000-W128", "rep1000000-W512"):
        res, ref = fig4_results[cell]
        rate = res.rate * 100
        ok = abs(rate - ref) <= 15
        _report(f"{'PASS' if ok else 'FAIL'} criterion 2 [{cell}]: {rate:.0f}% vs {ref}% (±15)")
        assert ok, f"{cell}: {rate:.0f} vs {ref}"


def test_criterion_2_equal_size_random_is_exact(fig4_results):
    res, _ = fig4_results["random-W32"]
    _report(f"{'PASS' if res.rate == 1.0 else 'FAIL'} criterion 2 [equal-size random]: "
            f"{res.rate * 100:.0f}% (must be 100%)")
    assert res.rate == 1.0


def test_criterion_2_email_column_ordering(fig4_results):
    rates = [fig4_results[f"email-W{W}"][0].rate * 100 for W in (32, 128, 512)]
    refs = [92, 81, 52]
    ok = rates[0] >= rates[1] >= rates[2] and all(
        abs(r - ref) <= 20 for r, ref in zip(rates, refs)
    )
    _report(
        f"{'PASS' if ok else 'FAIL'} criterion 2 [email stand-in]: "
        f"{rates[0]:.0f} >= {rates[1]:.0f} >= {rates[2]:.0f} vs 92/81/52 (±20)"
    )
    assert rates[0] >= rates[1] >= rates[2]
    for r, ref in zip(rates, refs):
        assert abs(r - ref) <= 20


# --------------------------------------------------------------------------
# Criterion 3: field-compression grid reproduction
# --------------------------------------------------------------------------


@pytest.fixture(scope="module")
def fig5_results():
    out = {}
    for cell_id, wl, ref in [
        ("random10-W4", Workload("random_equal", "username", 4, size=10), 100),
        ("repeated5-W100", Workload("repeated_char", "username", 100, size=5), 8),
    ]:
        out[cell_id] = (run_trials("compress", wl, TRIALS, f"acc3:{cell_id}", t=10), ref)
    for name, kind in (("websites", "url"), ("usernames", "username")):
        rates = []
        cw = 0
        for W in (4, 10, 25, 50, 100):
            wl = Workload("corpus", kind, W, path=bundled_corpus_path(name))
            res = run_trials("compress", wl, 30, f"acc3:{name}-W{W}", t=10)
            rates.append(res.rate * 100)
            cw += res.confirmed_wrong
        out[name] = (rates, cw)
    return out


def test_criterion_3_fig5_named_cells(fig5_results):
    for cell in ("random10-W4", "repeated5-W100"):
        res, ref = fig5_results[cell]
        rate = res.rate * 100
        ok = abs(rate - ref) <= 15
        _report(f"{'PASS' if ok else 'FAIL'} criterion 3 [{cell}]: {rate:.0f}% vs {ref}% (±15)")
        assert ok, f"{cell}: {rate:.0f} vs {ref}"


def test_criterion_3_corpus_columns_do_not_increase(fig5_results):
    # Stand-in corpora: the success column must not grow with |W|; the
    # steep decline of the real breach corpora needs their density, which
    # the bundled stand-ins only gesture at.
    for name in ("websites", "usernames"):
        rates, _ = fig5_results[name]
        ok = all(a + 7 >= b for a, b in zip(rates, rates[1:]))  # sampling slack at 30 trials
        _report(
            f"{'PASS' if ok else 'FAIL'} criterion 3 [{name} stand-in]: "
            + "/".join(f"{r:.0f}" for r in rates)
        )
        assert ok


# --------------------------------------------------------------------------
# Criterion 4: confirmation soundness, zero tolerance
# --------------------------------------------------------------------------


def test_criterion_4_confirmation_soundness(fig4_results, fig5_results):
    wrong = 0
    checked = 0
    for res, _ in fig4_results.values():
        wrong += res.confirmed_wrong
        checked += sum(1 for r in res.results if r.confirmed is not None)
    for key in ("random10-W4", "repeated5-W100"):
        res, _ = fig5_results[key]
        wrong += res.confirmed_wrong
        checked += sum(1 for r in res.results if r.confirmed is not None)
    for name in ("websites", "usernames"):
        wrong += fig5_results[name][1]
    _report(
        f"{'PASS' if wrong == 0 else 'FAIL'} criterion 4 [confirmation soundness]: "
        f"{wrong} wrong confirmations across {checked}+ confirmed trials"
    )
    assert wrong == 0


# --------------------------------------------------------------------------
# Criterion 5: codec property suite
# --------------------------------------------------------------------------


def test_criterion_5_codec_properties():
    from vaultleak.codec import deserialize, serialize
    from tests.test_codec import random_vault, touch

    secret = b"acceptance-secret"

    rng = random.Random("acc5:roundtrip")
    for i in range(1000):
        v = random_vault(rng, max_entries=6)
        blob = serialize(v, secret, ContainerConfig(), random.Random(i))
        assert deserialize(blob.data, secret) == v

    # dedup invariant: k copies pool once globally, once per folder scope
    from vaultleak.codec import DedupScope, build_attachment_pool
    from vaultleak.vault import Attachment, Folder

    content = random.Random(1).randbytes(4096)
    v = Vault(
        folders=[Folder("F", "a", ()), Folder("G", "a", ())],
        entries=[
            Credential(id="p1", attachments=[Attachment("x", content)]),
            Credential(id="p2", attachments=[Attachment("x", content)]),
            Credential(id="f1", folder="F", attachments=[Attachment("x", content)]),
            Credential(id="g1", folder="G", attachments=[Attachment("x", content)]),
        ],
    )
    assert len(build_attachment_pool(v, DedupScope.GLOBAL)[0]) == 1
    assert len(build_attachment_pool(v, DedupScope.PER_FOLDER)[0]) == 3

    # password opacity within +-4 bytes
    worst_opacity = 0
    rng = random.Random("acc5:opacity")
    for trial in range(200):
        v = random_vault(rng, max_entries=6)
        existing = rng.randbytes(14)
        v.entries.append(Credential(id="host", password=existing))
        common = dict(folders=v.folders, clock=v.clock, accepted_folders=set(v.accepted_folders))
        dup = Vault(
            entries=[*[e.copy() for e in v.entries],
                     Credential(id="probe", password=existing, shared_by="a")],
            **common,
        )
        fresh = Vault(
            entries=[*[e.copy() for e in v.entries],
                     Credential(id="probe", password=rng.randbytes(14), shared_by="a")],
            **common,
        )
        a = encrypted_size(dup, secret, ContainerConfig(), random.Random(f"o{trial}"))
        b = encrypted_size(fresh, secret, ContainerConfig(), random.Random(f"o{trial}"))
        worst_opacity = max(worst_opacity, abs(a - b))
    assert worst_opacity <= 4

    # re-encryption noise budget: consecutive saves after a no-op touch
    worst_noise = 0
    rng = random.Random("acc5:noise")
    for trial in range(150):
        v = random_vault(rng, max_entries=8)
        v.entries.append(Credential(id="t", password=rng.randbytes(12)))
        save_rng = random.Random(f"n{trial}")
        prev = encrypted_size(v, secret, ContainerConfig(), save_rng)
        for _ in range(6):
            touch(v)
            cur = encrypted_size(v, secret, ContainerConfig(), save_rng)
            worst_noise = max(worst_noise, abs(cur - prev))
            prev = cur
    assert worst_noise <= 8

    # padding detectability: saves of identical content spread far beyond
    # the quiet budget
    cfg = ContainerConfig(padding=PaddingRange(64, 512))
    v = random_vault(random.Random("acc5:pad"), max_entries=5)
    v.entries.append(Credential(id="t", password=b"p" * 10))
    save_rng = random.Random("acc5:padseq")
    sizes = []
    for _ in range(30):
        touch(v)
        sizes.append(encrypted_size(v, secret, cfg, save_rng))
    deltas = [abs(b - a) for a, b in zip(sizes, sizes[1:])]
    assert max(deltas) > 8
    assert max(sizes) - min(sizes) > 200

    _report(
        "PASS criterion 5 [codec properties]: 1000 round trips, dedup scopes, "
        f"opacity<={worst_opacity}, re-encryption noise<={worst_noise}, padding detectable"
    )


# --------------------------------------------------------------------------
# Criterion 6: mitigation completeness
# --------------------------------------------------------------------------


def test_criterion_6_hard_mitigations_reach_baseline():
    trials = 300
    checks = [
        (
            "metric_scope_personal_only vs zoho-batch",
            MitigationSet(metric_scope_personal_only=True),
            "zoho-batch",
            Workload("random_equal", "password", 25, size=12),
            BUILTIN_PROFILES["zoho-like"],
            1 / 25 + 3 * _sigma(1 / 25, trials),
        ),
        (
            "per_folder_dedup vs dedup-bin",
            MitigationSet(per_folder_dedup=True),
            "dedup-bin",
            Workload("random_equal", "attachment", 16, size=64_000),
            BUILTIN_PROFILES["keepassxc-like"],
            1 / 16 + 3 * _sigma(1 / 16, trials),
        ),
        (
            "icons_off vs icon",
            MitigationSet(icons_off=True),
            "icon",
            Workload("random_equal", "url", 16, size=14),
            BUILTIN_PROFILES["generic-scalar"],
            1 / 16 + 3 * _sigma(1 / 16, trials),
        ),
    ]
    for label, mset, attack, wl, profile, threshold in checks:
        res = evaluate(mset, attack, wl, trials, f"acc6:{label}", profile)
        ok = res.after_rate <= threshold
        _report(
            f"{'PASS' if ok else 'FAIL'} criterion 6 [{label}]: "
            f"before={res.before_rate:.2f} after={res.after_rate:.3f} "
            f"(baseline+3sigma={threshold:.3f})"
        )
        assert res.before_rate >= 0.95
        assert res.after_rate <= threshold


def test_criterion_6_padding_softens_compression_attack():
    trials = 300
    wl = Workload("random_equal", "username", 25, size=10)
    res = evaluate(
        MitigationSet(random_padding=True),
        "compress",
        wl,
        trials,
        "acc6:padding",
        BUILTIN_PROFILES["keepassxc-like"],
        t=10,
    )
    threshold = 2 * (1 / 25)
    ok = res.after_rate <= threshold
    _report(
        f"{'PASS' if ok else 'FAIL'} criterion 6 [random_padding vs compress]: "
        f"before={res.before_rate:.2f} after={res.after_rate:.3f} (<= {threshold:.2f})"
    )
    assert res.before_rate >= 0.85
    assert res.after_rate <= threshold


# --------------------------------------------------------------------------
# Criterion 7: tap discipline
# --------------------------------------------------------------------------


def test_criterion_7_tap_discipline():
    import inspect

    from vaultleak import attacks as atk
    from tests.test_attacks import password_dictionary, victim_vault_with

    # Static audit: no size-channel attack touches parsed metric content.
    for fn in (atk.zoho_network, atk.icon_dictionary, atk.dedup_naive,
               atk.dedup_binary_search, atk.compression_dictionary):
        source = inspect.getsource(fn)
        assert "latest_metric_value" not in source
        assert ".parsed" not in source

    # Dynamic audit: the network-tap world never surfaces metric bodies,
    # and the log-size variant still recovers the target from the 1-byte
    # true/false flips alone.
    class SpyWorld:
        def __init__(self, world):
            self._world = world
            self.leaked = []

        def __getattr__(self, name):
            return getattr(self._world, name)

        def drain_observations(self):
            obs = self._world.drain_observations()
            self.leaked.extend(o for o in obs if isinstance(o, MetricLog))
            return obs

    hits = 0
    for seed in range(20):
        d = password_dictionary(32, seed)
        target = random.Random(f"acc7:{seed}").choice(d.items)
        world = SpyWorld(
            world_new(BUILTIN_PROFILES["zoho-like"], victim_vault_with([target], seed),
                      Tap.NETWORK, seed)
        )
        report = atk.zoho_network(world, d, random.Random(seed))
        assert world.leaked == []
        hits += report.found == [target]
        deltas = [obs for _, obs in report.transcript if "log size" in obs]
        assert deltas  # decisions ran on payload sizes
    _report(f"PASS criterion 7 [tap discipline]: 0 metric bodies leaked, "
            f"{hits}/20 size-only recoveries")
    assert hits == 20
