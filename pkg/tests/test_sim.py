import pytest

from vaultleak.harness import build_victim_vault, _trial_rng
from vaultleak.profiles import BUILTIN_PROFILES, load_profile, profile_from_dict, profile_to_dict
from vaultleak.sim import (
    CloudFileUpdate,
    HandleViolation,
    MetricLog,
    NetworkRequest,
    Tap,
    World,
    normalize_url,
    render_metric_log,
    world_new,
)
from vaultleak.vault import Credential, ShareUpdate, Vault
from vaultleak.profiles import MetricScope
import dataclasses


def seed_vault(rng_seed="sv") -> Vault:
    return build_victim_vault(b"pw-target", "password", _trial_rng(rng_seed, 0, "vault"))


def test_zoho_like_world_emits_per_entry_logs():
    w = world_new(BUILTIN_PROFILES["zoho-like"], seed_vault(), Tap.EAVESDROPPER, 1)
    w.inject([ShareUpdate("create", "s1", password=b"zzz")])
    w.advance(BUILTIN_PROFILES["zoho-like"].metric_interval)
    logs = [o for o in w.drain_observations() if isinstance(o, MetricLog)]
    assert logs
    assert isinstance(logs[-1].parsed, list)
    assert any(eid == "s1" for eid, _ in logs[-1].parsed)


def test_keepassxc_like_world_emits_cloud_updates_only():
    w = world_new(BUILTIN_PROFILES["keepassxc-like"], seed_vault(), Tap.NETWORK, 1)
    w.inject([ShareUpdate("create", "s1", password=b"zzz")])
    obs = w.drain_observations()
    assert any(isinstance(o, CloudFileUpdate) for o in obs)
    assert not any(isinstance(o, MetricLog) for o in obs)


def test_folder_share_on_folderless_profile_rejected():
    with pytest.raises(HandleViolation):
        world_new(BUILTIN_PROFILES["dashlane-like"], seed_vault(), Tap.EAVESDROPPER, 1)
    # individually-shared entries are the supported channel there
    w = world_new(
        BUILTIN_PROFILES["dashlane-like"], seed_vault(), Tap.EAVESDROPPER, 1, individual_shares=3
    )
    assert len(w.handle_entry_ids) == 3


def test_create_triggers_metric_log_on_sync_profile():
    w = world_new(BUILTIN_PROFILES["generic-scalar"], seed_vault(), Tap.EAVESDROPPER, 1)
    w.drain_observations()
    w.inject([ShareUpdate("create", "s1", password=b"zzz")])
    logs = [o for o in w.drain_observations() if isinstance(o, MetricLog)]
    assert len(logs) == 1


def test_fetch_once_skips_cached_urls():
    vault = seed_vault()
    target_url = "https://cached.example/login"
    vault.entries[0].url = target_url
    w = world_new(BUILTIN_PROFILES["generic-scalar"], vault, Tap.NETWORK, 1)
    w.drain_observations()
    w.inject([ShareUpdate("create", "s1", url=target_url)])
    icons = [o for o in w.drain_observations() if isinstance(o, NetworkRequest) and o.endpoint == "icons"]
    assert icons == []
    w.inject([ShareUpdate("create", "s2", url="https://fresh.example/x")])
    icons = [o for o in w.drain_observations() if isinstance(o, NetworkRequest) and o.endpoint == "icons"]
    assert len(icons) == 1


def test_fetch_always_fetches_cached_urls_too():
    from vaultleak.mitigations import MitigationSet, apply

    vault = seed_vault()
    vault.entries[0].url = "https://cached.example/login"
    profile = apply(MitigationSet(icon_fetch_always=True), BUILTIN_PROFILES["generic-scalar"])
    w = world_new(profile, vault, Tap.NETWORK, 1)
    w.drain_observations()
    w.inject([ShareUpdate("create", "s1", url="https://cached.example/login")])
    icons = [o for o in w.drain_observations() if isinstance(o, NetworkRequest) and o.endpoint == "icons"]
    assert len(icons) == 1


def test_deletion_does_not_evict_icon_cache():
    w = world_new(BUILTIN_PROFILES["generic-scalar"], seed_vault(), Tap.NETWORK, 1)
    w.inject([ShareUpdate("create", "s1", url="https://once.example/a")])
    w.inject([ShareUpdate("delete", "s1")])
    w.drain_observations()
    w.inject([ShareUpdate("create", "s2", url="https://once.example/b")])
    icons = [o for o in w.drain_observations() if isinstance(o, NetworkRequest) and o.endpoint == "icons"]
    assert icons == []  # still cached


def test_eavesdropper_sees_parsed_network_sees_sizes():
    v1, v2 = seed_vault(), seed_vault()
    we = world_new(BUILTIN_PROFILES["generic-scalar"], v1, Tap.EAVESDROPPER, 9)
    wn = world_new(BUILTIN_PROFILES["generic-scalar"], v2, Tap.NETWORK, 9)
    for w in (we, wn):
        w.inject([ShareUpdate("create", "s1", password=b"zzz")])
    eobs = we.drain_observations()
    nobs = wn.drain_observations()
    elogs = [o for o in eobs if isinstance(o, MetricLog)]
    assert elogs and isinstance(elogs[0].parsed, int)
    assert not any(isinstance(o, MetricLog) for o in nobs)
    sizes = [o for o in nobs if isinstance(o, NetworkRequest) and o.endpoint == "metrics"]
    assert sizes and sizes[0].payload_size == len(elogs[0].payload)


def test_tap_monotonicity_network_is_a_redaction():
    """Anything the network tap yields is derivable from the eavesdropper view."""
    def run(tap):
        w = world_new(BUILTIN_PROFILES["zoho-like"], seed_vault("mono"), tap, 77)
        w.victim_noise(0.5)
        w.inject([ShareUpdate("create", "s1", password=b"a", url="https://a.example")])
        w.advance(8)
        w.inject([ShareUpdate("update", "s1", password=b"b")])
        w.advance(8)
        return w.drain_observations()

    eaves, network = run(Tap.EAVESDROPPER), run(Tap.NETWORK)

    def redact(obs):
        if isinstance(obs, MetricLog):
            return NetworkRequest(obs.tick, "metrics", len(obs.payload))
        return obs

    assert [redact(o) for o in eaves] == network


def test_identical_seeds_give_identical_observation_streams():
    def run():
        w = world_new(BUILTIN_PROFILES["zoho-like"], seed_vault("det"), Tap.EAVESDROPPER, 123)
        w.victim_noise(0.7)
        w.inject([ShareUpdate("create", "s1", password=b"a")])
        w.advance(10)
        return w.drain_observations()

    assert run() == run()


def test_noise_zero_adds_no_observations():
    w = world_new(BUILTIN_PROFILES["generic-scalar"], seed_vault(), Tap.EAVESDROPPER, 5)
    w.drain_observations()
    w.advance(50)
    assert w.drain_observations() == []


def test_noise_generates_observations():
    w = world_new(BUILTIN_PROFILES["generic-scalar"], seed_vault(), Tap.EAVESDROPPER, 5)
    w.drain_observations()
    w.victim_noise(1.0)
    w.advance(10)
    assert len(w.drain_observations()) > 0


def test_mutation_outside_handle_rejected():
    w = world_new(BUILTIN_PROFILES["generic-scalar"], seed_vault(), Tap.EAVESDROPPER, 5)
    with pytest.raises(HandleViolation):
        w.inject([ShareUpdate("update", "v-target", password=b"x")])
    with pytest.raises(HandleViolation):
        w.inject([ShareUpdate("create", "s1", password=b"x", folder="other")])


def test_render_metric_log_per_entry_json():
    v = Vault(
        entries=[
            Credential(id="a", password=b"1"),
            Credential(id="b", password=b"2"),
            Credential(id="c", password=b"3"),
        ]
    )
    body = render_metric_log(v, BUILTIN_PROFILES["zoho-like"])
    assert body.count(b'"reused":false') == 3
    v.entries[2].password = b"1"
    flipped = render_metric_log(v, BUILTIN_PROFILES["zoho-like"])
    # two flags flip false->true, each one byte shorter
    assert len(body) - len(flipped) == 2
    assert flipped.count(b'"reused":true') == 2


def test_single_flag_flip_changes_length_by_one():
    v = Vault(
        entries=[
            Credential(id="a", password=b"1"),
            Credential(id="b", password=b"2"),
            Credential(id="c", password=b"1"),  # a and c both flip
        ]
    )
    before = render_metric_log(v, BUILTIN_PROFILES["zoho-like"])
    v.entries[1].password = b"9"  # no change for b
    assert len(render_metric_log(v, BUILTIN_PROFILES["zoho-like"])) == len(before)


def test_scalar_log_length_is_value_independent():
    v9 = Vault(entries=[Credential(id=str(i), password=b"x") for i in range(5)])
    v0 = Vault(entries=[Credential(id=str(i), password=bytes([i])) for i in range(5)])
    p = BUILTIN_PROFILES["generic-scalar"]
    assert len(render_metric_log(v9, p)) == len(render_metric_log(v0, p))


def test_personal_only_scope_hides_injections():
    profile = dataclasses.replace(
        BUILTIN_PROFILES["generic-scalar"], metric_scope=MetricScope.PERSONAL_ONLY
    )
    w = world_new(profile, seed_vault("scope"), Tap.EAVESDROPPER, 3)
    baseline = [o for o in w.drain_observations() if isinstance(o, MetricLog)][-1]
    # injections collide with the victim's own password, yet the log is frozen
    target_pw = w.vault.entry("v-target").password
    w.inject([ShareUpdate("create", "s1", password=target_pw)])
    w.inject([ShareUpdate("create", "s2", password=target_pw)])
    logs = [o for o in w.drain_observations() if isinstance(o, MetricLog)]
    assert all(log.payload == baseline.payload for log in logs)


def test_fetch_once_at_most_one_request_per_url():
    w = world_new(BUILTIN_PROFILES["generic-scalar"], seed_vault("once"), Tap.NETWORK, 11)
    w.victim_noise(0.3)
    urls = [f"https://u{i % 7}.example/{i}" for i in range(20)]
    for i, url in enumerate(urls):
        w.inject([ShareUpdate("create", f"s{i}", url=url)])
    obs = w.drain_observations()
    icon_sizes = [o for o in obs if isinstance(o, NetworkRequest) and o.endpoint == "icons"]
    # 7 distinct injected hosts plus whatever noise added, each at most once
    assert len(icon_sizes) == len(w.icon_cache) - sum(
        1 for e in seed_vault("once").entries if e.url
    )


def test_normalize_url_lowercases_host_only():
    assert normalize_url("HTTPS://ExAmPle.COM/Path/Q") == "example.com"
    assert normalize_url("plainhost") == "plainhost"


def test_profile_json_round_trip(tmp_path):
    for name, profile in BUILTIN_PROFILES.items():
        assert profile_from_dict(profile_to_dict(profile)) == profile
    import json

    path = tmp_path / "custom.json"
    d = profile_to_dict(BUILTIN_PROFILES["keepassxc-like"])
    d["name"] = "custom"
    path.write_text(json.dumps(d))
    loaded = load_profile(path)
    assert loaded.name == "custom"
    assert loaded.container is not None
