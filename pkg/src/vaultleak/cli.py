"""Command-line surface: run attacks, reproduce experiment grids, evaluate
mitigations.

Examples:

    vaultleak attack dup-binary --n 512 --trials 100 --seed 7
    vaultleak attack compress --n 25 --t 10 --dict mylist.txt --out res.csv
    vaultleak experiment fig4 --synthetic-only --trials 100 --out fig4.csv
    vaultleak mitigate eval --mitigation per_folder_dedup --attack dedup-bin --n 32
"""

from __future__ import annotations

import json
from pathlib import Path

import click

from . import harness, mitigations as mit
from .harness import ATTACKS, rows_to_csv, run_trials
from .profiles import BUILTIN_PROFILES, load_profile
from .workloads import Workload

_DEFAULT_SIZES = {
    "password": 12,
    "url": 16,
    "username": 10,
    "attachment": 10_000,
}


def _default_workload(attack: str, n: int, dict_path: str | None) -> Workload:
    kind = ATTACKS[attack].item_kind
    if dict_path:
        return Workload("corpus", kind, n, path=dict_path)
    if kind == "attachment":
        return Workload("random_equal", kind, n, size=_DEFAULT_SIZES[kind])
    return Workload("random_equal", kind, n, size=_DEFAULT_SIZES[kind])


def _write_rows(rows: list[dict], out: str | None) -> None:
    text = rows_to_csv(rows)
    if out is None:
        click.echo(text, nl=False)
    elif out.endswith(".json"):
        Path(out).write_text(json.dumps(rows, indent=2) + "\n")
        click.echo(f"wrote {out}")
    else:
        Path(out).write_text(text)
        click.echo(f"wrote {out}")


@click.group()
def main() -> None:
    """Injection side-channel simulator for password managers."""


@main.group()
def attack() -> None:
    """Run one attack over seeded trials and report the success rate."""


def _attack_command(name: str):
    spec = ATTACKS[name]

    @attack.command(name=name)
    @click.option("--profile", "profile_name", default=spec.profile, show_default=True,
                  help="Built-in profile name or a JSON profile file.")
    @click.option("--tap", type=click.Choice(["eaves", "network"]), default=None,
                  help="Override the observation tap.")
    @click.option("--dict", "dict_path", default=None, help="Newline-delimited candidate file.")
    @click.option("--n", default=64, show_default=True, help="Dictionary size per trial.")
    @click.option("--t", default=10, show_default=True,
                  help="Shared-entry count / repeats, where the attack uses one.")
    @click.option("--trials", default=100, show_default=True)
    @click.option("--seed", default="0", show_default=True)
    @click.option("--noise", default=0.0, show_default=True, help="Victim events per tick.")
    @click.option("--out", default=None, help="CSV or JSON output path.")
    def cmd(profile_name, tap, dict_path, n, t, trials, seed, noise, out):
        profile = load_profile(profile_name)
        if tap is not None:
            spec_tap = "eavesdropper" if tap == "eaves" else "network"
            local_spec = harness.AttackSpec(
                spec.name, spec.runner, profile_name, spec_tap, spec.item_kind,
                spec.individual_shares, spec.takes_t,
            )
            harness.ATTACKS[name] = local_spec
        workload = _default_workload(name, n, dict_path)
        res = run_trials(name, workload, trials, seed, profile=profile, t=t, noise=noise)
        click.echo(
            f"{name}: {res.successes}/{res.trials} trials succeeded "
            f"(rate {res.rate:.2f}, false positives {res.false_positives})"
        )
        rows = [{
            "cell_id": name,
            "workload": workload.label(),
            "n": n,
            "t": t,
            "trials": trials,
            "successes": res.successes,
            "rate": f"{res.rate:.2f}",
            "paper_reference_rate": "",
        }]
        if out:
            _write_rows(rows, out)

    return cmd


for _name in ATTACKS:
    _attack_command(_name)


@main.group()
def experiment() -> None:
    """Reproduce the success-rate grids."""


@experiment.command()
@click.option("--trials", default=100, show_default=True)
@click.option("--seed", default="fig4", show_default=True)
@click.option("--synthetic-only", is_flag=True, help="Skip the email-corpus column.")
@click.option("--email-corpus", default=None,
              help="Newline-delimited corpus replacing the bundled email stand-in.")
@click.option("--out", default=None)
def fig4(trials, seed, synthetic_only, email_corpus, out):
    """Attachment-deduplication attack grid (binary search, confirmations)."""
    rows = harness.experiment_fig4(
        trials, seed, synthetic_only, email_corpus,
        progress=lambda cell, rate: click.echo(f"  {cell}: {rate:.2f}", err=True),
    )
    _write_rows(rows, out)


@experiment.command()
@click.option("--trials", default=100, show_default=True)
@click.option("--seed", default="fig5", show_default=True)
@click.option("--synthetic-only", is_flag=True, help="Skip the websites/usernames columns.")
@click.option("--websites", default=None, help="Real website corpus (newline-delimited).")
@click.option("--usernames", default=None, help="Real username corpus (newline-delimited).")
@click.option("--t", default=10, show_default=True, help="Repeats per measurement.")
@click.option("--out", default=None)
def fig5(trials, seed, synthetic_only, websites, usernames, t, out):
    """Field-compression attack grid (two tries per candidate, averaged)."""
    rows = harness.experiment_fig5(
        trials, seed, synthetic_only, websites, usernames, t,
        progress=lambda cell, rate: click.echo(f"  {cell}: {rate:.2f}", err=True),
    )
    _write_rows(rows, out)


@main.group()
def mitigate() -> None:
    """Mitigation switches and their effect on attack success."""


_MITIGATION_NAMES = [
    "metric_scope_personal_only",
    "icon_fetch_always",
    "icons_off",
    "per_folder_dedup",
    "random_padding",
]


@mitigate.command(name="eval")
@click.option("--mitigation", type=click.Choice(_MITIGATION_NAMES), required=True)
@click.option("--attack", "attack_name", type=click.Choice(sorted(ATTACKS)), required=True)
@click.option("--profile", "profile_name", default=None, help="Defaults to the attack's profile.")
@click.option("--n", default=25, show_default=True)
@click.option("--t", default=10, show_default=True)
@click.option("--trials", default=100, show_default=True)
@click.option("--seed", default="mit", show_default=True)
@click.option("--out", default=None)
def mitigate_eval(mitigation, attack_name, profile_name, n, t, trials, seed, out):
    """Paired before/after success rates for one mitigation."""
    spec = ATTACKS[attack_name]
    profile = load_profile(profile_name or spec.profile)
    mset = mit.MitigationSet(**{mitigation: True})
    workload = _default_workload(attack_name, n, None)
    res = mit.evaluate(mset, attack_name, workload, trials, seed, profile, t=t)
    click.echo(
        f"{attack_name} vs {mitigation}: before {res.before_rate:.2f}, "
        f"after {res.after_rate:.2f} ({trials} paired trials)"
    )
    rows = [{
        "cell_id": f"{attack_name}-vs-{mitigation}",
        "workload": workload.label(),
        "n": n,
        "t": t,
        "trials": trials,
        "successes": res.after_successes,
        "rate": f"{res.after_rate:.2f}",
        "paper_reference_rate": "",
    }]
    if out:
        _write_rows(rows, out)


@main.command()
def profiles() -> None:
    """List the built-in application profiles."""
    for name, prof in BUILTIN_PROFILES.items():
        click.echo(
            f"{name}: folders={prof.supports_shared_folders} "
            f"metric={prof.dup_semantics.value}/{prof.metric_format.value}"
            f"/{prof.metric_trigger.value} icons={prof.icon_policy.value} "
            f"storage={prof.storage.value}"
        )


if __name__ == "__main__":
    main()
