"""Trial protocol and experiment grids.

A trial samples a fresh candidate dictionary from the workload, picks one
candidate uniformly as the target, plants it in a fresh victim vault as a
personal credential, builds a world, and hands the attack nothing but the
world and the dictionary. Success means the report names exactly the
planted target. Trials derive independent seeds from the base seed, so a
run is reproducible end to end and aggregation is order-independent.

``experiment_fig4`` and ``experiment_fig5`` sweep the dictionary-size grids
for the attachment-deduplication and field-compression attacks and emit CSV
rows alongside reference success rates for comparison.
"""

from __future__ import annotations

import csv
import io
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Union

from . import attacks as atk
from .attacks import AttackReport, Dictionary, IconStrategy
from .profiles import AppProfile, BUILTIN_PROFILES
from .sim import Tap, World, world_new
from .vault import Attachment, Credential, Vault
from .workloads import Workload, bundled_corpus_path, generate_with_decoys, generate_workload

VICTIM_DECOY_FILES = 4


@dataclass(frozen=True)
class AttackSpec:
    name: str
    runner: Callable
    profile: str
    tap: str
    item_kind: str
    individual_shares: int = 0  # 0 = shared folder
    takes_t: bool = False


def _run_icon(world, dictionary, rng, t):
    strategy = IconStrategy.binary() if world.uses_folder else IconStrategy.sequential(t or 1)
    return atk.icon_dictionary(world, dictionary, strategy, rng)


ATTACKS: dict[str, AttackSpec] = {
    "dup-binary": AttackSpec(
        "dup-binary",
        lambda world, d, rng, t: atk.dup_binary_search(world, d, rng),
        "generic-scalar",
        Tap.EAVESDROPPER,
        "password",
    ),
    "dup-seq": AttackSpec(
        "dup-seq",
        lambda world, d, rng, t: atk.dup_sequential(world, d, t, rng),
        "dashlane-like",
        Tap.EAVESDROPPER,
        "password",
        individual_shares=-1,  # resolved to t
        takes_t=True,
    ),
    "zoho-batch": AttackSpec(
        "zoho-batch",
        lambda world, d, rng, t: atk.zoho_batch(world, d, rng),
        "zoho-like",
        Tap.EAVESDROPPER,
        "password",
    ),
    "zoho-net": AttackSpec(
        "zoho-net",
        lambda world, d, rng, t: atk.zoho_network(world, d, rng),
        "zoho-like",
        Tap.NETWORK,
        "password",
    ),
    "icon": AttackSpec(
        "icon",
        _run_icon,
        "generic-scalar",
        Tap.NETWORK,
        "url",
        takes_t=True,
    ),
    "dedup-naive": AttackSpec(
        "dedup-naive",
        lambda world, d, rng, t: atk.dedup_naive(world, d, rng, _budget(world)),
        "keepassxc-like",
        Tap.NETWORK,
        "attachment",
        individual_shares=1,
    ),
    "dedup-bin": AttackSpec(
        "dedup-bin",
        lambda world, d, rng, t: atk.dedup_binary_search(world, d, rng, _budget(world)),
        "keepassxc-like",
        Tap.NETWORK,
        "attachment",
        individual_shares=1,
    ),
    "compress": AttackSpec(
        "compress",
        lambda world, d, rng, t: atk.compression_dictionary(
            world, d, t or 10, rng, _budget(world)
        ),
        "keepassxc-like",
        Tap.NETWORK,
        "username",
        individual_shares=1,
        takes_t=True,
    ),
}


def _budget(world: World) -> int:
    """Noise budget the adversary assumes, given the (public) format config."""
    cfg = world.profile.container
    if cfg is not None and cfg.padding is not None:
        return atk.DEFAULT_NOISE_BUDGET + (cfg.padding.max_bytes - cfg.padding.min_bytes)
    return atk.DEFAULT_NOISE_BUDGET


def _trial_rng(base_seed, trial: int, role: str) -> random.Random:
    return random.Random(f"{base_seed}:{trial}:{role}")


def build_victim_vault(
    target: bytes,
    item_kind: str,
    rng: random.Random,
    decoy_files: Optional[list[bytes]] = None,
) -> Vault:
    """Fresh victim vault with a handful of personal entries plus the target.

    Every seed password is unique and the planted target appears exactly
    once, matching the single-copy assumption the metric oracles need.
    ``decoy_files`` are the victim's own attachments (never equal to any
    candidate), so storage attacks run against a vault that actually holds
    documents of its own.
    """
    vault = Vault()
    n_seed = rng.randint(4, 7)
    for i in range(n_seed):
        vault.entries.append(
            Credential(
                id=f"v-{i:03d}",
                url=f"https://seed-{rng.randbytes(4).hex()}.example",
                username=f"victim{i:02d}",
                password=("vpw-" + rng.randbytes(12).hex()).encode(),
                last_modified=vault.tick(),
            )
        )
    for j, content in enumerate(decoy_files or []):
        vault.entries[j % n_seed].attachments.append(Attachment(f"doc{j}", content))
    plant = Credential(
        id="v-target",
        url=f"https://planted-{rng.randbytes(4).hex()}.example",
        username=f"victim{n_seed:02d}",
        password=("vpw-" + rng.randbytes(12).hex()).encode(),
        last_modified=vault.tick(),
    )
    if item_kind == "password":
        plant.password = target
    elif item_kind == "url":
        plant.url = target.decode("utf-8")
    elif item_kind == "username":
        plant.username = target.decode("utf-8")
    elif item_kind == "attachment":
        plant.attachments = [Attachment("doc", target)]
    vault.entries.insert(rng.randrange(len(vault.entries) + 1), plant)
    return vault


@dataclass
class TrialResult:
    seed: str
    success: bool
    false_positive: bool
    confirmed: Optional[bool]
    confirmed_wrong: bool
    injections: int
    observations: int
    baseline_observations: int


@dataclass
class TrialsResult:
    attack: str
    workload: str
    n: int
    t: int
    trials: int
    successes: int
    results: list[TrialResult] = field(default_factory=list)

    @property
    def rate(self) -> float:
        return self.successes / self.trials

    @property
    def false_positives(self) -> int:
        return sum(1 for r in self.results if r.false_positive)

    @property
    def confirmed_wrong(self) -> int:
        return sum(1 for r in self.results if r.confirmed_wrong)


def run_trials(
    attack: str,
    workload: Workload,
    trials: int,
    base_seed,
    profile: Optional[AppProfile] = None,
    t: int = 10,
    noise: float = 0.0,
) -> TrialsResult:
    """Appendix-style repetition: fresh state per trial, tally successes."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    spec = ATTACKS[attack]
    prof = profile if profile is not None else BUILTIN_PROFILES[spec.profile]
    out = TrialsResult(attack, workload.label(), workload.n, t, trials, 0)
    for i in range(trials):
        gen_rng = _trial_rng(base_seed, i, "workload")
        if spec.item_kind == "attachment":
            dictionary, decoys = generate_with_decoys(workload, gen_rng, VICTIM_DECOY_FILES)
        else:
            dictionary, decoys = generate_workload(workload, gen_rng), None
        target = gen_rng.choice(dictionary.items)
        vault = build_victim_vault(
            target, spec.item_kind, _trial_rng(base_seed, i, "vault"), decoys
        )
        shares = spec.individual_shares if spec.individual_shares >= 0 else t
        world = world_new(
            prof, vault, spec.tap, f"{base_seed}:{i}:world", individual_shares=shares
        )
        if noise > 0:
            world.victim_noise(noise)
        report: AttackReport = spec.runner(world, dictionary, _trial_rng(base_seed, i, "attack"), t)
        success = report.found == [target]
        fp = bool(report.found) and report.found != [target]
        out.results.append(
            TrialResult(
                seed=f"{base_seed}:{i}",
                success=success,
                false_positive=fp,
                confirmed=report.confirmed,
                confirmed_wrong=bool(report.confirmed) and not success,
                injections=report.injections_used,
                observations=report.observations_used,
                baseline_observations=report.baseline_observations,
            )
        )
        out.successes += success
    return out


# ---------------------------------------------------------------------------
# Experiment grids
# ---------------------------------------------------------------------------


@dataclass
class Cell:
    cell_id: str
    workload: Workload
    n: int
    t: int
    reference_rate: Optional[int]  # percent, None when no reference exists
    attack: str


FIG4_SIZES = (32, 128, 512)
FIG4_REFS = {
    "email": {32: 92, 128: 81, 512: 52},
    10_000: {32: 74, 128: 53, 512: 29},
    500_000: {32: 44, 128: 34, 512: 18},
    1_000_000: {32: 47, 128: 38, 512: 8},
}

FIG5_SIZES = (4, 10, 25, 50, 100)
FIG5_REFS_WEBSITES = {4: 99, 10: 97, 25: 92, 50: 89, 100: 84}
FIG5_REFS_USERNAMES = {4: 80, 10: 66, 25: 54, 50: 46, 100: 24}
FIG5_REFS_RANDOM = {
    5: {4: 89, 10: 81, 25: 64, 50: 50, 100: 39},
    10: {4: 100, 10: 98, 25: 97, 50: 93, 100: 92},
    15: {4: 100, 10: 100, 25: 100, 50: 100, 100: 100},
    20: {4: 100, 10: 100, 25: 100, 50: 100, 100: 100},
}
FIG5_REFS_REPEATED = {
    5: {4: 61, 10: 51, 25: 30, 50: 17, 100: 8},
    10: {4: 74, 10: 59, 25: 33, 50: 28, 100: 13},
    15: {4: 86, 10: 57, 25: 48, 50: 29, 100: 16},
    20: {4: 88, 10: 63, 25: 44, 50: 38, 100: 14},
}


def fig4_cells(synthetic_only: bool = False, email_corpus: Optional[Path] = None) -> list[Cell]:
    cells = []
    for n in FIG4_SIZES:
        if not synthetic_only:
            wl = (
                Workload("corpus", "attachment", n, path=email_corpus)
                if email_corpus
                else Workload("email_like", "attachment", n)
            )
            cells.append(Cell(f"fig4-email-W{n}", wl, n, 1, FIG4_REFS["email"][n], "dedup-bin"))
        for size in (10_000, 500_000, 1_000_000):
            wl = Workload("repeated_char", "attachment", n, size=size)
            cells.append(
                Cell(f"fig4-rep{size}-W{n}", wl, n, 1, FIG4_REFS[size][n], "dedup-bin")
            )
    return cells


def fig5_cells(
    synthetic_only: bool = False,
    websites: Optional[Path] = None,
    usernames: Optional[Path] = None,
    t: int = 10,
) -> list[Cell]:
    cells = []
    for n in FIG5_SIZES:
        if not synthetic_only:
            wsites = websites or bundled_corpus_path("websites")
            unames = usernames or bundled_corpus_path("usernames")
            cells.append(
                Cell(
                    f"fig5-websites-W{n}",
                    Workload("corpus", "url", n, path=wsites),
                    n,
                    t,
                    FIG5_REFS_WEBSITES[n],
                    "compress",
                )
            )
            cells.append(
                Cell(
                    f"fig5-usernames-W{n}",
                    Workload("corpus", "username", n, path=unames),
                    n,
                    t,
                    FIG5_REFS_USERNAMES[n],
                    "compress",
                )
            )
        for size in (5, 10, 15, 20):
            cells.append(
                Cell(
                    f"fig5-random{size}-W{n}",
                    Workload("random_equal", "username", n, size=size),
                    n,
                    t,
                    FIG5_REFS_RANDOM[size][n],
                    "compress",
                )
            )
            cells.append(
                Cell(
                    f"fig5-repeated{size}-W{n}",
                    Workload("repeated_char", "username", n, size=size),
                    n,
                    t,
                    FIG5_REFS_REPEATED[size][n],
                    "compress",
                )
            )
    return cells


CSV_COLUMNS = [
    "cell_id",
    "workload",
    "n",
    "t",
    "trials",
    "successes",
    "rate",
    "paper_reference_rate",
]


def run_cells(
    cells: list[Cell],
    trials: int,
    base_seed,
    progress: Optional[Callable[[str, float], None]] = None,
) -> list[dict]:
    rows = []
    for cell in cells:
        res = run_trials(cell.attack, cell.workload, trials, f"{base_seed}:{cell.cell_id}", t=cell.t)
        row = {
            "cell_id": cell.cell_id,
            "workload": cell.workload.label(),
            "n": cell.n,
            "t": cell.t,
            "trials": trials,
            "successes": res.successes,
            "rate": f"{res.rate:.2f}",
            "paper_reference_rate": "" if cell.reference_rate is None else cell.reference_rate,
        }
        rows.append(row)
        if progress:
            progress(cell.cell_id, res.rate)
    return rows


def rows_to_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow(row)
    return buf.getvalue()


def experiment_fig4(
    trials: int = 100,
    base_seed="fig4",
    synthetic_only: bool = False,
    email_corpus: Optional[Union[str, Path]] = None,
    progress: Optional[Callable[[str, float], None]] = None,
) -> list[dict]:
    """Dictionary attack on attachments: success-rate grid over |W| x workload."""
    path = Path(email_corpus) if email_corpus else None
    if path is not None and not path.exists():
        raise IOError(f"email corpus not found: {path}")
    return run_cells(fig4_cells(synthetic_only, path), trials, base_seed, progress)


def experiment_fig5(
    trials: int = 100,
    base_seed="fig5",
    synthetic_only: bool = False,
    websites: Optional[Union[str, Path]] = None,
    usernames: Optional[Union[str, Path]] = None,
    t: int = 10,
    progress: Optional[Callable[[str, float], None]] = None,
) -> list[dict]:
    """Dictionary attack on usernames and URLs: success-rate grid."""
    wpath = Path(websites) if websites else None
    upath = Path(usernames) if usernames else None
    for p in (wpath, upath):
        if p is not None and not p.exists():
            raise IOError(f"corpus not found: {p}")
    return run_cells(fig5_cells(synthetic_only, wpath, upath, t), trials, base_seed, progress)
