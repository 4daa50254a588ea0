"""Candidate-dictionary generators and corpus loading.

Three synthetic families plus a file loader:

* equal-size random byte strings, which minimize compressor noise;
* variable-length strings built from runs of repeated characters, which
  maximize it;
* email-like documents (headers, body, quoted reply, signature) standing in
  for a real mail corpus, which is not bundled;
* newline-delimited corpus files supplied by the user (websites, usernames,
  or pre-flattened file corpora), shuffled before taking the first n unique
  items.

Small website and username stand-in lists ship in ``data/``.
"""

from __future__ import annotations

import random
import string
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Optional, Union

from .attacks import Dictionary

PRINTABLE = string.ascii_letters + string.digits + string.punctuation + " "


@dataclass(frozen=True)
class Workload:
    """Recipe for one candidate dictionary."""

    kind: str  # "random_equal" | "repeated_char" | "email_like" | "corpus"
    item_kind: str  # Dictionary kind
    n: int
    size: int = 0  # exact size for random_equal, max size for repeated_char
    path: Optional[Union[str, Path]] = None

    def label(self) -> str:
        if self.kind == "random_equal":
            return f"random-equal-{self.size}B"
        if self.kind == "repeated_char":
            return f"repeated-char-max{self.size}B"
        if self.kind == "email_like":
            return "email-like"
        return f"corpus:{Path(str(self.path)).name}"


_ALNUM = string.ascii_lowercase + string.digits


def random_equal_items(n: int, size: int, rng: random.Random, text: bool = False) -> list[bytes]:
    """n distinct items of exactly ``size`` bytes: raw bytes, or random
    alphanumeric text for items that land in plaintext string fields."""
    items: list[bytes] = []
    seen: set[bytes] = set()
    while len(items) < n:
        if text:
            item = "".join(rng.choice(_ALNUM) for _ in range(size)).encode()
        else:
            item = rng.randbytes(size)
        if item not in seen:
            seen.add(item)
            items.append(item)
    return items


STRING_MAX_RUN = 4


def repeated_char_item(max_size: int, rng: random.Random, max_run: Optional[int] = None) -> bytes:
    """Length uniform in [1, max_size], built as runs of one repeated
    printable character.

    Run length caps differ by use. Strings probed through plaintext fields
    use short runs (a short string that is one single run survives
    character permutation unchanged, which starves two-tries scoring).
    Attachment files use length-proportional runs, which collapse almost
    entirely under compression and push the deduplication signal down to
    the compressor's noise floor.
    """
    length = rng.randint(1, max_size)
    if max_run is None:
        max_run = length
    out = []
    remaining = length
    while remaining > 0:
        run = min(rng.randint(1, max(2, max_run)), remaining)
        out.append(rng.choice(PRINTABLE) * run)
        remaining -= run
    return "".join(out).encode("utf-8")[:length]


def repeated_char_items(
    n: int, max_size: int, rng: random.Random, max_run: Optional[int] = None
) -> list[bytes]:
    items: list[bytes] = []
    seen: set[bytes] = set()
    guard = 0
    while len(items) < n:
        item = repeated_char_item(max_size, rng, max_run)
        if item not in seen:
            seen.add(item)
            items.append(item)
        guard += 1
        if guard > 1000 * n:
            raise RuntimeError("cannot draw enough distinct repeated-char strings")
    return items


_FIRST = ["ana", "bo", "carl", "dee", "eli", "fay", "gus", "hana", "ivo", "jun",
          "kai", "lena", "mia", "nils", "ola", "pia", "quin", "rosa", "sam", "tea"]
_LAST = ["adams", "brook", "cole", "diaz", "evans", "frey", "gray", "hale",
         "irwin", "jones", "kerr", "lane", "moss", "nash", "ortiz", "park",
         "quist", "reese", "shaw", "tate"]
_TOPICS = ["quarterly forecast", "meeting notes", "contract draft", "travel plan",
           "invoice reminder", "project status", "budget review", "release schedule",
           "training session", "audit findings"]
_SENTENCES = [
    "Please find the latest numbers attached for your review.",
    "We should circle back on this before the end of the week.",
    "The committee raised a few concerns about the timeline.",
    "Let me know if the figures in section two look right to you.",
    "I have copied the regional leads so everyone stays in the loop.",
    "The vendor confirmed delivery for the second week of the month.",
    "Can you forward the signed copy once legal has approved it?",
    "Our estimates still assume the original headcount plan.",
    "The draft needs another pass before it goes to the board.",
    "Thanks for turning this around so quickly yesterday.",
]


def email_like_item(rng: random.Random) -> bytes:
    """One synthetic email with headers, body, a quoted reply, and a signature."""
    sender = f"{rng.choice(_FIRST)}.{rng.choice(_LAST)}@corp-{rng.randint(1, 99):02d}.example"
    rcpt = f"{rng.choice(_FIRST)}.{rng.choice(_LAST)}@corp-{rng.randint(1, 99):02d}.example"
    topic = rng.choice(_TOPICS)
    lines = [
        f"From: {sender}",
        f"To: {rcpt}",
        f"Subject: RE: {topic}",
        f"Date: 2001-{rng.randint(1, 12):02d}-{rng.randint(1, 28):02d} "
        f"{rng.randint(0, 23):02d}:{rng.randint(0, 59):02d}",
        f"Message-ID: <{rng.randbytes(8).hex()}@corp.example>",
        "",
    ]
    for _ in range(rng.randint(2, 8)):
        lines.append(rng.choice(_SENTENCES))
    lines.append("")
    lines.append(f"-- {rng.choice(_FIRST).title()}")
    lines.append("")
    lines.append(f"On {rng.randint(1, 28)} last month, {rcpt} wrote:")
    for _ in range(rng.randint(1, 6)):
        lines.append("> " + rng.choice(_SENTENCES))
        if rng.random() < 0.3:
            lines.append(">> " + rng.choice(_SENTENCES))
    return "\n".join(lines).encode("utf-8")


def email_like_items(n: int, rng: random.Random) -> list[bytes]:
    items: list[bytes] = []
    seen: set[bytes] = set()
    while len(items) < n:
        item = email_like_item(rng)
        if item not in seen:
            seen.add(item)
            items.append(item)
    return items


def corpus_items(path: Union[str, Path], n: int, rng: random.Random) -> list[bytes]:
    """First n unique newline-delimited items after an rng shuffle."""
    p = Path(path)
    try:
        raw = p.read_bytes()
    except OSError as exc:
        raise IOError(f"cannot read corpus file {p}: {exc}") from exc
    lines = []
    seen = set()
    for line in raw.splitlines():
        line = line.strip()
        if line and line not in seen:
            seen.add(line)
            lines.append(line)
    if len(lines) < n:
        raise ValueError(f"corpus {p} holds {len(lines)} unique items, need {n}")
    rng.shuffle(lines)
    return lines[:n]


def bundled_corpus_path(name: str) -> Path:
    """Path of a stand-in corpus shipped with the package (websites, usernames)."""
    ref = resources.files("vaultleak.data") / f"{name}.txt"
    with resources.as_file(ref) as p:
        return Path(p)


def _draw_items(workload: Workload, count: int, rng: random.Random) -> list[bytes]:
    if workload.kind == "random_equal":
        text = workload.item_kind in ("url", "username")
        return random_equal_items(count, workload.size, rng, text=text)
    if workload.kind == "repeated_char":
        max_run = None if workload.item_kind == "attachment" else STRING_MAX_RUN
        return repeated_char_items(count, workload.size, rng, max_run)
    if workload.kind == "email_like":
        return email_like_items(count, rng)
    if workload.kind == "corpus":
        if workload.path is None:
            raise ValueError("corpus workload needs a path")
        return corpus_items(workload.path, count, rng)
    raise ValueError(f"unknown workload kind {workload.kind!r}")


def generate_workload(workload: Workload, rng: random.Random) -> Dictionary:
    if workload.n < 1:
        raise ValueError("workload needs n >= 1")
    return Dictionary(tuple(_draw_items(workload, workload.n, rng)), workload.item_kind)


def generate_with_decoys(
    workload: Workload, rng: random.Random, n_decoys: int
) -> tuple[Dictionary, list[bytes]]:
    """Candidate dictionary plus extra same-distribution items that are
    guaranteed distinct from every candidate (victim-vault filler)."""
    items = _draw_items(workload, workload.n + n_decoys, rng)
    return Dictionary(tuple(items[: workload.n]), workload.item_kind), items[workload.n :]
