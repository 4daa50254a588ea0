"""Container codec for the cloud-synced vault file.

The on-disk layout mirrors the size-relevant structure of attachment-pooling
password database formats (see FORMAT.md for a hex-annotated walkthrough):

    blob := outer_header || Enc_K( deflate( inner_header || xml_payload ) )

* The outer header is plaintext TLV records: cipher id, compression flag,
  KDF salt stub, outer nonce, and an authentication tag.
* The inner header carries a fresh 64-byte inner key, the per-entry password
  ciphertexts (encrypted under that inner key, so they re-randomize on every
  save), the deduplicated attachment pool, and the optional padding block.
* The XML payload is canonical: fixed tag set, fixed attribute order, no
  insignificant whitespace, fixed-width decimal timestamps. Password values
  appear only as fixed-width references into the inner header.

Attachment contents are pooled by a SHA-256 digest of their bytes, one pool
slot per distinct content (or per folder and content, when the per-folder
mitigation is active). Compression is DEFLATE in a gzip container at a fixed
level with the standard 32 KiB window; the window length matters because
attacks use it to isolate probe content from vault content.

Encryption is a keystream XOR derived from SHA-256 in counter mode, so the
ciphertext length always equals the plaintext length. Key-stretching
hardness is deliberately out of scope: every attack modelled here reads
lengths, never keys.
"""

from __future__ import annotations

import base64
import hashlib
import hmac
import random
import zlib
from dataclasses import dataclass
from enum import Enum
from typing import Optional

from .vault import Attachment, Credential, Folder, Vault

MAGIC = b"\x89VLK\r\n\x1a\n"
VERSION = b"\x01\x00\x00\x00"

COMPRESSION_LEVEL = 6
WINDOW_BITS = 31  # gzip container, 32 KiB window
WINDOW_SIZE = 32768

CIPHER_KEYSTREAM_SHA256 = 1

# Outer header record types
_H_CIPHER = 0x01
_H_COMPRESSION = 0x02
_H_KDF_SALT = 0x03
_H_NONCE = 0x04
_H_MAC = 0x05
_H_END = 0x00

# Inner header record types
_I_KEY = 0x01
_I_POOL = 0x02
_I_PWCIPHER = 0x03
_I_PAD = 0x04
_I_MTIME = 0x05
_I_CLOCK = 0x06
_I_END = 0x00

_SALT_LEN = 16
_NONCE_LEN = 16
_MAC_LEN = 32
_INNER_KEY_LEN = 64


class FormatError(Exception):
    """The byte stream is not a well-formed container."""

    def __init__(self, message: str, offset: Optional[int] = None):
        if offset is not None:
            message = f"{message} (at offset {offset})"
        super().__init__(message)
        self.offset = offset


class IntegrityError(Exception):
    """Authentication failed: wrong secret or tampered bytes."""


class DedupScope(Enum):
    GLOBAL = "global"
    PER_FOLDER = "per_folder"


@dataclass(frozen=True)
class PaddingRange:
    """Random padding appended on every save, length uniform in [min, max]."""

    min_bytes: int = 64
    max_bytes: int = 512

    def __post_init__(self) -> None:
        if not (0 < self.min_bytes <= self.max_bytes):
            raise ValueError("padding range must satisfy 0 < min <= max")


@dataclass(frozen=True)
class ContainerConfig:
    compression: bool = True
    dedup_scope: DedupScope = DedupScope.GLOBAL
    padding: Optional[PaddingRange] = None
    cipher: int = CIPHER_KEYSTREAM_SHA256


@dataclass(frozen=True)
class SerializedVault:
    data: bytes

    @property
    def size(self) -> int:
        return len(self.data)


def compress_bytes(data: bytes) -> bytes:
    """DEFLATE under the codec's fixed parameters (level, gzip container)."""
    co = zlib.compressobj(COMPRESSION_LEVEL, zlib.DEFLATED, WINDOW_BITS)
    return co.compress(data) + co.flush()


def compress_sectioned(volatile: bytes, stable: bytes) -> bytes:
    """One gzip stream with a full flush between the two sections.

    The volatile section (inner key and password ciphertexts) re-randomizes
    on every save; the flush pins the block boundary so its churn cannot
    reshuffle how the rest of the payload is coded, which keeps quiet-vault
    size noise within the re-encryption budget.
    """
    co = zlib.compressobj(COMPRESSION_LEVEL, zlib.DEFLATED, WINDOW_BITS)
    out = co.compress(volatile)
    out += co.flush(zlib.Z_FULL_FLUSH)
    out += co.compress(stable)
    out += co.flush()
    return out


def decompress_bytes(data: bytes) -> bytes:
    return zlib.decompress(data, WINDOW_BITS)


def gzip_len(data: bytes) -> int:
    """Length of the compressed form of ``data``, same parameters as serialize."""
    return len(compress_bytes(data))


def _derive(master_secret: bytes, label: bytes, salt: bytes, nonce: bytes) -> bytes:
    base = hashlib.sha256(master_secret).digest()
    return hmac.new(base, label + salt + nonce, hashlib.sha256).digest()


def _keystream_xor(key: bytes, nonce: bytes, data: bytes) -> bytes:
    out = bytearray(len(data))
    block = b""
    for i in range(0, len(data), 32):
        block = hashlib.sha256(key + nonce + i.to_bytes(8, "little")).digest()
        chunk = data[i : i + 32]
        for j, b in enumerate(chunk):
            out[i + j] = b ^ block[j]
    return bytes(out)


def _tlv(rtype: int, value: bytes) -> bytes:
    return bytes([rtype]) + len(value).to_bytes(4, "little") + value


_XML_ESCAPES = [("&", "&amp;"), ("<", "&lt;"), (">", "&gt;"), ('"', "&quot;")]


def _esc(text: str) -> str:
    for raw, rep in _XML_ESCAPES:
        text = text.replace(raw, rep)
    return text


def _unesc(text: str) -> str:
    for raw, rep in reversed(_XML_ESCAPES):
        text = text.replace(rep, raw)
    return text


def _pool_key(entry: Credential, content_hash: bytes, scope: DedupScope) -> tuple:
    if scope is DedupScope.PER_FOLDER:
        # One pool per trust context: the owner's personal entries, each
        # shared folder, and each individually-sharing sender.
        if entry.folder is not None:
            context = ("folder", entry.folder)
        elif entry.shared_by is not None:
            context = ("sender", entry.shared_by)
        else:
            context = ("personal",)
        return (context, content_hash)
    return content_hash


def build_attachment_pool(vault: Vault, scope: DedupScope) -> tuple[list[bytes], dict]:
    """First-occurrence deduplicated pool and the (entry, attachment) -> index map."""
    pool: list[bytes] = []
    index: dict[tuple, int] = {}
    refs: dict[tuple[str, int], int] = {}
    for entry in vault.entries:
        for pos, att in enumerate(entry.attachments):
            digest = hashlib.sha256(att.content).digest()
            key = _pool_key(entry, digest, scope)
            if key not in index:
                index[key] = len(pool)
                pool.append(att.content)
            refs[(entry.id, pos)] = index[key]
    return pool, refs


def _entry_stamp(entry_id: str, label: str) -> str:
    """Static per-entry metadata blob, base64 like deployed formats use for
    binary timestamps. Derived from the id so it never churns across saves."""
    digest = hashlib.sha256((label + ":" + entry_id).encode()).digest()
    return base64.b64encode(digest[:9]).decode()


def _render_xml(vault: Vault, refs: dict[tuple[str, int], int]) -> str:
    parts = ["<VaultFile><Meta>"]
    for f in vault.folders:
        parts.append('<Folder id="%s" owner="%s">' % (_esc(f.id), _esc(f.owner)))
        for m in f.members:
            parts.append("<Member>%s</Member>" % _esc(m))
        parts.append("</Folder>")
    for fid in sorted(vault.accepted_folders):
        parts.append("<AcceptedFolder>%s</AcceptedFolder>" % _esc(fid))
    for eid in sorted(vault.accepted_entry_ids):
        parts.append("<AcceptedEntry>%s</AcceptedEntry>" % _esc(eid))
    parts.append("</Meta><Root>")
    for i, e in enumerate(vault.entries):
        parts.append("<Entry><UUID>%s</UUID>" % _esc(e.id))
        parts.append(
            "<Times><CreationTime>%s</CreationTime>"
            "<LastAccessTime>%s</LastAccessTime>"
            '<LastModificationTime Ref="%04d"/></Times>'
            % (_entry_stamp(e.id, "created"), _entry_stamp(e.id, "accessed"), i)
        )
        parts.append("<String><Key>UserName</Key><Value>%s</Value></String>" % _esc(e.username))
        parts.append("<String><Key>URL</Key><Value>%s</Value></String>" % _esc(e.url))
        parts.append('<String><Key>Password</Key><Value Protected="True" Ref="%04d"/></String>' % i)
        for pos, att in enumerate(e.attachments):
            parts.append(
                '<Binary><Key>%s</Key><Value Ref="%04d"/></Binary>'
                % (_esc(att.filename), refs[(e.id, pos)])
            )
        if e.shared_by is not None:
            parts.append("<Origin>%s</Origin>" % _esc(e.shared_by))
        if e.folder is not None:
            parts.append("<Group>%s</Group>" % _esc(e.folder))
        parts.append("</Entry>")
    parts.append("</Root></VaultFile>")
    return "".join(parts)


def serialize(
    vault: Vault, master_secret: bytes, config: ContainerConfig, rng: random.Random
) -> SerializedVault:
    """Serialize the vault under ``master_secret``.

    The inner key, password ciphertexts, outer nonce, and padding all come
    from ``rng``; the same vault with an identically-seeded rng serializes
    to identical bytes.
    """
    if config.cipher != CIPHER_KEYSTREAM_SHA256:
        raise ValueError(f"unknown cipher id: {config.cipher}")

    inner_key = rng.randbytes(_INNER_KEY_LEN)
    pool, refs = build_attachment_pool(vault, config.dedup_scope)

    # Everything that changes on every save, or churns on a no-op touch,
    # lives in the volatile section: the rotated inner key, the re-encrypted
    # passwords, and the fixed-width modification times. The rest of the
    # payload is a pure function of vault content.
    volatile = bytearray()
    volatile += _tlv(_I_KEY, inner_key)
    for i, e in enumerate(vault.entries):
        ct = _keystream_xor(inner_key, i.to_bytes(8, "little"), e.password)
        volatile += _tlv(_I_PWCIPHER, ct)
    for e in vault.entries:
        volatile += _tlv(_I_MTIME, e.last_modified.to_bytes(8, "little"))
    volatile += _tlv(_I_CLOCK, vault.clock.to_bytes(8, "little"))
    stable = bytearray()
    for content in pool:
        stable += _tlv(_I_POOL, content)
    if config.padding is not None:
        pad_len = rng.randint(config.padding.min_bytes, config.padding.max_bytes)
        stable += _tlv(_I_PAD, rng.randbytes(pad_len))
    stable += _tlv(_I_END, b"")
    stable += _render_xml(vault, refs).encode("utf-8")

    if config.compression:
        plaintext = compress_sectioned(bytes(volatile), bytes(stable))
    else:
        plaintext = bytes(volatile + stable)

    salt = rng.randbytes(_SALT_LEN)
    nonce = rng.randbytes(_NONCE_LEN)
    key = _derive(master_secret, b"outer-key", salt, nonce)
    mac_key = _derive(master_secret, b"mac-key", salt, nonce)
    ciphertext = _keystream_xor(key, nonce, plaintext)

    def header(mac: bytes) -> bytes:
        h = bytearray()
        h += MAGIC
        h += VERSION
        h += _tlv(_H_CIPHER, config.cipher.to_bytes(4, "little"))
        h += _tlv(_H_COMPRESSION, bytes([1 if config.compression else 0]))
        h += _tlv(_H_KDF_SALT, salt)
        h += _tlv(_H_NONCE, nonce)
        h += _tlv(_H_MAC, mac)
        h += _tlv(_H_END, b"")
        return bytes(h)

    unsigned = header(b"\x00" * _MAC_LEN)
    mac = hmac.new(mac_key, unsigned + ciphertext, hashlib.sha256).digest()
    return SerializedVault(header(mac) + ciphertext)


def encrypted_size(
    vault: Vault, master_secret: bytes, config: ContainerConfig, rng: random.Random
) -> int:
    """Serialize and return the blob size. Convenience for size-channel code."""
    return serialize(vault, master_secret, config, rng).size


_FIELD_NAMES = {
    _H_CIPHER: "cipher-id",
    _H_COMPRESSION: "compression-flag",
    _H_KDF_SALT: "kdf-salt",
    _H_NONCE: "outer-nonce",
    _H_MAC: "mac",
}


def _parse_tlvs(data: bytes, offset: int) -> tuple[dict[int, bytes], int, int]:
    """Parse TLV records until the end marker. Returns (records, end, mac_value_offset)."""
    records: dict[int, bytes] = {}
    mac_off = -1
    while True:
        if offset + 5 > len(data):
            missing = [name for t, name in _FIELD_NAMES.items() if t not in records]
            raise FormatError(
                "truncated outer header: missing " + (missing[0] if missing else "end marker"),
                offset,
            )
        rtype = data[offset]
        length = int.from_bytes(data[offset + 1 : offset + 5], "little")
        value_off = offset + 5
        if value_off + length > len(data):
            raise FormatError(
                f"truncated record {_FIELD_NAMES.get(rtype, hex(rtype))}", offset
            )
        if rtype == _H_END:
            return records, value_off + length, mac_off
        if rtype == _H_MAC:
            mac_off = value_off
        records[rtype] = data[value_off : value_off + length]
        offset = value_off + length


def _parse_inner(data: bytes) -> tuple[bytes, list[bytes], list[int], int, list[bytes], bytes]:
    offset = 0
    inner_key = b""
    pool: list[bytes] = []
    pw_cts: list[bytes] = []
    mtimes: list[int] = []
    clock = 0
    while True:
        if offset + 5 > len(data):
            raise FormatError("truncated inner header", offset)
        rtype = data[offset]
        length = int.from_bytes(data[offset + 1 : offset + 5], "little")
        value = data[offset + 5 : offset + 5 + length]
        offset += 5 + length
        if rtype == _I_END:
            break
        if rtype == _I_KEY:
            inner_key = value
        elif rtype == _I_POOL:
            pool.append(value)
        elif rtype == _I_PWCIPHER:
            pw_cts.append(value)
        elif rtype == _I_MTIME:
            mtimes.append(int.from_bytes(value, "little"))
        elif rtype == _I_CLOCK:
            clock = int.from_bytes(value, "little")
        elif rtype == _I_PAD:
            pass
        else:
            raise FormatError(f"unknown inner record type {rtype:#x}", offset)
    if len(inner_key) != _INNER_KEY_LEN:
        raise FormatError("inner header missing inner key")
    return inner_key, pw_cts, mtimes, clock, pool, data[offset:]


class _XmlCursor:
    """Minimal scanner for the canonical payload. Not a general XML parser."""

    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def expect(self, literal: str) -> None:
        if not self.text.startswith(literal, self.pos):
            raise FormatError(f"expected {literal!r} in payload", self.pos)
        self.pos += len(literal)

    def peek(self, literal: str) -> bool:
        return self.text.startswith(literal, self.pos)

    def take(self, literal: str) -> bool:
        if self.peek(literal):
            self.pos += len(literal)
            return True
        return False

    def until(self, literal: str) -> str:
        end = self.text.find(literal, self.pos)
        if end < 0:
            raise FormatError(f"unterminated element, expected {literal!r}", self.pos)
        out = self.text[self.pos : end]
        self.pos = end + len(literal)
        return out


def deserialize(data: bytes, master_secret: bytes) -> Vault:
    """Parse and decrypt a container back into a Vault.

    Raises :class:`IntegrityError` on a wrong secret or tampered bytes, and
    :class:`FormatError` (with an offset) on malformed structure.
    """
    if len(data) < len(MAGIC) + len(VERSION):
        raise FormatError("truncated outer header: missing magic", 0)
    if data[: len(MAGIC)] != MAGIC:
        raise FormatError("bad magic bytes", 0)
    if data[len(MAGIC) : len(MAGIC) + len(VERSION)] != VERSION:
        raise FormatError("unsupported version", len(MAGIC))

    records, body_off, mac_off = _parse_tlvs(data, len(MAGIC) + len(VERSION))
    for rtype, name in _FIELD_NAMES.items():
        if rtype not in records:
            raise FormatError(f"truncated outer header: missing {name}")

    salt = records[_H_KDF_SALT]
    nonce = records[_H_NONCE]
    mac = records[_H_MAC]
    ciphertext = data[body_off:]

    mac_key = _derive(master_secret, b"mac-key", salt, nonce)
    unsigned = data[:mac_off] + b"\x00" * _MAC_LEN + data[mac_off + _MAC_LEN : body_off]
    expected = hmac.new(mac_key, unsigned + ciphertext, hashlib.sha256).digest()
    if not hmac.compare_digest(mac, expected):
        raise IntegrityError("authentication failed: wrong secret or corrupted container")

    cipher = int.from_bytes(records[_H_CIPHER], "little")
    if cipher != CIPHER_KEYSTREAM_SHA256:
        raise FormatError(f"unknown cipher id: {cipher}")
    key = _derive(master_secret, b"outer-key", salt, nonce)
    plaintext = _keystream_xor(key, nonce, ciphertext)
    if records[_H_COMPRESSION] == b"\x01":
        try:
            plaintext = decompress_bytes(plaintext)
        except zlib.error as exc:
            raise IntegrityError(f"decompression failed: {exc}") from exc

    inner_key, pw_cts, mtimes, clock, pool, xml_bytes = _parse_inner(plaintext)
    cur = _XmlCursor(xml_bytes.decode("utf-8"))

    cur.expect("<VaultFile><Meta>")
    folders: list[Folder] = []
    accepted_folders: set[str] = set()
    accepted_entries: set[str] = set()
    while cur.peek("<Folder "):
        cur.expect('<Folder id="')
        fid = _unesc(cur.until('" owner="'))
        owner = _unesc(cur.until('">'))
        members = []
        while cur.take("<Member>"):
            members.append(_unesc(cur.until("</Member>")))
        cur.expect("</Folder>")
        folders.append(Folder(fid, owner, tuple(members)))
    while cur.take("<AcceptedFolder>"):
        accepted_folders.add(_unesc(cur.until("</AcceptedFolder>")))
    while cur.take("<AcceptedEntry>"):
        accepted_entries.add(_unesc(cur.until("</AcceptedEntry>")))
    cur.expect("</Meta><Root>")

    entries: list[Credential] = []
    while cur.take("<Entry><UUID>"):
        eid = _unesc(cur.until("</UUID>"))
        cur.expect("<Times><CreationTime>")
        cur.until("</CreationTime>")
        cur.expect("<LastAccessTime>")
        cur.until("</LastAccessTime>")
        cur.expect('<LastModificationTime Ref="')
        mtime_ref = int(cur.until('"/></Times>'))
        if mtime_ref >= len(mtimes):
            raise FormatError(f"modification-time reference {mtime_ref} out of range", cur.pos)
        last_modified = mtimes[mtime_ref]
        cur.expect("<String><Key>UserName</Key><Value>")
        username = _unesc(cur.until("</Value></String>"))
        cur.expect("<String><Key>URL</Key><Value>")
        url = _unesc(cur.until("</Value></String>"))
        cur.expect('<String><Key>Password</Key><Value Protected="True" Ref="')
        pw_ref = int(cur.until('"/></String>'))
        if pw_ref >= len(pw_cts):
            raise FormatError(f"password reference {pw_ref} out of range", cur.pos)
        password = _keystream_xor(inner_key, pw_ref.to_bytes(8, "little"), pw_cts[pw_ref])
        attachments: list[Attachment] = []
        while cur.take("<Binary><Key>"):
            fname = _unesc(cur.until('</Key><Value Ref="'))
            ref = int(cur.until('"/></Binary>'))
            if ref >= len(pool):
                raise FormatError(f"attachment reference {ref} out of range", cur.pos)
            attachments.append(Attachment(fname, pool[ref]))
        shared_by = None
        if cur.take("<Origin>"):
            shared_by = _unesc(cur.until("</Origin>"))
        folder = None
        if cur.take("<Group>"):
            folder = _unesc(cur.until("</Group>"))
        cur.expect("</Entry>")
        entries.append(
            Credential(
                id=eid,
                url=url,
                username=username,
                password=password,
                attachments=attachments,
                shared_by=shared_by,
                folder=folder,
                last_modified=last_modified,
            )
        )
    cur.expect("</Root></VaultFile>")

    return Vault(
        entries=entries,
        folders=folders,
        clock=clock,
        accepted_folders=accepted_folders,
        accepted_entry_ids=accepted_entries,
    )
