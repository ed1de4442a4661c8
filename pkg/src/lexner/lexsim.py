"""Lexical-similarity vectors: per-word cosine profiles over entity types.

A word's LS vector has one component per inventory label: the cosine
between the word's embedding and that type's embedding, MinMax-scaled to
[-1, +1] across the word's own components. Tables are built offline over a
fixed vocabulary; words outside it fall back to on-the-fly computation
through the subword-composed embedding, scaled the same way.
"""
from __future__ import annotations

import struct
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .corpus import TypeInventory
from .embed import EmbeddingTable
from .errors import DataError, FormatError

LS_MAGIC = b"LSTB"
LS_VERSION = 1


def cosine(u: np.ndarray, v: np.ndarray) -> float:
    """Cosine similarity; 0.0 when either vector is all-zero."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise DataError(f"dimension mismatch: {u.shape} vs {v.shape}")
    nu = np.linalg.norm(u)
    nv = np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        return 0.0
    return float(np.dot(u, v) / (nu * nv))


def _type_matrix(table: EmbeddingTable, inventory: TypeInventory) -> tuple[np.ndarray, np.ndarray]:
    """Stacked type embeddings and their norms; all labels must be known."""
    rows = []
    for label in inventory:
        if label not in table.word_index:
            raise DataError(f"type embedding missing from table: {label!r}")
        rows.append(table.word_vector(label))
    t = np.asarray(np.stack(rows), dtype=np.float64)
    return t, np.linalg.norm(t, axis=1)


def _raw_against(word: str, table: EmbeddingTable, t: np.ndarray, tnorms: np.ndarray) -> np.ndarray:
    v = np.asarray(table.word_vector(word), dtype=np.float64)
    nv = np.linalg.norm(v)
    if nv == 0.0:
        return np.zeros(t.shape[0])
    denom = np.where(tnorms == 0.0, 1.0, tnorms * nv)
    out = (t @ v) / denom
    return np.where(tnorms == 0.0, 0.0, out)


def ls_raw(word: str, table: EmbeddingTable, inventory: TypeInventory) -> np.ndarray:
    """Unscaled cosine profile of a word against every inventory type."""
    t, tnorms = _type_matrix(table, inventory)
    return _raw_against(word, table, t, tnorms)


def minmax_scale(v: Sequence[float] | np.ndarray) -> np.ndarray:
    """Rescale so min maps to -1 and max to +1; a flat vector maps to zeros."""
    v = np.asarray(v, dtype=np.float64)
    if v.size == 0:
        raise DataError("cannot scale an empty vector")
    lo = v.min()
    hi = v.max()
    if hi == lo:
        return np.zeros_like(v)
    return 2.0 * (v - lo) / (hi - lo) - 1.0


class LSTable:
    """Precomputed LS vectors plus an optional embedding-table fallback.

    entries maps word -> float32 vector of len(inventory) components. The
    fallback is consulted for words absent from entries; without one, an
    unknown word gets the zero vector (no preference).
    """

    def __init__(
        self,
        inventory: TypeInventory,
        entries: dict[str, np.ndarray] | None = None,
        fallback: EmbeddingTable | None = None,
    ):
        self.inventory = inventory
        self.entries: dict[str, np.ndarray] = {}
        for w, vec in (entries or {}).items():
            vec = np.asarray(vec, dtype=np.float32)
            if vec.shape != (len(inventory),):
                raise DataError(
                    f"LS entry for {w!r} has shape {vec.shape}, expected ({len(inventory)},)"
                )
            self.entries[w] = vec
        self.fallback = fallback
        self._type_cache: tuple[np.ndarray, np.ndarray] | None = None

    @property
    def dim(self) -> int:
        return len(self.inventory)

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, word: str) -> bool:
        return word.lower() in self.entries

    def vector(self, word: str) -> np.ndarray:
        word = word.lower()
        hit = self.entries.get(word)
        if hit is not None:
            return hit
        if self.fallback is not None:
            if self._type_cache is None:
                self._type_cache = _type_matrix(self.fallback, self.inventory)
            t, tnorms = self._type_cache
            raw = _raw_against(word, self.fallback, t, tnorms)
            return minmax_scale(raw).astype(np.float32)
        return np.zeros(self.dim, dtype=np.float32)

    def content_hash(self) -> str:
        """Order-sensitive digest of entries; stable across save/load."""
        import hashlib

        h = hashlib.sha256()
        for label in self.inventory:
            h.update(label.encode("utf-8") + b"\0")
        for w, vec in self.entries.items():
            h.update(w.encode("utf-8") + b"\0")
            h.update(np.ascontiguousarray(vec, dtype="<f4").tobytes())
        return h.hexdigest()


def build_ls_table(
    vocab: Iterable[str], table: EmbeddingTable, inventory: TypeInventory
) -> LSTable:
    """Scale the raw cosine profile of every vocab word into an LSTable.

    Words are lowercased and deduplicated, first occurrence wins the
    position, so the table iterates (and serializes) in a stable order.
    """
    t, tnorms = _type_matrix(table, inventory)
    out = LSTable(inventory, fallback=table)
    for word in vocab:
        word = word.lower()
        if word in out.entries:
            continue
        raw = _raw_against(word, table, t, tnorms)
        out.entries[word] = minmax_scale(raw).astype(np.float32)
    return out


def top_k_types(
    word: str, k: int, table: EmbeddingTable, inventory: TypeInventory
) -> list[tuple[str, float]]:
    """Types most similar to a word, by raw (unscaled) cosine, descending.

    Ties keep inventory order; stable sort over the negated values does it.
    """
    if not (1 <= k <= len(inventory)):
        raise DataError(f"k must be in [1, {len(inventory)}], got {k}")
    raw = ls_raw(word, table, inventory)
    order = np.argsort(-raw, kind="stable")[:k]
    return [(inventory.labels[i], float(raw[i])) for i in order]


# ---------------------------------------------------------------------------
# Persistence
# ---------------------------------------------------------------------------

def _write_str(fh, s: str) -> None:
    b = s.encode("utf-8")
    if len(b) > 0xFFFF:
        raise DataError(f"string too long to serialize: {len(b)} bytes")
    fh.write(struct.pack("<H", len(b)))
    fh.write(b)


def _read_str(fh, what: str) -> str:
    at = fh.tell()
    raw = fh.read(2)
    if len(raw) < 2:
        raise FormatError(f"truncated {what} length", at)
    (n,) = struct.unpack("<H", raw)
    b = fh.read(n)
    if len(b) < n:
        raise FormatError(f"truncated {what}", at + 2)
    return b.decode("utf-8")


def save_ls_table(table: LSTable, path: str | Path) -> None:
    """Binary format: magic, version, dim, the inventory labels in order,
    record count, then one (word, dim x float32 LE) record per entry."""
    with open(path, "wb") as fh:
        fh.write(LS_MAGIC)
        fh.write(struct.pack("<BI", LS_VERSION, table.dim))
        for label in table.inventory:
            _write_str(fh, label)
        fh.write(struct.pack("<Q", len(table.entries)))
        for w, vec in table.entries.items():
            _write_str(fh, w)
            fh.write(np.ascontiguousarray(vec, dtype="<f4").tobytes())


def load_ls_table(
    path: str | Path, expected_inventory: TypeInventory | None = None
) -> LSTable:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != LS_MAGIC:
            raise FormatError(f"not an LS table file (magic {magic!r})", 0)
        head = fh.read(5)
        if len(head) < 5:
            raise FormatError("truncated header", 4)
        version, dim = struct.unpack("<BI", head)
        if version != LS_VERSION:
            raise FormatError(f"unsupported LS table version {version}", 4)
        labels = [_read_str(fh, f"label {i}") for i in range(dim)]
        inventory = TypeInventory(labels)
        if expected_inventory is not None and inventory != expected_inventory:
            raise DataError("LS table inventory does not match the expected inventory")
        at = fh.tell()
        raw = fh.read(8)
        if len(raw) < 8:
            raise FormatError("truncated record count", at)
        (count,) = struct.unpack("<Q", raw)
        table = LSTable(inventory)
        for i in range(count):
            w = _read_str(fh, f"record {i} word")
            at = fh.tell()
            vec_raw = fh.read(dim * 4)
            if len(vec_raw) < dim * 4:
                raise FormatError(f"truncated record {i} values", at + len(vec_raw))
            table.entries[w] = np.frombuffer(vec_raw, dtype="<f4").copy()
        return table


def save_ls_table_text(table: LSTable, path: str | Path) -> None:
    """Human-readable dump: one "word v1 .. v_dim" line per entry."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("# " + " ".join(table.inventory.labels) + "\n")
        for w, vec in table.entries.items():
            fh.write(w + " " + " ".join(f"{x:.6f}" for x in vec) + "\n")
