"""Subword skipgram embeddings trained with negative sampling.

The trainer consumes plain text lines (one sentence per line, tokens
separated by spaces) and learns one vector per vocabulary word plus a shared
table of hashed character-n-gram buckets. Type-label tokens (leading "/")
are atomic: they get no character n-grams and bypass the frequency cutoff,
so rare labels survive into the vocabulary.
"""
from __future__ import annotations

import math
import struct
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import DataError, FormatError, NumericalError

FNV_OFFSET = 0x811C9DC5
FNV_PRIME = 0x01000193

SUBWORD_MAGIC = b"SUBV"
SUBWORD_VERSION = 1
_SUBWORD_HEADER = "<BBBIIQ"


def is_type_token(word: str) -> bool:
    return word.startswith("/")


def fnv1a(s: str) -> int:
    """32-bit FNV-1a over the UTF-8 bytes of s."""
    h = FNV_OFFSET
    for b in s.encode("utf-8"):
        h ^= b
        h = (h * FNV_PRIME) & 0xFFFFFFFF
    return h


def hash_ngram(ngram: str, bucket_count: int) -> int:
    return fnv1a(ngram) % bucket_count


def char_ngrams(word: str, nmin: int = 3, nmax: int = 6) -> list[str]:
    """Character n-grams of "<word>" plus the whole boundary-marked form.

    Atomic type-label tokens have no subword structure and return [].
    Order is deterministic (shorter first, then left to right); the full
    form is appended unless it already occurred as a regular n-gram.
    """
    if not word or is_type_token(word):
        return []
    marked = f"<{word}>"
    grams: list[str] = []
    for n in range(nmin, nmax + 1):
        for i in range(0, len(marked) - n + 1):
            grams.append(marked[i : i + n])
    if marked not in grams:
        grams.append(marked)
    return grams


@dataclass
class EmbedConfig:
    dim: int = 100
    window: int = 5
    min_count: int = 5
    ngram_min: int = 3
    ngram_max: int = 6
    bucket_count: int = 100_000
    negatives: int = 5
    epochs: int = 5
    learning_rate: float = 0.025
    subsample_threshold: float = 1e-4
    seed: int = 1
    workers: int = 1

    def __post_init__(self):
        if self.dim <= 0:
            raise DataError("dim must be positive")
        if self.window <= 0 or self.negatives <= 0 or self.epochs <= 0:
            raise DataError("window, negatives and epochs must be positive")
        if not (0 < self.ngram_min <= self.ngram_max):
            raise DataError(f"bad n-gram range [{self.ngram_min}, {self.ngram_max}]")
        if self.bucket_count <= 0:
            raise DataError("bucket_count must be positive")
        if self.learning_rate <= 0:
            raise DataError("learning_rate must be positive")
        if self.subsample_threshold < 0:
            raise DataError("subsample_threshold must be non-negative")
        if self.workers <= 0:
            raise DataError("workers must be positive")


class EmbeddingTable:
    """Trained vectors: one row per vocabulary word plus n-gram buckets.

    `word_vector` composes the query form used everywhere downstream:

    * in-vocabulary word: stored row plus the mean of its n-gram buckets
    * out-of-vocabulary word: mean of its n-gram buckets alone
    * type-label token: stored row only (atomic, no n-grams)
    * no usable pieces at all: a zero vector

    Queries are lowercased; the training corpus is lowercased to match.
    A table loaded from a plain text file has no bucket vectors and falls
    back to stored rows only.
    """

    def __init__(
        self,
        words: Sequence[str],
        vectors: np.ndarray,
        bucket_vectors: np.ndarray | None = None,
        ngram_min: int = 3,
        ngram_max: int = 6,
        seed: int = 0,
        counts: Sequence[int] | None = None,
    ):
        vectors = np.asarray(vectors, dtype=np.float32)
        if len(words) != vectors.shape[0]:
            raise DataError(f"{len(words)} words but {vectors.shape[0]} vector rows")
        self.words = list(words)
        self.word_index = {w: i for i, w in enumerate(self.words)}
        if len(self.word_index) != len(self.words):
            raise DataError("duplicate words in embedding table")
        self.vectors = vectors
        self.bucket_vectors = (
            None if bucket_vectors is None else np.asarray(bucket_vectors, dtype=np.float32)
        )
        self.ngram_min = ngram_min
        self.ngram_max = ngram_max
        self.seed = seed
        self.counts = None if counts is None else list(counts)
        self.epoch_losses: list[float] = []
        self._bucket_id_cache: dict[str, np.ndarray] = {}

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def __contains__(self, word: str) -> bool:
        return word.lower() in self.word_index

    def __len__(self) -> int:
        return len(self.words)

    def is_atomic(self, word: str) -> bool:
        return is_type_token(word)

    def bucket_ids(self, word: str) -> np.ndarray:
        """Hashed bucket ids for a word's n-grams (with multiplicity)."""
        if self.bucket_vectors is None:
            return np.empty(0, dtype=np.int64)
        cached = self._bucket_id_cache.get(word)
        if cached is None:
            nbuckets = self.bucket_vectors.shape[0]
            cached = np.array(
                [hash_ngram(g, nbuckets) for g in char_ngrams(word, self.ngram_min, self.ngram_max)],
                dtype=np.int64,
            )
            self._bucket_id_cache[word] = cached
        return cached

    def word_vector(self, word: str) -> np.ndarray:
        word = word.lower()
        row = self.word_index.get(word)
        if is_type_token(word):
            if row is None:
                return np.zeros(self.dim, dtype=np.float32)
            return self.vectors[row].copy()
        parts = []
        if row is not None:
            parts.append(self.vectors[row])
        ids = self.bucket_ids(word)
        if ids.size:
            parts.append(self.bucket_vectors[ids].mean(axis=0))
        if not parts:
            return np.zeros(self.dim, dtype=np.float32)
        out = parts[0].astype(np.float32, copy=True)
        for p in parts[1:]:
            out += p
        return out


def sigmoid(x: np.ndarray) -> np.ndarray:
    # split by sign so neither exp can overflow
    out = np.empty_like(x, dtype=np.float64)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def negative_sampling_loss(
    h: np.ndarray, rows: np.ndarray, y: np.ndarray
) -> tuple[float, np.ndarray, np.ndarray]:
    """Binary logistic loss of output rows against one composed input.

    rows is (n, dim), y is (n,) with 1 for observed context rows and 0 for
    noise rows. Returns (loss, dloss/dh, dloss/drows). Written in softplus
    form so large scores cannot overflow.
    """
    s = rows @ h
    signed = np.where(y > 0, -s, s)
    loss = float(np.sum(np.logaddexp(0.0, signed)))
    dscore = sigmoid(s) - y
    dh = rows.T @ dscore
    drows = np.outer(dscore, h)
    return loss, dh, drows


def _build_vocab(lines: Sequence[str], cfg: EmbedConfig) -> tuple[list[str], np.ndarray]:
    counts: dict[str, int] = {}
    for line in lines:
        for w in line.split():
            counts[w] = counts.get(w, 0) + 1
    kept = [(w, c) for w, c in counts.items() if c >= cfg.min_count or is_type_token(w)]
    kept.sort(key=lambda wc: (-wc[1], wc[0]))
    words = [w for w, _ in kept]
    freqs = np.array([c for _, c in kept], dtype=np.float64)
    return words, freqs


class _Trainer:
    def __init__(self, lines: Sequence[str], cfg: EmbedConfig):
        self.cfg = cfg
        self.words, self.counts = _build_vocab(lines, cfg)
        if not self.words:
            raise DataError("no words survive the frequency cutoff")
        self.word_index = {w: i for i, w in enumerate(self.words)}
        self.lines = [
            np.array(
                [self.word_index[w] for w in line.split() if w in self.word_index],
                dtype=np.int64,
            )
            for line in lines
        ]

        total = self.counts.sum()
        if cfg.subsample_threshold > 0:
            ratio = cfg.subsample_threshold * total / self.counts
            self.keep_prob = np.minimum(1.0, np.sqrt(ratio) + ratio)
        else:
            self.keep_prob = np.ones(len(self.words))

        noise = self.counts ** 0.75
        self.noise_cdf = np.cumsum(noise / noise.sum())
        self.noise_cdf[-1] = 1.0

        rng = np.random.default_rng(cfg.seed)
        bound = 1.0 / cfg.dim
        self.vin = rng.uniform(-bound, bound, (len(self.words), cfg.dim))
        self.gin = rng.uniform(-bound, bound, (cfg.bucket_count, cfg.dim))
        self.vout = np.zeros((len(self.words), cfg.dim))

        # bucket ids per vocab word, fixed for the whole run
        self.ngram_ids: list[np.ndarray] = [
            np.array(
                [hash_ngram(g, cfg.bucket_count) for g in char_ngrams(w, cfg.ngram_min, cfg.ngram_max)],
                dtype=np.int64,
            )
            for w in self.words
        ]

        self.total_tokens = int(sum(len(l) for l in self.lines)) * cfg.epochs
        self.processed = 0
        self.processed_lock = threading.Lock()
        self.epoch_losses: list[float] = []

    def _lr(self) -> float:
        frac = self.processed / max(1, self.total_tokens)
        return self.cfg.learning_rate * max(0.0, 1.0 - frac)

    def _draw_negatives(self, rng: np.random.Generator, target: int, k: int) -> np.ndarray:
        negs = np.searchsorted(self.noise_cdf, rng.random(k))
        while True:
            bad = negs == target
            if not bad.any():
                return negs
            negs[bad] = np.searchsorted(self.noise_cdf, rng.random(int(bad.sum())))

    def _train_line(self, rng: np.random.Generator, ids: np.ndarray) -> tuple[float, int]:
        cfg = self.cfg
        with self.processed_lock:
            self.processed += len(ids)
        if len(ids) == 0:
            return 0.0, 0
        kept = ids[rng.random(len(ids)) < self.keep_prob[ids]]
        if len(kept) < 2:
            return 0.0, 0
        lr = self._lr()
        loss_sum = 0.0
        pairs = 0
        radii = rng.integers(1, cfg.window + 1, size=len(kept))
        for pos in range(len(kept)):
            center = int(kept[pos])
            r = int(radii[pos])
            ctx = np.concatenate([kept[max(0, pos - r) : pos], kept[pos + 1 : pos + 1 + r]])
            if ctx.size == 0:
                continue
            ngrams = self.ngram_ids[center]
            h = self.vin[center].copy()
            if ngrams.size:
                h += self.gin[ngrams].mean(axis=0)

            rows_idx = np.empty(ctx.size * (1 + cfg.negatives), dtype=np.int64)
            y = np.zeros(rows_idx.size)
            for j, c in enumerate(ctx):
                base = j * (1 + cfg.negatives)
                rows_idx[base] = c
                y[base] = 1.0
                rows_idx[base + 1 : base + 1 + cfg.negatives] = self._draw_negatives(
                    rng, int(c), cfg.negatives
                )
            rows = self.vout[rows_idx]
            loss, dh, drows = negative_sampling_loss(h, rows, y)
            loss_sum += loss
            pairs += int(ctx.size)

            np.subtract.at(self.vout, rows_idx, lr * drows)
            self.vin[center] -= lr * dh
            if ngrams.size:
                np.subtract.at(self.gin, ngrams, (lr / ngrams.size) * dh)
        return loss_sum, pairs

    def run(self) -> None:
        cfg = self.cfg
        for epoch in range(cfg.epochs):
            if cfg.workers <= 1:
                rng = np.random.default_rng((cfg.seed, epoch))
                loss = 0.0
                pairs = 0
                for ids in self.lines:
                    l, p = self._train_line(rng, ids)
                    loss += l
                    pairs += p
            else:
                # hogwild: threads share the matrices, updates race benignly
                chunks = [self.lines[i :: cfg.workers] for i in range(cfg.workers)]
                totals = [[0.0, 0] for _ in chunks]

                def work(tid: int) -> None:
                    trng = np.random.default_rng((cfg.seed, epoch, tid))
                    for ids in chunks[tid]:
                        l, p = self._train_line(trng, ids)
                        totals[tid][0] += l
                        totals[tid][1] += p

                threads = [threading.Thread(target=work, args=(t,)) for t in range(len(chunks))]
                for t in threads:
                    t.start()
                for t in threads:
                    t.join()
                loss = sum(t[0] for t in totals)
                pairs = sum(t[1] for t in totals)
            mean = loss / pairs if pairs else 0.0
            if not math.isfinite(mean):
                raise NumericalError(f"non-finite training loss in epoch {epoch}")
            self.epoch_losses.append(mean)


def train_skipgram(lines: Iterable[str], config: EmbedConfig | None = None) -> EmbeddingTable:
    """Train input vectors for every vocabulary word and n-gram bucket.

    Deterministic for a fixed config and seed when workers == 1; with more
    workers the shared updates race benignly and results vary slightly.
    """
    cfg = config or EmbedConfig()
    trainer = _Trainer(list(lines), cfg)
    trainer.run()
    table = EmbeddingTable(
        trainer.words,
        trainer.vin.astype(np.float32),
        trainer.gin.astype(np.float32),
        ngram_min=cfg.ngram_min,
        ngram_max=cfg.ngram_max,
        seed=cfg.seed,
        counts=[int(c) for c in trainer.counts],
    )
    table.epoch_losses = trainer.epoch_losses
    return table


# ---------------------------------------------------------------------------
# Persistence: text vectors, optional binary subword section appended
# ---------------------------------------------------------------------------

def save_embeddings(table: EmbeddingTable, path: str | Path, subword: bool = True) -> None:
    """Write "count dim" then one "word v1 .. v_dim" row per word.

    %.9g keeps float32 exact across a round trip. When the table carries
    n-gram buckets and subword=True, a binary section follows the text rows
    so composed out-of-vocabulary vectors survive reloading.
    """
    with open(path, "wb") as fh:
        fh.write(f"{len(table.words)} {table.dim}\n".encode("utf-8"))
        for i, w in enumerate(table.words):
            row = " ".join(f"{x:.9g}" for x in table.vectors[i])
            fh.write(f"{w} {row}\n".encode("utf-8"))
        if subword and table.bucket_vectors is not None:
            fh.write(SUBWORD_MAGIC)
            fh.write(
                struct.pack(
                    _SUBWORD_HEADER,
                    SUBWORD_VERSION,
                    table.ngram_min,
                    table.ngram_max,
                    table.bucket_vectors.shape[0],
                    table.dim,
                    table.seed,
                )
            )
            fh.write(table.bucket_vectors.astype("<f4").tobytes())


def _parse_row(fields: list[bytes], dim: int, row: int, offset: int) -> tuple[str, list[float]]:
    if len(fields) != dim + 1:
        raise FormatError(f"row {row} has {len(fields) - 1} values, expected {dim}", offset)
    try:
        return fields[0].decode("utf-8"), [float(x) for x in fields[1:]]
    except ValueError:
        raise FormatError(f"row {row} has a non-numeric value", offset) from None


def load_embeddings(path: str | Path) -> EmbeddingTable:
    """Read a vector file back into a table.

    Accepts three layouts: our own format (header plus optional subword
    section), plain headered text (word2vec style), and headerless text
    (one "word v1 .. v_dim" row per line) as produced by some third-party
    pretrained-embedding releases.
    """
    with open(path, "rb") as fh:
        first = fh.readline()
        if not first.strip():
            raise FormatError("empty embedding file", 0)
        head_fields = first.split()
        words: list[str] = []
        rows: list[list[float]] = []
        if len(head_fields) == 2 and head_fields[0].isdigit() and head_fields[1].isdigit():
            count, dim = int(head_fields[0]), int(head_fields[1])
            for i in range(count):
                offset = fh.tell()
                line = fh.readline()
                if not line:
                    raise FormatError(f"truncated embedding file: row {i} missing", offset)
                w, vec = _parse_row(line.split(), dim, i, offset)
                words.append(w)
                rows.append(vec)
        else:
            # headerless third-party format: infer dim from the first row
            dim = len(head_fields) - 1
            if dim < 1:
                raise FormatError("cannot infer embedding dimension from first row", 0)
            offset = 0
            line = first
            i = 0
            while line and line.strip():
                w, vec = _parse_row(line.split(), dim, i, offset)
                words.append(w)
                rows.append(vec)
                offset = fh.tell()
                line = fh.readline()
                i += 1
            vectors = np.array(rows, dtype=np.float32)
            return EmbeddingTable(words, vectors)

        vectors = np.array(rows, dtype=np.float32)
        magic_at = fh.tell()
        magic = fh.read(4)
        if not magic:
            return EmbeddingTable(words, vectors)
        if magic != SUBWORD_MAGIC:
            raise FormatError(f"unexpected trailing bytes {magic!r}", magic_at)
        head_size = struct.calcsize(_SUBWORD_HEADER)
        head = fh.read(head_size)
        if len(head) < head_size:
            raise FormatError("truncated subword header", magic_at + 4)
        version, nmin, nmax, nbuckets, sdim, seed = struct.unpack(_SUBWORD_HEADER, head)
        if version != SUBWORD_VERSION:
            raise FormatError(f"unsupported subword section version {version}", magic_at + 4)
        if sdim != dim:
            raise FormatError(f"subword dim {sdim} != vector dim {dim}", magic_at + 4)
        data_at = fh.tell()
        raw = fh.read(nbuckets * dim * 4)
        if len(raw) < nbuckets * dim * 4:
            raise FormatError(
                f"truncated subword data: {len(raw)} of {nbuckets * dim * 4} bytes",
                data_at + len(raw),
            )
        buckets = np.frombuffer(raw, dtype="<f4").reshape(nbuckets, dim).copy()
        return EmbeddingTable(words, vectors, buckets, ngram_min=nmin, ngram_max=nmax, seed=seed)
