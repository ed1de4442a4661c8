"""The BiLSTM-CRF tagger: feature assembly, forward/backward, checkpoints.

Everything numerical runs in float64; checkpoints store float32 (matching
the embedding files). The LS block is a frozen lookup: it contributes
features but never receives gradient, and its table bytes are untouched by
training.

Feature blocks are concatenated in a fixed order (word embedding, char
BiLSTM representation, capitalization embedding, LS vector, gazetteer
bits); disabled blocks are simply omitted and every downstream dimension
shrinks to match.
"""
from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from ..corpus import Sentence, capitalization_class
from ..embed import EmbeddingTable
from ..errors import DataError, FormatError
from ..lexsim import LSTable
from .crf import (
    bilou_allowed_transitions,
    crf_nll_and_grad,
    viterbi_decode,
)
from .gazetteer import Gazetteer, gazetteer_features
from .lstm import glorot, init_lstm_params, lstm_backward, lstm_forward, reverse_padded

CHECKPOINT_MAGIC = b"LXNR"
CHECKPOINT_VERSION = 1

FEATURE_NAMES = ("word_emb", "char", "cap", "ls", "gazetteer")
UNK_WORD = "<unk>"
N_CAP_CLASSES = 6


@dataclass
class TaggerConfig:
    word_hidden: int = 128
    char_emb_dim: int = 25
    char_hidden: int = 50
    cap_emb_dim: int = 25
    dropout_prob: float = 0.5
    batch_size: int = 10
    learning_rate: float = 0.009
    momentum: float = 0.9
    clip_norm: float = 5.0
    clip_mode: str = "global"
    max_epochs: int = 50
    decay_rate: float = 0.95
    patience: int = 5
    seed: int = 1
    features: tuple[str, ...] = ("word_emb", "char", "cap", "ls")
    mask_decode: bool = True

    def __post_init__(self):
        if isinstance(self.features, (list, set)):
            self.features = tuple(self.features)
        for f in self.features:
            if f not in FEATURE_NAMES:
                raise DataError(f"unknown feature block: {f!r}")
        if len(set(self.features)) != len(self.features):
            raise DataError("duplicate feature blocks")
        if not self.features:
            raise DataError("at least one feature block is required")
        for name in ("word_hidden", "char_emb_dim", "char_hidden", "cap_emb_dim",
                     "batch_size", "max_epochs", "patience"):
            if getattr(self, name) <= 0:
                raise DataError(f"{name} must be positive")
        if not (0.0 <= self.dropout_prob < 1.0):
            raise DataError("dropout_prob must be in [0, 1)")
        if not (0.0 < self.decay_rate <= 1.0):
            raise DataError("decay_rate must be in (0, 1]")
        if self.clip_mode not in ("global", "value"):
            raise DataError(f"unknown clip_mode: {self.clip_mode!r}")
        if self.learning_rate <= 0 or self.clip_norm <= 0:
            raise DataError("learning_rate and clip_norm must be positive")
        if not (0.0 <= self.momentum < 1.0):
            raise DataError("momentum must be in [0, 1)")

    def uses(self, feature: str) -> bool:
        return feature in self.features


class TaggerModel:
    """Parameters plus the frozen lookups; built by `build`, not directly."""

    def __init__(
        self,
        config: TaggerConfig,
        tags: list[str],
        chars: list[str],
        words: list[str],
        params: dict[str, np.ndarray],
        ls_table: LSTable | None,
        gazetteer: Gazetteer | None,
    ):
        self.config = config
        self.tags = list(tags)
        self.tag_index = {t: i for i, t in enumerate(self.tags)}
        self.chars = list(chars)
        self.char_index = {c: i + 1 for i, c in enumerate(self.chars)}  # 0 = UNK
        self.words = list(words)  # pretrained vocab; row 0 of word_emb is UNK
        self.word_index = {w: i + 1 for i, w in enumerate(self.words)}
        self.params = params
        self.ls_table = ls_table
        self.gazetteer = gazetteer
        if config.uses("ls") and ls_table is None:
            raise DataError("config enables the ls block but no LS table was given")
        if config.uses("gazetteer") and gazetteer is None:
            raise DataError("config enables the gazetteer block but none was given")
        self.allowed = bilou_allowed_transitions(self.tags)

    # -- construction -------------------------------------------------------

    @classmethod
    def build(
        cls,
        config: TaggerConfig,
        tags: Sequence[str],
        charset: Sequence[str],
        pretrained: EmbeddingTable | None = None,
        ls_table: LSTable | None = None,
        gazetteer: Gazetteer | None = None,
    ) -> "TaggerModel":
        if config.uses("word_emb") and pretrained is None:
            raise DataError("word_emb block needs a pretrained embedding table")
        tags = sorted(set(tags))
        if not tags:
            raise DataError("empty tag set")
        chars = sorted(set(charset))
        words = list(pretrained.words) if pretrained is not None else []

        rng = np.random.default_rng(config.seed)
        params: dict[str, np.ndarray] = {}
        input_dim = 0
        if config.uses("word_emb"):
            d_w = pretrained.dim
            word_emb = np.zeros((len(words) + 1, d_w))
            word_emb[1:] = np.asarray(pretrained.vectors, dtype=np.float64)
            params["word_emb"] = word_emb
            input_dim += d_w
        if config.uses("char"):
            params["char_emb"] = glorot(rng, (len(chars) + 1, config.char_emb_dim))
            for name in ("char_fwd", "char_bwd"):
                for k, v in init_lstm_params(rng, config.char_emb_dim, config.char_hidden).items():
                    params[f"{name}.{k}"] = v
            input_dim += 2 * config.char_hidden
        if config.uses("cap"):
            params["cap_emb"] = glorot(rng, (N_CAP_CLASSES, config.cap_emb_dim))
            input_dim += config.cap_emb_dim
        if config.uses("ls"):
            if ls_table is None:
                raise DataError("ls block enabled but no LS table given")
            input_dim += ls_table.dim
        if config.uses("gazetteer"):
            if gazetteer is None:
                raise DataError("gazetteer block enabled but no gazetteer given")
            input_dim += len(gazetteer)

        for name in ("word_fwd", "word_bwd"):
            for k, v in init_lstm_params(rng, input_dim, config.word_hidden).items():
                params[f"{name}.{k}"] = v
        params["proj_w"] = glorot(rng, (2 * config.word_hidden, len(tags)))
        params["proj_b"] = np.zeros(len(tags))
        params["trans"] = np.zeros((len(tags) + 2, len(tags) + 2))
        return cls(config, tags, chars, words, params, ls_table, gazetteer)

    # -- feature assembly ---------------------------------------------------

    @property
    def input_dim(self) -> int:
        return self.params["word_fwd.wx"].shape[0]

    def word_id(self, surface: str) -> int:
        return self.word_index.get(surface, 0)

    def char_ids(self, surface: str) -> list[int]:
        return [self.char_index.get(c, 0) for c in surface]

    def _char_reps(self, batch: list[Sentence]) -> tuple[np.ndarray, dict]:
        """BiLSTM over characters of every real token in the batch.

        Returns reps (N, 2*char_hidden) in flat token order plus the cache
        needed for the backward pass.
        """
        cfg = self.config
        tokens = [t.surface for s in batch for t in s.tokens]
        n = len(tokens)
        hc = cfg.char_hidden
        if n == 0:
            return np.zeros((0, 2 * hc)), {"n": 0}
        clens = np.array([max(1, len(w)) for w in tokens])
        lmax = int(clens.max())
        cids = np.zeros((lmax, n), dtype=np.int64)
        for j, w in enumerate(tokens):
            for k, c in enumerate(w):
                cids[k, j] = self.char_index.get(c, 0)
        cmask = (np.arange(lmax)[:, None] < clens[None, :]).astype(np.float64)
        emb = self.params["char_emb"][cids]  # (lmax, n, char_emb_dim)
        fwd_p = {k: self.params[f"char_fwd.{k}"] for k in ("wx", "wh", "b")}
        bwd_p = {k: self.params[f"char_bwd.{k}"] for k in ("wx", "wh", "b")}
        emb_rev = reverse_padded(emb, clens)
        _, hf, _, cache_f = lstm_forward(fwd_p, emb, cmask)
        _, hb, _, cache_b = lstm_forward(bwd_p, emb_rev, cmask)
        reps = np.concatenate([hf, hb], axis=1)
        ctx = {
            "n": n, "cids": cids, "clens": clens, "cmask": cmask,
            "cache_f": cache_f, "cache_b": cache_b,
            "fwd_p": fwd_p, "bwd_p": bwd_p,
        }
        return reps, ctx

    def _char_backward(self, d_reps: np.ndarray, ctx: dict, grads: dict) -> None:
        cfg = self.config
        if ctx["n"] == 0:
            return
        hc = cfg.char_hidden
        dxf, gf = lstm_backward(ctx["fwd_p"], ctx["cache_f"], None,
                                dh_final=d_reps[:, :hc])
        dxb_rev, gb = lstm_backward(ctx["bwd_p"], ctx["cache_b"], None,
                                    dh_final=d_reps[:, hc:])
        for k in ("wx", "wh", "b"):
            grads[f"char_fwd.{k}"] += gf[k]
            grads[f"char_bwd.{k}"] += gb[k]
        dxe = dxf + reverse_padded(dxb_rev, ctx["clens"])
        real = ctx["cmask"].astype(bool)
        np.add.at(grads["char_emb"], ctx["cids"][real], dxe[real])

    def _assemble(self, batch: list[Sentence]) -> tuple[np.ndarray, np.ndarray, np.ndarray, dict]:
        """Concatenate feature blocks into x (T, B, D_in).

        Also returns lengths (B,), mask (T, B), and the assembly context
        used to route gradients back into the trainable blocks.
        """
        cfg = self.config
        B = len(batch)
        lengths = np.array([len(s) for s in batch], dtype=np.int64)
        if np.any(lengths < 1):
            raise DataError("cannot process an empty sentence in a batch")
        T = int(lengths.max())
        mask = (np.arange(T)[:, None] < lengths[None, :]).astype(np.float64)
        real = mask.astype(bool)

        blocks: list[np.ndarray] = []
        ctx: dict = {"lengths": lengths, "mask": mask, "real": real, "slices": {}}
        at = 0

        if cfg.uses("word_emb"):
            wids = np.zeros((T, B), dtype=np.int64)
            for b, s in enumerate(batch):
                for t, tok in enumerate(s.tokens):
                    wids[t, b] = self.word_id(tok.surface)
            d = self.params["word_emb"].shape[1]
            blocks.append(self.params["word_emb"][wids] * mask[:, :, None])
            ctx["wids"] = wids
            ctx["slices"]["word_emb"] = slice(at, at + d)
            at += d

        if cfg.uses("char"):
            reps, char_ctx = self._char_reps(batch)
            d = 2 * cfg.char_hidden
            block = np.zeros((T, B, d))
            k = 0
            for b, s in enumerate(batch):
                for t in range(len(s)):
                    block[t, b] = reps[k]
                    k += 1
            blocks.append(block)
            ctx["char"] = char_ctx
            ctx["slices"]["char"] = slice(at, at + d)
            at += d

        if cfg.uses("cap"):
            caps = np.zeros((T, B), dtype=np.int64)
            for b, s in enumerate(batch):
                for t, tok in enumerate(s.tokens):
                    caps[t, b] = int(capitalization_class(tok))
            d = cfg.cap_emb_dim
            blocks.append(self.params["cap_emb"][caps] * mask[:, :, None])
            ctx["caps"] = caps
            ctx["slices"]["cap"] = slice(at, at + d)
            at += d

        if cfg.uses("ls"):
            d = self.ls_table.dim
            block = np.zeros((T, B, d))
            for b, s in enumerate(batch):
                for t, tok in enumerate(s.tokens):
                    block[t, b] = np.asarray(self.ls_table.vector(tok.surface), dtype=np.float64)
            blocks.append(block)
            ctx["slices"]["ls"] = slice(at, at + d)
            at += d

        if cfg.uses("gazetteer"):
            d = len(self.gazetteer)
            block = np.zeros((T, B, d))
            for b, s in enumerate(batch):
                block[: len(s), b] = gazetteer_features(s, self.gazetteer)
            blocks.append(block)
            ctx["slices"]["gazetteer"] = slice(at, at + d)
            at += d

        x = np.concatenate(blocks, axis=2)
        return x, lengths, mask, ctx

    def assemble_input(self, token_surface: str) -> np.ndarray:
        """Feature vector of a single token (the first assembly row)."""
        s = Sentence.from_words([token_surface])
        x, _, _, _ = self._assemble([s])
        return x[0, 0]

    # -- forward/backward ---------------------------------------------------

    def _word_bilstm(
        self, x: np.ndarray, lengths: np.ndarray, mask: np.ndarray
    ) -> tuple[np.ndarray, dict]:
        fwd_p = {k: self.params[f"word_fwd.{k}"] for k in ("wx", "wh", "b")}
        bwd_p = {k: self.params[f"word_bwd.{k}"] for k in ("wx", "wh", "b")}
        x_rev = reverse_padded(x, lengths)
        hf_seq, _, _, cache_f = lstm_forward(fwd_p, x, mask)
        hb_seq_rev, _, _, cache_b = lstm_forward(bwd_p, x_rev, mask)
        hb_seq = reverse_padded(hb_seq_rev, lengths)
        h = np.concatenate([hf_seq, hb_seq], axis=2)
        return h, {"cache_f": cache_f, "cache_b": cache_b,
                   "fwd_p": fwd_p, "bwd_p": bwd_p}

    def nll_and_gradients(
        self,
        batch: list[Sentence],
        train: bool = False,
        rng: np.random.Generator | None = None,
        corrupt: str | None = None,
    ) -> tuple[float, dict[str, np.ndarray]]:
        """Batch NLL and gradients for every trainable parameter tensor.

        Training mode applies fresh per-timestep dropout masks to the word
        BiLSTM's input and output vectors; rng is required then. `corrupt`
        names a parameter whose gradient is deliberately damaged, for
        exercising the gradient checker's failure path.
        """
        cfg = self.config
        for s in batch:
            if s.tags is None:
                raise DataError("training sentences must carry gold tags")
        x, lengths, mask, ctx = self._assemble(batch)
        T, B, _ = x.shape

        drop_in = drop_out_mask = None
        if train and cfg.dropout_prob > 0.0:
            if rng is None:
                raise DataError("training mode needs a random generator for dropout")
            keep = 1.0 - cfg.dropout_prob
            drop_in = (rng.random(x.shape) < keep) / keep
            x = x * drop_in

        h, wctx = self._word_bilstm(x, lengths, mask)
        if train and cfg.dropout_prob > 0.0:
            keep = 1.0 - cfg.dropout_prob
            drop_out_mask = (rng.random(h.shape) < keep) / keep
            h = h * drop_out_mask

        em = h @ self.params["proj_w"] + self.params["proj_b"]

        gold = np.zeros((T, B), dtype=np.int64)
        for b, s in enumerate(batch):
            for t, tag in enumerate(s.tags):
                try:
                    gold[t, b] = self.tag_index[tag]
                except KeyError:
                    raise DataError(f"tag {tag!r} not in the model tag set") from None

        nll, dem, dtrans = crf_nll_and_grad(em, lengths, gold, self.params["trans"])

        grads = {k: np.zeros_like(v) for k, v in self.params.items()}
        grads["trans"] = dtrans
        flat_h = h.reshape(T * B, -1)
        flat_dem = dem.reshape(T * B, -1)
        grads["proj_w"] = flat_h.T @ flat_dem
        grads["proj_b"] = flat_dem.sum(axis=0)
        dh = dem @ self.params["proj_w"].T
        if drop_out_mask is not None:
            dh = dh * drop_out_mask

        hc = cfg.word_hidden
        dh_fwd = dh[:, :, :hc]
        dh_bwd_rev = reverse_padded(dh[:, :, hc:], lengths)
        dx_f, gf = lstm_backward(wctx["fwd_p"], wctx["cache_f"], dh_fwd)
        dx_b_rev, gb = lstm_backward(wctx["bwd_p"], wctx["cache_b"], dh_bwd_rev)
        for k in ("wx", "wh", "b"):
            grads[f"word_fwd.{k}"] = gf[k]
            grads[f"word_bwd.{k}"] = gb[k]
        dx = dx_f + reverse_padded(dx_b_rev, lengths)
        if drop_in is not None:
            dx = dx * drop_in

        sl = ctx["slices"]
        real = ctx["real"]
        if cfg.uses("word_emb"):
            np.add.at(grads["word_emb"], ctx["wids"][real], dx[:, :, sl["word_emb"]][real])
        if cfg.uses("char"):
            d_block = dx[:, :, sl["char"]]
            # flat token order must match _char_reps: sentence-major
            d_reps = np.concatenate(
                [d_block[: len(s), b] for b, s in enumerate(batch)], axis=0)
            self._char_backward(d_reps, ctx["char"], grads)
        if cfg.uses("cap"):
            np.add.at(grads["cap_emb"], ctx["caps"][real], dx[:, :, sl["cap"]][real])
        # ls and gazetteer blocks are frozen: no gradient routes to them

        if corrupt is not None:
            if corrupt not in grads:
                raise DataError(f"cannot corrupt unknown parameter {corrupt!r}")
            grads[corrupt] = grads[corrupt] + 1e-2 * (np.abs(grads[corrupt]) + 1.0)
        return nll, grads

    # -- inference ----------------------------------------------------------

    def emissions(self, batch: list[Sentence]) -> tuple[np.ndarray, np.ndarray]:
        """Eval-mode emission scores (T, B, L) and lengths."""
        x, lengths, mask, _ = self._assemble(batch)
        h, _ = self._word_bilstm(x, lengths, mask)
        em = h @ self.params["proj_w"] + self.params["proj_b"]
        return em, lengths

    def tag_batch(self, batch: list[Sentence]) -> list[list[str]]:
        if not batch:
            return []
        nonempty = [s for s in batch if len(s) > 0]
        out: dict[int, list[str]] = {}
        if nonempty:
            em, lengths = self.emissions(nonempty)
            allowed = self.allowed if self.config.mask_decode else None
            k = 0
            for i, s in enumerate(batch):
                if len(s) == 0:
                    continue
                path, _ = viterbi_decode(em[: lengths[k], k], self.params["trans"], allowed)
                out[i] = [self.tags[j] for j in path]
                k += 1
        return [out.get(i, []) for i in range(len(batch))]

    def tag(self, sentence: Sentence) -> list[str]:
        return self.tag_batch([sentence])[0]


# ---------------------------------------------------------------------------
# Checkpoints
# ---------------------------------------------------------------------------

def save_checkpoint(model: TaggerModel, path: str | Path) -> None:
    """Single binary file: magic, version, JSON header, float32 tensors."""
    cfg = model.config
    header = {
        "version": CHECKPOINT_VERSION,
        "config": {
            "word_hidden": cfg.word_hidden,
            "char_emb_dim": cfg.char_emb_dim,
            "char_hidden": cfg.char_hidden,
            "cap_emb_dim": cfg.cap_emb_dim,
            "dropout_prob": cfg.dropout_prob,
            "batch_size": cfg.batch_size,
            "learning_rate": cfg.learning_rate,
            "momentum": cfg.momentum,
            "clip_norm": cfg.clip_norm,
            "clip_mode": cfg.clip_mode,
            "max_epochs": cfg.max_epochs,
            "decay_rate": cfg.decay_rate,
            "patience": cfg.patience,
            "seed": cfg.seed,
            "features": list(cfg.features),
            "mask_decode": cfg.mask_decode,
        },
        "tags": model.tags,
        "chars": model.chars,
        "words": model.words,
        "params": [
            {"name": k, "shape": list(v.shape)} for k, v in model.params.items()
        ],
        "ls_hash": model.ls_table.content_hash() if model.ls_table is not None else "",
        "gazetteer": (
            None
            if model.gazetteer is None
            else {
                "max_n": model.gazetteer.max_n,
                "lists": {
                    name: sorted(" ".join(e) for e in model.gazetteer.entries[name])
                    for name in model.gazetteer.names
                },
            }
        ),
    }
    blob = json.dumps(header, ensure_ascii=False).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(CHECKPOINT_MAGIC)
        fh.write(struct.pack("<BI", CHECKPOINT_VERSION, len(blob)))
        fh.write(blob)
        for v in model.params.values():
            fh.write(np.ascontiguousarray(v, dtype="<f4").tobytes())


def load_checkpoint(path: str | Path, ls_table: LSTable | None = None) -> TaggerModel:
    """Rebuild a model from its checkpoint.

    A model that uses the LS block needs the same table it was trained
    with; the stored content hash guards against a silent swap.
    """
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != CHECKPOINT_MAGIC:
            raise FormatError(f"not a checkpoint file (magic {magic!r})", 0)
        head = fh.read(5)
        if len(head) < 5:
            raise FormatError("truncated checkpoint header", 4)
        version, blob_len = struct.unpack("<BI", head)
        if version != CHECKPOINT_VERSION:
            raise FormatError(f"unsupported checkpoint version {version}", 4)
        blob = fh.read(blob_len)
        if len(blob) < blob_len:
            raise FormatError("truncated checkpoint metadata", 9)
        header = json.loads(blob.decode("utf-8"))
        cfg = TaggerConfig(**header["config"])

        params: dict[str, np.ndarray] = {}
        for spec in header["params"]:
            shape = tuple(spec["shape"])
            count = int(np.prod(shape)) if shape else 1
            at = fh.tell()
            raw = fh.read(count * 4)
            if len(raw) < count * 4:
                raise FormatError(f"truncated tensor {spec['name']!r}", at + len(raw))
            params[spec["name"]] = (
                np.frombuffer(raw, dtype="<f4").astype(np.float64).reshape(shape)
            )

    if cfg.uses("ls"):
        if ls_table is None:
            raise DataError("checkpoint uses the ls block: pass its LS table")
        if header["ls_hash"] and ls_table.content_hash() != header["ls_hash"]:
            raise DataError("LS table content hash does not match the checkpoint")
    gaz = None
    if header.get("gazetteer") is not None:
        g = header["gazetteer"]
        gaz = Gazetteer({k: list(v) for k, v in g["lists"].items()}, max_n=g["max_n"])
    return TaggerModel(
        cfg, header["tags"], header["chars"], header["words"], params,
        ls_table if cfg.uses("ls") else None, gaz,
    )
