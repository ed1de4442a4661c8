"""Binary gazetteer-membership features, the classic baseline the LS block
is measured against. Each named list contributes one bit per token: 1 iff
the token sits inside any n-gram of the sentence that matches a list entry.
"""
from __future__ import annotations

import numpy as np

from ..corpus import Sentence


class Gazetteer:
    """Named word-n-gram lists with case-insensitive matching."""

    def __init__(self, lists: dict[str, list[str]], max_n: int = 4):
        self.names = sorted(lists)
        self.max_n = max_n
        self.entries: dict[str, set[tuple[str, ...]]] = {}
        for name in self.names:
            entryset = set()
            for entry in lists[name]:
                toks = tuple(t.lower() for t in entry.split())
                if toks and len(toks) <= max_n:
                    entryset.add(toks)
            self.entries[name] = entryset

    def __len__(self) -> int:
        return len(self.names)


def gazetteer_features(sentence: Sentence, gazetteer: Gazetteer) -> np.ndarray:
    """Per-token bit vector, one column per list, as float64 (T, lists)."""
    words = [t.lower for t in sentence.tokens]
    T = len(words)
    out = np.zeros((T, len(gazetteer.names)))
    for col, name in enumerate(gazetteer.names):
        entryset = gazetteer.entries[name]
        if not entryset:
            continue
        for n in range(1, gazetteer.max_n + 1):
            for start in range(0, T - n + 1):
                if tuple(words[start : start + n]) in entryset:
                    out[start : start + n, col] = 1.0
    return out
