"""Linear-chain CRF: log-space forward algorithm, Viterbi, and gradients.

Transitions live in an (L+2, L+2) matrix over the tag set plus two virtual
states, START = L and STOP = L+1. Row i, column j scores the move i -> j.
The batched negative log-likelihood backpropagates through the stored
forward variables, which reproduces the forward-backward marginals without
a separate backward recursion.
"""
from __future__ import annotations

import numpy as np

from ..errors import DataError


def logsumexp(a: np.ndarray, axis: int = -1) -> np.ndarray:
    hi = np.max(a, axis=axis, keepdims=True)
    hi = np.where(np.isfinite(hi), hi, 0.0)
    out = np.log(np.sum(np.exp(a - hi), axis=axis)) + np.squeeze(hi, axis=axis)
    return out


def crf_log_partition(emissions: np.ndarray, transitions: np.ndarray) -> float:
    """log sum over all tag paths of exp(path score), one sentence."""
    T, L = emissions.shape
    if T < 1:
        raise DataError("log partition needs at least one position")
    if transitions.shape != (L + 2, L + 2):
        raise DataError(
            f"transition matrix {transitions.shape} does not fit {L} tags")
    start, stop = L, L + 1
    alpha = transitions[start, :L] + emissions[0]
    for t in range(1, T):
        alpha = logsumexp(alpha[:, None] + transitions[:L, :L], axis=0) + emissions[t]
    return float(logsumexp(alpha + transitions[:L, stop]))


def path_score(emissions: np.ndarray, transitions: np.ndarray, path: np.ndarray) -> float:
    T, L = emissions.shape
    start, stop = L, L + 1
    path = np.asarray(path)
    s = transitions[start, path[0]] + emissions[np.arange(T), path].sum()
    s += transitions[path[:-1], path[1:]].sum()
    return float(s + transitions[path[-1], stop])


def viterbi_decode(
    emissions: np.ndarray,
    transitions: np.ndarray,
    allowed: np.ndarray | None = None,
) -> tuple[list[int], float]:
    """Best-scoring path; ties break toward the lowest tag index.

    `allowed` is an optional (L+2, L+2) boolean matrix; forbidden moves
    score -inf and can never appear in the result.
    """
    T, L = emissions.shape
    if T < 1:
        raise DataError("cannot decode an empty sentence")
    start, stop = L, L + 1
    trans = transitions.astype(np.float64, copy=True)
    if allowed is not None:
        trans = np.where(allowed, trans, -np.inf)
    best = trans[start, :L] + emissions[0]
    back: list[np.ndarray] = []
    for t in range(1, T):
        scores = best[:, None] + trans[:L, :L]
        # argmax returns the first (lowest-index) maximizer
        ptr = np.argmax(scores, axis=0)
        back.append(ptr)
        best = scores[ptr, np.arange(L)] + emissions[t]
    final = best + trans[:L, stop]
    tag = int(np.argmax(final))
    score = float(final[tag])
    path = [tag]
    for ptr in reversed(back):
        tag = int(ptr[tag])
        path.append(tag)
    path.reverse()
    return path, score


def crf_forward_batched(
    emissions: np.ndarray, lengths: np.ndarray, transitions: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Batched log partition. emissions (T, B, L); returns (logZ (B,), alphas)."""
    T, B, L = emissions.shape
    start, stop = L, L + 1
    alphas = np.zeros((T, B, L))
    alpha = transitions[start, :L][None, :] + emissions[0]
    alphas[0] = alpha
    for t in range(1, T):
        active = (t < lengths)[:, None]
        nxt = logsumexp(alpha[:, :, None] + transitions[None, :L, :L], axis=1)
        alpha = np.where(active, nxt + emissions[t], alpha)
        alphas[t] = alpha
    logz = logsumexp(alpha + transitions[:L, stop][None, :], axis=1)
    return logz, alphas


def crf_nll_and_grad(
    emissions: np.ndarray,
    lengths: np.ndarray,
    gold: np.ndarray,
    transitions: np.ndarray,
) -> tuple[float, np.ndarray, np.ndarray]:
    """Sum of per-sentence NLLs and gradients w.r.t. emissions/transitions.

    emissions (T, B, L) with padding rows ignored per `lengths`; gold is
    (T, B) int tag ids (values on padding ignored). The emission gradient
    is zero on padding.
    """
    T, B, L = emissions.shape
    start, stop = L, L + 1
    if np.any(lengths < 1):
        raise DataError("every sequence must have at least one position")

    logz, alphas = crf_forward_batched(emissions, lengths, transitions)

    # gold path scores
    t_idx = np.arange(T)[:, None]
    real = t_idx < lengths[None, :]
    em_gold = np.where(real, emissions[t_idx, np.arange(B)[None, :], gold], 0.0)
    gold_score = em_gold.sum(axis=0)
    gold_score += transitions[start, gold[0]]
    last = gold[lengths - 1, np.arange(B)]
    gold_score += transitions[last, stop]
    pair_real = (t_idx[1:] < lengths[None, :])
    pairs_from = gold[:-1]
    pairs_to = gold[1:]
    if T > 1:
        pair_scores = np.where(pair_real, transitions[pairs_from, pairs_to], 0.0)
        gold_score += pair_scores.sum(axis=0)

    nll = float(np.sum(logz - gold_score))

    # d logZ: backprop through the stored alphas
    dem = np.zeros_like(emissions)
    dtrans = np.zeros_like(transitions)

    final = alphas[T - 1] + transitions[:L, stop][None, :]
    w = np.exp(final - logz[:, None])  # softmax over tags
    dalpha = w
    dtrans[:L, stop] += w.sum(axis=0)
    for t in range(T - 1, 0, -1):
        active = (t < lengths)[:, None]
        dem[t] = np.where(active, dalpha, 0.0)
        m = alphas[t - 1][:, :, None] + transitions[None, :L, :L]
        m = np.exp(m - logsumexp(m, axis=1)[:, None, :])
        dm = m * dalpha[:, None, :]
        dm = np.where(active[:, :, None], dm, 0.0)
        dtrans[:L, :L] += dm.sum(axis=0)
        dalpha_prev = dm.sum(axis=2)
        dalpha = np.where(active, dalpha_prev, dalpha)
    dem[0] = dalpha
    dtrans[start, :L] += dalpha.sum(axis=0)

    # minus the gold path: one-hot emissions and transition counts
    b_idx = np.arange(B)
    np.subtract.at(dem, (t_idx.repeat(B, 1)[real], b_idx[None, :].repeat(T, 0)[real], gold[real]), 1.0)
    np.subtract.at(dtrans, (np.full(B, start), gold[0]), 1.0)
    np.subtract.at(dtrans, (last, np.full(B, stop)), 1.0)
    if T > 1:
        np.subtract.at(
            dtrans, (pairs_from[pair_real], pairs_to[pair_real]), 1.0)
    return nll, dem, dtrans


def bilou_allowed_transitions(tags: list[str]) -> np.ndarray:
    """Boolean (L+2, L+2) matrix of scheme-valid moves for a BILOU tag set.

    START behaves like "outside" on the left (O, B-, U- may follow), STOP
    like "outside" on the right (only O, L-, U- may precede it).
    """
    L = len(tags)
    start, stop = L, L + 1
    allowed = np.zeros((L + 2, L + 2), dtype=bool)

    def kind(tag: str) -> tuple[str, str | None]:
        if tag == "O":
            return "O", None
        return tag[0], tag[2:]

    opens = {"O", "B", "U"}  # may follow an outside-like state
    closes = {"O", "L", "U"}  # may precede an outside-like state
    for j, tj in enumerate(tags):
        kj, _ = kind(tj)
        if kj in opens:
            allowed[start, j] = True
    for i, ti in enumerate(tags):
        ki, _ = kind(ti)
        if ki in closes:
            allowed[i, stop] = True
    for i, ti in enumerate(tags):
        ki, ei = kind(ti)
        for j, tj in enumerate(tags):
            kj, ej = kind(tj)
            if ki in closes:
                allowed[i, j] = kj in opens
            else:  # open mention of type ei: must continue or close it
                allowed[i, j] = kj in {"I", "L"} and ej == ei
    return allowed
