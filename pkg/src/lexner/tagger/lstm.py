"""Batched LSTM forward/backward in plain numpy (float64).

Sequences are laid out time-major, (T, B, D), with a (T, B) mask that is 1
on real positions and 0 on padding. Masked steps carry the previous hidden
and cell state through unchanged, so the final row of the hidden sequence
always holds each sequence's true last state, and a reversed-and-padded
batch runs through the same kernel for the backward direction.

Gate layout along the last axis of the parameter matrices: input, forget,
candidate, output. Sigmoid on i/f/o, tanh on the candidate.
"""
from __future__ import annotations

import numpy as np


def glorot(rng: np.random.Generator, shape: tuple[int, int]) -> np.ndarray:
    bound = np.sqrt(6.0 / (shape[0] + shape[1]))
    return rng.uniform(-bound, bound, shape)


def init_lstm_params(rng: np.random.Generator, input_dim: int, hidden: int) -> dict[str, np.ndarray]:
    b = np.zeros(4 * hidden)
    b[hidden : 2 * hidden] = 1.0  # forget-gate bias
    return {
        "wx": glorot(rng, (input_dim, 4 * hidden)),
        "wh": glorot(rng, (hidden, 4 * hidden)),
        "b": b,
    }


def _sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def lstm_forward(
    params: dict[str, np.ndarray], x: np.ndarray, mask: np.ndarray | None = None
) -> tuple[np.ndarray, np.ndarray, np.ndarray, list]:
    """Run the recurrence over a (T, B, D) batch.

    Returns (h_seq (T, B, H), h_final (B, H), c_final (B, H), cache).
    Initial states are zero. With T == 0 everything is empty/zero.
    """
    T, B, D = x.shape
    H = params["wh"].shape[0]
    if mask is None:
        mask = np.ones((T, B))
    h = np.zeros((B, H))
    c = np.zeros((B, H))
    h_seq = np.zeros((T, B, H))
    cache: list = []
    wx, wh, b = params["wx"], params["wh"], params["b"]
    for t in range(T):
        m = mask[t][:, None]
        a = x[t] @ wx + h @ wh + b
        i = _sigmoid(a[:, :H])
        f = _sigmoid(a[:, H : 2 * H])
        g = np.tanh(a[:, 2 * H : 3 * H])
        o = _sigmoid(a[:, 3 * H :])
        c_cand = f * c + i * g
        tanh_c = np.tanh(c_cand)
        h_cand = o * tanh_c
        cache.append((x[t], h, c, i, f, g, o, tanh_c, m))
        h = m * h_cand + (1.0 - m) * h
        c = m * c_cand + (1.0 - m) * c
        h_seq[t] = h
    return h_seq, h, c, cache


def lstm_backward(
    params: dict[str, np.ndarray],
    cache: list,
    dh_seq: np.ndarray | None,
    dh_final: np.ndarray | None = None,
    dc_final: np.ndarray | None = None,
) -> tuple[np.ndarray, dict[str, np.ndarray]]:
    """Backprop through lstm_forward.

    dh_seq matches h_seq (may be None when only the final state feeds the
    loss); dh_final/dc_final inject gradients arriving at the last carried
    states. Returns (dx (T, B, D), parameter gradients).
    """
    wx, wh = params["wx"], params["wh"]
    T = len(cache)
    H = wh.shape[0]
    grads = {
        "wx": np.zeros_like(wx),
        "wh": np.zeros_like(wh),
        "b": np.zeros_like(params["b"]),
    }
    if T == 0:
        return np.zeros((0, 0, wx.shape[0])), grads
    B = cache[0][1].shape[0]
    dx = np.zeros((T, B, wx.shape[0]))
    dh = np.zeros((B, H)) if dh_final is None else dh_final.copy()
    dc = np.zeros((B, H)) if dc_final is None else dc_final.copy()
    for t in range(T - 1, -1, -1):
        x_t, h_prev, c_prev, i, f, g, o, tanh_c, m = cache[t]
        if dh_seq is not None:
            dh = dh + dh_seq[t]
        dh_cand = m * dh
        dh_pass = (1.0 - m) * dh
        dc_cand = m * dc
        dc_pass = (1.0 - m) * dc

        do = dh_cand * tanh_c
        dc_total = dc_cand + dh_cand * o * (1.0 - tanh_c ** 2)
        di = dc_total * g
        df = dc_total * c_prev
        dg = dc_total * i
        dc = dc_total * f + dc_pass

        da = np.concatenate(
            [
                di * i * (1.0 - i),
                df * f * (1.0 - f),
                dg * (1.0 - g ** 2),
                do * o * (1.0 - o),
            ],
            axis=1,
        )
        dx[t] = da @ wx.T
        grads["wx"] += x_t.T @ da
        grads["wh"] += h_prev.T @ da
        grads["b"] += da.sum(axis=0)
        dh = da @ wh.T + dh_pass
    return dx, grads


def reverse_padded(x: np.ndarray, lengths: np.ndarray) -> np.ndarray:
    """Reverse each sequence in a time-major batch within its true length.

    Padding stays in place, so applying this twice is the identity. Works
    for (T, B) and (T, B, D) arrays alike.
    """
    T, B = x.shape[0], x.shape[1]
    t_idx = np.arange(T)[:, None].repeat(B, axis=1)
    real = t_idx < lengths[None, :]
    t_idx = np.where(real, lengths[None, :] - 1 - t_idx, t_idx)
    return x[t_idx, np.arange(B)[None, :]]
