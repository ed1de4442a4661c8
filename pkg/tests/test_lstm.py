import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lexner.tagger.lstm import (
    init_lstm_params,
    lstm_backward,
    lstm_forward,
    reverse_padded,
)


def make_params(rng, d, h):
    return init_lstm_params(rng, d, h)


class TestForward:
    def test_shapes(self):
        rng = np.random.default_rng(0)
        p = make_params(rng, 5, 4)
        x = rng.normal(size=(6, 3, 5))
        h_seq, h, c, cache = lstm_forward(p, x)
        assert h_seq.shape == (6, 3, 4)
        assert h.shape == (3, 4) and c.shape == (3, 4)
        assert len(cache) == 6

    def test_empty_sequence(self):
        rng = np.random.default_rng(0)
        p = make_params(rng, 5, 4)
        h_seq, h, c, cache = lstm_forward(p, np.zeros((0, 2, 5)))
        assert h_seq.shape == (0, 2, 4)
        assert np.all(h == 0) and np.all(c == 0)

    def test_zero_weights_zero_inputs_give_zero_states(self):
        p = {"wx": np.zeros((3, 16)), "wh": np.zeros((4, 16)), "b": np.zeros(16)}
        h_seq, h, c, _ = lstm_forward(p, np.zeros((5, 2, 3)))
        assert np.all(h_seq == 0) and np.all(h == 0) and np.all(c == 0)

    def test_forget_bias_initialized_to_one(self):
        p = init_lstm_params(np.random.default_rng(0), 3, 4)
        assert np.all(p["b"][4:8] == 1.0)
        assert np.all(p["b"][:4] == 0.0) and np.all(p["b"][8:] == 0.0)

    def test_mask_carries_state_through_padding(self):
        rng = np.random.default_rng(1)
        p = make_params(rng, 4, 3)
        x = rng.normal(size=(5, 2, 4))
        lengths = np.array([5, 2])
        mask = (np.arange(5)[:, None] < lengths[None, :]).astype(float)
        h_seq, h_fin, _, _ = lstm_forward(p, x, mask)
        # short sequence: final state equals its state at the last real step
        np.testing.assert_array_equal(h_seq[1, 1], h_fin[1])
        np.testing.assert_array_equal(h_seq[4, 1], h_seq[1, 1])

    def test_masked_batch_matches_unbatched(self):
        rng = np.random.default_rng(2)
        p = make_params(rng, 4, 3)
        x = rng.normal(size=(5, 2, 4))
        lengths = np.array([5, 3])
        mask = (np.arange(5)[:, None] < lengths[None, :]).astype(float)
        h_seq, _, _, _ = lstm_forward(p, x, mask)
        solo, _, _, _ = lstm_forward(p, x[:3, 1:2])
        np.testing.assert_allclose(h_seq[:3, 1], solo[:, 0], atol=1e-12)


class TestBackward:
    def check_param_gradients(self, lengths, dims=(4, 3), T=5):
        d, h = dims
        rng = np.random.default_rng(7)
        p = make_params(rng, d, h)
        B = len(lengths)
        x = rng.normal(size=(T, B, d))
        mask = (np.arange(T)[:, None] < np.array(lengths)[None, :]).astype(float)
        r_seq = rng.normal(size=(T, B, h))
        r_h = rng.normal(size=(B, h))
        r_c = rng.normal(size=(B, h))

        def loss(params, inputs):
            h_seq, hf, cf, _ = lstm_forward(params, inputs, mask)
            return float((h_seq * r_seq).sum() + (hf * r_h).sum() + (cf * r_c).sum())

        _, hf, cf, cache = lstm_forward(p, x, mask)
        dx, grads = lstm_backward(p, cache, r_seq, dh_final=r_h, dc_final=r_c)

        eps = 1e-6
        for name in ("wx", "wh", "b"):
            flat = p[name].reshape(-1)
            gflat = grads[name].reshape(-1)
            for i in range(flat.size):
                keep = flat[i]
                flat[i] = keep + eps
                up = loss(p, x)
                flat[i] = keep - eps
                down = loss(p, x)
                flat[i] = keep
                num = (up - down) / (2 * eps)
                assert abs(num - gflat[i]) <= 1e-4 * max(1.0, abs(num)), (name, i)
        xflat = x.reshape(-1)
        dxflat = dx.reshape(-1)
        for i in range(0, xflat.size, 7):  # stride keeps it quick
            keep = xflat[i]
            xflat[i] = keep + eps
            up = loss(p, x)
            xflat[i] = keep - eps
            down = loss(p, x)
            xflat[i] = keep
            num = (up - down) / (2 * eps)
            assert abs(num - dxflat[i]) <= 1e-4 * max(1.0, abs(num)), i

    def test_gradients_full_batch(self):
        self.check_param_gradients([5, 5, 5])

    def test_gradients_with_padding(self):
        self.check_param_gradients([5, 2, 3])

    def test_final_state_only_loss(self):
        rng = np.random.default_rng(8)
        p = make_params(rng, 3, 2)
        x = rng.normal(size=(4, 2, 3))
        lengths = np.array([4, 2])
        mask = (np.arange(4)[:, None] < lengths[None, :]).astype(float)
        r = rng.normal(size=(2, 2))

        _, hf, _, cache = lstm_forward(p, x, mask)
        dx, _ = lstm_backward(p, cache, None, dh_final=r)

        eps = 1e-6
        for t in range(4):
            for b in range(2):
                for j in range(3):
                    up, down = x.copy(), x.copy()
                    up[t, b, j] += eps
                    down[t, b, j] -= eps
                    fu = float((lstm_forward(p, up, mask)[1] * r).sum())
                    fd = float((lstm_forward(p, down, mask)[1] * r).sum())
                    num = (fu - fd) / (2 * eps)
                    assert abs(num - dx[t, b, j]) <= 1e-6, (t, b, j)
        # padded inputs cannot influence the final state
        assert np.all(dx[2:, 1] == 0.0)


class TestReversal:
    def test_simple_reverse(self):
        x = np.arange(12, dtype=float).reshape(4, 1, 3)
        out = reverse_padded(x, np.array([4]))
        np.testing.assert_array_equal(out[0, 0], x[3, 0])
        np.testing.assert_array_equal(out[3, 0], x[0, 0])

    def test_padding_stays_in_place(self):
        x = np.arange(10, dtype=float).reshape(5, 2)
        out = reverse_padded(x, np.array([3, 5]))
        np.testing.assert_array_equal(out[:, 0], [4, 2, 0, 6, 8])
        np.testing.assert_array_equal(out[:, 1], [9, 7, 5, 3, 1])

    @given(st.lists(st.integers(1, 6), min_size=1, max_size=4),
           st.integers(6, 9))
    @settings(max_examples=100, deadline=None)
    def test_involution(self, lengths, T):
        rng = np.random.default_rng(0)
        B = len(lengths)
        x = rng.normal(size=(T, B, 2))
        lens = np.array(lengths)
        np.testing.assert_array_equal(reverse_padded(reverse_padded(x, lens), lens), x)

    def test_tied_weights_reversal_symmetry(self):
        # running the same parameters forward over "Roma" and backward over
        # "amoR" must land on the same final state
        rng = np.random.default_rng(9)
        p = make_params(rng, 4, 3)
        chars = rng.normal(size=(4, 1, 4))  # stands in for R, o, m, a
        rev = chars[::-1].copy()
        _, fwd_final, _, _ = lstm_forward(p, chars)
        _, bwd_final_of_rev, _, _ = lstm_forward(p, reverse_padded(rev, np.array([4])))
        np.testing.assert_allclose(fwd_final, bwd_final_of_rev, atol=1e-12)
