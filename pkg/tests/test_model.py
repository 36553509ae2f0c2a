import math

import numpy as np
import pytest

from sciu.dataset import Sample
from sciu.errors import ConfigurationError, ParseError
from sciu.model import (
    SciuModel,
    backward,
    backward_batch,
    batch_loss,
    forward,
    forward_batch,
    init_model,
    load_model,
    save_model,
    wce_loss,
)
from sciu.nn_core import (
    LinearLayer,
    cross_entropy,
    finite_difference_gradient,
    softmax,
)


def zero_model(input_dim=3, embed=4, hidden=2, n_classes=3):
    return SciuModel(
        encoder=LinearLayer(np.zeros((embed, input_dim)), np.zeros(embed)),
        classifier=LinearLayer(np.zeros((n_classes, embed)), np.zeros(n_classes)),
        wb_hidden=LinearLayer(np.zeros((hidden, embed)), np.zeros(hidden)),
        wb_out=LinearLayer(np.zeros((1, hidden)), np.zeros(1)),
    )


def saturated_weight_model(bias, seed=0):
    """Random model whose weight-branch output is pinned at sigmoid(bias)."""
    m = init_model(3, 4, 2, 3, seed=seed)
    m.wb_out.weight[:] = 0.0
    m.wb_out.bias[:] = bias
    return m


class TestForward:
    def test_zero_parameters(self):
        m = zero_model()
        out = forward(m, Sample(0, np.array([1.0, -2.0, 0.5]), 0))
        np.testing.assert_allclose(out.probs, np.full(3, 1 / 3))
        assert out.weight == pytest.approx(0.5)

    def test_saturated_weight_one(self):
        m = saturated_weight_model(40.0)
        out = forward(m, Sample(0, np.array([0.3, 1.0, -0.4]), 0))
        assert out.weight == pytest.approx(1.0, abs=1e-12)
        np.testing.assert_allclose(out.weighted_probs, out.probs, atol=1e-10)

    def test_weighted_probs_recomputed(self):
        m = init_model(3, 4, 2, 3, seed=7)
        x = np.array([0.5, -1.2, 2.0])
        out = forward(m, Sample(0, x, 0))
        np.testing.assert_allclose(
            out.weighted_probs, softmax(out.weight * out.logits), atol=1e-12
        )
        np.testing.assert_allclose(out.probs, softmax(out.logits), atol=1e-12)

    def test_batch_matches_single(self):
        m = init_model(3, 4, 2, 3, seed=1)
        rng = np.random.default_rng(0)
        feats = rng.standard_normal((5, 3))
        out = forward_batch(m, feats)
        for i in range(5):
            single = forward(m, Sample(i, feats[i], 0))
            np.testing.assert_allclose(out["probs"][i], single.probs, atol=1e-12)
            assert out["weight"][i] == pytest.approx(single.weight)

    def test_bad_batch_shape(self):
        m = init_model(3, 4, 2, 3, seed=0)
        with pytest.raises(ConfigurationError):
            forward_batch(m, np.zeros((4, 5)))


class TestWceLoss:
    def test_weight_one_reduces_to_plain_ce(self):
        m = saturated_weight_model(40.0)
        out = forward(m, Sample(0, np.array([1.0, 0.2, -0.5]), 0))
        assert wce_loss(out, 1) == pytest.approx(cross_entropy(out.probs, 1), abs=1e-9)

    def test_weight_zero_gives_log_k(self):
        m = saturated_weight_model(-40.0)
        out = forward(m, Sample(0, np.array([1.0, 0.2, -0.5]), 0))
        assert wce_loss(out, 2) == pytest.approx(math.log(3), abs=1e-9)

    def test_matches_scalar_recomputation(self):
        m = init_model(3, 4, 2, 3, seed=11)
        x = np.array([0.7, -0.3, 1.1])
        out = forward(m, Sample(0, x, 0))
        expected = cross_entropy(softmax(out.weight * out.logits), 1)
        assert wce_loss(out, 1) == pytest.approx(expected, abs=1e-12)

    def test_label_out_of_range(self):
        m = init_model(3, 4, 2, 3, seed=0)
        out = forward(m, Sample(0, np.zeros(3), 0))
        with pytest.raises(ConfigurationError):
            wce_loss(out, 5)


class TestBackward:
    def test_zero_gradient_at_saturated_optimum(self):
        m = SciuModel(
            encoder=LinearLayer(np.eye(2), np.array([1.0, 1.0])),
            classifier=LinearLayer(
                np.array([[50.0, 50.0], [-50.0, -50.0]]), np.zeros(2)
            ),
            wb_hidden=LinearLayer(np.zeros((2, 2)), np.zeros(2)),
            wb_out=LinearLayer(np.zeros((1, 2)), np.array([40.0])),
        )
        grads = backward(m, Sample(0, np.array([1.0, 1.0]), 0), 0)
        total = math.sqrt(sum(float(np.sum(g**2)) for g in grads))
        assert total < 1e-6

    def test_matches_finite_differences(self):
        rng = np.random.default_rng(0)
        m = init_model(3, 4, 2, 3, seed=5)
        feats = rng.standard_normal((4, 3))
        labels = np.array([0, 2, 1, 1])
        grads, _ = backward_batch(m, feats, labels)
        fd = finite_difference_gradient(
            lambda: batch_loss(m, feats, labels), m.parameters()
        )
        for g, f in zip(grads, fd):
            denom = max(np.abs(f).max(), 1e-8)
            assert np.abs(g - f).max() / denom < 1e-4

    def test_higher_weight_gives_larger_classifier_gradient(self):
        # Same input (hence same logits); only the weight-branch bias differs.
        x = np.array([[0.4, -0.9, 1.3]])
        label = np.array([2])  # a confidently wrong label for this input
        g_high, _ = backward_batch(saturated_weight_model(3.0, seed=4), x, label)
        g_low, _ = backward_batch(saturated_weight_model(-3.0, seed=4), x, label)
        assert np.linalg.norm(g_high[2]) >= np.linalg.norm(g_low[2])

    def test_loss_value_matches_batch_loss(self):
        m = init_model(3, 4, 2, 3, seed=9)
        rng = np.random.default_rng(2)
        feats = rng.standard_normal((6, 3))
        labels = rng.integers(0, 3, 6)
        _, loss = backward_batch(m, feats, labels)
        assert loss == pytest.approx(batch_loss(m, feats, labels), abs=1e-12)


class TestInit:
    def test_same_seed_identical(self):
        a = init_model(5, 6, 3, 4, seed=2)
        b = init_model(5, 6, 3, 4, seed=2)
        for pa, pb in zip(a.parameters(), b.parameters()):
            np.testing.assert_array_equal(pa, pb)

    def test_different_seed_differs(self):
        a = init_model(5, 6, 3, 4, seed=2)
        b = init_model(5, 6, 3, 4, seed=3)
        assert any(
            not np.array_equal(pa, pb)
            for pa, pb in zip(a.parameters(), b.parameters())
        )

    def test_initial_weight_near_half(self):
        m = init_model(8, 8, 4, 5, seed=0)
        rng = np.random.default_rng(1)
        out = forward_batch(m, rng.standard_normal((1000, 8)))
        assert 0.4 <= out["weight"].mean() <= 0.6

    def test_initial_loss_near_log_k(self):
        k = 5
        m = init_model(8, 8, 4, k, seed=0)
        rng = np.random.default_rng(1)
        feats = rng.standard_normal((500, 8))
        labels = np.tile(np.arange(k), 100)
        assert batch_loss(m, feats, labels) == pytest.approx(math.log(k), abs=0.1)


class TestCheckpoint:
    def test_round_trip(self, tmp_path):
        m = init_model(3, 4, 2, 3, seed=6)
        path = tmp_path / "model.ckpt"
        save_model(m, path)
        back = load_model(path)
        for pa, pb in zip(m.parameters(), back.parameters()):
            np.testing.assert_array_equal(pa, pb)

    def test_corrupt_file(self, tmp_path):
        path = tmp_path / "bad.ckpt"
        path.write_text("encoder.weight 2 2\n1 2\n")
        with pytest.raises(ParseError):
            load_model(path)
