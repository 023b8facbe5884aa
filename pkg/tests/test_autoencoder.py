import numpy as np
import pytest

from flowtopo.autoencoder import (
    LEAKY_SLOPE,
    Mlp,
    TrainConfig,
    detection_threshold,
    train,
    train_autoencoder,
)


def zero_net(d=3, h=4, b=None):
    sizes = [d, h, b if b is not None else max(1, d - 1), h, d]
    ws = [np.zeros((o, i)) for i, o in zip(sizes, sizes[1:])]
    bs = [np.zeros(o) for o in sizes[1:]]
    return Mlp(ws, bs, allow_wide_bottleneck=(d == 1))


def identity_net(d=3):
    ws = [np.eye(d)] * 4
    bs = [np.zeros(d)] * 4
    return Mlp(ws, bs, allow_wide_bottleneck=True)


class TestForward:
    def test_zero_net_outputs_zero(self):
        m = zero_net()
        x = np.array([1.0, -2.0, 3.0])
        assert np.array_equal(m.forward(x), np.zeros(3))
        assert m.reconstruction_error(x) == pytest.approx(np.mean(x ** 2))

    def test_identity_net_on_nonnegative(self):
        m = identity_net()
        x = np.array([0.0, 1.5, 2.0])
        assert np.allclose(m.forward(x), x)
        assert m.reconstruction_error(x) == 0.0

    def test_leaky_slope_compounds_on_negatives(self):
        m = identity_net(d=1)
        # three hidden rectifiers shrink a negative by slope^3, output is linear
        out = m.forward(np.array([-1.0]))
        assert out[0] == pytest.approx(-(LEAKY_SLOPE ** 3))

    def test_hand_computed_2_2_1_2_2(self):
        ws = [np.eye(2), np.array([[1.0, 1.0]]),
              np.array([[1.0], [-1.0]]), np.eye(2)]
        bs = [np.zeros(2), np.zeros(1), np.zeros(2),
              np.array([0.5, 0.5])]
        m = Mlp(ws, bs)
        x = np.array([1.0, 2.0])
        # a1=(1,2) -> latent z=3 -> a3=(3, -0.03) -> +bias
        assert np.allclose(m.encode(x), [3.0])
        assert np.allclose(m.forward(x), [3.5, 0.47])

    def test_input_shape_checked(self):
        m = zero_net(d=3)
        with pytest.raises(ValueError):
            m.forward(np.zeros(4))
        with pytest.raises(ValueError):
            m.encode(np.zeros((3, 1)))

    def test_detect_is_strict(self):
        m = zero_net(d=2)
        x = np.array([1.0, 1.0])  # error exactly 1.0
        assert m.reconstruction_error(x) == 1.0
        assert not m.detect(x, threshold=1.0)
        assert m.detect(x, threshold=0.999)

    def test_denoise_is_reconstruction(self):
        m = Mlp.random([3, 4, 2, 4, 3], seed=5)
        x = np.array([0.3, -0.1, 0.8])
        assert np.array_equal(m.denoise(x), m.forward(x))


class TestValidation:
    def test_wrong_layer_count(self):
        with pytest.raises(ValueError):
            Mlp([np.eye(2)] * 3, [np.zeros(2)] * 3)

    def test_bottleneck_must_narrow(self):
        ws = [np.eye(2)] * 4
        bs = [np.zeros(2)] * 4
        with pytest.raises(ValueError, match="bottleneck"):
            Mlp(ws, bs)

    def test_shapes_must_chain(self):
        ws = [np.zeros((4, 3)), np.zeros((2, 4)), np.zeros((4, 2)), np.zeros((3, 5))]
        bs = [np.zeros(4), np.zeros(2), np.zeros(4), np.zeros(3)]
        with pytest.raises(ValueError):
            Mlp(ws, bs)

    def test_bias_length(self):
        ws = [np.zeros((4, 3)), np.zeros((2, 4)), np.zeros((4, 2)), np.zeros((3, 4))]
        bs = [np.zeros(4), np.zeros(3), np.zeros(4), np.zeros(3)]
        with pytest.raises(ValueError):
            Mlp(ws, bs)

    def test_random_requires_five_sizes(self):
        with pytest.raises(ValueError):
            Mlp.random([3, 2, 3])

    def test_config_validation(self):
        with pytest.raises(ValueError):
            TrainConfig(learning_rate=-0.1)
        with pytest.raises(ValueError):
            TrainConfig(epochs=0)
        with pytest.raises(ValueError):
            TrainConfig(batch_size=0)


class TestGradients:
    def test_matches_finite_differences(self):
        rng = np.random.default_rng(17)
        for trial in range(4):
            m = Mlp.random([3, 4, 2, 4, 3], seed=100 + trial)
            batch = rng.normal(size=(5, 3))
            _, grads = m.loss_and_gradients(batch)
            h = 1e-6
            for li in range(4):
                for arr, gid in ((m.weights[li], 0), (m.biases[li], 1)):
                    numeric = np.zeros_like(arr)
                    it = np.nditer(arr, flags=["multi_index"])
                    for _ in it:
                        idx = it.multi_index
                        orig = arr[idx]
                        arr[idx] = orig + h
                        up, _ = m.loss_and_gradients(batch)
                        arr[idx] = orig - h
                        dn, _ = m.loss_and_gradients(batch)
                        arr[idx] = orig
                        numeric[idx] = (up - dn) / (2 * h)
                    analytic = grads[li][gid]
                    denom = np.linalg.norm(analytic) + np.linalg.norm(numeric) + 1e-12
                    assert np.linalg.norm(analytic - numeric) / denom < 1e-5

    def test_loss_is_mean_squared_error(self):
        m = zero_net(d=2)
        batch = np.array([[1.0, 1.0], [2.0, 0.0]])
        loss, _ = m.loss_and_gradients(batch)
        assert loss == pytest.approx(np.mean(batch ** 2))


class TestTraining:
    def test_rank_one_data_converges(self):
        rng = np.random.default_rng(3)
        u = np.array([0.6, 0.8, 0.0])
        # centered along the line; one-sided rays can trap a sign-flipped
        # bottleneck on its slow slope
        data = np.array([t * u for t in rng.uniform(-1.5, 1.5, size=64)])
        cfg = TrainConfig(learning_rate=0.1, momentum=0.9, batch_size=16,
                          epochs=400, seed=1)
        m, history = train_autoencoder(data, [3, 6, 1, 6, 3], cfg)
        assert history[-1] < 1e-4
        assert history[-1] < history[0]

    def test_zero_learning_rate_is_noop(self):
        m = Mlp.random([3, 4, 2, 4, 3], seed=9)
        before = m.dumps()
        cfg = TrainConfig(learning_rate=0.0, epochs=3, batch_size=4, seed=2)
        history = train(m, np.random.default_rng(0).normal(size=(8, 3)), cfg)
        assert m.dumps() == before
        assert history[0] == history[1] == history[2]

    def test_seeded_training_reproducible(self):
        data = np.random.default_rng(5).normal(size=(20, 3))
        cfg = TrainConfig(learning_rate=0.01, epochs=10, batch_size=4, seed=11)
        m1, h1 = train_autoencoder(data, [3, 5, 2, 5, 3], cfg)
        m2, h2 = train_autoencoder(data, [3, 5, 2, 5, 3], cfg)
        assert m1.dumps() == m2.dumps()
        assert h1 == h2
        cfg2 = TrainConfig(learning_rate=0.01, epochs=10, batch_size=4, seed=12)
        m3, _ = train_autoencoder(data, [3, 5, 2, 5, 3], cfg2)
        assert m3.dumps() != m1.dumps()

    def test_history_length(self):
        data = np.zeros((4, 3))
        cfg = TrainConfig(epochs=7, batch_size=2)
        m = Mlp.random([3, 4, 2, 4, 3], seed=0)
        assert len(train(m, data, cfg)) == 7

    def test_width_mismatch(self):
        m = Mlp.random([3, 4, 2, 4, 3], seed=0)
        with pytest.raises(ValueError):
            train(m, np.zeros((4, 5)), TrainConfig())

    def test_empty_data(self):
        m = Mlp.random([3, 4, 2, 4, 3], seed=0)
        with pytest.raises(ValueError):
            train(m, np.zeros((0, 3)), TrainConfig())


class TestSerialization:
    def test_round_trip_exact(self):
        m = Mlp.random([4, 6, 2, 6, 4], seed=21)
        text = m.dumps()
        back = Mlp.loads(text)
        assert back.dumps() == text
        for w1, w2 in zip(m.weights, back.weights):
            assert np.array_equal(w1, w2)
        for b1, b2 in zip(m.biases, back.biases):
            assert np.array_equal(b1, b2)

    def test_format_line(self):
        m = Mlp.random([3, 4, 2, 4, 3], seed=0)
        assert m.dumps().splitlines()[0] == "mlp-v1"
        assert m.dumps().splitlines()[1] == "3 4 2 4 3"

    def test_bad_format_rejected(self):
        with pytest.raises(ValueError, match="mlp-v1"):
            Mlp.loads("mlp-v2\n3 4 2 4 3\n")

    def test_trailing_data_rejected(self):
        m = Mlp.random([3, 4, 2, 4, 3], seed=0)
        with pytest.raises(ValueError):
            Mlp.loads(m.dumps() + "0.5 0.5\n")

    def test_save_load_file(self, tmp_path):
        m = Mlp.random([3, 4, 2, 4, 3], seed=33)
        path = tmp_path / "model.txt"
        m.save(path)
        assert Mlp.load(path).dumps() == m.dumps()


class TestThreshold:
    def test_constant_errors(self):
        m = zero_net(d=2)
        data = np.ones((10, 2))  # every error is exactly 1.0
        assert detection_threshold(m, data) == pytest.approx(1.0)

    def test_three_sigma(self):
        m = zero_net(d=1)
        data = np.array([[1.0], [3.0]])  # errors 1 and 9
        errors = np.array([1.0, 9.0])
        expect = errors.mean() + 3 * errors.std()
        assert detection_threshold(m, data) == pytest.approx(expect)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            detection_threshold(zero_net(), np.zeros((0, 3)))
