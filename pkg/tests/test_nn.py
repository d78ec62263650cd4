import numpy as np
import pytest

from crowdcast import nn
from crowdcast.nn.tensor import Tensor, Parameter, concat, take_along_axis, broadcast_to


def param(rng, *shape, name="p"):
    return Parameter(rng.standard_normal(shape), name)


def check(loss_fn, params, tol=1e-4):
    report = nn.finite_diff_check(loss_fn, params, h=1e-5, tol=tol, n_samples=120,
                                  rng=np.random.default_rng(0))
    assert report.passed, str(report)
    return report


# -- per-op gradients ------------------------------------------------------------

def test_quadratic_gradcheck_is_tight():
    rng = np.random.default_rng(0)
    theta = param(rng, 7, name="theta")
    report = nn.finite_diff_check(lambda: (theta * theta).sum() * 0.5, [theta], h=1e-5, tol=1e-8)
    assert report.passed and report.max_rel_error < 1e-8


def test_constant_loss_zero_gradients():
    theta = Parameter(np.ones(3), "t")
    report = nn.finite_diff_check(lambda: Tensor(np.zeros(())) + (theta * 0.0).sum() * 0.0, [theta], tol=1e-10)
    assert report.passed and report.max_rel_error == 0.0


@pytest.mark.parametrize("op", [lambda a, b: a + b, lambda a, b: a - b, lambda a, b: a * b])
def test_elementwise_op_gradients(op):
    rng = np.random.default_rng(7)
    a = param(rng, 4, 5, name="a")
    b = param(rng, 4, 5, name="b")
    check(lambda: (op(a, b) * op(a, b)).sum(), [a, b])


def test_matmul_gradients():
    rng = np.random.default_rng(7)
    a = param(rng, 4, 5, name="a")
    w = param(rng, 5, 3, name="w")
    check(lambda: ((a @ w) * (a @ w)).sum(), [a, w])


def test_broadcast_add_mul_gradients():
    rng = np.random.default_rng(3)
    a = param(rng, 4, 1, 5, name="a")
    b = param(rng, 5, name="b")
    check(lambda: ((a + b) * (a * b)).sum(), [a, b])


def test_batched_matmul_gradients():
    rng = np.random.default_rng(4)
    a = param(rng, 3, 4, 5, name="a")
    w = param(rng, 5, 2, name="w")
    check(lambda: ((a @ w) * (a @ w)).sum(), [a, w])


def test_reshape_transpose_concat_slice_gradients():
    rng = np.random.default_rng(5)
    a = param(rng, 2, 6, name="a")
    b = param(rng, 2, 3, name="b")

    def loss():
        x = a.reshape(2, 3, 2).transpose(1, 0, 2).reshape(3, 4)
        y = concat([x, b.transpose(1, 0)], axis=1)       # [3, 6]
        z = y[1:, :4]
        return (z * z).sum()

    check(loss, [a, b])


def test_reduction_activation_gradients():
    rng = np.random.default_rng(6)
    a = param(rng, 4, 5, name="a")
    check(lambda: (a.relu() + a.tanh()).mean(axis=1).sum(), [a])
    b = Parameter(np.abs(rng.standard_normal((3, 3))) + 0.5, "b")
    check(lambda: b.sqrt().sum(), [b])


def test_softmax_rows_sum_to_one_and_gradient():
    rng = np.random.default_rng(8)
    a = param(rng, 5, 7, name="a")
    s = a.softmax(axis=-1)
    np.testing.assert_allclose(s.data.sum(axis=-1), 1.0, atol=1e-12)
    w = Tensor(np.random.default_rng(9).standard_normal((5, 7)))
    check(lambda: (a.softmax(axis=-1) * w).sum(), [a])


def test_broadcast_to_and_take_along_axis_gradients():
    rng = np.random.default_rng(10)
    a = param(rng, 3, 1, 4, name="a")
    idx = np.array([[0], [2], [1]])

    def loss():
        wide = broadcast_to(a, (3, 5, 4))
        scores = (wide * wide).sum(axis=2)           # [3, 5]
        picked = take_along_axis(scores, idx, 1)     # [3, 1]
        return picked.sum()

    check(loss, [a])


def test_layernorm_gradients_and_moments():
    rng = np.random.default_rng(11)
    ln = nn.LayerNorm(6, "ln")
    x = param(rng, 4, 6, name="x")
    out = ln(x)
    np.testing.assert_allclose(out.data.mean(axis=-1), 0.0, atol=1e-9)
    np.testing.assert_allclose(out.data.std(axis=-1), 1.0, atol=1e-3)
    check(lambda: (ln(x) * ln(x)).sum(), [x, *ln.parameters()])


# -- linear layer -----------------------------------------------------------------

def test_linear_identity_and_hand_case():
    rng = np.random.default_rng(0)
    lin = nn.Linear(2, 2, rng, "lin")
    lin.w.data = np.eye(2)
    lin.b.data = np.zeros(2)
    np.testing.assert_array_equal(lin(Tensor([[1.0, 2.0]])).data, [[1.0, 2.0]])
    lin.w.data = np.array([[1.0, 2.0], [3.0, 4.0]])
    lin.b.data = np.array([1.0, 1.0])
    np.testing.assert_array_equal(lin(Tensor([[1.0, 1.0]])).data, [[5.0, 7.0]])
    lin.w.data = np.zeros((2, 2))
    lin.b.data = np.zeros(2)
    np.testing.assert_array_equal(lin(Tensor([[3.0, -4.0]])).data, [[0.0, 0.0]])


def test_linear_shape_mismatch():
    lin = nn.Linear(3, 2, np.random.default_rng(0), "lin")
    with pytest.raises(ValueError, match="trailing dim"):
        lin(Tensor(np.zeros((4, 5))))


# -- attention ---------------------------------------------------------------------

def test_attention_uniform_when_queries_equal():
    rng = np.random.default_rng(1)
    mha = nn.MultiHeadAttention(8, 2, rng, "mha")
    q = Tensor(np.tile(rng.standard_normal(8), (5, 1)))
    k = Tensor(np.tile(rng.standard_normal(8), (5, 1)))
    v = Tensor(rng.standard_normal((5, 8)))
    out, weights = mha(q, k, v, return_weights=True)
    np.testing.assert_allclose(weights, 1.0 / 5.0, atol=1e-12)
    projected = (v.data @ mha.wv.w.data + mha.wv.b.data).mean(axis=0)
    expected = projected @ mha.wo.w.data + mha.wo.b.data
    np.testing.assert_allclose(out.data, np.tile(expected, (5, 1)), atol=1e-9)


def test_attention_single_key_ignores_query():
    rng = np.random.default_rng(2)
    mha = nn.MultiHeadAttention(8, 2, rng, "mha")
    k = Tensor(rng.standard_normal((1, 8)))
    v = Tensor(rng.standard_normal((1, 8)))
    out1 = mha(Tensor(rng.standard_normal((4, 8))), k, v)
    out2 = mha(Tensor(rng.standard_normal((4, 8))), k, v)
    np.testing.assert_allclose(out1.data, out2.data, atol=1e-12)
    projected = v.data @ mha.wv.w.data + mha.wv.b.data
    expected = projected @ mha.wo.w.data + mha.wo.b.data
    np.testing.assert_allclose(out1.data, np.tile(expected, (4, 1)), atol=1e-9)


def test_attention_weights_rows_sum_to_one():
    rng = np.random.default_rng(3)
    mha = nn.MultiHeadAttention(12, 3, rng, "mha")
    x = Tensor(rng.standard_normal((6, 12)))
    _, weights = mha(x, x, x, return_weights=True)
    np.testing.assert_allclose(weights.sum(axis=-1), 1.0, atol=1e-12)


def test_attention_requires_divisible_heads():
    with pytest.raises(ValueError, match="divisible"):
        nn.MultiHeadAttention(10, 3, np.random.default_rng(0), "mha")


def test_attention_gradients_batched():
    rng = np.random.default_rng(4)
    mha = nn.MultiHeadAttention(8, 2, rng, "mha")
    x = Parameter(rng.standard_normal((2, 5, 8)), "x")
    check(lambda: (mha(x, x, x) * mha(x, x, x)).sum(), [x, *mha.parameters()])


def test_encoder_decoder_layer_gradients():
    rng = np.random.default_rng(5)
    enc = nn.EncoderLayer(8, 2, 16, rng, "enc")
    dec = nn.DecoderLayer(8, 2, 16, rng, "dec")
    x = Parameter(rng.standard_normal((2, 4, 8)), "x")
    v = Parameter(rng.standard_normal((2, 4, 8)), "v")
    check(lambda: (dec(enc(x), v) * dec(enc(x), v)).sum(),
          [x, v, *enc.parameters(), *dec.parameters()])


# -- adam ---------------------------------------------------------------------------

def test_adam_zero_gradient_keeps_parameter():
    p = Parameter(np.array([1.0, -2.0]), "p")
    nn.adam_step([p], nn.AdamConfig())
    np.testing.assert_array_equal(p.data, [1.0, -2.0])
    assert p.step == 1 and p.grad is None


def test_adam_first_step_magnitude():
    # closed form at t=1: m_hat = g, v_hat = g^2, update = lr * g/(|g| + eps)
    p = Parameter(np.array([0.0]), "p")
    p.grad = np.array([1.0])
    cfg = nn.AdamConfig(learning_rate=0.0002)
    nn.adam_step([p], cfg)
    expected = -0.0002 * 1.0 / (1.0 + cfg.epsilon)
    np.testing.assert_allclose(p.data, [expected], rtol=1e-12)


def test_adam_deterministic_across_runs():
    def run():
        rng = np.random.default_rng(42)
        p = Parameter(rng.standard_normal(5), "p")
        for step in range(10):
            p.grad = np.sin(np.arange(5.0) + step)
            nn.adam_step([p], nn.AdamConfig())
        return p.data.copy()

    np.testing.assert_array_equal(run(), run())


def test_adam_config_validation():
    with pytest.raises(ValueError):
        nn.AdamConfig(learning_rate=0.0)
    with pytest.raises(ValueError):
        nn.AdamConfig(beta1=1.0)


# -- checkpoint ----------------------------------------------------------------------

def test_checkpoint_roundtrip(tmp_path):
    rng = np.random.default_rng(0)
    lin = nn.Linear(3, 2, rng, "lin")
    lin.w.grad = np.ones_like(lin.w.data)
    nn.adam_step(lin.parameters(), nn.AdamConfig())
    config = {"n_in": 3, "n_out": 2}
    path = tmp_path / "model.ckpt"
    nn.save_checkpoint(path, lin.parameters(), config, extra={"note": "test"})

    loaded = nn.load_checkpoint(path, expected_config_hash=nn.config_hash(config))
    fresh = nn.Linear(3, 2, np.random.default_rng(99), "lin")
    nn.restore_parameters(fresh.parameters(), loaded)
    np.testing.assert_array_equal(fresh.w.data, lin.w.data)
    np.testing.assert_array_equal(fresh.w.m, lin.w.m)
    assert fresh.w.step == 1
    assert loaded["extra"]["note"] == "test"


def test_checkpoint_rejects_wrong_hash(tmp_path):
    rng = np.random.default_rng(0)
    lin = nn.Linear(2, 2, rng, "lin")
    path = tmp_path / "model.ckpt"
    nn.save_checkpoint(path, lin.parameters(), {"a": 1})
    with pytest.raises(nn.CheckpointError, match="does not match"):
        nn.load_checkpoint(path, expected_config_hash=nn.config_hash({"a": 2}))


# -- misc engine properties ------------------------------------------------------------

def test_relu_tanh_ranges():
    rng = np.random.default_rng(1)
    x = Tensor(rng.standard_normal((100,)) * 5)
    assert (x.relu().data >= 0).all()
    t = x.tanh().data
    assert (t > -1).all() and (t < 1).all()


def test_same_seed_same_init():
    a = nn.Linear(4, 4, np.random.default_rng(5), "a")
    b = nn.Linear(4, 4, np.random.default_rng(5), "b")
    np.testing.assert_array_equal(a.w.data, b.w.data)


def test_backward_requires_scalar():
    t = Tensor(np.zeros((2, 2)), requires_grad=True)
    with pytest.raises(ValueError, match="scalar"):
        (t * 1.0).backward()


def test_gradcheck_rejects_nonfinite_loss():
    p = Parameter(np.ones(2), "p")
    with pytest.raises(ValueError, match="non-finite"):
        nn.finite_diff_check(lambda: (p * np.inf).sum(), [p])
