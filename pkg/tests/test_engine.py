import numpy as np
import pytest

from textspot import engine
from textspot.engine import Adam, Graph, LstmParams, Tensor, tensor
from textspot.errors import ContractError, DimensionError, NumericHealthError


def analytic_grads(build_loss, params):
    """Run one backward pass and return the loss value."""
    for p in params:
        p.zero_grad()
    with Graph() as g:
        loss = build_loss()
    g.backward(loss)
    return loss.item()


def assert_matches_fd(build_loss, named, tol, eps=1e-5):
    analytic_grads(build_loss, list(named.values()))
    report = engine.finite_diff_check(lambda: build_loss().item(), named, eps=eps)
    for name, err in report.items():
        assert err < tol, f"{name}: rel error {err}"


class TestMatmul:
    def test_identity(self):
        a = tensor(np.eye(2))
        b = tensor([[1.0, 2.0], [3.0, 4.0]])
        assert np.array_equal(engine.matmul(a, b).data, b.data)

    def test_dot_product(self):
        out = engine.matmul(tensor([[1.0, 2.0]]), tensor([[3.0], [4.0]]))
        assert out.data.tolist() == [[11.0]]

    def test_shape_mismatch_names_both_shapes(self):
        with pytest.raises(DimensionError) as exc:
            engine.matmul(tensor(np.zeros((2, 3))), tensor(np.zeros((2, 3))))
        assert "(2, 3)" in str(exc.value)

    def test_gradient_matches_finite_differences(self):
        rng = np.random.default_rng(0)
        a = tensor(rng.normal(size=(3, 4)), requires_grad=True)
        b = tensor(rng.normal(size=(4, 2)), requires_grad=True)
        assert_matches_fd(lambda: engine.tsum(engine.matmul(a, b)),
                          {"a": a, "b": b}, tol=1e-6)


class TestConv2d:
    def test_identity_kernel(self):
        rng = np.random.default_rng(1)
        x = tensor(rng.normal(size=(1, 5, 7)))
        k = tensor(np.ones((1, 1, 1, 1)))
        out = engine.conv2d(x, k, stride=1, padding=0)
        assert np.array_equal(out.data, x.data)

    def test_all_ones_sums_window(self):
        x = tensor(np.ones((1, 3, 3)))
        k = tensor(np.ones((1, 1, 3, 3)))
        out = engine.conv2d(x, k, stride=1, padding=0)
        assert out.data.shape == (1, 1, 1)
        assert out.data[0, 0, 0] == 9.0

    def test_kernel_larger_than_padded_input(self):
        with pytest.raises(DimensionError):
            engine.conv2d(tensor(np.zeros((1, 2, 2))), tensor(np.zeros((1, 1, 5, 5))))

    def test_output_size_with_stride_and_padding(self):
        x = tensor(np.zeros((2, 8, 8)))
        k = tensor(np.zeros((4, 2, 3, 3)))
        assert engine.conv2d(x, k, stride=2, padding=1).shape == (4, 4, 4)

    def test_gradient_matches_finite_differences(self):
        rng = np.random.default_rng(2)
        x = tensor(rng.normal(size=(2, 8, 8)), requires_grad=True)
        k = tensor(rng.normal(size=(4, 2, 3, 3)), requires_grad=True)
        weights = rng.normal(size=(4, 8, 8))

        def build():
            return engine.tsum(engine.mul(engine.conv2d(x, k, 1, 1), tensor(weights)))

        assert_matches_fd(build, {"x": x, "k": k}, tol=1e-5)


class TestMaxPoolBins:
    def test_global_max(self):
        x = tensor([[[1.0, 2.0], [3.0, 4.0]]])
        out, argmax = engine.max_pool_bins(x, 1, 1)
        assert out.data.tolist() == [[[4.0]]]
        assert argmax[0, 0, 0] == 3

    def test_one_element_bins_identity(self):
        x = tensor(np.arange(16.0).reshape(1, 4, 4))
        out, _ = engine.max_pool_bins(x, 4, 4)
        assert np.array_equal(out.data, x.data)

    def test_matches_brute_force_and_routes_gradient(self):
        rng = np.random.default_rng(3)
        data = rng.normal(size=(1, 4, 6))
        x = tensor(data, requires_grad=True)
        with Graph() as g:
            out, argmax = engine.max_pool_bins(x, 4, 3)
            loss = engine.tsum(out)
        # brute-force bin scan
        col_spans = [(0, 2), (2, 4), (4, 6)]
        for r in range(4):
            for c, (c0, c1) in enumerate(col_spans):
                assert out.data[0, r, c] == data[0, r:r + 1, c0:c1].max()
        g.backward(loss)
        expected = np.zeros(24)
        np.add.at(expected, argmax.ravel(), 1.0)
        assert np.array_equal(x.grad.ravel(), expected)

    def test_gradient_mass_conserved(self):
        rng = np.random.default_rng(4)
        x = tensor(rng.normal(size=(3, 7, 9)), requires_grad=True)
        upstream = rng.normal(size=(3, 2, 4))
        with Graph() as g:
            out, _ = engine.max_pool_bins(x, 2, 4)
            loss = engine.tsum(engine.mul(out, tensor(upstream)))
        g.backward(loss)
        assert x.grad.sum() == pytest.approx(upstream.sum(), rel=1e-12)

    def test_too_many_bins(self):
        with pytest.raises(DimensionError):
            engine.max_pool_bins(tensor(np.zeros((1, 2, 2))), 3, 1)

    def test_uniform_and_generic_paths_agree(self):
        rng = np.random.default_rng(5)
        x = tensor(rng.normal(size=(2, 6, 8)))
        fast, fast_arg = engine.max_pool_bins(x, 3, 4)
        slow, slow_arg = engine.pool_bins(
            x, [(0, 2), (2, 4), (4, 6)], [(0, 2), (2, 4), (4, 6), (6, 8)])
        assert np.array_equal(fast.data, slow.data)
        assert np.array_equal(fast_arg, slow_arg)


class TestLstmCell:
    @staticmethod
    def make_params(rng, d, r, scale=0.5):
        return LstmParams(
            tensor(rng.normal(scale=scale, size=(d, 4 * r)), requires_grad=True),
            tensor(rng.normal(scale=scale, size=(r, 4 * r)), requires_grad=True),
            tensor(rng.normal(scale=scale, size=4 * r), requires_grad=True))

    def test_zero_parameters_give_zero_hidden(self):
        params = LstmParams(tensor(np.zeros((3, 8))), tensor(np.zeros((2, 8))),
                            tensor(np.zeros(8)))
        h, c = engine.lstm_cell(tensor([1.0, -2.0, 3.0]), tensor(np.zeros(2)),
                                tensor(np.zeros(2)), params)
        assert np.array_equal(h.data, np.zeros(2))
        assert np.array_equal(c.data, np.zeros(2))

    def test_hidden_state_bounded(self):
        rng = np.random.default_rng(6)
        params = self.make_params(rng, 5, 7, scale=3.0)
        h = tensor(np.zeros(7))
        c = tensor(np.zeros(7))
        for _ in range(10):
            h, c = engine.lstm_cell(tensor(rng.normal(size=5)), h, c, params)
        assert np.all(np.abs(h.data) < 1.0)

    def test_gradients_match_finite_differences(self):
        rng = np.random.default_rng(7)
        params = self.make_params(rng, 5, 7)
        x = tensor(rng.normal(size=5), requires_grad=True)
        h0 = tensor(rng.normal(size=7), requires_grad=True)
        c0 = tensor(rng.normal(size=7), requires_grad=True)

        def build():
            h1, c1 = engine.lstm_cell(x, h0, c0, params)
            h2, _ = engine.lstm_cell(x, h1, c1, params)
            return engine.tsum(h2)

        named = {"x": x, "h0": h0, "c0": c0,
                 "wx": params.wx, "wh": params.wh, "b": params.b}
        assert_matches_fd(build, named, tol=1e-5)

    def test_batched_matches_single(self):
        rng = np.random.default_rng(8)
        params = self.make_params(rng, 4, 3)
        xs = rng.normal(size=(5, 4))
        hb, cb = engine.lstm_cell(tensor(xs), tensor(np.zeros((5, 3))),
                                  tensor(np.zeros((5, 3))), params)
        for i in range(5):
            h1, c1 = engine.lstm_cell(tensor(xs[i]), tensor(np.zeros(3)),
                                      tensor(np.zeros(3)), params)
            assert np.allclose(hb.data[i], h1.data, atol=1e-15)
            assert np.allclose(cb.data[i], c1.data, atol=1e-15)

    def test_rank_mismatch(self):
        rng = np.random.default_rng(9)
        params = self.make_params(rng, 4, 3)
        with pytest.raises(DimensionError):
            engine.lstm_cell(tensor(np.zeros((2, 4))), tensor(np.zeros(3)),
                             tensor(np.zeros(3)), params)


class TestSoftmax:
    def test_uniform(self):
        out = engine.softmax(tensor([0.0, 0.0, 0.0, 0.0]))
        assert np.allclose(out.data, 0.25)

    def test_large_inputs_do_not_overflow(self):
        out = engine.softmax(tensor([1000.0, 0.0]))
        assert abs(out.data[0] - 1.0) < 1e-12
        assert abs(out.data[1]) < 1e-12

    def test_known_values(self):
        out = engine.softmax(tensor([1.0, 2.0, 3.0]))
        assert np.allclose(out.data, [0.09003057, 0.24472847, 0.66524096], atol=1e-8)

    def test_sums_to_one_and_shift_invariant(self):
        rng = np.random.default_rng(10)
        for _ in range(50):
            x = rng.normal(scale=10.0, size=rng.integers(1, 9))
            a = engine.softmax(tensor(x)).data
            b = engine.softmax(tensor(x + 17.3)).data
            assert abs(a.sum() - 1.0) <= 1e-9
            assert np.all(a > 0)
            assert np.allclose(a, b, atol=1e-9)

    def test_empty_input(self):
        with pytest.raises(DimensionError):
            engine.softmax(tensor(np.zeros(0)))

    def test_gradient(self):
        rng = np.random.default_rng(11)
        x = tensor(rng.normal(size=6), requires_grad=True)
        w = rng.normal(size=6)
        assert_matches_fd(lambda: engine.tsum(engine.mul(engine.softmax(x), tensor(w))),
                          {"x": x}, tol=1e-6)


class TestBackward:
    def test_sum_gives_ones(self):
        x = tensor([1.0, 2.0, 3.0], requires_grad=True)
        with Graph() as g:
            loss = engine.tsum(x)
        g.backward(loss)
        assert np.array_equal(x.grad, np.ones(3))

    def test_half_square_gives_identity(self):
        x = tensor([1.0, -2.0, 3.0], requires_grad=True)
        with Graph() as g:
            loss = engine.scale(engine.tsum(engine.mul(x, x)), 0.5)
        g.backward(loss)
        assert np.allclose(x.grad, x.data)

    def test_non_scalar_loss_rejected(self):
        x = tensor([1.0, 2.0], requires_grad=True)
        with Graph() as g:
            y = engine.mul(x, x)
        with pytest.raises(ContractError):
            g.backward(y)

    def test_repeated_backward_accumulates(self):
        x = tensor([1.0, 2.0], requires_grad=True)
        with Graph() as g:
            loss = engine.tsum(x)
        g.backward(loss)
        g.backward(loss)
        assert np.array_equal(x.grad, 2.0 * np.ones(2))

    def test_unreachable_branch_gets_no_gradient(self):
        x = tensor([1.0, 2.0], requires_grad=True)
        y = tensor([3.0, 4.0], requires_grad=True)
        with Graph() as g:
            engine.tsum(engine.mul(y, y))  # dead branch
            loss = engine.tsum(x)
        g.backward(loss)
        assert y.grad is None

    def test_no_recording_outside_graph(self):
        x = tensor([1.0], requires_grad=True)
        out = engine.mul(x, x)
        assert out.requires_grad is False


class TestGatherOps:
    def test_take_rows_scatter_adds(self):
        x = tensor(np.arange(12.0).reshape(4, 3), requires_grad=True)
        with Graph() as g:
            picked = engine.take_rows(x, [1, 1, 3])
            loss = engine.tsum(picked)
        g.backward(loss)
        expected = np.zeros((4, 3))
        expected[1] = 2.0
        expected[3] = 1.0
        assert np.array_equal(x.grad, expected)

    def test_take_per_row(self):
        x = tensor(np.arange(6.0).reshape(3, 2), requires_grad=True)
        with Graph() as g:
            loss = engine.tsum(engine.take_per_row(x, [1, 0, 1]))
        assert loss.item() == 1.0 + 2.0 + 5.0
        g.backward(loss)
        assert np.array_equal(x.grad, [[0, 1], [1, 0], [0, 1]])

    def test_stack_concat_permute_roundtrip_gradients(self):
        rng = np.random.default_rng(12)
        parts = [tensor(rng.normal(size=(2, 3)), requires_grad=True) for _ in range(3)]
        w = rng.normal(size=(3, 2, 3))

        def build():
            stacked = engine.stack(parts, axis=0)
            perm = engine.permute(stacked, (1, 0, 2))
            back = engine.permute(perm, (1, 0, 2))
            return engine.tsum(engine.mul(back, tensor(w)))

        assert_matches_fd(build, {f"p{i}": p for i, p in enumerate(parts)}, tol=1e-6)


class TestAdam:
    def test_zero_gradient_leaves_parameter_unchanged(self):
        p = tensor([1.0, 2.0], requires_grad=True)
        p.grad = np.zeros(2)
        Adam().step({"p": p}, lr=0.1)
        assert np.array_equal(p.data, [1.0, 2.0])

    def test_first_step_magnitude_close_to_lr(self):
        for g in (0.003, -1.0, 250.0):
            p = tensor([5.0], requires_grad=True)
            p.grad = np.array([g])
            Adam().step({"p": p}, lr=0.1)
            assert abs(abs(p.data[0] - 5.0) - 0.1) < 1e-6

    def test_scalar_descent(self):
        w = tensor([0.0], requires_grad=True)
        opt = Adam()
        for _ in range(500):
            w.grad = 2.0 * (w.data - 3.0)
            opt.step({"w": w}, lr=0.1)
        assert abs(w.data[0] - 3.0) < 0.01

    def test_nan_gradient_rejected(self):
        p = tensor([1.0], requires_grad=True)
        p.grad = np.array([np.nan])
        with pytest.raises(NumericHealthError):
            Adam().step({"p": p}, lr=0.1)

    def test_step_counter_increments(self):
        p = tensor([1.0], requires_grad=True)
        opt = Adam()
        for expect in (1, 2, 3):
            p.grad = np.array([0.5])
            opt.step({"p": p}, lr=0.01)
            assert opt.step_count == expect


class TestDeterminism:
    def test_forward_bit_identical_across_runs(self):
        rng = np.random.default_rng(13)
        x = rng.normal(size=(3, 16, 16))
        k = rng.normal(size=(4, 3, 3, 3))
        runs = []
        for _ in range(2):
            out = engine.conv2d(tensor(x), tensor(k), 1, 1)
            pooled, _ = engine.max_pool_bins(out, 8, 8)
            runs.append(engine.tsum(engine.tanh(pooled)).item())
        assert runs[0] == runs[1]


class TestElementwiseGradients:
    @pytest.mark.parametrize("op", [engine.relu, engine.sigmoid, engine.tanh,
                                    engine.exp, engine.smooth_l1])
    def test_against_finite_differences(self, op):
        rng = np.random.default_rng(14)
        x = tensor(rng.normal(size=8) * 2.0 + 0.1, requires_grad=True)
        w = rng.normal(size=8)
        assert_matches_fd(lambda: engine.tsum(engine.mul(op(x), tensor(w))),
                          {"x": x}, tol=1e-4)

    def test_log_gradient(self):
        rng = np.random.default_rng(15)
        x = tensor(rng.uniform(0.5, 3.0, size=6), requires_grad=True)
        assert_matches_fd(lambda: engine.tsum(engine.log(x)), {"x": x}, tol=1e-6)

    def test_smooth_l1_values(self):
        out = engine.smooth_l1(tensor([0.0, 0.5, 3.0, -2.0]))
        assert np.allclose(out.data, [0.0, 0.125, 2.5, 1.5])


def test_default_dtype_switch():
    engine.set_default_dtype(np.float32)
    try:
        assert tensor([1.0]).data.dtype == np.float32
    finally:
        engine.set_default_dtype(np.float64)
    assert tensor([1.0]).data.dtype == np.float64
    with pytest.raises(ContractError):
        engine.set_default_dtype(np.int32)
