import math

import pytest
import torch

from ebt_rvnn.autodiff import Tape, active_tape, backward, finite_diff_check, ops
from ebt_rvnn.core.diagnostics import GRADCHECK_TOLERANCE, SUITE_SCALE_FLOOR, gradient_suite
from ebt_rvnn.errors import ContractError, DimensionError


def test_linear_shapes_and_mismatch_names_both_shapes():
    x = torch.ones(3, 4)
    out = ops.linear(x, torch.ones(4, 2), torch.zeros(2))
    assert out.shape == (3, 2)
    assert torch.all(out == 4.0)

    with pytest.raises(DimensionError) as excinfo:
        ops.linear(x, torch.ones(5, 2))
    assert "(3, 4)" in str(excinfo.value) and "(5, 2)" in str(excinfo.value)


def test_gelu_is_the_exact_erf_form():
    value = ops.elementwise_unary("gelu", torch.tensor([1.0]))
    expected = 0.5 * (1.0 + math.erf(1.0 / math.sqrt(2.0)))
    assert abs(float(value) - expected) < 1e-15


def test_unknown_unary_kind():
    with pytest.raises(ContractError):
        ops.elementwise_unary("tanh", torch.zeros(2))


def test_softmax_masked_zeroes_masked_entries_and_empty_rows():
    logits = torch.tensor([[1.0, 2.0, 3.0], [0.5, -1.0, 4.0], [7.0, 8.0, 9.0]])
    mask = torch.tensor([[1, 0, 1], [1, 1, 1], [0, 0, 0]], dtype=torch.bool)
    weights = ops.softmax_masked(logits, mask)

    assert weights[0, 1] == 0.0
    assert torch.all(weights[2] == 0.0)
    assert abs(float(weights[0].sum()) - 1.0) < 1e-12
    assert abs(float(weights[1].sum()) - 1.0) < 1e-12
    assert abs(float(weights[0, 2] / weights[0, 0]) - math.e ** 2) < 1e-9


def test_softmax_masked_zero_width():
    out = ops.softmax_masked(torch.zeros(3, 0), torch.zeros(3, 0, dtype=torch.bool))
    assert out.shape == (3, 0)


def test_softmax_masked_shape_mismatch():
    with pytest.raises(DimensionError):
        ops.softmax_masked(torch.zeros(2, 3), torch.ones(2, 2, dtype=torch.bool))


def test_log_softmax_of_uniform_logits():
    out = ops.log_softmax(torch.zeros(10))
    assert torch.allclose(out, torch.full((10,), -math.log(10.0)), atol=1e-15)


def test_layer_norm_standardizes_with_biased_variance():
    x = torch.randn(5, 16, generator=torch.Generator().manual_seed(0))
    out = ops.layer_norm(x, torch.ones(16), torch.zeros(16))
    assert torch.allclose(out.mean(dim=-1), torch.zeros(5), atol=1e-12)
    variance = out.var(dim=-1, unbiased=False)
    expected = x.var(dim=-1, unbiased=False) / (x.var(dim=-1, unbiased=False) + ops.LAYER_NORM_EPS)
    assert torch.allclose(variance, expected, atol=1e-10)


def test_slice_prefix():
    x = torch.arange(12.0).reshape(2, 6)
    assert torch.equal(ops.slice_prefix(x, 2), x[:, :2])
    assert torch.equal(ops.slice_prefix(x, 100), x)
    with pytest.raises(ContractError):
        ops.slice_prefix(x, 0)


def test_concat_checks_leading_dims():
    assert ops.concat(torch.zeros(2, 3), torch.ones(2, 4)).shape == (2, 7)
    with pytest.raises(DimensionError):
        ops.concat(torch.zeros(2, 3), torch.zeros(3, 3))


def test_dropout_identity_in_eval_and_seeded_in_training():
    x = torch.ones(200)
    assert ops.dropout(x, 0.5, training=False) is x

    first = ops.dropout(x, 0.5, True, torch.Generator().manual_seed(3))
    second = ops.dropout(x, 0.5, True, torch.Generator().manual_seed(3))
    assert torch.equal(first, second)
    assert set(first.unique().tolist()) <= {0.0, 2.0}


def test_gumbel_noise_is_seeded():
    a = ops.gumbel_noise((4,), torch.Generator().manual_seed(5))
    b = ops.gumbel_noise((4,), torch.Generator().manual_seed(5))
    assert torch.equal(a, b)
    assert torch.isfinite(a).all()


def test_tape_records_primitives_and_nests():
    W = torch.randn(3, 2, requires_grad=True)
    x = torch.randn(4, 3)
    assert active_tape() is None
    with Tape() as outer:
        ops.linear(x, W)
        with Tape() as inner:
            assert active_tape() is inner
            ops.elementwise_unary("sigmoid", x)
        assert active_tape() is outer
    assert active_tape() is None

    assert [r.kind for r in outer.records] == ["linear"]
    assert [r.kind for r in inner.records] == ["sigmoid"]
    assert outer.counts["linear"] == 1
    assert outer.leaves() == [W]


def test_backward_zero_fills_unreached_leaves():
    used = torch.randn(3, requires_grad=True)
    unused = torch.randn(3, requires_grad=True)
    with Tape() as tape:
        ops.elementwise_unary("sigmoid", unused)
        loss = ops.elementwise_unary("silu", used).sum()
    grads = backward(loss, tape)

    assert torch.equal(grads[unused], torch.zeros(3))
    expected = torch.sigmoid(used) * (1 + used * (1 - torch.sigmoid(used)))
    assert torch.allclose(grads[used], expected.detach(), atol=1e-12)


def test_backward_contracts():
    x = torch.randn(3, requires_grad=True)
    with pytest.raises(ContractError):
        backward(x * 2, inputs=[x])
    with pytest.raises(ContractError):
        backward((x * 2).sum())


def test_finite_diff_check_flags_a_wrong_gradient():
    class WrongSquare(torch.autograd.Function):
        @staticmethod
        def forward(ctx, x):
            ctx.save_for_backward(x)
            return x * x

        @staticmethod
        def backward(ctx, grad):
            (x,) = ctx.saved_tensors
            return grad * 3 * x

    x = torch.randn(4, generator=torch.Generator().manual_seed(0)).requires_grad_()
    assert finite_diff_check(lambda: (x * x).sum(), [x]) < 1e-6
    assert finite_diff_check(lambda: WrongSquare.apply(x).sum(), [x]) > 0.1


def test_finite_diff_check_flags_a_one_percent_scaling_at_small_magnitude():
    class ScaledGrad(torch.autograd.Function):
        @staticmethod
        def forward(ctx, x):
            return x * 1e-4

        @staticmethod
        def backward(ctx, grad):
            return grad * 1e-4 * 1.01

    x = torch.randn(5, generator=torch.Generator().manual_seed(1)).requires_grad_()
    weights = torch.randn(5, generator=torch.Generator().manual_seed(2))
    assert finite_diff_check(lambda: (x * 1e-4 * weights).sum(), [x]) < 1e-6
    assert finite_diff_check(lambda: (ScaledGrad.apply(x) * weights).sum(), [x]) > 5e-3
    scaled = finite_diff_check(lambda: (ScaledGrad.apply(x) * weights).sum(), [x], scale_floor=SUITE_SCALE_FLOOR)
    assert scaled > 5e-3


def test_suite_floor_tolerates_a_softmax_shift():
    logits = torch.randn(4, generator=torch.Generator().manual_seed(4)).requires_grad_()
    shift = torch.randn(1, generator=torch.Generator().manual_seed(5)).requires_grad_()
    weights = torch.randn(4, generator=torch.Generator().manual_seed(6))

    def loss():
        return (torch.softmax(logits + shift, dim=0) * weights).sum()

    assert finite_diff_check(loss, [logits, shift], scale_floor=SUITE_SCALE_FLOOR) < GRADCHECK_TOLERANCE


def test_finite_diff_check_ignores_exactly_constant_entries():
    x = torch.randn(4, generator=torch.Generator().manual_seed(3)).requires_grad_()
    assert finite_diff_check(lambda: (ops.slice_prefix(x, 2) ** 2).sum(), [x]) < 1e-6


def test_gradient_suite_passes_for_every_op():
    results = gradient_suite(seed=0)
    assert all(r.shapes >= 10 for r in results)
    names = {r.name for r in results}
    assert {"linear", "layer_norm", "grc_compose", "disentangled_score", "gau_block",
            "attention_pool", "classify", "cross_entropy"} <= names
    for result in results:
        assert result.max_error < GRADCHECK_TOLERANCE, result.name
