import pytest
import torch

from ebt_rvnn.autodiff import Tape
from ebt_rvnn.core.cells import (
    GatedRecursiveCell,
    InitialTransform,
    PairScorer,
    disentangled_score,
    entangled_candidate_scores,
    grc_compose,
    init_transform,
    legacy_score,
    pair_scores,
)
from ebt_rvnn.errors import ContractError, DimensionError


def test_init_transform_outputs_normalized_rows(generator):
    p = InitialTransform(5, 8, generator).double()
    out = init_transform(torch.randn(3, 5, generator=generator), p)
    assert out.shape == (3, 8)
    assert torch.allclose(out.mean(dim=-1), torch.zeros(3), atol=1e-12)
    with pytest.raises(ContractError):
        init_transform(torch.zeros(0, 5), p)


def test_grc_compose_batches_over_leading_dims(make_modules):
    cell, _, g = make_modules()
    left, right = torch.randn(2, 3, 8, generator=g), torch.randn(2, 3, 8, generator=g)
    batched = grc_compose(left, right, cell)
    assert batched.shape == (2, 3, 8)
    single = grc_compose(left[1, 2:3], right[1, 2:3], cell)
    assert torch.allclose(batched[1, 2], single[0], atol=1e-12)


def test_grc_compose_rejects_mismatched_children(make_modules):
    cell, _, _ = make_modules()
    with pytest.raises(DimensionError):
        grc_compose(torch.zeros(2, 8), torch.zeros(3, 8), cell)
    with pytest.raises(DimensionError):
        grc_compose(torch.zeros(2, 6), torch.zeros(2, 6), cell)


def test_grc_compose_counts_one_composition_per_row(make_modules):
    cell, _, g = make_modules()
    with Tape() as tape:
        grc_compose(torch.randn(4, 8, generator=g), torch.randn(4, 8, generator=g), cell)
    assert tape.counts["grc_compose"] == 4


def test_cell_default_width_and_parameter_count():
    cell = GatedRecursiveCell(8)
    assert cell.d_cell == 32
    assert cell.parameter_count == sum(p.numel() for p in cell.parameters())


def test_scorer_width_follows_slicing():
    assert PairScorer(128, 64, slice_inputs=True).width == 64
    assert PairScorer(32, 64, slice_inputs=True).width == 32
    assert PairScorer(128, 64, slice_inputs=False).width == 128
    scorer = PairScorer(16, 4)
    assert scorer.parameter_count == sum(p.numel() for p in (scorer.Ws1, scorer.bs1, scorer.Ws2, scorer.bs2))


def test_disentangled_score_never_calls_the_cell(make_modules):
    _, scorer, g = make_modules()
    with Tape() as tape:
        scores = pair_scores(torch.randn(6, 8, generator=g), scorer)
    assert scores.shape == (5,)
    assert tape.counts["grc_compose"] == 0
    assert tape.counts["scorer"] == 5


def test_slicing_ignores_coordinates_past_the_slice():
    for case in range(100):
        g = torch.Generator().manual_seed(case)
        scorer = PairScorer(8, 3, True, g).double()
        h_i = torch.randn(4, 8, generator=g, requires_grad=True)
        h_j = torch.randn(4, 8, generator=g, requires_grad=True)

        base = disentangled_score(h_i, h_j, scorer)
        noise = torch.zeros(4, 8)
        noise[:, 3:] = torch.randn(4, 5, generator=g)
        perturbed = disentangled_score(h_i + noise, h_j - noise, scorer)
        assert torch.equal(base, perturbed)

        grad_i, grad_j = torch.autograd.grad(base.sum(), [h_i, h_j])
        assert torch.all(grad_i[:, 3:] == 0.0)
        assert torch.all(grad_j[:, 3:] == 0.0)


def test_entangled_scores_compose_every_pair(make_modules):
    cell, scorer, g = make_modules()
    h = torch.randn(2, 5, 8, generator=g)
    with Tape() as tape:
        parents, scores = entangled_candidate_scores(h, cell, scorer)
    assert parents.shape == (2, 4, 8)
    assert scores.shape == (2, 4)
    assert tape.counts["grc_compose"] == 8
    assert torch.allclose(scores, legacy_score(parents, scorer), atol=0)

    with pytest.raises(ContractError):
        entangled_candidate_scores(torch.zeros(1, 8), cell, scorer)


def test_pair_scores_needs_two_nodes(make_modules):
    _, scorer, _ = make_modules()
    with pytest.raises(ContractError):
        pair_scores(torch.zeros(1, 8), scorer)
