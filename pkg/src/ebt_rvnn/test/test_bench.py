import pytest
import torch

from ebt_rvnn.bench import BenchRunner, MemoryTracker, report_csv, report_text, track
from ebt_rvnn.bench.runner import OVER_BUDGET, peak_ratio
from ebt_rvnn.config.settings import BenchConfig
from ebt_rvnn.core.cells import GatedRecursiveCell, grc_compose
from ebt_rvnn.errors import BudgetExceededError, ConfigError


def tiny_bench(**overrides):
    values = dict(lengths="12", variants="gt-grc,ebt-grc,bt-grc", repetitions=1,
                  beam_size=2, d=8, d_cell=16, d_s=4, dtype="float64")
    values.update(overrides)
    return BenchConfig(**values)


def test_empty_region_retains_nothing():
    result, stats = track("empty", lambda: 42)
    assert result == 42
    assert stats.live_scalars == 0
    assert stats.peak_scalars == 0


def test_single_composition_region(generator):
    cell = GatedRecursiveCell(128, 512, generator)
    left = torch.randn(1, 128, generator=generator, requires_grad=True)
    right = torch.randn(1, 128, generator=generator, requires_grad=True)
    tracker = MemoryTracker(exclude=cell.parameters())

    parent, stats = track("grc", lambda: grc_compose(left, right, cell), tracker)
    assert stats.peak_scalars >= 1152
    assert stats.breakdown["grc"] >= stats.peak_scalars

    del parent
    assert tracker.live_scalars == 0


def test_dropping_the_graph_releases_every_count(generator):
    cell = GatedRecursiveCell(32, 64, generator)
    h = torch.randn(3, 32, generator=generator, requires_grad=True)
    tracker = MemoryTracker(exclude=cell.parameters())

    def chain():
        parent = grc_compose(h[0:1], h[1:2], cell)
        return grc_compose(parent, h[2:3], cell).sum()

    peaks = []
    for _ in range(3):
        loss, stats = track("chain", chain, tracker)
        assert tracker.live_scalars > 0
        del loss
        assert tracker.live_scalars == 0
        peaks.append(stats.peak_scalars)
    # a live peak, not a running total
    assert peaks[0] == peaks[1] == peaks[2]
    assert tracker.peak_scalars == peaks[0]


def test_backward_frees_the_saved_tensors(generator):
    cell = GatedRecursiveCell(16, 32, generator)
    h = torch.randn(2, 16, generator=generator, requires_grad=True)
    tracker = MemoryTracker(exclude=cell.parameters())

    def forward_backward():
        loss = grc_compose(h[0:1], h[1:2], cell).sum()
        torch.autograd.grad(loss, [h])

    _, stats = track("fb", forward_backward, tracker)
    assert stats.peak_scalars > 0
    assert tracker.live_scalars == 0


def test_nested_regions(generator):
    cell = GatedRecursiveCell(16, 32, generator)
    h = torch.randn(4, 16, generator=generator, requires_grad=True)
    tracker = MemoryTracker(exclude=cell.parameters())

    def outer():
        first = grc_compose(h[0:1], h[1:2], cell)
        second, inner = track("inner", lambda: grc_compose(first, h[2:3], cell))
        return first, second, inner

    (first, second, inner), stats = track("outer", outer, tracker)
    assert inner.peak_scalars > 0
    assert stats.peak_scalars >= inner.peak_scalars
    assert set(stats.breakdown) == {"outer", "inner"}
    assert tracker.peak_scalars == stats.peak_scalars


def test_budget_raises_inside_the_region(generator):
    cell = GatedRecursiveCell(16, 32, generator)
    h = torch.randn(2, 16, generator=generator, requires_grad=True)
    tracker = MemoryTracker(budget=10, exclude=cell.parameters())
    with pytest.raises(BudgetExceededError):
        track("grc", lambda: grc_compose(h[0:1], h[1:2], cell), tracker)


def test_one_row_per_variant():
    rows = BenchRunner(tiny_bench()).run()
    assert [r.variant for r in rows] == ["gt-grc", "ebt-grc", "bt-grc"]
    assert all(r.length == 12 and r.peak_scalars > 0 and r.seconds >= 0 for r in rows)


def test_counts_are_deterministic():
    first = [r.peak_scalars for r in BenchRunner(tiny_bench()).run()]
    second = [r.peak_scalars for r in BenchRunner(tiny_bench()).run()]
    assert first == second


def test_entangled_beam_retains_more():
    rows = BenchRunner(tiny_bench(lengths="30", variants="bt-grc,ebt-grc")).run()
    assert peak_ratio(rows, "bt-grc", "ebt-grc", 30) > 1.0
    assert peak_ratio(rows, "bt-grc", "missing", 30) is None


def test_over_budget_cell_is_reported():
    rows = BenchRunner(tiny_bench(variants="ebt-grc", scalar_budget=10)).run()
    assert rows[0].over_budget
    assert OVER_BUDGET in report_text(rows)
    assert report_csv(rows).splitlines()[1] == f"ebt-grc,12,{OVER_BUDGET},{OVER_BUDGET}"


def test_reports():
    rows = BenchRunner(tiny_bench(lengths="6,10", variants="egt-grc")).run()
    lines = report_csv(rows).splitlines()
    assert lines[0] == "variant,length,seconds,peak_scalars"
    assert [line.split(",")[:2] for line in lines[1:]] == [["egt-grc", "6"], ["egt-grc", "10"]]
    text = report_text(rows)
    assert "egt-grc" in text
    assert str(rows[1].peak_scalars) in text


def test_unknown_variant():
    with pytest.raises(ConfigError):
        BenchRunner(tiny_bench(variants="ebt-lstm")).run()


@pytest.mark.slow
def test_memory_ratios_at_length_200():
    config = BenchConfig(lengths="200", variants="bt-grc,ebt-grc,ebt-grc-512,ebt-grc-512-noslice",
                         repetitions=1)
    rows = BenchRunner(config).run()
    assert peak_ratio(rows, "bt-grc", "ebt-grc", 200) >= 5
    assert peak_ratio(rows, "ebt-grc-512-noslice", "ebt-grc-512", 200) >= 2
