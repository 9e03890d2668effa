import pytest
import torch

from ebt_rvnn.core.cells import GatedRecursiveCell, PairScorer


@pytest.fixture(autouse=True)
def float64_default():
    previous = torch.get_default_dtype()
    torch.set_default_dtype(torch.float64)
    yield
    torch.set_default_dtype(previous)


@pytest.fixture
def generator():
    return torch.Generator().manual_seed(1234)


@pytest.fixture
def make_modules():
    """Seeded float64 cell and scorer of a small width"""

    def build(seed=0, d=8, d_cell=16, d_s=4, slice_inputs=True):
        g = torch.Generator().manual_seed(seed)
        cell = GatedRecursiveCell(d, d_cell, g).double()
        scorer = PairScorer(d, d_s, slice_inputs, g).double()
        return cell, scorer, g

    return build


@pytest.fixture
def workdir(tmp_path, monkeypatch):
    """Run inside a temporary directory (the CLI writes logs/ relative to it)"""
    monkeypatch.chdir(tmp_path)
    return tmp_path
