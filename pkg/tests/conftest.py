import pytest

from gedraft.synth import build_dataset


@pytest.fixture(scope="session")
def tiny_dataset():
    """Small labeled dataset shared by training/eval/probing tests."""
    ds, report = build_dataset(
        n_graphs=30,
        n_min=4,
        n_max=6,
        p=0.4,
        alphabet_size=3,
        seed=7,
        pairs_per_graph=4,
    )
    assert report.dropped_budget == 0
    assert not ds.validate()
    return ds
