import pytest
from hypothesis import settings

from chainreview.config import NodeConfig
from chainreview.engine import ReviewEngine

settings.register_profile("suite", max_examples=25, deadline=None)
settings.load_profile("suite")

TEST_GENESIS_SEED = bytes(range(32))


def seeded(n: int) -> bytes:
    """A distinct 32-byte keygen seed per small integer."""
    return n.to_bytes(4, "big") * 8


@pytest.fixture
def node_config(tmp_path) -> NodeConfig:
    return NodeConfig(data_dir=str(tmp_path / "node"), genesis_seed=TEST_GENESIS_SEED)


@pytest.fixture
def engine(node_config) -> ReviewEngine:
    return ReviewEngine(node_config)


@pytest.fixture
def engine_factory(tmp_path):
    counter = [0]

    def make(**overrides) -> ReviewEngine:
        counter[0] += 1
        config = NodeConfig(
            data_dir=str(tmp_path / f"node{counter[0]}"),
            genesis_seed=overrides.pop("genesis_seed", TEST_GENESIS_SEED),
            **overrides,
        )
        return ReviewEngine(config)

    return make
