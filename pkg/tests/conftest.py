import numpy as np
import pytest

from chiplink import build_template_bank, build_vocab, kernels


@pytest.fixture(scope="session")
def vocab():
    return build_vocab()


@pytest.fixture(scope="session")
def bank(vocab):
    return build_template_bank(vocab)


@pytest.fixture(scope="session", autouse=True)
def _warm_kernels():
    # keep JIT compile time out of individual tests' clocks
    kernels.warmup()


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)


def random_token_ids(gen, low_len=3, high_len=40, vocab_size=128):
    length = int(gen.integers(low_len, high_len + 1))
    return [int(t) for t in gen.integers(0, vocab_size, length)]
