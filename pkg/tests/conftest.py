import numpy as np
import pytest

from ldatrends import synthetic
from ldatrends.textprep import prepare


@pytest.fixture(scope="session")
def sample():
    return synthetic.generate()


@pytest.fixture(scope="session")
def sample_bow(sample):
    vocab, corpus = prepare([r.text for r in sample.records])
    return vocab, corpus


def planted_overlap(model, sample, n=10):
    """Best top-n overlap of each planted topic against the fitted topics."""
    from ldatrends.lda import top_terms

    fitted = [{t for t, _ in top_terms(model, j, n)} for j in range(model.k)]
    return np.array([max(len(set(sample.planted_top(t, n)) & f) / n for f in fitted)
                     for t in range(len(synthetic.TOPIC_TERMS))])
