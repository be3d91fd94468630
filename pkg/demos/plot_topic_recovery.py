"""
Recovering planted topics
=========================

The bundled generator writes abstracts from five known term distributions.
Fitting a five-topic model and comparing each fitted topic's top-10 terms
against the generator shows how much of the structure Gibbs sampling finds.
"""

# %%
# Build the corpus and the bag-of-words view.
from ldatrends import synthetic
from ldatrends.lda import LdaParams, fit, top_terms
from ldatrends.textprep import prepare

sample = synthetic.generate()
vocab, corpus = prepare([r.text for r in sample.records])
print(f"{corpus.D} documents, {len(vocab)} terms, {corpus.n_tokens} tokens")

# %%
# Fit with the generator's own k.
model = fit(corpus, LdaParams(k=5, alpha=0.2, eta=0.01, iterations=1000, burn_in=500, seed=1), vocab=vocab)
fitted = [[term for term, _ in top_terms(model, t, 10)] for t in range(model.k)]

# %%
# For each planted topic, the fitted topic sharing most of its top terms.
for p, name in enumerate(synthetic.TOPIC_NAMES):
    planted = set(sample.planted_top(p, 10))
    f = max(range(model.k), key=lambda t: len(planted & set(fitted[t])))
    ov = len(planted & set(fitted[f])) / 10
    print(f"{name:>12} -> topic {f}  overlap {ov:.1f}  {' '.join(fitted[f][:5])}")
