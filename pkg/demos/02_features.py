"""From sentences to TF-IDF vectors.

Tokens are lowercased words with stop words removed and plural nouns
reduced to the singular. N-grams of length 1 to 3 are built on the
cleaned token stream, weighted by binary term frequency times
``ln(N/df) + 1`` and scaled to unit length.
"""
import numpy as np

from cbsent import features

texts = ["Exports contracted sharply.", "Exports rebounded strongly.", "Tourist arrivals rebounded."]
for t in texts:
    print(features.tokenize(t))

vocab = features.fit_vocabulary(texts)
print(len(vocab), "terms:", vocab.terms)
print("idf:", np.round(vocab.idf, 3))

X = features.transform(texts, vocab)
print(np.round(X.toarray(), 3))
print("row norms:", np.linalg.norm(X.toarray(), axis=1))

# Unseen words are ignored at transform time.
print(features.transform(["Imports contracted."], vocab).toarray().round(3))
