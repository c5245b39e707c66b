"""Topic-modeling comparison toolkit.

Two pipelines over the same preprocessed corpus:

* ``plsa``    -- probabilistic latent semantic analysis fit by EM
* ``cluster`` -- dense document embeddings (external or built-in LSA),
  density-based hierarchical clustering, c-TF-IDF topic words

Both are scored with C_v coherence and compared by the ``report`` module.
"""

__version__ = "0.1.0"
