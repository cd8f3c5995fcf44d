"""crossera: summarise historical text in its modern language.

Pipeline: corpus preprocessing -> monolingual feature-n-gram embeddings ->
orthogonal cross-space alignment -> pointer summariser trained on modern
pairs with frozen encoder embeddings -> encoder-embedding swap for
historical inputs -> ROUGE evaluation.
"""

__version__ = "0.1.0"
