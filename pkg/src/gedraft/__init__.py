"""Graph similarity learning with difference-attention fusion.

Subpackages: graph data model and generation (graphs), exact edit distance
(ged), the differentiation engine (autodiff, optim), the model stack
(encoder, fusion, model), training and metrics (training, metrics), the
remaining-subgraph alignment test (resat), and the CLI (cli).
"""

__version__ = "0.1.0"
