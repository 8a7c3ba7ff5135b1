"""HTTP scoring service.

Wraps a causal language model (perplexity, for fluency ranking) and a
contextual-embedding encoder (greedy cosine matching, for semantic
similarity) behind one endpoint::

    POST /v1/score
    {"kind": "fluency"|"semantic", "source": str|null, "texts": [str, ...]}
    -> 200 {"scores": [number, ...]}

Model identities are configuration: any Hugging Face model id or local
checkpoint directory loadable through the Auto* classes works.
"""

from .app import create_app
from .config import ServiceConfig

__version__ = "0.1.0"
