"""termrec: search-term recommendation over OAI-PMH-harvested metadata.

Harvests Dublin Core records, builds per-repository co-occurrence models,
and serves controlled-vocabulary recommendations, query expansions,
tag-cloud weights, and bibliometric reports via a CLI and an HTTP API.
"""

__version__ = "0.1.0"
