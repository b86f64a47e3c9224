"""emb-adapter: embedding and LLM-vote files for the ad-risk pipeline.

Reads the canonical scrubbed corpus JSONL and writes EMB1 embedding
files (and, optionally, prediction JSONL files) that the main pipeline
consumes.  The adapter never sees raw phone digits: it embeds the
scrubbed text fields only.
"""

__version__ = "0.1.0"
