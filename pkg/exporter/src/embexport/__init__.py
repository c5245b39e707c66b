"""Standalone corpus-to-embedding exporter.

Reads a JSONL corpus, encodes one vector per line with a sentence
embedding model, and writes an EMB1 binary file plus a JSON provenance
manifest. The main pipeline consumes the EMB1 file; nothing else is
shared between the two tools.
"""

__version__ = "0.1.0"
