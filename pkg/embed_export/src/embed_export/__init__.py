"""embed_export: produce base-embedding files from transformer encoders.

Runs a pretrained sentence encoder (FinBERT-class or any other
Hugging Face model) over a file of texts and writes the resulting
vectors in the hyperank embedding wire format, so the ranking pipeline
can consume real encoder embeddings instead of hashed stand-ins.
"""

from .exporter import ExportError, encode_texts, export, load_texts, wire_id

__all__ = [
    "ExportError",
    "encode_texts",
    "export",
    "load_texts",
    "wire_id",
]
