"""Fixtures: a tiny deterministic BERT checkpoint built offline."""

import os

# must precede any transformers import so nothing reaches for a hub
os.environ.setdefault("HF_HUB_OFFLINE", "1")
os.environ.setdefault("TRANSFORMERS_OFFLINE", "1")

import pytest
import torch
from transformers import BertConfig, BertModel, BertTokenizerFast

VOCAB = [
    "[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]",
    "bond", "swap", "future", "option", "equity", "index", "fund",
    "rate", "credit", "yield", "cash", "debt", "note", "coupon", "zero",
    "##s", "##ing", "the", "a", "of",
]

TINY_HIDDEN = 32


@pytest.fixture(scope="session")
def tiny_model_dir(tmp_path_factory):
    """Directory holding a seeded random-weight encoder plus tokenizer."""
    target = tmp_path_factory.mktemp("tiny_encoder")
    vocab_file = target / "vocab.txt"
    vocab_file.write_text("\n".join(VOCAB) + "\n", encoding="utf-8")
    config = BertConfig(
        vocab_size=len(VOCAB),
        hidden_size=TINY_HIDDEN,
        num_hidden_layers=2,
        num_attention_heads=2,
        intermediate_size=64,
        max_position_embeddings=64,
    )
    torch.manual_seed(7)
    BertModel(config).save_pretrained(target)
    BertTokenizerFast(str(vocab_file)).save_pretrained(target)
    return str(target)
