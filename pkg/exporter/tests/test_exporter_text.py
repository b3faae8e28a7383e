"""Tokenization, sentence handling, and the stable hash."""

import numpy as np
import pytest

from qualityexport.text import (
    hashed_counts,
    segment_sentences,
    stable_hash,
    tokenize,
    truncate_text,
)


def test_tokenize_lowercases_and_splits():
    assert tokenize("Honey helps; COUGH-relief works.") == [
        "honey", "helps", "cough", "relief", "works",
    ]


def test_tokenize_drops_underscore_and_empty():
    assert tokenize("a_b c") == ["a", "b", "c"]
    assert tokenize("") == []
    assert tokenize("...!!!") == []


def test_segment_sentences_on_terminators():
    text = "First one. Second here! Third? Fourth trails"
    assert segment_sentences(text) == ["First one.", "Second here!", "Third?", "Fourth trails"]


def test_segment_sentences_no_split_without_whitespace():
    # "e.g.x" has no whitespace after the period, so it stays one segment
    assert segment_sentences("version 1.2 released") == ["version 1.2 released"]


def test_truncate_text_keeps_first_sentences():
    text = "A. B. C. D."
    assert truncate_text(text, 2) == "A. B."
    assert truncate_text(text, 10) == "A. B. C. D."


def test_truncate_text_rejects_zero_limit():
    with pytest.raises(ValueError, match="limit"):
        truncate_text("A.", 0)


def test_stable_hash_known_value():
    # FNV-1a of the empty string is the offset basis itself
    assert stable_hash("") == 0x811C9DC5
    # fixed value guards against accidental algorithm changes
    assert stable_hash("a") == 0xE40C292C


def test_stable_hash_deterministic_across_calls():
    values = {stable_hash("availability") for _ in range(5)}
    assert len(values) == 1


def test_hashed_counts_counts_occurrences():
    vec = hashed_counts(["x", "y", "x"], dim=64)
    assert vec.sum() == 3.0
    assert vec[stable_hash("x") % 64] == 2.0
    assert vec[stable_hash("y") % 64] == 1.0


def test_hashed_counts_empty_is_zero_vector():
    assert not np.any(hashed_counts([], dim=16))
