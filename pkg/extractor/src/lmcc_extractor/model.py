"""Model backends that turn text into per-token next-token entropies.

A backend supplies two things: its own tokenization of a text as byte
spans, and one entropy per token, computed from the full softmax over the
vocabulary (never a top-k truncation). Entropies are in nats, so every
value lies in [0, ln(vocab size)].

Identifiers select the backend:

  * ``stub:MODE`` or ``stub:MODE:VOCAB`` builds a deterministic in-process
    model for tests and plumbing checks. Modes: ``uniform`` (every
    distribution flat, entropy exactly ln V), ``onehot`` (all mass on one
    token, entropy exactly 0), ``hashed`` (logits drawn from a generator
    seeded by position and a context fingerprint, so values vary but stay
    reproducible). Default vocabulary size is 4.
  * Anything else is treated as a HuggingFace model path and requires the
    optional ``torch``/``transformers`` dependencies.
"""

from __future__ import annotations

import re
import zlib
from typing import Protocol

import numpy as np

from .errors import ModelLoadError

__all__ = ["Model", "StubModel", "load_model", "softmax_entropy"]

# Mirrors the analyzer's coverage rule: bytes between cached spans may only
# be drawn from this set, so stub tokens must never contain them.
_WS = " \t\n\r\x0b\x0c"
_TOKEN_RE = re.compile("[^" + _WS + "]+")

_STUB_MODES = ("uniform", "onehot", "hashed")


class Model(Protocol):
    """What extraction needs from a backend."""

    def token_spans(self, text: str) -> list[tuple[int, int]]:
        """Byte spans of the model's tokens over text, sorted, non-overlapping."""
        ...

    def entropies(self, texts: list[str]) -> list[np.ndarray]:
        """One entropy array per text, aligned with token_spans."""
        ...


def softmax_entropy(logits: np.ndarray) -> np.ndarray:
    """Shannon entropy in nats of softmax(logits) along the last axis.

    Stable under large magnitudes and -inf entries (zero probability
    contributes zero). Output is clamped at 0 so round-off never produces
    a small negative.
    """
    logits = np.asarray(logits, dtype=np.float64)
    shifted = logits - np.max(logits, axis=-1, keepdims=True)
    exp = np.exp(shifted)
    p = exp / np.sum(exp, axis=-1, keepdims=True)
    plogp = np.where(p > 0, p * np.log(np.where(p > 0, p, 1.0)), 0.0)
    return np.maximum(-np.sum(plogp, axis=-1), 0.0)


def _byte_spans(text: str) -> list[tuple[int, int]]:
    # Regex offsets are in characters; the cache speaks bytes.
    byte_at = np.zeros(len(text) + 1, dtype=np.int64)
    for i, ch in enumerate(text):
        byte_at[i + 1] = byte_at[i] + len(ch.encode("utf-8"))
    return [
        (int(byte_at[m.start()]), int(byte_at[m.end()]))
        for m in _TOKEN_RE.finditer(text)
    ]


class StubModel:
    """Deterministic backend over whitespace-delimited tokens."""

    def __init__(self, mode: str, vocab_size: int = 4):
        if mode not in _STUB_MODES:
            raise ModelLoadError(f"unknown stub mode {mode!r}; expected one of {_STUB_MODES}")
        if vocab_size < 2:
            raise ModelLoadError(f"stub vocabulary must have at least 2 entries, got {vocab_size}")
        self.mode = mode
        self.vocab_size = vocab_size

    def token_spans(self, text: str) -> list[tuple[int, int]]:
        return _byte_spans(text)

    def entropies(self, texts: list[str]) -> list[np.ndarray]:
        return [self._one(text) for text in texts]

    def _one(self, text: str) -> np.ndarray:
        words = _TOKEN_RE.findall(text)
        if not words:
            return np.zeros(0, dtype=np.float64)
        logits = np.zeros((len(words), self.vocab_size), dtype=np.float64)
        if self.mode == "onehot":
            logits[:] = -np.inf
            logits[:, 0] = 0.0
        elif self.mode == "hashed":
            for pos, word in enumerate(words):
                context = " ".join(words[max(0, pos - 3) : pos + 1])
                seed = zlib.crc32(f"{pos}|{context}".encode("utf-8"))
                rng = np.random.default_rng(seed)
                logits[pos] = rng.standard_normal(self.vocab_size)
        return softmax_entropy(logits)


class _HuggingFaceModel:
    """Causal LM wrapper; import guarded so the stub path has no heavy deps."""

    def __init__(self, identifier: str, device: str | None):
        try:
            import torch
            from transformers import AutoModelForCausalLM, AutoTokenizer
        except ImportError as exc:
            raise ModelLoadError(
                f"{identifier!r} needs the optional torch/transformers install"
            ) from exc
        try:
            self._tokenizer = AutoTokenizer.from_pretrained(identifier)
            self._model = AutoModelForCausalLM.from_pretrained(identifier)
        except Exception as exc:
            raise ModelLoadError(f"cannot load {identifier!r}: {exc}") from exc
        self._torch = torch
        self._device = device or "cpu"
        self._model.to(self._device)
        self._model.eval()

    def _encode(self, text: str):
        enc = self._tokenizer(text, return_offsets_mapping=True, add_special_tokens=False)
        byte_at = [0]
        for ch in text:
            byte_at.append(byte_at[-1] + len(ch.encode("utf-8")))
        ids, spans = [], []
        for tok_id, (cs, ce) in zip(enc["input_ids"], enc["offset_mapping"]):
            if ce <= cs:
                continue  # specials and zero-width artifacts carry no text
            ids.append(tok_id)
            spans.append((byte_at[cs], byte_at[ce]))
        return ids, spans

    def token_spans(self, text: str) -> list[tuple[int, int]]:
        return self._encode(text)[1]

    def entropies(self, texts: list[str]) -> list[np.ndarray]:
        bos = self._tokenizer.bos_token_id
        if bos is None:
            bos = self._tokenizer.eos_token_id
        out = []
        with self._torch.no_grad():
            for text in texts:
                ids, spans = self._encode(text)
                if not ids:
                    out.append(np.zeros(0, dtype=np.float64))
                    continue
                input_ids = self._torch.tensor([[bos] + ids], device=self._device)
                logits = self._model(input_ids).logits[0]
                # Row i is the distribution that predicted token i.
                rows = logits[:-1].to("cpu").to(self._torch.float64).numpy()
                out.append(softmax_entropy(rows))
        return out


def load_model(identifier: str, device: str | None = None) -> Model:
    """Resolve a model identifier to a backend, or raise ModelLoadError."""
    if identifier.startswith("stub:"):
        parts = identifier.split(":")
        if len(parts) == 2:
            return StubModel(parts[1])
        if len(parts) == 3:
            try:
                vocab = int(parts[2])
            except ValueError:
                raise ModelLoadError(f"bad stub vocabulary size in {identifier!r}")
            return StubModel(parts[1], vocab)
        raise ModelLoadError(f"bad stub identifier {identifier!r}; use stub:MODE[:VOCAB]")
    if identifier == "stub":
        raise ModelLoadError("stub identifier needs a mode, e.g. stub:uniform")
    return _HuggingFaceModel(identifier, device)
