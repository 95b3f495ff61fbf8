"""Character-level encoder-decoder transformer for text-to-text state prediction."""

from __future__ import annotations

import json
from pathlib import Path

import torch
from torch import nn

PAD, BOS, EOS, UNK = 0, 1, 2, 3
SPECIALS = ("<pad>", "<bos>", "<eos>", "<unk>")


class CharVocab:
    def __init__(self, chars: list[str]):
        self.chars = list(chars)
        self.itos = list(SPECIALS) + self.chars
        self.stoi = {c: i for i, c in enumerate(self.itos)}

    def __len__(self) -> int:
        return len(self.itos)

    @classmethod
    def build(cls, texts) -> "CharVocab":
        seen = set()
        for text in texts:
            seen.update(text)
        return cls(sorted(seen))

    def encode(self, text: str) -> list[int]:
        unk = UNK
        stoi = self.stoi
        return [stoi.get(c, unk) for c in text]

    def decode(self, ids) -> str:
        out = []
        for i in ids:
            if i == EOS:
                break
            if i > UNK:
                out.append(self.itos[i])
        return "".join(out)

    def to_json(self) -> str:
        return json.dumps({"chars": self.chars})

    @classmethod
    def from_json(cls, text: str) -> "CharVocab":
        return cls(json.loads(text)["chars"])


class Seq2SeqTransformer(nn.Module):
    def __init__(
        self,
        vocab_size: int,
        d_model: int = 128,
        num_heads: int = 4,
        num_layers: int = 2,
        feedforward: int = 256,
        dropout: float = 0.1,
        max_source_len: int = 384,
        max_target_len: int = 96,
    ):
        super().__init__()
        self.embed = nn.Embedding(vocab_size, d_model, padding_idx=PAD)
        self.src_pos = nn.Embedding(max_source_len, d_model)
        self.tgt_pos = nn.Embedding(max_target_len + 1, d_model)  # +1 for the BOS shift
        self.transformer = nn.Transformer(
            d_model=d_model,
            nhead=num_heads,
            num_encoder_layers=num_layers,
            num_decoder_layers=num_layers,
            dim_feedforward=feedforward,
            dropout=dropout,
            batch_first=True,
            norm_first=True,
        )
        self.out = nn.Linear(d_model, vocab_size)
        self.max_source_len = max_source_len
        self.max_target_len = max_target_len

    def _embed_src(self, src: torch.Tensor) -> torch.Tensor:
        positions = torch.arange(src.size(1), device=src.device)
        return self.embed(src) + self.src_pos(positions)

    def _embed_tgt(self, tgt: torch.Tensor) -> torch.Tensor:
        positions = torch.arange(tgt.size(1), device=tgt.device)
        return self.embed(tgt) + self.tgt_pos(positions)

    @staticmethod
    def _causal_mask(size: int, device) -> torch.Tensor:
        # bool mask to match the bool padding masks
        return torch.triu(torch.ones(size, size, dtype=torch.bool, device=device), diagonal=1)

    def forward(self, src: torch.Tensor, tgt_in: torch.Tensor) -> torch.Tensor:
        causal = self._causal_mask(tgt_in.size(1), tgt_in.device)
        hidden = self.transformer(
            self._embed_src(src),
            self._embed_tgt(tgt_in),
            tgt_mask=causal,
            src_key_padding_mask=src.eq(PAD),
            tgt_key_padding_mask=tgt_in.eq(PAD),
            memory_key_padding_mask=src.eq(PAD),
        )
        return self.out(hidden)

    @torch.no_grad()
    def greedy_decode(self, src: torch.Tensor, max_len: int | None = None) -> torch.Tensor:
        self.eval()
        max_len = max_len or self.max_target_len
        memory = self.transformer.encoder(self._embed_src(src), src_key_padding_mask=src.eq(PAD))
        batch = src.size(0)
        ys = torch.full((batch, 1), BOS, dtype=torch.long, device=src.device)
        finished = torch.zeros(batch, dtype=torch.bool, device=src.device)
        for _ in range(max_len):
            causal = self._causal_mask(ys.size(1), src.device)
            hidden = self.transformer.decoder(
                self._embed_tgt(ys),
                memory,
                tgt_mask=causal,
                memory_key_padding_mask=src.eq(PAD),
            )
            next_ids = self.out(hidden[:, -1]).argmax(-1)
            next_ids = torch.where(finished, torch.full_like(next_ids, PAD), next_ids)
            ys = torch.cat([ys, next_ids.unsqueeze(1)], dim=1)
            finished |= next_ids.eq(EOS)
            if bool(finished.all()):
                break
        return ys[:, 1:]


def save_checkpoint(directory: str | Path, model: Seq2SeqTransformer, vocab: CharVocab, config: dict) -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    payload = {"state_dict": model.state_dict(), "config": config, "vocab": vocab.to_json()}
    tmp = directory / "model.pt.tmp"
    torch.save(payload, tmp)
    final = directory / "model.pt"
    tmp.replace(final)
    return final


def load_checkpoint(directory: str | Path) -> tuple[Seq2SeqTransformer, CharVocab, dict]:
    path = Path(directory) / "model.pt"
    if not path.exists():
        raise FileNotFoundError(f"no checkpoint at {path}")
    payload = torch.load(path, map_location="cpu", weights_only=False)
    vocab = CharVocab.from_json(payload["vocab"])
    cfg = payload["config"]
    model = Seq2SeqTransformer(
        vocab_size=len(vocab),
        d_model=cfg["d_model"],
        num_heads=cfg["num_heads"],
        num_layers=cfg["num_layers"],
        feedforward=cfg["feedforward"],
        dropout=cfg["dropout"],
        max_source_len=cfg["max_source_len"],
        max_target_len=cfg["max_target_len"],
    )
    model.load_state_dict(payload["state_dict"])
    model.eval()
    return model, vocab, cfg
