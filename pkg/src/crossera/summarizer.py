"""Attention encoder-decoder summariser with a pointer/copy mechanism.

The encoder embedding table is a frozen, swappable block: it is trained
nowhere, initialised from an aligned embedding space, and can be replaced
wholesale (table and vocabulary) to run the same decoder over inputs from
the other side of the alignment. Everything else trains normally.

At each decode step the output distribution over the extended vocabulary
(decoder vocabulary plus the source's novel tokens) is

    P(w) = p_gen * P_vocab(w) + (1 - p_gen) * sum of attention on source
                                               positions holding w,

so tokens outside the decoder vocabulary remain reachable through copying.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np
import torch
from torch import nn

from .embeddings.model import WordVectors
from .embeddings.vocab import Vocab
from .errors import ConfigError, ValidationError

BOS = "<s>"
EOS = "</s>"
UNK = "<unk>"

_INIT_RANGE = 0.1


@dataclass(frozen=True)
class SummarizerConfig:
    emb_dim: int = 100
    hidden_dim: int = 128
    max_story_len: int = 400
    max_summary_len: int = 60
    beam_size: int = 4
    coverage_enabled: bool = False
    lr: float = 0.1
    batch_size: int = 8
    max_steps: int = 1000
    seed: int = 1
    grad_clip: float = 2.0
    optimizer: str = "sgd"  # "adagrad" available behind this flag

    def __post_init__(self):
        if self.beam_size < 1:
            raise ConfigError("beam_size must be >= 1")
        if self.emb_dim < 1 or self.hidden_dim < 1:
            raise ConfigError("emb_dim and hidden_dim must be positive")
        if self.max_story_len < 1 or self.max_summary_len < 1:
            raise ConfigError("length limits must be >= 1")
        if self.optimizer not in ("sgd", "adagrad"):
            raise ConfigError(f"unknown optimizer {self.optimizer!r}")


@dataclass(frozen=True)
class DecodeResult:
    tokens: tuple[str, ...]
    score: float  # length-normalised log-probability
    copied_positions: tuple[tuple[int, int], ...]  # (output index, source position)


class TrainingDiverged(ValidationError):
    """Loss became non-finite; the model was restored to the last checkpoint."""


class SummarizerModel(nn.Module):
    """Single-layer BiLSTM encoder, additive attention, LSTM decoder, p_gen gate."""

    def __init__(self, cfg: SummarizerConfig, encoder_table: WordVectors, decoder_vocab: Vocab):
        super().__init__()
        if encoder_table.dim != cfg.emb_dim:
            raise ConfigError(
                f"encoder table dim {encoder_table.dim} != configured emb_dim {cfg.emb_dim}"
            )
        self.cfg = cfg
        emb, hid = cfg.emb_dim, cfg.hidden_dim

        # decoder vocabulary: specials first, then the supplied tokens
        tokens = [BOS, EOS, UNK]
        seen = set(tokens)
        for t in decoder_vocab.tokens:
            if t not in seen:
                tokens.append(t)
                seen.add(t)
        self.decoder_tokens: tuple[str, ...] = tuple(tokens)
        self.decoder_index = {t: i for i, t in enumerate(self.decoder_tokens)}
        self.bos_id = self.decoder_index[BOS]
        self.eos_id = self.decoder_index[EOS]
        self.unk_id = self.decoder_index[UNK]
        V_dec = len(self.decoder_tokens)

        self.decoder_embedding = nn.Embedding(V_dec, emb)
        self.encoder = nn.LSTM(emb, hid, num_layers=1, bidirectional=True, batch_first=True)
        self.reduce_h = nn.Linear(2 * hid, hid)
        self.reduce_c = nn.Linear(2 * hid, hid)
        self.attn_enc = nn.Linear(2 * hid, 2 * hid, bias=False)
        self.attn_dec = nn.Linear(hid, 2 * hid)
        self.attn_v = nn.Linear(2 * hid, 1, bias=False)
        self.attn_cov = nn.Linear(1, 2 * hid, bias=False)
        self.decoder_cell = nn.LSTMCell(emb + 2 * hid, hid)
        self.gen_hidden = nn.Linear(hid + 2 * hid, hid)
        self.gen_out = nn.Linear(hid, V_dec)
        self.pgen = nn.Linear(2 * hid + hid + hid + emb, 1)

        self.to(torch.float64)
        gen = torch.Generator().manual_seed(cfg.seed)
        for _, p in sorted(self.named_parameters()):
            with torch.no_grad():
                p.uniform_(-_INIT_RANGE, _INIT_RANGE, generator=gen)

        # the swappable frozen block: a buffer, so it never reaches the optimizer
        table = torch.from_numpy(np.ascontiguousarray(encoder_table.vectors, dtype=np.float64))
        self.register_buffer("encoder_embedding", table)
        self.encoder_tokens: tuple[str, ...] = tuple(encoder_table.tokens)
        self.encoder_index = {t: i for i, t in enumerate(self.encoder_tokens)}
        self.encoder_frozen = True

    # ---------------------------------------------------------------- helpers

    def _embed_source(self, story: Sequence[str]) -> torch.Tensor:
        """(L, emb) source embeddings; tokens outside the table get zeros."""
        rows = torch.zeros(len(story), self.cfg.emb_dim, dtype=torch.float64)
        for i, tok in enumerate(story):
            idx = self.encoder_index.get(tok)
            if idx is not None:
                rows[i] = self.encoder_embedding[idx]
        return rows

    def _extend_vocab(self, story: Sequence[str]) -> tuple[list[int], list[str]]:
        """Extended ids per source position plus the novel tokens in order."""
        ext_ids = []
        oov_tokens: list[str] = []
        oov_index: dict[str, int] = {}
        V = len(self.decoder_tokens)
        for tok in story:
            idx = self.decoder_index.get(tok)
            if idx is None:
                if tok not in oov_index:
                    oov_index[tok] = V + len(oov_tokens)
                    oov_tokens.append(tok)
                idx = oov_index[tok]
            ext_ids.append(idx)
        return ext_ids, oov_tokens

    def _encode(self, story: Sequence[str]):
        src = self._embed_source(story).unsqueeze(0)
        enc_out, (h, c) = self.encoder(src)
        enc_out = enc_out.squeeze(0)  # (L, 2h)
        h0 = torch.tanh(self.reduce_h(torch.cat([h[0], h[1]], dim=1))).squeeze(0)
        c0 = torch.tanh(self.reduce_c(torch.cat([c[0], c[1]], dim=1))).squeeze(0)
        enc_feat = self.attn_enc(enc_out)  # cached attention projection
        return enc_out, enc_feat, (h0, c0)

    def _step(
        self,
        input_id: int,
        state: tuple[torch.Tensor, torch.Tensor],
        prev_context: torch.Tensor,
        enc_out: torch.Tensor,
        enc_feat: torch.Tensor,
        src_ext_ids: list[int],
        n_ext: int,
        coverage: Optional[torch.Tensor],
        p_gen_override: Optional[float] = None,
    ):
        """One decode step; returns (dist over extended vocab, new state,
        context, attention, p_gen)."""
        x_emb = self.decoder_embedding(torch.tensor(input_id))
        dec_in = torch.cat([x_emb, prev_context])
        h, c = self.decoder_cell(dec_in.unsqueeze(0), (state[0].unsqueeze(0), state[1].unsqueeze(0)))
        h, c = h.squeeze(0), c.squeeze(0)

        scores = enc_feat + self.attn_dec(h)
        if coverage is not None:
            scores = scores + self.attn_cov(coverage.unsqueeze(1))
        e = self.attn_v(torch.tanh(scores)).squeeze(1)  # (L,)
        attn = torch.softmax(e, dim=0)
        context = attn @ enc_out  # (2h,)

        p_vocab = torch.softmax(self.gen_out(self.gen_hidden(torch.cat([h, context]))), dim=0)
        p_gen = torch.sigmoid(self.pgen(torch.cat([context, h, c, x_emb])))[0]
        if p_gen_override is not None:
            p_gen = torch.tensor(float(p_gen_override), dtype=torch.float64)

        dist = torch.zeros(n_ext, dtype=torch.float64)
        dist[: len(self.decoder_tokens)] = p_gen * p_vocab
        dist = dist.index_add(
            0, torch.tensor(src_ext_ids), (1.0 - p_gen) * attn
        )
        return dist, (h, c), context, attn, p_gen

    def _map_target(self, token: str, src_ext: dict[str, int]) -> int:
        """Reference tokens outside the decoder vocab supervise the copy path
        when present in the source, and fall back to UNK otherwise."""
        idx = self.decoder_index.get(token)
        if idx is not None:
            return idx
        return src_ext.get(token, self.unk_id)

    # ------------------------------------------------------------------ loss

    def forward_loss(
        self,
        story: Sequence[str],
        summary: Sequence[str],
        p_gen_override: Optional[float] = None,
    ) -> torch.Tensor:
        """Teacher-forced mean negative log-likelihood of the reference.

        Inputs beyond the configured maxima are truncated. Adds the coverage
        penalty sum(min(attention, coverage)) per step when enabled.
        """
        if not story or not summary:
            raise ValidationError("story and summary must be non-empty")
        story = list(story)[: self.cfg.max_story_len]
        summary = list(summary)[: self.cfg.max_summary_len]

        enc_out, enc_feat, state = self._encode(story)
        src_ext_ids, oov_tokens = self._extend_vocab(story)
        n_ext = len(self.decoder_tokens) + len(oov_tokens)
        src_ext = {tok: len(self.decoder_tokens) + i for i, tok in enumerate(oov_tokens)}

        targets = [self._map_target(t, src_ext) for t in summary] + [self.eos_id]
        # teacher-forced inputs come from the decoder vocabulary only
        inputs = [self.bos_id] + [self.decoder_index.get(t, self.unk_id) for t in summary]

        context = torch.zeros(2 * self.cfg.hidden_dim, dtype=torch.float64)
        coverage = (
            torch.zeros(len(story), dtype=torch.float64) if self.cfg.coverage_enabled else None
        )
        nll = []
        cov_penalty = []
        for input_id, target in zip(inputs, targets):
            dist, state, context, attn, _ = self._step(
                input_id, state, context, enc_out, enc_feat,
                src_ext_ids, n_ext, coverage, p_gen_override,
            )
            nll.append(-torch.log(dist[target]))
            if coverage is not None:
                cov_penalty.append(torch.minimum(attn, coverage).sum())
                coverage = coverage + attn
        loss = torch.stack(nll).mean()
        if cov_penalty:
            loss = loss + torch.stack(cov_penalty).mean()
        return loss

    def batch_loss(self, batch: Sequence[tuple[Sequence[str], Sequence[str]]]) -> torch.Tensor:
        """Mean of forward_loss over a batch, computed padded and masked.

        Matches the single-example path up to floating-point reassociation;
        train() uses this for throughput.
        """
        if not batch:
            raise ValidationError("empty batch")
        stories = [list(s)[: self.cfg.max_story_len] for s, _ in batch]
        summaries = [list(t)[: self.cfg.max_summary_len] for _, t in batch]
        if any(not s for s in stories) or any(not t for t in summaries):
            raise ValidationError("story and summary must be non-empty")
        B = len(batch)
        emb, hid = self.cfg.emb_dim, self.cfg.hidden_dim
        src_lens = [len(s) for s in stories]
        L = max(src_lens)

        src = torch.zeros(B, L, emb, dtype=torch.float64)
        src_mask = torch.zeros(B, L, dtype=torch.bool)
        ext_ids = torch.zeros(B, L, dtype=torch.int64)
        n_oov_max = 0
        src_ext_maps: list[dict[str, int]] = []
        for b, story in enumerate(stories):
            ids, oov_tokens = self._extend_vocab(story)
            n_oov_max = max(n_oov_max, len(oov_tokens))
            src_ext_maps.append(
                {tok: len(self.decoder_tokens) + i for i, tok in enumerate(oov_tokens)}
            )
            ext_ids[b, : len(ids)] = torch.tensor(ids)
            src_mask[b, : len(ids)] = True
            for i, tok in enumerate(story):
                idx = self.encoder_index.get(tok)
                if idx is not None:
                    src[b, i] = self.encoder_embedding[idx]
        n_ext = len(self.decoder_tokens) + n_oov_max

        packed = nn.utils.rnn.pack_padded_sequence(
            src, torch.tensor(src_lens), batch_first=True, enforce_sorted=False
        )
        enc_packed, (h, c) = self.encoder(packed)
        enc_out, _ = nn.utils.rnn.pad_packed_sequence(enc_packed, batch_first=True)
        state_h = torch.tanh(self.reduce_h(torch.cat([h[0], h[1]], dim=1)))
        state_c = torch.tanh(self.reduce_c(torch.cat([c[0], c[1]], dim=1)))
        enc_feat = self.attn_enc(enc_out)

        tgt_lens = [len(t) + 1 for t in summaries]  # references plus EOS
        T = max(tgt_lens)
        inputs = torch.full((B, T), self.unk_id, dtype=torch.int64)
        targets = torch.zeros(B, T, dtype=torch.int64)
        step_mask = torch.zeros(B, T, dtype=torch.float64)
        for b, summary in enumerate(summaries):
            inputs[b, 0] = self.bos_id
            for t, tok in enumerate(summary):
                inputs[b, t + 1 : t + 2] = self.decoder_index.get(tok, self.unk_id)
                targets[b, t] = self._map_target(tok, src_ext_maps[b])
            targets[b, len(summary)] = self.eos_id
            step_mask[b, : tgt_lens[b]] = 1.0

        context = torch.zeros(B, 2 * hid, dtype=torch.float64)
        coverage = (
            torch.zeros(B, L, dtype=torch.float64) if self.cfg.coverage_enabled else None
        )
        neg_inf = torch.tensor(float("-inf"), dtype=torch.float64)
        nll_sum = torch.zeros(B, dtype=torch.float64)
        cov_sum = torch.zeros(B, dtype=torch.float64)
        for t in range(T):
            x_emb = self.decoder_embedding(inputs[:, t])
            state_h, state_c = self.decoder_cell(
                torch.cat([x_emb, context], dim=1), (state_h, state_c)
            )
            scores = enc_feat + self.attn_dec(state_h).unsqueeze(1)
            if coverage is not None:
                scores = scores + self.attn_cov(coverage.unsqueeze(2))
            e = self.attn_v(torch.tanh(scores)).squeeze(2)
            e = torch.where(src_mask, e, neg_inf)
            attn = torch.softmax(e, dim=1)
            context = torch.bmm(attn.unsqueeze(1), enc_out).squeeze(1)

            p_vocab = torch.softmax(
                self.gen_out(self.gen_hidden(torch.cat([state_h, context], dim=1))), dim=1
            )
            p_gen = torch.sigmoid(
                self.pgen(torch.cat([context, state_h, state_c, x_emb], dim=1))
            )
            dist = torch.zeros(B, n_ext, dtype=torch.float64)
            dist[:, : len(self.decoder_tokens)] = p_gen * p_vocab
            dist = dist.scatter_add(1, ext_ids, (1.0 - p_gen) * attn)

            p_target = dist.gather(1, targets[:, t : t + 1]).squeeze(1)
            nll_sum = nll_sum - torch.log(p_target) * step_mask[:, t]
            if coverage is not None:
                cov_sum = cov_sum + torch.minimum(attn, coverage).sum(dim=1) * step_mask[:, t]
                coverage = coverage + attn
        lens = torch.tensor(tgt_lens, dtype=torch.float64)
        per_example = nll_sum / lens
        if coverage is not None:
            per_example = per_example + cov_sum / lens
        return per_example.mean()

    # ---------------------------------------------------------------- decode

    @torch.no_grad()
    def decode(
        self,
        story: Sequence[str],
        beam_size: Optional[int] = None,
        p_gen_override: Optional[float] = None,
    ) -> DecodeResult:
        """Beam search over the extended vocabulary with length-normalised
        scores. beam_size=1 is exactly greedy argmax decoding. Score ties
        break toward lower token ids, then shorter hypotheses."""
        if not story:
            raise ValidationError("story must be non-empty")
        story = list(story)[: self.cfg.max_story_len]
        width = beam_size if beam_size is not None else self.cfg.beam_size
        if width < 1:
            raise ValidationError("beam size must be >= 1")

        enc_out, enc_feat, state = self._encode(story)
        src_ext_ids, oov_tokens = self._extend_vocab(story)
        n_ext = len(self.decoder_tokens) + len(oov_tokens)

        init_cov = (
            torch.zeros(len(story), dtype=torch.float64) if self.cfg.coverage_enabled else None
        )
        beams = [
            _Hyp(
                tokens=(), logp=0.0, state=state,
                context=torch.zeros(2 * self.cfg.hidden_dim, dtype=torch.float64),
                coverage=init_cov, copied=(), input_id=self.bos_id,
            )
        ]
        finished: list[_Hyp] = []
        max_len = self.cfg.max_summary_len
        for _ in range(max_len):
            if not beams:
                break
            candidates: list[tuple[float, int, int]] = []  # (new logp, beam idx, token)
            stepped = []
            for b_idx, hyp in enumerate(beams):
                dist, new_state, context, attn, p_gen = self._step(
                    hyp.input_id, hyp.state, hyp.context, enc_out, enc_feat,
                    src_ext_ids, n_ext, hyp.coverage, p_gen_override,
                )
                stepped.append((new_state, context, attn, dist, p_gen))
                logs = torch.log(dist)
                k = min(width, n_ext)
                top = torch.topk(logs, k)
                for logp, tok in zip(top.values.tolist(), top.indices.tolist()):
                    candidates.append((hyp.logp + logp, b_idx, tok))
            # higher score first; ties resolved toward the lower token id
            candidates.sort(key=lambda t: (-t[0], t[2]))
            next_beams = []
            for logp, b_idx, tok in candidates[:width]:
                hyp = beams[b_idx]
                new_state, context, attn, dist, p_gen = stepped[b_idx]
                coverage = None if hyp.coverage is None else hyp.coverage + attn
                copied = hyp.copied
                if tok != self.eos_id:
                    copied = copied + self._copy_record(
                        tok, len(hyp.tokens), dist, attn, p_gen, src_ext_ids
                    )
                new = _Hyp(
                    tokens=hyp.tokens + (tok,), logp=logp, state=new_state,
                    context=context, coverage=coverage, copied=copied,
                    input_id=tok if tok < len(self.decoder_tokens) else self.unk_id,
                )
                if tok == self.eos_id or len(new.tokens) >= max_len:
                    finished.append(new)
                else:
                    next_beams.append(new)
            beams = next_beams[:width]
        finished.extend(beams)

        best = min(finished, key=lambda h: (-h.normalized(), h.tokens))
        out_tokens = tuple(
            self._ext_token(t, oov_tokens) for t in best.tokens if t != self.eos_id
        )
        return DecodeResult(
            tokens=out_tokens, score=best.normalized(), copied_positions=best.copied
        )

    def _copy_record(self, tok, out_idx, dist, attn, p_gen, src_ext_ids):
        """Record (out_idx, source position) when the copy path dominates."""
        positions = [i for i, e in enumerate(src_ext_ids) if e == tok]
        if not positions:
            return ()
        copy_mass = float((1.0 - p_gen) * sum(attn[i] for i in positions))
        if tok < len(self.decoder_tokens):
            gen_mass = float(dist[tok]) - copy_mass
        else:
            gen_mass = 0.0
        if copy_mass > gen_mass:
            src_pos = max(positions, key=lambda i: float(attn[i]))
            return ((out_idx, src_pos),)
        return ()

    def _ext_token(self, ext_id: int, oov_tokens: list[str]) -> str:
        if ext_id < len(self.decoder_tokens):
            return self.decoder_tokens[ext_id]
        return oov_tokens[ext_id - len(self.decoder_tokens)]

    # -------------------------------------------------------------- contracts

    def parameter_checksums(self) -> dict[str, float]:
        """Stable per-block sums used by the swap-locality tests."""
        return {name: float(p.detach().sum()) for name, p in sorted(self.named_parameters())}


@dataclass
class _Hyp:
    tokens: tuple[int, ...]
    logp: float
    state: tuple[torch.Tensor, torch.Tensor]
    context: torch.Tensor
    coverage: Optional[torch.Tensor]
    copied: tuple[tuple[int, int], ...]
    input_id: int

    def normalized(self) -> float:
        return self.logp / max(len(self.tokens), 1)


def build_model(
    cfg: SummarizerConfig, encoder_table: WordVectors, decoder_vocab: Vocab
) -> SummarizerModel:
    """Construct a summariser with a frozen encoder table.

    The table is copied bitwise; all trainable parameters are drawn uniformly
    from [-0.1, 0.1] under cfg.seed, so equal seeds give equal models.
    """
    return SummarizerModel(cfg, encoder_table, decoder_vocab)


def forward_loss(model: SummarizerModel, story, summary) -> torch.Tensor:
    return model.forward_loss(story, summary)


def swap_encoder_embeddings(model: SummarizerModel, new_table: WordVectors) -> SummarizerModel:
    """Replace the frozen encoder block (table + vocabulary) in place.

    Every other parameter is untouched; the frozen flag stays set.
    """
    if new_table.dim != model.cfg.emb_dim:
        raise ConfigError(
            f"table dim {new_table.dim} != model emb_dim {model.cfg.emb_dim}"
        )
    model.encoder_embedding = torch.from_numpy(
        np.ascontiguousarray(new_table.vectors, dtype=np.float64)
    )
    model.encoder_tokens = tuple(new_table.tokens)
    model.encoder_index = {t: i for i, t in enumerate(model.encoder_tokens)}
    model.encoder_frozen = True
    return model


def decode(model: SummarizerModel, story, beam_size: Optional[int] = None,
           p_gen_override: Optional[float] = None) -> DecodeResult:
    return model.decode(story, beam_size=beam_size, p_gen_override=p_gen_override)


def train(
    model: SummarizerModel,
    pairs: Sequence[tuple[Sequence[str], Sequence[str]]],
    cfg: Optional[SummarizerConfig] = None,
    log_every: int = 0,
) -> tuple[SummarizerModel, list[float]]:
    """Optimise all unfrozen parameters for cfg.max_steps batched steps.

    Returns the model and the per-step loss trace. A non-finite loss aborts
    with TrainingDiverged after restoring the last 50-step snapshot.
    """
    cfg = cfg or model.cfg
    if not pairs:
        raise ValidationError("need at least one training pair")
    if cfg.optimizer == "sgd":
        opt = torch.optim.SGD(model.parameters(), lr=cfg.lr)
    else:
        opt = torch.optim.Adagrad(model.parameters(), lr=cfg.lr)

    order_gen = torch.Generator().manual_seed(cfg.seed + 17)
    order: list[int] = []
    losses: list[float] = []
    snapshot = {k: v.clone() for k, v in model.state_dict().items()}
    for step in range(cfg.max_steps):
        batch = []
        for _ in range(cfg.batch_size):
            if not order:
                order = torch.randperm(len(pairs), generator=order_gen).tolist()
            batch.append(pairs[order.pop()])
        opt.zero_grad()
        loss = model.batch_loss(batch)
        if not torch.isfinite(loss):
            model.load_state_dict(snapshot)
            raise TrainingDiverged(f"non-finite loss at step {step}")
        loss.backward()
        nn.utils.clip_grad_norm_(model.parameters(), cfg.grad_clip)
        opt.step()
        losses.append(float(loss.detach()))
        if step % 50 == 0:
            snapshot = {k: v.clone() for k, v in model.state_dict().items()}
        if log_every and step % log_every == 0:
            print(f"step {step}: loss {float(loss):.4f}")
    return model, losses


def map_copied_tokens(
    result: DecodeResult, mapper: Callable[[str], str]
) -> DecodeResult:
    """Post-hoc rewrite of pointer-copied output tokens (e.g. through a
    spelling-normalisation table). Generated tokens are left alone."""
    copied_at = {out_idx for out_idx, _ in result.copied_positions}
    tokens = tuple(
        mapper(tok) if i in copied_at else tok for i, tok in enumerate(result.tokens)
    )
    return DecodeResult(tokens=tokens, score=result.score,
                        copied_positions=result.copied_positions)


def save_checkpoint(model: SummarizerModel, path: str | Path) -> None:
    """Self-describing checkpoint: config, vocabularies, all parameter blocks."""
    torch.save(
        {
            "format_version": 1,
            "config": asdict(model.cfg),
            "decoder_tokens": list(model.decoder_tokens),
            "encoder_tokens": list(model.encoder_tokens),
            "state_dict": model.state_dict(),
        },
        path,
    )


def load_checkpoint(path: str | Path) -> SummarizerModel:
    blob = torch.load(path, weights_only=False)
    if blob.get("format_version") != 1:
        raise ConfigError(f"unsupported checkpoint version {blob.get('format_version')!r}")
    cfg = SummarizerConfig(**blob["config"])
    table = WordVectors(
        tokens=tuple(blob["encoder_tokens"]),
        vectors=blob["state_dict"]["encoder_embedding"].numpy(),
    )
    # decoder tokens already include the specials; the constructor dedupes
    decoder_vocab = Vocab(
        tokens=tuple(t for t in blob["decoder_tokens"] if t not in (BOS, EOS, UNK)),
        counts=tuple(1 for t in blob["decoder_tokens"] if t not in (BOS, EOS, UNK)),
    )
    model = SummarizerModel(cfg, table, decoder_vocab)
    model.load_state_dict(blob["state_dict"])
    return model
