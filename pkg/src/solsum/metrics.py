"""Reference text-similarity metrics for summary evaluation.

BLEU-4 (modified n-gram precision with add-one smoothing on zero counts for
n >= 2 and a brevity penalty), METEOR restricted to its exact-match stage,
and ROUGE-L (LCS-based F-score). All scores are on a 0..100 scale. A BLEURT
column is reserved in the report schema so externally computed scores can be
merged, but no learned metric is computed here.
"""

from __future__ import annotations

import json
import math
import re
from collections import Counter
from dataclasses import dataclass
from typing import Optional, Sequence

METEOR_ALPHA = 0.9
METEOR_BETA = 3.0
METEOR_GAMMA = 0.5
ROUGE_BETA = 1.2


class EmptyInput(Exception):
    """Raised when corpus evaluation receives no pairs."""


_TOKEN_RE = re.compile(r"\w+|[^\w\s]")


def tokenize_for_metrics(text: str) -> list[str]:
    """Lowercase, split on whitespace, and split punctuation into separate
    tokens. Word characters (including underscores) stay together."""
    return [t.lower() for t in _TOKEN_RE.findall(text)]


def _ngram_counts(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def bleu4(candidate: Sequence[str], reference: Sequence[str]) -> float:
    """Geometric mean of modified 1..4-gram precisions, add-one smoothed on
    zero counts for n >= 2, times the brevity penalty, times 100."""
    if not candidate or not reference:
        return 0.0
    log_sum = 0.0
    for n in range(1, 5):
        cand = _ngram_counts(candidate, n)
        ref = _ngram_counts(reference, n)
        total = max(len(candidate) - n + 1, 0)
        matched = sum(min(c, ref[g]) for g, c in cand.items())
        if n == 1:
            if matched == 0:
                return 0.0
            p = matched / total
        elif matched == 0:
            p = (matched + 1) / (total + 1)
        else:
            p = matched / total
        log_sum += math.log(p)
    geo = math.exp(log_sum / 4)
    c_len, r_len = len(candidate), len(reference)
    bp = 1.0 if c_len >= r_len else math.exp(1 - r_len / c_len)
    return 100.0 * geo * bp


def _lcs_length(a: Sequence[str], b: Sequence[str]) -> int:
    # Two-row dynamic program over the shorter sequence.
    if len(b) > len(a):
        a, b = b, a
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0]
        for j, y in enumerate(b, start=1):
            if x == y:
                cur.append(prev[j - 1] + 1)
            else:
                cur.append(max(prev[j], cur[j - 1]))
        prev = cur
    return prev[-1]


def rouge_l(candidate: Sequence[str], reference: Sequence[str]) -> float:
    """LCS-based F-score: F = (1 + b^2) P R / (R + b^2 P) with b = 1.2."""
    if not candidate or not reference:
        return 0.0
    lcs = _lcs_length(candidate, reference)
    if lcs == 0:
        return 0.0
    p = lcs / len(candidate)
    r = lcs / len(reference)
    b2 = ROUGE_BETA * ROUGE_BETA
    return 100.0 * (1 + b2) * p * r / (r + b2 * p)


def _align(candidate: Sequence[str], reference: Sequence[str]) -> list[tuple[int, int]]:
    """Exact-match alignment: repeatedly take the longest common contiguous
    block over still-unmatched positions (leftmost in the candidate, then in
    the reference, on ties). Matches the full common-token multiset."""
    cand_free = [True] * len(candidate)
    ref_free = [True] * len(reference)
    pairs: list[tuple[int, int]] = []
    max_len = min(len(candidate), len(reference))
    length = max_len
    while length >= 1:
        placed = False
        for i in range(len(candidate) - length + 1):
            if not all(cand_free[i:i + length]):
                continue
            for j in range(len(reference) - length + 1):
                if not all(ref_free[j:j + length]):
                    continue
                if list(candidate[i:i + length]) == list(reference[j:j + length]):
                    for t in range(length):
                        cand_free[i + t] = False
                        ref_free[j + t] = False
                        pairs.append((i + t, j + t))
                    placed = True
                    break
            if placed:
                break
        if not placed:
            length -= 1
    pairs.sort()
    return pairs


def meteor(candidate: Sequence[str], reference: Sequence[str]) -> float:
    """Exact-match METEOR: harmonic mean of precision and recall weighted
    toward recall (alpha = 0.9), discounted by a fragmentation penalty
    gamma * (chunks / matches) ** beta with gamma = 0.5, beta = 3."""
    if not candidate or not reference:
        return 0.0
    pairs = _align(candidate, reference)
    m = len(pairs)
    if m == 0:
        return 0.0
    chunks = 1
    for (ci, ri), (cj, rj) in zip(pairs, pairs[1:]):
        if cj != ci + 1 or rj != ri + 1:
            chunks += 1
    p = m / len(candidate)
    r = m / len(reference)
    fmean = p * r / (METEOR_ALPHA * p + (1 - METEOR_ALPHA) * r)
    penalty = METEOR_GAMMA * (chunks / m) ** METEOR_BETA
    return 100.0 * fmean * (1 - penalty)


@dataclass(frozen=True)
class SampleScore:
    uuid: str
    bleu4: float
    meteor: float
    rouge_l: float
    bleurt: Optional[float] = None


@dataclass(frozen=True)
class MetricReport:
    per_sample: tuple[SampleScore, ...]
    corpus: tuple[float, float, float]  # mean bleu4, meteor, rouge_l
    n: int


def evaluate_corpus(pairs: Sequence[tuple[str, str, str]]) -> MetricReport:
    """Score (uuid, candidate_text, reference_text) triples and average the
    sentence-level scores. Rows are ordered by uuid."""
    if not pairs:
        raise EmptyInput("no pairs to evaluate")
    rows = []
    for uuid, candidate, reference in sorted(pairs, key=lambda p: p[0]):
        cand = tokenize_for_metrics(candidate)
        ref = tokenize_for_metrics(reference)
        rows.append(SampleScore(uuid, bleu4(cand, ref), meteor(cand, ref),
                                rouge_l(cand, ref)))
    n = len(rows)
    corpus = (
        sum(r.bleu4 for r in rows) / n,
        sum(r.meteor for r in rows) / n,
        sum(r.rouge_l for r in rows) / n,
    )
    return MetricReport(tuple(rows), corpus, n)


def report_to_dict(report: MetricReport) -> dict:
    return {
        "n": report.n,
        "corpus": {
            "bleu4": report.corpus[0],
            "meteor": report.corpus[1],
            "rouge_l": report.corpus[2],
            "bleurt": None,
        },
        "per_sample": [
            {"uuid": r.uuid, "bleu4": r.bleu4, "meteor": r.meteor,
             "rouge_l": r.rouge_l, "bleurt": r.bleurt}
            for r in report.per_sample
        ],
    }


def report_to_json(report: MetricReport) -> str:
    return json.dumps(report_to_dict(report), indent=2, sort_keys=True) + "\n"


def format_report_table(report: MetricReport) -> str:
    """Aligned plain-text table, one row per sample plus a corpus mean row."""
    header = f"{'uuid':<36}  {'BLEU-4':>8}  {'METEOR':>8}  {'ROUGE-L':>8}"
    sep = "-" * len(header)
    lines = [header, sep]
    for r in report.per_sample:
        lines.append(f"{r.uuid:<36}  {r.bleu4:>8.2f}  {r.meteor:>8.2f}  {r.rouge_l:>8.2f}")
    lines.append(sep)
    b, m, rl = report.corpus
    lines.append(f"{f'corpus mean (n={report.n})':<36}  {b:>8.2f}  {m:>8.2f}  {rl:>8.2f}")
    return "\n".join(lines) + "\n"
