#!/usr/bin/env python3
"""Word, sentence and TF-IDF reference values for the bundled novels.

Chapters are found by scanning for CHAPTER heading lines; a chapter body is
the text after its heading line up to the next heading, stripped. Words are
whitespace-separated runs. Sentences end at . ! ? (with trailing quotes or
brackets) followed by whitespace or end of text, or at a blank line, and
must contain a letter or digit. TF-IDF uses lowercase word runs that are not
in fixtures/stopwords.txt and contain a letter.

Writes fixtures/corpus_expected.json.
"""
import json
import math
import re
from collections import Counter
from pathlib import Path

HERE = Path(__file__).resolve().parent
ROOT = HERE.parent.parent
FIXTURES = HERE.parent / "fixtures"
HEADING = re.compile(r"^(CHAPTER|Chapter)\s+\w+.*$", re.M)
WORD = re.compile(r"[A-Za-z0-9]+(?:'[A-Za-z0-9]+)*")


def chapters(text):
    heads = list(HEADING.finditer(text))
    out = []
    for i, m in enumerate(heads):
        end = heads[i + 1].start() if i + 1 < len(heads) else len(text)
        out.append(text[m.end():end].strip())
    return out


def sentences(text):
    pieces = []
    for block in re.split(r"\n[ \t\r]*\n", text):
        start = 0
        for m in re.finditer(r"[.!?][.!?\"')\]]*(?=\s|$)", block):
            pieces.append(block[start:m.end()])
            start = m.end()
        pieces.append(block[start:])
    return [p for p in pieces if re.search(r"[A-Za-z0-9]", p)]


def tfidf(docs, k, stop):
    tfs = []
    for d in docs:
        tfs.append(Counter(w for w in (t.lower() for t in WORD.findall(d))
                           if w not in stop and re.search(r"[a-z]", w)))
    df = Counter()
    for tf in tfs:
        df.update(tf.keys())
    n = len(docs)
    out = []
    for tf in tfs:
        scored = sorted(((-c * (math.log((1 + n) / (1 + df[w])) + 1), w) for w, c in tf.items()))
        out.append([w for _, w in scored[:k]])
    return out


def main():
    stop = {l.strip().lower() for l in (FIXTURES / "stopwords.txt").read_text().splitlines()
            if l.strip() and not l.startswith("#")}
    result = {}
    for novel in ("lamplighters_ledger", "salt_and_signal"):
        text = (ROOT / "corpus" / "novels" / f"{novel}.txt").read_text()
        chs = chapters(text)
        result[novel] = {
            "chapters": len(chs),
            "chapter_words": [len(c.split()) for c in chs],
            "chapter_sentences": [len(sentences(c)) for c in chs],
            "topics_1_4": tfidf(chs[:4], 5, stop),
        }
    trunc = (FIXTURES / "truncated_context_500.txt").read_text()
    result["truncated_context_500_words"] = len(trunc.split())
    (FIXTURES / "corpus_expected.json").write_text(json.dumps(result, indent=2, sort_keys=True) + "\n")


if __name__ == "__main__":
    main()
