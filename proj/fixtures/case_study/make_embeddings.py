"""Writes onehot.vec: one orthogonal unit vector per word of corpus.jsonl.

Distinct words have cosine 0, identical words cosine 1, so semantic scores
only reward exact word reuse (a deliberately low-overlap provider).
"""
import json
import pathlib
import re

here = pathlib.Path(__file__).parent
words = set()
for line in (here / "corpus.jsonl").read_text().splitlines():
    if not line.strip():
        continue
    ex = json.loads(line)
    texts = [ex["document"], ex["reference"]] + [g["text"] for g in ex["generated"]]
    for t in texts:
        words.update(w.lower() for w in re.findall(r"[A-Za-z0-9]+", t))

vocab = sorted(words)
rows = [f"{len(vocab)} {len(vocab)}"]
for i, w in enumerate(vocab):
    rows.append(w + " " + " ".join("1" if j == i else "0" for j in range(len(vocab))))
(here / "onehot.vec").write_text("\n".join(rows) + "\n")
