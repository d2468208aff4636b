#!/usr/bin/env python3
"""Regenerate crates/core/data/lexicon.tsv from the Brill lexicon shipped in TextBlob.

usage: build_lexicon.py textblob-<ver>-py3-none-any.whl > crates/core/data/lexicon.tsv
"""
import re
import sys
import zipfile

COARSE = {
    "NN": "NOUN", "NNS": "NOUN", "NNP": "NOUN", "NNPS": "NOUN",
    "VB": "VERB", "VBD": "VERB", "VBG": "VERB", "VBN": "VERB", "VBP": "VERB", "VBZ": "VERB",
    "JJ": "ADJ", "JJR": "ADJ", "JJS": "ADJ",
}
WORD = re.compile(r"[a-z]+(?:-[a-z]+)*")


def main(wheel):
    raw = zipfile.ZipFile(wheel).read("textblob/en/en-lexicon.txt").decode("utf-8")
    tags = {}
    for line in raw.splitlines():
        if not line or line.startswith(";;;"):
            continue
        word, tag = line.rsplit(" ", 1)
        if WORD.fullmatch(word):
            tags[word] = COARSE.get(tag, "OTHER")
    out = sys.stdout
    out.write("# Coarse POS lexicon: most frequent tag per word.\n")
    out.write("# Derived from the Brill tagger lexicon (v1.14, Brown + WSJ) as distributed\n")
    out.write("# with TextBlob (MIT license). Penn tags collapsed to NOUN/VERB/ADJ/OTHER.\n")
    for word in sorted(tags):
        out.write(f"{word}\t{tags[word]}\n")


if __name__ == "__main__":
    main(sys.argv[1])
