# Copyright 2026 The dupq Authors. All Rights Reserved.
# Licensed under the Apache License, Version 2.0.
"""Freezes word -> stem pairs from NLTK's Porter stemmer (reference-C variant)."""
import itertools
import pathlib
import re

from nltk.stem.porter import PorterStemmer

DATA = pathlib.Path(__file__).resolve().parents[1] / "data"
STEMS = ["connect", "generaliz", "relat", "hop", "happi", "caress", "pony", "ti", "agre", "feed",
         "plaster", "bled", "motor", "sing", "conflat", "troubl", "siz", "tann", "fall", "hiss",
         "fizz", "fail", "fil", "formal", "sensitiv", "electr", "adjust", "depend", "adopt",
         "effect", "control", "roll", "rat", "ceas", "run", "analog", "radic", "vietnam", "callous",
         "sky", "dy", "ly", "oper", "digit", "activ", "bomb", "gen", "hesit", "decis", "predic"]
SUFFIXES = ["", "s", "es", "ies", "ed", "eed", "ing", "ation", "ational", "tional", "izer",
            "ization", "ness", "ful", "ly", "ement", "ment", "ent", "ence", "ance", "able", "ible",
            "ity", "iviti", "ive", "ize", "al", "er", "ism", "ous", "ousli", "iti", "li", "eli",
            "alli", "bli", "logi", "ic", "ical", "icate", "ative", "e", "y", "ate", "ant", "ion",
            "ou", "enci", "anci", "aliti", "biliti", "fulness", "entli", "ator", "alism"]


def words():
    seen = set()
    for stem, suf in itertools.product(STEMS, SUFFIXES):
        seen.add(stem + suf)
    for name in ("sentences50.txt", "pairs20.csv"):
        seen.update(re.findall(r"[a-z]+", (DATA / name).read_text(encoding="utf-8").lower()))
    seen.update(["a", "is", "as", "s", "ss", "y", "by", "sky", "skies", "ooze", "ee"])
    return sorted(seen)


if __name__ == "__main__":
    stem = PorterStemmer(mode=PorterStemmer.MARTIN_EXTENSIONS).stem
    with open(DATA / "porter_words.tsv", "w", encoding="utf-8") as f:
        for w in words():
            f.write(f"{w}\t{stem(w)}\n")
