# Copyright 2026 The dupq Authors. All Rights Reserved.
# Licensed under the Apache License, Version 2.0.
"""Reference tokenizer used to freeze tests/data/tokens50.txt.

Written against the rule list in the README, using Python's unicodedata
rather than ICU so that the two implementations share no code.
"""
import sys
import unicodedata

CLITICS = {"s", "t", "re", "ve", "ll", "d", "m"}
APOSTROPHES = {"'", "’"}


def is_punct(ch):
    o = ord(ch)
    if o < 128:
        return 32 < o < 127 and not ch.isalnum()
    return unicodedata.category(ch).startswith("P")


def tokenize(text):
    out = []
    for chunk in text.split():
        lo, hi = 0, len(chunk)
        while lo < hi and is_punct(chunk[lo]):
            out.append(chunk[lo])
            lo += 1
        trail = hi
        while trail > lo and is_punct(chunk[trail - 1]):
            trail -= 1
        core = chunk[lo:trail]
        if core:
            cut = None
            for k in range(len(core) - 1, 0, -1):
                if core[k] in APOSTROPHES:
                    if core[k + 1:].lower() in CLITICS:
                        cut = k
                    break
            if cut is None:
                out.append(core)
            else:
                out += [core[:cut], core[cut:]]
        out += list(chunk[trail:hi])
    return out


if __name__ == "__main__":
    for line in sys.stdin.read().split("\n"):
        if line:
            print(" ".join(tokenize(line)))
