# Copyright 2026 The dupq Authors. All Rights Reserved.
# Licensed under the Apache License, Version 2.0.
"""Writes tests/data/pairs100.csv: 100 pairs over a question graph with
components of varied sizes, some questions shared across many pairs."""
import csv
import pathlib
import random

DATA = pathlib.Path(__file__).resolve().parents[1] / "data"
TOPICS = ["python", "guitar", "taxes", "running", "chess", "baking", "visa", "startups",
          "sleep", "physics", "history", "painting", "investing", "yoga", "spanish"]
FORMS = ["How do I get started with {}?", "What is the hardest part of {}?",
         "Is {} worth the time?", "Which books about {} are good?", "Why do people love {}?",
         "What should I know before trying {}?", "How long does it take to learn {}?"]

if __name__ == "__main__":
    rng = random.Random(7)
    rows = []
    for t in TOPICS:
        questions = [f.format(t) for f in FORMS]
        for _ in range(rng.choice([2, 3, 5, 7, 9])):
            a, b = rng.sample(questions, 2)
            rows.append((a, b, int(rng.random() < 0.4)))
    rows = rows[:100]
    while len(rows) < 100:
        i = len(rows)
        rows.append((f"Is question number {i} unique?", f"Is question {i} really unique?", i % 3 == 0))
    rng.shuffle(rows)
    ids = {}
    with open(DATA / "pairs100.csv", "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(["id", "qid1", "qid2", "question1", "question2", "is_duplicate"])
        for i, (a, b, y) in enumerate(rows):
            w.writerow([i, ids.setdefault(a, len(ids) + 1), ids.setdefault(b, len(ids) + 1), a, b, int(y)])
