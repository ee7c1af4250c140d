"""Independent reference computations for frozen scorer / BLEU fixtures.

Run with python3; prints the values that the C++ tests assert.
"""
import math
import string
from collections import Counter

PUNCT = set(string.punctuation)


def tokenize(text):
    out, cur = [], ""
    for ch in text:
        if ch.isspace():
            if cur:
                out.append(cur)
            cur = ""
        elif ch in PUNCT:
            if cur:
                out.append(cur)
            cur = ""
            out.append(ch)
        else:
            cur += ch
    if cur:
        out.append(cur)
    return [t.lower() for t in out]


def syllables(word):
    w = word.lower()
    if not w.isalpha():
        return 1
    vowels = "aeiouy"
    groups = 0
    prev = False
    for ch in w:
        v = ch in vowels
        if v and not prev:
            groups += 1
        prev = v
    if w.endswith("e"):
        le_rule = len(w) >= 3 and w.endswith("le") and w[-3] not in vowels
        if not le_rule:
            groups -= 1
    return max(groups, 1)


def is_word(tok):
    return any(ch not in PUNCT for ch in tok)


def fk(sentence):
    words = [t for t in tokenize(sentence) if is_word(t)]
    syl = sum(syllables(w) for w in words)
    return 0.39 * len(words) + 11.8 * syl / len(words) - 15.59


FK_FIXTURE = [
    "The cat sat on the mat.",
    "Readability matters for every technical document.",
    "I think we should go now, don't you?",
    "The committee unanimously approved the extraordinary proposal.",
    "Please send me the file by Friday.",
    "Table the motion until the little people arrive.",
    "Gentle breezes whistle through the ancient temple.",
    "We can't make it tonight; sorry!",
    "International cooperation facilitates sustainable development.",
    "Go.",
]


def bleu(cands, refs, max_n=4, eps=1e-9):
    matches = [0] * max_n
    totals = [0] * max_n
    c_len = r_len = 0
    for c, r in zip(cands, refs):
        c, r = c.split(), r.split()
        c_len += len(c)
        r_len += len(r)
        for n in range(1, max_n + 1):
            cg = Counter(tuple(c[i:i + n]) for i in range(len(c) - n + 1))
            rg = Counter(tuple(r[i:i + n]) for i in range(len(r) - n + 1))
            matches[n - 1] += sum(min(v, rg[g]) for g, v in cg.items())
            totals[n - 1] += max(len(c) - n + 1, 0)
    if matches[0] == 0:
        return 0.0
    logp = 0.0
    for m, t in zip(matches, totals):
        p = m / t if m > 0 else eps
        logp += math.log(p)
    bp = 1.0 if c_len >= r_len else math.exp(1 - r_len / c_len)
    return 100.0 * bp * math.exp(logp / max_n)


BLEU_FIXTURE = [
    ("the cat is on the mat", "the cat sat on the mat"),
    ("there is a cat on the mat", "a cat is on the mat"),
    ("he read the book because he was interested in world history",
     "he was interested in world history because he read the book"),
    ("the quick brown fox", "the quick brown fox jumps over the lazy dog"),
    ("to be or not to be", "to be or not to be that is the question"),
]

if __name__ == "__main__":
    print("tokenize don't stop:", tokenize("don't stop"))
    for w in ["cat", "readability", "table", "the", "little", "people", "make",
              "gentle", "whistle", "temple", "sorry", "cooperation"]:
        print("syl", w, syllables(w))
    for s in FK_FIXTURE:
        print("fk %r %.17g" % (s, fk(s)))
    tuples = [
        ((1.0, 0.5, 0.4), (0.2, 0.6, 0.2)),
        ((0.25, 0.75, 0.125), (0.2, 0.6, 0.2)),
        ((0.9, 0.1, 0.3), (1.0 / 3, 1.0 / 3, 1.0 / 3)),
        ((0.0, 1.0, 0.0), (0.5, 0.25, 0.25)),
        ((0.72, 0.34, 0.583), (0.1, 0.1, 0.8)),
    ]
    for (rs, rf, rd), (bs, bf, bd) in tuples:
        print("G %.17g" % (bs * rs + bf * rf + bd * rd))
    print("bleu the-the-the %.17g" % bleu(["the the the"], ["the cat"]))
    c = [a for a, _ in BLEU_FIXTURE]
    r = [b for _, b in BLEU_FIXTURE]
    print("bleu fixture %.17g" % bleu(c, r))
    # closed-form softmax(tau) check
    tau = 0.001
    for gap in [1.0, 2.0]:
        pmax = 1.0 / (1.0 + math.exp(-gap / tau))
        print("tau pmax gap", gap, pmax, 1 - pmax)
