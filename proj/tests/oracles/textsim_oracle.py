"""Reference values for string and document similarity, computed from the
textbook definitions without sharing code with the C++ implementation."""
import math
from collections import Counter


def jaro(a, b):
    if not a and not b:
        return 1.0
    if not a or not b:
        return 0.0
    window = max(len(a), len(b)) // 2 - 1
    window = max(window, 0)
    a_hit = [False] * len(a)
    b_hit = [False] * len(b)
    m = 0
    for i, ca in enumerate(a):
        for j in range(max(0, i - window), min(len(b), i + window + 1)):
            if not b_hit[j] and b[j] == ca:
                a_hit[i] = b_hit[j] = True
                m += 1
                break
    if m == 0:
        return 0.0
    a_seq = [c for c, h in zip(a, a_hit) if h]
    b_seq = [c for c, h in zip(b, b_hit) if h]
    t = sum(x != y for x, y in zip(a_seq, b_seq)) / 2
    return (m / len(a) + m / len(b) + (m - t) / m) / 3


def jaro_winkler(a, b, p=0.1, boost_threshold=0.7):
    j = jaro(a, b)
    if j <= boost_threshold:
        return j
    prefix = 0
    for x, y in zip(a[:4], b[:4]):
        if x != y:
            break
        prefix += 1
    return j + prefix * p * (1 - j)


def idf(docs):
    n = len(docs)
    df = Counter(t for d in docs for t in set(d))
    return {t: math.log((1 + n) / (1 + c)) + 1 for t, c in df.items()}


def tfidf_cosine(docs, a, b):
    w = idf(docs)
    unseen = math.log(1 + len(docs)) + 1
    va = {t: c * w.get(t, unseen) for t, c in Counter(a).items()}
    vb = {t: c * w.get(t, unseen) for t, c in Counter(b).items()}
    dot = sum(va[t] * vb.get(t, 0.0) for t in va)
    na = math.sqrt(sum(x * x for x in va.values()))
    nb = math.sqrt(sum(x * x for x in vb.values()))
    return 0.0 if na == 0 or nb == 0 else dot / (na * nb)


if __name__ == "__main__":
    # Hand check: m = 6, t = 1, prefix 3.
    hand = (6 / 6 + 6 / 6 + (6 - 1) / 6) / 3
    hand = hand + 3 * 0.1 * (1 - hand)
    print(f"MARTHA/MARHTA hand     {hand:.17g}")
    print(f"MARTHA/MARHTA          {jaro_winkler('MARTHA', 'MARHTA'):.17g}")
    print(f"DWAYNE/DUANE           {jaro_winkler('DWAYNE', 'DUANE'):.17g}")
    print(f"DIXON/DICKSONX         {jaro_winkler('DIXON', 'DICKSONX'):.17g}")
    print(f"jaro MARTHA/MARHTA     {jaro('MARTHA', 'MARHTA'):.17g}")
    print(f"idf a in [a],[a]       {idf([['a'], ['a']])['a']:.17g}")
    print(f"idf a in [a],[b]       {idf([['a'], ['b']])['a']:.17g}")
    docs = [["cat", "cat", "dog"], ["cat"], ["bird"]]
    print(f"cosine cat example     {tfidf_cosine(docs, docs[0], docs[1]):.17g}")
