#!/usr/bin/env python3
"""Regenerates the bundled plain-text resources under resources/.

Requires: pip install cmudict wordfreq lemminflect
"""
import pathlib
import re

import cmudict
import lemminflect
import wordfreq

OUT = pathlib.Path(__file__).resolve().parent.parent / "resources"
VOWELS = "AA AE AH AO AW AY EH ER EY IH IY OW OY UH UW"
CONSONANTS = "B CH D DH F G HH JH K L M N NG P R S SH T TH V W Y Z ZH"
WORD = re.compile(r"^[a-z]+(?:'[a-z]+)*$")


def stopwords():
    words = [w for w in wordfreq.top_n_list("en", 200) if WORD.match(w) and "'" not in w]
    return words[:50]


def pronouncing(limit=30000):
    cmu = cmudict.dict()
    lines = [f";;; vowels: {VOWELS}", f";;; consonants: {CONSONANTS}"]
    seen = 0
    for w in wordfreq.top_n_list("en", 120000):
        if not WORD.match(w) or w not in cmu:
            continue
        for pron in cmu[w]:
            lines.append(f"{w}\t{' '.join(pron)}")
        seen += 1
        if seen >= limit:
            break
    return lines


def lemmas(limit=4000):
    table = {}
    order = []
    for w in wordfreq.top_n_list("en", 20000):
        if not WORD.match(w):
            continue
        for upos in ("NOUN", "VERB", "ADJ"):
            lem = lemminflect.getLemma(w, upos=upos, lemmatize_oov=False)
            if lem:
                base = lem[0].lower()
                if base == w or not WORD.match(base):
                    continue
                if w not in table:
                    table[w] = base
                    order.append(w)
                break
        if len(order) >= limit * 3:
            break
    for w in list(wordfreq.top_n_list("en", 20000))[: limit * 2]:
        if WORD.match(w) and w not in table:
            table[w] = w
            order.append(w)
    for lem in set(table.values()):
        if lem not in table:
            table[lem] = lem
            order.append(lem)
    # Collapse chains so every lemma maps to itself.
    for w in order:
        seen = {w}
        cur = table[w]
        while table.get(cur, cur) != cur and cur not in seen:
            seen.add(cur)
            cur = table[cur]
        table[w] = cur if table.get(cur, cur) == cur else w
    return [f"{w}\t{table[w]}" for w in order]


def main():
    OUT.mkdir(exist_ok=True)
    (OUT / "stopwords.txt").write_text(
        "# one lowercase word per line\n" + "\n".join(stopwords()) + "\n")
    (OUT / "cmu.dict").write_text("\n".join(pronouncing()) + "\n")
    (OUT / "lemmas.tsv").write_text(
        "# form<TAB>lemma, lowercase\n" + "\n".join(lemmas()) + "\n")


if __name__ == "__main__":
    main()
