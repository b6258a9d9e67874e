#!/usr/bin/env python3
"""Regenerates the toy fixtures in this directory.

Four inflectional classes, five lexemes each, ten paradigm cells per lexeme
(singular and plural of nominative, genitive, partitive, inessive, elative).
Embeddings are a sum of lexeme, case, number and class components plus noise.
"""
import math
import random
from pathlib import Path

HERE = Path(__file__).resolve().parent
DIM = 32
CASES = ["nominative", "genitive", "partitive", "inessive", "elative"]


def harmonize(suffix, front):
    return suffix.replace("a", "ä").replace("o", "ö") if front else suffix


def is_front(word):
    return word in FRONT_NEUTRAL or any(v in word for v in "äöy")


def class9(lemma, pl_stem):
    # kala : kalan : kalaa ... kalat : kalojen : kaloja
    f = is_front(lemma)
    h = lambda s: harmonize(s, f)
    sg = [lemma, lemma + "n", lemma + lemma[-1], lemma + h("ssa"), lemma + h("sta")]
    gen_pl = pl_stem + ("jen" if pl_stem.endswith("o") else "en")
    par_pl = pl_stem + (h("ja") if pl_stem.endswith("o") else h("a"))
    plural_i = "" if pl_stem.endswith("i") else "i"
    pl = [lemma + "t", gen_pl, par_pl, pl_stem + plural_i + h("ssa"), pl_stem + plural_i + h("sta")]
    return sg, pl


def class5(lemma):
    # tuoli : tuolin : tuolia ... tuolit : tuolien : tuoleja
    h = lambda s: harmonize(s, is_front(lemma))
    e = lemma[:-1] + "e"
    sg = [lemma, lemma + "n", lemma + h("a"), lemma + h("ssa"), lemma + h("sta")]
    pl = [lemma + "t", lemma + "en", e + h("ja"), e + h("issa"), e + h("ista")]
    return sg, pl


def class48(lemma):
    # huone : huoneen : huonetta ... huoneet : huoneiden : huoneita
    h = lambda s: harmonize(s, is_front(lemma))
    sg = [lemma, lemma + "en", lemma + h("tta"), lemma + h("essa"), lemma + h("esta")]
    pl = [lemma + "et", lemma + "iden", lemma + h("ita"), lemma + h("issa"), lemma + h("ista")]
    return sg, pl


def class38(lemma):
    # nainen : naisen : naista ... naiset : naisten : naisia
    h = lambda s: harmonize(s, is_front(lemma))
    b = lemma[:-3]
    sg = [lemma, b + "sen", b + h("sta"), b + h("sessa"), b + h("sesta")]
    pl = [b + "set", b + "sten", b + h("sia"), b + h("sissa"), b + h("sista")]
    return sg, pl


# stems with only neutral vowels take front suffixes
FRONT_NEUTRAL = {"perhe", "kirje", "vene", "ihminen"}
LEXEMES = [
    (9, "kala", lambda: class9("kala", "kalo")),
    (9, "sana", lambda: class9("sana", "sano")),
    (9, "kassa", lambda: class9("kassa", "kasso")),
    (9, "kylä", lambda: class9("kylä", "kyli")),
    (9, "päivä", lambda: class9("päivä", "päivi")),
    (5, "tuoli", lambda: class5("tuoli")),
    (5, "paperi", lambda: class5("paperi")),
    (5, "banaani", lambda: class5("banaani")),
    (5, "tyyli", lambda: class5("tyyli")),
    (5, "hytti", lambda: class5("hytti")),
    (48, "huone", lambda: class48("huone")),
    (48, "osake", lambda: class48("osake")),
    (48, "perhe", lambda: class48("perhe")),
    (48, "kirje", lambda: class48("kirje")),
    (48, "vene", lambda: class48("vene")),
    (38, "nainen", lambda: class38("nainen")),
    (38, "hevonen", lambda: class38("hevonen")),
    (38, "kappalainen", lambda: class38("kappalainen")),
    (38, "ihminen", lambda: class38("ihminen")),
    (38, "kärpänen", lambda: class38("kärpänen")),
]
HAPAX_LEXEMES = {"kassa", "päivä", "banaani", "kappalainen", "kärpänen", "hevonen"}


def gaussian(rng, scale):
    return [rng.gauss(0.0, scale) for _ in range(DIM)]


def main():
    rng = random.Random(20240611)
    case_vec = {c: gaussian(rng, 0.8) for c in CASES}
    number_vec = {n: gaussian(rng, 0.8) for n in ("sg", "pl")}
    class_vec = {k: gaussian(rng, 0.6) for k in (9, 5, 48, 38)}
    cell_weight = {c: w for c, w in zip(CASES, (1.0, 0.6, 0.4, 0.25, 0.15))}

    rows, vectors, lemma_freq = [], [], {}
    seen = set()
    for rank, (cls, lemma, build) in enumerate(LEXEMES, start=1):
        lex_vec = gaussian(rng, 1.0)
        lemma_scale = 400.0 / rank ** 0.9
        sg, pl = build()
        total = 0
        for number, forms in (("sg", sg), ("pl", pl)):
            for case, form in zip(CASES, forms):
                assert form not in seen, form
                seen.add(form)
                w = lemma_scale * cell_weight[case] * (1.0 if number == "sg" else 0.5)
                freq = max(1, int(round(w * math.exp(rng.gauss(0.0, 0.6)))))
                total += freq
                rows.append(f"{form},{lemma},{case},{number},{cls},{freq}")
                vec = [a + b + c + d + rng.gauss(0.0, 0.1) for a, b, c, d in
                       zip(lex_vec, case_vec[case], number_vec[number], class_vec[cls])]
                vectors.append(form + " " + " ".join(f"{v:.6f}" for v in vec))
        lemma_freq[lemma] = 1 if lemma in HAPAX_LEXEMES else total

    (HERE / "lexicon.csv").write_text(
        "surface,lexeme,case,number,class,frequency\n" + "\n".join(rows) + "\n", encoding="utf-8")
    (HERE / "embeddings.vec").write_text(
        f"{len(vectors)} {DIM}\n" + "\n".join(vectors) + "\n", encoding="utf-8")
    (HERE / "lemma_freqs.csv").write_text(
        "lexeme,frequency\n" + "\n".join(f"{k},{v}" for k, v in lemma_freq.items()) + "\n", encoding="utf-8")


if __name__ == "__main__":
    main()
