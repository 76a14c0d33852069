#!/usr/bin/env python3
"""Regenerates the bundled synthetic datasets under data/.

Three aligned mini-languages (en, de, fr) built from parallel word pools, so
texts differ systematically at the byte level while staying content-aligned:
  - corpus.jsonl    120 parallel samples {"id", "texts": {lang: text}}
  - classify.jsonl  60 premise/hypothesis items per language, labels 0..2
  - span.jsonl      60 context/question items per language, extractive answers

Deterministic: a fixed seed drives every draw, so reruns are byte-identical.
"""

import json
import random
from pathlib import Path

OUT = Path(__file__).resolve().parent.parent / "data"

LANGS = ["en", "de", "fr"]

# index-aligned pools: pool[k][i] is the same concept in language k
NAMES = {
    "en": ["mara", "tomas", "ines", "rolf", "selma", "viktor", "ada", "bruno"],
    "de": ["mara", "tomas", "ines", "rolf", "selma", "viktor", "ada", "bruno"],
    "fr": ["mara", "tomas", "ines", "rolf", "selma", "viktor", "ada", "bruno"],
}
CITIES = {
    "en": ["harbor town", "stone bridge", "green field", "old market",
           "north gate", "mill valley", "clear lake", "high cliff"],
    "de": ["hafenstadt", "steinbrücke", "grünfeld", "altmarkt",
           "nordtor", "mühlental", "klarsee", "hochklippe"],
    "fr": ["ville du port", "pont de pierre", "champ vert", "vieux marché",
           "porte du nord", "val du moulin", "lac clair", "haute falaise"],
}
OBJECTS = {
    "en": ["a copper kettle", "the small boat", "an old map", "the wool coat",
           "a glass lantern", "the iron key", "a straw basket", "the oak table"],
    "de": ["einen kupferkessel", "das kleine boot", "eine alte karte",
           "den wollmantel", "eine glaslaterne", "den eisenschlüssel",
           "einen strohkorb", "den eichentisch"],
    "fr": ["une bouilloire en cuivre", "le petit bateau", "une vieille carte",
           "le manteau de laine", "une lanterne en verre", "la clé de fer",
           "un panier de paille", "la table en chêne"],
}
VERBS = {
    "en": ["keeps", "sells", "repairs", "paints", "hides", "carries"],
    "de": ["behält", "verkauft", "repariert", "bemalt", "versteckt", "trägt"],
    "fr": ["garde", "vend", "répare", "peint", "cache", "porte"],
}
SENT = {
    "en": "{name} {verb} {obj} near {city}.",
    "de": "{name} {verb} {obj} bei {city}.",
    "fr": "{name} {verb} {obj} près de {city}.",
}
WHERE_Q = {
    "en": "where does {name} live?",
    "de": "wo wohnt {name}?",
    "fr": "où habite {name}?",
}
LIVES = {
    "en": "{name} lives in {city} since {year}.",
    "de": "{name} wohnt seit {year} in {city}.",
    "fr": "{name} habite à {city} depuis {year}.",
}
# hypothesis templates by label: 0 = restates, 1 = contradicts, 2 = unrelated
HYP = {
    "en": ["{name} has {obj}.", "{name} lost {obj}.", "the river is wide."],
    "de": ["{name} hat {obj}.", "{name} verlor {obj}.", "der fluss ist breit."],
    "fr": ["{name} a {obj}.", "{name} a perdu {obj}.", "la rivière est large."],
}


def pick(rng, pools, lang, i):
    return pools[lang][i % len(pools[lang])]


def main():
    rng = random.Random(7)
    OUT.mkdir(parents=True, exist_ok=True)

    with open(OUT / "corpus.jsonl", "w", encoding="utf-8") as f:
        for i in range(120):
            ni = rng.randrange(len(NAMES["en"]))
            vi = rng.randrange(len(VERBS["en"]))
            oi = rng.randrange(len(OBJECTS["en"]))
            ci = rng.randrange(len(CITIES["en"]))
            texts = {}
            for lang in LANGS:
                texts[lang] = SENT[lang].format(
                    name=NAMES[lang][ni], verb=VERBS[lang][vi],
                    obj=OBJECTS[lang][oi], city=CITIES[lang][ci])
            f.write(json.dumps({"id": f"s{i:04d}", "texts": texts},
                               ensure_ascii=False) + "\n")

    with open(OUT / "classify.jsonl", "w", encoding="utf-8") as f:
        for i in range(60):
            ni = rng.randrange(len(NAMES["en"]))
            vi = rng.randrange(len(VERBS["en"]))
            oi = rng.randrange(len(OBJECTS["en"]))
            ci = rng.randrange(len(CITIES["en"]))
            label = rng.randrange(3)
            for lang in LANGS:
                premise = SENT[lang].format(
                    name=NAMES[lang][ni], verb=VERBS[lang][vi],
                    obj=OBJECTS[lang][oi], city=CITIES[lang][ci])
                hypothesis = HYP[lang][label].format(
                    name=NAMES[lang][ni], obj=OBJECTS[lang][oi])
                f.write(json.dumps(
                    {"id": f"c{i:04d}", "lang": lang, "premise": premise,
                     "hypothesis": hypothesis, "label": label},
                    ensure_ascii=False) + "\n")

    with open(OUT / "span.jsonl", "w", encoding="utf-8") as f:
        for i in range(60):
            ni = rng.randrange(len(NAMES["en"]))
            ci = rng.randrange(len(CITIES["en"]))
            year = rng.randrange(1970, 2020)
            for lang in LANGS:
                context = LIVES[lang].format(
                    name=NAMES[lang][ni], city=CITIES[lang][ci], year=year)
                question = WHERE_Q[lang].format(name=NAMES[lang][ni])
                f.write(json.dumps(
                    {"id": f"q{i:04d}", "lang": lang, "context": context,
                     "question": question, "answer": CITIES[lang][ci]},
                    ensure_ascii=False) + "\n")

    print(f"wrote corpus/classify/span under {OUT}")


if __name__ == "__main__":
    main()
