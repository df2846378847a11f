"""Deterministic synthetic style-transfer corpus.

Generates line-aligned raw text in an invented archaic register and its
plain modern counterpart, built from a fixed word-pair lexicon and sentence
templates.  The simple side carries the kinds of noise the scrubber removes
(parenthetical glosses, footnote asterisks, double quotes).  The same seed
always yields byte-identical files; the copies under data/ were produced by
this module.
"""

from __future__ import annotations

import random
import re
from importlib import resources

DEFAULT_SEED = 7
DEFAULT_PAIRS = 1000

_NAMES = ["Moses", "Aaron", "Sarah", "David", "Miriam", "Caleb", "Hannah", "Eli"]

_PLAIN_NOUNS = ["people", "city", "field", "house", "water", "bread",
                "mountain", "river", "garden", "temple"]

_NOUN_PAIRS = [
    ("raiment", "clothes"), ("victuals", "food"), ("tidings", "news"),
    ("firmament", "sky"), ("multitude", "crowd"), ("countenance", "face"),
    ("brethren", "brothers"), ("kinsman", "relative"), ("tabernacle", "tent"),
    ("supplication", "prayer"),
]

_VERB3_PAIRS = [
    ("speaketh", "speaks", "speak"), ("giveth", "gives", "give"),
    ("taketh", "takes", "take"), ("knoweth", "knows", "know"),
    ("loveth", "loves", "love"), ("maketh", "makes", "make"),
    ("goeth", "goes", "go"), ("seeketh", "seeks", "seek"),
]

_PAST_PAIRS = [
    ("spake", "said"), ("beheld", "saw"), ("smote", "struck"),
    ("clave", "split"),
]

_ADJ_PAIRS = [
    ("righteous", "good"), ("wicked", "evil"), ("goodly", "fine"),
    ("steadfast", "loyal"), ("weary", "tired"), ("wroth", "angry"),
]

# (archaic template, simple template); slot names in braces
_TEMPLATES = [
    ("and {name} {past} unto the {pn} .",
     "and {name} {said} to the {pn} ."),
    ("thou shalt not {vbase} the {pn} .",
     "you will not {vbase} the {pn} ."),
    ("behold , the {pn} is {adj_a} .",
     "look , the {pn} is {adj_s} ."),
    ("{name} hath given thee {noun_a} .",
     "{name} has given you {noun_s} ."),
    ("the {noun_a} of {name} is {adj_a} .",
     "the {noun_s} of {name} is {adj_s} ."),
    ("{name} {v3_a} the {noun_a} daily .",
     "{name} {v3_s} the {noun_s} daily ."),
    ("verily I say unto thee , {name} is {adj_a} .",
     "truly I say to you , {name} is {adj_s} ."),
    ("go thither and tell thy {noun_a} .",
     "go there and tell your {noun_s} ."),
    ("ye shall see the {pn} on the morrow .",
     "you will see the {pn} in the morning ."),
    ("{name} beheld the {noun_a} by the {pn} .",
     "{name} saw the {noun_s} by the {pn} ."),
    ("wherefore {v3_a} {name} the {noun_a} ?",
     "why does {name} {vbase} the {noun_s} ?"),
    ("{name} rose and went unto the {pn} .",
     "{name} rose and went to the {pn} ."),
    ("{name} said , thou art my {noun_a} .",
     "{name} said , you are my {noun_s} ."),
    ("the {pn} was exceeding {adj_a} .",
     "the {pn} was very {adj_s} ."),
    ("hearken unto me , o {name} .",
     "listen to me , {name} ."),
    ("the {pn} is near the {pn2} .",
     "the {pn} is near the {pn2} ."),
]


def _detokenize(tokens: str) -> str:
    text = re.sub(r" ([,.:;?!])", r"\1", tokens)
    return text[0].upper() + text[1:] if text else text


def _dress_simple(line: str, rng: random.Random) -> str:
    """Add scrubbable noise: quotes, a parenthetical gloss, or an asterisk."""
    roll = rng.random()
    if roll < 0.08:
        words = line.split(" ")
        k = rng.randrange(1, len(words))
        words[k] = '"' + words[k]
        words[min(k + 1, len(words) - 1)] += '"'
        return " ".join(words)
    if roll < 0.16:
        words = line.split(" ")
        k = rng.randrange(1, len(words))
        gloss = rng.choice(["(that is a place)", "(an old word)", "(see the note)"])
        words.insert(k, gloss)
        return " ".join(words)
    if roll < 0.22:
        words = line.split(" ")
        k = rng.randrange(len(words))
        if words[k][-1].isalpha():
            words[k] += "*"
        return " ".join(words)
    return line


def generate_pairs(n_pairs: int = DEFAULT_PAIRS, seed: int = DEFAULT_SEED
                   ) -> list[tuple[str, str]]:
    """Raw (normal, simple) line pairs, deterministic in the seed."""
    rng = random.Random(seed)
    pairs = []
    for _ in range(n_pairs):
        archaic_t, simple_t = rng.choice(_TEMPLATES)
        noun_a, noun_s = rng.choice(_NOUN_PAIRS)
        v3_a, v3_s, vbase = rng.choice(_VERB3_PAIRS)
        past, said = rng.choice(_PAST_PAIRS)
        adj_a, adj_s = rng.choice(_ADJ_PAIRS)
        pn, pn2 = rng.sample(_PLAIN_NOUNS, 2)
        slots = {
            "name": rng.choice(_NAMES),
            "pn": pn,
            "pn2": pn2,
            "noun_a": noun_a, "noun_s": noun_s,
            "v3_a": v3_a, "v3_s": v3_s, "vbase": vbase,
            "past": past, "said": said,
            "adj_a": adj_a, "adj_s": adj_s,
        }
        normal = _detokenize(archaic_t.format(**slots))
        simple = _detokenize(_dress_simple(simple_t.format(**slots), rng))
        pairs.append((normal, simple))
    return pairs


def write_corpus(normal_path, simple_path, n_pairs: int = DEFAULT_PAIRS,
                 seed: int = DEFAULT_SEED) -> None:
    pairs = generate_pairs(n_pairs, seed)
    with open(normal_path, "w", encoding="utf-8") as nf, \
            open(simple_path, "w", encoding="utf-8") as sf:
        for normal, simple in pairs:
            nf.write(normal + "\n")
            sf.write(simple + "\n")


def bundled_corpus_paths() -> tuple[str, str]:
    """Paths of the pre-generated corpus files shipped with the package."""
    data = resources.files("stylemt") / "data"
    return str(data / "toy.normal.txt"), str(data / "toy.simple.txt")
