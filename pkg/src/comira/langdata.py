"""Shipped English language tables: stopwords, lemma rules, POS lexicon.

These are deterministic stand-ins for a full NLP toolkit, chosen for
reproducibility over coverage; divergence from dictionary lemmatizers is
expected at the margins. Every table can be overridden from a file (see
concepts.NormalizerConfig and pairs.LexiconTagger).
"""

from __future__ import annotations

from typing import NamedTuple


class LemmaRule(NamedTuple):
    """One suffix-rewrite rule.

    Applies to a token when it ends with ``suffix``, the remaining stem has
    at least ``min_stem`` characters, and the token ends with none of the
    ``blocked`` suffixes. ``undouble`` drops a trailing doubled consonant
    (except l/s/z) from the result.
    """

    suffix: str
    replacement: str
    min_stem: int
    undouble: bool
    blocked: tuple[str, ...]


# Ordered: first match wins per pass; passes repeat to a fixpoint, which is
# what makes lemmatization idempotent by construction.
LEMMA_RULES: tuple[LemmaRule, ...] = (
    LemmaRule("sses", "ss", 1, False, ()),
    LemmaRule("ies", "y", 2, False, ()),
    LemmaRule("ches", "ch", 1, False, ()),
    LemmaRule("shes", "sh", 1, False, ()),
    LemmaRule("xes", "x", 1, False, ()),
    LemmaRule("oes", "o", 2, False, ()),
    LemmaRule("s", "", 2, False, ("ss", "us", "is")),
    LemmaRule("ied", "y", 2, False, ()),
    LemmaRule("eed", "ee", 2, False, ()),
    LemmaRule("ed", "", 3, True, ()),
    LemmaRule("ing", "", 4, True, ()),
)

# Irregular forms and words the suffix rules would mangle. Values must be
# fixpoints of the full lemmatizer (enforced by tests). Identity entries
# shield words like "yes" and "glasses" from the -s rules.
LEMMA_EXCEPTIONS: dict[str, str] = {
    # be / auxiliaries
    "am": "be", "is": "be", "are": "be", "was": "be", "were": "be",
    "been": "be", "being": "be",
    "has": "have", "had": "have", "having": "have",
    "does": "do", "did": "do", "done": "do", "doing": "do",
    # common irregular verbs
    "went": "go", "goes": "go", "going": "go", "gone": "go",
    "said": "say",
    "made": "make", "making": "make",
    "took": "take", "taken": "take", "taking": "take",
    "came": "come", "coming": "come",
    "ran": "run",
    "seen": "see", "seeing": "see",
    "used": "use", "using": "use",
    "dying": "die", "lying": "lie",
    "added": "add",
    # irregular plurals
    "men": "man", "women": "woman", "children": "child",
    "mice": "mouse", "feet": "foot", "teeth": "tooth", "geese": "goose",
    "leaves": "leaf", "wolves": "wolf", "knives": "knife",
    "wives": "wife", "lives": "life", "shelves": "shelf", "halves": "half",
    "movies": "movie", "shoes": "shoe", "pies": "pie",
    "ties": "tie", "dies": "die", "lies": "lie",
    # identity protections against the -s/-es rules
    "yes": "yes", "glasses": "glasses", "news": "news", "gas": "gas",
    "series": "series", "species": "species", "lens": "lens",
    "clothes": "clothes", "canvas": "canvas",
}

# English stopword lemmas. Contraction fragments (t, don, isn, ...) appear
# because the tokenizer splits on non-letters. "yes" and "no" are listed so
# the keep_yes_no switch has something to keep.
STOPWORDS: frozenset[str] = frozenset("""
a about above after again against ain all am an and any are aren as at be
because been before being below between both but by can cannot could couldn
d did didn do does doesn doing don down during each few for from further had
hadn has hasn have haven having he her here hers herself him himself his how
i if in into is isn it its itself just ll m ma me mightn more most mustn my
myself needn no nor not now o of off on once only or other our ours
ourselves out over own re s same shan she should shouldn so some such t than
that the their theirs them themselves then there these they this those
through to too under until up ve very was wasn we were weren what when where
which while who whom why will with won wouldn y yes you your yours yourself
yourselves
""".split())

_ADJECTIVES = """
red blue green yellow black white brown gray pink purple big small large
little long short tall wide narrow thick thin heavy fast slow hot cold warm
cool new old young fresh clean dirty wet dry soft hard smooth rough bright
dark loud quiet sweet sour bitter salty empty full open closed happy sad
angry tired strong weak rich poor beautiful ugly wooden plastic metallic
golden silver striped spotted furry fluffy shiny rusty broken tiny giant
""".split()

_VERBS = """
browse eat drink sleep swim walk climb throw catch push pull carry bring
think know want need buy sell pay give send help teach learn build break
wear hold keep stand sit wait talk speak listen watch
""".split()

_ADVERBS = "quickly slowly really always never often sometimes usually".split()

_NOUNS = """
dog cat bird fish horse cow pig sheep goat chicken duck rabbit rat bear fox
deer lion tiger elephant monkey snake frog turtle spider bee ant butterfly
shark whale dolphin seal penguin owl eagle hawk crow pigeon spaniel terrier
poodle kitten puppy goose mouse wolf
table chair bed sofa couch lamp mirror clock shelf drawer cabinet carpet
curtain pillow blanket towel soap brush comb broom mop bucket basket box jar
bottle cup mug plate bowl spoon fork knife pan pot kettle oven stove fridge
sink bathtub toilet door window wall floor ceiling roof stair key lock
kitchen bathroom bedroom hallway garage basement attic balcony fence gate
bread butter cheese milk egg meat beef pork bacon sausage rice pasta soup
salad fruit apple banana orange grape lemon peach pear cherry berry melon
tomato potato carrot onion garlic pepper salt sugar honey jam cake cookie
pie chocolate candy coffee tea juice water wine beer
shirt pants dress skirt coat jacket sweater sock shoe boot hat cap glove
scarf belt tie button pocket jeans uniform glasses
hammer screwdriver wrench saw drill nail screw rope chain ladder shovel rake
hose wire tape glue scissors needle thread pin camera phone computer laptop
keyboard screen printer radio television speaker battery cable watch
umbrella wallet purse bag backpack suitcase map book pen pencil paper
notebook envelope stamp card coin fertilizer vase candle lantern flag drum
guitar piano violin trumpet ball bat racket net goal kite doll toy puzzle
robot statue picture painting photo image
car truck bus train plane boat ship bicycle motorcycle wheel tire engine
house school church hospital store shop market office factory farm barn
garden park street road bridge tower castle museum library station airport
harbor beach mountain river lake forest field desert island city town
village
tree flower grass leaf branch root seed plant bush rose tulip daisy sun moon
star sky cloud rain snow ice wind storm fire smoke stone rock sand soil mud
wave
head face eye ear nose mouth tooth tongue hair neck shoulder arm elbow hand
finger thumb chest back leg knee foot toe skin bone heart blood
man woman child baby boy girl person family mother father brother sister
friend teacher doctor nurse farmer driver worker artist musician singer
dancer player soldier king queen
success failure idea thought temperament happiness sadness freedom justice
courage wisdom knowledge education history science music art impressionism
style fashion culture language word name number time moment season spring
summer autumn winter morning evening night day week month year browsing
""".split()

# Dictionary-membership stand-in: accessory words must appear here to pass
# the "is an English word" filter.
ENGLISH_WORDS: frozenset[str] = frozenset(
    _NOUNS + _ADJECTIVES + _VERBS + _ADVERBS + list(LEMMA_EXCEPTIONS.values())
)

# Explicit tags; anything absent falls back to suffix heuristics, then noun.
POS_LEXICON: dict[str, str] = {}
POS_LEXICON.update({w: "noun" for w in _NOUNS})
POS_LEXICON.update({w: "adjective" for w in _ADJECTIVES})
POS_LEXICON.update({w: "verb" for w in _VERBS})
POS_LEXICON.update({w: "adverb" for w in _ADVERBS})

POS_SUFFIX_HEURISTICS: tuple[tuple[str, str], ...] = (
    ("ly", "adverb"),
    ("ness", "noun"), ("ment", "noun"), ("tion", "noun"), ("sion", "noun"),
    ("ity", "noun"), ("ism", "noun"), ("hood", "noun"), ("ship", "noun"),
    ("ous", "adjective"), ("ful", "adjective"), ("less", "adjective"),
    ("ish", "adjective"), ("able", "adjective"), ("ible", "adjective"),
)
