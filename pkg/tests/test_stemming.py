from stylemt.stemming import porter_stem

# canonical behavior of the published algorithm, step by step:
# 1a plural stripping, 1b -ed/-ing with cleanup, 1c y->i, 2-4 suffix
# ladders, 5a final-e removal, 5b -ll reduction
CANONICAL = [
    ("caresses", "caress"),
    ("ponies", "poni"),
    ("ties", "ti"),
    ("caress", "caress"),
    ("cats", "cat"),
    ("feed", "feed"),
    ("agreed", "agre"),
    ("plastered", "plaster"),
    ("bled", "bled"),
    ("motoring", "motor"),
    ("sing", "sing"),
    ("conflated", "conflat"),
    ("troubled", "troubl"),
    ("sized", "size"),
    ("hopping", "hop"),
    ("tanned", "tan"),
    ("falling", "fall"),
    ("hissing", "hiss"),
    ("fizzed", "fizz"),
    ("failing", "fail"),
    ("filing", "file"),
    ("happy", "happi"),
    ("sky", "sky"),
    ("relational", "relat"),
    ("conditional", "condit"),
    ("rational", "ration"),
    ("valenci", "valenc"),
    ("hesitanci", "hesit"),
    ("digitizer", "digit"),
    ("conformabli", "conform"),
    ("radicalli", "radic"),
    ("differentli", "differ"),
    ("vileli", "vile"),
    ("analogousli", "analog"),
    ("vietnamization", "vietnam"),
    ("predication", "predic"),
    ("operator", "oper"),
    ("feudalism", "feudal"),
    ("decisiveness", "decis"),
    ("hopefulness", "hope"),
    ("callousness", "callous"),
    ("formaliti", "formal"),
    ("sensitiviti", "sensit"),
    ("sensibiliti", "sensibl"),
    ("triplicate", "triplic"),
    ("formative", "form"),
    ("formalize", "formal"),
    ("electriciti", "electr"),
    ("electrical", "electr"),
    ("hopeful", "hope"),
    ("goodness", "good"),
    ("revival", "reviv"),
    ("allowance", "allow"),
    ("inference", "infer"),
    ("airliner", "airlin"),
    ("gyroscopic", "gyroscop"),
    ("adjustable", "adjust"),
    ("defensible", "defens"),
    ("irritant", "irrit"),
    ("replacement", "replac"),
    ("adjustment", "adjust"),
    ("dependent", "depend"),
    ("adoption", "adopt"),
    ("homologou", "homolog"),
    ("communism", "commun"),
    ("activate", "activ"),
    ("angulariti", "angular"),
    ("homologous", "homolog"),
    ("effective", "effect"),
    ("bowdlerize", "bowdler"),
    ("probate", "probat"),
    ("rate", "rate"),
    ("cease", "ceas"),
    ("controll", "control"),
    ("roll", "roll"),
    ("oscillators", "oscil"),
    ("generalization", "gener"),
    ("running", "run"),
]


def test_canonical_vocabulary():
    for word, stem in CANONICAL:
        assert porter_stem(word) == stem, word


def test_lowercases_input():
    assert porter_stem("Caresses") == "caress"
    assert porter_stem("RUNNING") == "run"


def test_short_words_untouched():
    for word in ["a", "is", "be", "ox"]:
        assert porter_stem(word) == word


def test_idempotent_on_test_lexicon():
    # a lexicon of everyday words whose stems are fixed points
    lexicon = [
        "cats", "running", "hopping", "falling", "relational", "rational",
        "adoption", "formalize", "goodness", "hopeful", "triplicate",
        "oscillators", "generalization", "motoring", "happy", "sky",
        "electrical", "dependent", "replacement", "allowance",
    ]
    for word in lexicon:
        once = porter_stem(word)
        assert porter_stem(once) == once, word
