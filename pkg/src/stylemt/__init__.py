"""Monolingual phrase-based statistical MT for text style transfer.

Pipeline: preprocess a parallel corpus, learn word alignments by EM,
extract phrase tables, train a Kneser-Ney language model, beam-decode,
score with BLEU and METEOR, and sweep the three component weights.
"""

from .align import (AlignConfig, NULL_TOKEN, TranslationTable, em_train,
                    log_likelihood, read_pharaoh, read_table, viterbi_align,
                    write_pharaoh, write_table)
from .corpus import (CorpusStats, ParallelCorpus, Segment, SplitSpec,
                     TruecaseModel, apply_truecaser, clean_pair, compute_stats,
                     load_parallel, scrub_simple_side, split_corpus, tokenize,
                     train_truecaser)
from .decoder import (DecodeResult, DecoderConfig, Derivation, FeatureVector,
                      Weights, decode, decode_file, derivation_features,
                      distortion, rescore)
from .errors import (ConfigError, DataError, DecodeError, FormatError,
                     StyleMTError)
from .metrics import (BleuReport, LengthRatioStats, MatchStageConfig,
                      MeteorReport, bleu_corpus, edit_distance_summary,
                      length_ratio_stats, meteor_corpus, meteor_sentence,
                      token_edit_distance, write_xray)
from .ngram import (BOS, EOS, LMConfig, NGramModel, UNK, lm_train, read_arpa,
                    score_sequence, write_arpa)
from .phrases import (PhrasePair, PhraseTable, estimate_table, extract_phrases,
                      read_phrase_table, write_phrase_table)
from .stemming import porter_stem

__version__ = "0.1.0"
