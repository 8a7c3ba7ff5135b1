"""parapick: generate paraphrase candidates, rank them, keep the best one.

Candidates come from a translation endpoint via direct (same-language)
decoding and round-trip translation through pivot languages; a four-stage
cascade (overlap dedup, word-error-rate diversity, perplexity fluency,
greedy cosine semantics) filters them down to one paraphrase per source.
"""

from .augment import AugmentedDataset, LabeledExample, augment, subsample
from .constraints import ConstraintConfig, ConstraintReport
from .evalkit import EvalRecord, EvalReport, evaluate
from .lm import FluencyScore, NGramLanguageModel, load_lm, perplexity, save_lm, train_lm
from .metrics import (
    BleuScore,
    SemanticScore,
    WerScore,
    corpus_isacrebleu,
    greedy_match_score,
    isacrebleu,
    sentence_bleu,
    wer,
)
from .pipeline import ParaphraseResult, PipelineScorers, SelectionTrace, run
from .scorers import (
    HashedCharNGramEmbedder,
    IdfTable,
    LocalFluencyScorer,
    LocalSemanticScorer,
    RemoteFluencyScorer,
    RemoteScorerError,
    RemoteSemanticScorer,
    ScorerEndpoint,
    build_idf,
)
from .textkit import normalize, tokenize
from .translator import (
    Candidate,
    CandidateSet,
    GenerationConfig,
    HttpTranslator,
    MockTranslator,
    TranslatorEndpoint,
    TranslatorError,
    generate_all,
    generate_direct,
    generate_roundtrip,
)

__version__ = "0.1.0"
