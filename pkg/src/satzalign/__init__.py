"""satzalign: sentence alignment for German / Simple German article pairs."""

from .corpus import (
    AlignmentSet,
    Article,
    ArticlePair,
    Corpus,
    CorpusManifest,
    Match,
    Sentence,
    load_corpus,
    read_alignment_output,
    write_alignment_output,
    write_corpus,
)
from .embeddings import (
    RemoteSentenceVectors,
    SentenceVectorTable,
    TfidfStats,
    WordVectorStore,
    build_tfidf,
    char_ngrams,
    load_word_vectors,
    tfidf_weight,
)
from .evaluation import (
    GroundTruth,
    LabelRecord,
    LabelTask,
    classification_accuracy,
    corpus_statistics,
    sample_for_labelling,
    score_against_ground_truth,
    score_corpus,
)
from .ingest import (
    ExtractionTemplate,
    RuleBasedSplitter,
    UnusableArticleError,
    extract_text,
    flatten_enumerations,
    ingest_corpus,
    split_sentences,
)
from .matching import (
    ThresholdPolicy,
    align_all,
    longest_nondecreasing_subsequence,
    match_mst,
    match_mst_lis,
    run_variant,
    variant_name,
)
from .preprocess import (
    EMBEDDING_PROFILE,
    TFIDF_PROFILE,
    PreprocessProfile,
    normalize_article,
    normalize_sentence,
    strip_gender_suffix,
)
from .similarity import (
    MEASURES,
    SimilarityContext,
    SimilarityMatrix,
    build_matrix,
    sample_similarity_histogram,
    sim_average,
    sim_bipartite,
    sim_bow,
    sim_char4gram,
    sim_cosine,
    sim_cwasa,
    sim_maximum,
    sim_sentence_embedding,
)

__version__ = "0.1.0"

__all__ = [
    "AlignmentSet", "Article", "ArticlePair", "Corpus", "CorpusManifest",
    "Match", "Sentence", "load_corpus", "read_alignment_output",
    "write_alignment_output", "write_corpus",
    "RemoteSentenceVectors", "SentenceVectorTable", "TfidfStats",
    "WordVectorStore", "build_tfidf", "char_ngrams", "load_word_vectors",
    "tfidf_weight",
    "GroundTruth", "LabelRecord", "LabelTask", "classification_accuracy",
    "corpus_statistics", "sample_for_labelling", "score_against_ground_truth",
    "score_corpus",
    "ExtractionTemplate", "RuleBasedSplitter", "UnusableArticleError",
    "extract_text", "flatten_enumerations", "ingest_corpus", "split_sentences",
    "ThresholdPolicy", "align_all", "longest_nondecreasing_subsequence",
    "match_mst", "match_mst_lis", "run_variant", "variant_name",
    "EMBEDDING_PROFILE", "TFIDF_PROFILE", "PreprocessProfile",
    "normalize_article", "normalize_sentence", "strip_gender_suffix",
    "MEASURES", "SimilarityContext", "SimilarityMatrix", "build_matrix",
    "sample_similarity_histogram", "sim_average", "sim_bipartite", "sim_bow",
    "sim_char4gram", "sim_cosine", "sim_cwasa", "sim_maximum",
    "sim_sentence_embedding",
]
