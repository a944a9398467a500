import math
import random
from collections import Counter

import pytest

from themeflow.errors import EmptyClass, UnknownClass, UnknownTerm
from themeflow.lexical import (
    CtfidfTable,
    LexicalOptions,
    TermFrequencyTable,
    bow,
    ctfidf,
    five_year_bucket,
    lemmatize,
    load_lemma_table,
    load_stopwords,
    tokenize,
    top_terms,
    tfidf,
    zipf_profile,
)
from themeflow.synthetic import zipf_tokens

OPTS = LexicalOptions(stopwords=frozenset({"the"}), strip_numeric=True)


class TestTokenize:
    def test_rule_application(self):
        assert tokenize("The Gene expression, 42", OPTS) == ["gene", "expression"]

    def test_bigrams_over_filtered_stream(self):
        opts = LexicalOptions(stopwords=frozenset({"the"}), keep_bigrams=True)
        out = tokenize("The Gene expression, 42", opts)
        assert out == ["gene", "expression", "gene expression"]

    def test_empty_string(self):
        assert tokenize("", OPTS) == []

    def test_numeric_kept_when_flag_off(self):
        opts = LexicalOptions(stopwords=frozenset(), strip_numeric=False)
        assert tokenize("42 samples", opts) == ["42", "samples"]

    def test_inner_hyphen_preserved(self):
        assert tokenize("drug-delivery systems", LexicalOptions(stopwords=frozenset())) == [
            "drug-delivery",
            "systems",
        ]


def reference_tokenize(text, stopwords, keep_bigrams, strip_numeric):
    """Independent re-implementation of the tokenizer rule list."""
    edge = set("\"'`.,;:!?()[]{}<>~^*_|/\\«»“”‘’–—=+%&#@")
    words = []
    current = []
    for ch in text.lower() + " ":
        if ch.isspace():
            if current:
                words.append("".join(current))
                current = []
        else:
            current.append(ch)
    out = []
    for w in words:
        start, end = 0, len(w)
        while start < end and w[start] in edge:
            start += 1
        while end > start and w[end - 1] in edge:
            end -= 1
        token = w[start:end]
        if not token or token in stopwords:
            continue
        if strip_numeric and token[0].isdigit() and all(c.isdigit() or c in ".,:%/-" for c in token):
            continue
        out.append(token)
    if keep_bigrams:
        return out + [out[i] + " " + out[i + 1] for i in range(len(out) - 1)]
    return out


def test_tokenizer_matches_reference_oracle():
    rng = random.Random(31)
    pool = ["Gene", "the", "cell-wall", "42", "3.5%", "flux,", "(tissue)", "Robots!", "α-helix", "of", "Matrix."]
    stop = load_stopwords()
    for keep_bigrams in (False, True):
        opts = LexicalOptions(keep_bigrams=keep_bigrams)
        for _ in range(100):
            sentence = " ".join(rng.choice(pool) for _ in range(rng.randint(0, 12)))
            assert tokenize(sentence, opts) == reference_tokenize(sentence, stop, keep_bigrams, True)


class TestLemmatize:
    def test_inflected_family_maps_to_base(self):
        assert lemmatize("engineered") == "engineer"
        assert lemmatize("engineering") == "engineer"
        assert lemmatize("engineers") == "engineer"

    def test_lemma_passes_through(self):
        assert lemmatize("dislocation") == "dislocation"

    def test_unknown_never_truncated(self):
        assert lemmatize("zzgrobble") == "zzgrobble"

    def test_idempotent_over_whole_table(self):
        table = load_lemma_table()
        for form, base in table.items():
            assert lemmatize(base, table) == base, f"{form} -> {base} is not a fixpoint"


class TestBow:
    def test_simple_counts(self):
        opts = LexicalOptions(stopwords=frozenset())
        table = bow(["a b", "b c"], opts)
        assert table.counts == Counter({"b": 2, "a": 1, "c": 1})
        assert table.total_tokens == 4

    def test_single_doc_repeats(self):
        table = bow(["xum xum xum"], LexicalOptions(stopwords=frozenset()))
        assert table.counts == Counter({"xum": 3})

    def test_counts_are_lemmatized(self):
        table = bow(["engineered engineering structure structures"], LexicalOptions(stopwords=frozenset()))
        assert table.counts == Counter({"engineer": 2, "structure": 2})

    def test_conservation(self):
        docs = ["cells grow fast", "cells divide", "the tissue grows"]
        table = bow(docs)
        assert sum(table.counts.values()) == table.total_tokens

    def test_zipf_generator_frequencies(self):
        tokens, probs, vocab = zipf_tokens(50_000, vocab_size=800, exponent=1.0, seed=12)
        docs = [" ".join(tokens[i : i + 100]) for i in range(0, len(tokens), 100)]
        table = bow(docs, LexicalOptions(stopwords=frozenset(), strip_numeric=False))
        assert table.total_tokens == 50_000
        profile = zipf_profile(table)
        for e in profile.entries[:20]:
            expected = probs[e.rank - 1] * 50_000
            assert abs(e.frequency - expected) / expected < 0.10


class TestZipfProfile:
    def test_cutoff_at_exact_boundary(self):
        table = TermFrequencyTable(counts=Counter({"a": 4, "b": 1}), total_tokens=5)
        profile = zipf_profile(table)
        assert profile.pareto_cutoff_rank == 1  # 4/5 is exactly 80%

    def test_uniform_five_terms(self):
        table = TermFrequencyTable(counts=Counter({c: 1 for c in "abcde"}), total_tokens=5)
        assert zipf_profile(table).pareto_cutoff_rank == 4

    def test_ties_broken_lexicographically(self):
        table = TermFrequencyTable(counts=Counter({"b": 2, "a": 2, "c": 1}), total_tokens=5)
        profile = zipf_profile(table)
        assert [e.term for e in profile.entries] == ["a", "b", "c"]
        assert [e.rank for e in profile.entries] == [1, 2, 3]

    def test_ranking_is_permutation_of_vocabulary(self):
        rng = random.Random(3)
        counts = Counter({f"w{i}": rng.randint(1, 40) for i in range(200)})
        profile = zipf_profile(TermFrequencyTable(counts=counts, total_tokens=sum(counts.values())))
        assert sorted(e.term for e in profile.entries) == sorted(counts)
        assert [e.rank for e in profile.entries] == list(range(1, 201))

    def test_corpus_scale_cutoff(self):
        # frozen decaying-frequency table: 6,451 terms, cutoff lands at rank 1,371
        counts = Counter(
            {f"w{r:05d}": max(1, round(5600 / r**0.95)) for r in range(1, 6452)}
        )
        table = TermFrequencyTable(counts=counts, total_tokens=sum(counts.values()))
        profile = zipf_profile(table)
        assert profile.vocabulary_size == 6451
        assert profile.pareto_cutoff_rank == 1371
        assert profile.pareto_fraction * 100 == pytest.approx(21.3, abs=0.05)

    def test_cutoff_minimality(self):
        rng = random.Random(9)
        counts = Counter({f"w{i}": rng.randint(1, 100) for i in range(150)})
        table = TermFrequencyTable(counts=counts, total_tokens=sum(counts.values()))
        profile = zipf_profile(table)
        cum = 0
        for e in profile.entries[: profile.pareto_cutoff_rank - 1]:
            cum += e.frequency
        assert cum < 0.80 * table.total_tokens
        assert cum + profile.entries[profile.pareto_cutoff_rank - 1].frequency >= 0.80 * table.total_tokens

    def test_normalized_column(self):
        table = TermFrequencyTable(counts=Counter({"a": 10, "b": 5}), total_tokens=15)
        profile = zipf_profile(table)
        assert profile.entries[0].normalized == 1.0
        assert profile.entries[1].normalized == 0.5


class TestTfidf:
    def test_term_in_every_doc_is_zero(self):
        corpus = [["x", "y"], ["x"], ["x", "z"]]
        assert tfidf("x", corpus[0], corpus) == 0.0

    def test_arithmetic(self):
        corpus = [["t", "t"]] + [["t"]] * 4 + [["u"]] * 5
        assert tfidf("t", corpus[0], corpus) == pytest.approx(2 * math.log(2))

    def test_unknown_term(self):
        with pytest.raises(UnknownTerm):
            tfidf("ghost", ["a"], [["a"]])

    def test_matches_bruteforce_oracle(self):
        rng = random.Random(7)
        for _ in range(20):
            corpus = [
                [f"w{rng.randint(0, 8)}" for _ in range(rng.randint(1, 12))]
                for _ in range(rng.randint(2, 10))
            ]
            doc = corpus[0]
            term = rng.choice([t for tokens in corpus for t in tokens])
            expected_df = sum(1 for tokens in corpus if term in tokens)
            expected = doc.count(term) * math.log(len(corpus) / expected_df)
            assert tfidf(term, doc, corpus) == pytest.approx(expected, abs=1e-12)


def ctfidf_oracle(class_documents, options):
    """Independent brute-force evaluation of the class-based scoring formula."""
    per_doc_tokens = []
    class_tokens = {}
    for name, docs in class_documents.items():
        toks = []
        for d in docs:
            t = tokenize(d, options)
            per_doc_tokens.append(t)
            toks.extend(t)
        class_tokens[name] = toks
    n_docs = len(per_doc_tokens)
    avg = sum(len(t) for t in class_tokens.values()) / len(class_tokens)
    scores = {}
    for name, toks in class_tokens.items():
        scores[name] = {}
        for term in set(toks):
            df = sum(1 for t in per_doc_tokens if term in t)
            if df < options.min_doc_freq or df / n_docs > options.max_doc_fraction:
                continue
            tf = toks.count(term)
            scores[name][term] = math.sqrt(tf) * math.log(1 + avg / df)
    return scores


class TestCtfidf:
    def test_single_class_direct_evaluation(self):
        # one class of 10 tokens, the scored term appears once, df=1 -> sqrt(1)*ln(11)
        opts = LexicalOptions(stopwords=frozenset(), min_doc_freq=1, max_doc_fraction=1.0)
        docs = ["zeta alpha beta gamma delta epsilon eta theta iota kappa"]
        table = ctfidf({"c": docs}, opts)
        assert table.avg_tokens_per_class == 10
        assert table.scores["c"]["zeta"] == pytest.approx(math.sqrt(1) * math.log(11))

    def test_ubiquitous_term_filtered(self):
        opts = LexicalOptions(stopwords=frozenset(), min_doc_freq=1, max_doc_fraction=0.80)
        classes = {
            "a": ["common alpha", "common alphb"],
            "b": ["common beta", "common betb"],
        }
        table = ctfidf(classes, opts)
        assert "common" not in table.scores["a"]
        assert "alpha" in table.scores["a"]

    def test_min_doc_freq_filter(self):
        opts = LexicalOptions(stopwords=frozenset(), min_doc_freq=2)
        table = ctfidf({"a": ["solo duo", "duo"], "b": ["other words"]}, opts)
        assert "solo" not in table.scores["a"]
        assert "duo" in table.scores["a"]

    def test_matches_bruteforce_oracle_on_random_corpora(self):
        rng = random.Random(13)
        vocab = [f"term{i}" for i in range(30)]
        for trial in range(25):
            opts = LexicalOptions(
                stopwords=frozenset(),
                keep_bigrams=bool(trial % 2),
                min_doc_freq=rng.choice([1, 2]),
                max_doc_fraction=rng.choice([0.8, 1.0]),
            )
            classes = {
                f"c{ci}": [
                    " ".join(rng.choice(vocab) for _ in range(rng.randint(3, 25)))
                    for _ in range(rng.randint(1, 12))
                ]
                for ci in range(rng.randint(1, 5))
            }
            table = ctfidf(classes, opts)
            oracle = ctfidf_oracle(classes, opts)
            assert set(table.scores) == set(oracle)
            for name in oracle:
                assert set(table.scores[name]) == set(oracle[name])
                for term, expected in oracle[name].items():
                    got = table.scores[name][term]
                    assert got == pytest.approx(expected, rel=1e-9)

    def test_document_order_invariance(self):
        opts = LexicalOptions(stopwords=frozenset(), min_doc_freq=1)
        docs = ["aa bb", "bb cc", "cc dd aa"]
        t1 = ctfidf({"c": docs}, opts)
        t2 = ctfidf({"c": list(reversed(docs))}, opts)
        assert t1.scores == t2.scores

    def test_score_monotone_in_tf(self):
        opts = LexicalOptions(stopwords=frozenset(), min_doc_freq=1, max_doc_fraction=1.0)
        low = ctfidf({"c": ["dup solo"]}, opts).scores["c"]["dup"]
        high = ctfidf({"c": ["dup dup solo"]}, opts).scores["c"]["dup"]
        assert high > low

    def test_df_never_exceeds_document_count(self):
        opts = LexicalOptions(stopwords=frozenset(), min_doc_freq=1)
        table = ctfidf({"a": ["x y", "x"], "b": ["x z"]}, opts)
        assert all(d <= table.n_documents for d in table.df.values())

    def test_empty_class_raises(self):
        with pytest.raises(EmptyClass):
            ctfidf({"a": []})


class TestTopTerms:
    def test_single_term_class(self):
        opts = LexicalOptions(stopwords=frozenset(), min_doc_freq=1, max_doc_fraction=1.0)
        table = ctfidf({"c": ["lonely"]}, opts)
        assert [t for t, _ in top_terms(table, "c", 5)] == ["lonely"]

    def test_n_larger_than_vocabulary(self):
        opts = LexicalOptions(stopwords=frozenset(), min_doc_freq=1, max_doc_fraction=1.0)
        table = ctfidf({"c": ["aa bb cc"]}, opts)
        assert len(top_terms(table, "c", 99)) == 3

    def test_planted_dominant_term_ranks_first(self):
        opts = LexicalOptions(stopwords=frozenset(), min_doc_freq=1, max_doc_fraction=1.0)
        classes = {
            "a": ["alpha alpha alpha filler one", "alpha alpha filler two"],
            "b": ["beta filler one", "gamma filler two"],
        }
        table = ctfidf(classes, opts)
        assert top_terms(table, "a", 1)[0][0] == "alpha"

    def test_unknown_class(self):
        opts = LexicalOptions(stopwords=frozenset(), min_doc_freq=1)
        with pytest.raises(UnknownClass):
            top_terms(ctfidf({"c": ["x"]}, opts), "nope", 3)


def test_five_year_buckets_are_half_open():
    assert five_year_bucket(2005) == "2005-2009"
    assert five_year_bucket(2009) == "2005-2009"
    assert five_year_bucket(2010) == "2010-2014"
    assert five_year_bucket(2024) == "2020-2024"
