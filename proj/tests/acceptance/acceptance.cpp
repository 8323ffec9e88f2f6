// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any FAIL.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qzero/classify.hpp"
#include "qzero/cli.hpp"
#include "qzero/corpus.hpp"
#include "qzero/eval.hpp"
#include "qzero/index.hpp"
#include "qzero/pipeline.hpp"
#include "qzero/reformulate.hpp"
#include "qzero/remote_embedder.hpp"
#include "qzero/text.hpp"
#include "qzero/tokenizer.hpp"
#include "test_support.hpp"

using namespace qzero;
using nlohmann::json;
using qzero::testing::fixture;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;

    void fail(const std::string& why) {
        if (pass) detail = why;
        pass = false;
    }
};

int g_failures = 0;

void criterion(const std::string& name, const std::function<Outcome()>& body) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o.pass = false;
        o.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!o.pass) ++g_failures;
    std::printf("[%s] %s: %s (%.2fs)\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str(), secs);
    std::fflush(stdout);
}

std::string bench(const std::string& f) { return fixture("bench/" + f).string(); }

std::string run_cli(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    if (qzero::cli::run(args, out, err) != 0) throw std::runtime_error("qzero " + args[0] + " failed: " + err.str());
    return out.str();
}

std::vector<json> json_lines(const std::string& s) {
    std::vector<json> out;
    std::istringstream in(s);
    std::string line;
    while (std::getline(in, line)) out.push_back(json::parse(line));
    return out;
}

// ---------------------------------------------------------------------------
// BM25 against a scorer that evaluates the formula for every document.

Outcome bm25_oracle() {
    std::mt19937_64 rng(1001);
    constexpr double k1 = 1.2, b = 0.75;
    std::size_t queries = 0, compared = 0;
    double worst = 0.0;
    Outcome o;
    for (int c = 0; c < 25 && o.pass; ++c) {
        const int n = std::uniform_int_distribution<int>(1, 50)(rng);
        const int vocab = std::uniform_int_distribution<int>(5, 200)(rng);
        std::vector<Document> docs;
        std::vector<std::vector<std::string>> toks;
        for (int i = 0; i < n; ++i) {
            std::vector<std::string> t;
            std::string content;
            for (int j = std::uniform_int_distribution<int>(1, 40)(rng); j > 0; --j) {
                t.push_back("w" + std::to_string(std::uniform_int_distribution<int>(0, vocab - 1)(rng)));
                content += t.back() + ' ';
            }
            // Ids chosen so that lexicographic and insertion order disagree.
            docs.push_back({"id" + std::to_string((i * 37) % 101) + "-" + std::to_string(i), "", content, {"C"}});
            toks.push_back(std::move(t));
        }
        const auto index = build_index(docs, {}, {k1, b});
        double avgdl = 0;
        for (const auto& t : toks) avgdl += static_cast<double>(t.size());
        avgdl /= n;

        for (int q = 0; q < 100 && o.pass; ++q, ++queries) {
            std::map<std::string, int> qtf;
            std::string text;
            for (int j = std::uniform_int_distribution<int>(1, 6)(rng); j > 0; --j) {
                const auto term = "w" + std::to_string(std::uniform_int_distribution<int>(0, vocab + 20)(rng));
                ++qtf[term];
                text += term + ' ';
            }
            std::vector<std::pair<std::string, double>> expected;
            for (int d = 0; d < n; ++d) {
                double s = 0;
                for (const auto& [term, mult] : qtf) {
                    const double tf = static_cast<double>(std::count(toks[d].begin(), toks[d].end(), term));
                    if (tf == 0) continue;
                    double df = 0;
                    for (const auto& t : toks) df += std::find(t.begin(), t.end(), term) != t.end();
                    const double idf = std::log(1.0 + (n - df + 0.5) / (df + 0.5));
                    s += mult * idf * tf * (k1 + 1) / (tf + k1 * (1 - b + b * static_cast<double>(toks[d].size()) / avgdl));
                }
                if (s > 0) expected.emplace_back(docs[d].doc_id, s);
            }
            std::sort(expected.begin(), expected.end(), [](const auto& x, const auto& y) {
                return x.second != y.second ? x.second > y.second : x.first < y.first;
            });
            const std::size_t k = std::uniform_int_distribution<std::size_t>(1, 60)(rng);
            if (expected.size() > k) expected.resize(k);
            const auto hits = search(index, text, k);
            if (hits.size() != expected.size()) {
                o.fail("corpus " + std::to_string(c) + " query '" + text + "': " + std::to_string(hits.size()) +
                       " hits, expected " + std::to_string(expected.size()));
                break;
            }
            for (std::size_t i = 0; i < hits.size(); ++i, ++compared) {
                worst = std::max(worst, std::abs(hits[i].score - expected[i].second));
                if (hits[i].doc_id != expected[i].first || hits[i].rank != i + 1 ||
                    std::abs(hits[i].score - expected[i].second) > 1e-9) {
                    o.fail("corpus " + std::to_string(c) + " query '" + text + "' rank " + std::to_string(i + 1) +
                           ": got " + hits[i].doc_id + ", expected " + expected[i].first);
                    break;
                }
            }
        }
    }
    if (o.pass) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "25 corpora, %zu queries, %zu ranked scores, max |diff| %.1e <= 1e-9", queries,
                      compared, worst);
        o.detail = buf;
    }
    return o;
}

// ---------------------------------------------------------------------------
// Weighted keyword scoring against a term-by-term evaluation.

Outcome keyword_scoring_oracle() {
    std::mt19937_64 rng(2002);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    std::size_t ties = 0;
    double worst = 0.0;
    Outcome o;
    for (int inst = 0; inst < 500 && o.pass; ++inst) {
        const int dim = std::uniform_int_distribution<int>(1, 8)(rng);
        const int nk = std::uniform_int_distribution<int>(1, 10)(rng);
        const int nl = std::uniform_int_distribution<int>(2, 6)(rng);
        const auto random_vec = [&] {
            EmbeddingVector v(dim);
            do {
                for (int d = 0; d < dim; ++d) v(d) = unit(rng);
            } while (v.norm() < 1e-6);
            return (v * (std::uniform_real_distribution<double>(0.5, 2.0)(rng) / v.norm())).eval();
        };
        StaticVectorStore store(dim);
        WeightedKeywordQuery query;
        std::vector<EmbeddingVector> kv;
        for (int k = 0; k < nk; ++k) {
            kv.push_back(random_vec());
            store.add("kw" + std::to_string(k), kv.back());
            query.entries.push_back({"kw" + std::to_string(k), std::uniform_int_distribution<std::size_t>(1, 200)(rng)});
        }
        // A few keywords missing from the store.
        if (inst % 7 == 0) query.entries.push_back({"missing" + std::to_string(inst), 5});

        std::vector<std::string> names;
        std::vector<EmbeddingVector> lv;
        const bool force_tie = inst % 4 == 0;
        for (int l = 0; l < nl; ++l) {
            names.push_back("label" + std::to_string(l));
            // Forced ties: a later label copies an earlier label's vector exactly.
            lv.push_back(force_tie && l == nl - 1 ? lv[std::uniform_int_distribution<int>(0, l - 1)(rng)] : random_vec());
            store.add(names.back(), lv.back());
        }
        if (force_tie) {
            // Make the duplicated vector the winner so the tie decides the prediction.
            const auto& dup = lv.back();
            for (std::size_t k = 0; k < kv.size(); ++k) kv[k] = dup;
            StaticVectorStore tied(dim);
            for (std::size_t k = 0; k < kv.size(); ++k) tied.add("kw" + std::to_string(k), kv[k]);
            for (int l = 0; l < nl; ++l) tied.add(names[l], lv[l]);
            store = std::move(tied);
        }

        std::vector<double> expected(nl, 0.0);
        for (int l = 0; l < nl; ++l) {
            for (std::size_t k = 0; k < kv.size(); ++k) {
                const double sim = kv[k].dot(lv[l]) / (kv[k].norm() * lv[l].norm());
                expected[l] += sim * static_cast<double>(query.entries[k].weight);
            }
        }
        int best = 0;
        for (int l = 1; l < nl; ++l) {
            if (expected[l] > expected[best]) best = l;
        }
        int winners = 0;
        for (int l = 0; l < nl; ++l) winners += expected[l] == expected[best];
        if (winners > 1) ++ties;

        const auto got = classify_static(query, LabelSet(names), store);
        for (int l = 0; l < nl; ++l) {
            worst = std::max(worst, std::abs(got.table.scores[l] - expected[l]));
            if (std::abs(got.table.scores[l] - expected[l]) > 1e-9) {
                o.fail("instance " + std::to_string(inst) + " label " + names[l] + " score differs");
            }
        }
        if (got.predicted != names[best]) {
            o.fail("instance " + std::to_string(inst) + ": predicted " + got.predicted + ", expected " + names[best]);
        }
    }
    if (o.pass) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "500 instances (%zu exact ties), max |diff| %.1e <= 1e-9, best_class exact", ties,
                      worst);
        o.detail = buf;
    }
    return o;
}

// ---------------------------------------------------------------------------
// Reformulation contract over random article lists.

Outcome reformulation_properties() {
    const auto gpt2 = Gpt2Tokenizer::from_directory(qzero::testing::gpt2_dir());
    std::mt19937_64 rng(3003);
    const std::vector<std::string> vocab = {
        "American", "television", "talk", "shows", "1990s", "births", "Living", "people", "of", "from",
        "the", "São", "Paulo", "Films", "about", "Indians", "Cuisine", "Ελλάδα", "Москва", "日本",
        "C++", "don't", "(band)", "players", "2010s", "x", "Politicians", "&", "finance", "Œuvre"};
    ExtractorConfig nounlite;
    ExtractorConfig caps;
    caps.strategy = ExtractionStrategy::capitalization;
    std::size_t truncated = 0, with_duplicates = 0;
    Outcome o;
    for (int c = 0; c < 1000 && o.pass; ++c) {
        const auto tag = "case " + std::to_string(c) + ": ";
        const int n = std::uniform_int_distribution<int>(0, 50)(rng);
        std::vector<RankedArticle> articles;
        std::vector<std::string> pool;
        for (int r = 1; r <= n; ++r) {
            std::vector<std::string> cats;
            for (int k = std::uniform_int_distribution<int>(0, 7)(rng); k > 0; --k) {
                if (!pool.empty() && rng() % 4 == 0) {
                    cats.push_back(pool[rng() % pool.size()]);
                    continue;
                }
                std::string cat;
                for (int w = std::uniform_int_distribution<int>(1, 5)(rng); w > 0; --w) {
                    cat += (cat.empty() ? "" : " ") + vocab[rng() % vocab.size()];
                }
                pool.push_back(cat);
                cats.push_back(cat);
            }
            articles.push_back({"d" + std::to_string(r), 1.0, static_cast<std::size_t>(r), cats});
        }
        std::shuffle(articles.begin(), articles.end(), rng);

        // Brute-force expectation: categories in rank order, duplicates kept.
        auto by_rank = articles;
        std::sort(by_rank.begin(), by_rank.end(), [](const auto& a, const auto& b) { return a.rank < b.rank; });
        std::vector<std::string> flat;
        std::vector<std::size_t> flat_rank;
        for (const auto& a : by_rank) {
            for (const auto& cat : a.categories) {
                flat.push_back(cat);
                flat_rank.push_back(a.rank);
            }
        }
        std::string joined;
        for (const auto& cat : flat) joined += (joined.empty() ? "" : " ") + cat;
        if (std::set<std::string>(flat.begin(), flat.end()).size() < flat.size()) ++with_duplicates;

        const auto sq = make_sentence_query(articles, *gpt2, kDefaultTokenBudget);
        if (sq.token_count > kDefaultTokenBudget) o.fail(tag + "token_count above budget");
        if (sq.token_count != gpt2->count(sq.text)) o.fail(tag + "token_count differs from tokenizer count");
        if (joined.rfind(sq.text, 0) != 0) o.fail(tag + "text is not a prefix of the rank-ordered concatenation");

        // Exact boundary: the longest id prefix whose decoded text re-encodes within budget.
        const auto ids = gpt2->encode(joined);
        std::string boundary = joined;
        if (ids.size() > kDefaultTokenBudget) {
            ++truncated;
            for (std::size_t m = kDefaultTokenBudget; m > 0; --m) {
                auto head = gpt2->decode(std::span<const int>(ids.data(), m));
                head.resize(text::complete_utf8_prefix(head));
                if (gpt2->count(head) <= kDefaultTokenBudget) {
                    boundary = head;
                    break;
                }
            }
        }
        if (sq.text != boundary) o.fail(tag + "cut is not at the token boundary");

        // Grouping: source ranks are the categories that start inside the text, in order.
        std::size_t pos = 0, included = 0;
        for (std::size_t i = 0; i < flat.size() && pos < sq.text.size(); ++i, ++included) pos += flat[i].size() + 1;
        if (sq.source_ranks.size() != included) {
            o.fail(tag + "source_ranks size " + std::to_string(sq.source_ranks.size()) + ", expected " +
                   std::to_string(included));
        } else {
            for (std::size_t i = 0; i < included; ++i) {
                if (sq.source_ranks[i].rank != flat_rank[i] || sq.source_ranks[i].category != flat[i]) {
                    o.fail(tag + "source_ranks out of rank order");
                    break;
                }
            }
        }

        // Weights: brute-force counts under each built-in strategy.
        for (const auto* cfg : {&nounlite, &caps}) {
            std::map<std::string, std::size_t> expected;
            for (const auto& cat : flat) {
                const auto pieces = text::split_alnum(cat);
                for (std::size_t i = 0; i < pieces.size(); ++i) {
                    std::string t(pieces[i]);
                    if (cfg == &caps) {
                        std::size_t p = 0;
                        if (i > 0 && text::is_upper(text::decode_next(t, p))) ++expected[t];
                    } else {
                        const auto lower = text::to_lower(t);
                        std::size_t chars = 0;
                        for (std::size_t p = 0; p < lower.size(); ++chars) text::decode_next(lower, p);
                        if (chars >= 2 && !english_stopwords().contains(lower)) ++expected[lower];
                    }
                }
            }
            const auto got = extract_keywords(flat, *cfg);
            if (got.size() != expected.size()) {
                o.fail(tag + "keyword set size differs");
                break;
            }
            for (std::size_t i = 0; i < got.size(); ++i) {
                const auto it = expected.find(got[i].keyword);
                if (it == expected.end() || it->second != got[i].weight) {
                    o.fail(tag + "weight of '" + got[i].keyword + "' differs from brute-force count");
                    break;
                }
                if (i > 0 && (got[i - 1].weight < got[i].weight ||
                              (got[i - 1].weight == got[i].weight && got[i - 1].keyword >= got[i].keyword))) {
                    o.fail(tag + "keywords not ordered by weight desc, keyword asc");
                    break;
                }
            }
            if (!flat.empty() && cfg == &nounlite) {
                try {
                    const auto q = make_keyword_query(articles, *cfg);
                    if (q.entries != got) o.fail(tag + "keyword query differs from extraction over all categories");
                } catch (const Error&) {
                    if (!got.empty()) o.fail(tag + "keyword query failed despite keywords");
                }
            }
        }
    }
    if (o.pass) {
        o.detail = "1000 cases (" + std::to_string(truncated) + " cut at 512 GPT-2 tokens, " +
                   std::to_string(with_duplicates) + " with repeated categories), zero failures";
    }
    return o;
}

// ---------------------------------------------------------------------------
// Synthetic implicit-query benchmark.

struct Bench {
    InvertedIndex index;
    StaticVectorStore store;
    LabelSet labels;
    std::vector<LabeledExample> examples;
    json expected;

    static Bench load() {
        std::ifstream corpus(bench("corpus.jsonl"));
        std::ifstream expected_in(bench("expected.json"));
        const auto labels = LabelSet::load(std::filesystem::path(bench("labels.txt")));
        return {build_index(ingest(corpus)), StaticVectorStore::load(std::filesystem::path(bench("vectors.txt"))), labels,
                load_dataset(std::filesystem::path(bench("dataset.tsv")), labels), json::parse(expected_in)};
    }
};

Outcome directional_benefit(const Bench& b) {
    const Bm25Retriever retriever(b.index);
    const Pipeline pipeline(PipelineMode::keywords, {&retriever, nullptr, nullptr, &b.store}, {});
    EvalOptions opts;
    opts.dataset_name = "bench";
    const auto qz = evaluate(b.examples, b.labels, [&](const RawQuery& q) { return pipeline.classify(q, b.labels); }, opts);
    const auto base =
        evaluate(b.examples, b.labels, [&](const RawQuery& q) { return pipeline.classify_baseline(q, b.labels); }, opts);

    Outcome o;
    // Per-query agreement with the brute-force reference predictions.
    const auto& ref = b.expected.at("queries");
    for (std::size_t i = 0; i < b.examples.size(); ++i) {
        const RawQuery q(b.examples[i].text);
        if (pipeline.classify(q, b.labels).predicted != ref[i].at("qzero").get<std::string>()) {
            o.fail("query " + std::to_string(i + 1) + " QZero prediction differs from the reference");
        }
        if (pipeline.classify_baseline(q, b.labels).predicted != ref[i].at("baseline").get<std::string>()) {
            o.fail("query " + std::to_string(i + 1) + " baseline prediction differs from the reference");
        }
    }
    char buf[200];
    std::snprintf(buf, sizeof buf, "baseline %.2f%% (<= 50), QZero %.2f%% (>= 80), rendered comparison \"%s\" on %zu queries",
                  base.accuracy * 100, qz.accuracy * 100, compare(base, qz).render().c_str(), b.examples.size());
    if (!(base.accuracy <= 0.5)) o.fail(std::string("baseline too high: ") + buf);
    if (!(qz.accuracy >= 0.8)) o.fail(std::string("QZero too low: ") + buf);
    if (!(qz.accuracy > base.accuracy)) o.fail(std::string("no improvement: ") + buf);
    if (o.pass) o.detail = buf;
    return o;
}

Outcome sweep_mechanics(const Bench& b) {
    const Bm25Retriever retriever(b.index);
    std::vector<std::unique_ptr<Pipeline>> keep;
    const auto make = [&](std::size_t k) -> Classifier {
        PipelineOptions opts;
        opts.top_k = k;
        keep.push_back(std::make_unique<Pipeline>(PipelineMode::keywords,
                                                  PipelineComponents{&retriever, nullptr, nullptr, &b.store}, opts));
        const Pipeline* p = keep.back().get();
        return [p, &b](const RawQuery& q) { return p->classify(q, b.labels); };
    };
    EvalOptions opts;
    opts.dataset_name = "bench";
    const auto first = sweep_k(b.examples, b.labels, make, kDefaultSweepKs, opts);
    const auto second = sweep_k(b.examples, b.labels, make, kDefaultSweepKs, opts);

    Outcome o;
    if (first.points.size() != 5) o.fail("expected 5 points, got " + std::to_string(first.points.size()));
    std::ostringstream a, c;
    write_sweep_tsv(a, first);
    write_sweep_tsv(c, second);
    if (a.str() != c.str()) o.fail("sweep differs between runs");
    const auto& ref = b.expected.at("sweep");
    std::string curve;
    for (std::size_t i = 0; i < first.points.size() && o.pass; ++i) {
        const auto& p = first.points[i];
        if (!p.accuracy) {
            o.fail("k=" + std::to_string(p.k) + " failed: " + p.error);
            break;
        }
        if (p.k != ref[i].at("k").get<std::size_t>() || *p.accuracy != ref[i].at("accuracy").get<double>()) {
            o.fail("k=" + std::to_string(p.k) + " differs from the reference sweep");
        }
        char buf[32];
        std::snprintf(buf, sizeof buf, "%s%zu:%.2f", i ? " " : "", p.k, *p.accuracy);
        curve += buf;
    }
    if (o.pass) o.detail = "5 points {" + curve + "}, identical across re-runs";
    return o;
}

Outcome determinism() {
    qzero::testing::TempDir tmp;
    Outcome o;
    for (const char* name : {"a", "b"}) run_cli({"index", "--corpus", bench("corpus.jsonl"), "--index", (tmp / name).string()});
    std::size_t bytes = 0;
    for (const char* f : {"manifest.json", "docs.bin", "postings.bin"}) {
        const auto x = qzero::testing::read_file(tmp / "a" / f);
        const auto y = qzero::testing::read_file(tmp / "b" / f);
        bytes += x.size();
        if (x != y) o.fail(std::string(f) + " differs between two index builds");
    }
    const auto eval_out = run_cli({"eval", "--index", (tmp / "a").string(), "--provider", "static:" + bench("vectors.txt"),
                                   "--labels", bench("labels.txt"), "--dataset", bench("dataset.tsv"), "--runs", "3"});
    const auto report = json_lines(eval_out).at(0);
    const auto accs = report.at("run_accuracies").get<std::vector<double>>();
    if (accs.size() != 3 || accs[0] != accs[1] || accs[1] != accs[2]) o.fail("run accuracies differ");
    if (report.at("accuracy_variance").get<double>() != 0.0) o.fail("variance is not 0");
    if (report.at("accuracy_mean_over_runs").get<double>() != accs.at(0)) o.fail("mean differs from single run");
    if (o.pass) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "index payloads byte-identical (%zu bytes); eval runs=3 accuracies %.2f/%.2f/%.2f, variance 0",
                      bytes, accs[0], accs[1], accs[2]);
        o.detail = buf;
    }
    return o;
}

Outcome explain_shape(const Bench& b) {
    qzero::testing::TempDir tmp;
    run_cli({"index", "--corpus", bench("corpus.jsonl"), "--index", (tmp / "idx").string()});
    std::vector<std::string> args = {"explain", "--index", (tmp / "idx").string(), "--provider",
                                     "static:" + bench("vectors.txt"), "--labels", bench("labels.txt")};
    for (const auto& ex : b.examples) {
        args.push_back("--query");
        args.push_back(ex.text);
    }
    const auto recs = json_lines(run_cli(args));
    Outcome o;
    if (recs.size() != b.examples.size()) o.fail("expected one record per query");
    const auto& ref = b.expected.at("queries");
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < recs.size() && o.pass; ++i) {
        const auto tag = "query " + std::to_string(i + 1) + ": ";
        const auto& ex = recs[i].at("explain");
        std::size_t prev = 0;
        for (const auto& c : ex.at("categories")) {
            const auto rank = c.at("rank").get<std::size_t>();
            if (rank < std::max<std::size_t>(prev, 1)) o.fail(tag + "categories not in rank order");
            prev = rank;
        }
        // Categories must be the retrieved articles' categories, expanded in rank order.
        std::vector<std::string> expected_cats;
        for (const auto& id : ref[i].at("retrieved")) {
            const auto it = std::find_if(b.index.docs().begin(), b.index.docs().end(),
                                         [&](const IndexedDoc& d) { return d.doc_id == id.get<std::string>(); });
            for (const auto& c : it->categories) expected_cats.push_back(c);
        }
        if (expected_cats.size() > kExplainCategories) expected_cats.resize(kExplainCategories);
        if (ex.at("categories").size() != expected_cats.size()) {
            o.fail(tag + "category count differs");
        } else {
            for (std::size_t k = 0; k < expected_cats.size(); ++k) {
                if (ex.at("categories")[k].at("category") != expected_cats[k]) o.fail(tag + "category list differs");
            }
        }
        const auto& kws = ex.at("keywords");
        const auto& ref_kws = ref[i].at("top_keywords");
        if (kws.size() != ref_kws.size() || kws.size() > 10) {
            o.fail(tag + "keyword count differs");
            break;
        }
        for (std::size_t k = 0; k < kws.size(); ++k, ++pairs) {
            if (kws[k].at("keyword") != ref_kws[k][0] || kws[k].at("weight") != ref_kws[k][1]) {
                o.fail(tag + "keyword (" + kws[k].at("keyword").get<std::string>() + ", " +
                       std::to_string(kws[k].at("weight").get<std::size_t>()) + ") differs from the reference count");
                break;
            }
        }
    }
    if (o.pass) {
        o.detail = std::to_string(recs.size()) + " queries, categories rank-ordered, " + std::to_string(pairs) +
                   " (keyword, count) pairs equal to the reference counts";
    }
    return o;
}

// ---------------------------------------------------------------------------
// Remote client against a scripted server.

Outcome remote_conformance() {
    constexpr std::size_t dim = 12;
    qzero::testing::MockEmbeddingServer server(qzero::testing::MockEmbeddingServer::shuffled(dim));
    RemoteEmbedderConfig config;
    config.base_url = server.base_url();
    config.model_name = "canned";
    config.batch_size = 5;
    config.max_in_flight = 3;
    config.initial_backoff = std::chrono::milliseconds(1);
    std::vector<std::string> texts;
    for (int i = 0; i < 23; ++i) texts.push_back("canned text " + std::to_string(i * 7919 % 101));
    const auto out = embed_texts_remote(config, texts);

    Outcome o;
    if (out.size() != texts.size()) o.fail("output count differs from input count");
    double worst = 0.0;
    for (std::size_t i = 0; i < out.size() && o.pass; ++i) {
        if (out[i].size() != static_cast<Eigen::Index>(dim)) o.fail("non-uniform dimension");
        const auto expected = qzero::testing::MockEmbeddingServer::canned_vector(texts[i], dim);
        for (std::size_t d = 0; d < dim; ++d) {
            if (out[i](static_cast<Eigen::Index>(d)) != expected[d]) o.fail("item " + std::to_string(i) + " not restored to input order");
        }
        worst = std::max(worst, std::abs(cosine(out[i], out[i]) - 1.0));
    }
    if (worst > 1e-12) o.fail("cosine(self, self) deviates from 1 by more than 1e-12");

    qzero::testing::MockEmbeddingServer ragged([](const json&, httplib::Response& res) {
        res.set_content(R"({"data":[{"index":1,"embedding":[1,2,3]},{"index":0,"embedding":[1,2]}]})", "application/json");
    });
    config.base_url = ragged.base_url();
    try {
        embed_texts_remote(config, std::vector<std::string>{"a", "b"});
        o.fail("mixed dimensions were accepted");
    } catch (const RemoteError&) {
    }
    if (o.pass) {
        char buf[200];
        std::snprintf(buf, sizeof buf,
                      "%zu texts over %d shuffled responses restored to input order, uniform dim %zu enforced, "
                      "max |cos(v,v)-1| %.1e <= 1e-12",
                      texts.size(), server.requests(), dim, worst);
        o.detail = buf;
    }
    return o;
}

}  // namespace

int main() {
    criterion("BM25 oracle equivalence", bm25_oracle);
    criterion("Weighted keyword scoring oracle equivalence", keyword_scoring_oracle);
    criterion("Reformulation contract", reformulation_properties);
    const auto bench_data = Bench::load();
    criterion("Directional QZero benefit on the synthetic benchmark", [&] { return directional_benefit(bench_data); });
    criterion("Retrieved-article sweep mechanics", [&] { return sweep_mechanics(bench_data); });
    criterion("Determinism of index and eval", determinism);
    criterion("Explain output shape", [&] { return explain_shape(bench_data); });
    criterion("Remote-client conformance", remote_conformance);
    std::printf("[SKIP] Embedding server round-trip: the optional local server is not part of this build\n");
    std::printf("%s: %d failing criteria\n", g_failures ? "FAILED" : "OK", g_failures);
    return g_failures ? 1 : 0;
}
