#include "qzero/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <memory>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "qzero/classify.hpp"
#include "qzero/corpus.hpp"
#include "qzero/eval.hpp"
#include "qzero/index.hpp"
#include "qzero/pipeline.hpp"
#include "qzero/reformulate.hpp"
#include "qzero/remote_embedder.hpp"
#include "qzero/text.hpp"
#include "qzero/tokenizer.hpp"

#ifndef QZERO_DEFAULT_TOKENIZER_DIR
#define QZERO_DEFAULT_TOKENIZER_DIR "assets/gpt2"
#endif

namespace qzero::cli {

namespace {

using nlohmann::json;

// Every flag of every command; each command registers the subset it uses.
struct RunConfig {
    std::string corpus_path;
    std::string index_path;
    bool stem = false;
    bool keep_stopwords = false;
    double k1 = Bm25Params{}.k1;
    double b = Bm25Params{}.b;
    bool bm25_overridden = false;

    std::vector<std::string> queries;
    std::string queries_path;
    std::size_t top_k = kDefaultTopK;
    std::string mode;

    std::string extractor = "nounlite";
    std::string extractor_command;
    std::string stopwords_path;

    std::string tokenizer_dir;
    bool whitespace_tokenizer = false;
    std::size_t budget = kDefaultTokenBudget;

    std::string provider;
    std::string labels_path;
    std::string baseline = "avg";
    bool baseline_only = false;
    std::size_t timeout_ms = 30'000;
    std::size_t max_in_flight = 4;
    std::size_t batch_size = 64;

    std::string dataset_path;
    std::string dataset_name;
    std::size_t runs = 3;
    std::size_t jobs = 1;
    bool compare_baseline = false;
    std::vector<std::size_t> ks = kDefaultSweepKs;
    std::string tsv_path;

    std::string output_path;
    bool pretty = false;
};

class StageError : public Error {
public:
    StageError(const std::string& stage, const std::string& what) : Error(stage + ": " + what) {}
};

// Where the primary output of a command goes.
class Sink {
public:
    Sink(const std::string& path, std::ostream& fallback) : out_(&fallback) {
        if (!path.empty()) {
            file_ = std::make_unique<std::ofstream>(path, std::ios::trunc);
            if (!*file_) throw IoError("cannot write " + path);
            out_ = file_.get();
        }
    }
    std::ostream& stream() { return *out_; }
    void record(const json& j) { *out_ << j.dump() << '\n'; }

private:
    std::unique_ptr<std::ofstream> file_;
    std::ostream* out_;
};

AnalysisConfig analysis_from(const RunConfig& c) {
    AnalysisConfig a;
    a.remove_stopwords = !c.keep_stopwords;
    a.stem = c.stem;
    return a;
}

void add_analysis_flags(CLI::App* cmd, RunConfig& c) {
    cmd->add_flag("--stem", c.stem, "Porter-stem index and query terms");
    cmd->add_flag("--keep-stopwords", c.keep_stopwords, "Do not drop English stopwords");
}

void add_index_flags(CLI::App* cmd, RunConfig& c) {
    cmd->add_option("--index", c.index_path, "Index directory")->required();
    add_analysis_flags(cmd, c);
    cmd->add_option("--k1", c.k1, "BM25 k1 (default: value stored in the index)")
        ->each([&c](const std::string&) { c.bm25_overridden = true; });
    cmd->add_option("--b", c.b, "BM25 b (default: value stored in the index)")
        ->each([&c](const std::string&) { c.bm25_overridden = true; });
    cmd->add_option("--top-k", c.top_k, "Articles retrieved per query")->check(CLI::PositiveNumber);
}

void add_query_flags(CLI::App* cmd, RunConfig& c) {
    cmd->add_option("--query,-q", c.queries, "Query text (repeatable)");
    cmd->add_option("--queries", c.queries_path, "File with one query per line");
}

void add_reformulate_flags(CLI::App* cmd, RunConfig& c) {
    cmd->add_option("--mode", c.mode, "sentence | keywords (default: from the provider)")
        ->check(CLI::IsMember({"sentence", "keywords"}));
    cmd->add_option("--extractor", c.extractor, "Keyword extraction strategy")
        ->check(CLI::IsMember({"capitalization", "nounlite", "external"}));
    cmd->add_option("--extractor-command", c.extractor_command, "Command for the external strategy");
    cmd->add_option("--stopwords", c.stopwords_path, "Stopword file (one word per line) for nounlite");
    cmd->add_option("--tokenizer", c.tokenizer_dir, "GPT-2 tokenizer directory");
    cmd->add_flag("--whitespace-tokenizer", c.whitespace_tokenizer,
                  "Count whitespace words instead of GPT-2 tokens (not model-faithful)");
    cmd->add_option("--budget", c.budget, "Token budget of sentence queries")->check(CLI::PositiveNumber);
}

void add_provider_flags(CLI::App* cmd, RunConfig& c) {
    cmd->add_option("--provider", c.provider, "static:<vectors.txt> | remote:<base_url>,<model>")->required();
    cmd->add_option("--labels", c.labels_path, "Label file, one label per line")->required();
    cmd->add_option("--baseline", c.baseline, "Static baseline: avg | unit")->check(CLI::IsMember({"avg", "unit"}));
    cmd->add_flag("--baseline-only", c.baseline_only, "Classify the raw query without retrieval");
    cmd->add_option("--timeout-ms", c.timeout_ms, "Remote request timeout");
    cmd->add_option("--max-in-flight", c.max_in_flight, "Concurrent remote requests")->check(CLI::PositiveNumber);
    cmd->add_option("--batch-size", c.batch_size, "Texts per remote request")->check(CLI::PositiveNumber);
}

void add_output_flags(CLI::App* cmd, RunConfig& c) {
    cmd->add_option("--output,-o", c.output_path, "Write records to this file instead of stdout");
    cmd->add_flag("--pretty", c.pretty, "Human-readable tables");
}

std::vector<std::string> collect_queries(const RunConfig& c) {
    std::vector<std::string> queries = c.queries;
    if (!c.queries_path.empty()) {
        std::ifstream in(c.queries_path);
        if (!in) throw IoError("cannot open " + c.queries_path);
        std::string line;
        while (std::getline(in, line)) {
            if (!text::trim(line).empty()) queries.push_back(line);
        }
    }
    if (queries.empty()) throw ContractError("no query given (use --query or --queries)");
    return queries;
}

// Index, retriever and the user's explicit analysis expectation.
struct LoadedIndex {
    InvertedIndex index;
    Bm25Params params;
};

LoadedIndex open_index(const RunConfig& c, const CLI::App* cmd) {
    std::optional<AnalysisConfig> expected;
    if (cmd->count("--stem") || cmd->count("--keep-stopwords")) expected = analysis_from(c);
    LoadedIndex loaded{InvertedIndex::load(c.index_path, expected), {}};
    loaded.params = loaded.index.bm25();
    if (cmd->count("--k1")) loaded.params.k1 = c.k1;
    if (cmd->count("--b")) loaded.params.b = c.b;
    return loaded;
}

std::unique_ptr<Tokenizer> make_tokenizer(const RunConfig& c) {
    if (c.whitespace_tokenizer) return std::make_unique<WhitespaceTokenizer>();
    std::string dir = c.tokenizer_dir;
    if (dir.empty()) {
        const char* env = std::getenv(kTokenizerDirEnv);
        dir = env && *env ? env : QZERO_DEFAULT_TOKENIZER_DIR;
    }
    return Gpt2Tokenizer::from_directory(dir);
}

ExtractorConfig make_extractor(const RunConfig& c) {
    ExtractorConfig config;
    config.strategy = parse_extraction_strategy(c.extractor);
    if (!c.extractor_command.empty()) config.external_command = c.extractor_command;
    if (!c.stopwords_path.empty()) {
        std::ifstream in(c.stopwords_path);
        if (!in) throw IoError("cannot open " + c.stopwords_path);
        config.stopwords.clear();
        std::string line;
        while (std::getline(in, line)) {
            const auto word = text::trim(line);
            if (!word.empty()) config.stopwords.insert(text::to_lower(word));
        }
    }
    config.validate();
    return config;
}

struct Provider {
    std::unique_ptr<StaticVectorStore> store;
    std::unique_ptr<RemoteEmbedder> remote;
    std::string spec;
};

Provider make_provider(const RunConfig& c) {
    Provider p;
    p.spec = c.provider;
    if (c.provider.starts_with("static:")) {
        p.store = std::make_unique<StaticVectorStore>(StaticVectorStore::load(std::filesystem::path(c.provider.substr(7))));
    } else if (c.provider.starts_with("remote:")) {
        const std::string rest = c.provider.substr(7);
        const auto comma = rest.rfind(',');
        if (comma == std::string::npos) throw ContractError("remote provider must be remote:<base_url>,<model>");
        RemoteEmbedderConfig rc;
        rc.base_url = rest.substr(0, comma);
        rc.model_name = rest.substr(comma + 1);
        rc.timeout = std::chrono::milliseconds(c.timeout_ms);
        rc.max_in_flight = c.max_in_flight;
        rc.batch_size = c.batch_size;
        if (const char* token = std::getenv(kAuthTokenEnv); token && *token) rc.auth_token = token;
        p.remote = std::make_unique<RemoteEmbedder>(std::move(rc));
    } else {
        throw ContractError("provider must start with static: or remote:");
    }
    return p;
}

PipelineMode resolve_mode(const RunConfig& c, const Provider& p) {
    const PipelineMode mode = c.mode.empty() ? (p.store ? PipelineMode::keywords : PipelineMode::sentence)
                                             : parse_pipeline_mode(c.mode);
    if (mode == PipelineMode::keywords && !p.store) throw ContractError("keywords mode requires a static: provider");
    if (mode == PipelineMode::sentence && !p.remote) throw ContractError("sentence mode requires a remote: provider");
    return mode;
}

json categories_json(const std::vector<std::string>& categories) { return json(categories); }

json keywords_json(const std::vector<KeywordCount>& keywords) {
    json out = json::array();
    for (const auto& k : keywords) out.push_back({{"keyword", k.keyword}, {"weight", k.weight}});
    return out;
}

json category_refs_json(const std::vector<CategoryRef>& refs) {
    json out = json::array();
    for (const auto& r : refs) out.push_back({{"rank", r.rank}, {"category", r.category}});
    return out;
}

json result_json(const std::string& query, const ClassificationResult& r) {
    json scores = json::array();
    for (std::size_t i = 0; i < r.table.labels.size(); ++i) {
        scores.push_back({{"label", r.table.labels[i]}, {"score", r.table.scores[i]}});
    }
    json j = {{"query", query},   {"predicted", r.predicted}, {"mode", to_string(r.mode)},
              {"scores", scores}, {"margin", r.table.margin}, {"oov", r.oov},
              {"notes", r.notes}};
    if (r.explain) {
        j["explain"] = {{"categories", category_refs_json(r.explain->categories)},
                        {"keywords", keywords_json(r.explain->keywords)}};
    }
    return j;
}

void print_result_pretty(std::ostream& out, const std::string& query, const ClassificationResult& r) {
    out << "Query:      " << query << '\n';
    out << "Prediction: " << r.predicted << "  [" << to_string(r.mode) << "]\n";
    for (std::size_t i = 0; i < r.table.labels.size(); ++i) {
        out << "  " << std::left << std::setw(32) << r.table.labels[i] << std::right << std::fixed
            << std::setprecision(6) << r.table.scores[i] << '\n';
    }
    out.unsetf(std::ios::floatfield);
    if (r.explain) {
        out << "Returned categories:\n";
        for (const auto& c : r.explain->categories) out << "  " << std::setw(4) << c.rank << "  " << c.category << '\n';
        out << "Top keywords:\n  ";
        for (std::size_t i = 0; i < r.explain->keywords.size(); ++i) {
            const auto& k = r.explain->keywords[i];
            out << (i ? ", " : "") << '(' << k.keyword << ", " << k.weight << ')';
        }
        out << '\n';
    }
    for (const auto& note : r.notes) out << "Note: " << note << '\n';
    out << '\n';
}

json settings_json(const RunConfig& c, const InvertedIndex* index, const Bm25Params& params, PipelineMode mode,
                   const Tokenizer* tokenizer) {
    json j = {{"mode", to_string(mode)},
              {"top_k", c.top_k},
              {"budget", c.budget},
              {"extractor", c.extractor},
              {"extractor_command", c.extractor_command},
              {"stopwords", c.stopwords_path},
              {"provider", c.provider},
              {"baseline", c.baseline},
              {"baseline_only", c.baseline_only},
              {"tokenizer", tokenizer ? std::string(tokenizer->name()) : std::string()},
              {"bm25", {{"k1", params.k1}, {"b", params.b}}}};
    if (index) {
        j["index"] = {{"num_docs", index->num_docs()},
                      {"total_length", index->total_length()},
                      {"num_terms", index->postings().size()},
                      {"analysis", index->analysis()}};
    }
    return j;
}

// ---------------------------------------------------------------------------

int cmd_index(const RunConfig& c, std::ostream& out, std::ostream& err) {
    std::ifstream in(c.corpus_path);
    if (!in) throw IoError("cannot open corpus " + c.corpus_path);
    CorpusReader reader(in, [&err](const RecordError& e) { err << "corpus line " << e.line << ": " << e.message << '\n'; });
    IndexBuilder builder(analysis_from(c), Bm25Params{c.k1, c.b});
    while (auto doc = reader.next()) builder.add(*doc);
    const auto& s = reader.stats();
    const json stats = {{"total_read", s.total_read},
                        {"kept", s.kept},
                        {"dropped_short", s.dropped_short},
                        {"dropped_no_category", s.dropped_no_category},
                        {"malformed", s.malformed}};
    if (s.kept == 0) {
        err << stats.dump() << '\n';
        throw StageError("index", "empty corpus after filtering");
    }
    const auto index = std::move(builder).build();
    index.save(c.index_path);
    Sink sink(c.output_path, out);
    if (c.pretty) {
        sink.stream() << "Indexed " << index.num_docs() << " documents into " << c.index_path << '\n'
                      << "  read " << s.total_read << ", kept " << s.kept << ", too short " << s.dropped_short
                      << ", without categories " << s.dropped_no_category << ", malformed " << s.malformed << '\n'
                      << "  terms " << index.postings().size() << ", avgdl " << index.avgdl() << '\n';
    } else {
        sink.record({{"command", "index"},
                     {"index", c.index_path},
                     {"stats", stats},
                     {"num_docs", index.num_docs()},
                     {"num_terms", index.postings().size()},
                     {"avgdl", index.avgdl()}});
    }
    return 0;
}

int cmd_retrieve(const RunConfig& c, const CLI::App* cmd, std::ostream& out) {
    const auto loaded = open_index(c, cmd);
    const Bm25Retriever retriever(loaded.index, loaded.params);
    Sink sink(c.output_path, out);
    for (const auto& q : collect_queries(c)) {
        const auto articles = retrieve_categories(RawQuery(q), retriever, c.top_k);
        if (c.pretty) {
            sink.stream() << "Query: " << q << '\n';
            for (const auto& a : articles) {
                sink.stream() << "  " << std::setw(4) << a.rank << "  " << std::fixed << std::setprecision(4)
                              << a.score << "  " << a.doc_id << "  [";
                sink.stream().unsetf(std::ios::floatfield);
                for (std::size_t i = 0; i < a.categories.size(); ++i) sink.stream() << (i ? "; " : "") << a.categories[i];
                sink.stream() << "]\n";
            }
            continue;
        }
        json results = json::array();
        for (const auto& a : articles) {
            results.push_back({{"rank", a.rank}, {"doc_id", a.doc_id}, {"score", a.score},
                               {"categories", categories_json(a.categories)}});
        }
        sink.record({{"query", q}, {"results", results}});
    }
    return 0;
}

int cmd_reformulate(const RunConfig& c, const CLI::App* cmd, std::ostream& out) {
    const auto loaded = open_index(c, cmd);
    const Bm25Retriever retriever(loaded.index, loaded.params);
    const PipelineMode mode = c.mode.empty() ? PipelineMode::sentence : parse_pipeline_mode(c.mode);
    const auto tokenizer = mode == PipelineMode::sentence ? make_tokenizer(c) : nullptr;
    const auto extractor = make_extractor(c);
    Sink sink(c.output_path, out);
    for (const auto& q : collect_queries(c)) {
        const auto articles = retrieve_categories(RawQuery(q), retriever, c.top_k);
        if (mode == PipelineMode::sentence) {
            const auto sq = make_sentence_query(articles, *tokenizer, c.budget);
            if (c.pretty) {
                sink.stream() << "Query: " << q << "\nTokens: " << sq.token_count << " (" << tokenizer->name()
                              << ")\n" << sq.text << "\n\n";
            } else {
                sink.record({{"query", q}, {"mode", "sentence"}, {"text", sq.text}, {"token_count", sq.token_count},
                             {"tokenizer", tokenizer->name()}, {"source_ranks", category_refs_json(sq.source_ranks)}});
            }
        } else {
            const auto keywords = extract_keywords(flatten_categories(articles), extractor);
            if (c.pretty) {
                sink.stream() << "Query: " << q << '\n';
                for (const auto& k : keywords) sink.stream() << "  " << std::setw(6) << k.weight << "  " << k.keyword << '\n';
                sink.stream() << '\n';
            } else {
                sink.record({{"query", q}, {"mode", "keywords"}, {"keywords", keywords_json(keywords)}});
            }
        }
    }
    return 0;
}

// Everything needed to classify: owned components plus the pipeline.
struct ClassifierSetup {
    std::optional<LoadedIndex> index;
    std::unique_ptr<Bm25Retriever> retriever;
    std::unique_ptr<Tokenizer> tokenizer;
    Provider provider;
    PipelineMode mode = PipelineMode::keywords;
    PipelineOptions options;
    std::optional<LabelSet> labels;

    Pipeline pipeline(std::size_t top_k) const {
        PipelineComponents comps{retriever.get(), tokenizer.get(), provider.remote.get(), provider.store.get()};
        PipelineOptions opts = options;
        opts.top_k = top_k;
        return Pipeline(mode, comps, opts);
    }

    json settings(const RunConfig& c) const {
        return settings_json(c, index ? &index->index : nullptr, index ? index->params : Bm25Params{}, mode,
                             tokenizer.get());
    }
};

std::unique_ptr<ClassifierSetup> setup_classifier(const RunConfig& c, const CLI::App* cmd, bool explain) {
    auto s = std::make_unique<ClassifierSetup>();
    s->labels.emplace(LabelSet::load(std::filesystem::path(c.labels_path)));
    s->provider = make_provider(c);
    s->mode = resolve_mode(c, s->provider);
    s->options.top_k = c.top_k;
    s->options.token_budget = c.budget;
    s->options.extractor = make_extractor(c);
    s->options.baseline = c.baseline == "unit" ? StaticBaseline::unit_weights : StaticBaseline::averaged;
    s->options.explain = explain;
    s->options.baseline_only = c.baseline_only;
    if (!c.baseline_only || !c.index_path.empty()) {
        if (c.index_path.empty()) throw ContractError("--index is required unless --baseline-only is given");
        s->index.emplace(open_index(c, cmd));
        s->retriever = std::make_unique<Bm25Retriever>(s->index->index, s->index->params);
    }
    if (s->mode == PipelineMode::sentence && !c.baseline_only) s->tokenizer = make_tokenizer(c);
    return s;
}

int cmd_classify(const RunConfig& c, const CLI::App* cmd, std::ostream& out, bool explain) {
    const auto setup = setup_classifier(c, cmd, explain);
    const auto pipeline = setup->pipeline(c.top_k);
    Sink sink(c.output_path, out);
    for (const auto& q : collect_queries(c)) {
        const auto result = pipeline.classify(RawQuery(q), *setup->labels);
        if (c.pretty) print_result_pretty(sink.stream(), q, result);
        else sink.record(result_json(q, result));
    }
    return 0;
}

std::string dataset_name(const RunConfig& c) {
    return c.dataset_name.empty() ? std::filesystem::path(c.dataset_path).stem().string() : c.dataset_name;
}

void print_report_pretty(std::ostream& out, const EvalReport& r) {
    out << std::fixed << std::setprecision(2);
    out << r.dataset_name << " [" << r.mode << "]  accuracy " << r.accuracy_mean_over_runs * 100.0 << "%  (n=" << r.n
        << ", runs=" << r.runs << ", failures=" << r.failures << ", config " << r.config_fingerprint << ")\n";
    for (const auto& [label, t] : r.per_label) {
        out << "  " << std::left << std::setw(32) << label << std::right << t.correct << "/" << t.total << '\n';
    }
    out.unsetf(std::ios::floatfield);
}

int cmd_eval(const RunConfig& c, const CLI::App* cmd, std::ostream& out, std::ostream& err) {
    const auto setup = setup_classifier(c, cmd, false);
    const auto examples = load_dataset(std::filesystem::path(c.dataset_path), *setup->labels);
    const auto pipeline = setup->pipeline(c.top_k);
    const json settings = setup->settings(c);

    EvalOptions opts;
    opts.dataset_name = dataset_name(c);
    opts.runs = c.runs;
    opts.jobs = c.jobs;
    opts.deterministic = static_cast<bool>(setup->provider.store);
    opts.config_fingerprint = fingerprint(settings);
    opts.mode = c.baseline_only ? std::string(to_string(setup->mode)) + "-baseline" : std::string(to_string(setup->mode));

    const auto report = evaluate(examples, *setup->labels,
                                 [&](const RawQuery& q) { return pipeline.classify(q, *setup->labels); }, opts);
    if (report.failures) err << report.failures << " examples failed and were counted incorrect\n";

    Sink sink(c.output_path, out);
    std::optional<EvalReport> base;
    if (c.compare_baseline && !c.baseline_only) {
        EvalOptions base_opts = opts;
        json base_settings = settings;
        base_settings["baseline_only"] = true;
        base_opts.config_fingerprint = fingerprint(base_settings);
        base_opts.mode = opts.mode + "-baseline";
        base = evaluate(examples, *setup->labels,
                        [&](const RawQuery& q) { return pipeline.classify_baseline(q, *setup->labels); }, base_opts);
    }
    if (c.pretty) {
        if (base) print_report_pretty(sink.stream(), *base);
        print_report_pretty(sink.stream(), report);
        if (base) sink.stream() << "Base vs QZero: " << compare(*base, report).render() << '\n';
        return 0;
    }
    if (base) sink.record(*base);
    sink.record(report);
    if (base) {
        const auto cmp = compare(*base, report);
        sink.record({{"dataset_name", cmp.dataset_name},
                     {"base_mode", cmp.base_mode},
                     {"other_mode", cmp.other_mode},
                     {"base_percent", cmp.base_percent},
                     {"other_percent", cmp.other_percent},
                     {"delta_points", cmp.delta_points},
                     {"rendered", cmp.render()}});
    }
    return 0;
}

int cmd_sweep(const RunConfig& c, const CLI::App* cmd, std::ostream& out) {
    const auto setup = setup_classifier(c, cmd, false);
    const auto examples = load_dataset(std::filesystem::path(c.dataset_path), *setup->labels);
    json settings = setup->settings(c);
    settings.erase("top_k");

    EvalOptions opts;
    opts.dataset_name = dataset_name(c);
    opts.jobs = c.jobs;
    opts.deterministic = static_cast<bool>(setup->provider.store);
    opts.config_fingerprint = fingerprint(settings);
    opts.mode = std::string(to_string(setup->mode));

    std::vector<std::unique_ptr<Pipeline>> pipelines;
    const auto make = [&](std::size_t k) -> Classifier {
        pipelines.push_back(std::make_unique<Pipeline>(setup->pipeline(k)));
        const Pipeline* p = pipelines.back().get();
        return [p, &setup](const RawQuery& q) { return p->classify(q, *setup->labels); };
    };
    const auto report = sweep_k(examples, *setup->labels, make, c.ks, opts);

    Sink sink(c.output_path, out);
    if (c.pretty) {
        sink.stream() << "k\taccuracy\n";
        write_sweep_tsv(sink.stream(), report);
    } else {
        sink.record(report);
    }
    std::string tsv = c.tsv_path;
    if (tsv.empty() && !c.output_path.empty()) tsv = c.output_path + ".tsv";
    if (!tsv.empty()) {
        std::ofstream f(tsv, std::ios::trunc);
        if (!f) throw IoError("cannot write " + tsv);
        write_sweep_tsv(f, report);
    }
    return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    RunConfig c;
    CLI::App app{"Zero-shot text classification with retrieval-based query reformulation", "qzero"};
    app.require_subcommand(1);

    auto* index = app.add_subcommand("index", "Build a BM25 index from a corpus file");
    index->add_option("--corpus", c.corpus_path, "Line-delimited JSON corpus")->required();
    index->add_option("--index", c.index_path, "Index directory to create")->required();
    add_analysis_flags(index, c);
    index->add_option("--k1", c.k1, "BM25 k1 stored in the manifest");
    index->add_option("--b", c.b, "BM25 b stored in the manifest");
    add_output_flags(index, c);

    auto* retrieve = app.add_subcommand("retrieve", "Show the top-ranked articles and their categories");
    add_index_flags(retrieve, c);
    add_query_flags(retrieve, c);
    add_output_flags(retrieve, c);

    auto* reformulate = app.add_subcommand("reformulate", "Print the reformulated query");
    add_index_flags(reformulate, c);
    add_query_flags(reformulate, c);
    add_reformulate_flags(reformulate, c);
    add_output_flags(reformulate, c);

    CLI::App* classify_cmds[2] = {app.add_subcommand("classify", "Classify queries against a label set"),
                                  app.add_subcommand("explain", "Classify and show categories and top keywords")};
    auto* eval = app.add_subcommand("eval", "Evaluate accuracy on a labeled dataset");
    auto* sweep = app.add_subcommand("sweep", "Accuracy as a function of the number of retrieved articles");
    for (auto* cmd : {classify_cmds[0], classify_cmds[1], eval, sweep}) {
        cmd->add_option("--index", c.index_path, "Index directory");
        add_analysis_flags(cmd, c);
        cmd->add_option("--k1", c.k1, "BM25 k1 (default: value stored in the index)");
        cmd->add_option("--b", c.b, "BM25 b (default: value stored in the index)");
        cmd->add_option("--top-k", c.top_k, "Articles retrieved per query")->check(CLI::PositiveNumber);
        add_reformulate_flags(cmd, c);
        add_provider_flags(cmd, c);
        add_output_flags(cmd, c);
    }
    for (auto* cmd : classify_cmds) add_query_flags(cmd, c);
    for (auto* cmd : {eval, sweep}) {
        cmd->add_option("--dataset", c.dataset_path, "TSV dataset: text<TAB>label")->required();
        cmd->add_option("--dataset-name", c.dataset_name, "Name recorded in reports (default: file stem)");
        cmd->add_option("--jobs,-j", c.jobs, "Worker threads")->check(CLI::PositiveNumber);
    }
    eval->add_option("--runs", c.runs, "Evaluation runs to average")->check(CLI::PositiveNumber);
    eval->add_flag("--compare-baseline", c.compare_baseline, "Also evaluate the baseline and print the delta");
    sweep->add_option("--ks", c.ks, "Retrieved-article counts, strictly increasing")->delimiter(',');
    sweep->add_option("--tsv", c.tsv_path, "Also write k<TAB>accuracy lines here");

    std::vector<std::string> argv_storage;
    argv_storage.reserve(args.size() + 1);
    argv_storage.emplace_back("qzero");
    argv_storage.insert(argv_storage.end(), args.begin(), args.end());
    std::vector<const char*> argv;
    for (const auto& a : argv_storage) argv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err);
    }

    try {
        if (*index) return cmd_index(c, out, err);
        if (*retrieve) return cmd_retrieve(c, retrieve, out);
        if (*reformulate) return cmd_reformulate(c, reformulate, out);
        if (*classify_cmds[0]) return cmd_classify(c, classify_cmds[0], out, false);
        if (*classify_cmds[1]) return cmd_classify(c, classify_cmds[1], out, true);
        if (*eval) return cmd_eval(c, eval, out, err);
        if (*sweep) return cmd_sweep(c, sweep, out);
    } catch (const std::exception& e) {
        err << "qzero " << app.get_subcommands().front()->get_name() << ": " << e.what() << '\n';
        return 1;
    }
    return 1;
}

}  // namespace qzero::cli
