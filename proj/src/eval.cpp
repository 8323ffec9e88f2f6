#include "qzero/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "qzero/error.hpp"
#include "qzero/text.hpp"

namespace qzero {

std::vector<LabeledExample> load_dataset(std::istream& in, const LabelSet& labels, DatasetStats* stats) {
    std::vector<LabeledExample> examples;
    DatasetStats local;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (text::trim(line).empty()) {
            ++local.blank_lines;
            continue;
        }
        if (line.front() == '#') {
            ++local.comment_lines;
            continue;
        }
        const auto tab = line.rfind('\t');
        if (tab == std::string::npos) throw FormatError("expected 'text<TAB>label'", line_no);
        const auto gold = std::string(text::trim(std::string_view(line).substr(tab + 1)));
        if (!labels.index_of(gold)) throw FormatError("gold label '" + gold + "' is not in the label set", line_no);
        const auto body = text::trim(std::string_view(line).substr(0, tab));
        if (body.empty()) throw FormatError("empty example text", line_no);
        examples.push_back({std::string(body), gold, line_no});
    }
    if (examples.empty()) throw FormatError("dataset contains no examples");
    local.examples = examples.size();
    if (stats) *stats = local;
    return examples;
}

std::vector<LabeledExample> load_dataset(const std::filesystem::path& path, const LabelSet& labels,
                                         DatasetStats* stats) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open dataset " + path.string());
    return load_dataset(in, labels, stats);
}

void to_json(nlohmann::json& j, const EvalReport& r) {
    nlohmann::json per_label = nlohmann::json::array();
    for (const auto& [label, tally] : r.per_label) {
        per_label.push_back({{"label", label}, {"correct", tally.correct}, {"total", tally.total}});
    }
    nlohmann::json failures = nlohmann::json::array();
    for (const auto& f : r.failure_samples) failures.push_back({{"line", f.line}, {"message", f.message}});
    j = nlohmann::json{
        {"dataset_name", r.dataset_name},
        {"mode", r.mode},
        {"accuracy", r.accuracy},
        {"n", r.n},
        {"per_label", per_label},
        {"config_fingerprint", r.config_fingerprint},
        {"runs", r.runs},
        {"run_accuracies", r.run_accuracies},
        {"accuracy_mean_over_runs", r.accuracy_mean_over_runs},
        {"accuracy_variance", r.accuracy_variance},
        {"failures", r.failures},
        {"failure_samples", failures},
    };
}

void from_json(const nlohmann::json& j, EvalReport& r) {
    j.at("dataset_name").get_to(r.dataset_name);
    j.at("mode").get_to(r.mode);
    j.at("accuracy").get_to(r.accuracy);
    j.at("n").get_to(r.n);
    r.per_label.clear();
    for (const auto& item : j.at("per_label")) {
        r.per_label.push_back({item.at("label").get<std::string>(),
                               {item.at("correct").get<std::size_t>(), item.at("total").get<std::size_t>()}});
    }
    j.at("config_fingerprint").get_to(r.config_fingerprint);
    j.at("runs").get_to(r.runs);
    j.at("run_accuracies").get_to(r.run_accuracies);
    j.at("accuracy_mean_over_runs").get_to(r.accuracy_mean_over_runs);
    r.accuracy_variance = j.value("accuracy_variance", 0.0);
    r.failures = j.value("failures", std::size_t{0});
}

namespace {

constexpr std::size_t kMaxFailureSamples = 20;

struct Outcome {
    std::optional<std::string> predicted;
    std::string error;
};

std::vector<Outcome> classify_all(const std::vector<LabeledExample>& examples, const Classifier& classify,
                                  std::size_t jobs) {
    std::vector<Outcome> outcomes(examples.size());
    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
        for (std::size_t i = next.fetch_add(1); i < examples.size(); i = next.fetch_add(1)) {
            try {
                outcomes[i].predicted = classify(RawQuery(examples[i].text)).predicted;
            } catch (const std::exception& e) {
                outcomes[i].error = e.what();
            }
        }
    };
    const std::size_t threads = std::clamp<std::size_t>(jobs, 1, examples.size());
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    }
    return outcomes;
}

}  // namespace

EvalReport evaluate(const std::vector<LabeledExample>& examples, const LabelSet& labels, const Classifier& classify,
                    const EvalOptions& options) {
    if (options.runs < 1) throw ContractError("evaluate: runs must be >= 1");
    if (examples.empty()) throw ContractError("evaluate: no examples");

    EvalReport report;
    report.dataset_name = options.dataset_name;
    report.mode = options.mode;
    report.config_fingerprint = options.config_fingerprint;
    report.n = examples.size();
    report.runs = options.runs;

    for (std::size_t run = 0; run < options.runs; ++run) {
        const auto outcomes = classify_all(examples, classify, options.jobs);
        std::vector<LabelTally> tallies(labels.size());
        std::size_t correct = 0;
        std::size_t failures = 0;
        std::vector<ExampleFailure> samples;
        for (std::size_t i = 0; i < examples.size(); ++i) {
            const auto gold = labels.index_of(examples[i].gold);
            if (!gold) throw ContractError("gold label '" + examples[i].gold + "' is not in the label set");
            ++tallies[*gold].total;
            if (!outcomes[i].predicted) {
                ++failures;
                if (samples.size() < kMaxFailureSamples) samples.push_back({examples[i].line, outcomes[i].error});
                continue;
            }
            if (*outcomes[i].predicted == examples[i].gold) {
                ++correct;
                ++tallies[*gold].correct;
            }
        }
        const double accuracy = static_cast<double>(correct) / static_cast<double>(examples.size());
        report.run_accuracies.push_back(accuracy);
        if (run == 0) {
            report.accuracy = accuracy;
            report.failures = failures;
            report.failure_samples = std::move(samples);
            for (std::size_t y = 0; y < labels.size(); ++y) report.per_label.push_back({labels[y], tallies[y]});
        }
    }

    double sum = 0.0;
    for (const double a : report.run_accuracies) sum += a;
    report.accuracy_mean_over_runs = sum / static_cast<double>(report.runs);
    double sq = 0.0;
    for (const double a : report.run_accuracies) sq += (a - report.accuracy_mean_over_runs) * (a - report.accuracy_mean_over_runs);
    report.accuracy_variance = sq / static_cast<double>(report.runs);

    if (options.deterministic) {
        for (const double a : report.run_accuracies) {
            if (a != report.run_accuracies.front()) {
                throw Error("runs of a deterministic configuration disagree on accuracy");
            }
        }
    }
    return report;
}

std::string format_delta(double points) {
    if (std::abs(points) < 0.005) return "0.00";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%+.2f", points);
    return buf;
}

std::string Comparison::render() const {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", base_percent);
    return std::string(buf) + " " + format_delta(delta_points);
}

Comparison compare(const EvalReport& base, const EvalReport& other) {
    if (base.dataset_name != other.dataset_name || base.n != other.n) {
        throw Error("cannot compare reports over different datasets ('" + base.dataset_name + "', n=" +
                    std::to_string(base.n) + " vs '" + other.dataset_name + "', n=" + std::to_string(other.n) + ")");
    }
    Comparison c;
    c.dataset_name = base.dataset_name;
    c.base_mode = base.mode;
    c.other_mode = other.mode;
    c.base_percent = base.accuracy_mean_over_runs * 100.0;
    c.other_percent = other.accuracy_mean_over_runs * 100.0;
    c.delta_points = c.other_percent - c.base_percent;
    return c;
}

void to_json(nlohmann::json& j, const SweepReport& r) {
    nlohmann::json points = nlohmann::json::array();
    for (const auto& p : r.points) {
        nlohmann::json point = {{"k", p.k}, {"accuracy", p.accuracy ? nlohmann::json(*p.accuracy) : nlohmann::json()}};
        if (!p.error.empty()) point["error"] = p.error;
        points.push_back(std::move(point));
    }
    j = nlohmann::json{{"dataset_name", r.dataset_name},
                       {"mode", r.mode},
                       {"config_fingerprint", r.config_fingerprint},
                       {"points", points}};
}

SweepReport sweep_k(const std::vector<LabeledExample>& examples, const LabelSet& labels,
                    const std::function<Classifier(std::size_t)>& make_classifier, const std::vector<std::size_t>& ks,
                    const EvalOptions& options) {
    if (ks.empty()) throw ContractError("sweep_k: no k values");
    for (std::size_t i = 0; i < ks.size(); ++i) {
        if (ks[i] < 1) throw ContractError("sweep_k: k must be >= 1");
        if (i > 0 && ks[i] <= ks[i - 1]) throw ContractError("sweep_k: k values must be strictly increasing");
    }
    SweepReport report{options.dataset_name, options.mode, options.config_fingerprint, {}};
    EvalOptions single = options;
    single.runs = 1;
    for (const std::size_t k : ks) {
        SweepPoint point{k, std::nullopt, {}};
        try {
            point.accuracy = evaluate(examples, labels, make_classifier(k), single).accuracy;
        } catch (const std::exception& e) {
            point.error = e.what();
        }
        report.points.push_back(std::move(point));
    }
    return report;
}

void write_sweep_tsv(std::ostream& out, const SweepReport& report) {
    for (const auto& p : report.points) {
        out << p.k << '\t';
        if (p.accuracy) {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.6f", *p.accuracy);
            out << buf;
        } else {
            out << "nan";
        }
        out << '\n';
    }
}

std::string fingerprint(const nlohmann::json& config) {
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (const unsigned char c : config.dump()) {
        hash ^= c;
        hash *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
    return buf;
}

}  // namespace qzero
