#include "bline/io.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "json.hpp"

namespace bline::io {

using nlohmann::json;

namespace {

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    return in;
}

double coordinate(const json& v, std::size_t line_no, const char* field) {
    if (!v.is_number()) throw ParseError(line_no, field, "coordinate is not a number");
    const double x = v.get<double>();
    if (!(x >= 0.0 && x <= 100.0))
        throw ParseError(line_no, field,
                         "coordinate " + format_double(x) + " outside [0,100]");
    return x;
}

std::vector<LineSegment> parse_lines(const json& arr, std::size_t line_no) {
    if (!arr.is_array()) throw ParseError(line_no, "lines", "expected an array");
    std::vector<LineSegment> lines;
    for (const auto& entry : arr) {
        if (!entry.is_array() || entry.size() != 4)
            throw ParseError(line_no, "lines", "each line must be [x1,y1,x2,y2]");
        const Point2 a{coordinate(entry[0], line_no, "lines"),
                       coordinate(entry[1], line_no, "lines")};
        const Point2 b{coordinate(entry[2], line_no, "lines"),
                       coordinate(entry[3], line_no, "lines")};
        if (a == b) throw ParseError(line_no, "lines", "zero-length line");
        lines.emplace_back(a, b);
    }
    return lines;
}

json lines_to_json(std::span<const LineSegment> lines) {
    json arr = json::array();
    for (const auto& l : lines)
        arr.push_back({l.top.x, l.top.y, l.bottom.x, l.bottom.y});
    return arr;
}

const json& require(const json& record, const char* field, std::size_t line_no) {
    const auto it = record.find(field);
    if (it == record.end()) throw ParseError(line_no, field, "missing field");
    return *it;
}

void check_unknown_fields(const json& record, std::span<const char* const> known,
                          std::size_t line_no, const ParseOptions& options,
                          Diagnostics* diagnostics) {
    for (const auto& [key, value] : record.items()) {
        bool found = false;
        for (const char* k : known)
            if (key == k) {
                found = true;
                break;
            }
        if (found) continue;
        if (options.strict) throw ParseError(line_no, key, "unknown field");
        if (diagnostics != nullptr)
            diagnostics->warnings.push_back("line " + std::to_string(line_no) +
                                            ": ignoring unknown field '" + key + "'");
    }
}

json parse_record(const std::string& text, std::size_t line_no) {
    json record = json::parse(text, nullptr, false);
    if (record.is_discarded()) throw ParseError(line_no, "", "malformed JSON");
    if (!record.is_object()) throw ParseError(line_no, "", "record is not a JSON object");
    return record;
}

std::string nonempty_string(const json& v, std::size_t line_no, const char* field) {
    if (!v.is_string()) throw ParseError(line_no, field, "expected a string");
    const auto s = v.get<std::string>();
    if (s.empty()) throw ParseError(line_no, field, "must be non-empty");
    return s;
}

}  // namespace

std::string to_string(Split split) { return split == Split::train ? "train" : "test"; }

Split split_from_string(const std::string& s, std::size_t line_no) {
    if (s == "train") return Split::train;
    if (s == "test") return Split::test;
    throw ParseError(line_no, "split", "expected \"train\" or \"test\"");
}

std::vector<Opinion> parse_opinions(std::istream& in, const ParseOptions& options,
                                    Diagnostics* diagnostics) {
    static constexpr const char* known[] = {"case_id", "annotator_id", "timestamp", "split",
                                            "lines"};
    std::vector<Opinion> opinions;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const json record = parse_record(line, line_no);
        check_unknown_fields(record, known, line_no, options, diagnostics);

        Opinion op;
        op.case_id = nonempty_string(require(record, "case_id", line_no), line_no, "case_id");
        op.annotator_id =
            nonempty_string(require(record, "annotator_id", line_no), line_no, "annotator_id");
        const json& ts = require(record, "timestamp", line_no);
        if (!ts.is_number_integer())
            throw ParseError(line_no, "timestamp", "expected integer milliseconds");
        op.timestamp_ms = ts.get<std::int64_t>();
        op.split = split_from_string(
            nonempty_string(require(record, "split", line_no), line_no, "split"), line_no);
        op.lines = parse_lines(require(record, "lines", line_no), line_no);
        opinions.push_back(std::move(op));
    }
    return opinions;
}

std::vector<Opinion> load_opinions(const std::string& path, const ParseOptions& options,
                                   Diagnostics* diagnostics) {
    auto in = open_input(path);
    return parse_opinions(in, options, diagnostics);
}

void write_opinions(std::ostream& out, std::span<const Opinion> opinions) {
    for (const auto& op : opinions) {
        json record;
        record["case_id"] = op.case_id;
        record["annotator_id"] = op.annotator_id;
        record["timestamp"] = op.timestamp_ms;
        record["split"] = to_string(op.split);
        record["lines"] = lines_to_json(op.lines);
        out << record.dump() << '\n';
    }
}

void save_opinions(const std::string& path, std::span<const Opinion> opinions) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    write_opinions(out, opinions);
}

std::vector<ConsensusAnnotation> parse_consensus(std::istream& in, const ParseOptions& options,
                                                 Diagnostics* diagnostics) {
    static constexpr const char* known[] = {"case_id", "contributing_annotators", "lines"};
    std::vector<ConsensusAnnotation> result;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const json record = parse_record(line, line_no);
        check_unknown_fields(record, known, line_no, options, diagnostics);

        ConsensusAnnotation c;
        c.case_id = nonempty_string(require(record, "case_id", line_no), line_no, "case_id");
        const json& n = require(record, "contributing_annotators", line_no);
        if (!n.is_number_unsigned())
            throw ParseError(line_no, "contributing_annotators", "expected a non-negative count");
        c.contributing_annotators = n.get<std::size_t>();
        c.lines = parse_lines(require(record, "lines", line_no), line_no);
        result.push_back(std::move(c));
    }
    return result;
}

void write_consensus(std::ostream& out, std::span<const ConsensusAnnotation> annotations) {
    for (const auto& c : annotations) {
        json record;
        record["case_id"] = c.case_id;
        record["contributing_annotators"] = c.contributing_annotators;
        record["lines"] = lines_to_json(c.lines);
        out << record.dump() << '\n';
    }
}

std::map<std::string, std::vector<LineSegment>> load_reference_lines(const std::string& path,
                                                                     const ParseOptions& options) {
    auto in = open_input(path);
    std::map<std::string, std::vector<LineSegment>> refs;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const json record = parse_record(line, line_no);
        const std::string case_id =
            nonempty_string(require(record, "case_id", line_no), line_no, "case_id");
        refs[case_id] = parse_lines(require(record, "lines", line_no), line_no);
        (void)options;
    }
    return refs;
}

namespace {

struct ConfigValue {
    std::string raw;
    std::size_t line_no;
};

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::string unquote(const std::string& s) {
    if (s.size() >= 2 && ((s.front() == '"' && s.back() == '"') ||
                          (s.front() == '\'' && s.back() == '\'')))
        return s.substr(1, s.size() - 2);
    return s;
}

double parse_number(const ConfigValue& v, const std::string& key) {
    try {
        std::size_t used = 0;
        const double d = std::stod(v.raw, &used);
        if (used != v.raw.size()) throw std::invalid_argument("trailing characters");
        return d;
    } catch (const std::exception&) {
        throw ParseError(v.line_no, key, "expected a number, got '" + v.raw + "'");
    }
}

std::uint64_t parse_count(const ConfigValue& v, const std::string& key, bool allow_zero = false) {
    std::uint64_t n = 0;
    const char* begin = v.raw.data();
    const char* end = begin + v.raw.size();
    const auto [ptr, ec] = std::from_chars(begin, end, n);
    if (ec != std::errc{} || ptr != end)
        throw ParseError(v.line_no, key, "expected a non-negative integer, got '" + v.raw + "'");
    if (!allow_zero && n == 0) throw ParseError(v.line_no, key, "must be >= 1");
    return n;
}

}  // namespace

std::optional<std::uint64_t> env_seed_override() {
    const char* env = std::getenv("BLINE_SEED");
    if (env == nullptr || *env == '\0') return std::nullopt;
    std::uint64_t value = 0;
    const auto [ptr, ec] = std::from_chars(env, env + std::string_view(env).size(), value);
    if (ec != std::errc{} || *ptr != '\0')
        throw std::runtime_error("BLINE_SEED must be an unsigned integer");
    return value;
}

RunConfig parse_config(std::istream& in, const ParseOptions& options, Diagnostics* diagnostics) {
    RunConfig config;
    if (const auto seed = env_seed_override()) {
        config.sim.master_seed = *seed;
        config.bootstrap.seed = *seed;
    }

    std::map<std::string, ConfigValue> values;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto comment = line.find('#');
        if (comment != std::string::npos) line.erase(comment);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ParseError(line_no, "", "expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw ParseError(line_no, key, "expected 'key = value'");
        values[key] = {unquote(value), line_no};
    }

    const auto take = [&](const char* key) -> std::optional<ConfigValue> {
        const auto it = values.find(key);
        if (it == values.end()) return std::nullopt;
        ConfigValue v = it->second;
        values.erase(it);
        return v;
    };

    if (const auto v = take("metric.eval_cutoff")) config.metric.eval_cutoff = parse_number(*v, "metric.eval_cutoff");
    if (const auto v = take("metric.ingame_cutoff")) config.metric.ingame_cutoff = parse_number(*v, "metric.ingame_cutoff");
    if (config.metric.eval_cutoff <= 0.0 || config.metric.ingame_cutoff <= 0.0)
        throw std::invalid_argument("config: metric cutoffs must be > 0");

    if (const auto v = take("consensus.merge_cutoff")) config.consensus.merge_cutoff = parse_number(*v, "consensus.merge_cutoff");
    if (const auto v = take("consensus.majority_fraction")) config.consensus.majority_fraction = parse_number(*v, "consensus.majority_fraction");
    if (const auto v = take("consensus.linkage")) {
        if (v->raw == "single") config.consensus.linkage = Linkage::single;
        else if (v->raw == "complete") config.consensus.linkage = Linkage::complete;
        else if (v->raw == "average") config.consensus.linkage = Linkage::average;
        else throw ParseError(v->line_no, "consensus.linkage", "expected single|complete|average");
    }
    if (config.consensus.merge_cutoff <= 0.0)
        throw std::invalid_argument("config: consensus.merge_cutoff must be > 0");
    if (config.consensus.majority_fraction <= 0.0 || config.consensus.majority_fraction > 1.0)
        throw std::invalid_argument("config: consensus.majority_fraction must be in (0,1]");

    if (const auto v = take("selection.k")) config.selection.k = parse_count(*v, "selection.k");
    if (const auto v = take("selection.window")) {
        if (v->raw == "all") config.selection.window = 0;
        else config.selection.window = parse_count(*v, "selection.window");
    }
    if (const auto v = take("selection.min_training_opinions"))
        config.selection.min_training_opinions = parse_count(*v, "selection.min_training_opinions", true);

    if (const auto v = take("bootstrap.replicates")) config.bootstrap.replicates = parse_count(*v, "bootstrap.replicates");
    if (const auto v = take("bootstrap.alpha")) config.bootstrap.alpha = parse_number(*v, "bootstrap.alpha");
    if (const auto v = take("bootstrap.seed")) config.bootstrap.seed = parse_count(*v, "bootstrap.seed", true);
    if (config.bootstrap.replicates < 100)
        throw std::invalid_argument("config: bootstrap.replicates must be >= 100");
    if (!(config.bootstrap.alpha > 0.0 && config.bootstrap.alpha < 1.0))
        throw std::invalid_argument("config: bootstrap.alpha must be in (0,1)");

    if (const auto v = take("sim.n_train_cases")) config.sim.n_train_cases = parse_count(*v, "sim.n_train_cases");
    if (const auto v = take("sim.n_test_cases")) config.sim.n_test_cases = parse_count(*v, "sim.n_test_cases");
    if (const auto v = take("sim.train_ratio")) config.sim.train_test_ratio.first = static_cast<unsigned>(parse_count(*v, "sim.train_ratio"));
    if (const auto v = take("sim.test_ratio")) config.sim.train_test_ratio.second = static_cast<unsigned>(parse_count(*v, "sim.test_ratio"));
    if (const auto v = take("sim.n_experts")) config.sim.n_experts = parse_count(*v, "sim.n_experts");
    if (const auto v = take("sim.n_crowd")) config.sim.n_crowd = parse_count(*v, "sim.n_crowd");
    if (const auto v = take("sim.opinions_per_crowd_user")) config.sim.opinions_per_crowd_user = parse_number(*v, "sim.opinions_per_crowd_user");
    if (const auto v = take("sim.master_seed")) config.sim.master_seed = parse_count(*v, "sim.master_seed", true);
    if (config.sim.opinions_per_crowd_user <= 0.0)
        throw std::invalid_argument("config: sim.opinions_per_crowd_user must be > 0");

    if (const auto v = take("eval.learning_bin_width")) config.eval.learning_bin_width = parse_count(*v, "eval.learning_bin_width");

    for (const auto& [key, v] : values) {
        if (options.strict) throw ParseError(v.line_no, key, "unknown config key");
        if (diagnostics != nullptr)
            diagnostics->warnings.push_back("line " + std::to_string(v.line_no) +
                                            ": ignoring unknown config key '" + key + "'");
    }
    return config;
}

RunConfig load_config(const std::string& path, const ParseOptions& options,
                      Diagnostics* diagnostics) {
    auto in = open_input(path);
    return parse_config(in, options, diagnostics);
}

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

namespace {

json config_to_json(const RunConfig& c) {
    json j;
    j["metric"]["eval_cutoff"] = c.metric.eval_cutoff;
    j["metric"]["ingame_cutoff"] = c.metric.ingame_cutoff;
    j["consensus"]["merge_cutoff"] = c.consensus.merge_cutoff;
    j["consensus"]["majority_fraction"] = c.consensus.majority_fraction;
    j["consensus"]["linkage"] = c.consensus.linkage == Linkage::single     ? "single"
                                : c.consensus.linkage == Linkage::complete ? "complete"
                                                                           : "average";
    j["selection"]["k"] = c.selection.k;
    j["selection"]["window"] = c.selection.window == 0 ? json("all") : json(c.selection.window);
    j["selection"]["min_training_opinions"] = c.selection.min_training_opinions;
    j["bootstrap"]["replicates"] = c.bootstrap.replicates;
    j["bootstrap"]["alpha"] = c.bootstrap.alpha;
    j["bootstrap"]["seed"] = c.bootstrap.seed;
    j["sim"]["n_train_cases"] = c.sim.n_train_cases;
    j["sim"]["n_test_cases"] = c.sim.n_test_cases;
    j["sim"]["train_ratio"] = c.sim.train_test_ratio.first;
    j["sim"]["test_ratio"] = c.sim.train_test_ratio.second;
    j["sim"]["n_experts"] = c.sim.n_experts;
    j["sim"]["n_crowd"] = c.sim.n_crowd;
    j["sim"]["opinions_per_crowd_user"] = c.sim.opinions_per_crowd_user;
    j["sim"]["master_seed"] = c.sim.master_seed;
    j["eval"]["learning_bin_width"] = c.eval.learning_bin_width;
    return j;
}

json pvalue_to_json(const stats::PValue& p) {
    json j;
    j["p"] = p.p;
    j["capped"] = p.capped;
    return j;
}

json pearson_to_json(const std::optional<stats::PearsonResult>& r) {
    if (!r.has_value()) return nullptr;
    json j;
    j["r"] = r->r;
    j["p"] = pvalue_to_json(r->p);
    return j;
}

}  // namespace

void write_report(std::ostream& out, const eval::EvalReport& report, const RunConfig& config) {
    json j;
    j["schema_version"] = 1;
    j["config"] = config_to_json(config);

    json results;
    results["crowd_count_mse"] = report.crowd_count_mse;
    results["expert_count_mse"] = report.expert_count_mse;
    if (report.count_mse_test.has_value()) {
        json tt;
        tt["t"] = std::isfinite(report.count_mse_test->t) ? json(report.count_mse_test->t)
                                                          : json(nullptr);
        tt["p"] = pvalue_to_json(report.count_mse_test->p);
        results["count_mse_test"] = tt;
    } else {
        results["count_mse_test"] = nullptr;
    }
    results["crowd_mean_dice"] = report.crowd_mean_dice;
    results["expert_mean_dice"] = report.expert_mean_dice;
    if (report.dice_diff_ci.has_value()) {
        results["dice_diff_ci"] = {report.dice_diff_ci->first, report.dice_diff_ci->second};
    } else {
        results["dice_diff_ci"] = nullptr;
    }
    results["agreement_correlation"] = pearson_to_json(report.agreement_correlation);
    results["concordance_correlation"] = pearson_to_json(report.concordance_correlation);
    results["count_match_rate"] = report.count_match_rate.has_value()
                                      ? json(*report.count_match_rate)
                                      : json(nullptr);
    results["cases_evaluated"] = report.cases_evaluated;
    results["case_fold_comparisons"] = report.case_fold_comparisons;
    results["crowd_users_selected"] = report.crowd_users_selected;

    json curve = json::array();
    for (const auto& bin : report.curve) {
        json b;
        b["bin_index"] = bin.bin_index;
        b["first_opinion_idx"] = bin.first_opinion_idx;
        b["last_opinion_idx"] = bin.last_opinion_idx;
        b["mean_score"] = bin.mean_score;
        b["sem"] = bin.sem;
        b["annotator_count"] = bin.annotator_count;
        b["opinion_count"] = bin.opinion_count;
        b["low_support"] = bin.low_support;
        curve.push_back(b);
    }
    results["learning_curve"] = curve;

    json skipped = json::array();
    for (const auto& s : report.skipped) {
        json e;
        e["case_id"] = s.case_id;
        e["reason"] = s.reason;
        skipped.push_back(e);
    }
    results["skipped_cases"] = skipped;

    j["results"] = results;
    out << j.dump(2) << '\n';
}

void write_learning_curve_csv(std::ostream& out, std::span<const eval::LearningCurveBin> curve) {
    out << "bin_index,first_opinion_idx,last_opinion_idx,mean_dice,sem,annotator_count,"
           "opinion_count,low_support\n";
    for (const auto& b : curve) {
        out << b.bin_index << ',' << b.first_opinion_idx << ',' << b.last_opinion_idx << ','
            << format_double(b.mean_score) << ',' << format_double(b.sem) << ','
            << b.annotator_count << ',' << b.opinion_count << ',' << (b.low_support ? 1 : 0)
            << '\n';
    }
}

void write_bootstrap_csv(std::ostream& out, std::span<const double> replicates) {
    out << "replicate,dice_diff\n";
    for (std::size_t i = 0; i < replicates.size(); ++i)
        out << i << ',' << format_double(replicates[i]) << '\n';
}

void write_learning_curve_svg(std::ostream& out, std::span<const eval::LearningCurveBin> curve,
                              std::optional<double> expert_mean) {
    constexpr double width = 640.0, height = 400.0;
    constexpr double ml = 60.0, mr = 20.0, mt = 20.0, mb = 50.0;
    const double plot_w = width - ml - mr;
    const double plot_h = height - mt - mb;

    double max_x = 1.0;
    for (const auto& b : curve) max_x = std::max(max_x, static_cast<double>(b.last_opinion_idx));
    const auto sx = [&](double opinion_idx) { return ml + plot_w * opinion_idx / max_x; };
    const auto sy = [&](double score) { return mt + plot_h * (1.0 - score); };

    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
    out << "<rect width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";

    // axes and y ticks
    out << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\""
        << mt + plot_h << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << ml << "\" y1=\"" << mt + plot_h << "\" x2=\"" << ml + plot_w
        << "\" y2=\"" << mt + plot_h << "\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double v = 0.25 * i;
        out << "<text x=\"" << ml - 8 << "\" y=\"" << sy(v) + 4
            << "\" text-anchor=\"end\" font-size=\"12\">" << format_double(v) << "</text>\n";
        out << "<line x1=\"" << ml - 4 << "\" y1=\"" << sy(v) << "\" x2=\"" << ml << "\" y2=\""
            << sy(v) << "\" stroke=\"black\"/>\n";
    }
    out << "<text x=\"" << ml + plot_w / 2 << "\" y=\"" << height - 12
        << "\" text-anchor=\"middle\" font-size=\"13\">training opinions seen</text>\n";
    out << "<text x=\"16\" y=\"" << mt + plot_h / 2
        << "\" font-size=\"13\" transform=\"rotate(-90 16 " << mt + plot_h / 2
        << ")\" text-anchor=\"middle\">mean Dice-H</text>\n";

    if (expert_mean.has_value()) {
        out << "<line x1=\"" << ml << "\" y1=\"" << sy(*expert_mean) << "\" x2=\"" << ml + plot_w
            << "\" y2=\"" << sy(*expert_mean)
            << "\" stroke=\"gray\" stroke-dasharray=\"6 4\"/>\n";
        out << "<text x=\"" << ml + plot_w - 4 << "\" y=\"" << sy(*expert_mean) - 6
            << "\" text-anchor=\"end\" font-size=\"12\" fill=\"gray\">expert mean</text>\n";
    }

    std::string points;
    for (const auto& b : curve) {
        const double cx =
            0.5 * (static_cast<double>(b.first_opinion_idx) + static_cast<double>(b.last_opinion_idx));
        const double x = sx(cx), y = sy(b.mean_score);
        points += format_double(x) + "," + format_double(y) + " ";
        out << "<line x1=\"" << x << "\" y1=\"" << sy(b.mean_score - b.sem) << "\" x2=\"" << x
            << "\" y2=\"" << sy(b.mean_score + b.sem) << "\" stroke=\"steelblue\"/>\n";
        out << "<circle cx=\"" << x << "\" cy=\"" << y << "\" r=\"3\" fill=\"steelblue\"/>\n";
    }
    if (!points.empty()) {
        points.pop_back();
        out << "<polyline points=\"" << points
            << "\" fill=\"none\" stroke=\"steelblue\" stroke-width=\"1.5\"/>\n";
    }
    out << "</svg>\n";
}

}  // namespace bline::io
