#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "hgr/baselines.hpp"
#include "hgr/correlation.hpp"
#include "hgr/datagen.hpp"
#include "hgr/fairtrain.hpp"
#include "hgr/gradients.hpp"
#include "hgr/kernelspace.hpp"
#include "hgr/version.hpp"

#include "parallel.hpp"
#include "report.hpp"

namespace {

using hgrcli::json;

constexpr int kExitInput = 2;
constexpr int kExitNumerical = 3;

// ---------------------------------------------------------------------------
// shared input handling

struct PairInput {
    hgr::SampleVector a;
    hgr::SampleVector b;
    std::string sha256;
    json source;
};

std::pair<hgr::SampleVector, hgr::SampleVector> parse_two_column_csv(const std::string& text) {
    std::istringstream stream(text);
    std::string line;
    if (!std::getline(stream, line)) throw hgr::EmptyDatasetError("csv input is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();

    // header row: use columns named a and b when present, else the first two
    std::vector<std::string> header;
    {
        std::stringstream hs(line);
        std::string cell;
        while (std::getline(hs, cell, ',')) header.push_back(cell);
    }
    if (header.size() < 2) throw hgr::InputError("csv needs at least two columns");
    int col_a = 0;
    int col_b = 1;
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == "a") col_a = static_cast<int>(i);
        if (header[i] == "b") col_b = static_cast<int>(i);
    }

    std::vector<double> va, vb;
    int row = 1;
    while (std::getline(stream, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        ++row;
        std::vector<std::string> cells;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        if (static_cast<int>(cells.size()) <= std::max(col_a, col_b))
            throw hgr::InputError("row " + std::to_string(row) + " is too short");
        try {
            va.push_back(std::stod(cells[col_a]));
            vb.push_back(std::stod(cells[col_b]));
        } catch (const std::exception&) {
            throw hgr::NonNumericValueError("row " + std::to_string(row) +
                                            " has a non-numeric cell");
        }
    }
    if (va.empty()) throw hgr::EmptyDatasetError("csv has a header but no rows");
    Eigen::VectorXd ea = Eigen::Map<Eigen::VectorXd>(va.data(), static_cast<Eigen::Index>(va.size()));
    Eigen::VectorXd eb = Eigen::Map<Eigen::VectorXd>(vb.data(), static_cast<Eigen::Index>(vb.size()));
    return {hgr::SampleVector(std::move(ea), "a"), hgr::SampleVector(std::move(eb), "b")};
}

PairInput load_pair(const std::string& input_path, const std::string& synthetic_spec) {
    if (input_path.empty() == synthetic_spec.empty())
        throw hgr::InputError("exactly one of --input and --synthetic is required");
    if (!input_path.empty()) {
        const std::string bytes = hgrcli::read_file(input_path);
        auto [a, b] = parse_two_column_csv(bytes);
        return {std::move(a), std::move(b), hgrcli::sha256_hex(bytes),
                json{{"type", "file"}, {"path", input_path}}};
    }
    const hgr::SyntheticSpec spec = hgr::SyntheticSpec::parse(synthetic_spec);
    auto [a, b] = hgr::generate(spec);
    const std::string canonical = spec.to_string();
    return {std::move(a), std::move(b), hgrcli::sha256_hex(canonical),
            json{{"type", "synthetic"}, {"spec", canonical}}};
}

std::pair<int, int> parse_degree_pair(const std::string& text) {
    const auto comma = text.find(',');
    if (comma == std::string::npos)
        throw hgr::InputError("expected two comma-separated degrees, got '" + text + "'");
    try {
        return {std::stoi(text.substr(0, comma)), std::stoi(text.substr(comma + 1))};
    } catch (const std::exception&) {
        throw hgr::InputError("cannot parse degrees '" + text + "'");
    }
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream stream(text);
    std::string item;
    while (std::getline(stream, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

std::vector<double> parse_double_list(const std::string& text) {
    std::vector<double> out;
    for (const auto& item : split_list(text)) {
        try {
            out.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw hgr::InputError("cannot parse number '" + item + "'");
        }
    }
    return out;
}

std::vector<int> parse_int_list(const std::string& text) {
    std::vector<int> out;
    for (const auto& item : split_list(text)) {
        try {
            out.push_back(std::stoi(item));
        } catch (const std::exception&) {
            throw hgr::InputError("cannot parse integer '" + item + "'");
        }
    }
    return out;
}

json vector_to_json(const Eigen::VectorXd& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
    return out;
}

const char* direction_name(hgr::Direction d) {
    switch (d) {
        case hgr::Direction::Both: return "both";
        case hgr::Direction::AToB: return "a_to_b";
        case hgr::Direction::BToA: return "b_to_a";
    }
    return "both";
}

json result_to_json(const hgr::HgrResult& r) {
    json diag;
    diag["iterations"] = r.diagnostics.iterations;
    diag["final_residual"] = r.diagnostics.final_residual;
    diag["condition_a"] =
        std::isfinite(r.diagnostics.condition_a) ? json(r.diagnostics.condition_a) : json("inf");
    diag["condition_b"] =
        std::isfinite(r.diagnostics.condition_b) ? json(r.diagnostics.condition_b) : json("inf");
    diag["rank_deficient"] = r.diagnostics.rank_deficient;
    diag["degenerate"] = r.diagnostics.degenerate;
    return json{{"value", r.value},
                {"alpha", vector_to_json(r.alpha)},
                {"beta", vector_to_json(r.beta)},
                {"direction", direction_name(r.direction)},
                {"diagnostics", std::move(diag)}};
}

double mean_of(const std::vector<double>& v) {
    double acc = 0.0;
    for (double x : v) acc += x;
    return v.empty() ? 0.0 : acc / static_cast<double>(v.size());
}

double stddev_of(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    // identical values have zero spread; skip the mean roundoff
    if (std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); })) return 0.0;
    const double mu = mean_of(v);
    double acc = 0.0;
    for (double x : v) acc += (x - mu) * (x - mu);
    return std::sqrt(acc / static_cast<double>(v.size()));
}

double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    if (n == 0) return 0.0;
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out.is_open()) throw hgr::InputError("cannot write '" + path + "'");
    out << text;
}

void emit(const json& envelope) { std::cout << envelope.dump(2) << "\n"; }

// ---------------------------------------------------------------------------
// compute

struct ComputeOptions {
    std::string input;
    std::string synthetic;
    std::string method = "kb";
    std::string degrees = "5,5";
    int degree = 5;
    std::uint64_t seed = 0;
    std::string solver = "svd";
};

int cmd_compute(const ComputeOptions& opt) {
    hgrcli::Stopwatch watch;
    PairInput in = load_pair(opt.input, opt.synthetic);

    json config{{"method", opt.method}, {"seed", opt.seed}, {"source", in.source}};
    json results;

    hgr::SolverConfig solver;
    if (opt.solver == "refine")
        solver.algorithm = hgr::SolverAlgorithm::ProjectedGradient;
    else if (opt.solver != "svd")
        throw hgr::InputError("unknown solver '" + opt.solver + "' (svd or refine)");
    config["solver"] = opt.solver;

    if (opt.method == "kb") {
        const auto [h, k] = parse_degree_pair(opt.degrees);
        config["degrees"] = json{h, k};
        results = result_to_json(hgr::hgr_kb(in.a, in.b, {h, k}, solver));
    } else if (opt.method == "sk") {
        config["degree"] = opt.degree;
        results = result_to_json(hgr::hgr_sk(in.a, in.b, opt.degree, solver));
    } else if (opt.method == "rdc") {
        config["seed"] = opt.seed;
        results = json{{"value", hgr::rdc(in.a, in.b, hgr::RdcConfig(opt.seed))}};
    } else if (opt.method == "pearson") {
        results = json{{"value", hgr::pearson(in.a, in.b)},
                       {"value_lstsq", hgr::pearson_lstsq(in.a, in.b)}};
    } else {
        throw hgr::InputError("unknown method '" + opt.method + "'");
    }

    emit(hgrcli::envelope("compute", in.sha256, std::move(config), std::move(results),
                          watch.elapsed_ms()));
    return 0;
}

// ---------------------------------------------------------------------------
// scan

struct ScanOptions {
    std::string input;
    std::string synthetic;
    std::string max_degrees = "5,5";
    std::string csv_path;
};

int cmd_scan(const ScanOptions& opt) {
    hgrcli::Stopwatch watch;
    PairInput in = load_pair(opt.input, opt.synthetic);
    const auto [h_max, k_max] = parse_degree_pair(opt.max_degrees);

    json config{{"max_degrees", json{h_max, k_max}}, {"source", in.source}};

    Eigen::MatrixXd grid(h_max, k_max);
    Eigen::MatrixXd cell_ms(h_max, k_max);
    hgr::SolverConfig cfg;
    for (int h = 1; h <= h_max; ++h) {
        for (int k = 1; k <= k_max; ++k) {
            hgrcli::Stopwatch cell_watch;
            grid(h - 1, k - 1) = hgr::hgr_kb(in.a, in.b, {h, k}, cfg).value;
            cell_ms(h - 1, k - 1) = cell_watch.elapsed_ms();
        }
    }

    // monotonicity audit: growing either degree must not lose value
    json warnings = json::array();
    for (int h = 0; h < h_max; ++h) {
        for (int k = 0; k < k_max; ++k) {
            const double here = grid(h, k);
            if (h + 1 < h_max && grid(h + 1, k) < here - 1e-6)
                warnings.push_back(json{{"from", json{h + 1, k + 1}},
                                        {"to", json{h + 2, k + 1}},
                                        {"drop", here - grid(h + 1, k)}});
            if (k + 1 < k_max && grid(h, k + 1) < here - 1e-6)
                warnings.push_back(json{{"from", json{h + 1, k + 1}},
                                        {"to", json{h + 1, k + 2}},
                                        {"drop", here - grid(h, k + 1)}});
        }
    }

    json grid_json = json::array();
    json times_json = json::array();
    for (int h = 0; h < h_max; ++h) {
        json row = json::array();
        json trow = json::array();
        for (int k = 0; k < k_max; ++k) {
            row.push_back(grid(h, k));
            trow.push_back(cell_ms(h, k));
        }
        grid_json.push_back(std::move(row));
        times_json.push_back(std::move(trow));
    }

    if (!opt.csv_path.empty()) {
        std::ostringstream csv;
        csv << "h\\k";
        for (int k = 1; k <= k_max; ++k) csv << "," << k;
        csv << "\n";
        for (int h = 0; h < h_max; ++h) {
            csv << (h + 1);
            for (int k = 0; k < k_max; ++k) {
                char buf[64];
                auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), grid(h, k));
                (void)ec;
                csv << "," << std::string(buf, p);
            }
            csv << "\n";
        }
        write_text_file(opt.csv_path, csv.str());
        config["csv"] = opt.csv_path;
    }

    json results{{"grid", std::move(grid_json)}, {"monotonicity_warnings", std::move(warnings)}};
    json env = hgrcli::envelope("scan", in.sha256, std::move(config), std::move(results),
                                watch.elapsed_ms());
    env["timings_ms"]["cells"] = std::move(times_json);
    emit(env);
    return 0;
}

// ---------------------------------------------------------------------------
// detect

struct DetectOptions {
    std::string relations = "linear,quadratic,cubic,circular,sin_of_square";
    std::string sigmas = "0,0.1,0.5";
    int seeds = 10;
    std::string methods = "pearson,kb,sk,rdc";
    int n = 500;
    std::uint64_t data_seed = 0;
    std::string degrees = "5,5";
    int degree = 5;
};

int cmd_detect(const DetectOptions& opt) {
    hgrcli::Stopwatch watch;
    const std::vector<std::string> relations = split_list(opt.relations);
    const std::vector<double> sigmas = parse_double_list(opt.sigmas);
    const std::vector<std::string> methods = split_list(opt.methods);
    const auto [h, k] = parse_degree_pair(opt.degrees);
    if (opt.seeds < 1) throw hgr::InputError("need at least one seed");

    json config{{"relations", relations}, {"sigmas", sigmas},   {"seeds", opt.seeds},
                {"methods", methods},     {"n", opt.n},         {"data_seed", opt.data_seed},
                {"degrees", json{h, k}},  {"degree", opt.degree}};

    struct Item {
        std::string relation;
        double sigma;
        json payload;
    };
    std::vector<Item> items;
    for (const auto& rel : relations)
        for (double sigma : sigmas) items.push_back({rel, sigma, {}});

    const int h_deg = h, k_deg = k;  // structured bindings cannot be captured directly
    hgrcli::parallel_for(static_cast<int>(items.size()), [&](int idx) {
        Item& item = items[idx];
        hgr::SyntheticSpec spec;
        spec.relation = hgr::relation_from_string(item.relation);
        spec.n = opt.n;
        spec.noise_sigma = item.sigma;
        spec.seed = opt.data_seed;
        auto [a, b] = hgr::generate(spec);
        const double oracle = hgr::oracle_correlation(spec, a, b);

        json per_method;
        for (const auto& method : methods) {
            std::vector<double> values;
            std::vector<double> runtimes;
            for (int s = 0; s < opt.seeds; ++s) {
                hgrcli::Stopwatch run_watch;
                double value = 0.0;
                if (method == "pearson") {
                    value = std::abs(hgr::pearson(a, b));
                } else if (method == "kb") {
                    value = hgr::hgr_kb(a, b, {h_deg, k_deg}).value;
                } else if (method == "sk") {
                    value = hgr::hgr_sk(a, b, opt.degree).value;
                } else if (method == "rdc") {
                    value = hgr::rdc(a, b, hgr::RdcConfig(static_cast<std::uint64_t>(s)));
                } else {
                    throw hgr::InputError("unknown method '" + method + "'");
                }
                values.push_back(value);
                runtimes.push_back(run_watch.elapsed_ms());
            }
            per_method[method] = json{{"values", values},
                                      {"mean", mean_of(values)},
                                      {"std", stddev_of(values)},
                                      {"runtime_ms_median", median_of(runtimes)}};
        }
        item.payload = json{{"relation", item.relation},
                            {"sigma", item.sigma},
                            {"oracle", oracle},
                            {"methods", std::move(per_method)}};
    });

    json results = json::array();
    for (auto& item : items) results.push_back(std::move(item.payload));
    emit(hgrcli::envelope("detect", hgrcli::sha256_hex(config.dump()), std::move(config),
                          std::move(results), watch.elapsed_ms()));
    return 0;
}

// ---------------------------------------------------------------------------
// determinism

struct DeterminismOptions {
    std::string input;
    std::string synthetic;
    int runs = 30;
    std::string methods = "kb,sk,rdc";
    std::string degrees = "5,5";
    int degree = 5;
};

int cmd_determinism(const DeterminismOptions& opt) {
    hgrcli::Stopwatch watch;
    PairInput in = load_pair(opt.input, opt.synthetic);
    if (opt.runs < 1) throw hgr::InputError("need at least one run");
    const auto [h, k] = parse_degree_pair(opt.degrees);
    const std::vector<std::string> methods = split_list(opt.methods);

    json config{{"runs", opt.runs},
                {"methods", methods},
                {"degrees", json{h, k}},
                {"degree", opt.degree},
                {"source", in.source}};

    json results;
    for (const auto& method : methods) {
        std::vector<double> values;
        for (int r = 0; r < opt.runs; ++r) {
            if (method == "kb") {
                values.push_back(hgr::hgr_kb(in.a, in.b, {h, k}).value);
            } else if (method == "sk") {
                values.push_back(hgr::hgr_sk(in.a, in.b, opt.degree).value);
            } else if (method == "pearson") {
                values.push_back(std::abs(hgr::pearson(in.a, in.b)));
            } else if (method == "rdc") {
                values.push_back(hgr::rdc(in.a, in.b, hgr::RdcConfig(static_cast<std::uint64_t>(r))));
            } else {
                throw hgr::InputError("unknown method '" + method + "'");
            }
        }
        bool bit_identical = true;
        for (double v : values)
            if (v != values.front()) bit_identical = false;
        results[method] = json{{"values", values},
                               {"mean", mean_of(values)},
                               {"std", stddev_of(values)},
                               {"bit_identical", bit_identical}};
    }

    emit(hgrcli::envelope("determinism", in.sha256, std::move(config), std::move(results),
                          watch.elapsed_ms()));
    return 0;
}

// ---------------------------------------------------------------------------
// bench

struct BenchOptions {
    std::string sizes = "1000,10000";
    int degree = 5;
    int repeats = 5;
    std::uint64_t seed = 0;
};

int cmd_bench(const BenchOptions& opt) {
    hgrcli::Stopwatch watch;
    const std::vector<int> sizes = parse_int_list(opt.sizes);
    if (opt.repeats < 1) throw hgr::InputError("need at least one repeat");

    json config{{"sizes", sizes}, {"degree", opt.degree}, {"repeats", opt.repeats},
                {"seed", opt.seed}};

    hgr::SolverConfig refine;
    refine.algorithm = hgr::SolverAlgorithm::ProjectedGradient;

    json results = json::array();
    for (int n : sizes) {
        hgr::SyntheticSpec spec;
        spec.relation = hgr::Relation::Cubic;
        spec.n = n;
        spec.noise_sigma = 0.1;
        spec.seed = opt.seed;
        auto [a, b] = hgr::generate(spec);

        std::vector<double> sk_ms, kb_refine_ms;
        double sk_value = 0.0, kb_value = 0.0;
        for (int r = 0; r < opt.repeats; ++r) {
            hgrcli::Stopwatch sk_watch;
            sk_value = hgr::hgr_sk(a, b, opt.degree).value;
            sk_ms.push_back(sk_watch.elapsed_ms());

            hgrcli::Stopwatch kb_watch;
            kb_value = hgr::hgr_kb(a, b, {opt.degree, opt.degree}, refine).value;
            kb_refine_ms.push_back(kb_watch.elapsed_ms());
        }
        const double sk_median = median_of(sk_ms);
        const double kb_median = median_of(kb_refine_ms);
        results.push_back(json{{"n", n},
                               {"sk", json{{"value", sk_value}, {"median_ms", sk_median}}},
                               {"kb_refine", json{{"value", kb_value}, {"median_ms", kb_median}}},
                               {"speedup", kb_median > 0.0 ? kb_median / std::max(sk_median, 1e-9)
                                                           : 0.0}});
    }

    emit(hgrcli::envelope("bench", hgrcli::sha256_hex(config.dump()), std::move(config),
                          std::move(results), watch.elapsed_ms()));
    return 0;
}

// ---------------------------------------------------------------------------
// inspect

struct InspectOptions {
    std::string input;
    std::string synthetic;
    std::string degrees = "5,5";
    double test_split = 0.0;
    std::string csv_path;
};

int cmd_inspect(const InspectOptions& opt) {
    hgrcli::Stopwatch watch;
    PairInput in = load_pair(opt.input, opt.synthetic);
    const auto [h, k] = parse_degree_pair(opt.degrees);
    if (opt.test_split < 0.0 || opt.test_split >= 1.0)
        throw hgr::InputError("test split fraction must lie in [0, 1)");

    json config{{"degrees", json{h, k}}, {"test_split", opt.test_split}, {"source", in.source}};

    const Eigen::Index n = in.a.size();
    const Eigen::Index n_train =
        opt.test_split > 0.0
            ? std::max<Eigen::Index>(static_cast<Eigen::Index>(
                                         std::ceil(static_cast<double>(n) * (1.0 - opt.test_split))),
                                     std::max(h, k) + 1)
            : n;

    const hgr::SampleVector train_a{Eigen::VectorXd(in.a.values().head(n_train)), "a"};
    const hgr::SampleVector train_b{Eigen::VectorXd(in.b.values().head(n_train)), "b"};

    const hgr::HgrResult fit = hgr::hgr_kb(train_a, train_b, {h, k});
    const hgr::KernelMatrix ka = hgr::expand(train_a, h);
    const hgr::KernelMatrix kb = hgr::expand(train_b, k);
    const Eigen::VectorXd fa = ka.centered * fit.alpha;
    const Eigen::VectorXd gb = kb.centered * fit.beta;

    json results;
    results["train"] = result_to_json(fit);
    results["projected_correlation"] =
        hgr::pearson(hgr::SampleVector(fa), hgr::SampleVector(gb));

    if (opt.test_split > 0.0 && n_train < n) {
        const Eigen::VectorXd test_a = in.a.values().tail(n - n_train);
        const Eigen::VectorXd test_b = in.b.values().tail(n - n_train);
        const Eigen::VectorXd fa_test = ka.apply(test_a) * fit.alpha;
        const Eigen::VectorXd gb_test = kb.apply(test_b) * fit.beta;
        const double test_value =
            std::abs(hgr::pearson(hgr::SampleVector(fa_test), hgr::SampleVector(gb_test)));
        results["test"] = json{{"value", test_value},
                               {"gap", fit.value - test_value},
                               {"n_train", n_train},
                               {"n_test", n - n_train}};
    }

    if (!opt.csv_path.empty()) {
        std::ostringstream csv;
        csv << "a,b,fa,gb\n";
        char buf[64];
        auto put = [&](double v, char sep) {
            auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
            (void)ec;
            csv << std::string(buf, p) << sep;
        };
        for (Eigen::Index i = 0; i < n_train; ++i) {
            put(train_a.values()(i), ',');
            put(train_b.values()(i), ',');
            put(fa(i), ',');
            put(gb(i), '\n');
        }
        write_text_file(opt.csv_path, csv.str());
        config["csv"] = opt.csv_path;
    }

    emit(hgrcli::envelope("inspect", in.sha256, std::move(config), std::move(results),
                          watch.elapsed_ms()));
    return 0;
}

// ---------------------------------------------------------------------------
// train

struct TrainOptions {
    std::string data;
    std::string schema;
    std::string penalizer = "none";
    double tau = 0.3;
    int folds = 5;
    std::uint64_t seed = 0;
    int epochs = 500;
    int n_synthetic = 2000;
    std::uint64_t data_seed = 1;
    std::string degrees = "5,5";
    int degree = 5;
    bool trajectory = false;
};

hgr::DatasetSchema parse_schema(const std::string& text) {
    hgr::DatasetSchema schema;
    for (const auto& item : split_list(text)) {
        const auto eq = item.find('=');
        if (eq == std::string::npos)
            throw hgr::InputError("schema items must look like key=value, got '" + item + "'");
        const std::string key = item.substr(0, eq);
        const std::string value = item.substr(eq + 1);
        if (key == "target")
            schema.target = value;
        else if (key == "protected")
            schema.protected_attr = value;
        else if (key == "categorical")
            schema.categorical.push_back(value);
        else
            throw hgr::InputError("unknown schema key '" + key + "'");
    }
    if (schema.target.empty() || schema.protected_attr.empty())
        throw hgr::InputError("schema needs target=... and protected=...");
    return schema;
}

int cmd_train(const TrainOptions& opt) {
    hgrcli::Stopwatch watch;
    const auto [h, k] = parse_degree_pair(opt.degrees);

    hgr::Dataset data;
    std::string input_sha;
    json source;
    if (opt.data == "synthetic") {
        data = hgr::synthetic_fairness_dataset(opt.n_synthetic, opt.data_seed);
        const std::string canonical =
            "fairness:n=" + std::to_string(opt.n_synthetic) + ":seed=" + std::to_string(opt.data_seed);
        input_sha = hgrcli::sha256_hex(canonical);
        source = json{{"type", "synthetic"}, {"spec", canonical}};
    } else {
        const std::string bytes = hgrcli::read_file(opt.data);
        data = hgr::load_csv(opt.data, parse_schema(opt.schema));
        input_sha = hgrcli::sha256_hex(bytes);
        source = json{{"type", "file"}, {"path", opt.data}, {"schema", opt.schema}};
    }

    hgr::TrainConfig cfg;
    cfg.tau = opt.tau;
    cfg.epochs = opt.epochs;
    cfg.deg = {h, k};
    cfg.sk_degree = opt.degree;
    if (opt.penalizer == "none")
        cfg.penalizer = hgr::Penalizer::None;
    else if (opt.penalizer == "kb")
        cfg.penalizer = hgr::Penalizer::HgrKb;
    else if (opt.penalizer == "sk")
        cfg.penalizer = hgr::Penalizer::HgrSk;
    else
        throw hgr::InputError("unknown penalizer '" + opt.penalizer + "'");

    json config{{"penalizer", opt.penalizer},
                {"tau", opt.tau},
                {"folds", opt.folds},
                {"seed", opt.seed},
                {"epochs", opt.epochs},
                {"degrees", json{h, k}},
                {"degree", opt.degree},
                {"source", source}};

    const auto folds = hgr::kfold_indices(static_cast<int>(data.rows()), opt.folds, opt.seed);

    struct FoldOutcome {
        json payload;
    };
    std::vector<FoldOutcome> outcomes(folds.size());

    std::vector<double> score_train, score_val, kb_train, kb_val, sk_train, sk_val, times;
    for (std::size_t f = 0; f < folds.size(); ++f) {
        std::vector<int> train_rows;
        for (std::size_t g = 0; g < folds.size(); ++g)
            if (g != f) train_rows.insert(train_rows.end(), folds[g].begin(), folds[g].end());
        const hgr::Dataset train_set = data.subset(train_rows);
        const hgr::Dataset val_set = data.subset(folds[f]);

        hgr::TrainConfig fold_cfg = cfg;
        fold_cfg.seed = opt.seed * 1000 + 100 + f;
        const hgr::TrainRun run = hgr::train(train_set, fold_cfg);
        const hgr::Evaluation on_train = hgr::evaluate(run.final_state, train_set, cfg.deg, opt.degree);
        const hgr::Evaluation on_val = hgr::evaluate(run.final_state, val_set, cfg.deg, opt.degree);

        score_train.push_back(on_train.score);
        score_val.push_back(on_val.score);
        kb_train.push_back(on_train.constraint_kb);
        kb_val.push_back(on_val.constraint_kb);
        sk_train.push_back(on_train.constraint_sk);
        sk_val.push_back(on_val.constraint_sk);
        times.push_back(run.wall_clock_seconds);

        json fold_json{{"fold", f},
                       {"score", json{{"train", on_train.score}, {"val", on_val.score}}},
                       {"constraint_kb",
                        json{{"train", on_train.constraint_kb}, {"val", on_val.constraint_kb}}},
                       {"constraint_sk",
                        json{{"train", on_train.constraint_sk}, {"val", on_val.constraint_sk}}},
                       {"lambda_final", run.trajectory.back().lambda},
                       {"degenerate", on_val.degenerate}};
        if (opt.trajectory) {
            json traj = json::array();
            for (const auto& rec : run.trajectory)
                traj.push_back(json{{"task_loss", rec.task_loss},
                                    {"score", rec.score},
                                    {"constraint", rec.constraint},
                                    {"lambda", rec.lambda}});
            fold_json["trajectory"] = std::move(traj);
        }
        outcomes[f].payload = std::move(fold_json);
    }

    json folds_json = json::array();
    for (auto& outcome : outcomes) folds_json.push_back(std::move(outcome.payload));

    auto agg = [](const std::vector<double>& v) {
        return json{{"mean", mean_of(v)}, {"std", stddev_of(v)}};
    };
    json results{{"folds", std::move(folds_json)},
                 {"aggregate",
                  json{{"score", json{{"train", agg(score_train)}, {"val", agg(score_val)}}},
                       {"constraint_kb", json{{"train", agg(kb_train)}, {"val", agg(kb_val)}}},
                       {"constraint_sk", json{{"train", agg(sk_train)}, {"val", agg(sk_val)}}}}}};

    // wall clock stays outside the deterministic payload region
    json env = hgrcli::envelope("train", input_sha, std::move(config), std::move(results),
                                watch.elapsed_ms());
    env["timings_ms"]["fold_train_s"] = times;
    env["timings_ms"]["fold_train_s_aggregate"] = agg(times);
    emit(env);
    return 0;
}

// ---------------------------------------------------------------------------
// generate

struct GenerateOptions {
    std::string spec;
    std::string output;
};

int cmd_generate(const GenerateOptions& opt) {
    hgrcli::Stopwatch watch;
    const hgr::SyntheticSpec spec = hgr::SyntheticSpec::parse(opt.spec);
    auto [a, b] = hgr::generate(spec);
    const std::string csv = hgr::to_csv(a, b);
    json config{{"spec", spec.to_string()}};
    json results{{"n", spec.n}, {"csv_sha256", hgrcli::sha256_hex(csv)}};
    if (!opt.output.empty()) {
        write_text_file(opt.output, csv);
        results["path"] = opt.output;
    } else {
        results["csv"] = csv;
    }
    emit(hgrcli::envelope("generate", hgrcli::sha256_hex(spec.to_string()), std::move(config),
                          std::move(results), watch.elapsed_ms()));
    return 0;
}

// ---------------------------------------------------------------------------

const char* error_name(const std::exception& e) {
    if (dynamic_cast<const hgr::ZeroVarianceError*>(&e)) return "ZeroVariance";
    if (dynamic_cast<const hgr::InvalidDegreeError*>(&e)) return "InvalidDegree";
    if (dynamic_cast<const hgr::LengthMismatchError*>(&e)) return "LengthMismatch";
    if (dynamic_cast<const hgr::DimensionMismatchError*>(&e)) return "DimensionMismatch";
    if (dynamic_cast<const hgr::InvalidSpecError*>(&e)) return "InvalidSpec";
    if (dynamic_cast<const hgr::NoOracleError*>(&e)) return "NoOracle";
    if (dynamic_cast<const hgr::MissingColumnError*>(&e)) return "MissingColumn";
    if (dynamic_cast<const hgr::NonNumericValueError*>(&e)) return "NonNumericValue";
    if (dynamic_cast<const hgr::EmptyDatasetError*>(&e)) return "EmptyDataset";
    if (dynamic_cast<const hgr::NumericalError*>(&e)) return "Numerical";
    if (dynamic_cast<const hgr::InputError*>(&e)) return "Input";
    return "Internal";
}

int fail(const std::exception& e) {
    const bool input_side = dynamic_cast<const hgr::InputError*>(&e) != nullptr;
    json err{{"error", json{{"type", error_name(e)}, {"message", e.what()}}}};
    std::cerr << err.dump() << "\n";
    return input_side ? kExitInput : kExitNumerical;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"polynomial-kernel maximal correlation toolkit"};
    app.set_version_flag("--version", hgr::kVersion);
    app.require_subcommand(1);

    ComputeOptions compute_opt;
    auto* compute = app.add_subcommand("compute", "compute one correlation indicator");
    compute->add_option("--input", compute_opt.input, "two-column csv with header");
    compute->add_option("--synthetic", compute_opt.synthetic, "relation:n=..:sigma=..[:seed=..]");
    compute->add_option("--method", compute_opt.method, "kb | sk | rdc | pearson");
    compute->add_option("--degrees", compute_opt.degrees, "h,k for kb");
    compute->add_option("--degree", compute_opt.degree, "d for sk");
    compute->add_option("--seed", compute_opt.seed, "seed for rdc");
    compute->add_option("--solver", compute_opt.solver, "svd | refine (kb only)");

    ScanOptions scan_opt;
    auto* scan = app.add_subcommand("scan", "degree grid of kb values");
    scan->add_option("--input", scan_opt.input, "two-column csv with header");
    scan->add_option("--synthetic", scan_opt.synthetic, "relation:n=..:sigma=..[:seed=..]");
    scan->add_option("--max-degrees", scan_opt.max_degrees, "H,K grid bounds");
    scan->add_option("--csv", scan_opt.csv_path, "write the grid as csv");

    DetectOptions detect_opt;
    auto* detect = app.add_subcommand("detect", "indicator quality across synthetic relations");
    detect->add_option("--relations", detect_opt.relations, "comma list of relations");
    detect->add_option("--sigmas", detect_opt.sigmas, "comma list of noise levels");
    detect->add_option("--seeds", detect_opt.seeds, "method seeds per cell");
    detect->add_option("--methods", detect_opt.methods, "comma list of methods");
    detect->add_option("--n", detect_opt.n, "sample size");
    detect->add_option("--data-seed", detect_opt.data_seed, "seed for data generation");
    detect->add_option("--degrees", detect_opt.degrees, "h,k for kb");
    detect->add_option("--degree", detect_opt.degree, "d for sk");

    DeterminismOptions det_opt;
    auto* determinism = app.add_subcommand("determinism", "repeated-run stability audit");
    determinism->add_option("--input", det_opt.input, "two-column csv with header");
    determinism->add_option("--synthetic", det_opt.synthetic, "relation:n=..:sigma=..[:seed=..]");
    determinism->add_option("--runs", det_opt.runs, "repetitions per method");
    determinism->add_option("--methods", det_opt.methods, "comma list of methods");
    determinism->add_option("--degrees", det_opt.degrees, "h,k for kb");
    determinism->add_option("--degree", det_opt.degree, "d for sk");

    BenchOptions bench_opt;
    auto* bench = app.add_subcommand("bench", "least-squares vs refinement timing");
    bench->add_option("--sizes", bench_opt.sizes, "comma list of sample sizes");
    bench->add_option("--degree", bench_opt.degree, "kernel degree");
    bench->add_option("--repeats", bench_opt.repeats, "timed repetitions");
    bench->add_option("--seed", bench_opt.seed, "data seed");

    InspectOptions inspect_opt;
    auto* inspect = app.add_subcommand("inspect", "kernel coefficients and projections");
    inspect->add_option("--input", inspect_opt.input, "two-column csv with header");
    inspect->add_option("--synthetic", inspect_opt.synthetic, "relation:n=..:sigma=..[:seed=..]");
    inspect->add_option("--degrees", inspect_opt.degrees, "h,k");
    inspect->add_option("--test-split", inspect_opt.test_split, "held-out fraction in [0,1)");
    inspect->add_option("--csv", inspect_opt.csv_path, "write pointwise projections as csv");

    TrainOptions train_opt;
    auto* train = app.add_subcommand("train", "constrained training with cross-validation");
    train->add_option("--data", train_opt.data, "csv path or 'synthetic'");
    train->add_option("--schema", train_opt.schema, "target=..,protected=..[,categorical=..]");
    train->add_option("--penalizer", train_opt.penalizer, "none | kb | sk");
    train->add_option("--tau", train_opt.tau, "constraint threshold");
    train->add_option("--folds", train_opt.folds, "cross-validation folds");
    train->add_option("--seed", train_opt.seed, "training seed");
    train->add_option("--epochs", train_opt.epochs, "training epochs");
    train->add_option("--n", train_opt.n_synthetic, "rows for synthetic data");
    train->add_option("--data-seed", train_opt.data_seed, "seed for synthetic data");
    train->add_option("--degrees", train_opt.degrees, "h,k for the kb penalizer");
    train->add_option("--degree", train_opt.degree, "d for the sk penalizer");
    train->add_flag("--trajectory", train_opt.trajectory, "include per-epoch records");

    GenerateOptions gen_opt;
    auto* generate = app.add_subcommand("generate", "emit a synthetic dataset as csv");
    generate->add_option("--spec", gen_opt.spec, "relation:n=..:sigma=..[:seed=..]")->required();
    generate->add_option("--output", gen_opt.output, "csv path (stdout payload if omitted)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitInput;
    }

    try {
        if (compute->parsed()) return cmd_compute(compute_opt);
        if (scan->parsed()) return cmd_scan(scan_opt);
        if (detect->parsed()) return cmd_detect(detect_opt);
        if (determinism->parsed()) return cmd_determinism(det_opt);
        if (bench->parsed()) return cmd_bench(bench_opt);
        if (inspect->parsed()) return cmd_inspect(inspect_opt);
        if (train->parsed()) return cmd_train(train_opt);
        if (generate->parsed()) return cmd_generate(gen_opt);
    } catch (const std::exception& e) {
        return fail(e);
    }
    return 0;
}
