#include "cbayes/io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

namespace cbayes {

using nlohmann::json;

namespace {

[[noreturn]] void config_error(const std::string& field, const std::string& what) {
    fail(ErrorKind::Config, "config field '" + field + "': " + what);
}

std::vector<double> as_vector(const json& v, const std::string& field) {
    if (v.is_number()) return {v.get<double>()};
    if (v.is_array()) {
        std::vector<double> out;
        for (const auto& x : v) {
            if (!x.is_number()) config_error(field, "expected numbers");
            out.push_back(x.get<double>());
        }
        return out;
    }
    config_error(field, "expected a number or a list of numbers");
}

std::size_t as_count(const json& v, const std::string& field, std::size_t min) {
    if (!v.is_number_integer()) config_error(field, "expected an integer");
    if (v.is_number_unsigned() || v.get<std::int64_t>() >= 0) {
        const auto n = v.get<std::uint64_t>();
        if (n < min) config_error(field, "must be at least " + std::to_string(min) + ", got " + std::to_string(n));
        return static_cast<std::size_t>(n);
    }
    config_error(field, "must be non-negative, got " + std::to_string(v.get<std::int64_t>()));
}

double as_number(const json& v, const std::string& field) {
    if (!v.is_number()) config_error(field, "expected a number");
    return v.get<double>();
}

const json& member(const json& spec, const char* key, const std::string& field) {
    const auto it = spec.find(key);
    if (it == spec.end()) config_error(field, std::string("missing '") + key + "'");
    return *it;
}

}  // namespace

DensityModel density_from_json(const json& spec, const DensityContext& ctx, const std::string& field) {
    if (!spec.is_object() || !spec.contains("kind") || !spec["kind"].is_string()) {
        config_error(field, "expected an object with a string 'kind'");
    }
    const std::string kind = spec["kind"].get<std::string>();
    try {
        if (kind == "uniform" || kind == "beta") {
            ParameterDomain box = ParameterDomain::unbounded(std::max<std::size_t>(ctx.param_dim, 1));
            if (spec.contains("lower") || spec.contains("upper")) {
                const auto lo = as_vector(member(spec, "lower", field), field + ".lower");
                const auto hi = as_vector(member(spec, "upper", field), field + ".upper");
                if (lo.size() != hi.size()) config_error(field, "lower and upper differ in length");
                box = ParameterDomain::box(lo, hi);
            } else if (ctx.domain && ctx.domain->bounded()) {
                box = *ctx.domain;
            } else {
                config_error(field, "needs explicit bounds because the model domain is unbounded");
            }
            if (kind == "uniform") return uniform_box(box);
            return beta(as_number(member(spec, "alpha", field), field + ".alpha"),
                        as_number(member(spec, "beta", field), field + ".beta"), box);
        }
        if (kind == "normal") {
            return normal(as_vector(member(spec, "mean", field), field + ".mean"),
                          as_vector(member(spec, "std", field), field + ".std"));
        }
        if (kind == "standard_normal") {
            const std::size_t dim = spec.contains("dim") ? as_count(spec["dim"], field + ".dim", 1) : ctx.param_dim;
            return standard_normal(dim);
        }
        if (kind == "truncated_normal") {
            const bool renorm = spec.contains("renormalize") ? spec["renormalize"].get<bool>()
                                                             : ctx.renormalize_truncated_normal;
            return truncated_normal(as_number(member(spec, "mean", field), field + ".mean"),
                                    as_number(member(spec, "std", field), field + ".std"),
                                    as_number(member(spec, "lower", field), field + ".lower"),
                                    as_number(member(spec, "upper", field), field + ".upper"), renorm);
        }
        if (kind == "multivariate_normal") {
            const auto mean = as_vector(member(spec, "mean", field), field + ".mean");
            std::vector<std::vector<double>> rows;
            for (const auto& r : member(spec, "covariance", field)) rows.push_back(as_vector(r, field + ".covariance"));
            return multivariate_normal(mean, Matrix::from_rows(rows));
        }
        if (kind == "chi_squared") return chi_squared(as_number(member(spec, "dof", field), field + ".dof"));
        if (kind == "uniform_interval") {
            return uniform_interval(as_number(member(spec, "a", field), field + ".a"),
                                    as_number(member(spec, "b", field), field + ".b"));
        }
        if (kind == "product") {
            std::vector<DensityModel> parts;
            const auto& comps = member(spec, "components", field);
            for (std::size_t i = 0; i < comps.size(); ++i) {
                parts.push_back(density_from_json(comps[i], {}, field + ".components[" + std::to_string(i) + "]"));
            }
            return product(std::move(parts));
        }
        if (kind == "quantile_matched") {
            return quantile_matched_uniform_observed(ctx.param_dim, ctx.qoi_dim, ctx.block_quantile);
        }
    } catch (const json::exception& e) {
        config_error(field, e.what());
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::Config) throw;
        config_error(field, e.what());
    }
    config_error(field, "unknown density kind '" + kind + "'");
}

RunConfig RunConfig::from_json(const json& j) {
    if (!j.is_object()) fail(ErrorKind::Config, "config must be a JSON object");
    static const std::set<std::string> known{
        "experiment_id", "model",      "prior",       "observed",         "samples",
        "seed",          "bandwidth",  "output_dir",  "block_quantile",   "renormalize_truncated_normal",
        "safety_factor", "workers",    "probe_count", "dominance_threshold", "dims",
        "qoi_counts",    "sample_sizes", "reps",      "eval_count",       "random_covariance",
        "synthetic",     "synthetic_exponent", "powers", "datum",         "sigma",
        "deltas"};
    for (const auto& [key, _] : j.items()) {
        if (!known.contains(key)) config_error(key, "unknown key");
    }
    RunConfig c;
    auto str = [&](const char* key, std::string& dst) {
        if (!j.contains(key)) return;
        if (!j[key].is_string()) config_error(key, "expected a string");
        dst = j[key].get<std::string>();
    };
    auto boolean = [&](const char* key, bool& dst) {
        if (!j.contains(key)) return;
        if (!j[key].is_boolean()) config_error(key, "expected true or false");
        dst = j[key].get<bool>();
    };
    auto count = [&](const char* key, std::size_t& dst, std::size_t min) {
        if (j.contains(key)) dst = as_count(j[key], key, min);
    };
    auto number = [&](const char* key, double& dst) {
        if (j.contains(key)) dst = as_number(j[key], key);
    };
    auto counts = [&](const char* key, std::vector<std::size_t>& dst, std::size_t min) {
        if (!j.contains(key)) return;
        if (!j[key].is_array() || j[key].empty()) config_error(key, "expected a nonempty list of integers");
        dst.clear();
        for (const auto& v : j[key]) dst.push_back(as_count(v, key, min));
    };

    str("experiment_id", c.experiment_id);
    str("model", c.model);
    if (j.contains("prior")) c.prior = j["prior"];
    if (j.contains("observed")) c.observed = j["observed"];
    count("samples", c.samples, 2);
    if (j.contains("seed")) {
        if (!j["seed"].is_number_unsigned()) config_error("seed", "expected a non-negative integer");
        c.seed = j["seed"].get<std::uint64_t>();
    }
    if (j.contains("bandwidth")) {
        const auto& b = j["bandwidth"];
        try {
            if (b.is_string()) {
                c.bandwidth = BandwidthRule::parse(b.get<std::string>());
            } else {
                c.bandwidth = BandwidthRule::explicit_bandwidth(as_vector(b, "bandwidth"));
            }
        } catch (const Error& e) {
            config_error("bandwidth", e.what());
        }
    }
    str("output_dir", c.output_dir);
    if (j.contains("block_quantile")) {
        if (!j["block_quantile"].is_string()) config_error("block_quantile", "expected a string");
        try {
            c.block_quantile = parse_block_quantile(j["block_quantile"].get<std::string>());
        } catch (const Error& e) {
            config_error("block_quantile", e.what());
        }
    }
    boolean("renormalize_truncated_normal", c.renormalize_truncated_normal);
    number("safety_factor", c.safety_factor);
    if (c.safety_factor < 1.0) config_error("safety_factor", "must be at least 1");
    count("workers", c.workers, 1);
    count("probe_count", c.probe_count, 0);
    count("dominance_threshold", c.dominance_threshold, 0);
    counts("dims", c.dims, 1);
    counts("qoi_counts", c.qoi_counts, 1);
    counts("sample_sizes", c.sample_sizes, 2);
    count("reps", c.reps, 1);
    count("eval_count", c.eval_count, 1);
    boolean("random_covariance", c.random_covariance);
    boolean("synthetic", c.synthetic);
    number("synthetic_exponent", c.synthetic_exponent);
    if (j.contains("powers")) {
        if (!j["powers"].is_array() || j["powers"].empty()) config_error("powers", "expected a nonempty list");
        c.powers.clear();
        for (const auto& v : j["powers"]) {
            if (!v.is_number_integer()) config_error("powers", "expected integers");
            c.powers.push_back(v.get<int>());
        }
    }
    number("datum", c.datum);
    number("sigma", c.sigma);
    if (!(c.sigma > 0.0)) config_error("sigma", "must be positive");
    if (j.contains("deltas")) c.deltas = as_vector(j["deltas"], "deltas");
    return c;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::MissingInput, "cannot open config file " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        const std::size_t upto = std::min<std::size_t>(e.byte, text.size());
        const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(upto), '\n');
        fail(ErrorKind::Config, path.string() + ":" + std::to_string(line) + ": invalid JSON (" + e.what() + ")");
    }
    return from_json(j);
}

json RunConfig::to_json() const {
    json bw = bandwidth.kind == BandwidthRule::Kind::Explicit ? json(bandwidth.bandwidth) : json(bandwidth.name());
    return {{"experiment_id", experiment_id},
            {"model", model},
            {"prior", prior},
            {"observed", observed},
            {"samples", samples},
            {"seed", seed},
            {"bandwidth", bw},
            {"output_dir", output_dir},
            {"block_quantile", cbayes::to_string(block_quantile)},
            {"renormalize_truncated_normal", renormalize_truncated_normal},
            {"safety_factor", safety_factor},
            {"workers", workers},
            {"probe_count", probe_count},
            {"dominance_threshold", dominance_threshold},
            {"dims", dims},
            {"qoi_counts", qoi_counts},
            {"sample_sizes", sample_sizes},
            {"reps", reps},
            {"eval_count", eval_count},
            {"random_covariance", random_covariance},
            {"synthetic", synthetic},
            {"synthetic_exponent", synthetic_exponent},
            {"powers", powers},
            {"datum", datum},
            {"sigma", sigma},
            {"deltas", deltas}};
}

PipelineOptions RunConfig::pipeline_options() const {
    PipelineOptions o;
    o.rule = bandwidth;
    o.workers = workers;
    o.inflation = safety_factor;
    o.probe_count = probe_count;
    return o;
}

ConvergenceConfig RunConfig::convergence_config() const {
    ConvergenceConfig c;
    c.dims = dims;
    c.qoi_counts = qoi_counts;
    c.sample_sizes = sample_sizes;
    c.reps = reps;
    c.seed = seed;
    c.eval_count = eval_count;
    c.block_quantile = block_quantile;
    c.random_covariance = random_covariance;
    c.workers = workers;
    return c;
}

std::string format_double(double x) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

void write_batch_csv(const std::filesystem::path& path, const SampleBatch& batch) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorKind::Io, "cannot write " + path.string());
    for (std::size_t j = 0; j < batch.param_dim(); ++j) out << (j ? "," : "") << "lambda_" << j + 1;
    for (std::size_t j = 0; j < batch.qoi_dim(); ++j) out << ",q_" << j + 1;
    out << '\n';
    for (std::size_t i = 0; i < batch.count(); ++i) {
        for (std::size_t j = 0; j < batch.param_dim(); ++j) out << (j ? "," : "") << format_double(batch.params()(i, j));
        for (std::size_t j = 0; j < batch.qoi_dim(); ++j) out << ',' << format_double(batch.qois()(i, j));
        out << '\n';
    }
    if (!out) fail(ErrorKind::Io, "write failed for " + path.string());
}

SampleBatch read_batch_csv(const std::filesystem::path& path, std::uint64_t seed, const std::string& model_name) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::MissingInput, "cannot open sample file " + path.string());
    std::string line;
    if (!std::getline(in, line)) fail(ErrorKind::Io, path.string() + ": empty file");
    std::size_t n = 0, m = 0;
    {
        std::stringstream hs(line);
        std::string col;
        while (std::getline(hs, col, ',')) {
            if (col.rfind("lambda_", 0) == 0 && m == 0) {
                ++n;
            } else if (col.rfind("q_", 0) == 0) {
                ++m;
            } else {
                fail(ErrorKind::Io, path.string() + ": unexpected header column '" + col + "'");
            }
        }
    }
    require(n >= 1 && m >= 1, ErrorKind::Io, path.string() + ": header needs lambda_ and q_ columns");
    std::vector<double> params, qois;
    std::size_t rows = 0, lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        ++rows;
        const char* p = line.data();
        const char* end = line.data() + line.size();
        for (std::size_t k = 0; k < n + m; ++k) {
            double v = 0.0;
            const auto res = std::from_chars(p, end, v);
            if (res.ec != std::errc()) {
                fail(ErrorKind::Io, path.string() + ":" + std::to_string(lineno) + ": bad number in column " +
                                        std::to_string(k + 1));
            }
            (k < n ? params : qois).push_back(v);
            p = res.ptr;
            if (k + 1 < n + m) {
                if (p == end || *p != ',') {
                    fail(ErrorKind::Io, path.string() + ":" + std::to_string(lineno) + ": too few columns");
                }
                ++p;
            }
        }
        if (p != end) fail(ErrorKind::Io, path.string() + ":" + std::to_string(lineno) + ": too many columns");
    }
    return SampleBatch(Matrix(rows, n, std::move(params)), Matrix(rows, m, std::move(qois)), seed, model_name);
}

void write_json(const std::filesystem::path& path, const json& j) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorKind::Io, "cannot write " + path.string());
    out << j.dump(2) << '\n';
}

json read_json(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::MissingInput, "cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        fail(ErrorKind::Io, path.string() + ": " + e.what());
    }
}

void write_convergence_csv(const std::filesystem::path& path, const ConvergenceResult& result) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorKind::Io, "cannot write " + path.string());
    out << "d,m,N,rep,l1_error\n";
    for (const auto& rec : result.records) {
        for (const auto& row : result.rows) {
            if (row.dim != rec.dim || row.qoi_count != rec.qoi_count) continue;
            out << row.dim << ',' << row.qoi_count << ',' << row.sample_size << ',' << row.rep << ','
                << format_double(row.l1_error) << '\n';
        }
        out << rec.dim << ',' << rec.qoi_count << ",slope,fit,"
            << (rec.fitted_slope ? format_double(*rec.fitted_slope) : "") << '\n';
    }
}

void write_comparison_csv(const std::filesystem::path& path, const std::vector<ComparisonReport>& reports) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorKind::Io, "cannot write " + path.string());
    out << "method,p,samples,seed,accepted,tv_pushforward_vs_observed,tv_between_posteriors\n";
    for (const auto& r : reports) {
        out << "consistent," << r.power << ',' << r.count << ',' << r.seed << ',' << r.consistent_accepted << ','
            << format_double(r.tv_consistent) << ',' << format_double(r.tv_between_posteriors) << '\n';
        out << "statistical," << r.power << ',' << r.count << ',' << r.seed << ',' << r.statistical_accepted << ','
            << format_double(r.tv_statistical) << ',' << format_double(r.tv_between_posteriors) << '\n';
    }
}

void write_stability_csv(const std::filesystem::path& path, const std::vector<StabilityReport>& reports) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorKind::Io, "cannot write " + path.string());
    out << "delta,a,b,tv_obs_pair,tv_post_pair\n";
    for (const auto& r : reports) {
        out << format_double(r.delta) << ',' << format_double(r.a) << ',' << format_double(r.b) << ','
            << format_double(r.tv_obs_pair) << ',' << format_double(r.tv_post_pair) << '\n';
    }
}

}  // namespace cbayes
