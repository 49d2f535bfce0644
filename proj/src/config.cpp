#include "lossq/config.hpp"

#include <cmath>
#include <set>

#include <json.hpp>

#include "lossq/errors.hpp"
#include "lossq/oracle.hpp"
#include "lossq/stats.hpp"

namespace lossq {

namespace {

using nlohmann::json;

void check_keys(const json& obj, const std::set<std::string>& allowed,
                const std::string& context) {
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!allowed.count(it.key()))
            throw ConfigError("unknown key '" + it.key() + "' in " + context);
}

double get_number(const json& obj, const char* key, const std::string& context) {
    if (!obj.contains(key))
        throw ConfigError("missing field '" + std::string(key) + "' in " + context);
    if (!obj[key].is_number())
        throw ConfigError("field '" + std::string(key) + "' in " + context + " must be a number");
    return obj[key].get<double>();
}

std::vector<double> get_number_array(const json& obj, const char* key,
                                     const std::string& context) {
    if (!obj.contains(key) || !obj[key].is_array())
        throw ConfigError("field '" + std::string(key) + "' in " + context + " must be an array");
    std::vector<double> out;
    for (const auto& v : obj[key]) {
        if (!v.is_number())
            throw ConfigError("field '" + std::string(key) + "' in " + context +
                              " must contain numbers");
        out.push_back(v.get<double>());
    }
    return out;
}

DistributionSpec parse_dist_impl(const json& j, const std::string& context,
                                 std::vector<std::string>* warnings);

DistributionSpec parse_dist(const json& j, const std::string& context,
                            std::vector<std::string>* warnings) {
    try {
        return parse_dist_impl(j, context, warnings);
    } catch (const ConfigError& e) {
        const std::string what = e.what();
        if (what.rfind(context, 0) == 0) throw;
        throw ConfigError(context + ": " + what);
    }
}

DistributionSpec parse_dist_impl(const json& j, const std::string& context,
                                 std::vector<std::string>* warnings) {
    if (!j.is_object()) throw ConfigError(context + " must be an object");
    if (!j.contains("family") || !j["family"].is_string())
        throw ConfigError("missing 'family' in " + context);
    const std::string family = j["family"].get<std::string>();

    if (family == "exponential") {
        check_keys(j, {"family", "rate"}, context);
        return make_exponential(get_number(j, "rate", context));
    }
    if (family == "deterministic") {
        check_keys(j, {"family", "value"}, context);
        return make_deterministic(get_number(j, "value", context));
    }
    if (family == "erlang") {
        check_keys(j, {"family", "shape", "rate"}, context);
        const double shape = get_number(j, "shape", context);
        if (shape != std::floor(shape))
            throw ConfigError("field 'shape' in " + context + " must be an integer");
        return make_erlang(static_cast<int>(shape), get_number(j, "rate", context));
    }
    if (family == "hyperexp") {
        check_keys(j, {"family", "weights", "rates"}, context);
        return make_hyperexponential(get_number_array(j, "weights", context),
                                     get_number_array(j, "rates", context));
    }
    if (family == "uniform") {
        check_keys(j, {"family", "lo", "hi"}, context);
        return make_uniform(get_number(j, "lo", context), get_number(j, "hi", context));
    }
    if (family == "lattice") {
        check_keys(j, {"family", "span", "multipliers", "probs"}, context);
        const auto raw_mult = get_number_array(j, "multipliers", context);
        std::vector<int> multipliers;
        for (double m : raw_mult) {
            if (m != std::floor(m) || m < 1.0)
                throw ConfigError("field 'multipliers' in " + context +
                                  " must contain positive integers");
            multipliers.push_back(static_cast<int>(m));
        }
        auto spec = make_lattice(get_number(j, "span", context), multipliers,
                                 get_number_array(j, "probs", context));
        const auto& lat = std::get<LatticeDiscrete>(spec);
        if (warnings && lat.multipliers.size() == multipliers.size()) {
            std::vector<int> sorted = multipliers;
            std::sort(sorted.begin(), sorted.end());
            if (lat.multipliers != sorted)
                warnings->push_back(context + ": lattice multipliers share a common factor; " +
                                    "normalized to span " + std::to_string(lat.span));
        }
        return spec;
    }
    throw ConfigError("unknown family '" + family + "' in " + context +
                      " (expected exponential|deterministic|erlang|hyperexp|uniform|lattice)");
}

QueueModel parse_model(const json& j, std::vector<std::string>* warnings) {
    if (!j.is_object()) throw ConfigError("'model' must be an object");
    check_keys(j,
               {"interarrival", "service_time", "arrival_batch", "service_batch", "capacity",
                "policy"},
               "model");
    for (const char* key : {"interarrival", "service_time", "arrival_batch", "service_batch"})
        if (!j.contains(key))
            throw ConfigError("missing field '" + std::string(key) + "' in model");

    QueueModel model;
    model.interarrival = parse_dist(j["interarrival"], "model.interarrival", warnings);
    model.service_time = parse_dist(j["service_time"], "model.service_time", warnings);
    model.arrival_batch = parse_dist(j["arrival_batch"], "model.arrival_batch", warnings);
    model.service_batch = parse_dist(j["service_batch"], "model.service_batch", warnings);
    model.capacity = get_number(j, "capacity", "model");
    if (j.contains("policy")) {
        if (!j["policy"].is_string())
            throw ConfigError("field 'policy' in model must be a string");
        const std::string p = j["policy"].get<std::string>();
        if (p == "full")
            model.policy = Policy::FullRejection;
        else if (p == "partial")
            model.policy = Policy::PartialRejection;
        else
            throw ConfigError("unknown policy '" + p + "' (expected full|partial)");
    }
    validate(model);
    return model;
}

RunMode parse_mode(const std::string& s) {
    if (s == "simulate") return RunMode::Simulate;
    if (s == "verify-theorem") return RunMode::VerifyTheorem;
    if (s == "verify-lemma") return RunMode::VerifyLemma;
    if (s == "oracle") return RunMode::Oracle;
    if (s == "classify-dist") return RunMode::ClassifyDist;
    throw ConfigError("unknown mode '" + s + "'");
}

// Finite support points of a batch law, when it has any; empty for
// continuous families.
std::vector<double> finite_support(const DistributionSpec& spec) {
    if (const auto* det = std::get_if<Deterministic>(&spec)) return {det->value};
    if (const auto* lat = std::get_if<LatticeDiscrete>(&spec)) {
        std::vector<double> pts;
        for (int m : lat->multipliers) pts.push_back(lat->span * static_cast<double>(m));
        return pts;
    }
    return {};
}

bool support_on_span(const DistributionSpec& spec, double d) {
    const auto pts = finite_support(spec);
    if (pts.empty()) return false;
    for (double p : pts) {
        const double mult = std::round(p / d);
        if (mult < 1.0 || std::abs(p - mult * d) > 1e-9 * d) return false;
    }
    return true;
}

}  // namespace

std::string to_string(RunMode m) {
    switch (m) {
        case RunMode::Simulate: return "simulate";
        case RunMode::VerifyTheorem: return "verify-theorem";
        case RunMode::VerifyLemma: return "verify-lemma";
        case RunMode::Oracle: return "oracle";
        case RunMode::ClassifyDist: return "classify-dist";
    }
    return "simulate";
}

ExperimentConfig parse_config(const std::string& json_text,
                              std::optional<RunMode> forced_mode) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ConfigError("config must be a JSON object");
    check_keys(doc,
               {"mode", "model", "dist", "num_cycles", "seed", "workers", "sweep", "level",
                "alpha", "output"},
               "config");

    ExperimentConfig config;

    std::optional<RunMode> file_mode;
    if (doc.contains("mode")) {
        if (!doc["mode"].is_string()) throw ConfigError("'mode' must be a string");
        file_mode = parse_mode(doc["mode"].get<std::string>());
    }
    if (forced_mode && file_mode && *forced_mode != *file_mode)
        throw ConfigError("config mode '" + to_string(*file_mode) +
                          "' conflicts with the requested subcommand '" +
                          to_string(*forced_mode) + "'");
    if (forced_mode)
        config.mode = *forced_mode;
    else if (file_mode)
        config.mode = *file_mode;
    else
        throw ConfigError("missing 'mode' (or pass a subcommand)");

    if (doc.contains("model")) config.model = parse_model(doc["model"], &config.warnings);
    if (doc.contains("dist"))
        config.dist = parse_dist(doc["dist"], "dist", &config.warnings);

    if (doc.contains("num_cycles")) {
        const double v = get_number(doc, "num_cycles", "config");
        if (v < 1.0 || v != std::floor(v))
            throw ConfigError("'num_cycles' must be a positive integer");
        config.num_cycles = static_cast<std::size_t>(v);
    }
    if (doc.contains("seed")) {
        if (!doc["seed"].is_number_integer() && !doc["seed"].is_number_unsigned())
            throw ConfigError("'seed' must be an integer");
        config.seed = doc["seed"].get<std::uint64_t>();
    }
    if (doc.contains("workers")) {
        const double v = get_number(doc, "workers", "config");
        if (v < 1.0 || v != std::floor(v))
            throw ConfigError("'workers' must be a positive integer");
        config.workers = static_cast<unsigned>(v);
    }
    if (doc.contains("sweep")) {
        config.sweep = get_number_array(doc, "sweep", "config");
        for (double n : config.sweep)
            if (!(n > 0.0)) throw ConfigError("'sweep' capacities must be positive");
        if (config.sweep.empty()) throw ConfigError("'sweep' must be nonempty when present");
    }
    if (doc.contains("level")) {
        config.level = get_number(doc, "level", "config");
        if (!(config.level > 0.0 && config.level < 1.0))
            throw ConfigError("'level' must lie in (0,1)");
    }
    if (doc.contains("alpha")) {
        config.alpha = get_number(doc, "alpha", "config");
        if (!(config.alpha > 0.0 && config.alpha < 1.0))
            throw ConfigError("'alpha' must lie in (0,1)");
    }
    if (doc.contains("output")) {
        const json& out = doc["output"];
        if (!out.is_object()) throw ConfigError("'output' must be an object");
        check_keys(out, {"path", "format"}, "output");
        if (out.contains("path")) {
            if (!out["path"].is_string()) throw ConfigError("'output.path' must be a string");
            config.out_path = out["path"].get<std::string>();
        }
        if (out.contains("format")) {
            if (!out["format"].is_string())
                throw ConfigError("'output.format' must be a string");
            const std::string f = out["format"].get<std::string>();
            if (f == "csv")
                config.format = OutputFormat::Csv;
            else if (f == "report")
                config.format = OutputFormat::Report;
            else
                throw ConfigError("unknown output format '" + f + "' (expected csv|report)");
        }
    }

    if (config.mode == RunMode::ClassifyDist) {
        if (!config.dist) throw ConfigError("classify-dist mode requires a 'dist' entry");
    } else if (!config.model) {
        throw ConfigError(to_string(config.mode) + " mode requires a 'model' entry");
    }
    return config;
}

void validate_mode_requirements(const ExperimentConfig& config, double capacity) {
    if (config.mode == RunMode::ClassifyDist || config.mode == RunMode::Simulate) return;
    QueueModel model = *config.model;
    model.capacity = capacity;

    if (config.mode == RunMode::VerifyLemma) {
        check_lemma_preconditions(model);
        return;
    }
    if (config.mode == RunMode::Oracle) {
        lattice_model_from_queue(model);  // throws naming the unmet restriction
        return;
    }

    // verify-theorem: one check per hypothesis of the characterization.
    if (!std::holds_alternative<Exponential>(model.interarrival))
        throw ConfigError("theorem condition violated: arrivals must be Poisson "
                          "(exponential interarrivals)");
    if (!is_point_mass(model.service_batch))
        throw ConfigError("theorem condition violated: Y_1 must take a single value d "
                          "(deterministic service batch)");
    const double d = max_support(model.service_batch);
    if (!support_on_span(model.arrival_batch, d))
        throw ConfigError("theorem condition violated: X_1 must be lattice with span d "
                          "(support on d*{1,2,...})");
    const double a = mean(model.interarrival);
    const double b = mean(model.service_time);
    const double ex1 = mean(model.arrival_batch);
    if (std::abs(ex1 - a * d / b) >= 1e-9)
        throw ConfigError("theorem condition violated: E X_1 must equal a*d/b (E X_1 = " +
                          std::to_string(ex1) + ", a*d/b = " + std::to_string(a * d / b) + ")");
}

}  // namespace lossq
