#include "invlab/config.hpp"

#include <cmath>
#include <fstream>
#include <numbers>

namespace invlab {

using nlohmann::json;

NoiseSchedule ScheduleSpec::build(int steps) const {
    if (train_steps == 0) return build_schedule(kind, steps, beta_start, beta_end, convention);
    return build_subsampled_schedule(kind, steps, beta_start, beta_end, train_steps, convention);
}

GmmModel default_model(double variance) {
    GmmModel m;
    for (int k = 0; k < 3; ++k) {
        const double angle = std::numbers::pi / 2.0 + 2.0 * std::numbers::pi * k / 3.0;
        m.weights.push_back(1.0 / 3.0);
        m.means.push_back({std::cos(angle), std::sin(angle)});
        m.variances.push_back(variance);
    }
    m.conditions["top"] = {0};
    m.conditions["bottom"] = {1, 2};
    return m;
}

ExperimentConfig default_config() {
    ExperimentConfig cfg;
    cfg.model = default_model();
    cfg.dim = 2;
    cfg.shape = GridShape{1, 2};
    const int T = 50;
    cfg.methods.push_back({Vanilla{}, T, "vanilla"});
    cfg.methods.push_back({easyinv_preset("sdxl"), T, "easyinv"});
    cfg.methods.push_back({easyinv_preset("sd14"), T, "easyinv_sd14"});
    cfg.methods.push_back({FixedPoint{3, 0.5, 0.5}, T, "fixed_point"});
    cfg.methods.push_back({ReNoise{2}, T, "renoise"});
    return cfg;
}

void ExperimentConfig::validate() const {
    try {
        if (n_seeds < 1) throw ConfigError("n_seeds must be >= 1");
        model.validate();
        if (model.dim() != dim) throw ConfigError("model dimension differs from config dimension");
        if (shape && shape->size() != dim) throw ConfigError("shape does not match dimension");
        if (methods.empty()) throw ConfigError("config lists no methods");
        for (const auto& m : methods) {
            m.validate();
            (void)schedule.build(m.steps);
        }
        if (!(metric_peak > 0.0)) throw ConfigError("metric_peak must be > 0");
        if (perturbation.magnitude < 0.0) throw ConfigError("perturbation magnitude must be >= 0");
        (void)model.active_components(condition);
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }
}

// ---------------------------------------------------------------------------
// JSON

GmmModel model_from_json(const json& j) {
    GmmModel m;
    m.weights = j.at("weights").get<std::vector<double>>();
    m.means = j.at("means").get<std::vector<std::vector<double>>>();
    m.variances = j.at("variances").get<std::vector<double>>();
    if (j.contains("conditions"))
        m.conditions = j.at("conditions").get<std::map<std::string, std::vector<std::size_t>>>();
    return m;
}

json to_json(const GmmModel& m) {
    json j{{"weights", m.weights}, {"means", m.means}, {"variances", m.variances}};
    if (!m.conditions.empty()) j["conditions"] = m.conditions;
    return j;
}

InversionConfig inversion_from_json(const json& j) {
    InversionConfig cfg;
    const auto method = j.at("method").get<std::string>();
    cfg.steps = j.value("T", 50);
    cfg.label = j.value("label", std::string{});
    if (method == "vanilla") {
        cfg.method = Vanilla{};
    } else if (method == "fixed_point") {
        FixedPoint fp;
        fp.inner_iters = j.value("inner_iters", fp.inner_iters);
        if (j.contains("mix")) {
            const auto mix = j.at("mix").get<std::vector<double>>();
            if (mix.size() != 2) throw ConfigError("fixed_point mix needs two weights");
            fp.w_now = mix[0];
            fp.w_prev = mix[1];
        }
        cfg.method = fp;
    } else if (method == "renoise") {
        ReNoise rn;
        rn.inner_iters = j.value("inner_iters", rn.inner_iters);
        cfg.method = rn;
    } else if (method == "easyinv") {
        EasyInv e = j.contains("preset") ? easyinv_preset(j.at("preset").get<std::string>()) : EasyInv{};
        e.eta = j.value("eta", e.eta);
        if (j.contains("window")) {
            const auto w = j.at("window").get<std::vector<double>>();
            if (w.size() != 2) throw ConfigError("easyinv window needs [lo, hi]");
            e.window_lo = w[0];
            e.window_hi = w[1];
        }
        e.stride = j.value("stride", e.stride);
        cfg.method = e;
    } else {
        throw ConfigError("unknown method: " + method);
    }
    return cfg;
}

json to_json(const InversionConfig& cfg) {
    json j{{"method", std::string(cfg.method_name())}, {"T", cfg.steps}};
    if (!cfg.label.empty()) j["label"] = cfg.label;
    if (const auto* fp = std::get_if<FixedPoint>(&cfg.method)) {
        j["inner_iters"] = fp->inner_iters;
        j["mix"] = {fp->w_now, fp->w_prev};
    } else if (const auto* rn = std::get_if<ReNoise>(&cfg.method)) {
        j["inner_iters"] = rn->inner_iters;
    } else if (const auto* e = std::get_if<EasyInv>(&cfg.method)) {
        j["eta"] = e->eta;
        j["window"] = {e->window_lo, e->window_hi};
        j["stride"] = e->stride;
    }
    return j;
}

ExperimentConfig config_from_json(const json& j) {
    try {
        ExperimentConfig cfg = default_config();
        if (j.contains("schedule")) {
            const auto& s = j.at("schedule");
            cfg.schedule.kind = parse_beta_schedule(s.value("kind", std::string("scaled-linear-beta")));
            cfg.schedule.beta_start = s.value("beta_start", cfg.schedule.beta_start);
            cfg.schedule.beta_end = s.value("beta_end", cfg.schedule.beta_end);
            cfg.schedule.train_steps = s.value("train_steps", cfg.schedule.train_steps);
            cfg.schedule.convention =
                parse_step_convention(s.value("convention", std::string("variance-preserving")));
        }
        if (j.contains("model")) cfg.model = model_from_json(j.at("model"));
        if (j.contains("perturbation")) {
            const auto& p = j.at("perturbation");
            cfg.perturbation.mode = parse_perturbation(p.value("mode", std::string("none")));
            cfg.perturbation.magnitude = p.value("magnitude", 0.0);
            cfg.perturbation.seed = p.value("seed", std::uint64_t{0});
        }
        if (j.contains("methods")) {
            cfg.methods.clear();
            for (const auto& m : j.at("methods")) cfg.methods.push_back(inversion_from_json(m));
        }
        cfg.n_seeds = j.value("n_seeds", cfg.n_seeds);
        cfg.dim = j.value("dimension", cfg.model.dim());
        if (j.contains("shape")) {
            if (j.at("shape").is_null()) {
                cfg.shape.reset();
            } else {
                const auto hw = j.at("shape").get<std::vector<std::size_t>>();
                if (hw.size() != 2) throw ConfigError("shape needs [H, W]");
                cfg.shape = GridShape{hw[0], hw[1]};
            }
        } else if (!cfg.shape || cfg.shape->size() != cfg.dim) {
            cfg.shape = GridShape{1, cfg.dim};
        }
        cfg.out_dir = j.value("out", cfg.out_dir);
        cfg.rng_seed = j.value("rng_seed", cfg.rng_seed);
        if (j.contains("condition") && !j.at("condition").is_null())
            cfg.condition = Condition::named(j.at("condition").get<std::string>());
        cfg.metric_peak = j.value("metric_peak", cfg.metric_peak);
        cfg.validate();
        return cfg;
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }
}

json to_json(const ExperimentConfig& cfg) {
    json methods = json::array();
    for (const auto& m : cfg.methods) methods.push_back(to_json(m));
    json j{
        {"schedule",
         {{"kind", std::string(to_string(cfg.schedule.kind))},
          {"beta_start", cfg.schedule.beta_start},
          {"beta_end", cfg.schedule.beta_end},
          {"train_steps", cfg.schedule.train_steps},
          {"convention", std::string(to_string(cfg.schedule.convention))}}},
        {"model", to_json(cfg.model)},
        {"perturbation",
         {{"mode", std::string(to_string(cfg.perturbation.mode))},
          {"magnitude", cfg.perturbation.magnitude},
          {"seed", cfg.perturbation.seed}}},
        {"methods", methods},
        {"n_seeds", cfg.n_seeds},
        {"dimension", cfg.dim},
        {"out", cfg.out_dir},
        {"rng_seed", cfg.rng_seed},
        {"metric_peak", cfg.metric_peak},
    };
    j["shape"] = cfg.shape ? json{cfg.shape->height, cfg.shape->width} : json(nullptr);
    j["condition"] = cfg.condition.token ? json(*cfg.condition.token) : json(nullptr);
    return j;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config: " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    return config_from_json(j);
}

}  // namespace invlab
