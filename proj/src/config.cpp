#include "flatsel/config.hpp"

#include <cstdio>
#include <stdexcept>

namespace flatsel {

using nlohmann::json;

namespace {

template <class T>
void take(const json& obj, const char* key, T& field) {
    auto it = obj.find(key);
    if (it == obj.end()) return;
    try {
        if constexpr (std::is_same_v<T, int>) {
            if (!it->is_number_integer()) throw std::invalid_argument("");
        } else if constexpr (std::is_same_v<T, double>) {
            if (!it->is_number()) throw std::invalid_argument("");
        }
        field = it->get<T>();
    } catch (const std::exception&) {
        throw std::invalid_argument(std::string("bad value for '") + key + "'");
    }
}

void reject_unknown(const json& obj, std::initializer_list<const char*> keys) {
    if (!obj.is_object()) throw std::invalid_argument("config overrides must be a JSON object");
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool known = false;
        for (const char* k : keys) known = known || it.key() == k;
        if (!known) throw std::invalid_argument("unknown config key '" + it.key() + "'");
    }
}

}  // namespace

json selector_config_json(SelectorKind kind, const SelectorConfig& cfg) {
    json j;
    j["selector"] = selector_name(kind);
    switch (kind) {
        case SelectorKind::dcharts: {
            const auto& c = cfg.dcharts;
            j["alpha"] = c.alpha;
            j["beta"] = c.beta;
            j["gamma_s"] = c.gamma_s;
            j["f_max"] = c.f_max;
            j["max_outer_iters"] = c.max_outer_iters;
            break;
        }
        case SelectorKind::logmap: j["lambda"] = cfg.logmap_lambda; break;
        case SelectorKind::greedy: {
            const auto& c = cfg.greedy;
            j["lambda"] = c.lambda;
            j["reparam_every"] = c.reparam_every;
            j["refine_iters"] = c.refine_iters;
            j["refine_tol"] = c.refine_tol;
            j["max_checkpoints"] = c.max_checkpoints;
            j["min_batch_frac"] = c.min_batch_frac;
            j["work_budget"] = c.work_budget;
            break;
        }
        case SelectorKind::optimized: {
            const auto& c = cfg.optimized;
            j["gamma"] = c.loss.gamma;
            j["alpha"] = c.loss.alpha;
            j["omega"] = c.loss.omega;
            j["floodfill_threshold"] = c.loss.floodfill_threshold;
            j["steps"] = c.steps;
            j["lr"] = c.lr;
            j["init_radius"] = c.options.init_radius;
            j["init_margin"] = c.options.init_margin;
            j["max_halvings"] = c.options.max_halvings;
            break;
        }
    }
    return j;
}

void apply_overrides(SelectorConfig& cfg, SelectorKind kind, const json& o) {
    if (o.is_null()) return;
    switch (kind) {
        case SelectorKind::dcharts: {
            reject_unknown(o, {"selector", "alpha", "beta", "gamma_s", "f_max", "max_outer_iters"});
            auto& c = cfg.dcharts;
            take(o, "alpha", c.alpha);
            take(o, "beta", c.beta);
            take(o, "gamma_s", c.gamma_s);
            take(o, "f_max", c.f_max);
            take(o, "max_outer_iters", c.max_outer_iters);
            c.validate();
            break;
        }
        case SelectorKind::logmap:
            reject_unknown(o, {"selector", "lambda"});
            take(o, "lambda", cfg.logmap_lambda);
            if (!(cfg.logmap_lambda > 0)) throw std::invalid_argument("lambda must be positive");
            break;
        case SelectorKind::greedy: {
            reject_unknown(o, {"selector", "lambda", "reparam_every", "refine_iters", "refine_tol", "max_checkpoints",
                               "min_batch_frac", "work_budget"});
            auto& c = cfg.greedy;
            take(o, "lambda", c.lambda);
            take(o, "reparam_every", c.reparam_every);
            take(o, "refine_iters", c.refine_iters);
            take(o, "refine_tol", c.refine_tol);
            take(o, "max_checkpoints", c.max_checkpoints);
            take(o, "min_batch_frac", c.min_batch_frac);
            take(o, "work_budget", c.work_budget);
            if (!(c.lambda > 0) || c.reparam_every < 0 || c.refine_iters < 0 || c.max_checkpoints < 0 || !(c.work_budget >= 0) ||
                !(c.min_batch_frac >= 0 && c.min_batch_frac < 1))
                throw std::invalid_argument("bad greedy config");
            break;
        }
        case SelectorKind::optimized: {
            reject_unknown(o, {"selector", "gamma", "alpha", "omega", "floodfill_threshold", "steps", "lr",
                               "init_radius", "init_margin", "max_halvings"});
            auto& c = cfg.optimized;
            take(o, "gamma", c.loss.gamma);
            take(o, "alpha", c.loss.alpha);
            take(o, "omega", c.loss.omega);
            take(o, "floodfill_threshold", c.loss.floodfill_threshold);
            take(o, "steps", c.steps);
            take(o, "lr", c.lr);
            take(o, "init_radius", c.options.init_radius);
            take(o, "init_margin", c.options.init_margin);
            take(o, "max_halvings", c.options.max_halvings);
            c.loss.validate();
            if (c.steps < 0 || !(c.lr > 0) || c.options.max_halvings < 0)
                throw std::invalid_argument("bad optimized config");
            break;
        }
    }
    if (o.contains("selector") && o["selector"] != selector_name(kind))
        throw std::invalid_argument("config is for a different selector");
}

std::uint64_t fnv1a(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::string config_hash(const json& config) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(config.dump())));
    return buf;
}

}  // namespace flatsel
