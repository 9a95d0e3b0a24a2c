#include "codonflow/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "codonflow/errors.hpp"

namespace codonflow {
namespace {

using json = nlohmann::ordered_json;

// Reads typed fields from one JSON object and rejects keys nobody asked for.
class Section {
   public:
    Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(where() + " must be a JSON object");
    }

    template <typename T>
    void get(const char* key, T& out) {
        seen_.insert(key);
        if (!j_.contains(key)) return;
        try {
            out = j_.at(key).get<T>();
        } catch (const json::exception&) {
            throw ConfigError(where(key) + " has the wrong type");
        }
    }

    void get_weights(const char* key, WeightVector& out) {
        seen_.insert(key);
        if (!j_.contains(key)) return;
        std::vector<double> v;
        try {
            v = j_.at(key).get<std::vector<double>>();
        } catch (const json::exception&) {
            throw ConfigError(where(key) + " must be an array of three numbers");
        }
        if (v.size() != 3) throw ConfigError(where(key) + " must have three entries");
        try {
            out = WeightVector(v[0], v[1], v[2]);
        } catch (const Error& e) {
            throw ConfigError(where(key) + ": " + e.what());
        }
    }

    std::optional<Section> child(const char* key) {
        seen_.insert(key);
        if (!j_.contains(key)) return std::nullopt;
        return Section(j_.at(key), path_.empty() ? key : path_ + "." + key);
    }

    bool has(const char* key) const { return j_.contains(key); }
    const json& raw(const char* key) {
        seen_.insert(key);
        return j_.at(key);
    }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!seen_.count(it.key())) throw ConfigError("unknown configuration key '" + where(it.key().c_str()) + "'");
    }

   private:
    std::string where(const char* key = nullptr) const {
        std::string p = path_;
        if (key) p = p.empty() ? key : p + "." + key;
        return p.empty() ? "configuration" : p;
    }

    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

json weights_json(const WeightVector& w) { return json::array({w[0], w[1], w[2]}); }

}  // namespace

ObjectiveSettings ObjectiveOptions::resolve() const {
    ObjectiveSettings s;
    if (!codon_usage.empty()) s.usage = CodonUsageTable::from_file(codon_usage);
    s.gc_band = GcBand{gc_lo, gc_hi};
    s.min_loop = min_loop;
    s.reward_floor = reward_floor;
    if (!external_scorer.empty()) s.external = ExternalScorer{external_scorer, external_per_nt_min};
    s.validate();
    return s;
}

void RunConfig::validate() const {
    if (threads == 0) throw ConfigError("threads must be at least 1");
    parse_input_format(input_format);
    if (enumeration_cap == 0) throw ConfigError("enumeration_cap must be positive");
    if (!(objectives.gc_lo >= 0.0 && objectives.gc_lo < objectives.gc_hi && objectives.gc_hi <= 1.0))
        throw ConfigError("objectives.gc_lo and gc_hi must satisfy 0 <= lo < hi <= 1");
    if (objectives.min_loop < 0) throw ConfigError("objectives.min_loop must be non-negative");
    if (!(objectives.reward_floor > 0.0)) throw ConfigError("objectives.reward_floor must be positive");
    training.validate();
    if (policy.hidden < 1) throw ConfigError("policy.hidden must be positive");
    if (policy.max_length < 1) throw ConfigError("policy.max_length must be positive");
    if (curriculum.schedule != "none") parse_schedule(curriculum.schedule);
    curriculum.config.validate();
    if (sampling.n_samples < 1) throw ConfigError("sampling.n_samples must be positive");
    if (sampling.top_n < 1) throw ConfigError("sampling.top_n must be positive");
}

std::string RunConfig::to_json() const {
    json j;
    j["seed"] = seed;
    j["threads"] = threads;
    j["input_format"] = input_format;
    j["proteins"] = proteins;
    j["protein"] = protein;
    j["output_dir"] = output_dir;
    j["checkpoint"] = checkpoint;
    j["enumeration_cap"] = enumeration_cap;

    json o;
    o["codon_usage"] = objectives.codon_usage;
    o["gc_lo"] = objectives.gc_lo;
    o["gc_hi"] = objectives.gc_hi;
    o["min_loop"] = objectives.min_loop;
    o["reward_floor"] = objectives.reward_floor;
    o["external_scorer"] = objectives.external_scorer;
    o["external_per_nt_min"] = objectives.external_per_nt_min;
    j["objectives"] = o;

    json t;
    t["loss"] = to_string(training.loss);
    t["subtb_lambda"] = training.subtb_lambda;
    t["batch_size"] = training.batch_size;
    t["n_iterations"] = training.n_iterations;
    t["epsilon"] = training.epsilon;
    t["dirichlet_alpha"] = training.dirichlet_alpha;
    t["conditional"] = training.conditional;
    t["fixed_weights"] = weights_json(training.fixed_weights);
    t["lr"] = training.optimizer.lr;
    t["lr_logz"] = training.optimizer.lr_log_z;
    t["lr_patience"] = training.optimizer.lr_patience;
    t["lr_factor"] = training.optimizer.lr_factor;
    t["scheduler_interval"] = training.scheduler_interval;
    j["training"] = t;

    json p;
    p["hidden"] = policy.hidden;
    p["max_length"] = policy.max_length;
    j["policy"] = p;

    const auto& cc = curriculum.config;
    json c;
    c["schedule"] = curriculum.schedule;
    c["preset"] = curriculum.preset;
    json tasks = json::array();
    for (const auto& iv : curriculum.tasks) tasks.push_back(json::array({iv.lo, iv.hi}));
    c["tasks"] = tasks;
    c["hold_out_eval"] = curriculum.hold_out_eval;
    c["lpe"] = to_string(cc.lpe);
    c["lpe_alpha"] = cc.lpe_alpha;
    c["lpe_window"] = cc.lpe_window;
    c["acp"] = to_string(cc.acp);
    c["mr_window"] = cc.mr_window;
    c["mr_power"] = cc.mr_power;
    c["mr_pot_prop"] = cc.mr_pot_prop;
    c["mr_att_pred"] = cc.mr_att_pred;
    c["mr_att_succ"] = cc.mr_att_succ;
    c["a2d"] = to_string(cc.a2d);
    c["a2d_eps"] = cc.a2d_eps;
    c["floor_eps"] = cc.floor_eps;
    c["n_iterations"] = cc.n_iterations;
    c["eval_every"] = cc.eval_every;
    c["train_steps_per_task"] = cc.train_steps_per_task;
    c["w_eval"] = weights_json(cc.w_eval);
    c["n_eval"] = cc.n_eval;
    c["fixed_eval_protein"] = cc.fixed_eval_protein;
    j["curriculum"] = c;

    json s;
    s["n_samples"] = sampling.n_samples;
    s["top_n"] = sampling.top_n;
    s["weights"] = weights_json(sampling.weights);
    j["sampling"] = s;
    return j.dump(2);
}

RunConfig RunConfig::from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("configuration is not valid JSON: ") + e.what());
    }
    RunConfig cfg;
    Section root(j, "");
    root.get("seed", cfg.seed);
    root.get("threads", cfg.threads);
    root.get("input_format", cfg.input_format);
    root.get("proteins", cfg.proteins);
    root.get("protein", cfg.protein);
    root.get("output_dir", cfg.output_dir);
    root.get("checkpoint", cfg.checkpoint);
    root.get("enumeration_cap", cfg.enumeration_cap);

    if (auto o = root.child("objectives")) {
        o->get("codon_usage", cfg.objectives.codon_usage);
        o->get("gc_lo", cfg.objectives.gc_lo);
        o->get("gc_hi", cfg.objectives.gc_hi);
        o->get("min_loop", cfg.objectives.min_loop);
        o->get("reward_floor", cfg.objectives.reward_floor);
        o->get("external_scorer", cfg.objectives.external_scorer);
        o->get("external_per_nt_min", cfg.objectives.external_per_nt_min);
        o->finish();
    }

    if (auto t = root.child("training")) {
        auto& tc = cfg.training;
        std::string loss = to_string(tc.loss);
        t->get("loss", loss);
        tc.loss = parse_loss_kind(loss);
        t->get("subtb_lambda", tc.subtb_lambda);
        t->get("batch_size", tc.batch_size);
        t->get("n_iterations", tc.n_iterations);
        t->get("epsilon", tc.epsilon);
        t->get("dirichlet_alpha", tc.dirichlet_alpha);
        t->get("conditional", tc.conditional);
        t->get_weights("fixed_weights", tc.fixed_weights);
        t->get("lr", tc.optimizer.lr);
        t->get("lr_logz", tc.optimizer.lr_log_z);
        t->get("lr_patience", tc.optimizer.lr_patience);
        t->get("lr_factor", tc.optimizer.lr_factor);
        t->get("scheduler_interval", tc.scheduler_interval);
        t->finish();
    }

    if (auto p = root.child("policy")) {
        p->get("hidden", cfg.policy.hidden);
        p->get("max_length", cfg.policy.max_length);
        p->finish();
    }

    if (auto c = root.child("curriculum")) {
        auto& co = cfg.curriculum;
        c->get("schedule", co.schedule);
        c->get("preset", co.preset);
        if (!co.preset.empty()) co.config = CurriculumConfig::named(co.preset);
        auto& cc = co.config;
        if (c->has("tasks")) {
            std::vector<std::array<std::size_t, 2>> pairs;
            try {
                pairs = c->raw("tasks").get<std::vector<std::array<std::size_t, 2>>>();
            } catch (const json::exception&) {
                throw ConfigError("curriculum.tasks must be a list of [lo, hi] pairs");
            }
            co.tasks.clear();
            for (auto [lo, hi] : pairs) co.tasks.push_back({lo, hi});
        }
        c->get("hold_out_eval", co.hold_out_eval);
        std::string lpe = to_string(cc.lpe), acp = to_string(cc.acp), a2d = to_string(cc.a2d);
        c->get("lpe", lpe);
        c->get("acp", acp);
        c->get("a2d", a2d);
        cc.lpe = parse_lp_estimator(lpe);
        cc.acp = parse_attention_kind(acp);
        cc.a2d = parse_distribution_kind(a2d);
        c->get("lpe_alpha", cc.lpe_alpha);
        c->get("lpe_window", cc.lpe_window);
        c->get("mr_window", cc.mr_window);
        c->get("mr_power", cc.mr_power);
        c->get("mr_pot_prop", cc.mr_pot_prop);
        c->get("mr_att_pred", cc.mr_att_pred);
        c->get("mr_att_succ", cc.mr_att_succ);
        c->get("a2d_eps", cc.a2d_eps);
        c->get("floor_eps", cc.floor_eps);
        c->get("n_iterations", cc.n_iterations);
        c->get("eval_every", cc.eval_every);
        c->get("train_steps_per_task", cc.train_steps_per_task);
        c->get_weights("w_eval", cc.w_eval);
        c->get("n_eval", cc.n_eval);
        c->get("fixed_eval_protein", cc.fixed_eval_protein);
        c->finish();
    }

    if (auto s = root.child("sampling")) {
        s->get("n_samples", cfg.sampling.n_samples);
        s->get("top_n", cfg.sampling.top_n);
        s->get_weights("weights", cfg.sampling.weights);
        s->finish();
    }
    root.finish();
    cfg.validate();
    return cfg;
}

RunConfig RunConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open configuration file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json(ss.str());
}

}  // namespace codonflow
