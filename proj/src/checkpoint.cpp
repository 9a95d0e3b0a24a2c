#include "codonflow/checkpoint.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "codonflow/errors.hpp"

namespace codonflow {
namespace {

using json = nlohmann::ordered_json;

constexpr const char* kFormat = "codonflow-checkpoint";
constexpr int kVersion = 1;

json matrix_json(const Matrix& m) {
    json data = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
    return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

Matrix matrix_from(const json& j) {
    const auto rows = j.at("rows").get<Eigen::Index>();
    const auto cols = j.at("cols").get<Eigen::Index>();
    const auto& data = j.at("data");
    if (rows < 0 || cols < 0 || data.size() != static_cast<std::size_t>(rows * cols))
        throw InputError("checkpoint tensor has inconsistent shape");
    Matrix m(rows, cols);
    std::size_t k = 0;
    for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = data[k++].get<double>();
    return m;
}

json list_json(const std::vector<Matrix>& ms) {
    json a = json::array();
    for (const auto& m : ms) a.push_back(matrix_json(m));
    return a;
}

std::vector<Matrix> list_from(const json& j) {
    std::vector<Matrix> out;
    for (const auto& m : j) out.push_back(matrix_from(m));
    return out;
}

}  // namespace

MlpPolicy Checkpoint::policy() const {
    MlpPolicy p = MlpPolicy::zeros(shape);
    auto& params = p.params();
    if (tensors.size() != params.tensors.size())
        throw InputError("checkpoint has " + std::to_string(tensors.size()) + " tensors, policy expects " +
                         std::to_string(params.tensors.size()));
    for (std::size_t i = 0; i < tensors.size(); ++i) {
        if (tensors[i].rows() != params.tensors[i].rows() || tensors[i].cols() != params.tensors[i].cols())
            throw InputError("checkpoint tensor '" + params.names[i] + "' has the wrong shape");
        params.tensors[i] = tensors[i];
    }
    return p;
}

Checkpoint make_checkpoint(const MlpPolicy& policy, Trainer& trainer, std::uint64_t seed,
                           const std::string& config_json) {
    Checkpoint c;
    c.shape = policy.shape();
    c.tensors = policy.params().tensors;
    const auto& opt = trainer.optimizer();
    c.adam_m = opt.first_moments();
    c.adam_v = opt.second_moments();
    c.adam_steps = opt.steps();
    c.lr = opt.lr();
    c.lr_log_z = opt.lr_log_z();
    if (std::isfinite(trainer.scheduler().best())) c.scheduler_best = trainer.scheduler().best();
    c.scheduler_bad = trainer.scheduler().bad_reports();
    c.iteration = trainer.iteration();
    c.seed = seed;
    c.config_json = config_json;
    return c;
}

void save_checkpoint(const std::string& path, const Checkpoint& c) {
    json j;
    j["format"] = kFormat;
    j["version"] = kVersion;
    j["policy"] = {{"kind", "mlp"}, {"hidden", c.shape.hidden}, {"max_length", c.shape.max_length}};
    j["tensors"] = list_json(c.tensors);
    j["optimizer"] = {{"steps", c.adam_steps},
                      {"lr", c.lr},
                      {"lr_logz", c.lr_log_z},
                      {"m", list_json(c.adam_m)},
                      {"v", list_json(c.adam_v)}};
    j["scheduler"] = {{"best", c.scheduler_best ? json(*c.scheduler_best) : json(nullptr)},
                      {"bad_reports", c.scheduler_bad}};
    j["iteration"] = c.iteration;
    j["seed"] = c.seed;
    j["config"] = c.config_json.empty() ? json(nullptr) : json::parse(c.config_json);
    std::ofstream out(path);
    if (!out) throw InputError("cannot write checkpoint '" + path + "'");
    out << j.dump() << '\n';
    if (!out) throw InputError("failed writing checkpoint '" + path + "'");
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open checkpoint '" + path + "'");
    json j;
    try {
        j = json::parse(in);
        if (j.at("format") != kFormat) throw InputError("'" + path + "' is not a checkpoint");
        if (j.at("version").get<int>() != kVersion)
            throw InputError("unsupported checkpoint version " + j.at("version").dump());
        Checkpoint c;
        const auto& p = j.at("policy");
        if (p.at("kind") != "mlp") throw InputError("unsupported policy kind " + p.at("kind").dump());
        c.shape.hidden = p.at("hidden").get<int>();
        c.shape.max_length = p.at("max_length").get<std::size_t>();
        c.tensors = list_from(j.at("tensors"));
        const auto& o = j.at("optimizer");
        c.adam_steps = o.at("steps").get<long>();
        c.lr = o.at("lr").get<double>();
        c.lr_log_z = o.at("lr_logz").get<double>();
        c.adam_m = list_from(o.at("m"));
        c.adam_v = list_from(o.at("v"));
        const auto& s = j.at("scheduler");
        if (!s.at("best").is_null()) c.scheduler_best = s.at("best").get<double>();
        c.scheduler_bad = s.at("bad_reports").get<int>();
        c.iteration = j.at("iteration").get<long>();
        c.seed = j.at("seed").get<std::uint64_t>();
        if (!j.at("config").is_null()) c.config_json = j.at("config").dump(2);
        return c;
    } catch (const json::exception& e) {
        throw InputError("malformed checkpoint '" + path + "': " + e.what());
    }
}

void restore_trainer(Trainer& trainer, const Checkpoint& c) {
    auto& opt = trainer.optimizer();
    if (c.adam_m.size() != opt.first_moments().size() || c.adam_v.size() != opt.second_moments().size())
        throw InputError("checkpoint optimizer state does not match the policy");
    opt.first_moments() = c.adam_m;
    opt.second_moments() = c.adam_v;
    opt.restore(c.adam_steps, c.lr, c.lr_log_z);
    trainer.scheduler().restore(c.scheduler_best.value_or(std::numeric_limits<double>::infinity()), c.scheduler_bad);
    trainer.set_iteration(c.iteration);
}

}  // namespace codonflow
