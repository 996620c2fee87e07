#ifndef BEHAVIOR_EPI_PARAMS_IO_HPP
#define BEHAVIOR_EPI_PARAMS_IO_HPP

#include "behavior_epi/model.hpp"

#include <json.hpp>

#include <stdexcept>
#include <vector>

namespace behavior_epi {

inline nlohmann::json to_json(const LockdownSchedule& s)
{
    nlohmann::json out = nlohmann::json::array();
    for (const auto& seg : s.segments()) out.push_back({{"start_day", seg.start_day}, {"value", seg.value}});
    return out;
}

inline LockdownSchedule schedule_from_json(const nlohmann::json& j)
{
    std::vector<LockdownSchedule::Segment> segs;
    for (const auto& e : j) segs.push_back({e.at("start_day").get<int>(), e.at("value").get<double>()});
    return LockdownSchedule(std::move(segs));
}

inline nlohmann::json to_json(const ModelParams& p)
{
    nlohmann::json j;
    j["beta_a"] = p.beta_a;
    j["beta_i"] = p.beta_i;
    j["beta_h"] = p.beta_h;
    j["xi"] = p.xi;
    j["sigma_e"] = p.sigma_e;
    j["sigma_i"] = p.sigma_i;
    j["gamma_a"] = p.gamma_a;
    j["gamma_h"] = p.gamma_h;
    j["delta_h"] = p.delta_h;
    j["r"] = p.r;
    j["q"] = p.q;
    j["a"] = std::vector<double>(p.a.data(), p.a.data() + p.a.size());
    nlohmann::json cb = nlohmann::json::array();
    for (Eigen::Index i = 0; i < p.c_b.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index k = 0; k < p.c_b.cols(); ++k) row.push_back(p.c_b(i, k));
        cb.push_back(row);
    }
    j["c_b"] = cb;
    j["theta"] = to_json(p.theta);
    return j;
}

/**
 * @brief Reads a parameter document; keys missing from @p j keep the values of @p defaults.
 */
inline ModelParams params_from_json(const nlohmann::json& j, const ModelParams& defaults = {})
{
    ModelParams p = defaults;
    auto scalar = [&](const char* key, double& field) {
        if (j.contains(key)) field = j.at(key).get<double>();
    };
    scalar("beta_a", p.beta_a);
    scalar("beta_i", p.beta_i);
    scalar("beta_h", p.beta_h);
    scalar("xi", p.xi);
    scalar("sigma_e", p.sigma_e);
    scalar("sigma_i", p.sigma_i);
    scalar("gamma_a", p.gamma_a);
    scalar("gamma_h", p.gamma_h);
    scalar("delta_h", p.delta_h);
    scalar("r", p.r);
    scalar("q", p.q);
    if (j.contains("a")) {
        const auto v = j.at("a").get<std::vector<double>>();
        p.a = Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
    }
    if (j.contains("c_b")) {
        const auto rows = j.at("c_b").get<std::vector<std::vector<double>>>();
        p.c_b = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.size()));
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (rows[i].size() != rows.size()) throw std::invalid_argument("c_b must be square");
            for (std::size_t k = 0; k < rows.size(); ++k) p.c_b(i, k) = rows[i][k];
        }
    }
    if (j.contains("theta")) p.theta = schedule_from_json(j.at("theta"));
    p.validate();
    return p;
}

} // namespace behavior_epi

#endif // BEHAVIOR_EPI_PARAMS_IO_HPP
