#ifndef BEHAVIOR_EPI_PARAMETERS_HPP
#define BEHAVIOR_EPI_PARAMETERS_HPP

#include "behavior_epi/model.hpp"

#include <array>
#include <stdexcept>
#include <string>
#include <string_view>

namespace behavior_epi {

/**
 * @brief Named scalar view of ModelParams used by fitting, sensitivity analysis and sweeps.
 *
 * theta_l1..theta_l4 address schedule segments 1..4 (segment 0 is the pre-lockdown phase);
 * c_b12 / c_b21 and a1 / a2 address the two-group behavior parameters.
 */
inline constexpr std::array<std::string_view, 18> kSensitivityParameters{
    "theta_l1", "theta_l2", "theta_l3", "theta_l4", "c_b12", "c_b21", "a1",      "a2",     "xi",
    "sigma_i",  "sigma_e",  "gamma_a",  "gamma_h",  "delta_h", "beta_a", "beta_i", "r", "q"};

namespace detail {

inline int theta_segment(std::string_view name)
{
    if (name.size() == 8 && name.substr(0, 7) == "theta_l" && name[7] >= '0' && name[7] <= '9') {
        return name[7] - '0';
    }
    return -1;
}

inline double* scalar_field(ModelParams& p, std::string_view name)
{
    if (name == "beta_a") return &p.beta_a;
    if (name == "beta_i") return &p.beta_i;
    if (name == "beta_h") return &p.beta_h;
    if (name == "xi") return &p.xi;
    if (name == "sigma_e") return &p.sigma_e;
    if (name == "sigma_i") return &p.sigma_i;
    if (name == "gamma_a") return &p.gamma_a;
    if (name == "gamma_h") return &p.gamma_h;
    if (name == "delta_h") return &p.delta_h;
    if (name == "r") return &p.r;
    if (name == "q") return &p.q;
    if (name == "a1" && p.a.size() >= 1) return &p.a(0);
    if (name == "a2" && p.a.size() >= 2) return &p.a(1);
    if (name == "c_b12" && p.c_b.rows() >= 2) return &p.c_b(0, 1);
    if (name == "c_b21" && p.c_b.rows() >= 2) return &p.c_b(1, 0);
    return nullptr;
}

} // namespace detail

inline double get_parameter(const ModelParams& p, std::string_view name)
{
    if (const int seg = detail::theta_segment(name); seg >= 0) {
        return p.theta.value(static_cast<std::size_t>(seg));
    }
    auto* field = detail::scalar_field(const_cast<ModelParams&>(p), name);
    if (!field) throw std::invalid_argument("unknown parameter '" + std::string(name) + "'");
    return *field;
}

inline void set_parameter(ModelParams& p, std::string_view name, double value)
{
    if (const int seg = detail::theta_segment(name); seg >= 0) {
        p.theta.set_value(static_cast<std::size_t>(seg), value);
        return;
    }
    auto* field = detail::scalar_field(p, name);
    if (!field) throw std::invalid_argument("unknown parameter '" + std::string(name) + "'");
    *field = value;
}

inline bool is_parameter(std::string_view name)
{
    ModelParams probe;
    probe.a = Eigen::VectorXd::Zero(2);
    probe.c_b = Eigen::MatrixXd::Zero(2, 2);
    return detail::theta_segment(name) >= 0 || detail::scalar_field(probe, name) != nullptr;
}

} // namespace behavior_epi

#endif // BEHAVIOR_EPI_PARAMETERS_HPP
