#ifndef BEHAVIOR_EPI_MODEL_HPP
#define BEHAVIOR_EPI_MODEL_HPP

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

/**
 * @namespace behavior_epi
 * @brief n-group behavior/epidemiology model: simulation, stability, calibration and sensitivity.
 */
namespace behavior_epi {

/// Raised when a model quantity is evaluated outside its domain (N <= 0, negative compartments, ...).
class DomainError : public std::domain_error
{
public:
    using std::domain_error::domain_error;
};

/// Epidemiological compartments of a behavioral group.
enum class Compartment : int { S = 0, E = 1, Ia = 2, Is = 3, Ih = 4, R = 5 };

inline constexpr int kCompartments = 6;

inline constexpr std::array<Compartment, kCompartments> kAllCompartments{
    Compartment::S, Compartment::E, Compartment::Ia, Compartment::Is, Compartment::Ih, Compartment::R};

inline constexpr std::array<Compartment, 4> kInfectedCompartments{
    Compartment::E, Compartment::Ia, Compartment::Is, Compartment::Ih};

inline std::string_view compartment_name(Compartment c)
{
    switch (c) {
    case Compartment::S: return "S";
    case Compartment::E: return "E";
    case Compartment::Ia: return "I_a";
    case Compartment::Is: return "I_s";
    case Compartment::Ih: return "I_h";
    case Compartment::R: return "R";
    }
    return "?";
}

inline Compartment parse_compartment(std::string_view name)
{
    for (auto c : kAllCompartments) {
        if (compartment_name(c) == name) {
            return c;
        }
    }
    if (name == "Ia") return Compartment::Ia;
    if (name == "Is") return Compartment::Is;
    if (name == "Ih") return Compartment::Ih;
    throw std::invalid_argument("unknown compartment '" + std::string(name) + "'");
}

/**
 * @brief Index of compartment @p c of group @p group in the flat state vector.
 *
 * The layout is compartment-major: all S values first (group 0..n-1), then all E values, and so on.
 */
constexpr Eigen::Index state_index(int n_groups, Compartment c, int group)
{
    return static_cast<Eigen::Index>(static_cast<int>(c) * n_groups + group);
}

/**
 * @brief Piecewise-constant residual-transmission multiplier theta_l(t).
 *
 * Segment i applies on [start_day_i, start_day_{i+1}); the last segment extends to +infinity and the first
 * segment starts at day 0 (it is also used for t < 0).
 */
class LockdownSchedule
{
public:
    struct Segment {
        int start_day = 0;
        double value = 1.0;
    };

    LockdownSchedule()
        : m_segments{{0, 1.0}}
    {
    }

    explicit LockdownSchedule(std::vector<Segment> segments)
        : m_segments(std::move(segments))
    {
        if (m_segments.empty()) {
            throw std::invalid_argument("lockdown schedule needs at least one segment");
        }
        if (m_segments.front().start_day != 0) {
            throw std::invalid_argument("first lockdown segment must start at day 0");
        }
        for (std::size_t i = 0; i < m_segments.size(); ++i) {
            const double v = m_segments[i].value;
            if (!(v >= 0.0 && v <= 1.0)) {
                throw std::invalid_argument("lockdown value outside [0,1]: " + std::to_string(v));
            }
            if (i > 0 && m_segments[i].start_day <= m_segments[i - 1].start_day) {
                throw std::invalid_argument("lockdown segment start days must be strictly increasing");
            }
        }
    }

    static LockdownSchedule constant(double value)
    {
        return LockdownSchedule({{0, value}});
    }

    double operator()(double t) const
    {
        double v = m_segments.front().value;
        for (const auto& s : m_segments) {
            if (t >= s.start_day) {
                v = s.value;
            }
            else {
                break;
            }
        }
        return v;
    }

    /// Start days of all segments after the first, i.e. the discontinuities of theta_l.
    std::vector<double> breakpoints() const
    {
        std::vector<double> out;
        for (std::size_t i = 1; i < m_segments.size(); ++i) {
            out.push_back(m_segments[i].start_day);
        }
        return out;
    }

    const std::vector<Segment>& segments() const
    {
        return m_segments;
    }

    std::size_t size() const
    {
        return m_segments.size();
    }

    double value(std::size_t segment) const
    {
        return m_segments.at(segment).value;
    }

    void set_value(std::size_t segment, double v)
    {
        if (!(v >= 0.0 && v <= 1.0)) {
            throw std::invalid_argument("lockdown value outside [0,1]: " + std::to_string(v));
        }
        m_segments.at(segment).value = v;
    }

private:
    std::vector<Segment> m_segments;
};

/**
 * @brief Rate constants of the n-group behavior model.
 *
 * c_b(i, j) is the rate at which group i pulls members of group j one group closer to i
 * (0-based indices, so c_b(0, 1) is the Group 1 -> Group 2 influence rate c^B_12).
 */
struct ModelParams {
    double beta_a = 0.0;
    double beta_i = 0.0;
    double beta_h = 0.0;
    double xi = 0.0;
    double sigma_e = 0.0;
    double sigma_i = 0.0;
    double gamma_a = 0.0;
    double gamma_h = 0.0;
    double delta_h = 0.0;
    double r = 0.0;
    double q = 0.0;
    Eigen::VectorXd a = Eigen::VectorXd::Zero(1);
    Eigen::MatrixXd c_b = Eigen::MatrixXd::Zero(1, 1);
    LockdownSchedule theta;

    int groups() const
    {
        return static_cast<int>(a.size());
    }

    /// Throws std::invalid_argument describing the first violated constraint.
    void validate() const
    {
        auto non_negative = [](double v, const char* name) {
            if (!(v >= 0.0) || !std::isfinite(v)) {
                throw std::invalid_argument(std::string("parameter ") + name + " must be a finite rate >= 0");
            }
        };
        non_negative(beta_a, "beta_a");
        non_negative(beta_i, "beta_i");
        non_negative(beta_h, "beta_h");
        non_negative(xi, "xi");
        non_negative(sigma_e, "sigma_e");
        non_negative(sigma_i, "sigma_i");
        non_negative(gamma_a, "gamma_a");
        non_negative(gamma_h, "gamma_h");
        non_negative(delta_h, "delta_h");
        if (!(r >= 0.0 && r <= 1.0)) throw std::invalid_argument("parameter r must lie in [0,1]");
        if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("parameter q must lie in [0,1]");
        const auto n = a.size();
        if (n < 1) throw std::invalid_argument("model needs at least one group");
        if (c_b.rows() != n || c_b.cols() != n) {
            throw std::invalid_argument("c_b must be an n x n matrix matching the size of a");
        }
        for (Eigen::Index i = 0; i < n; ++i) {
            non_negative(a(i), "a");
            if (c_b(i, i) != 0.0) throw std::invalid_argument("diagonal of c_b must be zero");
            for (Eigen::Index j = 0; j < n; ++j) {
                non_negative(c_b(i, j), "c_b");
            }
        }
    }
};

/**
 * @brief Model state: n groups x 6 compartments in compartment-major layout, plus the time stamp.
 */
struct SystemState {
    int n = 1;
    Eigen::VectorXd values = Eigen::VectorXd::Zero(kCompartments);
    double t = 0.0;

    SystemState() = default;

    SystemState(int n_groups, Eigen::VectorXd v, double time = 0.0)
        : n(n_groups)
        , values(std::move(v))
        , t(time)
    {
        if (values.size() != kCompartments * n) {
            throw std::invalid_argument("state vector length must be 6n");
        }
    }

    static SystemState zeros(int n_groups, double time = 0.0)
    {
        return SystemState(n_groups, Eigen::VectorXd::Zero(kCompartments * n_groups), time);
    }

    double& operator()(Compartment c, int group)
    {
        return values(state_index(n, c, group));
    }

    double operator()(Compartment c, int group) const
    {
        return values(state_index(n, c, group));
    }

    double group_total(int group) const
    {
        double s = 0.0;
        for (auto c : kAllCompartments) s += (*this)(c, group);
        return s;
    }

    double compartment_total(Compartment c) const
    {
        return values.segment(static_cast<int>(c) * n, n).sum();
    }

    double total() const
    {
        return values.sum();
    }

    double infected_total() const
    {
        double s = 0.0;
        for (auto c : kInfectedCompartments) s += compartment_total(c);
        return s;
    }
};

namespace detail {

inline void require_groups(const ModelParams& p, Eigen::Index state_size)
{
    if (state_size != kCompartments * p.groups()) {
        throw std::invalid_argument("state size does not match the number of groups in the parameters");
    }
}

inline double total_population(const Eigen::Ref<const Eigen::VectorXd>& y)
{
    return y.sum();
}

} // namespace detail

/**
 * @brief Hospitalization-induced contact modifier exp(-a_i * I_h / N).
 */
inline double contact_modifier(double a_i, double hospitalized_total, double population)
{
    if (!(population > 0.0)) {
        throw DomainError("contact_modifier: total population must be positive");
    }
    if (a_i < 0.0 || hospitalized_total < 0.0) {
        throw DomainError("contact_modifier: a_i and I_h must be non-negative");
    }
    return std::exp(-a_i * hospitalized_total / population);
}

/**
 * @brief Per-susceptible infection rate of every group at time @p t for the flat state @p y.
 *
 * lambda_i = theta_l(t) * cA_i / N * sum_j cA_j (beta_a I_a,j + beta_i I_s,j + beta_h I_h,j).
 */
inline Eigen::VectorXd force_of_infection_all(const ModelParams& p, double t, const Eigen::Ref<const Eigen::VectorXd>& y)
{
    const int n = p.groups();
    detail::require_groups(p, y.size());
    const double total = detail::total_population(y);
    if (!(total > 0.0)) {
        throw DomainError("force_of_infection: total population must be positive");
    }
    const double hosp = y.segment(static_cast<int>(Compartment::Ih) * n, n).sum();
    Eigen::VectorXd modifier(n);
    double pressure = 0.0;
    for (int j = 0; j < n; ++j) {
        modifier(j) = std::exp(-p.a(j) * hosp / total);
        pressure += modifier(j) * (p.beta_a * y(state_index(n, Compartment::Ia, j)) +
                                   p.beta_i * y(state_index(n, Compartment::Is, j)) +
                                   p.beta_h * y(state_index(n, Compartment::Ih, j)));
    }
    return (p.theta(t) * pressure / total) * modifier;
}

inline double force_of_infection(const ModelParams& p, const SystemState& state, int group_index)
{
    if (group_index < 0 || group_index >= state.n) {
        throw std::out_of_range("force_of_infection: group index out of range");
    }
    return force_of_infection_all(p, state.t, state.values)(group_index);
}

/**
 * @brief Net influence (peer-pressure) flow of every compartment of every group, persons/day.
 *
 * Members of group i move to i+1 at per-capita rate sum_{j>i} c_b(j,i) N_j / N and to i-1 at rate
 * sum_{j<i} c_b(j,i) N_j / N. Groups 0 and n-1 have no neighbour outside the range. The flows of each
 * compartment class sum to zero over the groups.
 */
inline Eigen::VectorXd influence_flux(const ModelParams& p, const Eigen::Ref<const Eigen::VectorXd>& y)
{
    const int n = p.groups();
    detail::require_groups(p, y.size());
    Eigen::VectorXd flux = Eigen::VectorXd::Zero(y.size());
    if (n == 1) {
        return flux;
    }
    const double total = detail::total_population(y);
    if (!(total > 0.0)) {
        throw DomainError("influence_flux: total population must be positive");
    }
    Eigen::VectorXd group_size = Eigen::VectorXd::Zero(n);
    for (auto c : kAllCompartments) {
        group_size += y.segment(static_cast<int>(c) * n, n);
    }
    Eigen::VectorXd up(n);
    Eigen::VectorXd down(n);
    for (int i = 0; i < n; ++i) {
        double u = 0.0;
        double d = 0.0;
        for (int j = 0; j < n; ++j) {
            if (j > i) u += p.c_b(j, i) * group_size(j);
            if (j < i) d += p.c_b(j, i) * group_size(j);
        }
        up(i) = u / total;
        down(i) = d / total;
    }
    for (auto c : kAllCompartments) {
        const int base = static_cast<int>(c) * n;
        for (int i = 0; i < n; ++i) {
            double f = -y(base + i) * (up(i) + down(i));
            if (i > 0) f += y(base + i - 1) * up(i - 1);
            if (i < n - 1) f += y(base + i + 1) * down(i + 1);
            flux(base + i) = f;
        }
    }
    return flux;
}

inline SystemState influence_flux(const ModelParams& p, const SystemState& state)
{
    return SystemState(state.n, influence_flux(p, state.values), state.t);
}

/**
 * @brief Right-hand side of the n-group model; writes d/dt of the 6n compartments into @p dydt.
 *
 * Components more negative than -1e-9 N are rejected as a domain error.
 */
inline void rhs(const ModelParams& p, double t, const Eigen::Ref<const Eigen::VectorXd>& y, Eigen::Ref<Eigen::VectorXd> dydt)
{
    const int n = p.groups();
    detail::require_groups(p, y.size());
    const double total = detail::total_population(y);
    if (!(total > 0.0)) {
        throw DomainError("rhs: total population must be positive");
    }
    if (y.minCoeff() < -1e-9 * total) {
        throw DomainError("rhs: negative compartment beyond tolerance");
    }
    const Eigen::VectorXd lambda = force_of_infection_all(p, t, y);
    dydt = influence_flux(p, y);
    for (int g = 0; g < n; ++g) {
        const double s = y(state_index(n, Compartment::S, g));
        const double e = y(state_index(n, Compartment::E, g));
        const double ia = y(state_index(n, Compartment::Ia, g));
        const double is = y(state_index(n, Compartment::Is, g));
        const double ih = y(state_index(n, Compartment::Ih, g));
        const double rec = y(state_index(n, Compartment::R, g));
        const double infection = lambda(g) * s;
        dydt(state_index(n, Compartment::S, g)) += p.xi * rec - infection;
        dydt(state_index(n, Compartment::E, g)) += infection - p.sigma_e * e;
        dydt(state_index(n, Compartment::Ia, g)) += (1.0 - p.r) * p.sigma_e * e - p.gamma_a * ia;
        dydt(state_index(n, Compartment::Is, g)) += p.r * p.sigma_e * e - p.sigma_i * is;
        dydt(state_index(n, Compartment::Ih, g)) += p.q * p.sigma_i * is - (p.gamma_h + p.delta_h) * ih;
        dydt(state_index(n, Compartment::R, g)) +=
            p.gamma_a * ia + (1.0 - p.q) * p.sigma_i * is + p.gamma_h * ih - p.xi * rec;
    }
}

inline SystemState rhs(const ModelParams& p, const SystemState& state)
{
    Eigen::VectorXd d(state.values.size());
    rhs(p, state.t, state.values, d);
    return SystemState(state.n, std::move(d), state.t);
}

/**
 * @brief Parameters of the single-group model without behavior terms.
 */
struct BehaviorFreeParams {
    double beta_a = 0.0;
    double beta_i = 0.0;
    double beta_h = 0.0;
    double xi = 0.0;
    double sigma_e = 0.0;
    double sigma_i = 0.0;
    double gamma_a = 0.0;
    double gamma_h = 0.0;
    double delta_h = 0.0;
    double r = 0.0;
    double q = 0.0;
    LockdownSchedule theta;

    static BehaviorFreeParams from(const ModelParams& p)
    {
        BehaviorFreeParams b;
        b.beta_a = p.beta_a;
        b.beta_i = p.beta_i;
        b.beta_h = p.beta_h;
        b.xi = p.xi;
        b.sigma_e = p.sigma_e;
        b.sigma_i = p.sigma_i;
        b.gamma_a = p.gamma_a;
        b.gamma_h = p.gamma_h;
        b.delta_h = p.delta_h;
        b.r = p.r;
        b.q = p.q;
        b.theta = p.theta;
        return b;
    }
};

/**
 * @brief Behavior-free right-hand side on the 6-vector (S, E, I_a, I_s, I_h, R).
 *
 * Written independently of rhs() so that it can serve as a cross-check of the n-group code path.
 */
inline void rhs_behavior_free(const BehaviorFreeParams& p, double t, const Eigen::Ref<const Eigen::VectorXd>& y,
                              Eigen::Ref<Eigen::VectorXd> dydt)
{
    if (y.size() != kCompartments) {
        throw std::invalid_argument("rhs_behavior_free expects a single-group state");
    }
    const double s = y(0), e = y(1), ia = y(2), is = y(3), ih = y(4), rec = y(5);
    const double total = s + e + ia + is + ih + rec;
    if (!(total > 0.0)) {
        throw DomainError("rhs_behavior_free: total population must be positive");
    }
    if (y.minCoeff() < -1e-9 * total) {
        throw DomainError("rhs_behavior_free: negative compartment beyond tolerance");
    }
    const double infection = p.theta(t) * s / total * (p.beta_a * ia + p.beta_i * is + p.beta_h * ih);
    dydt(0) = p.xi * rec - infection;
    dydt(1) = infection - p.sigma_e * e;
    dydt(2) = (1.0 - p.r) * p.sigma_e * e - p.gamma_a * ia;
    dydt(3) = p.r * p.sigma_e * e - p.sigma_i * is;
    dydt(4) = p.q * p.sigma_i * is - (p.gamma_h + p.delta_h) * ih;
    dydt(5) = p.gamma_a * ia + (1.0 - p.q) * p.sigma_i * is + p.gamma_h * ih - p.xi * rec;
}

inline Eigen::VectorXd rhs_behavior_free(const BehaviorFreeParams& p, double t, const Eigen::VectorXd& y)
{
    Eigen::VectorXd d(kCompartments);
    rhs_behavior_free(p, t, y, d);
    return d;
}

/// Sums an n-group state over groups into the single-group (S, E, I_a, I_s, I_h, R) layout.
inline Eigen::VectorXd aggregate_groups(int n_groups, const Eigen::Ref<const Eigen::VectorXd>& y)
{
    Eigen::VectorXd out(kCompartments);
    for (auto c : kAllCompartments) {
        out(static_cast<int>(c)) = y.segment(static_cast<int>(c) * n_groups, n_groups).sum();
    }
    return out;
}

/// Copies @p p reduced to a single group (a = 0, no influence terms).
inline ModelParams single_group(const ModelParams& p)
{
    ModelParams out = p;
    out.a = Eigen::VectorXd::Zero(1);
    out.c_b = Eigen::MatrixXd::Zero(1, 1);
    return out;
}

} // namespace behavior_epi

#endif // BEHAVIOR_EPI_MODEL_HPP
