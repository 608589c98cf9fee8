#include "qmeas/micro.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "qmeas/rng.hpp"

namespace qmeas {

using cd = std::complex<double>;

namespace {
cd polar1(double phase) { return {std::cos(phase), std::sin(phase)}; }
} // namespace

cd ElementaryModel::u1() const { return std::sqrt(p1) * polar1(chi); }
cd ElementaryModel::u2() const { return std::sqrt(p2) * polar1(-chi); }
cd ElementaryModel::u1_neg() const { return std::sqrt(1.0 - p1) * polar1(-chi_prime); }
cd ElementaryModel::u2_neg() const { return std::sqrt(1.0 - p2) * polar1(chi_prime); }

void ElementaryModel::validate() const {
    if (!(p1 > 0.0 && p1 < 1.0 && p2 > 0.0 && p2 < 1.0))
        throw std::invalid_argument("ElementaryModel: p1, p2 must lie in (0, 1)");
    if (!(tau > 0.0)) throw std::invalid_argument("ElementaryModel: tau must be positive");
    if (!std::isfinite(chi) || !std::isfinite(chi_prime))
        throw std::invalid_argument("ElementaryModel: non-finite phase");
}

double positive_probability(const AmplitudePair& state, const ElementaryModel& model) {
    const double n1 = std::norm(state.c1);
    const double n2 = std::norm(state.c2);
    const double total = n1 + n2;
    if (!(total > 0.0)) throw std::invalid_argument("positive_probability: zero state");
    return (model.p1 * n1 + model.p2 * n2) / total;
}

AmplitudePair elementary_update(const AmplitudePair& state, bool positive,
                                const ElementaryModel& model) {
    if (positive) return {state.c1 * model.u1(), state.c2 * model.u2()};
    return {state.c1 * model.u1_neg(), state.c2 * model.u2_neg()};
}

std::pair<cd, cd> series_amplitude_selective(const ElementaryModel& model,
                                             const std::vector<bool>& outcomes) {
    if (outcomes.empty())
        throw std::invalid_argument("series_amplitude_selective: empty outcome sequence");
    int n_plus = 0;
    for (bool o : outcomes) n_plus += o ? 1 : 0;
    const int n_minus = static_cast<int>(outcomes.size()) - n_plus;
    auto ipow = [](cd base, int e) {
        cd r{1.0, 0.0};
        for (int i = 0; i < e; ++i) r *= base;
        return r;
    };
    return {ipow(model.u1(), n_plus) * ipow(model.u1_neg(), n_minus),
            ipow(model.u2(), n_plus) * ipow(model.u2_neg(), n_minus)};
}

double binomial_pmf(int k, int n, double p) {
    if (k < 0 || k > n) return 0.0;
    if (p <= 0.0) return k == 0 ? 1.0 : 0.0;
    if (p >= 1.0) return k == n ? 1.0 : 0.0;
    const double log_choose =
        std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
    return std::exp(log_choose + k * std::log(p) + (n - k) * std::log1p(-p));
}

std::pair<cd, cd> series_amplitude_unordered(const ElementaryModel& model, int n_plus,
                                             int n_total) {
    if (n_plus < 0 || n_plus > n_total)
        throw std::invalid_argument("series_amplitude_unordered: need 0 <= N+ <= N");
    // sqrt(C(N,N+)) |u|^.. as sqrt of the binomial pmf keeps the product
    // stable for large N; the phase follows the selective product.
    const double m1 = std::sqrt(binomial_pmf(n_plus, n_total, model.p1));
    const double m2 = std::sqrt(binomial_pmf(n_plus, n_total, model.p2));
    const double phase = n_plus * model.chi - (n_total - n_plus) * model.chi_prime;
    return {m1 * polar1(phase), m2 * polar1(-phase)};
}

double series_outcome_probability(const AmplitudePair& state, const ElementaryModel& model,
                                  int n_plus, int n_total) {
    const double n1 = std::norm(state.c1);
    const double n2 = std::norm(state.c2);
    const double total = n1 + n2;
    if (!(total > 0.0)) throw std::invalid_argument("series_outcome_probability: zero state");
    return (n1 / total) * binomial_pmf(n_plus, n_total, model.p1) +
           (n2 / total) * binomial_pmf(n_plus, n_total, model.p2);
}

std::pair<cd, cd> gaussian_series_amplitude(const ElementaryModel& model, double n_ratio,
                                            int n_total) {
    const double n = static_cast<double>(n_total);
    auto component = [&](double p, double phase_sign) {
        const double var = p * (1.0 - p);
        // N_i^2 = 1/sqrt(2 pi N p (1-p)) makes |U_i|^2 track the pmf pointwise
        const double norm = std::pow(2.0 * kPi * n * var, -0.25);
        const double arg = -n * (n_ratio - p) * (n_ratio - p) / (4.0 * var);
        const double phase =
            phase_sign * n * (n_ratio * model.chi - (1.0 - n_ratio) * model.chi_prime);
        return norm * std::exp(arg) * polar1(phase);
    };
    return {component(model.p1, +1.0), component(model.p2, -1.0)};
}

double n_to_energy(double n_ratio, const ElementaryModel& model, const DerivedScales& scales) {
    const double dp = model.delta_p();
    if (dp == 0.0) throw std::invalid_argument("n_to_energy: delta_p must be nonzero");
    return scales.e0 + scales.delta_e * (n_ratio - model.p0()) / dp;
}

LevelResolution level_resolution_time(const ElementaryModel& model, const DerivedScales& scales) {
    const double dp = model.delta_p();
    if (dp == 0.0) throw std::invalid_argument("level_resolution_time: delta_p must be nonzero");
    const double p0 = model.p0();
    LevelResolution r;
    r.t_lr = model.tau * 4.0 * p0 * (1.0 - p0) / (dp * dp);
    r.implied_kappa = 1.0 / (r.t_lr * scales.delta_e * scales.delta_e);
    return r;
}

ElementaryModel concrete_model_params(double g, double a_sq, double b, double tau) {
    if (!(g > 0.0 && g < 1.0))
        throw std::invalid_argument("concrete_model_params: need 0 < g < 1");
    if (!(a_sq > 0.0)) throw std::invalid_argument("concrete_model_params: need |a|^2 > 0");
    const double p0 = a_sq * (1.0 + g * g);
    const double dp = 4.0 * g * a_sq;
    ElementaryModel model;
    model.p1 = p0 - 0.5 * dp;
    model.p2 = p0 + 0.5 * dp;
    model.chi = 0.0;
    model.chi_prime = -g * b;
    model.tau = tau;
    model.validate(); // rejects parameter sets with p outside (0,1)
    return model;
}

double concrete_t_lr_estimate(double g, double a_sq, double tau) {
    return tau / (4.0 * g * g * a_sq);
}

std::string FeasibilityReport::to_string() const {
    std::ostringstream os;
    os << "commutator_ratio N^2 dp v tau / sqrt(p0) = " << commutator_ratio
       << (commutator_ok ? "  pass (<= 0.1)" : "  FAIL (> 0.1)") << '\n'
       << "continuity_ratio p0 / dp^2 = " << continuity_ratio
       << (continuity_ok ? "  pass (>= 10)" : "  FAIL (< 10)") << '\n'
       << "phase_ratio g b T / tau = " << phase_ratio
       << (phase_ok ? "  pass (<= 0.1)" : "  FAIL (> 0.1)") << '\n';
    return os.str();
}

FeasibilityReport feasibility_check(const ElementaryModel& model, const DerivedScales& scales,
                                    int n_total, double g, double b, double t_total) {
    FeasibilityReport r;
    const double n = static_cast<double>(n_total);
    const double v_amp = std::isfinite(scales.t_rabi) ? kPi / scales.t_rabi : 0.0;
    r.commutator_ratio =
        n * n * std::abs(model.delta_p()) * v_amp * model.tau / std::sqrt(model.p0());
    r.continuity_ratio = model.p0() / (model.delta_p() * model.delta_p());
    r.phase_ratio = std::abs(g * b) * t_total / model.tau;
    r.commutator_ok = r.commutator_ratio <= 0.1;
    r.continuity_ok = r.continuity_ratio >= 10.0;
    r.phase_ok = r.phase_ratio <= 0.1;
    return r;
}

MicroRun micro_trajectory(const SystemConfig& config, const ElementaryModel& model,
                          int n_per_series, std::uint64_t seed) {
    config.validate();
    model.validate();
    if (model.delta_p() == 0.0)
        throw std::invalid_argument("micro_trajectory: delta_p must be nonzero");
    if (n_per_series < 1) throw std::invalid_argument("micro_trajectory: n_per_series >= 1");

    const double obs_f = config.t_total / model.tau;
    const auto n_obs = static_cast<long>(std::llround(obs_f));
    if (n_obs < 1 || std::abs(obs_f - static_cast<double>(n_obs)) > 1e-6)
        throw std::invalid_argument("micro_trajectory: t_total must be a whole number of tau");
    if (n_obs % n_per_series != 0)
        throw std::invalid_argument("micro_trajectory: observation count not divisible by N");

    const long n_series = n_obs / n_per_series;
    const DerivedScales scales = derive_scales(config);
    Rng rng(seed);

    AmplitudePair state; // (1, 0)
    MicroRun run;
    run.readout.dt = static_cast<double>(n_per_series) * model.tau;
    run.readout.t_total = config.t_total;
    run.readout.samples.reserve(n_series);
    run.series.reserve(n_series);
    run.trajectory.times.reserve(n_series + 1);

    auto record = [&](double t) {
        run.trajectory.times.push_back(t);
        run.trajectory.amplitudes.push_back(state);
        run.trajectory.p2.push_back(state.p2());
        run.trajectory.norm_sq.push_back(state.norm_sq());
    };
    record(0.0);

    const cd u1 = model.u1(), u2 = model.u2();
    const cd u1n = model.u1_neg(), u2n = model.u2_neg();

    long obs_index = 0;
    for (long s = 0; s < n_series; ++s) {
        int n_plus = 0;
        for (int j = 0; j < n_per_series; ++j, ++obs_index) {
            const double t = static_cast<double>(obs_index) * model.tau;
            // the Bernoulli probability is a ratio, so the running norm of
            // the unnormalized state never enters it
            const double p = positive_probability(state, model);
            const bool positive = rng.bernoulli(p);
            if (positive) {
                ++n_plus;
                state.c1 *= u1;
                state.c2 *= u2;
            } else {
                state.c1 *= u1n;
                state.c2 *= u2n;
            }
            // driving over the repetition period: rotation by the pulse
            // overlap of [t, t+tau], identity outside the pulse
            const double overlap =
                std::max(0.0, std::min(t + model.tau, config.t2) - std::max(t, config.t1));
            if (overlap > 0.0) {
                const double theta = config.v_amplitude * overlap;
                const double c = std::cos(theta);
                const cd is(0.0, std::sin(theta));
                const cd a1 = c * state.c1 - is * state.c2;
                const cd a2 = c * state.c2 - is * state.c1;
                state.c1 = a1;
                state.c2 = a2;
            }
        }
        // ancestral sampling conditions on the drawn record, so the state is
        // renormalized once per series to keep it away from underflow
        state = state.normalized();
        if (!state.finite())
            throw std::runtime_error("micro_trajectory: state became non-finite");
        SeriesRecord rec;
        rec.n_total = n_per_series;
        rec.n_plus = n_plus;
        rec.n_ratio = static_cast<double>(n_plus) / static_cast<double>(n_per_series);
        rec.energy = n_to_energy(rec.n_ratio, model, scales);
        run.series.push_back(rec);
        run.readout.samples.push_back(rec.energy);
        record(static_cast<double>(s + 1) * run.readout.dt);
    }
    return run;
}

double mean_energy(const AmplitudePair& state, const DerivedScales& scales) {
    const double n1 = std::norm(state.c1);
    const double n2 = std::norm(state.c2);
    const double total = n1 + n2;
    if (!(total > 0.0)) throw std::invalid_argument("mean_energy: zero state");
    const double e1 = scales.e0 - 0.5 * scales.delta_e;
    const double e2 = scales.e0 + 0.5 * scales.delta_e;
    return (e1 * n1 + e2 * n2) / total;
}

ElementaryModel model_for_config(const SystemConfig& config, double tau) {
    if (!(config.kappa > 0.0))
        throw std::invalid_argument("model_for_config: kappa must be positive");
    if (!(tau > 0.0)) throw std::invalid_argument("model_for_config: tau must be positive");
    const DerivedScales scales = derive_scales(config);
    // p0 = 1/2 maximizes the per-observation information; dp follows from
    // T_lr = tau 4 p0 (1-p0) / dp^2 at the configured kappa.
    const double p0 = 0.5;
    const double dp = std::sqrt(4.0 * p0 * (1.0 - p0) * tau / scales.t_lr);
    if (!(dp > 0.0 && p0 + 0.5 * dp < 1.0))
        throw std::invalid_argument("model_for_config: tau too large for this kappa");
    ElementaryModel model;
    model.p1 = p0 - 0.5 * dp;
    model.p2 = p0 + 0.5 * dp;
    model.tau = tau;
    model.validate();
    return model;
}

} // namespace qmeas
