#include "c2l/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>

#include "c2l/rng.hpp"

namespace c2l {

namespace {

// A state of charge this close to zero counts as empty; keeps the stop
// condition robust to accumulated rounding.
constexpr Scalar kEmptySoc = 1e-9;

constexpr Scalar kTwoPi = 2.0 * 3.141592653589793238462643383279502884;

} // namespace

ProfileStyle profile_style_from_string(const std::string& name) {
    if (name == "pulse") return ProfileStyle::pulse;
    if (name == "cruise") return ProfileStyle::cruise;
    if (name == "constant") return ProfileStyle::constant;
    throw ParamError("unknown profile style '" + name + "' (pulse|cruise|constant)");
}

std::string to_string(ProfileStyle style) {
    switch (style) {
    case ProfileStyle::pulse: return "pulse";
    case ProfileStyle::cruise: return "cruise";
    default: return "constant";
    }
}

std::vector<std::pair<Scalar, Scalar>> default_ocv_knots() {
    return {{0.0, 2.50}, {0.10, 3.30}, {0.50, 3.65}, {0.90, 4.00}, {1.0, 4.20}};
}

void SynthConfig::validate() const {
    if (!(capacity_ah > 0.0)) {
        throw ParamError("synth: capacity_ah must be positive");
    }
    if (!(sample_period_s > 0.0)) {
        throw ParamError("synth: sample_period_s must be positive");
    }
    if (!(max_duration_s > 0.0)) {
        throw ParamError("synth: max_duration_s must be positive");
    }
    if (initial_soc < 0.0 || initial_soc > 1.0) {
        throw ParamError("synth: initial_soc must lie in [0, 1]");
    }
    if (ocv_knots.size() < 2) {
        throw ParamError("synth: need at least two ocv knots");
    }
    for (std::size_t i = 1; i < ocv_knots.size(); ++i) {
        if (!(ocv_knots[i].first > ocv_knots[i - 1].first) ||
            !(ocv_knots[i].second > ocv_knots[i - 1].second)) {
            throw ParamError("synth: ocv knots must be strictly increasing");
        }
    }
}

Scalar ocv_lookup(const std::vector<std::pair<Scalar, Scalar>>& knots, Scalar soc) {
    if (soc <= knots.front().first) {
        return knots.front().second;
    }
    if (soc >= knots.back().first) {
        return knots.back().second;
    }
    for (std::size_t i = 1; i < knots.size(); ++i) {
        if (soc <= knots[i].first) {
            const auto& [s0, v0] = knots[i - 1];
            const auto& [s1, v1] = knots[i];
            const Scalar w = (soc - s0) / (s1 - s0);
            return v0 + w * (v1 - v0);
        }
    }
    return knots.back().second;
}

namespace {

// Piecewise-constant pulse load with occasional rests.
class PulseProfile {
public:
    PulseProfile(const SynthConfig& cfg, Rng& rng) : cfg_(cfg), rng_(rng) {}

    Scalar at(Scalar t) {
        if (t >= segment_end_) {
            segment_end_ = t + rng_.uniform(2.0, 8.0);
            if (rng_.uniform() < 0.15) {
                level_ = 0.0; // rest
            } else {
                level_ = cfg_.base_current_a +
                         rng_.uniform(-cfg_.current_span_a, cfg_.current_span_a);
                level_ = std::min(level_, Scalar(0));
            }
        }
        return level_;
    }

private:
    const SynthConfig& cfg_;
    Rng& rng_;
    Scalar segment_end_ = -1.0;
    Scalar level_ = 0.0;
};

} // namespace

DriveCycleRecord synth_drive_cycle(const SynthConfig& cfg, const std::string& name,
                                   std::uint64_t seed) {
    cfg.validate();
    Rng rng = Rng(seed).fork("synth");
    Rng noise = Rng(seed).fork("synth-noise");
    PulseProfile pulses(cfg, rng);
    const Scalar phase_a = rng.uniform(0.0, kTwoPi);
    const Scalar phase_b = rng.uniform(0.0, kTwoPi);

    DriveCycleRecord record;
    record.cycle_name = name;
    record.ambient_temp_c = cfg.ambient_temp_c;
    record.sample_period_s = cfg.sample_period_s;

    const Scalar dt = cfg.sample_period_s;
    Scalar soc = cfg.initial_soc;
    Scalar v_rc = 0.0;
    Scalar heat_j = 0.0;

    const std::size_t max_steps = static_cast<std::size_t>(cfg.max_duration_s / dt) + 1;
    for (std::size_t k = 0; k < max_steps; ++k) {
        const Scalar t = static_cast<Scalar>(k) * dt;
        Scalar load = 0.0;
        switch (cfg.style) {
        case ProfileStyle::constant:
            load = cfg.base_current_a;
            break;
        case ProfileStyle::cruise:
            load = cfg.base_current_a +
                   0.30 * cfg.current_span_a * std::sin(kTwoPi * t / 45.0 + phase_a) +
                   0.12 * cfg.current_span_a * std::sin(kTwoPi * t / 7.3 + phase_b);
            load = std::min(load, Scalar(0));
            break;
        case ProfileStyle::pulse:
            load = pulses.at(t);
            break;
        }

        const Scalar true_v = ocv_lookup(cfg.ocv_knots, soc) +
                              load * cfg.internal_resistance_ohm + v_rc;
        const Scalar true_t = cfg.ambient_temp_c + cfg.heating_c_per_joule * heat_j;

        record.time_s.push_back(t);
        record.current_a.push_back(load + (cfg.noise_current_a > 0.0
                                               ? noise.normal(0.0, cfg.noise_current_a)
                                               : 0.0));
        record.voltage_v.push_back(true_v + (cfg.noise_voltage_v > 0.0
                                                 ? noise.normal(0.0, cfg.noise_voltage_v)
                                                 : 0.0));
        record.temperature_c.push_back(
            true_t +
            (cfg.noise_temperature_c > 0.0 ? noise.normal(0.0, cfg.noise_temperature_c)
                                           : 0.0));
        record.soc.push_back(std::clamp(soc, Scalar(0), Scalar(1)));

        if (soc <= kEmptySoc || true_v <= cfg.cutoff_voltage_v) {
            break;
        }

        soc += load * dt / (3600.0 * cfg.capacity_ah);
        soc = std::min(soc, Scalar(1));
        const Scalar r_total = cfg.internal_resistance_ohm + cfg.polarization_resistance_ohm;
        heat_j += load * load * r_total * dt;
        if (cfg.polarization_tau_s > 0.0 && cfg.polarization_resistance_ohm > 0.0) {
            v_rc += dt / cfg.polarization_tau_s *
                    (load * cfg.polarization_resistance_ohm - v_rc);
        }
    }
    return record;
}

void write_cycle_csv(const DriveCycleRecord& record, std::ostream& out) {
    out << kCycleCsvHeader << '\n';
    char buf[160];
    for (std::size_t i = 0; i < record.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.4f,%.9g,%.9g,%.9g,%.9g", record.time_s[i],
                      record.current_a[i], record.voltage_v[i], record.temperature_c[i],
                      record.soc[i]);
        out << buf << '\n';
    }
}

void write_cycle_csv_file(const DriveCycleRecord& record, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot write cycle file '" + path + "'");
    }
    write_cycle_csv(record, out);
    if (!out.good()) {
        throw IoError("write failed for cycle file '" + path + "'");
    }
}

} // namespace c2l
