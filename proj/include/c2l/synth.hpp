#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "c2l/data.hpp"

namespace c2l {

enum class ProfileStyle { pulse, cruise, constant };

ProfileStyle profile_style_from_string(const std::string& name);
std::string to_string(ProfileStyle style);

std::vector<std::pair<Scalar, Scalar>> default_ocv_knots();

// First-order equivalent-circuit cell: open-circuit voltage from a
// piecewise-linear knot table, ohmic drop, one RC polarization branch, and
// joule heating proportional to cumulative I^2 R. State of charge follows
// coulomb counting. Desk-scale defaults keep a full discharge at a few
// hundred seconds.
struct SynthConfig {
    Scalar capacity_ah = 0.35;
    Scalar internal_resistance_ohm = 0.02;
    Scalar polarization_resistance_ohm = 0.01;
    Scalar polarization_tau_s = 10.0;
    Scalar sample_period_s = 0.1;
    Scalar ambient_temp_c = 25.0;
    Scalar heating_c_per_joule = 0.05;
    ProfileStyle style = ProfileStyle::pulse;
    Scalar base_current_a = -3.5;  // mean load, discharge negative
    Scalar current_span_a = 2.5;   // style-dependent variation around the mean
    Scalar noise_current_a = 0.02;
    Scalar noise_voltage_v = 0.002;
    Scalar noise_temperature_c = 0.05;
    Scalar cutoff_voltage_v = 2.5;
    Scalar initial_soc = 1.0;
    Scalar max_duration_s = 3600.0;
    // (soc, volts) knots, strictly increasing in both coordinates.
    std::vector<std::pair<Scalar, Scalar>> ocv_knots = default_ocv_knots();

    void validate() const;
};

// Piecewise-linear interpolation, clamped at the end knots.
Scalar ocv_lookup(const std::vector<std::pair<Scalar, Scalar>>& knots, Scalar soc);

// Simulates one discharge. The ground-truth soc series is the clean coulomb
// count; measurement noise only perturbs the recorded I/V/T channels. The
// cycle ends at the voltage cutoff, at empty, or at max_duration_s.
DriveCycleRecord synth_drive_cycle(const SynthConfig& cfg, const std::string& name,
                                   std::uint64_t seed);

void write_cycle_csv(const DriveCycleRecord& record, std::ostream& out);
void write_cycle_csv_file(const DriveCycleRecord& record, const std::string& path);

} // namespace c2l
