#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "core/sweep.hpp"

namespace puc {

struct ImpedanceRequest {
    std::vector<double> loads_f; // may be empty = single unloaded spectrum
    double f_start_hz = 2.0e6;
    double f_stop_hz = 2.5e6;
    std::size_t n_points = 2001;
};

struct CalibrationRequest {
    std::vector<double> loads_f;
    std::vector<double> pressures_kpa;
    std::size_t reps = 1;
    int order = 2;
};

/// Fully resolved scenario: the validated canonical document plus every
/// derived object the pipelines consume.
struct ScenarioConfig {
    nlohmann::json document; // canonical resolved form
    std::uint64_t hash = 0;

    BvdAnchors anchors;
    BvdParams bvd;
    LoadNetwork load;       // c_series resolved (fitted value when requested)
    PiezoStack stack;
    Medium medium;
    LinkScenario scenario;  // assembled from stack/load/medium/link/noise
    DspSettings dsp;
    SweepSettings sweep;
    SensorModel sensor;
    StreamSettings stream;
    ImpedanceRequest impedance;
    CalibrationRequest calibration;
    PistonFieldRequest field;
    double echo_frequency_hz = 2.25e6;
    double pulse_repetition_interval_s = 200e-6;
    int float_digits = 9;

    std::string dump() const { return document.dump(2); }
};

/// Built-in defaults (water tank, fitted circuit, 5 cm link).
nlohmann::json default_config_document();

/// Parses and validates a scenario document. Unknown keys are rejected with
/// their full path; missing keys fall back to the defaults. Seed is required
/// as soon as noise is enabled.
ScenarioConfig parse_config(const nlohmann::json& user_document);
ScenarioConfig parse_config_text(const std::string& text);
ScenarioConfig parse_config_file(const std::string& path);
ScenarioConfig default_config();

nlohmann::json calibration_to_json(const CalibrationCurve& curve);
CalibrationCurve calibration_from_json(const nlohmann::json& j);

} // namespace puc
