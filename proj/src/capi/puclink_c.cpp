#include "puclink.h"

#include <cmath>
#include <cstring>
#include <string>

#include "core/config.hpp"
#include "core/table.hpp"

using nlohmann::json;

struct puc_scenario {
    puc::ScenarioConfig cfg;
};

struct puc_table {
    puc::Table table;
};

namespace {

thread_local std::string g_last_error;

puc_status map_status(puc::Status s) {
    switch (s) {
        case puc::Status::ok: return PUC_OK;
        case puc::Status::invalid_argument: return PUC_ERR_INVALID_ARGUMENT;
        case puc::Status::domain_error: return PUC_ERR_DOMAIN;
        case puc::Status::boundary_error: return PUC_ERR_BOUNDARY;
        case puc::Status::fit_error: return PUC_ERR_FIT;
        case puc::Status::no_echo: return PUC_ERR_NO_ECHO;
        case puc::Status::config_error: return PUC_ERR_CONFIG;
        case puc::Status::io_error: return PUC_ERR_IO;
        case puc::Status::internal_error: return PUC_ERR_INTERNAL;
    }
    return PUC_ERR_INTERNAL;
}

template <typename Fn>
puc_status guarded(Fn&& fn) {
    try {
        fn();
        return PUC_OK;
    } catch (const puc::Error& e) {
        g_last_error = e.what();
        return map_status(e.status());
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return PUC_ERR_INTERNAL;
    } catch (...) {
        g_last_error = "unknown failure";
        return PUC_ERR_INTERNAL;
    }
}

puc_status require(bool ok, const char* what) {
    if (ok) return PUC_OK;
    g_last_error = what;
    return PUC_ERR_INVALID_ARGUMENT;
}

char* dup_string(const std::string& s) {
    char* out = new char[s.size() + 1];
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

/// Applies a mutation to the resolved document and re-parses, keeping every
/// derived object and the config hash coherent.
template <typename Fn>
puc_status mutate_scenario(puc_scenario* scenario, Fn&& mutate) {
    if (!scenario) return require(false, "null scenario handle");
    return guarded([&] {
        json doc = scenario->cfg.document;
        mutate(doc);
        scenario->cfg = puc::parse_config(doc);
    });
}

puc::Table spectrum_to_table(const puc::ImpedanceSpectrum& spectrum) {
    puc::Table t({"frequency_hz", "z_real_ohm", "z_imag_ohm", "z_abs_ohm"});
    for (std::size_t i = 0; i < spectrum.freqs_hz.size(); ++i) {
        const puc::cplx z = spectrum.values_ohm[i];
        t.add_row({spectrum.freqs_hz[i], z.real(), z.imag(), std::abs(z)});
    }
    return t;
}

json sweep_summary(const puc::SweepSpectrum& raw, const puc::ValleyResult& valley) {
    return json{{"f_valley_hz", valley.f_hz},
                {"valley_depth_db", valley.depth_db},
                {"valley_ambiguous", valley.ambiguous},
                {"tof_s", raw.meta.tof_s},
                {"distance_m", raw.meta.distance_m},
                {"amplitude_gain", raw.meta.amplitude_gain},
                {"pulse_echo_count", raw.meta.pulse_echo_count}};
}

puc::SweepSpectrum dispatch_sweep(const puc::ScenarioConfig& cfg, std::uint64_t rep) {
    return cfg.sweep.use_chirp ? puc::chirp_sweep(cfg.scenario, cfg.dsp, cfg.sweep, rep)
                               : puc::run_sweep(cfg.scenario, cfg.dsp, cfg.sweep, rep);
}

json parse_json_or_raise(const char* text, const char* what) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        puc::raise(puc::Status::config_error, std::string(what) + ": " + e.what());
    }
}

} // namespace

extern "C" {

const char* puc_version(void) { return "0.1.0"; }

const char* puc_last_error(void) { return g_last_error.c_str(); }

puc_status puc_scenario_create(const char* json_text, puc_scenario** out) {
    if (puc_status s = require(json_text && out, "null argument")) return s;
    return guarded([&] { *out = new puc_scenario{puc::parse_config_text(json_text)}; });
}

puc_status puc_scenario_create_from_file(const char* path, puc_scenario** out) {
    if (puc_status s = require(path && out, "null argument")) return s;
    return guarded([&] { *out = new puc_scenario{puc::parse_config_file(path)}; });
}

void puc_scenario_destroy(puc_scenario* scenario) { delete scenario; }

puc_status puc_scenario_dump(const puc_scenario* scenario, char** out_json) {
    if (puc_status s = require(scenario && out_json, "null argument")) return s;
    return guarded([&] { *out_json = dup_string(scenario->cfg.dump()); });
}

puc_status puc_scenario_hash(const puc_scenario* scenario, uint64_t* out_hash) {
    if (puc_status s = require(scenario && out_hash, "null argument")) return s;
    *out_hash = scenario->cfg.hash;
    return PUC_OK;
}

puc_status puc_scenario_set_seed(puc_scenario* scenario, uint64_t seed) {
    return mutate_scenario(scenario, [&](json& doc) { doc["noise"]["seed"] = seed; });
}

puc_status puc_scenario_set_load_capacitance(puc_scenario* scenario, double c_load_farad) {
    return mutate_scenario(scenario,
                           [&](json& doc) { doc["load"]["c_load_pf"] = c_load_farad / 1e-12; });
}

puc_status puc_scenario_set_parallel_resistance(puc_scenario* scenario, double r_ohm_or_0) {
    return mutate_scenario(scenario, [&](json& doc) {
        doc["load"]["r_load_ohm"] = r_ohm_or_0 > 0.0 ? json(r_ohm_or_0) : json(nullptr);
    });
}

puc_status puc_scenario_set_distance(puc_scenario* scenario, double distance_m) {
    return mutate_scenario(scenario, [&](json& doc) { doc["link"]["distance_m"] = distance_m; });
}

puc_status puc_scenario_set_burst_duration(puc_scenario* scenario, double duration_s) {
    return mutate_scenario(scenario,
                           [&](json& doc) { doc["sweep"]["burst_duration_s"] = duration_s; });
}

puc_status puc_scenario_set_target_flat(puc_scenario* scenario, int flat, double gamma) {
    return mutate_scenario(scenario, [&](json& doc) {
        doc["link"]["target"] = flat ? "flat" : "antenna";
        doc["link"]["flat_gamma"] = gamma;
    });
}

puc_status puc_scenario_set_noise_snr(puc_scenario* scenario, double snr_db_or_nan) {
    return mutate_scenario(scenario, [&](json& doc) {
        doc["noise"]["snr_db"] = std::isnan(snr_db_or_nan) ? json(nullptr) : json(snr_db_or_nan);
    });
}

puc_status puc_scenario_set_pressure(puc_scenario* scenario, double pressure_kpa) {
    if (!scenario) return require(false, "null scenario handle");
    return guarded([&] {
        const double c = puc::sensor_capacitance(pressure_kpa, scenario->cfg.sensor);
        json doc = scenario->cfg.document;
        doc["load"]["c_load_pf"] = c / 1e-12;
        scenario->cfg = puc::parse_config(doc);
    });
}

void puc_table_destroy(puc_table* table) { delete table; }

puc_status puc_table_rows(const puc_table* table, size_t* out_rows) {
    if (puc_status s = require(table && out_rows, "null argument")) return s;
    *out_rows = table->table.rows();
    return PUC_OK;
}

puc_status puc_table_cols(const puc_table* table, size_t* out_cols) {
    if (puc_status s = require(table && out_cols, "null argument")) return s;
    *out_cols = table->table.cols();
    return PUC_OK;
}

puc_status puc_table_column_name(const puc_table* table, size_t col, const char** out_name) {
    if (puc_status s = require(table && out_name, "null argument")) return s;
    if (col >= table->table.cols()) return require(false, "column index out of range");
    *out_name = table->table.column_name(col).c_str();
    return PUC_OK;
}

puc_status puc_table_value(const puc_table* table, size_t row, size_t col, double* out_value) {
    if (puc_status s = require(table && out_value, "null argument")) return s;
    return guarded([&] { *out_value = table->table.at(row, col); });
}

void puc_string_free(char* text) { delete[] text; }

puc_status puc_fitted_circuit_json(const puc_scenario* scenario, char** out_json) {
    if (puc_status s = require(scenario && out_json, "null argument")) return s;
    return guarded([&] {
        const auto& cfg = scenario->cfg;
        json j{{"c0_f", cfg.bvd.c0_f},
               {"r1_ohm", cfg.bvd.r1_ohm},
               {"l1_h", cfg.bvd.l1_h},
               {"c1_f", cfg.bvd.c1_f},
               {"f_s_hz", cfg.bvd.series_resonance_hz()},
               {"f_a0_hz", puc::bvd_antiresonance(cfg.bvd, puc::LoadNetwork{})}};
        j["c_series_f"] = cfg.load.c_series_f ? json(*cfg.load.c_series_f) : json(nullptr);
        if (cfg.document["circuit"]["mode"] == "fit") {
            const puc::BvdFit fit = puc::fit_bvd_from_anchors(cfg.anchors);
            j["anchor_residuals"] = {{"slope0_rel", fit.slope0_rel_error},
                                     {"shift_rel", fit.shift_rel_error},
                                     {"slope_end_rel", fit.slope_end_rel_error}};
        }
        *out_json = dup_string(j.dump(2));
    });
}

puc_status puc_bvd_antiresonance(const puc_scenario* scenario, double c_load_farad,
                                 double* out_f_a_hz) {
    if (puc_status s = require(scenario && out_f_a_hz, "null argument")) return s;
    return guarded([&] {
        puc::LoadNetwork load = scenario->cfg.load;
        load.c_load_f = c_load_farad;
        load.validate();
        *out_f_a_hz = puc::bvd_antiresonance(scenario->cfg.bvd, load);
    });
}

puc_status puc_impedance_spectrum(const puc_scenario* scenario, const char* model,
                                  double c_load_farad, puc_table** out) {
    if (puc_status s = require(scenario && model && out, "null argument")) return s;
    return guarded([&] {
        const auto& cfg = scenario->cfg;
        puc::LoadNetwork load = cfg.load;
        load.c_load_f = c_load_farad;
        load.validate();
        const std::vector<double> freqs =
            puc::linspace(cfg.impedance.f_start_hz, cfg.impedance.f_stop_hz, cfg.impedance.n_points);
        const std::string kind(model);
        puc::ImpedanceSpectrum spectrum;
        if (kind == "bvd")
            spectrum = puc::bvd_impedance_spectrum(cfg.bvd, load, freqs);
        else if (kind == "leach")
            spectrum = puc::leach_impedance_spectrum(cfg.stack, load, freqs);
        else
            puc::raise(puc::Status::invalid_argument, "model must be 'bvd' or 'leach'");
        *out = new puc_table{spectrum_to_table(spectrum)};
    });
}

puc_status puc_find_antiresonance(const puc_table* spectrum, double* out_f_a_hz) {
    if (puc_status s = require(spectrum && out_f_a_hz, "null argument")) return s;
    return guarded([&] {
        const puc::Table& t = spectrum->table;
        if (t.cols() < 3) puc::raise(puc::Status::invalid_argument, "not an impedance table");
        puc::ImpedanceSpectrum sp;
        for (std::size_t r = 0; r < t.rows(); ++r) {
            sp.freqs_hz.push_back(t.at(r, 0));
            sp.values_ohm.emplace_back(t.at(r, 1), t.at(r, 2));
        }
        *out_f_a_hz = puc::find_antiresonance_numeric(sp);
    });
}

puc_status puc_reflection_spectrum(const puc_scenario* scenario, double c_load_farad,
                                   double f_start_hz, double f_stop_hz, size_t n_points,
                                   puc_table** out) {
    if (puc_status s = require(scenario && out, "null argument")) return s;
    return guarded([&] {
        puc::LoadNetwork load = scenario->cfg.load;
        load.c_load_f = c_load_farad;
        load.validate();
        const std::vector<double> freqs = puc::linspace(f_start_hz, f_stop_hz, n_points);
        const puc::ReflectionSpectrum rs =
            puc::reflection_spectrum(scenario->cfg.stack, load, freqs);
        puc::Table t({"frequency_hz", "gamma_real", "gamma_imag", "gamma_abs"});
        for (std::size_t i = 0; i < freqs.size(); ++i)
            t.add_row({freqs[i], rs.gamma[i].real(), rs.gamma[i].imag(), std::abs(rs.gamma[i])});
        *out = new puc_table{std::move(t)};
    });
}

puc_status puc_piston_field(const puc_scenario* scenario, puc_table** out_map,
                            char** out_summary_json) {
    if (puc_status s = require(scenario && out_map && out_summary_json, "null argument")) return s;
    return guarded([&] {
        const auto& cfg = scenario->cfg;
        const puc::PistonField field = puc::piston_field(cfg.field, cfg.medium);

        puc::Table t({"x_m", "y_m", "pressure_norm"});
        const std::size_t n = field.xs_m.size();
        for (std::size_t iy = 0; iy < n; ++iy)
            for (std::size_t ix = 0; ix < n; ++ix)
                t.add_row({field.xs_m[ix], field.ys_m[iy], field.pressure_norm[iy * n + ix]});

        // central row profile along x for the -3 dB beam width
        std::vector<double> profile(n);
        const std::size_t mid = n / 2;
        for (std::size_t ix = 0; ix < n; ++ix) profile[ix] = field.pressure_norm[mid * n + ix];
        const double width = puc::beam_minus3db_width(field.xs_m, profile);

        json summary{{"beam_minus3db_width_m", width},
                     {"width_convention", "intensity -3 dB (amplitude 1/sqrt(2))"},
                     {"frequency_hz", cfg.field.frequency_hz},
                     {"depth_m", cfg.field.depth_m},
                     {"grid_points", cfg.field.grid_points}};
        *out_map = new puc_table{std::move(t)};
        *out_summary_json = dup_string(summary.dump(2));
    });
}

puc_status puc_pulse_echo(const puc_scenario* scenario, double f_hz, puc_table** out_excitation,
                          puc_table** out_echo, puc_table** out_envelope,
                          char** out_summary_json) {
    if (puc_status s = require(scenario && out_excitation && out_echo && out_envelope &&
                                   out_summary_json,
                               "null argument"))
        return s;
    return guarded([&] {
        const auto& cfg = scenario->cfg;
        const puc::EchoTrace excitation =
            puc::make_burst(f_hz, cfg.sweep.burst_duration_s,
                            cfg.sweep.excitation_amplitude_v, cfg.dsp.sample_rate_hz);
        const puc::EchoTrace echo = puc::synthesize_echo(excitation, cfg.scenario);
        const puc::FilterSpec filter =
            puc::design_lowpass(cfg.dsp.filter_order, cfg.dsp.cutoff_hz, cfg.dsp.sample_rate_hz);
        const puc::EnvelopeTrace envelope = puc::demodulate(echo, f_hz, filter);
        const puc::TofResult tof = puc::detect_tof(echo, excitation, cfg.dsp.tof_threshold_mads);

        const double guard = cfg.dsp.gate_guard_fraction * cfg.sweep.burst_duration_s;
        const double gate_lo = tof.tof_s + guard;
        const double gate_hi = tof.tof_s + cfg.sweep.burst_duration_s - guard;
        const double level = puc::gate_average(envelope, gate_lo, gate_hi);

        auto trace_table = [](const puc::EchoTrace& tr) {
            puc::Table t({"time_s", "amplitude_v"});
            for (std::size_t i = 0; i < tr.samples.size(); ++i)
                t.add_row({tr.time_at(i), tr.samples[i]});
            return t;
        };
        puc::Table env_table({"time_s", "magnitude_v"});
        for (std::size_t i = 0; i < envelope.magnitude.size(); ++i)
            env_table.add_row({envelope.time_at(i), envelope.magnitude[i]});

        json summary{{"f_hz", f_hz},
                     {"tof_s", tof.tof_s},
                     {"gate_start_s", gate_lo},
                     {"gate_end_s", gate_hi},
                     {"gate_average_v", level},
                     {"band_support_warning", echo.band_support_warning}};
        *out_excitation = new puc_table{trace_table(excitation)};
        *out_echo = new puc_table{trace_table(echo)};
        *out_envelope = new puc_table{std::move(env_table)};
        *out_summary_json = dup_string(summary.dump(2));
    });
}

puc_status puc_run_sweep(const puc_scenario* scenario, puc_table** out_spectrum,
                         char** out_summary_json) {
    if (puc_status s = require(scenario && out_spectrum && out_summary_json, "null argument"))
        return s;
    return guarded([&] {
        const auto& cfg = scenario->cfg;
        const puc::SweepSpectrum raw = dispatch_sweep(cfg, 0);
        const puc::SweepSpectrum smoothed =
            puc::smooth_spectrum(raw, cfg.sweep.smoothing_sigma_bins);
        const puc::ValleyResult valley = puc::find_valley_detailed(smoothed);

        puc::Table t({"frequency_hz", "amplitude_v", "smoothed"});
        const double gain = raw.meta.amplitude_gain;
        for (std::size_t i = 0; i < raw.freqs_hz.size(); ++i)
            t.add_row({raw.freqs_hz[i], gain * raw.amplitudes[i], 0.0});
        for (std::size_t i = 0; i < smoothed.freqs_hz.size(); ++i)
            t.add_row({smoothed.freqs_hz[i], gain * smoothed.amplitudes[i], 1.0});

        *out_spectrum = new puc_table{std::move(t)};
        *out_summary_json = dup_string(sweep_summary(raw, valley).dump(2));
    });
}

puc_status puc_sweep_valleys(const puc_scenario* scenario, size_t n_reps, puc_table** out) {
    if (puc_status s = require(scenario && out, "null argument")) return s;
    if (puc_status s = require(n_reps > 0, "n_reps must be positive")) return s;
    return guarded([&] {
        const auto& cfg = scenario->cfg;
        puc::Table t({"rep", "f_valley_hz", "valley_depth_db"});
        if (cfg.sweep.use_chirp) {
            for (std::size_t r = 0; r < n_reps; ++r) {
                const puc::SweepSpectrum spectrum =
                    puc::chirp_sweep(cfg.scenario, cfg.dsp, cfg.sweep, r);
                const puc::ValleyResult v = puc::find_valley_detailed(
                    puc::smooth_spectrum(spectrum, cfg.sweep.smoothing_sigma_bins));
                t.add_row({static_cast<double>(r), v.f_hz, v.depth_db});
            }
        } else {
            const puc::SweepEngine engine(cfg.scenario, cfg.dsp, cfg.sweep);
            for (std::size_t r = 0; r < n_reps; ++r) {
                const puc::SweepSpectrum spectrum = engine.run(r);
                const puc::ValleyResult v = puc::find_valley_detailed(
                    puc::smooth_spectrum(spectrum, cfg.sweep.smoothing_sigma_bins));
                t.add_row({static_cast<double>(r), v.f_hz, v.depth_db});
            }
        }
        *out = new puc_table{std::move(t)};
    });
}

puc_status puc_calibrate(const puc_scenario* scenario, const char* kind, puc_table** out_points,
                         char** out_curve_json) {
    if (puc_status s = require(scenario && kind && out_points && out_curve_json, "null argument"))
        return s;
    return guarded([&] {
        const auto& cfg = scenario->cfg;
        const std::string which(kind);
        std::vector<puc::CalibrationPoint> points;
        puc::Table t({"value", "f_valley_hz"});

        auto valley_for_load = [&](double c_load_f) {
            puc::LinkScenario sc = cfg.scenario;
            sc.load.c_load_f = c_load_f;
            const puc::SweepEngine engine(sc, cfg.dsp, cfg.sweep);
            double acc = 0.0;
            for (std::size_t r = 0; r < cfg.calibration.reps; ++r) {
                const puc::SweepSpectrum spectrum = engine.run(r);
                acc += puc::find_valley(
                    puc::smooth_spectrum(spectrum, cfg.sweep.smoothing_sigma_bins));
            }
            return acc / static_cast<double>(cfg.calibration.reps);
        };

        puc::CalibrationKind cal_kind;
        if (which == "capacitance") {
            cal_kind = puc::CalibrationKind::freq_to_capacitance;
            for (double c : cfg.calibration.loads_f) {
                const double f = valley_for_load(c);
                points.push_back({f, c});
                t.add_row({c, f});
            }
        } else if (which == "pressure") {
            cal_kind = puc::CalibrationKind::freq_to_pressure;
            for (double p : cfg.calibration.pressures_kpa) {
                const double c = puc::sensor_capacitance(p, cfg.sensor);
                const double f = valley_for_load(c);
                points.push_back({f, p});
                t.add_row({p, f});
            }
        } else {
            puc::raise(puc::Status::invalid_argument, "kind must be 'capacitance' or 'pressure'");
        }

        const puc::CalibrationCurve curve =
            puc::fit_calibration(points, cfg.calibration.order, cal_kind);
        *out_points = new puc_table{std::move(t)};
        *out_curve_json = dup_string(puc::calibration_to_json(curve).dump(2));
    });
}

puc_status puc_estimate_stream(const puc_scenario* scenario, const double* t_s,
                               const double* pressure_kpa, size_t n,
                               const char* capacitance_cal_json_or_null,
                               const char* pressure_cal_json_or_null, puc_table** out) {
    if (puc_status s = require(scenario && t_s && pressure_kpa && out && n > 0, "null argument"))
        return s;
    return guarded([&] {
        const auto& cfg = scenario->cfg;
        std::vector<puc::PressureSample> trace(n);
        for (size_t i = 0; i < n; ++i) trace[i] = {t_s[i], pressure_kpa[i]};

        std::optional<puc::CalibrationCurve> cap_cal, press_cal;
        if (capacitance_cal_json_or_null)
            cap_cal = puc::calibration_from_json(
                parse_json_or_raise(capacitance_cal_json_or_null, "capacitance calibration"));
        if (pressure_cal_json_or_null)
            press_cal = puc::calibration_from_json(
                parse_json_or_raise(pressure_cal_json_or_null, "pressure calibration"));

        const std::vector<puc::EstimateResult> results = puc::estimate_stream(
            cfg.scenario, cfg.dsp, cfg.sweep, cfg.sensor, trace, cfg.stream,
            cap_cal ? &*cap_cal : nullptr, press_cal ? &*press_cal : nullptr);

        puc::Table t({"t_s", "f_valley_hz", "c_load_pf", "pressure_kpa", "tof_s",
                      "valley_depth_db", "valid", "clipped"});
        for (const auto& r : results)
            t.add_row({r.t_s, r.f_valley_hz, r.c_load_f / 1e-12, r.pressure_kpa, r.tof_s,
                       r.valley_depth_db, r.valid ? 1.0 : 0.0, r.clipped ? 1.0 : 0.0});
        *out = new puc_table{std::move(t)};
    });
}

} // extern "C"
