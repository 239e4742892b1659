#include "core/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace puc {

using nlohmann::json;

namespace {

constexpr double eps0_f_m = 8.8541878128e-12;
constexpr double picofarad = 1e-12;

[[noreturn]] void config_fail(const std::string& path, const std::string& what) {
    raise(Status::config_error, "config error at '" + path + "': " + what);
}

/// Strict reader over one JSON object: typed accessors mark keys as seen and
/// finish() rejects anything left over, naming the offending key.
class ObjectReader {
public:
    ObjectReader(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
        if (!obj_.is_object()) config_fail(path_, "expected an object");
    }

    bool has(const std::string& key) const { return obj_.contains(key) && !obj_[key].is_null(); }

    double number(const std::string& key) {
        mark(key);
        const json& v = fetch(key);
        if (!v.is_number()) config_fail(path_ + "." + key, "expected a number");
        return v.get<double>();
    }

    std::optional<double> nullable_number(const std::string& key) {
        mark(key);
        const json& v = fetch(key);
        if (v.is_null()) return std::nullopt;
        if (!v.is_number()) config_fail(path_ + "." + key, "expected a number or null");
        return v.get<double>();
    }

    std::uint64_t unsigned_integer(const std::string& key) {
        mark(key);
        const json& v = fetch(key);
        if (!v.is_number_unsigned() && !v.is_number_integer())
            config_fail(path_ + "." + key, "expected a non-negative integer");
        const auto s = v.get<std::int64_t>();
        if (s < 0) config_fail(path_ + "." + key, "expected a non-negative integer");
        return static_cast<std::uint64_t>(s);
    }

    bool boolean(const std::string& key) {
        mark(key);
        const json& v = fetch(key);
        if (!v.is_boolean()) config_fail(path_ + "." + key, "expected a boolean");
        return v.get<bool>();
    }

    std::string string(const std::string& key) {
        mark(key);
        const json& v = fetch(key);
        if (!v.is_string()) config_fail(path_ + "." + key, "expected a string");
        return v.get<std::string>();
    }

    std::vector<double> number_array(const std::string& key) {
        mark(key);
        const json& v = fetch(key);
        if (!v.is_array()) config_fail(path_ + "." + key, "expected an array of numbers");
        std::vector<double> out;
        for (const auto& e : v) {
            if (!e.is_number()) config_fail(path_ + "." + key, "expected an array of numbers");
            out.push_back(e.get<double>());
        }
        return out;
    }

    const json& raw(const std::string& key) {
        mark(key);
        return fetch(key);
    }

    ObjectReader section(const std::string& key) {
        mark(key);
        return ObjectReader(fetch(key), path_ + "." + key);
    }

    void finish() const {
        for (auto it = obj_.begin(); it != obj_.end(); ++it)
            if (!seen_.count(it.key()))
                config_fail(path_ + "." + it.key(), "unknown key");
    }

private:
    const json& fetch(const std::string& key) const {
        if (!obj_.contains(key)) config_fail(path_ + "." + key, "missing key");
        return obj_[key];
    }
    void mark(const std::string& key) { seen_.insert(key); }

    const json& obj_;
    std::string path_;
    std::set<std::string> seen_;
};

/// Objects merge recursively; scalars, arrays and nulls overwrite.
void deep_merge(json& base, const json& overlay) {
    if (!overlay.is_object() || !base.is_object()) {
        base = overlay;
        return;
    }
    for (auto it = overlay.begin(); it != overlay.end(); ++it) {
        if (base.contains(it.key()))
            deep_merge(base[it.key()], it.value());
        else
            base[it.key()] = it.value();
    }
}

json medium_preset_values(const std::string& name, const std::string& path) {
    const Medium m = (name == "water") ? water_medium()
                     : (name == "tissue") ? tissue_medium()
                                          : Medium{};
    if (name != "water" && name != "tissue")
        config_fail(path, "unknown medium preset '" + name + "' (water|tissue|custom)");
    return json{{"preset", "custom"},
                {"sound_speed_m_s", m.sound_speed_m_s},
                {"density_kg_m3", m.density_kg_m3},
                {"attenuation_db_cm", m.attenuation_db_cm},
                {"attenuation_ref_hz", m.attenuation_ref_hz},
                {"attenuation_exponent", m.attenuation_exponent}};
}

AcousticLayer read_layer(ObjectReader& r, double area_m2, bool with_thickness) {
    AcousticLayer layer;
    layer.thickness_m = with_thickness ? r.number("thickness_m") : 1.0;
    layer.density_kg_m3 = r.number("density_kg_m3");
    layer.sound_speed_m_s = r.number("sound_speed_m_s");
    layer.attenuation_np_m = r.number("attenuation_np_m");
    layer.attenuation_ref_hz = r.number("attenuation_ref_hz");
    layer.attenuation_exponent = r.number("attenuation_exponent");
    layer.area_m2 = area_m2;
    return layer;
}

} // namespace

json default_config_document() {
    json doc;
    doc["circuit"] = {
        {"mode", "fit"},
        {"anchors",
         {{"f_s_hz", 2.02e6},
          {"f_a0_hz", 2.30e6},
          {"slope0_hz_per_pf", 236.0},
          {"shift_span_pf", 120.0},
          {"shift_total_hz", 18560.0},
          {"slope_end_hz_per_pf", 62.0},
          {"quality_factor", 30.0},
          {"use_series_parasitic", true}}},
        {"explicit", nullptr},
    };
    doc["stack"] = {
        {"piezo",
         {{"thickness_m", 945.7e-6},
          {"density_kg_m3", 7600.0},
          {"sound_speed_m_s", 4350.0},
          {"attenuation_np_m", 32.5},
          {"attenuation_ref_hz", 2.25e6},
          {"attenuation_exponent", 1.0},
          {"area_m2", 35.0e-6},
          {"kt", 0.48},
          {"eps_r_clamped", 3000.0}}},
        {"backing",
         {{"thickness_m", 0.2e-3},
          {"density_kg_m3", 1.2},
          {"sound_speed_m_s", 343.0},
          {"attenuation_np_m", 10.0},
          {"attenuation_ref_hz", 2.0e6},
          {"attenuation_exponent", 1.0}}},
        {"front",
         {{"density_kg_m3", 1000.0},
          {"sound_speed_m_s", 1480.0},
          {"attenuation_np_m", 0.023},
          {"attenuation_ref_hz", 2.0e6},
          {"attenuation_exponent", 1.0}}},
    };
    doc["load"] = {{"c_load_pf", 0.0}, {"r_load_ohm", nullptr}, {"c_series_pf", "fit"}};
    doc["medium"] = medium_preset_values("water", "medium");
    doc["link"] = {{"distance_m", 0.05},
                   {"center_hz", 2.25e6},
                   {"fractional_bandwidth", 0.6},
                   {"amplitude_scale", 1.0},
                   {"target", "antenna"},
                   {"flat_gamma", 0.9},
                   {"trace_tail_s", 24.0e-6},
                   {"pulse_repetition_interval_s", 200.0e-6},
                   {"echo_frequency_hz", 2.25e6}};
    doc["dsp"] = {{"sample_rate_hz", 50.0e6},
                  {"filter_order", 4},
                  {"cutoff_hz", 200.0e3},
                  {"gate_guard_fraction", 0.2},
                  {"tof_threshold_mads", 5.0}};
    doc["sweep"] = {{"f_start_hz", 2.20e6},
                    {"f_stop_hz", 2.35e6},
                    {"step_hz", 500.0},
                    {"burst_duration_s", 12.0e-6},
                    {"excitation_amplitude_v", 1.0},
                    {"smoothing_sigma_bins", 2.0},
                    {"mode", "sequential"},
                    {"chirp_duration_s", 400.0e-6}};
    doc["sensor"] = {{"base_capacitance_pf", 20.0},
                     {"sensitivity_pf_per_kpa", 5.83},
                     {"knee_kpa", 20.0},
                     {"saturation_slope_factor", 0.2}};
    doc["noise"] = {{"snr_db", nullptr}, {"seed", 1}};
    doc["stream"] = {{"tick_rate_hz", 1.0}, {"duration_s", 0.0}};
    doc["impedance"] = {{"loads_pf", json::array({0.0, 30.0, 60.0, 90.0, 120.0})},
                        {"f_start_hz", 2.0e6},
                        {"f_stop_hz", 2.5e6},
                        {"n_points", 2001}};
    doc["calibration"] = {{"loads_pf", json::array({0.0, 30.0, 60.0, 90.0, 120.0})},
                          {"pressures_kpa", json::array({0.0, 5.0, 10.0, 15.0, 20.0})},
                          {"reps", 1},
                          {"order", 2}};
    doc["field"] = {{"aperture_x_m", 5.0e-3},
                    {"aperture_y_m", 7.0e-3},
                    {"depth_m", 0.03},
                    {"frequency_hz", 2.02e6},
                    {"half_extent_m", 0.012},
                    {"grid_points", 25},
                    {"element_fraction", 0.125}};
    doc["output"] = {{"float_digits", 9}};
    return doc;
}

ScenarioConfig parse_config(const json& user_document) {
    if (!user_document.is_object())
        raise(Status::config_error, "config error at '$': expected a JSON object");

    // Expand a medium preset before merging so defaults don't leak through.
    json user = user_document;
    if (user.contains("medium") && user["medium"].is_object() &&
        user["medium"].contains("preset")) {
        const json& med = user["medium"];
        const std::string preset = med["preset"].is_string() ? med["preset"].get<std::string>()
                                                             : std::string();
        if (preset != "custom") {
            if (med.size() != 1)
                config_fail("medium", "a named preset must be the only medium key");
            user["medium"] = medium_preset_values(preset, "medium.preset");
        }
    }

    // Seed must come with the noise request itself, not just the defaults.
    if (user.contains("noise") && user["noise"].is_object()) {
        const json& noise = user["noise"];
        if (noise.contains("snr_db") && !noise["snr_db"].is_null() && !noise.contains("seed"))
            config_fail("noise.seed", "seed is mandatory when noise is enabled");
    }

    json doc = default_config_document();
    deep_merge(doc, user);

    ScenarioConfig cfg;

    ObjectReader root(doc, "$");

    // circuit
    {
        ObjectReader circuit = root.section("circuit");
        const std::string mode = circuit.string("mode");
        ObjectReader anchors = circuit.section("anchors");
        cfg.anchors.f_s_hz = anchors.number("f_s_hz");
        cfg.anchors.f_a0_hz = anchors.number("f_a0_hz");
        cfg.anchors.slope0_hz_per_f = anchors.number("slope0_hz_per_pf") / picofarad;
        cfg.anchors.shift_span_f = anchors.number("shift_span_pf") * picofarad;
        cfg.anchors.shift_total_hz = anchors.number("shift_total_hz");
        cfg.anchors.slope_end_hz_per_f = anchors.number("slope_end_hz_per_pf") / picofarad;
        cfg.anchors.quality_factor = anchors.number("quality_factor");
        cfg.anchors.use_series_parasitic = anchors.boolean("use_series_parasitic");
        anchors.finish();

        std::optional<double> fitted_c_series;
        if (mode == "fit") {
            circuit.raw("explicit"); // allowed but unused in fit mode
            const BvdFit fit = fit_bvd_from_anchors(cfg.anchors);
            cfg.bvd = fit.params;
            fitted_c_series = fit.load.c_series_f;
        } else if (mode == "explicit") {
            const json& exp_j = circuit.raw("explicit");
            if (exp_j.is_null()) config_fail("circuit.explicit", "required when mode=explicit");
            ObjectReader exp(exp_j, "circuit.explicit");
            cfg.bvd.c0_f = exp.number("c0_f");
            cfg.bvd.r1_ohm = exp.number("r1_ohm");
            cfg.bvd.l1_h = exp.number("l1_h");
            cfg.bvd.c1_f = exp.number("c1_f");
            exp.finish();
            cfg.bvd.validate();
        } else {
            config_fail("circuit.mode", "expected 'fit' or 'explicit'");
        }
        circuit.finish();

        // load (needs the fit outcome for c_series = "fit")
        ObjectReader load = root.section("load");
        cfg.load.c_load_f = load.number("c_load_pf") * picofarad;
        cfg.load.r_load_ohm = load.nullable_number("r_load_ohm");
        const json& cs = load.raw("c_series_pf");
        if (cs.is_null()) {
            cfg.load.c_series_f = std::nullopt;
        } else if (cs.is_string()) {
            if (cs.get<std::string>() != "fit")
                config_fail("load.c_series_pf", "expected a number, null, or 'fit'");
            if (!fitted_c_series)
                config_fail("load.c_series_pf",
                            "'fit' needs circuit.mode=fit with use_series_parasitic");
            cfg.load.c_series_f = fitted_c_series;
        } else if (cs.is_number()) {
            cfg.load.c_series_f = cs.get<double>() * picofarad;
        } else {
            config_fail("load.c_series_pf", "expected a number, null, or 'fit'");
        }
        load.finish();
        cfg.load.validate();
        doc["load"]["c_series_pf"] =
            cfg.load.c_series_f ? json(*cfg.load.c_series_f / picofarad) : json(nullptr);
    }

    // stack
    {
        ObjectReader stack = root.section("stack");
        ObjectReader piezo = stack.section("piezo");
        const double area = piezo.number("area_m2");
        cfg.stack.piezo = read_layer(piezo, area, true);
        cfg.stack.kt = piezo.number("kt");
        cfg.stack.eps_clamped_f_m = piezo.number("eps_r_clamped") * eps0_f_m;
        piezo.finish();
        ObjectReader backing = stack.section("backing");
        cfg.stack.backing = read_layer(backing, area, true);
        backing.finish();
        ObjectReader front = stack.section("front");
        cfg.stack.front = read_layer(front, area, false);
        front.finish();
        stack.finish();
        cfg.stack.validate();
    }

    // medium
    {
        ObjectReader medium = root.section("medium");
        const std::string preset = medium.string("preset");
        if (preset != "custom") config_fail("medium.preset", "internal: preset not resolved");
        cfg.medium.sound_speed_m_s = medium.number("sound_speed_m_s");
        cfg.medium.density_kg_m3 = medium.number("density_kg_m3");
        cfg.medium.attenuation_db_cm = medium.number("attenuation_db_cm");
        cfg.medium.attenuation_ref_hz = medium.number("attenuation_ref_hz");
        cfg.medium.attenuation_exponent = medium.number("attenuation_exponent");
        medium.finish();
        cfg.medium.validate();
    }

    // link + noise -> scenario
    {
        ObjectReader link = root.section("link");
        cfg.scenario.stack = cfg.stack;
        cfg.scenario.load = cfg.load;
        cfg.scenario.medium = cfg.medium;
        cfg.scenario.distance_m = link.number("distance_m");
        cfg.scenario.band.center_hz = link.number("center_hz");
        cfg.scenario.band.fractional_bandwidth = link.number("fractional_bandwidth");
        cfg.scenario.amplitude_scale = link.number("amplitude_scale");
        const std::string target = link.string("target");
        if (target == "antenna")
            cfg.scenario.target = TargetKind::antenna;
        else if (target == "flat")
            cfg.scenario.target = TargetKind::flat_reflector;
        else
            config_fail("link.target", "expected 'antenna' or 'flat'");
        cfg.scenario.flat_gamma = link.number("flat_gamma");
        cfg.scenario.trace_tail_s = link.number("trace_tail_s");
        cfg.pulse_repetition_interval_s = link.number("pulse_repetition_interval_s");
        cfg.echo_frequency_hz = link.number("echo_frequency_hz");
        link.finish();

        ObjectReader noise = root.section("noise");
        cfg.scenario.noise.snr_db = noise.nullable_number("snr_db");
        cfg.scenario.noise.seed = noise.unsigned_integer("seed");
        noise.finish();
        cfg.scenario.validate();
    }

    // dsp
    {
        ObjectReader dsp = root.section("dsp");
        cfg.dsp.sample_rate_hz = dsp.number("sample_rate_hz");
        cfg.dsp.filter_order = static_cast<int>(dsp.number("filter_order"));
        cfg.dsp.cutoff_hz = dsp.number("cutoff_hz");
        cfg.dsp.gate_guard_fraction = dsp.number("gate_guard_fraction");
        cfg.dsp.tof_threshold_mads = dsp.number("tof_threshold_mads");
        dsp.finish();
        cfg.dsp.validate();
    }

    // sweep
    {
        ObjectReader sweep = root.section("sweep");
        cfg.sweep.grid.f_start_hz = sweep.number("f_start_hz");
        cfg.sweep.grid.f_stop_hz = sweep.number("f_stop_hz");
        cfg.sweep.grid.step_hz = sweep.number("step_hz");
        cfg.sweep.burst_duration_s = sweep.number("burst_duration_s");
        cfg.sweep.excitation_amplitude_v = sweep.number("excitation_amplitude_v");
        cfg.sweep.smoothing_sigma_bins = sweep.number("smoothing_sigma_bins");
        const std::string mode = sweep.string("mode");
        if (mode == "sequential")
            cfg.sweep.use_chirp = false;
        else if (mode == "chirp")
            cfg.sweep.use_chirp = true;
        else
            config_fail("sweep.mode", "expected 'sequential' or 'chirp'");
        cfg.sweep.chirp_duration_s = sweep.number("chirp_duration_s");
        sweep.finish();
        cfg.sweep.validate();
    }

    // sensor
    {
        ObjectReader sensor = root.section("sensor");
        cfg.sensor.base_capacitance_f = sensor.number("base_capacitance_pf") * picofarad;
        cfg.sensor.sensitivity_f_per_kpa = sensor.number("sensitivity_pf_per_kpa") * picofarad;
        cfg.sensor.knee_kpa = sensor.number("knee_kpa");
        cfg.sensor.saturation_slope_factor = sensor.number("saturation_slope_factor");
        sensor.finish();
        cfg.sensor.validate();
    }

    // stream
    {
        ObjectReader stream = root.section("stream");
        cfg.stream.tick_rate_hz = stream.number("tick_rate_hz");
        cfg.stream.duration_s = stream.number("duration_s");
        stream.finish();
    }

    // impedance request
    {
        ObjectReader imp = root.section("impedance");
        cfg.impedance.loads_f.clear();
        for (double pf : imp.number_array("loads_pf"))
            cfg.impedance.loads_f.push_back(pf * picofarad);
        cfg.impedance.f_start_hz = imp.number("f_start_hz");
        cfg.impedance.f_stop_hz = imp.number("f_stop_hz");
        cfg.impedance.n_points = static_cast<std::size_t>(imp.number("n_points"));
        imp.finish();
        if (!(cfg.impedance.f_start_hz > 0.0) ||
            !(cfg.impedance.f_stop_hz > cfg.impedance.f_start_hz) || cfg.impedance.n_points < 16)
            config_fail("impedance", "need 0 < f_start < f_stop and n_points >= 16");
    }

    // calibration request
    {
        ObjectReader cal = root.section("calibration");
        cfg.calibration.loads_f.clear();
        for (double pf : cal.number_array("loads_pf"))
            cfg.calibration.loads_f.push_back(pf * picofarad);
        cfg.calibration.pressures_kpa = cal.number_array("pressures_kpa");
        cfg.calibration.reps = static_cast<std::size_t>(cal.number("reps"));
        cfg.calibration.order = static_cast<int>(cal.number("order"));
        cal.finish();
        if (cfg.calibration.reps < 1) config_fail("calibration.reps", "must be >= 1");
    }

    // field request
    {
        ObjectReader field = root.section("field");
        cfg.field.aperture_x_m = field.number("aperture_x_m");
        cfg.field.aperture_y_m = field.number("aperture_y_m");
        cfg.field.depth_m = field.number("depth_m");
        cfg.field.frequency_hz = field.number("frequency_hz");
        cfg.field.half_extent_m = field.number("half_extent_m");
        cfg.field.grid_points = static_cast<std::size_t>(field.number("grid_points"));
        cfg.field.element_fraction = field.number("element_fraction");
        field.finish();
    }

    // output
    {
        ObjectReader output = root.section("output");
        cfg.float_digits = static_cast<int>(output.number("float_digits"));
        output.finish();
        if (cfg.float_digits < 3 || cfg.float_digits > 17)
            config_fail("output.float_digits", "must lie in [3, 17]");
    }

    root.finish();

    cfg.document = doc;
    cfg.hash = fnv1a(doc.dump());
    return cfg;
}

ScenarioConfig parse_config_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        raise(Status::config_error, std::string("config error: invalid JSON: ") + e.what());
    }
    return parse_config(j);
}

ScenarioConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) raise(Status::io_error, "cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

ScenarioConfig default_config() { return parse_config(json::object()); }

json calibration_to_json(const CalibrationCurve& curve) {
    return json{{"kind", curve.kind == CalibrationKind::freq_to_capacitance ? "freq_to_capacitance"
                                                                            : "freq_to_pressure"},
                {"order", curve.order},
                {"coeffs", curve.coeffs},
                {"domain", json::array({curve.domain_lo_hz, curve.domain_hi_hz})},
                {"residual_rms", curve.residual_rms}};
}

CalibrationCurve calibration_from_json(const json& j) {
    ObjectReader r(j, "calibration_curve");
    CalibrationCurve curve;
    const std::string kind = r.string("kind");
    if (kind == "freq_to_capacitance")
        curve.kind = CalibrationKind::freq_to_capacitance;
    else if (kind == "freq_to_pressure")
        curve.kind = CalibrationKind::freq_to_pressure;
    else
        config_fail("calibration_curve.kind", "unknown kind");
    curve.order = static_cast<int>(r.number("order"));
    curve.coeffs = r.number_array("coeffs");
    const auto domain = r.number_array("domain");
    if (domain.size() != 2 || !(domain[1] > domain[0]))
        config_fail("calibration_curve.domain", "expected [lo, hi] with hi > lo");
    curve.domain_lo_hz = domain[0];
    curve.domain_hi_hz = domain[1];
    curve.residual_rms = r.number("residual_rms");
    r.finish();
    if (curve.coeffs.size() != static_cast<std::size_t>(curve.order) + 1)
        config_fail("calibration_curve.coeffs", "length must be order+1");
    return curve;
}

} // namespace puc
