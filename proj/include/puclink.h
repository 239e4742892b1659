/*
 * puclink - passive ultrasonic communication link simulator, C API.
 *
 * All functions return a puc_status code; PUC_OK is zero. On failure the
 * thread-local message from puc_last_error() describes what went wrong.
 * Objects are opaque handles released with their matching _destroy/_free
 * call. Result tables are column-named numeric matrices.
 */
#ifndef PUCLINK_H
#define PUCLINK_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum puc_status {
    PUC_OK = 0,
    PUC_ERR_INVALID_ARGUMENT = 1,
    PUC_ERR_DOMAIN = 2,
    PUC_ERR_BOUNDARY = 3,
    PUC_ERR_FIT = 4,
    PUC_ERR_NO_ECHO = 5,
    PUC_ERR_CONFIG = 6,
    PUC_ERR_IO = 7,
    PUC_ERR_INTERNAL = 8
} puc_status;

typedef struct puc_scenario puc_scenario;
typedef struct puc_table puc_table;

const char* puc_version(void);

/* Thread-local description of the most recent failure. */
const char* puc_last_error(void);

/* ---- scenario configuration ------------------------------------------- */

/* Parses and validates a scenario JSON document (missing keys take the
 * built-in defaults; unknown keys are rejected). */
puc_status puc_scenario_create(const char* json_text, puc_scenario** out);
puc_status puc_scenario_create_from_file(const char* path, puc_scenario** out);
void puc_scenario_destroy(puc_scenario* scenario);

/* Canonical resolved document; free with puc_string_free. */
puc_status puc_scenario_dump(const puc_scenario* scenario, char** out_json);
puc_status puc_scenario_hash(const puc_scenario* scenario, uint64_t* out_hash);

/* Targeted overrides used by the CLI subcommands. */
puc_status puc_scenario_set_seed(puc_scenario* scenario, uint64_t seed);
puc_status puc_scenario_set_load_capacitance(puc_scenario* scenario, double c_load_farad);
puc_status puc_scenario_set_parallel_resistance(puc_scenario* scenario, double r_ohm_or_0);
puc_status puc_scenario_set_distance(puc_scenario* scenario, double distance_m);
puc_status puc_scenario_set_burst_duration(puc_scenario* scenario, double duration_s);
puc_status puc_scenario_set_target_flat(puc_scenario* scenario, int flat, double gamma);
puc_status puc_scenario_set_noise_snr(puc_scenario* scenario, double snr_db_or_nan);
puc_status puc_scenario_set_pressure(puc_scenario* scenario, double pressure_kpa);

/* ---- result tables ------------------------------------------------------ */

void puc_table_destroy(puc_table* table);
puc_status puc_table_rows(const puc_table* table, size_t* out_rows);
puc_status puc_table_cols(const puc_table* table, size_t* out_cols);
puc_status puc_table_column_name(const puc_table* table, size_t col, const char** out_name);
puc_status puc_table_value(const puc_table* table, size_t row, size_t col, double* out_value);

void puc_string_free(char* text);

/* ---- circuit models ----------------------------------------------------- */

/* Fitted circuit parameters and anchor residuals as JSON. */
puc_status puc_fitted_circuit_json(const puc_scenario* scenario, char** out_json);

/* Closed-form anti-resonance of the fitted circuit at one load. */
puc_status puc_bvd_antiresonance(const puc_scenario* scenario, double c_load_farad,
                                 double* out_f_a_hz);

/* Impedance spectrum columns: frequency_hz, z_real_ohm, z_imag_ohm, z_abs_ohm.
 * model: "bvd" or "leach". */
puc_status puc_impedance_spectrum(const puc_scenario* scenario, const char* model,
                                  double c_load_farad, puc_table** out);

/* Numeric |Z| peak of a spectrum produced by puc_impedance_spectrum. */
puc_status puc_find_antiresonance(const puc_table* spectrum, double* out_f_a_hz);

/* ---- acoustic link ------------------------------------------------------ */

/* Reflection spectrum columns: frequency_hz, gamma_real, gamma_imag, gamma_abs. */
puc_status puc_reflection_spectrum(const puc_scenario* scenario, double c_load_farad,
                                   double f_start_hz, double f_stop_hz, size_t n_points,
                                   puc_table** out);

/* Piston field map (x_m, y_m, pressure_norm) and a JSON summary carrying the
 * -3 dB beam width. */
puc_status puc_piston_field(const puc_scenario* scenario, puc_table** out_map,
                            char** out_summary_json);

/* ---- pulse echo --------------------------------------------------------- */

/* Single pulse-echo at f_hz: excitation/echo traces (time_s, amplitude_v),
 * demodulated envelope (time_s, magnitude_v), JSON summary with the detected
 * time of flight and gate average. */
puc_status puc_pulse_echo(const puc_scenario* scenario, double f_hz, puc_table** out_excitation,
                          puc_table** out_echo, puc_table** out_envelope, char** out_summary_json);

/* ---- sweep estimation --------------------------------------------------- */

/* Frequency sweep (sequential or chirp per the scenario). Table columns:
 * frequency_hz, amplitude_v, smoothed. Raw rows first, smoothed rows after.
 * Summary JSON carries f_valley_hz, valley_depth_db, tof_s, pulse_echo_count. */
puc_status puc_run_sweep(const puc_scenario* scenario, puc_table** out_spectrum,
                         char** out_summary_json);

/* n_reps sweeps with per-rep noise substreams; columns: rep, f_valley_hz,
 * valley_depth_db. */
puc_status puc_sweep_valleys(const puc_scenario* scenario, size_t n_reps, puc_table** out);

/* Calibration curves fitted from sweeps across the configured load /
 * pressure lists. kind: "capacitance" or "pressure". Points table columns:
 * value, f_valley_hz. Curve JSON matches the documented calibration schema. */
puc_status puc_calibrate(const puc_scenario* scenario, const char* kind, puc_table** out_points,
                         char** out_curve_json);

/* Replays a pressure trace (arrays of length n) through the estimation
 * stream. Columns: t_s, f_valley_hz, c_load_pf, pressure_kpa, tof_s,
 * valley_depth_db, valid, clipped. */
puc_status puc_estimate_stream(const puc_scenario* scenario, const double* t_s,
                               const double* pressure_kpa, size_t n,
                               const char* capacitance_cal_json_or_null,
                               const char* pressure_cal_json_or_null, puc_table** out);

#ifdef __cplusplus
}
#endif

#endif /* PUCLINK_H */
