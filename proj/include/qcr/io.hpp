#pragma once
// CSV and JSON exports. Numbers are written in shortest round-trip form so
// identical runs give byte-identical files.

#include <filesystem>
#include <string>

#include <json.hpp>

#include "qcr/experiment.hpp"

namespace qcr {

using Json = nlohmann::ordered_json;

std::string format_double(double value);

// Throws std::runtime_error when the file cannot be written.
void write_text(const std::filesystem::path& path, const std::string& text);
void write_json(const std::filesystem::path& path, const Json& json);

// t, p_g, p_e, p_f, p_h, P_exc, dP_exc
std::string trajectory_csv(const TrajectoryRun& run);
Json crossings_json(const TrajectoryRun& run);

Json spectrum_json(const LiouvillianSpectrum& spectrum, const Ladder& ladder);

// omega_ef, omega_f0g1, pexc_ss, lambda_1..lambda_10, status
std::string sweep_csv(const SweepResult& result);

// I, Q[, label]
std::string shots_csv(const ShotSet& shots);
ShotSet read_shots_csv(const std::filesystem::path& path);

// t, value[, sigma]
std::string trace_csv(const SignalTrace& trace);
SignalTrace read_trace_csv(const std::filesystem::path& path);

Json mixture_to_json(const MixtureModel& model);
MixtureModel mixture_from_json(const Json& json);

Json fit_to_json(const FitResult& fit);
Json mixture_fit_json(const MixtureFit& fit);

// time, true and estimated p_g..p_h, P_exc, inside fraction, status
std::string readout_csv(const ReadoutRun& run);

}  // namespace qcr
