#ifndef MSTS_CLI_HPP
#define MSTS_CLI_HPP

#include <optional>
#include <string>
#include <vector>

#include "msts/extract.hpp"
#include "msts/fit.hpp"
#include "msts/calendar.hpp"
#include "msts/model.hpp"

// Batch front end: declarative configuration, CSV and bundle files, and the
// fit / diagnose / extract / cast / filters / simulate workflows.

namespace msts::cli {

struct CommandOptions {
  std::string config_path;
  std::string bundle_path;
  std::string out_dir = ".";
  std::string method;           // fit: "mle" or "mom" (default from config)
  std::optional<int> window;
  std::optional<int> grid;
  std::optional<int> horizon;
  std::optional<int> span;
  std::optional<long> seed;
  bool want_frf = false;
  bool want_wk_coeffs = false;
  bool quiet = false;
};

// Data plus the declared model, as assembled from a configuration file.
struct Session {
  TimeSeriesSample data;
  ModelSpec mdl;
  Constraint constraint;
  std::string transform;  // "none" or "log"
  // Optional calendar anchor for ISO-dated output.
  std::optional<CalendarDate> start_date;
};

// Parse the configuration, load and prepare the data (transform, subset,
// range, aggregation), and declare the model.
Session load_session(const std::string& config_path);

// CSV ingestion: header row of epithets, one row per time, NA token for
// missing values.
Eigen::MatrixXd read_data_csv(const std::string& path,
                              const std::string& na_token,
                              std::vector<std::string>* names);
void write_data_csv(const std::string& path, const Session& s,
                    const Eigen::MatrixXd& values, int lead_offset = 0);

int cmd_fit(const CommandOptions& opt);
int cmd_diagnose(const CommandOptions& opt);
int cmd_extract(const CommandOptions& opt);
int cmd_cast(const CommandOptions& opt);
int cmd_filters(const CommandOptions& opt);
int cmd_simulate(const CommandOptions& opt);

}  // namespace msts::cli

#endif  // MSTS_CLI_HPP
