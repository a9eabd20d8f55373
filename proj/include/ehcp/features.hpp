#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ehcp/tracking.hpp"

namespace ehcp {

enum class CovariateKind { continuous, binary, categorical };
enum class Phase { throw_time, arrival, delta, timing, situational };

struct CovariateDescriptor {
  std::string name;
  CovariateKind kind = CovariateKind::continuous;
  Phase phase = Phase::throw_time;
  bool hypothetically_observable = true;
  /// Categorical levels; the first is the baseline and gets no indicator.
  std::vector<double> levels;
  /// Group of unobservable covariates (1-5) sampled together; 0 when observable.
  int missing_group = 0;
};

class CovariateSchema {
 public:
  CovariateSchema() = default;
  explicit CovariateSchema(std::vector<CovariateDescriptor> covariates);

  /// The 36-covariate pass schema used throughout the pipeline.
  static const CovariateSchema& standard();

  const std::vector<CovariateDescriptor>& covariates() const { return covariates_; }
  std::size_t size() const { return covariates_.size(); }
  std::optional<std::size_t> index_of(const std::string& name) const;
  const CovariateDescriptor& at(const std::string& name) const;
  std::vector<std::string> names() const;

 private:
  std::vector<CovariateDescriptor> covariates_;
};

/// Covariate names, spelled once.
namespace cov {
inline constexpr const char* kRecSpeedThrow = "rec_speed_throw";
inline constexpr const char* kRecSpeedArrival = "rec_speed_arrival";
inline constexpr const char* kRecDirThrow = "rec_dir_throw";
inline constexpr const char* kRecDirArrival = "rec_dir_arrival";
inline constexpr const char* kSeparationThrow = "rec_def_euc_throw";
inline constexpr const char* kSeparationArrival = "rec_def_euc_arrival";
inline constexpr const char* kRecBallThrow = "rec_ball_euc_throw";
inline constexpr const char* kRecBallArrival = "rec_ball_euc_arrival";
inline constexpr const char* kCumDistThrow = "rec_cum_dist_throw";
inline constexpr const char* kCumDistArrival = "rec_cum_dist_arrival";
inline constexpr const char* kDeltaSpeed = "delta_speed";
inline constexpr const char* kDeltaSeparation = "delta_separation";
inline constexpr const char* kDeltaDirection = "delta_direction";
inline constexpr const char* kDeltaCumDist = "delta_cum_dist";
inline constexpr const char* kTimeSnapThrow = "time_snap_to_throw";
inline constexpr const char* kTimeAir = "time_in_air";
inline constexpr const char* kTimeSnapArrival = "time_snap_to_arrival";
inline constexpr const char* kSecondsLeftHalf = "seconds_left_half";
inline constexpr const char* kDown = "down";
inline constexpr const char* kYardsToGo = "yards_to_go";
inline constexpr const char* kOffenseLeading = "offense_leading";
inline constexpr const char* kScoreMargin = "score_margin";
}  // namespace cov

/// Score-margin category codes: 0 points, 1-8 points, 9+ points.
enum class MarginCategory { tied = 0, one_score = 1, multi_score = 2 };
std::string to_string(MarginCategory c);

struct PassFeatureVector {
  PlayKey play;
  EntityId receiver;
  int y = 0;
  std::map<std::string, double> values;

  double at(const std::string& name) const;
};

struct PairwiseDistance {
  double euclidean = 0.0;
  double horizontal = 0.0;  // |delta along the long axis|
  double vertical = 0.0;    // |delta along the short axis|
};

struct Point {
  double x = 0.0;
  double y = 0.0;
};

PairwiseDistance pairwise_distances(Point a, Point b);

/// Raised when a play cannot yield a feature vector for a receiver.
class ExtractionError : public InputError {
 public:
  using InputError::InputError;
};

struct NearestDefender {
  EntityId id;
  double distance = 0.0;
};

NearestDefender nearest_defender(const PlaySequence& play, EntityId receiver, int frame_index);

/// Sum of step distances over `track` frames up to and including `up_to_frame`.
double cumulative_distance(const Track& track, int up_to_frame);
/// Same, plus the distance covered in earlier plays of the game.
double game_cumulative_distance(const PlaySequence& play, EntityId id, int up_to_frame);

double seconds_left_in_half(int quarter, double clock_seconds);
std::map<std::string, double> situational_covariates(const PlayMeta& meta);

/// Wrap an angle difference in degrees to (-180, 180].
double wrap_degrees(double delta);

/// Throw-phase covariates of a pass released at `frame_index`, plus the
/// snap-to-throw time and situational covariates.
std::map<std::string, double> extract_throw_observables(const PlaySequence& play, EntityId receiver,
                                                        int frame_index);

PassFeatureVector extract_pass_features(const PlaySequence& play, EntityId receiver);

/// Feature vectors for the targeted receiver of every play; plays that fail
/// extraction are reported instead of thrown.
struct ExtractionResult {
  std::vector<PassFeatureVector> rows;
  std::vector<Exclusion> excluded;
};
ExtractionResult extract_dataset(const std::vector<PlaySequence>& plays);

// ---------------------------------------------------------------------------
// Design matrices and standardization

struct DesignColumn {
  std::string name;
  std::string source;  // schema covariate
  bool continuous = true;
  std::optional<double> level;  // set for categorical indicators

  friend bool operator==(const DesignColumn&, const DesignColumn&) = default;
};

struct DesignMatrix {
  std::vector<DesignColumn> columns;
  Eigen::MatrixXd values;  // rows x columns
};

/// Expand categorical covariates into baseline-coded indicators.
std::vector<DesignColumn> expand_columns(const CovariateSchema& schema);
DesignMatrix expand_design(const CovariateSchema& schema, const std::vector<PassFeatureVector>& rows);
/// Raw expanded value of one column; throws InputError naming a missing field.
double expanded_value(const DesignColumn& col, const std::map<std::string, double>& values);

struct StandardizedColumn {
  DesignColumn column;
  double mean = 0.0;
  double sd = 1.0;  // population sd of the raw column; 1 for binary columns

  friend bool operator==(const StandardizedColumn&, const StandardizedColumn&) = default;
};

struct StandardizationParams {
  std::vector<StandardizedColumn> columns;
  std::vector<std::string> dropped;  // constant columns removed at fit time

  std::vector<std::string> names() const;
  friend bool operator==(const StandardizationParams&, const StandardizationParams&) = default;
};

/// Continuous columns -> mean 0, sd 0.5; binary columns -> mean 0.
StandardizationParams standardize_fit(const DesignMatrix& raw);
Eigen::VectorXd standardize_apply(const StandardizationParams& params,
                                  const std::map<std::string, double>& values);
DesignMatrix standardize_apply(const StandardizationParams& params, const DesignMatrix& raw);
Eigen::VectorXd standardize_invert(const StandardizationParams& params, const Eigen::VectorXd& z);

void write_design_csv(std::ostream& out, const CovariateSchema& schema,
                      const std::vector<PassFeatureVector>& rows);
std::vector<PassFeatureVector> read_design_csv(std::istream& in, const CovariateSchema& schema);

}  // namespace ehcp
