#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace cfb {

/// Uniformly sampled leader/follower pair. Validated on construction and
/// immutable afterwards, so it can be shared freely between workers.
///
/// Net spacing is s = x_leader - x_follower - leader_length and must stay
/// strictly positive on recorded data.
class Trajectory {
public:
  Trajectory(double dt, double t0, std::vector<double> x_leader, std::vector<double> v_leader,
             std::vector<double> x_follower, std::vector<double> v_follower,
             double leader_length);

  double dt() const noexcept { return dt_; }
  double t0() const noexcept { return t0_; }
  double time(std::size_t k) const noexcept { return t0_ + static_cast<double>(k) * dt_; }
  std::size_t size() const noexcept { return x_leader_.size(); }
  double leader_length() const noexcept { return leader_length_; }

  std::span<const double> x_leader() const noexcept { return x_leader_; }
  std::span<const double> v_leader() const noexcept { return v_leader_; }
  std::span<const double> x_follower() const noexcept { return x_follower_; }
  std::span<const double> v_follower() const noexcept { return v_follower_; }

  double spacing(std::size_t k) const noexcept {
    return x_leader_[k] - x_follower_[k] - leader_length_;
  }

  /// Samples [begin, end). Throws SegmentTooShort if fewer than two remain.
  Trajectory slice(std::size_t begin, std::size_t end) const;

  bool operator==(const Trajectory&) const = default;

private:
  double dt_;
  double t0_;
  std::vector<double> x_leader_;
  std::vector<double> v_leader_;
  std::vector<double> x_follower_;
  std::vector<double> v_follower_;
  double leader_length_;
};

/// dv uses the convention dv = v_follower - v_leader (positive while closing in).
/// The acceleration is the forward difference of v_follower; the last sample
/// repeats the previous one so all three series have length N.
struct DerivedSeries {
  std::vector<double> s;
  std::vector<double> dv;
  std::vector<double> a_follower;
};

DerivedSeries derive_kinematics(const Trajectory& traj);

struct SplitSpec {
  double train_fraction = 0.8;
};

std::size_t split_index(std::size_t n, const SplitSpec& spec);

/// Prefix of floor(f*N) samples and the remaining suffix.
std::pair<Trajectory, Trajectory> split(const Trajectory& traj, const SplitSpec& spec);

/// Maps CSV header names onto trajectory roles.
struct ColumnMap {
  std::string t = "t";
  std::string x_leader = "x_leader";
  std::string v_leader = "v_leader";
  std::string x_follower = "x_follower";
  std::string v_follower = "v_follower";
  std::optional<std::string> a_follower;
};

/// Reads a header-first CSV. A non-positive `dt` means "infer from the
/// first two timestamps". Timestamps must sit on the t0 + k*dt grid within 1e-6 s.
Trajectory load_csv(const std::filesystem::path& path, const ColumnMap& columns,
                    double leader_length, double dt);

/// Writes every series with round-trip precision using the default column names.
void save_csv(const Trajectory& traj, const std::filesystem::path& path);

}  // namespace cfb
